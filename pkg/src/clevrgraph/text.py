"""Text-side parsing: tokenize a CLEVR-domain sentence, detect object mentions with
their attribute constraints, extract spatial/matching relations, classify the
question, and assemble the text structural graph (kind G_s).

Entity detection is order-invariant in the modifiers: "large red rubber ball",
"red large rubber ball", "large ball", and "ball" all resolve to the same head
with whatever subset of constraints is present.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic
from .errors import EmptyInputError, UnclassifiedQuestionError
from .graph import Edge, Node, StructuralGraph
from .lexicon import CATEGORIES, GENERIC_OBJECT, Lexicon, default_lexicon

QUESTION_TYPES = ("count", "exist", "numerical_comparison", "attribute_comparison", "query")

_WORD_RE = re.compile(r"[A-Za-z0-9]+")
_COMPARISON_WORDS = frozenset({"more", "fewer", "less", "greater"})


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    lower: str


@dataclass
class EntitySpan:
    """A detected object mention: modifiers* followed by a shape or generic head."""

    first: int
    last: int
    constraints: dict[str, str]
    is_plural: bool
    mention_index: int


@dataclass(frozen=True)
class RelationMention:
    label: str
    src_mention: int
    dst_mention: int
    trigger: tuple[int, int]


@dataclass
class TextParse:
    """Full parse record; `graph` is the G_s the thin parse_text() wrapper returns."""

    text: str
    tokens: list[Token]
    entities: list[EntitySpan]
    relations: list[RelationMention]
    question_type: Optional[str]
    graph: StructuralGraph
    diagnostics: list[Diagnostic] = field(default_factory=list)


def tokenize(text: str) -> list[Token]:
    """Lowercased word tokens with source offsets; punctuation is discarded."""
    if not text.strip():
        raise EmptyInputError("empty or whitespace-only input text")
    return [
        Token(text=m.group(), start=m.start(), end=m.end(), lower=m.group().lower())
        for m in _WORD_RE.finditer(text)
    ]


def recognize_entities(tokens, lexicon: Lexicon | None = None) -> list[EntitySpan]:
    """Detect maximal (modifier* head-noun) spans, left to right.

    A head noun is a shape word or a generic noun; modifiers are contiguous
    attribute-value words immediately before it, consumed backwards until a word
    that is not an attribute value, a category conflict, or an earlier span.
    """
    lex = lexicon or default_lexicon()
    spans: list[EntitySpan] = []
    floor = 0
    for i, token in enumerate(tokens):
        hit = lex.canonicalize(token.lower)
        if hit is GENERIC_OBJECT:
            constraints = {}
        elif isinstance(hit, tuple) and hit[0] == "shape":
            constraints = {"shape": hit[1]}
        else:
            continue
        first = i
        j = i - 1
        while j >= floor:
            mod = lex.canonicalize(tokens[j].lower)
            if isinstance(mod, tuple) and mod[0] != "shape" and mod[0] not in constraints:
                constraints[mod[0]] = mod[1]
                first = j
                j -= 1
            else:
                break
        spans.append(
            EntitySpan(
                first=first,
                last=i,
                constraints=constraints,
                is_plural=token.lower.endswith("s"),
                mention_index=len(spans),
            )
        )
        floor = i + 1
    return spans


def _match_triggers(tokens, lexicon):
    """Occurrences of relation trigger phrases, longest match first, no overlap."""
    lowers = [t.lower for t in tokens]
    triggers = []
    i = 0
    while i < len(lowers):
        matched = None
        for phrase, label in lexicon.relation_phrases:
            if tuple(lowers[i : i + len(phrase)]) == phrase:
                matched = (i, i + len(phrase) - 1, label)
                break
        if matched:
            triggers.append(matched)
            i = matched[1] + 1
        else:
            i += 1
    return triggers


def extract_relations(tokens, entities, lexicon: Lexicon | None = None):
    """Relation mentions plus diagnostics for triggers that could not be attached.

    Spatial triggers and "same <category> as" triggers bind the nearest mention
    before the trigger to the nearest mention after it. The split pattern
    "<category> ... the same as" binds the mention that owns the queried
    attribute (the first mention after the category word) to the referent after
    the trigger.
    """
    lex = lexicon or default_lexicon()
    lowers = [t.lower for t in tokens]
    relations: list[RelationMention] = []
    diagnostics: list[Diagnostic] = []

    triggers = [(s, e, label, None) for s, e, label in _match_triggers(tokens, lex)]
    covered = {k for s, e, _, _ in triggers for k in range(s, e + 1)}

    # Split matching pattern: a bare "same as" bigram with the category named earlier,
    # as in "is the color of X the same as Y".
    for i in range(len(lowers) - 1):
        if lowers[i] == "same" and lowers[i + 1] == "as" and i not in covered:
            cat_positions = [j for j in range(i) if lowers[j] in CATEGORIES]
            if not cat_positions:
                diagnostics.append(
                    Diagnostic(
                        kind="dangling_relation",
                        message="'same as' trigger without a queried category",
                        context={"trigger": [i, i + 1]},
                    )
                )
                continue
            triggers.append((i, i + 1, f"same_{lowers[cat_positions[-1]]}", cat_positions[-1]))
    triggers.sort(key=lambda t: t[0])

    for start, end, label, cat_anchor in triggers:
        after = [e for e in entities if e.first > end]
        if cat_anchor is None:
            before = [e for e in entities if e.last < start]
            src = before[-1] if before else None
        else:
            owners = [e for e in entities if e.first > cat_anchor and e.last < start]
            src = owners[0] if owners else None
        dst = after[0] if after else None
        if src is None or dst is None or src.mention_index == dst.mention_index:
            diagnostics.append(
                Diagnostic(
                    kind="dangling_relation",
                    message=f"{label} trigger lacks a mention on one side",
                    context={"trigger": [start, end], "label": label},
                )
            )
            continue
        relations.append(
            RelationMention(
                label=label,
                src_mention=src.mention_index,
                dst_mention=dst.mention_index,
                trigger=(start, end),
            )
        )
    return relations, diagnostics


def classify_question(tokens) -> str:
    """Keyword-rule question type. Precedence: numerical_comparison, count, exist,
    attribute_comparison, query; anything else raises UnclassifiedQuestionError."""
    lowers = [t.lower for t in tokens]
    if not lowers:
        raise UnclassifiedQuestionError("no tokens to classify")

    def bigram(a, b):
        return any(x == a and y == b for x, y in zip(lowers, lowers[1:]))

    comparison_at = [i for i, w in enumerate(lowers) if w in _COMPARISON_WORDS]
    if comparison_at and any(w == "than" for w in lowers[comparison_at[0] :]):
        return "numerical_comparison"
    if bigram("how", "many") or bigram("number", "of"):
        return "count"
    if bigram("is", "there") or bigram("are", "there"):
        return "exist"
    same_at = [i for i, w in enumerate(lowers) if w == "same"]
    if (same_at and any(w == "as" for w in lowers[same_at[0] :])) or (
        "have" in lowers and bigram("the", "same")
    ):
        return "attribute_comparison"
    if "what" in lowers or "which" in lowers:
        return "query"
    raise UnclassifiedQuestionError(f"no classification rule matched: {' '.join(lowers)!r}")


def _build_graph(entities, relations, question_type) -> StructuralGraph:
    nodes: list[Node] = []
    edges: list[Edge] = []
    object_ids = []
    for span in entities:
        obj_id = len(nodes)
        object_ids.append(obj_id)
        nodes.append(
            Node(id=obj_id, kind="object", modality="text", label=f"obj{span.mention_index + 1}")
        )
        for cat in CATEGORIES:
            if cat in span.constraints:
                attr_id = len(nodes)
                nodes.append(
                    Node(
                        id=attr_id,
                        kind="attribute",
                        modality="text",
                        label=span.constraints[cat],
                        category=cat,
                    )
                )
                edges.append(Edge(src=attr_id, dst=obj_id, label="attribute_of"))
    seen = set()
    for rel in relations:
        edge = Edge(
            src=object_ids[rel.src_mention], dst=object_ids[rel.dst_mention], label=rel.label
        )
        key = (edge.src, edge.dst, edge.label)
        if key not in seen:
            seen.add(key)
            edges.append(edge)
    # Only the question type goes into provenance: the serialized graph must be
    # invariant under modifier reordering in the source text.
    provenance = json.dumps({"question_type": question_type}, sort_keys=True)
    return StructuralGraph(nodes=nodes, edges=edges, graph_kind="G_s", provenance=provenance)


def analyze_text(text: str, lexicon: Lexicon | None = None) -> TextParse:
    """Run the full text pipeline and keep every intermediate product."""
    lex = lexicon or default_lexicon()
    tokens = tokenize(text)
    entities = recognize_entities(tokens, lex)
    relations, diagnostics = extract_relations(tokens, entities, lex)
    try:
        question_type = classify_question(tokens)
    except UnclassifiedQuestionError as exc:
        question_type = None
        diagnostics.append(Diagnostic(kind="unclassified_question", message=str(exc)))
    graph = _build_graph(entities, relations, question_type)
    return TextParse(
        text=text,
        tokens=tokens,
        entities=entities,
        relations=relations,
        question_type=question_type,
        graph=graph,
        diagnostics=diagnostics,
    )


def parse_text(text: str, lexicon: Lexicon | None = None) -> StructuralGraph:
    """Text in, G_s out. Diagnostics are available through analyze_text()."""
    return analyze_text(text, lexicon).graph
