"""Shared test data builders: random valid graphs, synthetic consistent scenes,
templated questions, and clustered vector sets. Everything is driven by a
caller-supplied seeded Generator so tests stay reproducible."""

from __future__ import annotations

import numpy as np

from clevrgraph.graph import Edge, Node, StructuralGraph
from clevrgraph.lexicon import CATEGORIES, MATCHING_LABELS, SPATIAL_LABELS, default_lexicon

FIG1A_QUESTION = (
    "Is the color of the metal block that is to the right of the yellow rubber object "
    "the same as the large metal cylinder?"
)

_RELATIONS = SPATIAL_LABELS + MATCHING_LABELS


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def random_graph(rng, kind=None) -> StructuralGraph:
    """A random graph satisfying every structural invariant, spanning all graph
    kinds, both modalities, and every edge label."""
    lex = default_lexicon()
    kind = kind or _pick(rng, ("G_s", "G_t", "G_u"))
    if kind == "G_s":
        counts = {"text": int(rng.integers(0, 5))}
    elif kind == "G_t":
        counts = {"image": int(rng.integers(1, 5))}
    else:
        counts = {"image": int(rng.integers(1, 4)), "text": int(rng.integers(0, 4))}

    nodes, edges = [], []
    objects = {modality: [] for modality in counts}
    for modality in sorted(counts):
        for i in range(counts[modality]):
            obj_id = len(nodes)
            objects[modality].append(obj_id)
            nodes.append(Node(id=obj_id, kind="object", modality=modality, label=f"obj{i + 1}"))
            n_attrs = int(rng.integers(0, 5))
            cats = list(CATEGORIES)
            rng.shuffle(cats)
            for cat in cats[:n_attrs]:
                attr_id = len(nodes)
                nodes.append(
                    Node(id=attr_id, kind="attribute", modality=modality,
                         label=_pick(rng, lex.values[cat]), category=cat)
                )
                edges.append(Edge(src=attr_id, dst=obj_id, label="attribute_of"))

    seen = set()
    for modality, ids in objects.items():
        if len(ids) < 2:
            continue
        for _ in range(int(rng.integers(0, 4))):
            a, b = rng.choice(ids, size=2, replace=False)
            label = _pick(rng, _RELATIONS)
            key = (int(a), int(b), label)
            if key not in seen and a != b:
                seen.add(key)
                edges.append(Edge(src=int(a), dst=int(b), label=label))
    if kind == "G_u":
        for text_id in objects.get("text", []):
            for image_id in objects.get("image", []):
                if rng.random() < 0.4:
                    edges.append(Edge(src=text_id, dst=image_id, label="grounding"))

    return StructuralGraph(nodes=nodes, edges=edges, graph_kind=kind,
                           provenance=f"random-{int(rng.integers(1 << 30))}")


def random_scene_dict(rng, n_objects=None, image_index=0) -> dict:
    """A CLEVR-shaped scene dict whose relationships are computed from distinct
    coordinates, hence consistent (duality holds) by construction."""
    lex = default_lexicon()
    n = int(n_objects if n_objects is not None else rng.integers(1, 7))
    xs = rng.permutation(n) * 1.0 + rng.uniform(-0.3, 0.3, size=n)
    ys = rng.permutation(n) * 1.0 + rng.uniform(-0.3, 0.3, size=n)
    objects = []
    for i in range(n):
        size = _pick(rng, lex.values["size"])
        objects.append(
            {
                "size": size,
                "color": _pick(rng, lex.values["color"]),
                "material": _pick(rng, lex.values["material"]),
                "shape": _pick(rng, lex.values["shape"]),
                "3d_coords": [round(float(xs[i]), 4), round(float(ys[i]), 4),
                              0.7 if size == "large" else 0.35],
                "rotation": round(float(rng.uniform(0, 360)), 2),
            }
        )
    relationships = {
        "left": [[j for j in range(n) if xs[j] < xs[i]] for i in range(n)],
        "right": [[j for j in range(n) if xs[j] > xs[i]] for i in range(n)],
        "front": [[j for j in range(n) if ys[j] > ys[i]] for i in range(n)],
        "behind": [[j for j in range(n) if ys[j] < ys[i]] for i in range(n)],
    }
    return {"image_index": image_index, "objects": objects, "relationships": relationships}


_HEADS = ("cube", "block", "sphere", "ball", "cylinder", "thing", "object")
_MODIFIERS = {
    "size": ("small", "large", "big", "tiny"),
    "color": ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"),
    "material": ("rubber", "metal", "metallic", "shiny", "matte"),
}


def random_entity_phrase(rng):
    """(phrase, expected constraint map) with 0-3 modifiers from distinct categories."""
    lex = default_lexicon()
    head = _pick(rng, _HEADS)
    expected = {}
    head_hit = lex.canonicalize(head)
    if isinstance(head_hit, tuple):
        expected["shape"] = head_hit[1]
    cats = list(_MODIFIERS)
    rng.shuffle(cats)
    words = []
    for cat in cats[: int(rng.integers(0, 4))]:
        word = _pick(rng, _MODIFIERS[cat])
        words.append(word)
        expected[cat] = lex.canonicalize(word)[1]
    rng.shuffle(words)
    return " ".join(words + [head]), expected


_QUESTION_TEMPLATES = (
    "Is there a {e0}?",
    "How many {e0}s are there?",
    "What color is the {e0}?",
    "Is the {e0} left of the {e1}?",
    "Is the {e0} behind the {e1}?",
    "Are there more {e0}s than {e1}s?",
    "Is the {e0} the same size as the {e1}?",
    "Is the color of the {e0} the same as the {e1}?",
)


def random_question(rng) -> str:
    template = _pick(rng, _QUESTION_TEMPLATES)
    e0, _ = random_entity_phrase(rng)
    e1, _ = random_entity_phrase(rng)
    return template.format(e0=e0, e1=e1)


def two_blobs(rng, n=60, dim=18, separation=10.0):
    """Two unit-variance Gaussian blobs with centers `separation` sigmas apart."""
    half = n // 2
    center = np.zeros(dim)
    center[0] = separation
    X = np.vstack([
        rng.normal(0.0, 1.0, size=(half, dim)),
        center + rng.normal(0.0, 1.0, size=(n - half, dim)),
    ])
    labels = np.array([0] * half + [1] * (n - half))
    return X, labels


def template_clusters(rng, k=7, per_cluster=50, dim=19, spread=0.05):
    """k tight, well-separated clusters mimicking per-template question groups."""
    centers = rng.normal(0.0, 10.0, size=(k, dim))
    labels = np.repeat(np.arange(k), per_cluster)
    X = centers[labels] + rng.normal(0.0, spread, size=(k * per_cluster, dim))
    return X, labels
