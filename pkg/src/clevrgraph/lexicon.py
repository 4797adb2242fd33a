"""The closed CLEVR vocabulary: attribute categories, canonical values, synonyms,
and relation trigger phrases.

The category order (size, color, material, shape) and the value order inside each
category are fixed: they define the one-hot slot layout used by the embedder, so
changing them changes every produced feature bundle.
"""

from __future__ import annotations

import configparser
from functools import lru_cache

from .errors import LexiconError

CATEGORIES = ("size", "color", "material", "shape")

# Relation edge labels, grouped. Order matters: it fixes one-hot edge slots.
SPATIAL_LABELS = ("left", "right", "front", "behind")
MATCHING_LABELS = ("same_size", "same_color", "same_material", "same_shape")
RELATION_LABELS = SPATIAL_LABELS + MATCHING_LABELS

_EXPECTED_VALUE_COUNTS = {"size": 2, "color": 8, "material": 2, "shape": 3}


class _Marker:
    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name


#: canonicalize() result for generic object nouns ("thing", "object", plurals).
GENERIC_OBJECT = _Marker("GENERIC_OBJECT")

#: canonicalize() result for surface forms outside the closed vocabulary.
NOT_IN_LEXICON = _Marker("NOT_IN_LEXICON")


class Lexicon:
    """Immutable closed vocabulary. Safe for unrestricted concurrent reads.

    values: category -> ordered tuple of canonical values.
    synonyms: surface form -> (category, canonical value), including the identity
        mapping for every canonical value. Generic nouns are kept separately.
    generic_nouns: surface forms denoting an object with no shape constraint.
    relation_terms: surface phrase -> relation label (spatial or matching).
    """

    def __init__(self, values, synonyms, generic_nouns, relation_terms):
        self.values = {cat: tuple(vals) for cat, vals in values.items()}
        self.synonyms = dict(synonyms)
        self.generic_nouns = frozenset(generic_nouns)
        self.relation_terms = dict(relation_terms)
        self._validate()
        self._slots = {
            (cat, val): i for cat, vals in self.values.items() for i, val in enumerate(vals)
        }
        # Trigger phrases as token tuples, longest first so that e.g.
        # "to the right of" wins over its embedded "right of".
        self.relation_phrases = tuple(
            sorted(
                ((tuple(phrase.split()), label) for phrase, label in self.relation_terms.items()),
                key=lambda item: (-len(item[0]), item[0]),
            )
        )

    def _validate(self):
        if set(self.values) != set(CATEGORIES):
            raise LexiconError(
                f"categories must be exactly {set(CATEGORIES)}, got {set(self.values)}"
            )
        for cat, expected in _EXPECTED_VALUE_COUNTS.items():
            vals = self.values[cat]
            if len(vals) != expected or len(set(vals)) != expected:
                raise LexiconError(f"category {cat!r} needs {expected} distinct values, got {vals}")
        for surface, target in self.synonyms.items():
            cat, val = target
            if cat not in self.values or val not in self.values[cat]:
                raise LexiconError(f"synonym {surface!r} maps to unknown value {target}")
        overlap = self.generic_nouns & set(self.synonyms)
        if overlap:
            raise LexiconError(f"surface forms mapped both generic and valued: {sorted(overlap)}")
        for phrase, label in self.relation_terms.items():
            if label not in RELATION_LABELS:
                raise LexiconError(f"relation phrase {phrase!r} maps to unknown label {label!r}")
            if not phrase.strip():
                raise LexiconError("empty relation phrase")

    def canonicalize(self, surface):
        """Map a lowercase surface form to (category, value), GENERIC_OBJECT, or
        NOT_IN_LEXICON. Accepts a string or a token sequence; never guesses."""
        if not isinstance(surface, str):
            surface = " ".join(surface)
        if surface in self.generic_nouns:
            return GENERIC_OBJECT
        return self.synonyms.get(surface, NOT_IN_LEXICON)

    def slot_index(self, category, value) -> int:
        """Fixed ordinal of a canonical value within its category."""
        try:
            return self._slots[(category, value)]
        except KeyError:
            raise LexiconError(f"{value!r} is not a canonical {category} value") from None

    def is_canonical(self, category, value) -> bool:
        return (category, value) in self._slots


# The built-in vocabulary follows the released CLEVR metadata: two sizes, eight
# colors, two materials, three shapes, and the standard synonym table.
DEFAULT_LEXICON_INI = """\
[values]
size = small, large
color = gray, red, blue, green, brown, purple, cyan, yellow
material = rubber, metal
shape = cube, sphere, cylinder

[synonyms]
big = size: large
tiny = size: small
block = shape: cube
blocks = shape: cube
cubes = shape: cube
ball = shape: sphere
balls = shape: sphere
spheres = shape: sphere
cylinders = shape: cylinder
metallic = material: metal
shiny = material: metal
matte = material: rubber
thing = generic
things = generic
object = generic
objects = generic

[relation_terms]
left of = left
to the left of = left
on the left side of = left
right of = right
to the right of = right
on the right side of = right
in front of = front
front of = front
behind = behind
same size as = same_size
same color as = same_color
same material as = same_material
same shape as = same_shape
"""


def parse_lexicon(text: str) -> Lexicon:
    """Build a Lexicon from the INI-style lexicon document (see docs/lexicon-format.md)."""
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise LexiconError(f"malformed lexicon file: {exc}") from exc
    for section in ("values", "synonyms", "relation_terms"):
        if not parser.has_section(section):
            raise LexiconError(f"lexicon file missing [{section}] section")

    values = {}
    for cat, raw in parser.items("values"):
        values[cat] = tuple(v.strip() for v in raw.split(",") if v.strip())

    synonyms = {}
    generic_nouns = set()
    for surface, raw in parser.items("synonyms"):
        raw = raw.strip()
        if raw == "generic":
            generic_nouns.add(surface)
            continue
        if ":" not in raw:
            raise LexiconError(f"synonym {surface!r}: expected 'category: value' or 'generic'")
        cat, val = (part.strip() for part in raw.split(":", 1))
        synonyms[surface] = (cat, val)

    # Canonical forms map to themselves so lookup is total over the vocabulary.
    for cat, vals in values.items():
        for val in vals:
            previous = synonyms.setdefault(val, (cat, val))
            if previous != (cat, val):
                raise LexiconError(f"surface {val!r} maps to both {previous} and {(cat, val)}")

    relation_terms = {phrase: label.strip() for phrase, label in parser.items("relation_terms")}
    return Lexicon(values, synonyms, generic_nouns, relation_terms)


def load_lexicon(path) -> Lexicon:
    """Load a lexicon document from disk (UTF-8)."""
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    """The compiled-in CLEVR vocabulary."""
    return parse_lexicon(DEFAULT_LEXICON_INI)
