import pytest

from clevrgraph.errors import LexiconError
from clevrgraph.lexicon import (
    CATEGORIES,
    GENERIC_OBJECT,
    NOT_IN_LEXICON,
    RELATION_LABELS,
    default_lexicon,
    load_lexicon,
    parse_lexicon,
)


@pytest.fixture(scope="module")
def lex():
    return default_lexicon()


def test_canonicalize_synonym(lex):
    assert lex.canonicalize("block") == ("shape", "cube")
    assert lex.canonicalize("big") == ("size", "large")
    assert lex.canonicalize("shiny") == ("material", "metal")


def test_canonicalize_identity_on_canonical_forms(lex):
    for cat, values in lex.values.items():
        for value in values:
            assert lex.canonicalize(value) == (cat, value)


def test_canonicalize_generic_and_unknown(lex):
    assert lex.canonicalize("thing") is GENERIC_OBJECT
    assert lex.canonicalize("objects") is GENERIC_OBJECT
    assert lex.canonicalize("xylophone") is NOT_IN_LEXICON
    assert lex.canonicalize(["left", "of"]) is NOT_IN_LEXICON


def test_canonicalize_accepts_token_sequences(lex):
    assert lex.canonicalize(["ball"]) == ("shape", "sphere")


def test_value_counts(lex):
    assert len(lex.values["size"]) == 2
    assert len(lex.values["color"]) == 8
    assert len(lex.values["material"]) == 2
    assert len(lex.values["shape"]) == 3
    assert set(lex.values) == set(CATEGORIES)


def test_slot_index_documented_order(lex):
    assert lex.slot_index("size", "small") == 0
    assert lex.slot_index("size", "large") == 1
    assert lex.slot_index("shape", "cube") == 0


def test_slot_index_is_a_bijection_per_category(lex):
    for cat, values in lex.values.items():
        slots = [lex.slot_index(cat, v) for v in values]
        assert sorted(slots) == list(range(len(values)))


def test_slot_index_rejects_non_canonical(lex):
    with pytest.raises(LexiconError):
        lex.slot_index("color", "mauve")
    with pytest.raises(LexiconError):
        lex.slot_index("size", "cube")


def test_relation_terms_map_to_known_labels(lex):
    assert set(lex.relation_terms.values()) <= set(RELATION_LABELS)
    assert lex.relation_terms["left of"] == "left"
    assert lex.relation_terms["in front of"] == "front"
    assert lex.relation_terms["same color as"] == "same_color"


def test_relation_phrases_sorted_longest_first(lex):
    lengths = [len(phrase) for phrase, _ in lex.relation_phrases]
    assert lengths == sorted(lengths, reverse=True)


def test_load_lexicon_from_file(tmp_path):
    from clevrgraph.lexicon import DEFAULT_LEXICON_INI

    path = tmp_path / "lexicon.ini"
    path.write_text(DEFAULT_LEXICON_INI, encoding="utf-8")
    loaded = load_lexicon(path)
    assert loaded.values == default_lexicon().values
    assert loaded.synonyms == default_lexicon().synonyms


def test_parse_lexicon_missing_section():
    with pytest.raises(LexiconError):
        parse_lexicon("[values]\nsize = small, large\n")


def test_parse_lexicon_bad_value_count():
    bad = """\
[values]
size = small
color = gray, red, blue, green, brown, purple, cyan, yellow
material = rubber, metal
shape = cube, sphere, cylinder

[synonyms]

[relation_terms]
"""
    with pytest.raises(LexiconError):
        parse_lexicon(bad)


def test_parse_lexicon_conflicting_synonym():
    bad = """\
[values]
size = small, large
color = gray, red, blue, green, brown, purple, cyan, yellow
material = rubber, metal
shape = cube, sphere, cylinder

[synonyms]
metal = shape: cube

[relation_terms]
"""
    with pytest.raises(LexiconError):
        parse_lexicon(bad)


def test_parse_lexicon_unknown_relation_label():
    bad = """\
[values]
size = small, large
color = gray, red, blue, green, brown, purple, cyan, yellow
material = rubber, metal
shape = cube, sphere, cylinder

[synonyms]

[relation_terms]
next to = beside
"""
    with pytest.raises(LexiconError):
        parse_lexicon(bad)


def test_parse_lexicon_malformed_document():
    with pytest.raises(LexiconError):
        parse_lexicon("values\nsize small")
