import pytest
from conftest import CORPUS, all_fixture_files
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ontomod.model import (
    And,
    Annotations,
    Disjoint,
    Equivalent,
    EquivalentToIntersection,
    Module,
    Named,
    Ontology,
    Some,
    SubClassOf,
    Synonym,
    eid,
)
from ontomod.obo import (
    DanglingIntersection,
    MalformedLine,
    MissingId,
    OboError,
    parse_document,
    parse_obo,
    read_module,
    serialize_document,
    serialize_obo,
    split_value,
)

A1, A2, A3 = eid("A:1"), eid("A:2"), eid("A:3")
PART_OF = eid("part_of")


def test_is_a_and_name():
    o = parse_obo("[Term]\nid: A:1\nname: alpha\nis_a: A:2\n")
    assert o.axioms == (SubClassOf(A1, Named(A2)),)
    assert o.classes[A1].name == "alpha"
    assert A2 in o.classes  # auto-declared
    assert any("A:2" in w for w in o.warnings)


def test_relationship_becomes_existential():
    o = parse_obo("[Term]\nid: A:1\nrelationship: part_of A:3\n")
    assert o.axioms == (SubClassOf(A1, Some(PART_OF, A3)),)
    assert PART_OF in o.relations and PART_OF not in o.classes


def test_intersection_of_pairs():
    o = parse_obo("[Term]\nid: A:1\nintersection_of: B:1\nintersection_of: part_of B:2\n")
    assert o.axioms == (
        EquivalentToIntersection(A1, And((Named(eid("B:1")), Some(PART_OF, eid("B:2"))))),
    )


def test_disjoint_from_in_both_stanzas_is_one_axiom():
    o = parse_obo("[Term]\nid: A:2\ndisjoint_from: A:1\n\n[Term]\nid: A:1\ndisjoint_from: A:2\n")
    assert o.axioms == (Disjoint(A1, A2),)


def test_equivalent_to_is_bridge_equivalence():
    o = parse_obo("[Term]\nid: A:2\nequivalent_to: A:1\n")
    assert o.axioms == (Equivalent(A1, A2),)


@pytest.mark.parametrize(
    "text, error",
    [
        ("[Term]\nname: nameless\n", MissingId),
        ("[Term]\nid A:1\n", MalformedLine),
        ("[Term]\nid: A:1\nintersection_of: B:1\n", DanglingIntersection),
        ("[Term]\nid: A:1\nis_a: B:1 B:2\n", MalformedLine),
        ("[Term]\nid: A:1\nrelationship: part_of\n", MalformedLine),
    ],
)
def test_errors(text, error):
    with pytest.raises(error) as info:
        parse_obo(text)
    assert info.value.line is not None


def test_features_fixture():
    o = parse_obo((CORPUS / "features.obo").read_text())
    f1 = o.classes[eid("F:0001")]
    assert o.id == "features"
    assert f1.name == "receptor complex"
    assert f1.definition == 'A "complex" with a\nline break and a backslash \\ here.'
    assert f1.synonyms == (
        Synonym("receptor assembly", "EXACT"),
        Synonym("rc", "NARROW"),
        Synonym("no scope given", "RELATED"),
        Synonym("old style exact", "EXACT"),
    )
    assert f1.alt_ids == (eid("F:0009"),)
    assert o.classes[eid("F:0002")].name == "complex with an exclamation \\! inside"
    assert o.classes[eid("F:0006")].is_obsolete
    has_part = eid("has_part")
    assert o.relations[has_part].name == "has part"
    assert set(o.axioms) == {
        SubClassOf(eid("F:0001"), Named(eid("F:0002"))),
        SubClassOf(eid("F:0001"), Some(has_part, eid("F:0003"))),
        EquivalentToIntersection(
            eid("F:0001"), And((Named(eid("F:0002")), Some(has_part, eid("F:0003"))))
        ),
        Disjoint(eid("F:0001"), eid("F:0004")),
        Equivalent(eid("F:0001"), eid("F:0005")),
    }
    joined = "\n".join(o.warnings)
    assert "ignored tag 'xref'" in joined and "[Instance]" in joined
    assert "relation axiom 'is_a' on has_part ignored" in joined


def test_split_value_strips_comments_and_qualifiers_outside_quotes():
    assert split_value('GO:1 {a="b"} ! note') == ("GO:1", 'a="b"')
    assert split_value('"keep ! this {and this}" [] ! drop')[0] == '"keep ! this {and this}" []'


def test_empty_ontology_serializes_to_header_only():
    text = serialize_obo(Ontology("empty", {}, {}, ()))
    assert "[Term]" not in text
    assert text.startswith("format-version: 1.2\nauto-generated-by: ontomod")
    assert "ontology: empty" in text


def test_module_with_equivalent_writes_equivalent_to():
    m = Module(
        "o", frozenset(), (Equivalent(A1, A2),), {A1: Annotations(), A2: Annotations()}, {}
    )
    assert "equivalent_to: A:2" in serialize_obo(m)


def test_module_file_round_trip(toy_ontologies):
    from ontomod.extract import extract_module

    o = toy_ontologies[0]
    m = extract_module(o, {eid("NCIT:C2"), eid("NOT:THERE")}, "Toll")
    back = read_module(serialize_obo(m))
    assert back == m


def test_serialized_tag_order():
    o = parse_obo(
        "[Term]\nid: A:1\nis_obsolete: true\ndisjoint_from: A:2\nrelationship: part_of A:3\n"
        "intersection_of: A:2\nintersection_of: A:3\nis_a: A:2\nalt_id: A:9\n"
        'synonym: "s" EXACT []\ndef: "d" []\nname: n\n'
    )
    stanza = serialize_obo(o).split("[Term]\nid: A:1\n")[1].split("\n\n")[0].splitlines()
    tags = [line.split(":")[0] for line in stanza]
    assert tags == [
        "name", "def", "synonym", "alt_id", "is_a", "intersection_of", "intersection_of",
        "relationship", "disjoint_from", "is_obsolete",
    ]


@pytest.mark.parametrize("path", all_fixture_files(), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    text = path.read_text()
    first = parse_obo(text)
    assert parse_obo(serialize_obo(first)) == first
    once = serialize_obo(first)
    assert serialize_obo(parse_obo(once)) == once


@pytest.mark.parametrize("path", all_fixture_files(), ids=lambda p: p.name)
def test_document_layer_preserves_order(path):
    doc = parse_document(path.read_text())
    assert parse_document(serialize_document(doc)) == doc


@pytest.mark.parametrize("path", all_fixture_files(), ids=lambda p: p.name)
def test_warnings_are_deterministic(path):
    text = path.read_text()
    assert parse_obo(text).warnings == parse_obo(text).warnings


# -- generated documents ----------------------------------------------------------

_id = st.sampled_from(["A:1", "A:2", "B:10", "GO:0000001", "x"])
_free = st.text(st.characters(blacklist_categories=("Cs",)), max_size=12)
_tag_line = st.one_of(
    st.builds(lambda v: f"name: {v}", _free),
    st.builds(lambda v: f'def: "{v}" []', _free),
    st.builds(lambda v, s: f'synonym: "{v}" {s} []', _free, st.sampled_from(["EXACT", "BROAD", "", "X"])),
    st.builds(lambda v: f"is_a: {v}", _id),
    st.builds(lambda v: f"alt_id: {v}", _id),
    st.builds(lambda r, v: f"relationship: {r} {v}", st.sampled_from(["part_of", "regulates"]), _id),
    st.builds(lambda v: f"disjoint_from: {v}", _id),
    st.builds(lambda v: f"equivalent_to: {v}", _id),
    st.builds(lambda v: f"xref: {v}", _free),
    st.just("is_obsolete: true"),
)
_stanza = st.builds(
    lambda i, lines: "\n".join([f"[Term]\nid: {i}", *lines]), _id, st.lists(_tag_line, max_size=6)
)
_document = st.lists(_stanza, max_size=5).map(lambda s: "format-version: 1.2\n\n" + "\n\n".join(s))


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(_document)
def test_generated_documents_reach_a_fixpoint(text):
    try:
        first = parse_obo(text)
    except OboError:
        return
    again = parse_obo(serialize_obo(first))
    assert again == first
    assert serialize_obo(again) == serialize_obo(first)


@settings(max_examples=300)
@given(st.binary(max_size=2048))
def test_parser_never_crashes_on_bytes(data):
    try:
        parse_obo(data)
    except OboError:
        pass


@settings(max_examples=200)
@given(st.lists(st.sampled_from(
    ["[Term]", "[Typedef]", "id: A:1", "id: A:2", "is_a: A:1", "intersection_of: A:1",
     "intersection_of: part_of A:2", "name: {x", 'def: "unterminated', "relationship: a b c",
     "synonym: \"x\" EXACT", "garbage", "", "! c", "id:", "equivalent_to: A:1 A:2"]
), max_size=25))
def test_parser_never_crashes_on_line_soup(lines):
    try:
        parse_obo("\n".join(lines))
    except OboError:
        pass


def test_parser_handles_large_input():
    stanza = "[Term]\nid: A:{i}\nname: term {i}\nis_a: A:{j}\n\n"
    text = "".join(stanza.format(i=i, j=i // 2) for i in range(1, 25000))
    assert len(text) > 500_000
    o = parse_obo(text)
    assert len(o.axioms) == 24999
