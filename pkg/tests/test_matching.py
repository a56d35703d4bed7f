import pytest
from conftest import CORPUS
from hypothesis import given
from hypothesis import strategies as st

from ontomod.extract import extract_module, run_fixpoint
from ontomod.matching import (
    EmptyTermSet,
    Hit,
    match_fixpoint_test,
    match_terms,
    validate_seed_terms,
)
from ontomod.model import Annotations, Ontology, Synonym, TermSet, eid
from ontomod.obo import parse_obo


def _onto(**names):
    return Ontology(
        "t",
        {eid(k.replace("_", ":")): Annotations(name=v) for k, v in names.items()},
        {},
        (),
    )


def test_substring_name_hit():
    o = _onto(G_1="toll-like receptor 4 signaling pathway")
    assert match_terms(o, TermSet.of(["toll"])).hits == (Hit(eid("G:1"), "NAME", "toll"),)


def test_case_folding_tlr4():
    o = _onto(G_1="TLR4 binding")
    assert match_terms(o, TermSet.of(["tlr"])).hits == (Hit(eid("G:1"), "NAME", "tlr"),)


def test_troll_is_not_toll():
    o = _onto(G_1="troll cave")
    assert match_terms(o, TermSet.of(["toll"])).matched == frozenset()


def test_all_fields_and_ordering():
    o = Ontology(
        "t",
        {
            eid("TOLL:1"): Annotations(),
            eid("X:2"): Annotations(
                name="nothing",
                definition="a Toll thing",
                synonyms=(Synonym("TOLL-ish"),),
                alt_ids=(eid("TOLL:9"),),
            ),
            eid("X:3"): Annotations(name="toll", is_obsolete=True),
        },
        {},
        (),
    )
    hits = match_terms(o, TermSet.of(["toll"])).hits
    assert [(str(h.entity), h.field) for h in hits] == [
        ("TOLL:1", "ID"),
        ("X:2", "DEF"),
        ("X:2", "SYNONYM"),
        ("X:2", "ALT_ID"),
    ]


def test_word_mode_is_stricter():
    o = _onto(G_1="TLR4 binding", G_2="TLR signaling")
    t = TermSet.of(["tlr"])
    assert match_terms(o, t, "substring").matched == {eid("G:1"), eid("G:2")}
    assert match_terms(o, t, "word").matched == {eid("G:2")}


def test_relations_do_not_match():
    o = Ontology("t", {}, {eid("toll_rel"): Annotations(name="toll")}, ())
    assert not match_terms(o, TermSet.of(["toll"])).hits


def test_empty_term_set():
    with pytest.raises(EmptyTermSet):
        match_terms(_onto(), TermSet())


def test_seed_validation():
    with pytest.raises(EmptyTermSet):
        validate_seed_terms([])
    with pytest.raises(ValueError):
        validate_seed_terms(["ab", "toll"])
    assert validate_seed_terms(["Toll", "TLR"]).terms == {"toll", "tlr"}


def test_report_tsv():
    o = _onto(G_1="TLR4")
    assert match_terms(o, TermSet.of(["tlr"])).to_tsv() == "entity\tfield\tterm\nG:1\tNAME\ttlr\n"


words = st.text("abcdeflorTLR -", min_size=0, max_size=12)
termsets = st.sets(st.text("abclort", min_size=1, max_size=3), min_size=1, max_size=4)


@given(st.lists(words, min_size=1, max_size=6), termsets, termsets)
def test_matching_is_monotone_and_skips_obsolete(names, t1, extra):
    o = Ontology(
        "t",
        {eid(f"G:{i}"): Annotations(name=n, is_obsolete=(i % 3 == 0)) for i, n in enumerate(names)},
        {},
        (),
    )
    small = TermSet.of(t1)
    big = TermSet.of(t1 | extra)
    r_small, r_big = match_terms(o, small), match_terms(o, big)
    assert r_small.matched <= r_big.matched
    assert r_small == match_terms(o, small)
    assert all(not o.classes[h.entity].is_obsolete for h in r_big.hits)
    assert r_small.matched == {h.entity for h in r_small.hits}


# -- fixpoint test -------------------------------------------------------------------


def _pair():
    return [
        parse_obo((CORPUS / "first.obo").read_text()),
        parse_obo((CORPUS / "second.obo").read_text()),
    ]


def test_vacuous_fixpoint():
    o = _onto(G_1="unrelated")
    t = TermSet.of(["toll"])
    m = extract_module(o, match_terms(o, t).matched)
    assert match_fixpoint_test([o], t, [m])


def test_fresh_label_breaks_fixpoint():
    ontologies = _pair()
    t = TermSet.of(["toll", "tlr"])
    modules = [extract_module(o, match_terms(o, t).matched) for o in ontologies]
    # the second module carries "adaptor molecule", which names A:3 in the first ontology
    assert not match_fixpoint_test(ontologies, t, modules)


def test_fixpoint_holds_after_convergence():
    ontologies = _pair()
    result = run_fixpoint(ontologies, TermSet.of(["toll", "tlr"]))
    assert match_fixpoint_test(ontologies, result.terms, result.modules)
