"""Seed-term matching: which classes of an ontology mention a set of terms."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import EntityId, Module, Ontology, TermSet, ascii_lower

FIELDS = ("ID", "NAME", "DEF", "SYNONYM", "ALT_ID")
MATCH_MODES = ("substring", "word")
MIN_TERM_LENGTH = 3

_FIELD_RANK = {f: i for i, f in enumerate(FIELDS)}


class EmptyTermSet(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Hit:
    entity: EntityId
    field: str
    term: str

    def sort_key(self) -> tuple:
        return (self.entity, _FIELD_RANK[self.field], self.term)


@dataclass(frozen=True)
class MatchReport:
    ontology: str
    hits: tuple[Hit, ...]

    @property
    def matched(self) -> frozenset[EntityId]:
        return frozenset(h.entity for h in self.hits)

    def to_tsv(self) -> str:
        lines = ["entity\tfield\tterm"]
        lines += [f"{h.entity}\t{h.field}\t{h.term}" for h in self.hits]
        return "\n".join(lines) + "\n"


def _contains(term: str, text: str, mode: str) -> bool:
    if mode == "substring":
        return term in text
    return re.search(r"(?<![a-z0-9])" + re.escape(term) + r"(?![a-z0-9])", text) is not None


def _field_texts(e: EntityId, o: Ontology) -> Iterable[tuple[str, str]]:
    ann = o.classes[e]
    yield "ID", str(e)
    if ann.name:
        yield "NAME", ann.name
    if ann.definition:
        yield "DEF", ann.definition
    for syn in ann.synonyms:
        yield "SYNONYM", syn.text
    for alt in ann.alt_ids:
        yield "ALT_ID", str(alt)


def match_terms(o: Ontology, t: TermSet, mode: str = "substring") -> MatchReport:
    """Find every non-obsolete class whose id or annotations contain a term.

    Comparison folds ASCII case only. Relations never match; they reach a
    signature through the axioms that use them.
    """
    if not len(t):
        raise EmptyTermSet("at least one seed term is required")
    if mode not in MATCH_MODES:
        raise ValueError(f"unknown match mode {mode!r}")
    terms = sorted(t.terms)
    hits: set[Hit] = set()
    for e, ann in o.classes.items():
        if ann.is_obsolete:
            continue
        for field, text in _field_texts(e, o):
            folded = ascii_lower(text)
            for term in terms:
                if _contains(term, folded, mode):
                    hits.add(Hit(e, field, term))
    return MatchReport(o.id, tuple(sorted(hits, key=Hit.sort_key)))


def match_fixpoint_test(
    ontologies: Sequence[Ontology],
    t: TermSet,
    modules: Sequence[Module],
    mode: str = "substring",
    enrich_fields: Sequence[str] = ("id", "name"),
) -> bool:
    """True when enriching ``t`` with the modules changes no ontology's matches."""
    from .extract import enrich_terms

    enriched = t
    for m in modules:
        enriched = enrich_terms(enriched, m, enrich_fields)
    if enriched == t:
        return True
    if not len(t):
        return False
    return all(match_terms(o, t, mode) == match_terms(o, enriched, mode) for o in ontologies)


def validate_seed_terms(terms: Iterable[str]) -> TermSet:
    """Build the initial term set, rejecting empty lists and short terms."""
    cleaned = [s.strip() for s in terms if s.strip()]
    if not cleaned:
        raise EmptyTermSet("at least one seed term is required")
    short = [s for s in cleaned if len(s) < MIN_TERM_LENGTH]
    if short:
        raise ValueError(f"seed terms shorter than {MIN_TERM_LENGTH} characters: {short}")
    return TermSet.of(cleaned)
