"""Syntactic bottom-locality modules and the cross-ontology signature fixpoint."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .matching import match_terms
from .model import (
    Axiom,
    ClassExpr,
    Disjoint,
    EntityId,
    Equivalent,
    EquivalentToIntersection,
    Module,
    Named,
    Ontology,
    Some,
    SubClassOf,
    TermSet,
    ascii_lower,
    carve_module,
    sig_of_axiom,
    sig_of_module,
)

log = logging.getLogger(__name__)

ENRICH_FIELDS = ("id", "name", "synonym")
DEFAULT_MAX_ROUNDS = 32


class MaxRoundsExceeded(RuntimeError):
    pass


def is_bot(e: ClassExpr, sigma: frozenset[EntityId] | set[EntityId]) -> bool:
    """Whether ``e`` collapses to the empty class once out-of-sigma symbols are empty."""
    if isinstance(e, Named):
        return e.entity not in sigma
    if isinstance(e, Some):
        return e.relation not in sigma or e.filler not in sigma
    return any(is_bot(c, sigma) for c in e.conjuncts)


def is_bot_local(a: Axiom, sigma: frozenset[EntityId] | set[EntityId]) -> bool:
    if isinstance(a, SubClassOf):
        return a.sub not in sigma
    if isinstance(a, EquivalentToIntersection):
        return a.lhs not in sigma and is_bot(a.rhs, sigma)
    if isinstance(a, Disjoint):
        return a.a not in sigma or a.b not in sigma
    if isinstance(a, Equivalent):
        return a.a not in sigma and a.b not in sigma
    raise TypeError(f"not an axiom: {a!r}")


def _triggers(a: Axiom) -> frozenset[EntityId]:
    # Symbols whose arrival in sigma can turn ``a`` non-local.
    if isinstance(a, SubClassOf):
        return frozenset((a.sub,))
    return sig_of_axiom(a)


def extract_module(o: Ontology, seed: Iterable[EntityId], seed_label: str = "module") -> Module:
    """Bottom-locality module of ``o`` for ``seed``.

    Worklist form of the usual fixpoint: an axiom is re-examined only when one
    of the symbols it depends on enters sigma. The result is the least fixpoint
    and so does not depend on axiom order.
    """
    seed = frozenset(seed)
    sigma: set[EntityId] = set(seed)
    watchers: dict[EntityId, list[int]] = defaultdict(list)
    for i, a in enumerate(o.axioms):
        for e in _triggers(a):
            watchers[e].append(i)

    in_module = [False] * len(o.axioms)
    pending = list(range(len(o.axioms)))
    while pending:
        i = pending.pop()
        if in_module[i]:
            continue
        a = o.axioms[i]
        if is_bot_local(a, sigma):
            continue
        in_module[i] = True
        for e in sig_of_axiom(a):
            if e not in sigma:
                sigma.add(e)
                pending.extend(j for j in watchers.get(e, ()) if not in_module[j])

    axioms = [a for a, keep in zip(o.axioms, in_module) if keep]
    return carve_module(o, axioms, seed, seed_label)


def enrich_terms(t: TermSet, m: Module, fields: Sequence[str] = ("id", "name")) -> TermSet:
    """Add the string forms of a module's class symbols to ``t``.

    ``fields`` picks which strings: ``id`` (the lowercased CURIE), ``name``,
    ``synonym``.
    """
    unknown = set(fields) - set(ENRICH_FIELDS)
    if unknown:
        raise ValueError(f"unknown enrich fields: {sorted(unknown)}")
    extra: set[str] = set()
    for e in sig_of_module(m):
        ann = m.classes.get(e)
        if ann is None:
            continue
        if "id" in fields:
            extra.add(str(e))
        if "name" in fields and ann.name:
            extra.add(ann.name)
        if "synonym" in fields:
            extra.update(s.text for s in ann.synonyms)
    folded = {ascii_lower(s.strip()) for s in extra}
    folded.discard("")
    if folded <= t.terms:
        return t
    return t.union(folded)


@dataclass(frozen=True)
class TraceRow:
    round: int
    ontology: str
    term_count: int
    signature_size: int
    axiom_count: int


@dataclass(frozen=True)
class FixpointTrace:
    rows: tuple[TraceRow, ...]

    @property
    def rounds(self) -> int:
        return max((r.round for r in self.rows), default=0)

    def to_tsv(self) -> str:
        lines = ["round\tontology\ttermCount\tsignatureSize\taxiomCount"]
        lines += [
            f"{r.round}\t{r.ontology}\t{r.term_count}\t{r.signature_size}\t{r.axiom_count}"
            for r in self.rows
        ]
        return "\n".join(lines) + "\n"


class FixpointResult(NamedTuple):
    modules: tuple[Module, ...]
    trace: FixpointTrace
    terms: TermSet


def run_fixpoint(
    ontologies: Sequence[Ontology],
    seeds: TermSet,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    *,
    seed_label: str = "module",
    match_mode: str = "substring",
    enrich_fields: Sequence[str] = ("id", "name"),
) -> FixpointResult:
    """Extract one module per ontology, enriching the term set until stable.

    Ontologies are processed in the given order within a round, and the term
    set grows after every extraction. A round that leaves both the term set
    and the union of module signatures unchanged ends the loop; at least two
    rounds always run.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if not ontologies:
        raise ValueError("need at least one ontology")
    ids = [o.id for o in ontologies]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate ontology ids: {ids}")

    terms = seeds
    sigmas: dict[str, frozenset[EntityId]] = {o.id: frozenset() for o in ontologies}
    modules: dict[str, Module] = {}
    rows: list[TraceRow] = []
    previous_union: frozenset[EntityId] | None = None

    for round_no in range(1, max_rounds + 1):
        terms_at_start = terms
        for o in ontologies:
            matched = match_terms(o, terms, match_mode).matched
            sigmas[o.id] = sigmas[o.id] | matched
            m = extract_module(o, sigmas[o.id], seed_label)
            modules[o.id] = m
            rows.append(
                TraceRow(round_no, o.id, len(terms), len(sig_of_module(m)), len(m.axioms))
            )
            terms = enrich_terms(terms, m, enrich_fields)
        union = frozenset().union(*(sig_of_module(m) for m in modules.values()))
        log.debug("round %d: %d terms, %d symbols", round_no, len(terms), len(union))
        if union == previous_union and terms == terms_at_start:
            return FixpointResult(
                tuple(modules[o.id] for o in ontologies), FixpointTrace(tuple(rows)), terms
            )
        previous_union = union

    raise MaxRoundsExceeded(f"no fixpoint after {max_rounds} rounds")


def order_audit(
    ontologies: Sequence[Ontology],
    seeds: TermSet,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    **kwargs,
) -> list[tuple[str, str, int, int]]:
    """Compare the configured order with its reverse.

    Returns one row per ontology: (ontology, "same"|"differs", axiom count in
    the configured order, axiom count in reversed order).
    """
    forward = run_fixpoint(ontologies, seeds, max_rounds, **kwargs)
    backward = run_fixpoint(list(reversed(ontologies)), seeds, max_rounds, **kwargs)
    back = {m.source: m for m in backward.modules}
    rows = []
    for m in forward.modules:
        other = back[m.source]
        verdict = "same" if m.axioms == other.axioms else "differs"
        rows.append((m.source, verdict, len(m.axioms), len(other.axioms)))
    return rows
