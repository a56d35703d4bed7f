"""Told-axiom unsatisfiability detection, explanations and repair plans.

This is not a DL reasoner. A class is reported unsatisfiable when its told
subsumers (through is_a edges, named conjuncts of intersections, and
equivalences) include two classes asserted disjoint. Existential restrictions
never propagate emptiness.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .integrate import MergedOntology
from .model import (
    BRIDGE,
    Axiom,
    Disjoint,
    EntityId,
    Equivalent,
    EquivalentToIntersection,
    Named,
    SubClassOf,
    parse_axiom,
)

REPORT_HEADER = "# told-clash detection only"


class NotAClash(ValueError):
    pass


class RepairIncomplete(RuntimeError):
    def __init__(self, message: str, plan: RepairPlan, remaining: Sequence[EntityId]) -> None:
        super().__init__(message)
        self.plan = plan
        self.remaining = tuple(remaining)


class UnionFind:
    """Disjoint sets with path halving; the smallest member names each set."""

    def __init__(self, elements: Iterable[EntityId] = ()) -> None:
        self.parent: dict[EntityId, EntityId] = {}
        for e in elements:
            self.add(e)

    def add(self, e: EntityId) -> None:
        self.parent.setdefault(e, e)

    def find(self, e: EntityId) -> EntityId:
        self.add(e)
        parent = self.parent
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    def union(self, a: EntityId, b: EntityId) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra


def _named_supers(a: Axiom) -> list[tuple[EntityId, EntityId]]:
    if isinstance(a, SubClassOf) and isinstance(a.sup, Named):
        return [(a.sub, a.sup.entity)]
    if isinstance(a, EquivalentToIntersection):
        return [(a.lhs, c.entity) for c in a.rhs.conjuncts if isinstance(c, Named)]
    return []


@dataclass(frozen=True)
class ToldClosure:
    representative: Mapping[EntityId, EntityId]
    subsumers: Mapping[EntityId, frozenset[EntityId]]
    disjoint_pairs: frozenset[tuple[EntityId, EntityId]]

    def rep(self, e: EntityId) -> EntityId:
        return self.representative.get(e, e)

    def group(self, r: EntityId) -> list[EntityId]:
        return sorted(e for e, rr in self.representative.items() if rr == r)


def _class_entities(classes: Iterable[EntityId], axioms: Iterable[Axiom]) -> set[EntityId]:
    entities = set(classes)
    for a in axioms:
        if isinstance(a, (Disjoint, Equivalent)):
            entities.update((a.a, a.b))
        for sub, sup in _named_supers(a):
            entities.update((sub, sup))
    return entities


def closure_of(classes: Iterable[EntityId], axioms: Sequence[Axiom]) -> ToldClosure:
    uf = UnionFind(_class_entities(classes, axioms))
    for a in axioms:
        if isinstance(a, Equivalent):
            uf.union(a.a, a.b)
    representative = {e: uf.find(e) for e in uf.parent}

    edges: dict[EntityId, set[EntityId]] = defaultdict(set)
    for a in axioms:
        for sub, sup in _named_supers(a):
            edges[representative[sub]].add(representative[sup])

    subsumers: dict[EntityId, frozenset[EntityId]] = {}
    for r in sorted(set(representative.values())):
        seen = {r}
        queue = deque([r])
        while queue:
            for nxt in edges.get(queue.popleft(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        subsumers[r] = frozenset(seen)

    pairs = set()
    for a in axioms:
        if isinstance(a, Disjoint):
            p, q = representative[a.a], representative[a.b]
            pairs.add((p, q) if p <= q else (q, p))
    return ToldClosure(representative, subsumers, frozenset(pairs))


def build_closure(m: MergedOntology) -> ToldClosure:
    return closure_of(m.classes, m.axioms)


def _witnesses(closure: ToldClosure, r: EntityId) -> list[tuple[EntityId, EntityId]]:
    sups = closure.subsumers[r]
    return sorted(pq for pq in closure.disjoint_pairs if pq[0] in sups and pq[1] in sups)


def find_unsat(m: MergedOntology) -> list[tuple[EntityId, tuple[EntityId, EntityId]]]:
    """Every (class, witnessing disjoint pair of representatives), sorted."""
    closure = build_closure(m)
    by_rep = {r: _witnesses(closure, r) for r in closure.subsumers}
    out = []
    for e in sorted(closure.representative):
        for pair in by_rep[closure.representative[e]]:
            out.append((e, pair))
    return out


def unsat_classes(m: MergedOntology) -> list[EntityId]:
    return sorted({e for e, _ in find_unsat(m)})


# -- explanations ---------------------------------------------------------------


@dataclass(frozen=True)
class Explanation:
    clash_class: EntityId
    witness: tuple[EntityId, EntityId]
    axioms: tuple[Axiom, ...]
    provenance: Mapping[Axiom, frozenset[str]]

    def as_dict(self) -> dict:
        return {
            "class": str(self.clash_class),
            "witness": [str(self.witness[0]), str(self.witness[1])],
            "axioms": [
                {"axiom": str(a), "provenance": sorted(self.provenance.get(a, ()))}
                for a in self.axioms
            ],
        }


def _graph(axioms: Iterable[Axiom]) -> dict[EntityId, list[tuple[EntityId, Axiom]]]:
    graph: dict[EntityId, list[tuple[EntityId, Axiom]]] = defaultdict(list)
    for a in axioms:
        if isinstance(a, Equivalent):
            graph[a.a].append((a.b, a))
            graph[a.b].append((a.a, a))
        for sub, sup in _named_supers(a):
            graph[sub].append((sup, a))
    return graph


def _reach(start: EntityId, axioms: Iterable[Axiom]) -> dict[EntityId, tuple[EntityId, Axiom] | None]:
    """BFS over told edges; maps each reached entity to its (parent, axiom)."""
    graph = _graph(axioms)
    parents: dict[EntityId, tuple[EntityId, Axiom] | None] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt, a in graph.get(node, ()):
            if nxt not in parents:
                parents[nxt] = (node, a)
                queue.append(nxt)
    return parents


def _path_axioms(parents, end: EntityId) -> list[Axiom]:
    out = []
    while parents[end] is not None:
        end, a = parents[end]
        out.append(a)
    return out


def _clashes(x: EntityId, axioms: Sequence[Axiom], disjoints: frozenset[Disjoint]) -> bool:
    reached = _reach(x, axioms)
    return any(
        isinstance(a, Disjoint) and a in disjoints and a.a in reached and a.b in reached
        for a in axioms
    )


def explain(m: MergedOntology, clash: EntityId) -> list[Explanation]:
    """One minimal axiom set per witnessing disjoint pair of ``clash``.

    Starts from the shortest told paths to both sides of a disjointness and
    then drops axioms one at a time, in canonical order, whenever the clash
    survives without them.
    """
    closure = build_closure(m)
    r = closure.rep(clash)
    witnesses = _witnesses(closure, r) if r in closure.subsumers else []
    if not witnesses:
        raise NotAClash(f"{clash} is not unsatisfiable")

    found: dict[tuple[Axiom, ...], Explanation] = {}
    reached = _reach(clash, m.axioms)
    for pair in witnesses:
        disjoints = frozenset(
            a
            for a in m.axioms
            if isinstance(a, Disjoint)
            and tuple(sorted((closure.rep(a.a), closure.rep(a.b)))) == pair
        )
        start = min(
            (d for d in disjoints if d.a in reached and d.b in reached), key=lambda d: d.sort_key()
        )
        candidate = {start, *_path_axioms(reached, start.a), *_path_axioms(reached, start.b)}
        current = sorted(candidate, key=lambda a: a.sort_key())
        for a in list(current):
            trial = [b for b in current if b != a]
            if _clashes(clash, trial, disjoints):
                current = trial
        key = tuple(current)
        if key not in found:
            found[key] = Explanation(clash, pair, key, {a: m.provenance_of(a) for a in key})
    return list(found.values())


def explanations_json(explanations: Iterable[Explanation]) -> str:
    return json.dumps([e.as_dict() for e in explanations], indent=2) + "\n"


# -- repair -------------------------------------------------------------------


@dataclass(frozen=True)
class RepairPlan:
    removals: tuple[Axiom, ...]
    rationales: tuple[str, ...]

    def to_text(self) -> str:
        lines = [f"# repair plan: {len(self.removals)} removal(s)"]
        for a, why in zip(self.removals, self.rationales):
            lines.append(f"# {why}")
            lines.append(f"REMOVE {a}")
        return "\n".join(lines) + "\n"


def parse_plan(text: str) -> list[Axiom]:
    removals = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("REMOVE "):
            raise ValueError(f"line {lineno}: expected 'REMOVE <axiom>', got {line!r}")
        removals.append(parse_axiom(line[len("REMOVE ") :]))
    return removals


def _preference(a: Axiom, provenance: frozenset[str]) -> int:
    if BRIDGE in provenance:
        return 0
    if isinstance(a, Disjoint):
        return 1
    if isinstance(a, SubClassOf):
        return 2
    if isinstance(a, EquivalentToIntersection):
        return 3
    return 4


_KIND = {0: "bridge mapping", 1: "disjointness", 2: "subclass axiom", 3: "intersection definition", 4: "equivalence"}


def propose_repair(
    explanations: Sequence[Explanation], merged: MergedOntology | None = None
) -> RepairPlan:
    """Greedy hitting set over the explanations.

    Each step removes the axiom present in the most unresolved explanations,
    breaking ties by preference (bridge axioms, then disjointness, then
    subclass axioms) and then canonical order. With ``merged`` given, the plan
    is re-checked and RepairIncomplete raised if clashes remain.
    """
    if not explanations:
        raise ValueError("no explanations to repair")
    provenance: dict[Axiom, frozenset[str]] = {}
    for ex in explanations:
        for a in ex.axioms:
            provenance[a] = provenance.get(a, frozenset()) | ex.provenance.get(a, frozenset({a.provenance}))
    unresolved = [ex for ex in explanations]
    removals: list[Axiom] = []
    rationales: list[str] = []
    while unresolved:
        counts: dict[Axiom, int] = defaultdict(int)
        for ex in unresolved:
            for a in set(ex.axioms):
                counts[a] += 1
        pick = min(
            counts, key=lambda a: (-counts[a], _preference(a, provenance[a]), a.sort_key())
        )
        hit = [ex for ex in unresolved if pick in ex.axioms]
        unresolved = [ex for ex in unresolved if pick not in ex.axioms]
        classes = ", ".join(sorted({str(ex.clash_class) for ex in hit}))
        sources = "|".join(sorted(provenance[pick]))
        rationales.append(
            f"{_KIND[_preference(pick, provenance[pick])]} from {sources}; "
            f"resolves {len(hit)} explanation(s) for {classes}"
        )
        removals.append(pick)
    plan = RepairPlan(tuple(removals), tuple(rationales))
    if merged is not None:
        remaining = unsat_classes(merged.without(plan.removals))
        if remaining:
            raise RepairIncomplete(
                f"{len(remaining)} class(es) still unsatisfiable after repair", plan, remaining
            )
    return plan


def explain_all(m: MergedOntology) -> list[Explanation]:
    out: list[Explanation] = []
    for e in unsat_classes(m):
        out.extend(explain(m, e))
    return out


def repair_merged(m: MergedOntology, max_iterations: int = 8) -> RepairPlan:
    """Explain and repair repeatedly until no told clash remains."""
    removals: list[Axiom] = []
    rationales: list[str] = []
    current = m
    for _ in range(max_iterations):
        explanations = explain_all(current)
        if not explanations:
            return RepairPlan(tuple(removals), tuple(rationales))
        try:
            step = propose_repair(explanations, current)
        except RepairIncomplete as exc:
            step = exc.plan
        removals.extend(step.removals)
        rationales.extend(step.rationales)
        current = current.without(step.removals)
    plan = RepairPlan(tuple(removals), tuple(rationales))
    remaining = unsat_classes(current)
    if remaining:
        raise RepairIncomplete(
            f"clashes remain after {max_iterations} repair rounds", plan, remaining
        )
    return plan


# -- reports ------------------------------------------------------------------------


@dataclass(frozen=True)
class PairCheck:
    pair: tuple[str, str]
    unsatisfiable: tuple[EntityId, ...]

    @property
    def count(self) -> int:
        return len(self.unsatisfiable)


def check_pairs(pairs: Iterable[tuple[tuple[str, str], MergedOntology]]) -> list[PairCheck]:
    return [PairCheck(pair, tuple(unsat_classes(m))) for pair, m in pairs]


def pairs_tsv(checks: Iterable[PairCheck]) -> str:
    lines = [REPORT_HEADER, "left\tright\tunsatisfiable"]
    lines += [f"{c.pair[0]}\t{c.pair[1]}\t{c.count}" for c in checks]
    return "\n".join(lines) + "\n"


def unsat_report(m: MergedOntology, explanations: Iterable[Explanation] | None = None) -> str:
    counts: dict[tuple[EntityId, tuple[EntityId, EntityId]], int] = defaultdict(int)
    for ex in explanations or ():
        counts[(ex.clash_class, ex.witness)] += 1
    lines = [REPORT_HEADER, "class\twitness\texplanations"]
    for e, pair in find_unsat(m):
        lines.append(f"{e}\t{pair[0]}|{pair[1]}\t{counts[(e, pair)]}")
    return "\n".join(lines) + "\n"
