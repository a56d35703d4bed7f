"""Seeded random builders for ontologies, modules and merges."""

from __future__ import annotations

import random

from ontomod.integrate import MergedOntology, merge
from ontomod.model import (
    BRIDGE,
    And,
    Annotations,
    Disjoint,
    EntityId,
    Equivalent,
    EquivalentToIntersection,
    Module,
    Named,
    Ontology,
    Some,
    SubClassOf,
    sort_axioms,
)

RELATIONS = [EntityId("", "part_of"), EntityId("", "has_part")]


def entities(n: int, prefix: str = "X") -> list[EntityId]:
    return [EntityId(prefix, str(i)) for i in range(1, n + 1)]


def random_axiom(rng: random.Random, ents: list[EntityId], rels=RELATIONS, *, equivalences=True):
    kind = rng.choices(
        ["sub", "some", "inter", "disj", "equiv"],
        weights=[5, 2, 1, 1, 1 if equivalences else 0],
    )[0]
    a, b = rng.sample(ents, 2) if len(ents) > 1 else (ents[0], ents[0])
    if kind == "sub":
        return SubClassOf(a, Named(b))
    if kind == "some":
        return SubClassOf(a, Some(rng.choice(rels), b))
    if kind == "inter":
        c = rng.choice(ents)
        second = Some(rng.choice(rels), c) if rng.random() < 0.5 else Named(c)
        return EquivalentToIntersection(a, And((Named(b), second)))
    if kind == "disj":
        return Disjoint(a, b)
    return Equivalent(a, b)


def random_ontology(
    rng: random.Random, max_axioms: int = 12, max_entities: int = 10, oid: str = "rand"
) -> Ontology:
    ents = entities(rng.randint(2, max_entities))
    axioms = [random_axiom(rng, ents) for _ in range(rng.randint(0, max_axioms))]
    return Ontology(
        oid,
        {e: Annotations(name=f"class {e.local}") for e in ents},
        {r: Annotations() for r in RELATIONS},
        sort_axioms(axioms),
    )


def random_module(rng: random.Random, source: str, ents: list[EntityId], n_axioms: int) -> Module:
    axioms = [random_axiom(rng, ents, equivalences=False) for _ in range(n_axioms)]
    axioms = [type(a)(*_args(a), source) for a in axioms]
    return Module(
        source=source,
        seed_signature=frozenset(),
        axioms=tuple(axioms),
        classes={e: Annotations() for e in ents},
        relations={r: Annotations() for r in RELATIONS},
    )


def _args(a):
    if isinstance(a, SubClassOf):
        return (a.sub, a.sup)
    if isinstance(a, EquivalentToIntersection):
        return (a.lhs, a.rhs)
    return (a.a, a.b)


def random_merge(rng: random.Random, max_axioms: int = 30, n_entities: int = 14) -> MergedOntology:
    """Two or three random modules plus random bridge equivalences."""
    ents = entities(n_entities)
    n_modules = rng.randint(2, 3)
    budget = rng.randint(1, max_axioms)
    n_bridge = rng.randint(0, min(4, budget))
    per_module = max(0, budget - n_bridge) // n_modules
    modules = []
    for k in range(n_modules):
        share = rng.sample(ents, rng.randint(2, len(ents)))
        modules.append(random_module(rng, f"m{k}", sorted(share), per_module))
    from ontomod.integrate import BridgeOntology

    bridge_axioms = []
    for _ in range(n_bridge):
        a, b = rng.sample(ents, 2)
        bridge_axioms.append(Equivalent(a, b, BRIDGE))
    return merge(modules, BridgeOntology((), tuple(bridge_axioms)))
