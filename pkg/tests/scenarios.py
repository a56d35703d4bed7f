"""Small hand-built module sets with known clashes."""

from __future__ import annotations

from ontomod.integrate import BridgeOntology, merge
from ontomod.model import BRIDGE, Annotations, Disjoint, Equivalent, Module, Named, SubClassOf, eid

A, B, C, D = eid("L:A"), eid("R:B"), eid("L:C"), eid("U:D")


def _module(source, classes, axioms):
    axioms = tuple(type(a)(*_fields(a), source) for a in axioms)
    return Module(source, frozenset(), axioms, {c: Annotations(name=str(c)) for c in classes}, {})


def _fields(a):
    if isinstance(a, SubClassOf):
        return (a.sub, a.sup)
    return (a.a, a.b)


def clash_modules():
    """A = B by mapping, A < C, B < D, C and D disjoint."""
    left = _module("L", [A, C, D], [SubClassOf(A, Named(C)), Disjoint(C, D)])
    right = _module("R", [B, D], [SubClassOf(B, Named(D))])
    bridge = BridgeOntology((), (Equivalent(A, B, BRIDGE),))
    return [left, right], bridge


def clash_merge():
    modules, bridge = clash_modules()
    return merge(modules, bridge)


def four_modules():
    """Four modules where only the Q+R pair produces a clash."""
    x, c, d, y = eid("Q:x"), eid("Q:c"), eid("Q:d"), eid("R:y")
    p1, p2 = eid("P:1"), eid("P:2")
    s1, s2, s3 = eid("S:1"), eid("S:2"), eid("S:3")
    modules = [
        _module("P", [p1, p2], [SubClassOf(p1, Named(p2))]),
        _module("Q", [x, c, d], [SubClassOf(x, Named(c)), Disjoint(c, d)]),
        _module("R", [y, d], [SubClassOf(y, Named(d))]),
        _module("S", [s1, s2, s3], [SubClassOf(s1, Named(s2)), Disjoint(s1, s3)]),
    ]
    bridge = BridgeOntology((), (Equivalent(x, y, BRIDGE), Equivalent(p1, s1, BRIDGE)))
    return modules, bridge
