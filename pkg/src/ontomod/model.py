"""Immutable data model: entity ids, class expressions, axioms, ontologies, modules."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

OntologyId = str
Signature = frozenset  # frozenset[EntityId]

BRIDGE = "bridge"

SCOPES = ("EXACT", "BROAD", "NARROW", "RELATED")

_UPPER_TO_LOWER = str.maketrans("ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz")


def ascii_lower(text: str) -> str:
    """Lowercase A-Z only; every other character is left untouched."""
    return text.translate(_UPPER_TO_LOWER)


@dataclass(frozen=True, order=True)
class EntityId:
    prefix: str
    local: str

    @classmethod
    def parse(cls, text: str) -> EntityId:
        prefix, sep, local = text.partition(":")
        if not sep:
            return cls("", text)
        return cls(prefix, local)

    def __str__(self) -> str:
        if not self.prefix:
            return self.local
        return f"{self.prefix}:{self.local}"

    def __repr__(self) -> str:
        return f"EntityId({str(self)!r})"


def eid(text: str) -> EntityId:
    return EntityId.parse(text)


@dataclass(frozen=True)
class Synonym:
    text: str
    scope: str = "RELATED"

    def __post_init__(self) -> None:
        if self.scope not in SCOPES:
            raise ValueError(f"unknown synonym scope {self.scope!r}")


@dataclass(frozen=True)
class Annotations:
    name: str | None = None
    definition: str | None = None
    synonyms: tuple[Synonym, ...] = ()
    alt_ids: tuple[EntityId, ...] = ()
    is_obsolete: bool = False

    def __post_init__(self) -> None:
        # dict keeps first-seen order
        object.__setattr__(self, "synonyms", tuple(dict.fromkeys(self.synonyms)))
        object.__setattr__(self, "alt_ids", tuple(dict.fromkeys(self.alt_ids)))


EMPTY_ANNOTATIONS = Annotations()


# -- class expressions ------------------------------------------------------


@dataclass(frozen=True)
class Named:
    entity: EntityId

    def sort_key(self) -> tuple:
        return (0, self.entity)

    def __str__(self) -> str:
        return str(self.entity)


@dataclass(frozen=True)
class Some:
    relation: EntityId
    filler: EntityId

    def sort_key(self) -> tuple:
        return (1, self.relation, self.filler)

    def __str__(self) -> str:
        return f"Some({self.relation} {self.filler})"


@dataclass(frozen=True)
class And:
    conjuncts: tuple[Named | Some, ...]

    def __post_init__(self) -> None:
        conjuncts = tuple(self.conjuncts)
        if len(conjuncts) < 2:
            raise ValueError("And needs at least two conjuncts")
        for c in conjuncts:
            if not isinstance(c, (Named, Some)):
                raise ValueError("And conjuncts must be Named or Some (depth <= 2)")
        object.__setattr__(self, "conjuncts", tuple(sorted(conjuncts, key=lambda c: c.sort_key())))

    def sort_key(self) -> tuple:
        return (2, tuple(c.sort_key() for c in self.conjuncts))

    def __str__(self) -> str:
        return "And(" + " ".join(str(c) for c in self.conjuncts) + ")"


ClassExpr = Union[Named, Some, And]


# -- axioms -----------------------------------------------------------------
# Provenance is carried along but excluded from equality and hashing, so two
# copies of the same statement from different sources compare equal.


@dataclass(frozen=True)
class SubClassOf:
    sub: EntityId
    sup: Named | Some
    provenance: OntologyId = field(default="", compare=False)

    def sort_key(self) -> tuple:
        return (0, self.sub, self.sup.sort_key())

    def __str__(self) -> str:
        return f"SubClassOf({self.sub} {self.sup})"


@dataclass(frozen=True)
class EquivalentToIntersection:
    lhs: EntityId
    rhs: And
    provenance: OntologyId = field(default="", compare=False)

    def sort_key(self) -> tuple:
        return (1, self.lhs, self.rhs.sort_key())

    def __str__(self) -> str:
        return f"EquivalentToIntersection({self.lhs} {self.rhs})"


@dataclass(frozen=True)
class Disjoint:
    a: EntityId
    b: EntityId
    provenance: OntologyId = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def sort_key(self) -> tuple:
        return (2, self.a, self.b)

    def __str__(self) -> str:
        return f"Disjoint({self.a} {self.b})"


@dataclass(frozen=True)
class Equivalent:
    a: EntityId
    b: EntityId
    provenance: OntologyId = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def sort_key(self) -> tuple:
        return (3, self.a, self.b)

    def __str__(self) -> str:
        return f"Equivalent({self.a} {self.b})"


Axiom = Union[SubClassOf, EquivalentToIntersection, Disjoint, Equivalent]


def axiom_key(a: Axiom) -> tuple:
    return a.sort_key()


def sort_axioms(axioms: Iterable[Axiom]) -> tuple[Axiom, ...]:
    """Deduplicate (first occurrence wins) and sort in canonical order."""
    unique = dict.fromkeys(axioms)
    return tuple(sorted(unique, key=axiom_key))


def canon(x):
    """Rebuild an expression or axiom through its normalizing constructors."""
    if isinstance(x, Named):
        return Named(x.entity)
    if isinstance(x, Some):
        return Some(x.relation, x.filler)
    if isinstance(x, And):
        return And(tuple(canon(c) for c in x.conjuncts))
    if isinstance(x, SubClassOf):
        return SubClassOf(x.sub, canon(x.sup), x.provenance)
    if isinstance(x, EquivalentToIntersection):
        return EquivalentToIntersection(x.lhs, canon(x.rhs), x.provenance)
    if isinstance(x, Disjoint):
        return Disjoint(x.a, x.b, x.provenance)
    if isinstance(x, Equivalent):
        return Equivalent(x.a, x.b, x.provenance)
    raise TypeError(f"cannot canonicalize {type(x).__name__}")


def with_provenance(a: Axiom, provenance: OntologyId) -> Axiom:
    return type(a)(*_positional(a), provenance)


def _positional(a: Axiom) -> tuple:
    if isinstance(a, SubClassOf):
        return (a.sub, a.sup)
    if isinstance(a, EquivalentToIntersection):
        return (a.lhs, a.rhs)
    return (a.a, a.b)


def subject_of(a: Axiom) -> EntityId:
    """The entity whose OBO stanza carries this axiom."""
    if isinstance(a, SubClassOf):
        return a.sub
    if isinstance(a, EquivalentToIntersection):
        return a.lhs
    return a.a


# -- axiom text form ----------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


class AxiomSyntaxError(ValueError):
    pass


def parse_axiom(text: str, provenance: OntologyId = "") -> Axiom:
    """Inverse of ``str(axiom)``."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise AxiomSyntaxError(f"unexpected end of axiom: {text!r}")
        tok = tokens[pos]
        pos += 1
        return tok

    def expect(tok: str) -> None:
        got = take()
        if got != tok:
            raise AxiomSyntaxError(f"expected {tok!r}, got {got!r} in {text!r}")

    def entity() -> EntityId:
        tok = take()
        if tok in ("(", ")"):
            raise AxiomSyntaxError(f"expected entity, got {tok!r} in {text!r}")
        return EntityId.parse(tok)

    def expr() -> ClassExpr:
        nonlocal pos
        if pos + 1 < len(tokens) and tokens[pos + 1] == "(" and tokens[pos] in ("Some", "And"):
            head = take()
            expect("(")
            if head == "Some":
                rel, filler = entity(), entity()
                expect(")")
                return Some(rel, filler)
            parts = []
            while pos < len(tokens) and tokens[pos] != ")":
                parts.append(expr())
            expect(")")
            return And(tuple(parts))
        return Named(entity())

    head = take()
    expect("(")
    try:
        if head == "SubClassOf":
            sub = entity()
            sup = expr()
            if isinstance(sup, And):
                raise AxiomSyntaxError("SubClassOf superclass cannot be an intersection")
            result: Axiom = SubClassOf(sub, sup, provenance)
        elif head == "EquivalentToIntersection":
            lhs = entity()
            rhs = expr()
            if not isinstance(rhs, And):
                raise AxiomSyntaxError("EquivalentToIntersection needs an And expression")
            result = EquivalentToIntersection(lhs, rhs, provenance)
        elif head == "Disjoint":
            result = Disjoint(entity(), entity(), provenance)
        elif head == "Equivalent":
            result = Equivalent(entity(), entity(), provenance)
        else:
            raise AxiomSyntaxError(f"unknown axiom kind {head!r}")
    except ValueError as exc:
        if isinstance(exc, AxiomSyntaxError):
            raise
        raise AxiomSyntaxError(str(exc)) from exc
    expect(")")
    if pos != len(tokens):
        raise AxiomSyntaxError(f"trailing tokens in {text!r}")
    return result


# -- signatures -----------------------------------------------------------------


def sig_of_expr(e: ClassExpr) -> Iterator[EntityId]:
    if isinstance(e, Named):
        yield e.entity
    elif isinstance(e, Some):
        yield e.relation
        yield e.filler
    else:
        for c in e.conjuncts:
            yield from sig_of_expr(c)


def sig_of_axiom(a: Axiom) -> frozenset[EntityId]:
    if isinstance(a, SubClassOf):
        return frozenset((a.sub, *sig_of_expr(a.sup)))
    if isinstance(a, EquivalentToIntersection):
        return frozenset((a.lhs, *sig_of_expr(a.rhs)))
    return frozenset((a.a, a.b))


def relations_of_axiom(a: Axiom) -> Iterator[EntityId]:
    if isinstance(a, SubClassOf):
        exprs: tuple = (a.sup,)
    elif isinstance(a, EquivalentToIntersection):
        exprs = a.rhs.conjuncts
    else:
        return
    for e in exprs:
        if isinstance(e, Some):
            yield e.relation


def sig_of_axioms(axioms: Iterable[Axiom]) -> frozenset[EntityId]:
    out: set[EntityId] = set()
    for a in axioms:
        out |= sig_of_axiom(a)
    return frozenset(out)


def sig_of_module(m: Module) -> frozenset[EntityId]:
    return sig_of_axioms(m.axioms) | m.seed_signature


# -- term sets ------------------------------------------------------------------


@dataclass(frozen=True)
class TermSet:
    """Lowercase search strings driving signature matching."""

    terms: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        terms = frozenset(self.terms)
        for t in terms:
            if not isinstance(t, str) or not t:
                raise ValueError(f"term must be a non-empty string, got {t!r}")
            if ascii_lower(t) != t:
                raise ValueError(f"term {t!r} is not lowercase")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, terms: Iterable[str]) -> TermSet:
        """Fold and drop blanks before building."""
        return cls(frozenset(ascii_lower(t.strip()) for t in terms if t.strip()))

    def union(self, other: Iterable[str]) -> TermSet:
        return TermSet(self.terms | frozenset(other))

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, item: object) -> bool:
        return item in self.terms

    def __le__(self, other: TermSet) -> bool:
        return self.terms <= other.terms


# -- ontologies and modules ---------------------------------------------------------


class UndeclaredEntity(ValueError):
    pass


@dataclass(frozen=True)
class Ontology:
    id: OntologyId
    classes: Mapping[EntityId, Annotations]
    relations: Mapping[EntityId, Annotations]
    axioms: tuple[Axiom, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", dict(sorted(self.classes.items())))
        object.__setattr__(self, "relations", dict(sorted(self.relations.items())))
        object.__setattr__(self, "axioms", sort_axioms(self.axioms))
        for a in self.axioms:
            for e in sig_of_axiom(a):
                if e not in self.classes and e not in self.relations:
                    raise UndeclaredEntity(f"{e} used in {a} but not declared in {self.id}")

    def declares(self, e: EntityId) -> bool:
        return e in self.classes or e in self.relations

    def annotations(self, e: EntityId) -> Annotations | None:
        if e in self.classes:
            return self.classes[e]
        return self.relations.get(e)

    @property
    def signature(self) -> frozenset[EntityId]:
        return frozenset(self.classes) | frozenset(self.relations)


@dataclass(frozen=True)
class Module:
    """A subset of one source ontology's axioms plus the annotations it carries.

    ``classes`` and ``relations`` together form the carried annotations; they
    are split so a module can be written back out as [Term] and [Typedef]
    stanzas.
    """

    source: OntologyId
    seed_signature: frozenset[EntityId]
    axioms: tuple[Axiom, ...]
    classes: Mapping[EntityId, Annotations]
    relations: Mapping[EntityId, Annotations]
    seed_label: str = "module"

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed_signature", frozenset(self.seed_signature))
        object.__setattr__(self, "axioms", sort_axioms(self.axioms))
        object.__setattr__(self, "classes", dict(sorted(self.classes.items())))
        object.__setattr__(self, "relations", dict(sorted(self.relations.items())))

    @property
    def carried_annotations(self) -> dict[EntityId, Annotations]:
        return {**self.classes, **self.relations}

    @property
    def signature(self) -> frozenset[EntityId]:
        return sig_of_module(self)

    @property
    def filename(self) -> str:
        return module_filename(self.seed_label, self.source)


def module_filename(seed_label: str, ontology_id: OntologyId) -> str:
    return f"{seed_label}_from_{ontology_id}.obo"


def carve_module(
    o: Ontology, axioms: Iterable[Axiom], seed: Iterable[EntityId], seed_label: str = "module"
) -> Module:
    """Build a Module of ``o`` carrying annotations for sig(axioms) and the seed."""
    axioms = tuple(axioms)
    seed = frozenset(seed)
    covered = sig_of_axioms(axioms) | seed
    return Module(
        source=o.id,
        seed_signature=seed,
        axioms=axioms,
        classes={e: a for e, a in o.classes.items() if e in covered},
        relations={e: a for e, a in o.relations.items() if e in covered},
        seed_label=seed_label,
    )
