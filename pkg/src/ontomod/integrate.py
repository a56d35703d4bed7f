"""Bridge documents and merged ontologies built from modules and mappings."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .align import MappingSet
from .model import (
    BRIDGE,
    Annotations,
    Axiom,
    EntityId,
    Equivalent,
    Module,
    module_filename,
    sort_axioms,
    with_provenance,
)


class UnknownEndpoint(ValueError):
    pass


class TooFewModules(ValueError):
    pass


@dataclass(frozen=True)
class BridgeOntology:
    imports: tuple[str, ...]
    bridge_axioms: tuple[Equivalent, ...]
    id: str = BRIDGE


@dataclass(frozen=True)
class ConflictNote:
    entity: EntityId
    kept_ontology: str
    kept_name: str | None
    other_ontology: str
    other_name: str | None


@dataclass(frozen=True)
class MergedOntology:
    classes: Mapping[EntityId, Annotations]
    relations: Mapping[EntityId, Annotations]
    axioms: tuple[Axiom, ...]
    provenance: Mapping[Axiom, frozenset[str]]
    conflicts: tuple[ConflictNote, ...] = ()
    id: str = "merged"

    def provenance_of(self, a: Axiom) -> frozenset[str]:
        return self.provenance.get(a, frozenset())

    def without(self, removals: Iterable[Axiom]) -> MergedOntology:
        """Copy with the given axioms (from every source) taken out."""
        drop = set(removals)
        kept = tuple(a for a in self.axioms if a not in drop)
        return MergedOntology(
            self.classes,
            self.relations,
            kept,
            {a: self.provenance[a] for a in kept},
            self.conflicts,
            self.id,
        )

    def conflicts_tsv(self) -> str:
        lines = ["entity\tkeptOntology\tkeptName\totherOntology\totherName"]
        for c in self.conflicts:
            lines.append(
                f"{c.entity}\t{c.kept_ontology}\t{c.kept_name or ''}\t"
                f"{c.other_ontology}\t{c.other_name or ''}"
            )
        return "\n".join(lines) + "\n"


def build_bridge(modules: Sequence[Module], maps: MappingSet) -> BridgeOntology:
    """One equivalence axiom per mapping, plus an import for every module."""
    by_source = {m.source: m for m in modules}
    axioms = []
    for mp in maps.mappings:
        for onto, e in ((mp.source_ontology, mp.source), (mp.target_ontology, mp.target)):
            module = by_source.get(onto)
            if module is None or e not in module.classes:
                raise UnknownEndpoint(f"mapping endpoint {e} is not a class of module {onto!r}")
        axioms.append(Equivalent(mp.source, mp.target, BRIDGE))
    imports = tuple(
        module_filename(m.seed_label, m.source) for m in sorted(modules, key=lambda m: m.source)
    )
    return BridgeOntology(imports, tuple(axioms))


def read_bridge(text: str | bytes) -> BridgeOntology:
    from .obo import read_obo

    result = read_obo(text)
    axioms = tuple(
        with_provenance(a, BRIDGE) for a in result.ontology.axioms if isinstance(a, Equivalent)
    )
    return BridgeOntology(tuple(result.document.header_values("import")), axioms)


def _merge_annotations(first: Annotations, other: Annotations) -> Annotations:
    return Annotations(
        name=first.name if first.name is not None else other.name,
        definition=first.definition if first.definition is not None else other.definition,
        synonyms=first.synonyms + other.synonyms,
        alt_ids=first.alt_ids + other.alt_ids,
        is_obsolete=first.is_obsolete,
    )


def merge(
    parts: Sequence[Module], bridge: BridgeOntology | None = None, merged_id: str = "merged"
) -> MergedOntology:
    """Union of module axioms and declarations, plus the bridge axioms.

    Parts are folded in ontology-id order. When two modules annotate the same
    entity with different names, the first name is kept, synonyms are pooled,
    and a conflict note records the loser.
    """
    provenance: dict[Axiom, set[str]] = {}
    classes: dict[EntityId, Annotations] = {}
    relations: dict[EntityId, Annotations] = {}
    first_seen: dict[EntityId, str] = {}
    conflicts: list[ConflictNote] = []

    def declare(target: dict[EntityId, Annotations], e: EntityId, ann: Annotations, src: str) -> None:
        if e not in target:
            target[e] = ann
            first_seen.setdefault(e, src)
            return
        current = target[e]
        if ann.name is not None and current.name is not None and ann.name != current.name:
            conflicts.append(ConflictNote(e, first_seen[e], current.name, src, ann.name))
        target[e] = _merge_annotations(current, ann)

    def add(a: Axiom, src: str) -> None:
        provenance.setdefault(a, set()).add(src)

    for m in sorted(parts, key=lambda m: m.source):
        for e, ann in m.classes.items():
            declare(classes, e, ann, m.source)
        for e, ann in m.relations.items():
            declare(relations, e, ann, m.source)
        for a in m.axioms:
            add(a, a.provenance or m.source)
    if bridge is not None:
        for a in bridge.bridge_axioms:
            add(a, BRIDGE)
            for e in (a.a, a.b):
                if e not in classes and e not in relations:
                    classes[e] = Annotations()

    axioms = sort_axioms(provenance)
    return MergedOntology(
        classes=dict(sorted(classes.items())),
        relations=dict(sorted(relations.items())),
        axioms=axioms,
        provenance={a: frozenset(provenance[a]) for a in axioms},
        conflicts=tuple(conflicts),
        id=merged_id,
    )


def pairwise_merges(
    modules: Sequence[Module], bridge: BridgeOntology
) -> list[tuple[tuple[str, str], MergedOntology]]:
    """Merge every unordered pair of modules with the bridge axioms internal to it."""
    if len(modules) < 2:
        raise TooFewModules("pairwise merging needs at least two modules")
    out = []
    for m1, m2 in combinations(sorted(modules, key=lambda m: m.source), 2):
        inside = set(m1.classes) | set(m2.classes)
        axioms = tuple(a for a in bridge.bridge_axioms if a.a in inside and a.b in inside)
        pair_bridge = BridgeOntology(bridge.imports, axioms, bridge.id)
        out.append(((m1.source, m2.source), merge([m1, m2], pair_bridge, f"{m1.source}+{m2.source}")))
    return out


def read_merged(text: str | bytes) -> MergedOntology:
    """Parse a merged document written by ``serialize_obo``, restoring provenance."""
    from .obo import read_obo

    result = read_obo(text)
    o = result.ontology
    provenance: dict[Axiom, set[str]] = {}
    for p in result.axioms:
        sources = p.qualifiers.get("provenance")
        names = sources.split("|") if sources else [o.id]
        provenance.setdefault(p.axiom, set()).update(names)
    axioms = sort_axioms(provenance)
    return MergedOntology(
        classes=o.classes,
        relations=o.relations,
        axioms=axioms,
        provenance={a: frozenset(provenance[a]) for a in axioms},
        id=o.id,
    )
