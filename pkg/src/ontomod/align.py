"""Class alignment between modules with a normalized Levenshtein similarity."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .model import Annotations, EntityId, Module, ascii_lower

DEFAULT_THRESHOLD = 0.95

# Field pairs in tie-break priority order.
ID_PAIR = ("ID", "ID")
NAME_NAME = ("NAME", "NAME")
NAME_SYN = ("NAME", "SYNONYM")
SYN_NAME = ("SYNONYM", "NAME")
SYN_SYN = ("SYNONYM", "SYNONYM")
DEF_DEF = ("DEF", "DEF")
_PRIORITY = {ID_PAIR: 0, NAME_NAME: 1, NAME_SYN: 2, SYN_NAME: 2, SYN_SYN: 3, DEF_DEF: 4}


class InvalidThreshold(ValueError):
    pass


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (bit-parallel, Hyyrö's variant of Myers).

    Runs in O(len(a) * ceil(len(b) / wordsize)); Python ints act as one wide
    word, so the inner loop is a handful of integer operations per character.
    """
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return len(a)
    peq: dict[str, int] = {}
    for i, ch in enumerate(b):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    full = (1 << m) - 1
    top = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for ch in a:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & top:
            score += 1
        elif mh & top:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = mh | (~(xv | ph) & full)
        mv = ph & xv
    return score


def lev_metric(a: str, b: str) -> float:
    """Similarity in [0, 1]: 1 - distance / longer length, after ASCII folding."""
    a, b = ascii_lower(a), ascii_lower(b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


def _reachable(la: int, lb: int, threshold: float) -> bool:
    # Distance is at least the length gap; skip pairs that cannot reach the threshold.
    longest = max(la, lb)
    return abs(la - lb) <= math.ceil((1.0 - threshold) * longest)


def _candidate_pairs(c1: tuple[EntityId, Annotations], c2: tuple[EntityId, Annotations], use_def: bool):
    (e1, a1), (e2, a2) = c1, c2
    yield ID_PAIR, e1.local, e2.local
    if a1.name is not None and a2.name is not None:
        yield NAME_NAME, a1.name, a2.name
    if a1.name is not None:
        for s in a2.synonyms:
            yield NAME_SYN, a1.name, s.text
    if a2.name is not None:
        for s in a1.synonyms:
            yield SYN_NAME, s.text, a2.name
    for s1 in a1.synonyms:
        for s2 in a2.synonyms:
            yield SYN_SYN, s1.text, s2.text
    if use_def and a1.definition is not None and a2.definition is not None:
        yield DEF_DEF, a1.definition, a2.definition


def class_similarity(
    c1: tuple[EntityId, Annotations],
    c2: tuple[EntityId, Annotations],
    *,
    use_def: bool = True,
    threshold: float | None = None,
) -> tuple[float, tuple[str, str] | None]:
    """Best lev_metric over the compared field pairs, and which pair gave it.

    With ``threshold`` set, string pairs whose lengths rule out reaching it are
    skipped; the result is then exact whenever it is at or above the threshold.
    """
    best, best_field = -1.0, None
    for fld, s1, s2 in _candidate_pairs(c1, c2, use_def):
        if threshold is not None and not _reachable(len(s1), len(s2), threshold):
            continue
        score = lev_metric(s1, s2)
        if score > best or (score == best and _PRIORITY[fld] < _PRIORITY[best_field]):
            best, best_field = score, fld
    if best_field is None:
        return 0.0, None
    return best, best_field


@dataclass(frozen=True)
class Mapping:
    source_ontology: str
    source: EntityId
    target_ontology: str
    target: EntityId
    score: float
    field: tuple[str, str]

    def sort_key(self) -> tuple:
        return (self.source_ontology, self.target_ontology, self.source, self.target)

    def as_dict(self) -> dict:
        return {
            "sourceOntology": self.source_ontology,
            "sourceId": str(self.source),
            "targetOntology": self.target_ontology,
            "targetId": str(self.target),
            "score": self.score,
            "field": "|".join(self.field),
        }


@dataclass(frozen=True)
class MappingSet:
    threshold: float
    mappings: tuple[Mapping, ...]

    def __len__(self) -> int:
        return len(self.mappings)

    def to_json(self) -> str:
        doc = {"threshold": self.threshold, "mappings": [m.as_dict() for m in self.mappings]}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> MappingSet:
        doc = json.loads(text)
        mappings = tuple(
            Mapping(
                d["sourceOntology"],
                EntityId.parse(d["sourceId"]),
                d["targetOntology"],
                EntityId.parse(d["targetId"]),
                float(d["score"]),
                tuple(d["field"].split("|")),
            )
            for d in doc["mappings"]
        )
        return cls(float(doc["threshold"]), mappings)

    def to_tsv(self) -> str:
        lines = ["sourceOntology\tsourceId\ttargetOntology\ttargetId\tscore\tfield"]
        for m in self.mappings:
            d = m.as_dict()
            lines.append("\t".join(str(d[k]) for k in d))
        return "\n".join(lines) + "\n"


def _live_classes(m: Module) -> list[tuple[EntityId, Annotations]]:
    return [(e, a) for e, a in m.classes.items() if not a.is_obsolete]


def align_pair(
    source: Module, target: Module, threshold: float, *, use_def: bool = True
) -> list[Mapping]:
    """Best above-threshold target for each source class (smallest id wins ties)."""
    targets = _live_classes(target)
    out = []
    for c1 in _live_classes(source):
        best_score, best = -1.0, None
        for c2 in targets:
            score, fld = class_similarity(c1, c2, use_def=use_def, threshold=threshold)
            # targets are sorted by id, so strict > keeps the smallest id on ties
            if fld is not None and score > best_score:
                best_score, best = score, (c2[0], fld)
        if best is not None and best_score >= threshold:
            out.append(Mapping(source.source, c1[0], target.source, best[0], best_score, best[1]))
    return out


def check_threshold(threshold: float) -> None:
    if not (0.0 < threshold <= 1.0) or math.isnan(threshold):
        raise InvalidThreshold(f"threshold must be in (0, 1], got {threshold}")


def compute_mappings(
    modules: Sequence[Module], threshold: float = DEFAULT_THRESHOLD, *, use_def: bool = True
) -> MappingSet:
    """Map classes across every pair of modules from different ontologies.

    Each unordered pair is aligned once, from the module whose ontology id
    sorts first towards the other, so every mapping already has its source
    ontology before its target ontology.
    """
    check_threshold(threshold)
    ordered = sorted(modules, key=lambda m: m.source)
    found: list[Mapping] = []
    for m1, m2 in combinations(ordered, 2):
        if m1.source == m2.source:
            continue
        found.extend(align_pair(m1, m2, threshold, use_def=use_def))
    return MappingSet(threshold, tuple(sorted(found, key=Mapping.sort_key)))


def mappings_between(maps: MappingSet, ontologies: Iterable[str]) -> list[Mapping]:
    keep = set(ontologies)
    return [m for m in maps.mappings if m.source_ontology in keep and m.target_ontology in keep]
