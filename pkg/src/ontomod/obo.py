"""Reader and writer for the supported subset of the OBO flat-file format.

Parsing happens in two layers. :func:`parse_document` splits text into header
tags and stanzas without interpreting values; :func:`parse_obo` turns a
document into an :class:`~ontomod.model.Ontology` with normalized axioms.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import __version__
from .model import (
    SCOPES,
    And,
    Annotations,
    Axiom,
    Disjoint,
    EntityId,
    Equivalent,
    EquivalentToIntersection,
    Module,
    Named,
    Ontology,
    Some,
    SubClassOf,
    Synonym,
    relations_of_axiom,
    sig_of_axiom,
    subject_of,
)

FORMAT_VERSION = "1.2"
TERM, TYPEDEF, OTHER = "TERM", "TYPEDEF", "OTHER"

_OLD_SYNONYM_TAGS = {
    "exact_synonym": "EXACT",
    "broad_synonym": "BROAD",
    "narrow_synonym": "NARROW",
    "related_synonym": "RELATED",
}
_KNOWN_TAGS = {
    "id", "name", "def", "synonym", "alt_id", "is_a", "relationship",
    "intersection_of", "disjoint_from", "is_obsolete", "equivalent_to",
    *_OLD_SYNONYM_TAGS,
}
_LOGICAL_TAGS = {"is_a", "relationship", "intersection_of", "disjoint_from", "equivalent_to"}
_QUALIFIER = re.compile(r'([A-Za-z_][\w-]*)\s*=\s*"((?:[^"\\]|\\.)*)"')


class OboError(ValueError):
    """Base class for OBO parse failures; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MissingId(OboError):
    pass


class MalformedLine(OboError):
    pass


class DanglingIntersection(OboError):
    pass


@dataclass(frozen=True)
class TagLine:
    tag: str
    value: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Stanza:
    kind: str
    header: str
    tags: tuple[TagLine, ...]
    line: int = field(default=0, compare=False)

    def values(self, tag: str) -> list[TagLine]:
        return [t for t in self.tags if t.tag == tag]


@dataclass(frozen=True)
class OboDocument:
    header: tuple[TagLine, ...]
    stanzas: tuple[Stanza, ...]

    def header_values(self, tag: str) -> list[str]:
        return [t.value for t in self.header if t.tag == tag]


# -- lexical layer -----------------------------------------------------------


def _decode(text: str | bytes) -> str:
    if isinstance(text, bytes):
        return text.decode("utf-8", errors="replace")
    return text


def parse_document(text: str | bytes) -> OboDocument:
    text = _decode(text)
    header: list[TagLine] = []
    stanzas: list[Stanza] = []
    current: list[TagLine] | None = None
    kind = header_text = ""
    start = 0

    def close() -> None:
        if current is not None:
            stanzas.append(Stanza(kind, header_text, tuple(current), start))

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("[") and line.endswith("]"):
            close()
            header_text = line[1:-1].strip()
            kind = {"Term": TERM, "Typedef": TYPEDEF}.get(header_text, OTHER)
            current, start = [], lineno
            continue
        tag, sep, value = raw.rstrip("\r\n").lstrip().partition(": ")
        if not sep or not tag.strip():
            raise MalformedLine(f"expected 'tag: value', got {line[:80]!r}", lineno)
        tag_line = TagLine(tag.strip(), value.strip(), lineno)
        if current is None:
            header.append(tag_line)
        else:
            current.append(tag_line)
    close()
    return OboDocument(tuple(header), tuple(stanzas))


def serialize_document(doc: OboDocument) -> str:
    out = [f"{t.tag}: {t.value}" for t in doc.header]
    for st in doc.stanzas:
        out.append("")
        out.append(f"[{st.header}]")
        out.extend(f"{t.tag}: {t.value}" for t in st.tags)
    return "\n".join(out) + "\n"


def split_value(raw: str) -> tuple[str, str]:
    """Strip trailing ``! comment`` and ``{qualifier}`` blocks outside quotes.

    Returns (value, qualifier text). Backslash escapes are preserved verbatim
    so the result scans to itself.
    """
    value: list[str] = []
    qualifiers: list[str] = []
    in_quote = False
    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch == "\\" and i + 1 < n:
            value.append(raw[i : i + 2])
            i += 2
            continue
        if ch == '"':
            in_quote = not in_quote
        elif not in_quote and ch == "!":
            break
        elif not in_quote and ch == "{":
            j, q_quote = i + 1, False
            while j < n:
                if raw[j] == "\\":
                    j += 2
                    continue
                if raw[j] == '"':
                    q_quote = not q_quote
                elif raw[j] == "}" and not q_quote:
                    break
                j += 1
            qualifiers.append(raw[i + 1 : min(j, n)])
            i = j + 1
            continue
        value.append(ch)
        i += 1
    return "".join(value).strip(), " ".join(qualifiers)


def parse_qualifiers(text: str) -> dict[str, str]:
    return {k: _unescape(v) for k, v in _QUALIFIER.findall(text)}


def _unescape(s: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            if nxt == "n":
                out.append("\n")
            elif nxt in '"\\':
                out.append(nxt)
            else:
                out.append(s[i : i + 2])
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def read_quoted(value: str) -> tuple[str, str]:
    """Split ``"text" rest`` into (unescaped text, rest).

    A value that does not open with a quote is taken whole.
    """
    if not value.startswith('"'):
        return value, ""
    i = 1
    while i < len(value):
        if value[i] == "\\":
            i += 2
            continue
        if value[i] == '"':
            return _unescape(value[1:i]), value[i + 1 :].strip()
        i += 1
    return _unescape(value[1:]), ""


# -- semantic layer ------------------------------------------------------------


@dataclass
class _Draft:
    kind: str
    line: int
    name: str | None = None
    definition: str | None = None
    synonyms: list[Synonym] = field(default_factory=list)
    alt_ids: list[EntityId] = field(default_factory=list)
    obsolete: bool = False

    def freeze(self) -> Annotations:
        return Annotations(
            name=self.name,
            definition=self.definition,
            synonyms=tuple(self.synonyms),
            alt_ids=tuple(self.alt_ids),
            is_obsolete=self.obsolete,
        )


@dataclass(frozen=True)
class ParsedAxiom:
    axiom: Axiom
    qualifiers: Mapping[str, str]


@dataclass(frozen=True)
class ParseResult:
    ontology: Ontology
    document: OboDocument
    axioms: tuple[ParsedAxiom, ...]


def _single_id(value: str, line: int) -> EntityId:
    tokens = value.split()
    if len(tokens) != 1:
        raise MalformedLine(f"expected one identifier, got {value!r}", line)
    return EntityId.parse(tokens[0])


def _id_pair(value: str, line: int) -> tuple[EntityId, EntityId]:
    tokens = value.split()
    if len(tokens) != 2:
        raise MalformedLine(f"expected 'relation filler', got {value!r}", line)
    return EntityId.parse(tokens[0]), EntityId.parse(tokens[1])


def _synonym(tag: str, value: str) -> Synonym:
    text, rest = read_quoted(value)
    if tag in _OLD_SYNONYM_TAGS:
        return Synonym(text, _OLD_SYNONYM_TAGS[tag])
    words = rest.split()
    scope = words[0] if words and words[0] in SCOPES else "RELATED"
    return Synonym(text, scope)


def read_obo(text: str | bytes, ontology_id: str | None = None) -> ParseResult:
    """Parse OBO text and keep per-axiom qualifier blocks alongside the ontology."""
    doc = parse_document(text)
    oid = ontology_id or next(iter(doc.header_values("ontology")), None) or "unnamed"
    drafts: dict[EntityId, _Draft] = {}
    parsed: list[ParsedAxiom] = []
    warnings: list[str] = []
    ignored: dict[str, list[int]] = defaultdict(list)

    for st in doc.stanzas:
        if st.kind == OTHER:
            warnings.append(f"line {st.line}: skipped [{st.header}] stanza")
            continue
        ids = st.values("id")
        if not ids:
            raise MissingId(f"[{st.header}] stanza has no id", st.line)
        subject = _single_id(split_value(ids[0].value)[0], ids[0].line)
        if subject in drafts:
            if drafts[subject].kind != st.kind:
                raise MalformedLine(f"{subject} declared as both Term and Typedef", st.line)
            warnings.append(f"line {st.line}: repeated stanza for {subject}; merged")
            draft = drafts[subject]
        else:
            draft = drafts[subject] = _Draft(st.kind, st.line)

        groups: dict[str, list[tuple[Named | Some, Mapping[str, str]]]] = defaultdict(list)
        group_lines: dict[str, int] = {}
        for tl in st.tags:
            value, qual_text = split_value(tl.value)
            quals = parse_qualifiers(qual_text) if qual_text else {}
            tag = tl.tag
            if tag not in _KNOWN_TAGS:
                ignored[tag].append(tl.line)
                continue
            if st.kind == TYPEDEF and tag in _LOGICAL_TAGS:
                warnings.append(f"line {tl.line}: relation axiom '{tag}' on {subject} ignored")
                continue
            if tag == "id":
                if tl is not ids[0]:
                    warnings.append(f"line {tl.line}: extra id on {subject} ignored")
            elif tag == "name":
                if draft.name is None:
                    draft.name = value
            elif tag == "def":
                if draft.definition is None:
                    draft.definition = read_quoted(value)[0]
            elif tag == "synonym" or tag in _OLD_SYNONYM_TAGS:
                draft.synonyms.append(_synonym(tag, value))
            elif tag == "alt_id":
                draft.alt_ids.append(_single_id(value, tl.line))
            elif tag == "is_obsolete":
                draft.obsolete = value.lower() == "true"
            elif tag == "is_a":
                target = _single_id(value, tl.line)
                parsed.append(ParsedAxiom(SubClassOf(subject, Named(target), oid), quals))
            elif tag == "relationship":
                rel, filler = _id_pair(value, tl.line)
                parsed.append(ParsedAxiom(SubClassOf(subject, Some(rel, filler), oid), quals))
            elif tag == "disjoint_from":
                other = _single_id(value, tl.line)
                parsed.append(ParsedAxiom(Disjoint(subject, other, oid), quals))
            elif tag == "equivalent_to":
                other = _single_id(value, tl.line)
                parsed.append(ParsedAxiom(Equivalent(subject, other, oid), quals))
            elif tag == "intersection_of":
                tokens = value.split()
                if len(tokens) == 1:
                    conj: Named | Some = Named(EntityId.parse(tokens[0]))
                elif len(tokens) == 2:
                    conj = Some(EntityId.parse(tokens[0]), EntityId.parse(tokens[1]))
                else:
                    raise MalformedLine(f"bad intersection_of value {value!r}", tl.line)
                key = quals.get("intersection_group", "1")
                groups[key].append((conj, quals))
                group_lines.setdefault(key, tl.line)

        for key in sorted(groups):
            members = groups[key]
            if len(members) < 2:
                raise DanglingIntersection(
                    f"{subject} has a single intersection_of line", group_lines[key]
                )
            quals = {k: v for _, q in members for k, v in q.items() if k != "intersection_group"}
            rhs = And(tuple(c for c, _ in members))
            parsed.append(ParsedAxiom(EquivalentToIntersection(subject, rhs, oid), quals))

    for tag in sorted(ignored):
        lines = ignored[tag]
        warnings.append(f"line {lines[0]}: ignored tag '{tag}' ({len(lines)} occurrence(s))")

    classes = {e: d.freeze() for e, d in drafts.items() if d.kind == TERM}
    relations = {e: d.freeze() for e, d in drafts.items() if d.kind == TYPEDEF}
    referenced_relations = {r for p in parsed for r in relations_of_axiom(p.axiom)}
    undeclared = sorted(
        {e for p in parsed for e in sig_of_axiom(p.axiom)} - classes.keys() - relations.keys()
    )
    for e in undeclared:
        target = relations if e in referenced_relations else classes
        target[e] = Annotations()
        warnings.append(f"auto-declared undeclared entity {e}")

    ontology = Ontology(
        id=oid,
        classes=classes,
        relations=relations,
        axioms=tuple(p.axiom for p in parsed),
        warnings=tuple(warnings),
    )
    return ParseResult(ontology, doc, tuple(parsed))


def parse_obo(text: str | bytes, ontology_id: str | None = None) -> Ontology:
    """Parse OBO text into an Ontology.

    The ontology id is ``ontology_id`` when given, otherwise the header's
    ``ontology:`` tag, otherwise ``"unnamed"``. Non-fatal issues end up in
    ``Ontology.warnings``.
    """
    return read_obo(text, ontology_id).ontology


def read_module(text: str | bytes) -> Module:
    """Parse a module file written by :func:`serialize_obo`."""
    result = read_obo(text)
    doc, o = result.document, result.ontology
    labels = doc.header_values("seed_label")
    seeds = frozenset(EntityId.parse(v) for v in doc.header_values("seed"))
    return Module(
        source=o.id,
        seed_signature=seeds,
        axioms=o.axioms,
        classes=o.classes,
        relations=o.relations,
        seed_label=labels[0] if labels else "module",
    )


# -- writer ----------------------------------------------------------------------


def _axiom_lines(a: Axiom) -> tuple[str, list[str]]:
    if isinstance(a, SubClassOf):
        if isinstance(a.sup, Named):
            return "is_a", [str(a.sup.entity)]
        return "relationship", [f"{a.sup.relation} {a.sup.filler}"]
    if isinstance(a, EquivalentToIntersection):
        return "intersection_of", [
            str(c.entity) if isinstance(c, Named) else f"{c.relation} {c.filler}"
            for c in a.rhs.conjuncts
        ]
    if isinstance(a, Disjoint):
        return "disjoint_from", [str(a.b)]
    return "equivalent_to", [str(a.b)]


_AXIOM_TAG_ORDER = ("is_a", "intersection_of", "relationship", "disjoint_from", "equivalent_to")


def _qualifier_block(quals: Mapping[str, str]) -> str:
    if not quals:
        return ""
    body = ", ".join(f'{k}="{_escape(v)}"' for k, v in sorted(quals.items()))
    return f" {{{body}}}"


def write_obo(
    header: Iterable[tuple[str, str]],
    classes: Mapping[EntityId, Annotations],
    relations: Mapping[EntityId, Annotations],
    axioms: Iterable[Axiom],
    provenance: Mapping[Axiom, Iterable[str]] | None = None,
) -> str:
    """Low-level writer shared by every document kind.

    Stanzas come out sorted by id ([Term] before [Typedef]) with a fixed tag
    order. When ``provenance`` is given every axiom line carries a
    ``{provenance="a|b"}`` qualifier.
    """
    lines = [f"format-version: {FORMAT_VERSION}", f"auto-generated-by: ontomod {__version__}"]
    lines.extend(f"{k}: {v}" for k, v in header)

    by_subject: dict[EntityId, list[Axiom]] = defaultdict(list)
    for a in axioms:
        by_subject[subject_of(a)].append(a)

    def stanza(kind: str, e: EntityId, ann: Annotations) -> None:
        lines.append("")
        lines.append(f"[{kind}]")
        lines.append(f"id: {e}")
        if ann.name is not None:
            lines.append(f"name: {ann.name}")
        if ann.definition is not None:
            lines.append(f'def: "{_escape(ann.definition)}" []')
        for syn in ann.synonyms:
            lines.append(f'synonym: "{_escape(syn.text)}" {syn.scope} []')
        for alt in ann.alt_ids:
            lines.append(f"alt_id: {alt}")
        tagged: dict[str, list[str]] = defaultdict(list)
        intersections = 0
        for a in sorted(by_subject.pop(e, ()), key=lambda x: x.sort_key()):
            tag, values = _axiom_lines(a)
            quals: dict[str, str] = {}
            if provenance is not None:
                quals["provenance"] = "|".join(sorted(provenance.get(a, {a.provenance})))
            if tag == "intersection_of":
                intersections += 1
                if intersections > 1:
                    quals["intersection_group"] = str(intersections)
            tagged[tag].extend(f"{tag}: {v}{_qualifier_block(quals)}" for v in values)
        for tag in _AXIOM_TAG_ORDER:
            lines.extend(tagged.get(tag, ()))
        if ann.is_obsolete:
            lines.append("is_obsolete: true")

    for e in sorted(classes):
        stanza("Term", e, classes[e])
    for e in sorted(relations):
        if e not in classes:
            stanza("Typedef", e, relations[e])
    # subjects without a declaration (bridge documents)
    for e in sorted(by_subject):
        stanza("Term", e, Annotations())
    return "\n".join(lines) + "\n"


def serialize_obo(x) -> str:
    """Serialize an Ontology, Module, BridgeOntology or MergedOntology."""
    from .integrate import BridgeOntology, MergedOntology

    if isinstance(x, Module):
        header = [("ontology", x.source), ("seed_label", x.seed_label)]
        header += [("seed", str(e)) for e in sorted(x.seed_signature)]
        return write_obo(header, x.classes, x.relations, x.axioms)
    if isinstance(x, Ontology):
        return write_obo([("ontology", x.id)], x.classes, x.relations, x.axioms)
    if isinstance(x, BridgeOntology):
        header = [("ontology", x.id)] + [("import", ref) for ref in x.imports]
        return write_obo(header, {}, {}, x.bridge_axioms)
    if isinstance(x, MergedOntology):
        return write_obo([("ontology", x.id)], x.classes, x.relations, x.axioms, x.provenance)
    raise TypeError(f"cannot serialize {type(x).__name__}")
