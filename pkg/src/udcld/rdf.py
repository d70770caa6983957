"""RDF graphs for class records and for complex notations.

Class records map onto SKOS with a handful of UDC-specific note qualifiers.
A complex notation is "atomized": every compound, connected expression and
subgroup becomes a blank node whose syntax predicates point at the class
URIs of its parts.

Serialization is deterministic so output can be compared byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

from .notation import (
    Compound,
    Connected,
    Connector,
    Element,
    ElementKind,
    NotationNode,
    Subgroup,
    serialize,
)
from .store import Active, Cancelled, ClassRecord, ClassStore, Resolution, Tier
from .uri import UriStyle

__all__ = [
    "Iri",
    "Blank",
    "Literal",
    "Term",
    "Triple",
    "Graph",
    "RDF",
    "SKOS",
    "DCTERMS",
    "UDC",
    "SYNTAX",
    "NOTATION_DATATYPE",
    "UNRESOLVED_DATATYPE",
    "PREFIXES",
    "FIELD_PROPERTIES",
    "KIND_PREDICATES",
    "CONNECTOR_PREDICATES",
    "record_graph",
    "dataset_graph",
    "complex_graph",
    "to_turtle",
    "graph_json",
]


@dataclass(frozen=True)
class Iri:
    value: str


@dataclass(frozen=True)
class Blank:
    id: str


@dataclass(frozen=True)
class Literal:
    value: str
    lang: Optional[str] = None
    datatype: Optional[str] = None

    def __post_init__(self):
        if self.lang is not None and self.datatype is not None:
            raise ValueError("a literal has a language tag or a datatype, not both")


Term = Union[Iri, Blank, Literal]


@dataclass(frozen=True)
class Triple:
    s: Union[Iri, Blank]
    p: Iri
    o: Term


class _Namespace(str):
    def __getattr__(self, name: str) -> Iri:
        if name.startswith("__"):
            raise AttributeError(name)
        return Iri(self + name)

    def term(self, name: str) -> Iri:
        return Iri(self + name)


RDF = _Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
SKOS = _Namespace("http://www.w3.org/2004/02/skos/core#")
DCTERMS = _Namespace("http://purl.org/dc/terms/")
UDC = _Namespace("http://udcdata.info/udc-schema#")
SYNTAX = _Namespace("http://udcdata.info/udc-syntax-schema#")
NOTATION_DATATYPE = "http://udcdata.info/UDCnotation"
UNRESOLVED_DATATYPE = UDC + "unresolvedNotation"

PREFIXES = (
    ("rdf", RDF),
    ("skos", SKOS),
    ("dcterms", DCTERMS),
    ("udc", UDC),
    ("udc-syntax-schema", SYNTAX),
)


class Graph:
    """Insertion-ordered set of triples."""

    def __init__(self, triples=()):
        self._triples: list[Triple] = []
        self._seen: set[Triple] = set()
        for t in triples:
            self.add(t.s, t.p, t.o)

    def add(self, s: Union[Iri, Blank], p: Iri, o: Term) -> None:
        if not isinstance(s, (Iri, Blank)) or not isinstance(p, Iri):
            raise TypeError("subject must be an IRI or blank node, predicate an IRI")
        t = Triple(s, p, o)
        if t not in self._seen:
            self._seen.add(t)
            self._triples.append(t)

    def update(self, other: "Graph") -> None:
        for t in other:
            self.add(t.s, t.p, t.o)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._seen

    def objects(self, s: Term, p: Iri) -> list[Term]:
        return [t.o for t in self._triples if t.s == s and t.p == p]

    def triples(self, s=None, p=None, o=None) -> list[Triple]:
        return [
            t for t in self._triples
            if (s is None or t.s == s) and (p is None or t.p == p) and (o is None or t.o == o)
        ]

    def blank_nodes(self) -> list[Blank]:
        """Blank nodes in order of first use."""
        seen: dict[Blank, None] = {}
        for t in self._triples:
            for term in (t.s, t.o):
                if isinstance(term, Blank):
                    seen.setdefault(term)
        return list(seen)


def _bnode(prefix: str, *key: str) -> Blank:
    digest = hashlib.sha1("\x1f".join(key).encode("utf-8")).hexdigest()[:12]
    return Blank(prefix + digest)


# ---------------------------------------------------------------------------
# Class records
# ---------------------------------------------------------------------------

# record field -> (property, qualifier); the qualifier types the note node.
FIELD_PROPERTIES = {
    "notation": (SKOS.notation, None),
    "class identifier": (RDF.type, None),
    "broader": (SKOS.broader, None),
    "captions": (SKOS.prefLabel, None),
    "including_note": (SKOS.note, UDC.includingNote),
    "application_note": (SKOS.note, UDC.applicationNote),
    "scope_note": (SKOS.scopeNote, None),
    "examples": (SKOS.example, None),
    "related": (SKOS.related, None),
    "revision_history": (SKOS.historyNote, UDC.revisionHistory),
    "introduced": (SKOS.historyNote, UDC.introductionDate),
    "cancelled": (SKOS.historyNote, UDC.cancellationDate),
    "replaced_by": (SKOS.historyNote, UDC.replacedBy),
    "last_revision": (SKOS.historyNote, UDC.lastrevisionDate),
}

NOTE_LANG = "en"


def _qualified_note(g: Graph, subject: Iri, field: str, value: Term) -> None:
    # <class> skos:note [ a udc:includingNote ; rdf:value "..." ]
    prop, qualifier = FIELD_PROPERTIES[field]
    node = _bnode("n", subject.value, field, repr(value))
    g.add(subject, prop, node)
    g.add(node, RDF.type, qualifier)
    g.add(node, RDF.value, value)


def record_graph(store: ClassStore, record: ClassRecord, tier: Tier,
                 style: UriStyle = UriStyle()) -> Graph:
    """SKOS description of one class as seen in ``tier``.

    Links to classes that ``tier`` does not hold are omitted, or given as a
    plain notation literal for replacements.
    """
    if not record.visible_at(tier):
        raise ValueError(f"{record.notation} is not visible in {tier.value}")
    g = Graph()
    me = Iri(style.class_uri(record, tier))

    def link(notation: str) -> Optional[Iri]:
        target = store.current(notation)
        if target is None or not target.visible_at(tier):
            return None
        return Iri(style.class_uri(target, tier))

    g.add(me, RDF.type, SKOS.Concept)
    g.add(me, SKOS.inScheme, Iri(style.scheme_iri(tier)))
    g.add(me, SKOS.notation, Literal(record.notation, datatype=NOTATION_DATATYPE))
    for lang, text in record.captions.items():
        g.add(me, SKOS.prefLabel, Literal(text, lang=lang))
    if record.broader is not None and (target := link(record.broader)) is not None:
        g.add(me, SKOS.broader, target)
    if record.is_active:
        for child in store.narrower(record):
            if child.visible_at(tier):
                g.add(me, SKOS.narrower, Iri(style.class_uri(child, tier)))
    for notation in record.related:
        if (target := link(notation)) is not None:
            g.add(me, SKOS.related, target)
    if record.scope_note:
        g.add(me, SKOS.scopeNote, Literal(record.scope_note, lang=NOTE_LANG))
    for example in record.examples:
        g.add(me, SKOS.example, Literal(example, lang=NOTE_LANG))
    for field in ("including_note", "application_note", "revision_history"):
        text = getattr(record, field)
        if text:
            _qualified_note(g, me, field, Literal(text, lang=NOTE_LANG))
    for field in ("introduced", "cancelled", "last_revision"):
        version = getattr(record, field)
        if version:
            _qualified_note(g, me, field, Literal(version))
    for notation in record.replaced_by:
        target = link(notation)
        _qualified_note(g, me, "replaced_by",
                        target or Literal(notation, datatype=NOTATION_DATATYPE))
    return g


def dataset_graph(store: ClassStore, tier: Tier, style: UriStyle = UriStyle()) -> Graph:
    """Every record visible in ``tier``, cancelled ones included, plus the
    concept scheme node."""
    g = Graph()
    g.add(Iri(style.scheme_iri(tier)), RDF.type, SKOS.ConceptScheme)
    for record in store:
        if record.visible_at(tier):
            g.update(record_graph(store, record, tier, style))
    return g


# ---------------------------------------------------------------------------
# Complex notations
# ---------------------------------------------------------------------------

KIND_PREDICATES = {
    ElementKind.MAIN: SYNTAX.main,
    ElementKind.LANGUAGE: SYNTAX.language_aux,
    ElementKind.FORM: SYNTAX.form_aux,
    ElementKind.PLACE: SYNTAX.place_aux,
    ElementKind.ETHNIC: SYNTAX.ethnic_aux,
    ElementKind.TIME: SYNTAX.time_aux,
    ElementKind.PROPERTIES: SYNTAX.properties_aux,
    ElementKind.MATERIALS: SYNTAX.materials_aux,
    ElementKind.PROCESSES: SYNTAX.processes_aux,
    ElementKind.PERSONS: SYNTAX.persons_aux,
    ElementKind.SPECIAL_HYPHEN: SYNTAX.special_aux,
    ElementKind.SPECIAL_POINT_ZERO: SYNTAX.special_aux,
    ElementKind.SPECIAL_APOSTROPHE: SYNTAX.special_aux,
    ElementKind.ALPHA_EXTENSION: SYNTAX.alpha_ext,
    ElementKind.OTHER_SYSTEM: SYNTAX.other_system,
}

CONNECTOR_PREDICATES = {
    Connector.RELATION: SYNTAX.relation_to,
    Connector.COORDINATION: SYNTAX.coordination,
    Connector.ORDER_FIXING: SYNTAX.order_fixing,
    Connector.CONSECUTIVE: SYNTAX.consecutive,
}


def _leaf_target(leaf: Element, resolution: Optional[Resolution], tier: Tier,
                 style: UriStyle) -> Term:
    record = resolution.record if isinstance(resolution, (Active, Cancelled)) else None
    if record is not None and record.visible_at(tier):
        return Iri(style.class_uri(record, tier))
    return Literal(leaf.raw, datatype=UNRESOLVED_DATATYPE)


def complex_graph(tree: NotationNode, resolutions: Mapping[Element, Resolution], tier: Tier,
                  style: UriStyle = UriStyle()) -> Graph:
    """Blank-node grouping of a parsed notation.

    Compound: ``_:c main <94> ; place_aux <(492)>``. Connected:
    ``_:r operand _:a, _:b`` plus one connector edge ``_:a relation_to _:b``
    per sign. Subgroup: ``_:s subgroup _:inner``. Every blank node also
    carries the canonical notation of its subtree.
    """
    g = Graph()

    def leaf(el: Element) -> Term:
        return _leaf_target(el, resolutions.get(el), tier, style)

    def group(node: NotationNode, prefix: str) -> Blank:
        text = serialize(node)
        b = _bnode(prefix, str(node.span[0]), str(node.span[1]), text)
        g.add(b, SYNTAX.notation, Literal(text, datatype=NOTATION_DATATYPE))
        return b

    def visit(node: NotationNode) -> Term:
        if isinstance(node, Element):
            return leaf(node)
        if isinstance(node, Compound):
            b = group(node, "c")
            for el in (node.head, *node.attachments):
                g.add(b, KIND_PREDICATES[el.kind], leaf(el))
            return b
        if isinstance(node, Connected):
            b = group(node, "r")
            terms = []
            for op in node.operands:
                t = visit(op)
                g.add(b, SYNTAX.operand, t)
                terms.append(t)
            for conn, left, right in zip(node.connectors, terms, terms[1:]):
                if isinstance(left, Literal):
                    continue
                g.add(left, CONNECTOR_PREDICATES[conn], right)
            return b
        if isinstance(node, Subgroup):
            b = group(node, "s")
            g.add(b, SYNTAX.subgroup, visit(node.inner))
            return b
        raise TypeError(f"not a notation node: {node!r}")

    top = visit(tree)
    if isinstance(top, Iri):
        g.add(top, SKOS.notation, Literal(tree.raw, datatype=NOTATION_DATATYPE))
    return g


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_LOCAL_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def _iri(value: str, prefixed: bool = True) -> str:
    if prefixed:
        for prefix, ns in PREFIXES:
            if value.startswith(ns) and _LOCAL_NAME.fullmatch(value[len(ns):]):
                return f"{prefix}:{value[len(ns):]}"
    return f"<{value}>"


def _term(term: Term) -> str:
    if isinstance(term, Iri):
        return _iri(term.value)
    if isinstance(term, Blank):
        return f"_:{term.id}"
    text = f'"{_escape(term.value)}"'
    if term.lang:
        return f"{text}@{term.lang}"
    if term.datatype:
        return f"{text}^^{_iri(term.datatype)}"
    return text


def to_turtle(graph: Graph) -> str:
    """Turtle with IRI subjects sorted, then blank-node subjects in order of
    first use. Predicates are sorted (``a`` first); objects keep graph order."""
    lines = [f"@prefix {prefix}: <{ns}> ." for prefix, ns in PREFIXES]
    by_subject: dict[Union[Iri, Blank], list[Triple]] = {}
    for t in graph:
        by_subject.setdefault(t.s, []).append(t)

    iris = sorted((s for s in by_subject if isinstance(s, Iri)), key=lambda s: s.value)
    blanks = [b for b in graph.blank_nodes() if b in by_subject]
    for subject in [*iris, *blanks]:
        objects: dict[Iri, list[Term]] = {}
        for t in by_subject[subject]:
            objects.setdefault(t.p, []).append(t.o)
        preds = sorted(objects, key=lambda p: (p != RDF.type, _iri(p.value)))
        lines.append("")
        body = []
        for p in preds:
            verb = "a" if p == RDF.type else _iri(p.value)
            body.append(f"{verb} " + " ,\n        ".join(_term(o) for o in objects[p]))
        lines.append(f"{_term(subject)}\n    " + " ;\n    ".join(body) + " .")
    return "\n".join(lines) + "\n"


def _nt(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Blank):
        return f"_:{term.id}"
    text = f'"{_escape(term.value)}"'
    if term.lang:
        return f"{text}@{term.lang}"
    if term.datatype:
        return f"{text}^^<{term.datatype}>"
    return text


def graph_json(graph: Graph) -> str:
    """Array of ``{s, p, o}`` objects with terms in N-Triples syntax."""
    rows = [{"s": _nt(t.s), "p": _nt(t.p), "o": _nt(t.o)} for t in graph]
    return json.dumps(rows, ensure_ascii=False, indent=2)
