"""Interpretation of a classmark against the store, and its JSON/HTML views.

``interpret`` is the single code path behind both the parse endpoint and the
``parse`` command, so their JSON output is identical for the same input.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .notation import (
    Compound,
    Connected,
    Connector,
    Element,
    ElementKind,
    NotationNode,
    Subgroup,
    flat_elements,
    leaves,
    parse,
)
from .rdf import Graph, complex_graph, graph_json
from .store import Active, Cancelled, ClassRecord, ClassStore, Resolution, Tier, Unknown
from .uri import UriStyle

__all__ = [
    "ElementInfo",
    "ParseResult",
    "interpret",
    "to_json",
    "to_html",
    "record_html",
    "caption_sentence",
]

# Caption lookup may fall back to a broader class only for these kinds;
# special auxiliaries are local to their table and cannot be truncated.
_TRUNCATABLE_KINDS = {ElementKind.MAIN} | {k for k in ElementKind if k.is_common_auxiliary}


@dataclass(frozen=True)
class ElementInfo:
    notation: str
    kind: str
    label: str
    status: str  # active | cancelled | unknown | connector
    caption: Optional[str] = None
    version: Optional[str] = None
    uri: Optional[str] = None
    matched: Optional[str] = None
    replaced_by: tuple[str, ...] = ()
    resolved_to: Optional[dict] = None
    fallback: Optional[dict] = None

    @property
    def is_connector(self) -> bool:
        return self.status == "connector"

    def to_dict(self) -> dict:
        d = {
            "notation": self.notation,
            "kind": self.kind,
            "caption": self.caption,
            "version": self.version,
            "uri": self.uri,
            "status": self.status,
        }
        if self.matched is not None:
            d["matched"] = self.matched
        if self.status == "cancelled":
            d["replaced_by"] = list(self.replaced_by)
            d["resolved_to"] = self.resolved_to
        if self.fallback is not None:
            d["fallback"] = self.fallback
        return d


@dataclass(frozen=True)
class ParseResult:
    input: str
    dataset: Tier
    tree: NotationNode
    elements: tuple[ElementInfo, ...]
    resolutions: dict = field(compare=False)
    style: UriStyle = UriStyle()

    def graph(self) -> Graph:
        return complex_graph(self.tree, self.resolutions, self.dataset, self.style)

    def turtle_href(self) -> str:
        return self.style.parse_api(self.dataset, self.input) + "?format=ttl"


def _brief(record: ClassRecord, tier: Tier, style: UriStyle, lang: str) -> dict:
    """Notation plus caption and URI when ``tier`` may show them."""
    if not record.visible_at(tier):
        return {"notation": record.notation, "caption": None, "uri": None}
    return {
        "notation": record.notation,
        "caption": record.caption(lang),
        "uri": style.class_uri(record, tier),
    }


def _describe(store: ClassStore, leaf: Element, tier: Tier, style: UriStyle,
              lang: str) -> tuple[ElementInfo, Resolution]:
    kind = leaf.kind.value
    label = leaf.kind.label
    if leaf.kind in _TRUNCATABLE_KINDS:
        found = store.nearest(leaf.raw)
    else:
        rec = store.current(leaf.raw)
        found = (rec, leaf.raw) if rec else None
    if found is None:
        return ElementInfo(leaf.raw, kind, label, "unknown"), Unknown(leaf.raw)

    _, matched = found
    resolution = store.resolve(matched)
    record = resolution.record
    visible = record.visible_at(tier)
    info = dict(
        notation=leaf.raw,
        kind=kind,
        label=label,
        status="active" if isinstance(resolution, Active) else "cancelled",
        version=record.introduced,
        matched=matched if matched != leaf.raw else None,
    )
    if visible:
        info.update(caption=record.caption(lang), uri=style.class_uri(record, tier))
    else:
        ancestor = store.fallback_ancestor(matched, tier)
        if ancestor is not None:
            info["fallback"] = _brief(ancestor, tier, style, lang)
    if isinstance(resolution, Cancelled):
        info["replaced_by"] = record.replaced_by
        if resolution.terminal is not None:
            info["resolved_to"] = _brief(resolution.terminal, tier, style, lang)
    return ElementInfo(**info), resolution


def interpret(store: ClassStore, notation: str, tier: Tier, style: UriStyle = UriStyle(),
              lang: str = "en") -> ParseResult:
    """Parse ``notation`` and resolve every element at ``tier``.

    Raises ``ParseError``/``LexError`` for malformed input.
    """
    tree = parse(notation)
    resolutions: dict[Element, Resolution] = {}
    by_span = {leaf.span: leaf for leaf in leaves(tree)}
    rows = []
    for part in flat_elements(tree):
        if isinstance(part.kind, Connector):
            rows.append(ElementInfo(part.raw, part.kind.name.lower(), "common aux. sign",
                                    "connector", caption=part.kind.meaning))
            continue
        leaf = by_span[part.span]
        info, resolution = _describe(store, leaf, tier, style, lang)
        resolutions[leaf] = resolution
        rows.append(info)
    return ParseResult(notation, tier, tree, tuple(rows), resolutions, style)


def _tree_json(node: NotationNode) -> dict:
    if isinstance(node, Element):
        return {"type": "element", "kind": node.kind.value, "notation": node.raw}
    if isinstance(node, Compound):
        return {
            "type": "compound",
            "head": _tree_json(node.head),
            "attachments": [_tree_json(a) for a in node.attachments],
        }
    if isinstance(node, Connected):
        return {
            "type": "connected",
            "operands": [_tree_json(op) for op in node.operands],
            "connectors": [c.glyph for c in node.connectors],
        }
    return {"type": "subgroup", "inner": _tree_json(node.inner)}


def to_json(obj: Union[ParseResult, Graph]) -> str:
    if isinstance(obj, Graph):
        return graph_json(obj)
    payload = {
        "input": obj.input,
        "dataset": obj.dataset.value,
        "elements": [e.to_dict() for e in obj.elements],
        "tree": _tree_json(obj.tree),
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def caption_sentence(result: ParseResult) -> Optional[str]:
    """Readable gloss built from element captions, or None if any is missing.

    ``94(492):94(729.885)`` gives
    "General History (Netherlands) related to General History (Aruba)".
    """
    captions = {}
    for leaf, info in zip(leaves(result.tree), (e for e in result.elements if not e.is_connector)):
        if info.caption is None:
            return None
        captions[leaf] = info.caption

    def gloss(node: NotationNode) -> str:
        if isinstance(node, Element):
            return captions[node]
        if isinstance(node, Compound):
            parts = "; ".join(captions[a] for a in node.attachments)
            return f"{captions[node.head]} ({parts})"
        if isinstance(node, Connected):
            out = gloss(node.operands[0])
            for conn, op in zip(node.connectors, node.operands[1:]):
                out += f" {conn.meaning} {gloss(op)}"
            return out
        return f"[{gloss(node.inner)}]"

    return gloss(result.tree)


_PAGE = """<!DOCTYPE html>
<html lang="en">
<head><meta charset="utf-8"><title>{title}</title></head>
<body>
{body}
</body>
</html>
"""


def _link(uri: Optional[str], text: str) -> str:
    if uri is None:
        return html.escape(text)
    return f'<a href="{html.escape(uri)}">{html.escape(text)}</a>'


def to_html(result: ParseResult) -> str:
    e = html.escape
    body = [f"<h1>UDC number {e(result.input)}</h1>",
            f"<p>Dataset: {e(result.dataset.value)}</p>"]
    sentence = caption_sentence(result)
    if sentence:
        body.append(f'<p class="caption">{e(sentence)}</p>')
    body.append('<table class="elements">')
    body.append("<tr><th>Notation</th><th>Caption</th><th>Type</th><th>Version</th><th>Status</th></tr>")
    for el in result.elements:
        caption = el.caption or ""
        status = "" if el.is_connector else el.status
        if el.status == "cancelled" and el.replaced_by:
            status += " (replaced by " + ", ".join(el.replaced_by) + ")"
        body.append(
            f"<tr><td>{_link(el.uri, el.notation)}</td><td>{e(caption)}</td>"
            f"<td>{e(el.label)}</td><td>{e(el.version or '')}</td><td>{e(status)}</td></tr>"
        )
    body.append("</table>")
    body.append(f'<p><a href="{e(result.turtle_href())}">&gt;&gt; Generate RDF</a></p>')
    return _PAGE.format(title=e(f"UDC {result.input}"), body="\n".join(body))


def record_html(store: ClassStore, record: ClassRecord, tier: Tier, style: UriStyle = UriStyle(),
                lang: str = "en") -> str:
    """Human-readable page for one class: URI, notation, caption, hierarchy."""
    e = html.escape
    uri = style.class_uri(record, tier)
    rows = [
        ("URI", _link(uri, uri)),
        ("Notation", e(record.notation)),
        ("Caption", e(record.caption(lang) or "")),
        ("Introduced", e(record.introduced)),
    ]
    if record.cancelled:
        rows.append(("Cancelled", e(record.cancelled)))
        if record.replaced_by:
            rows.append(("Replaced by", e(", ".join(record.replaced_by))))
    broader = store.current(record.broader) if record.broader else None
    if broader is not None and broader.visible_at(tier):
        rows.append(("Broader class", _link(style.class_uri(broader, tier),
                                            f"{broader.notation} {broader.caption(lang) or ''}".strip())))
    if record.is_active:
        narrower = [c for c in store.narrower(record) if c.visible_at(tier)]
        if narrower:
            links = "<br>".join(
                _link(style.class_uri(c, tier), f"{c.notation} {c.caption(lang) or ''}".strip())
                for c in narrower
            )
            rows.append(("Narrower classes", links))
    table = "\n".join(f"<tr><th>{k}</th><td>{v}</td></tr>" for k, v in rows)
    body = f'<table class="record">\n{table}\n</table>\n<p><a href="{e(uri)}?format=ttl">RDF (Turtle)</a></p>'
    return _PAGE.format(title=e(f"UDC {record.notation}"), body=body)


