"""Parsing and serialization of UDC classmarks.

A classmark such as ``94(492):94(729.885)`` is decomposed into a tree of
elements (main numbers and auxiliaries), compounds (a head element with its
attached auxiliaries), connected expressions (operands joined by ``+``, ``:``,
``::`` or ``/``) and subgroups (``[...]``).

Only structural decomposition is done here. Whether a combination makes
sense in a given UDC edition is not checked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

__all__ = [
    "ElementKind",
    "Connector",
    "TokenKind",
    "Token",
    "Element",
    "Compound",
    "Connected",
    "Subgroup",
    "NotationNode",
    "Part",
    "NotationError",
    "LexError",
    "ParseError",
    "classify",
    "tokenize",
    "parse",
    "serialize",
    "flat_elements",
    "leaves",
    "segments",
]


class ElementKind(Enum):
    MAIN = "main"
    LANGUAGE = "language"
    FORM = "form"
    PLACE = "place"
    ETHNIC = "ethnic"
    TIME = "time"
    PROPERTIES = "properties"
    MATERIALS = "materials"
    PROCESSES = "processes"
    PERSONS = "persons"
    SPECIAL_HYPHEN = "special_hyphen"
    SPECIAL_POINT_ZERO = "special_point_zero"
    SPECIAL_APOSTROPHE = "special_apostrophe"
    ALPHA_EXTENSION = "alpha_extension"
    OTHER_SYSTEM = "other_system"

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]

    @property
    def is_common_auxiliary(self) -> bool:
        return self in _COMMON_AUXILIARIES

    @property
    def is_special_auxiliary(self) -> bool:
        return self in (
            ElementKind.SPECIAL_HYPHEN,
            ElementKind.SPECIAL_POINT_ZERO,
            ElementKind.SPECIAL_APOSTROPHE,
        )


_KIND_LABELS = {
    ElementKind.MAIN: "main table",
    ElementKind.LANGUAGE: "common aux. of language",
    ElementKind.FORM: "common aux. of form",
    ElementKind.PLACE: "common aux. of place",
    ElementKind.ETHNIC: "common aux. of ethnic grouping",
    ElementKind.TIME: "common aux. of time",
    ElementKind.PROPERTIES: "common aux. of properties",
    ElementKind.MATERIALS: "common aux. of materials",
    ElementKind.PROCESSES: "common aux. of processes",
    ElementKind.PERSONS: "common aux. of persons",
    ElementKind.SPECIAL_HYPHEN: "special aux. (hyphen)",
    ElementKind.SPECIAL_POINT_ZERO: "special aux. (point-nought)",
    ElementKind.SPECIAL_APOSTROPHE: "special aux. (apostrophe)",
    ElementKind.ALPHA_EXTENSION: "alphabetical extension",
    ElementKind.OTHER_SYSTEM: "code from other system",
}

_COMMON_AUXILIARIES = frozenset(
    {
        ElementKind.LANGUAGE,
        ElementKind.FORM,
        ElementKind.PLACE,
        ElementKind.ETHNIC,
        ElementKind.TIME,
        ElementKind.PROPERTIES,
        ElementKind.MATERIALS,
        ElementKind.PROCESSES,
        ElementKind.PERSONS,
    }
)

_HYPHEN_COMMON = {
    "02": ElementKind.PROPERTIES,
    "03": ElementKind.MATERIALS,
    "04": ElementKind.PROCESSES,
    "05": ElementKind.PERSONS,
}


class Connector(Enum):
    COORDINATION = "+"
    RELATION = ":"
    ORDER_FIXING = "::"
    CONSECUTIVE = "/"

    @property
    def glyph(self) -> str:
        return self.value

    @property
    def meaning(self) -> str:
        return _CONNECTOR_MEANINGS[self]


_CONNECTOR_MEANINGS = {
    Connector.COORDINATION: "and (coordination)",
    Connector.RELATION: "related to",
    Connector.ORDER_FIXING: "related to (order-fixing)",
    Connector.CONSECUTIVE: "extending to (consecutive extension)",
}


class NotationError(ValueError):
    """Base class for notation failures; carries a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.reason = message


class LexError(NotationError):
    pass


class ParseError(NotationError):
    def __init__(self, message: str, position: int, expected: str = ""):
        super().__init__(message, position)
        self.expected = expected


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------


class TokenKind(Enum):
    DIGITS = "digits"
    POINT_ZERO = "point_zero"
    LETTERS = "letters"
    OPEN = "open"
    CLOSE = "close"
    LBRACKET = "lbracket"
    RBRACKET = "rbracket"
    EQUALS = "equals"
    HYPHEN = "hyphen"
    APOSTROPHE = "apostrophe"
    QUOTE = "quote"
    TIME_TEXT = "time_text"
    ASTERISK = "asterisk"
    CODE = "code"
    COORDINATION = "coordination"
    RELATION = "relation"
    ORDER_FIXING = "order_fixing"
    CONSECUTIVE = "consecutive"


_CONNECTOR_TOKENS = {
    TokenKind.COORDINATION: Connector.COORDINATION,
    TokenKind.RELATION: Connector.RELATION,
    TokenKind.ORDER_FIXING: Connector.ORDER_FIXING,
    TokenKind.CONSECUTIVE: Connector.CONSECUTIVE,
}

_SINGLE_GLYPHS = {
    "(": TokenKind.OPEN,
    ")": TokenKind.CLOSE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "=": TokenKind.EQUALS,
    "-": TokenKind.HYPHEN,
    "`": TokenKind.APOSTROPHE,
    "'": TokenKind.APOSTROPHE,
    "+": TokenKind.COORDINATION,
    "/": TokenKind.CONSECUTIVE,
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    start: int
    end: int


# Outside parentheses ".0" opens a special auxiliary; inside, it is plain decimal.
_DIGITS_OUTSIDE = re.compile(r"[0-9]+(?:\.[1-9][0-9]*)*")
_DIGITS_INSIDE = re.compile(r"[0-9]+(?:\.[0-9]+)*")
_POINT_ZERO = re.compile(r"\.0[0-9]*(?:\.[1-9][0-9]*)*")
_LETTERS = re.compile(r"[A-Za-z]+")
_CODE = re.compile(r"[A-Za-z0-9.]+")
_TIME_TEXT = re.compile(r"[A-Za-z0-9./:-]+")


def tokenize(raw: str) -> list[Token]:
    """Split ``raw`` into tokens that cover every character exactly once."""
    tokens: list[Token] = []
    i, n = 0, len(raw)
    depth = 0
    in_quote = False

    def emit(kind: TokenKind, end: int) -> None:
        nonlocal i
        tokens.append(Token(kind, raw[i:end], i, end))
        i = end

    while i < n:
        c = raw[i]
        if in_quote:
            if c == '"':
                emit(TokenKind.QUOTE, i + 1)
                in_quote = False
                continue
            m = _TIME_TEXT.match(raw, i)
            if not m:
                raise LexError(f"unexpected character {c!r} in time auxiliary", i)
            emit(TokenKind.TIME_TEXT, m.end())
            continue

        if "0" <= c <= "9":
            pattern = _DIGITS_INSIDE if depth else _DIGITS_OUTSIDE
            emit(TokenKind.DIGITS, pattern.match(raw, i).end())
        elif c == ".":
            m = _POINT_ZERO.match(raw, i)
            if depth or not m:
                raise LexError("'.' must continue a number or open '.0'", i)
            emit(TokenKind.POINT_ZERO, m.end())
        elif "A" <= c <= "Z" or "a" <= c <= "z":
            emit(TokenKind.LETTERS, _LETTERS.match(raw, i).end())
        elif c == ":":
            if raw.startswith("::", i):
                emit(TokenKind.ORDER_FIXING, i + 2)
            else:
                emit(TokenKind.RELATION, i + 1)
        elif c == '"':
            emit(TokenKind.QUOTE, i + 1)
            in_quote = True
        elif c == "*":
            emit(TokenKind.ASTERISK, i + 1)
            m = _CODE.match(raw, i)
            if m:
                emit(TokenKind.CODE, m.end())
        elif c in _SINGLE_GLYPHS:
            kind = _SINGLE_GLYPHS[c]
            if kind is TokenKind.OPEN:
                depth += 1
            elif kind is TokenKind.CLOSE:
                depth = max(0, depth - 1)
            emit(kind, i + 1)
        else:
            raise LexError(f"character {c!r} is not part of the UDC notation alphabet", i)
    return tokens


# ---------------------------------------------------------------------------
# Tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Element:
    kind: ElementKind
    raw: str
    span: tuple[int, int]


@dataclass(frozen=True)
class Compound:
    head: Element
    attachments: tuple[Element, ...]

    @property
    def span(self) -> tuple[int, int]:
        return (self.head.span[0], self.attachments[-1].span[1])


@dataclass(frozen=True)
class Connected:
    operands: tuple["NotationNode", ...]
    connectors: tuple[Connector, ...]

    def __post_init__(self):
        if len(self.operands) < 2 or len(self.connectors) != len(self.operands) - 1:
            raise ValueError("Connected needs n >= 2 operands and n - 1 connectors")

    @property
    def span(self) -> tuple[int, int]:
        return (self.operands[0].span[0], self.operands[-1].span[1])


@dataclass(frozen=True)
class Subgroup:
    inner: "NotationNode"
    span: tuple[int, int] = field(default=(0, 0))


NotationNode = Union[Element, Compound, Connected, Subgroup]


def classify(raw: str) -> ElementKind:
    """Element kind from the facet indicator at the start of ``raw``.

    At most the first three characters are inspected.
    """
    c0, c1, c2 = (raw + "\0\0\0")[:3]
    if c0.isascii() and c0.isdigit():
        return ElementKind.MAIN
    if c0 == "=" and c1.isascii() and c1.isdigit():
        return ElementKind.LANGUAGE
    if c0 == "(":
        if c1 == "0":
            return ElementKind.FORM
        if "1" <= c1 <= "9":
            return ElementKind.PLACE
        if c1 == "=" and c2.isascii() and c2.isdigit():
            return ElementKind.ETHNIC
    if c0 == '"':
        return ElementKind.TIME
    if c0 == "-":
        if c1 + c2 in _HYPHEN_COMMON:
            return _HYPHEN_COMMON[c1 + c2]
        if "1" <= c1 <= "9":
            return ElementKind.SPECIAL_HYPHEN
    if c0 == "." and c1 == "0":
        return ElementKind.SPECIAL_POINT_ZERO
    if c0 in "`'" and c1.isascii() and c1.isdigit():
        return ElementKind.SPECIAL_APOSTROPHE
    if c0 == "*":
        return ElementKind.OTHER_SYSTEM
    if c0.isascii() and c0.isalpha():
        return ElementKind.ALPHA_EXTENSION
    raise ValueError(f"no element kind starts with {raw[:3]!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_HEAD_START = {
    TokenKind.DIGITS,
    TokenKind.OPEN,
    TokenKind.EQUALS,
    TokenKind.QUOTE,
    TokenKind.HYPHEN,
}
_ATTACHMENT_START = {
    TokenKind.OPEN,
    TokenKind.EQUALS,
    TokenKind.QUOTE,
    TokenKind.HYPHEN,
    TokenKind.POINT_ZERO,
    TokenKind.APOSTROPHE,
    TokenKind.LETTERS,
    TokenKind.ASTERISK,
}


class _Parser:
    def __init__(self, raw: str):
        self.raw = raw
        self.tokens = tokenize(raw)
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def here(self) -> int:
        tok = self.peek()
        return tok.start if tok else len(self.raw)

    def fail(self, message: str, expected: str, position: int | None = None):
        raise ParseError(message, self.here() if position is None else position, expected)

    def expect(self, kind: TokenKind, expected: str, message: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            self.fail(message, expected)
        return self.advance()

    # expr := operand (connector operand)*
    def expression(self) -> NotationNode:
        operands = [self.operand()]
        connectors = []
        while (tok := self.peek()) is not None and tok.kind in _CONNECTOR_TOKENS:
            self.advance()
            nxt = self.peek()
            if nxt is None or (nxt.kind not in _HEAD_START and nxt.kind is not TokenKind.LBRACKET):
                self.fail(f"dangling connector {tok.lexeme!r}", "notation")
            connectors.append(_CONNECTOR_TOKENS[tok.kind])
            operands.append(self.operand())
        if len(operands) == 1:
            return operands[0]
        return Connected(tuple(operands), tuple(connectors))

    def operand(self) -> NotationNode:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of notation", "notation")
        if tok.kind is TokenKind.LBRACKET:
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind is TokenKind.RBRACKET:
                self.fail("empty subgroup", "notation")
            if nxt is None:
                self.fail("unbalanced '['", "']'", tok.start)
            inner = self.expression()
            close = self.peek()
            if close is None:
                self.fail("unbalanced '['", "']'", tok.start)
            if close.kind is not TokenKind.RBRACKET:
                self.fail(f"unexpected {close.lexeme!r}", "']'")
            self.advance()
            return Subgroup(inner, (tok.start, close.end))

        head = self.element(head=True)
        attachments = []
        while (tok := self.peek()) is not None and tok.kind in _ATTACHMENT_START:
            attachments.append(self.element(head=False))
        tok = self.peek()
        if tok is not None and tok.kind not in _CONNECTOR_TOKENS and tok.kind is not TokenKind.RBRACKET:
            self.fail(f"unexpected {tok.lexeme!r}", "connector or end of notation")
        if not attachments:
            return head
        return Compound(head, tuple(attachments))

    def element(self, head: bool) -> Element:
        tok = self.peek()
        start = tok.start
        k = tok.kind
        if head and k not in _HEAD_START:
            self.fail(f"unexpected {tok.lexeme!r}", "main number or common auxiliary")
        if k is TokenKind.DIGITS:
            if not head:
                self.fail("a number cannot follow an auxiliary directly", "connector")
            self.advance()
            raw = tok.lexeme
        elif k is TokenKind.OPEN:
            raw = self.parenthesized()
        elif k is TokenKind.EQUALS:
            self.advance()
            raw = "=" + self.expect(TokenKind.DIGITS, "digits", "auxiliary with no content").lexeme
        elif k is TokenKind.QUOTE:
            self.advance()
            text = self.peek()
            if text is None:
                self.fail("unbalanced '\"'", "'\"'", start)
            if text.kind is not TokenKind.TIME_TEXT:
                self.fail("auxiliary with no content", "time")
            self.advance()
            if self.peek() is None:
                self.fail("unbalanced '\"'", "'\"'", start)
            self.advance()
            raw = f'"{text.lexeme}"'
        elif k is TokenKind.HYPHEN:
            self.advance()
            raw = "-" + self.expect(TokenKind.DIGITS, "digits", "auxiliary with no content").lexeme
        elif k is TokenKind.POINT_ZERO:
            self.advance()
            raw = tok.lexeme
        elif k is TokenKind.APOSTROPHE:
            self.advance()
            raw = "`" + self.expect(TokenKind.DIGITS, "digits", "auxiliary with no content").lexeme
        elif k is TokenKind.LETTERS:
            prev = self.tokens[self.pos - 1]
            if prev.kind not in (TokenKind.DIGITS, TokenKind.POINT_ZERO):
                self.fail("alphabetical extension must follow a number", "connector")
            self.advance()
            raw = tok.lexeme
        elif k is TokenKind.ASTERISK:
            self.advance()
            raw = "*" + self.expect(TokenKind.CODE, "code", "auxiliary with no content").lexeme
        else:
            self.fail(f"unexpected {tok.lexeme!r}", "notation")

        try:
            kind = classify(raw)
        except ValueError:
            self.fail(f"unknown auxiliary {raw!r}", "facet indicator", start)
        if head and not (kind is ElementKind.MAIN or kind.is_common_auxiliary):
            self.fail(f"{kind.label} cannot stand alone", "main number or common auxiliary", start)
        return Element(kind, raw, (start, self.tokens[self.pos - 1].end))

    # "(" ["="] DIGITS (DIGITS|LETTERS)* ["/" ["="] DIGITS (DIGITS|LETTERS)*] ")"
    def parenthesized(self) -> str:
        open_tok = self.advance()
        parts = ["("]
        ranges = 0
        while True:
            if self.peek() is not None and self.peek().kind is TokenKind.EQUALS:
                parts.append(self.advance().lexeme)
            tok = self.peek()
            if tok is None:
                self.fail("unbalanced '('", "')'", open_tok.start)
            if tok.kind is not TokenKind.DIGITS:
                if tok.kind is TokenKind.CLOSE and len(parts) == 1:
                    self.fail("auxiliary with no content", "digits")
                self.fail(f"unexpected {tok.lexeme!r}", "digits")
            parts.append(self.advance().lexeme)
            while (tok := self.peek()) is not None and tok.kind in (TokenKind.DIGITS, TokenKind.LETTERS):
                parts.append(self.advance().lexeme)
            if tok is None:
                self.fail("unbalanced '('", "')'", open_tok.start)
            if tok.kind is TokenKind.CONSECUTIVE and ranges == 0:
                ranges += 1
                parts.append(self.advance().lexeme)
                continue
            if tok.kind is not TokenKind.CLOSE:
                self.fail(f"unexpected {tok.lexeme!r}", "')'")
            parts.append(self.advance().lexeme)
            return "".join(parts)


def parse(raw: str) -> NotationNode:
    """Parse a classmark into its tree.

    >>> parse("94")
    Element(kind=<ElementKind.MAIN: 'main'>, raw='94', span=(0, 2))
    """
    if not raw:
        raise ParseError("empty notation", 0, "notation")
    p = _Parser(raw)
    tree = p.expression()
    tok = p.peek()
    if tok is not None:
        if tok.kind is TokenKind.RBRACKET:
            p.fail("unbalanced ']'", "end of notation")
        p.fail(f"unexpected {tok.lexeme!r}", "end of notation")
    return tree


def serialize(tree: NotationNode) -> str:
    if isinstance(tree, Element):
        return tree.raw
    if isinstance(tree, Compound):
        return tree.head.raw + "".join(a.raw for a in tree.attachments)
    if isinstance(tree, Connected):
        out = [serialize(tree.operands[0])]
        for conn, operand in zip(tree.connectors, tree.operands[1:]):
            out.append(conn.glyph)
            out.append(serialize(operand))
        return "".join(out)
    if isinstance(tree, Subgroup):
        return "[" + serialize(tree.inner) + "]"
    raise TypeError(f"not a notation node: {tree!r}")


@dataclass(frozen=True)
class Part:
    """One row of a flattened notation: an element or a connecting sign."""

    raw: str
    kind: Union[ElementKind, Connector]
    span: tuple[int, int]

    @property
    def is_connector(self) -> bool:
        return isinstance(self.kind, Connector)


def segments(tree: NotationNode) -> Iterator[Part | tuple[str, tuple[int, int]]]:
    """Yield leaves and connectors as ``Part`` and brackets as ``(glyph, span)``
    in source order."""
    if isinstance(tree, Element):
        yield Part(tree.raw, tree.kind, tree.span)
    elif isinstance(tree, Compound):
        for el in (tree.head, *tree.attachments):
            yield Part(el.raw, el.kind, el.span)
    elif isinstance(tree, Connected):
        yield from segments(tree.operands[0])
        for conn, left, right in zip(tree.connectors, tree.operands, tree.operands[1:]):
            end = left.span[1]
            yield Part(conn.glyph, conn, (end, end + len(conn.glyph)))
            yield from segments(right)
    elif isinstance(tree, Subgroup):
        start, end = tree.span
        yield ("[", (start, start + 1))
        yield from segments(tree.inner)
        yield ("]", (end - 1, end))
    else:
        raise TypeError(f"not a notation node: {tree!r}")


def flat_elements(tree: NotationNode) -> list[Part]:
    return [s for s in segments(tree) if isinstance(s, Part)]


def leaves(tree: NotationNode) -> list[Element]:
    if isinstance(tree, Element):
        return [tree]
    if isinstance(tree, Compound):
        return [tree.head, *tree.attachments]
    if isinstance(tree, Connected):
        return [leaf for op in tree.operands for leaf in leaves(op)]
    return leaves(tree.inner)
