"""Versioned UDC class records with their deprecation chains.

Records are ingested from line-delimited JSON together with a version
catalog. A notation may occur in several records when it was cancelled and
later re-used; ``(notation, introduced)`` identifies a record uniquely.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .notation import Element, NotationError, classify, parse

__all__ = [
    "Tier",
    "VersionCatalog",
    "ClassRecord",
    "ChainStep",
    "Active",
    "Cancelled",
    "Unknown",
    "Resolution",
    "Changes",
    "ClassStore",
    "IngestError",
    "CycleError",
    "OrderError",
    "load_catalog",
    "ingest",
    "RECORD_FIELDS",
]


class Tier(Enum):
    SUMMARY = "summary"
    ABRIDGED = "abridged"
    MRF = "mrf"

    @property
    def rank(self) -> int:
        return _TIER_ORDER.index(self)

    @property
    def subdomain(self) -> str:
        return _SUBDOMAINS[self]

    @property
    def is_open(self) -> bool:
        return self is Tier.SUMMARY

    @classmethod
    def from_name(cls, name: str) -> "Tier":
        """Accept ``summary``/``abridged``/``mrf`` or a dataset subdomain."""
        key = name.lower()
        for tier in cls:
            if key in (tier.value, tier.subdomain):
                return tier
        raise ValueError(f"unknown dataset {name!r}")


_TIER_ORDER = [Tier.SUMMARY, Tier.ABRIDGED, Tier.MRF]
_SUBDOMAINS = {Tier.SUMMARY: "udcsummary", Tier.ABRIDGED: "abridged", Tier.MRF: "mrf"}


class IngestError(ValueError):
    def __init__(self, line: int, field: Optional[str], reason: str):
        where = f"line {line}" + (f", field {field!r}" if field else "")
        super().__init__(f"{where}: {reason}")
        self.line = line
        self.field = field
        self.reason = reason


class CycleError(RuntimeError):
    def __init__(self, path: list[str]):
        super().__init__("cycle through " + " -> ".join(path))
        self.path = path


class OrderError(ValueError):
    pass


_VERSION_LABEL = re.compile(r"mrf[0-9]{2}")


class VersionCatalog:
    """Chronological list of MRF release labels.

    Order comes from the catalog itself; two-digit labels wrap across the
    century (``mrf99`` precedes ``mrf01``).
    """

    def __init__(self, labels: Iterable[str]):
        self.labels = tuple(labels)
        for label in self.labels:
            if not _VERSION_LABEL.fullmatch(label):
                raise ValueError(f"malformed version label {label!r}")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate version label in catalog")
        self._rank = {label: i for i, label in enumerate(self.labels)}

    def __contains__(self, label: object) -> bool:
        return label in self._rank

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def rank(self, label: str) -> int:
        try:
            return self._rank[label]
        except KeyError:
            raise KeyError(f"version {label!r} is not in the catalog") from None

    def pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.labels, self.labels[1:]))


def load_catalog(path: Union[str, Path]) -> VersionCatalog:
    with open(path, encoding="utf-8") as fp:
        data = json.load(fp)
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise ValueError(f"{path}: version catalog must be a JSON array of labels")
    return VersionCatalog(data)


RECORD_FIELDS = (
    "notation",
    "kind",
    "captions",
    "broader",
    "related",
    "scope_note",
    "including_note",
    "application_note",
    "examples",
    "revision_history",
    "introduced",
    "cancelled",
    "replaced_by",
    "last_revision",
    "legacy_ids",
    "in_summary",
    "in_abridged",
)

COMBINED = "combined"


@dataclass(frozen=True)
class ClassRecord:
    notation: str
    introduced: str
    kind: str = "main"
    captions: dict = field(default_factory=dict, compare=True, hash=False)
    broader: Optional[str] = None
    related: tuple[str, ...] = ()
    scope_note: Optional[str] = None
    including_note: Optional[str] = None
    application_note: Optional[str] = None
    examples: tuple[str, ...] = ()
    revision_history: Optional[str] = None
    cancelled: Optional[str] = None
    replaced_by: tuple[str, ...] = ()
    last_revision: Optional[str] = None
    legacy_ids: tuple[str, ...] = ()
    in_summary: bool = False
    in_abridged: bool = False

    @property
    def is_active(self) -> bool:
        return self.cancelled is None

    def visible_at(self, tier: Tier) -> bool:
        if tier is Tier.SUMMARY:
            return self.in_summary
        if tier is Tier.ABRIDGED:
            return self.in_abridged
        return True

    @property
    def lowest_tier(self) -> Tier:
        return next(t for t in _TIER_ORDER if self.visible_at(t))

    def caption(self, lang: str = "en") -> Optional[str]:
        """Caption in ``lang``, else English, else the first language given."""
        for key in (lang, "en"):
            if key in self.captions:
                return self.captions[key]
        return next(iter(self.captions.values()), None)

    @classmethod
    def from_json(cls, obj: dict) -> "ClassRecord":
        """Build a record from one decoded ingestion line (no validation)."""
        return cls(
            notation=obj["notation"],
            introduced=obj["introduced"],
            kind=obj.get("kind", "main"),
            captions=dict(obj.get("captions") or {}),
            broader=obj.get("broader"),
            related=tuple(obj.get("related") or ()),
            scope_note=obj.get("scope_note"),
            including_note=obj.get("including_note"),
            application_note=obj.get("application_note"),
            examples=tuple(obj.get("examples") or ()),
            revision_history=obj.get("revision_history"),
            cancelled=obj.get("cancelled"),
            replaced_by=tuple(obj.get("replaced_by") or ()),
            last_revision=obj.get("last_revision"),
            legacy_ids=tuple(obj.get("legacy_ids") or ()),
            in_summary=bool(obj.get("in_summary", False)),
            in_abridged=bool(obj.get("in_abridged", False)),
        )

    def to_json(self) -> dict:
        return {
            "notation": self.notation,
            "kind": self.kind,
            "captions": dict(self.captions),
            "broader": self.broader,
            "related": list(self.related),
            "scope_note": self.scope_note,
            "including_note": self.including_note,
            "application_note": self.application_note,
            "examples": list(self.examples),
            "revision_history": self.revision_history,
            "introduced": self.introduced,
            "cancelled": self.cancelled,
            "replaced_by": list(self.replaced_by),
            "last_revision": self.last_revision,
            "legacy_ids": list(self.legacy_ids),
            "in_summary": self.in_summary,
            "in_abridged": self.in_abridged,
        }


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    notation: str
    cancelled_in: str
    replaced_by: str


@dataclass(frozen=True)
class Active:
    record: ClassRecord


@dataclass(frozen=True)
class Cancelled:
    record: ClassRecord
    chain: tuple[ChainStep, ...]
    terminal: Optional[ClassRecord]  # None is a dead end

    @property
    def dead_end(self) -> bool:
        return self.terminal is None


@dataclass(frozen=True)
class Unknown:
    notation: str


Resolution = Union[Active, Cancelled, Unknown]


@dataclass(frozen=True)
class Changes:
    introduced: list[str]
    cancelled: list[tuple[str, tuple[str, ...]]]


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------

_TRUNCATABLE = re.compile(r"(\(=?|=|-0[2-5]|)([0-9][0-9.]*)[A-Za-z0-9]*(\)?)")


class ClassStore:
    """Immutable set of class records over a version catalog."""

    def __init__(self, records: Iterable[ClassRecord], catalog: VersionCatalog):
        self.catalog = catalog
        self.records: tuple[ClassRecord, ...] = tuple(records)
        by_notation: dict[str, list[ClassRecord]] = {}
        for rec in self.records:
            by_notation.setdefault(rec.notation, []).append(rec)
        for recs in by_notation.values():
            recs.sort(key=lambda r: catalog.rank(r.introduced))
        self._by_notation = {k: tuple(v) for k, v in by_notation.items()}

        narrower: dict[str, list[ClassRecord]] = {}
        for rec in self.records:
            if rec.broader is not None and rec.is_active:
                narrower.setdefault(rec.broader, []).append(rec)
        self._narrower = {k: tuple(v) for k, v in narrower.items()}

        self._legacy: dict[str, ClassRecord] = {}
        for rec in self.records:
            for legacy_id in rec.legacy_ids:
                self._legacy[legacy_id] = rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ClassRecord]:
        return iter(self.records)

    def versions_of(self, notation: str) -> tuple[ClassRecord, ...]:
        return self._by_notation.get(notation, ())

    def current(self, notation: str) -> Optional[ClassRecord]:
        """The active record for ``notation``, else its most recent one."""
        recs = self._by_notation.get(notation)
        if not recs:
            return None
        for rec in recs:
            if rec.is_active:
                return rec
        return recs[-1]

    def record_at(self, notation: str, version: str) -> Optional[ClassRecord]:
        for rec in self._by_notation.get(notation, ()):
            if rec.introduced == version:
                return rec
        return None

    def narrower(self, record: ClassRecord) -> tuple[ClassRecord, ...]:
        return self._narrower.get(record.notation, ())

    def by_legacy_id(self, legacy_id: str) -> Optional[ClassRecord]:
        return self._legacy.get(legacy_id)

    def lookup(self, tier: Tier, notation: str) -> Optional[ClassRecord]:
        rec = self.current(notation)
        if rec is None or not rec.visible_at(tier):
            return None
        return rec

    def resolve(self, notation: str) -> Resolution:
        start = self.current(notation)
        if start is None:
            return Unknown(notation)
        if start.is_active:
            return Active(start)
        chain: list[ChainStep] = []
        seen = [notation]
        rec: Optional[ClassRecord] = start
        while rec is not None and not rec.is_active:
            if not rec.replaced_by:
                rec = None
                break
            target = rec.replaced_by[0]
            chain.append(ChainStep(rec.notation, rec.cancelled, target))
            if target in seen:
                raise CycleError(seen + [target])
            seen.append(target)
            rec = self.current(target)
        return Cancelled(start, tuple(chain), rec)

    def fallback_ancestor(self, notation: str, tier: Tier) -> Optional[ClassRecord]:
        """First record on the broader chain (starting at ``notation``) that is
        visible at ``tier``."""
        rec = self.current(notation)
        seen: list[str] = []
        while rec is not None:
            if rec.visible_at(tier):
                return rec
            seen.append(rec.notation)
            if rec.broader is None:
                return None
            if rec.broader in seen:
                raise CycleError(seen + [rec.broader])
            rec = self.current(rec.broader)
        return None

    def list_changes(self, start: str, end: str) -> Changes:
        lo, hi = self.catalog.rank(start), self.catalog.rank(end)
        if lo >= hi:
            raise OrderError(f"{start} does not precede {end}")

        def within(label: Optional[str]) -> bool:
            return label is not None and lo < self.catalog.rank(label) <= hi

        return Changes(
            introduced=[r.notation for r in self.records if within(r.introduced)],
            cancelled=[(r.notation, r.replaced_by) for r in self.records if within(r.cancelled)],
        )

    def nearest(self, notation: str) -> Optional[tuple[ClassRecord, str]]:
        """Record for ``notation`` or, failing that, for the closest broader
        notation obtained by dropping alphabetical extensions and trailing
        digits. Returns ``(record, matched_notation)``."""
        rec = self.current(notation)
        if rec is not None:
            return rec, notation
        for candidate in _truncations(notation):
            rec = self.current(candidate)
            if rec is not None:
                return rec, candidate
        return None


def _truncations(notation: str) -> Iterator[str]:
    m = _TRUNCATABLE.fullmatch(notation)
    if m is None:
        return
    prefix, digits, suffix = m.groups()
    if (prefix.startswith("(")) != (suffix == ")"):
        return
    while digits:
        candidate = prefix + digits.rstrip(".") + suffix
        if candidate != notation:
            yield candidate
        digits = digits.rstrip(".")[:-1]


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

_KIND_VALUES = {"main", "language", "form", "place", "ethnic", "time", "properties",
                "materials", "processes", "persons", COMBINED}
_LEGACY_ID = re.compile(r"[0-9]{6}")


def _check_record(obj: object, line: int, catalog: VersionCatalog) -> ClassRecord:
    if not isinstance(obj, dict):
        raise IngestError(line, None, "record must be a JSON object")
    for key in obj:
        if key not in RECORD_FIELDS:
            raise IngestError(line, key, "unknown field")
    for key in ("notation", "introduced"):
        if not isinstance(obj.get(key), str):
            raise IngestError(line, key, "required text field missing")

    try:
        tree = parse(obj["notation"])
    except NotationError as exc:
        raise IngestError(line, "notation", str(exc)) from None
    kind = obj.get("kind", "main")
    if kind not in _KIND_VALUES:
        raise IngestError(line, "kind", f"unknown kind {kind!r}")
    expected = classify(tree.raw).value if isinstance(tree, Element) else COMBINED
    if kind != expected:
        raise IngestError(line, "kind", f"notation parses as {expected!r}, not {kind!r}")

    captions = obj.get("captions", {})
    if not isinstance(captions, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in captions.items()
    ):
        raise IngestError(line, "captions", "must map language tags to text")
    for key in ("broader", "scope_note", "including_note", "application_note", "revision_history"):
        if obj.get(key) is not None and not isinstance(obj[key], str):
            raise IngestError(line, key, "must be text or null")
    for key in ("related", "examples", "replaced_by", "legacy_ids"):
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise IngestError(line, key, "must be a list of text")
    for key in ("in_summary", "in_abridged"):
        if not isinstance(obj.get(key, False), bool):
            raise IngestError(line, key, "must be a boolean")

    for key in ("introduced", "cancelled", "last_revision"):
        value = obj.get(key)
        if value is not None and value not in catalog:
            raise IngestError(line, key, f"unknown version {value!r}")
    if obj.get("cancelled") is not None and catalog.rank(obj["cancelled"]) < catalog.rank(obj["introduced"]):
        raise IngestError(line, "cancelled", "cancelled before it was introduced")
    if obj.get("replaced_by") and obj.get("cancelled") is None:
        raise IngestError(line, "replaced_by", "replacement given for an active class")
    for legacy_id in obj.get("legacy_ids", []):
        if not _LEGACY_ID.fullmatch(legacy_id):
            raise IngestError(line, "legacy_ids", f"malformed identifier {legacy_id!r}")
    if obj.get("in_summary") and not obj.get("in_abridged"):
        raise IngestError(line, "in_abridged", "summary classes must also be in the abridged set")
    return ClassRecord.from_json(obj)


def build_store(lines: Iterable[str], catalog: VersionCatalog) -> ClassStore:
    """Validate and load records from an iterable of JSONL lines.

    Blank lines and lines starting with ``#`` are skipped.
    """
    records: list[tuple[int, ClassRecord]] = []
    seen: set[tuple[str, str]] = set()
    active: set[str] = set()
    legacy: set[str] = set()
    for lineno, text in enumerate(lines, start=1):
        text = text.strip()
        if not text or text.startswith("#"):
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(lineno, None, f"invalid JSON: {exc.msg}") from None
        rec = _check_record(obj, lineno, catalog)
        key = (rec.notation, rec.introduced)
        if key in seen:
            raise IngestError(lineno, "introduced", f"duplicate record {rec.notation} {rec.introduced}")
        seen.add(key)
        if rec.is_active:
            if rec.notation in active:
                raise IngestError(lineno, "cancelled", f"second active record for {rec.notation}")
            active.add(rec.notation)
        for legacy_id in rec.legacy_ids:
            if legacy_id in legacy:
                raise IngestError(lineno, "legacy_ids", f"identifier {legacy_id} already assigned")
            legacy.add(legacy_id)
        records.append((lineno, rec))

    known = {rec.notation for _, rec in records}
    for lineno, rec in records:
        refs = [("broader", rec.broader)] if rec.broader else []
        refs += [("related", n) for n in rec.related]
        refs += [("replaced_by", n) for n in rec.replaced_by]
        for key, target in refs:
            if target not in known:
                raise IngestError(lineno, key, f"dangling reference to {target}")
    return ClassStore((rec for _, rec in records), catalog)


def ingest(records_path: Union[str, Path, Iterable[Union[str, Path]]],
           catalog: Union[str, Path, VersionCatalog]) -> ClassStore:
    """Load one or more JSONL record files against a version catalog."""
    if not isinstance(catalog, VersionCatalog):
        catalog = load_catalog(catalog)
    paths = [records_path] if isinstance(records_path, (str, Path)) else list(records_path)
    lines: list[str] = []
    for path in paths:
        with open(path, encoding="utf-8") as fp:
            lines.extend(fp.read().splitlines())
    return build_store(lines, catalog)
