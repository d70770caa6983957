"""Minting and parsing of class URIs.

    http://udcsummary.udcdata.info/mrf93/_or_492_cr_

Notation glyphs that are not URI-safe are written as ``_xx_`` mnemonics
instead of percent escapes. Digits, letters, ``.`` and ``-`` pass through.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional
from urllib.parse import quote, urlsplit

from .notation import parse, tokenize
from .store import ClassRecord, ClassStore, Tier, VersionCatalog

__all__ = [
    "ESCAPES",
    "DEFAULT_BASE_DOMAIN",
    "UriParts",
    "UriError",
    "DecodeError",
    "encode_notation",
    "decode_notation",
    "mint_class_uri",
    "parse_class_uri",
    "UriStyle",
    "legacy_lookup",
]

DEFAULT_BASE_DOMAIN = "udcdata.info"

ESCAPES = {
    "(": "_or_",
    ")": "_cr_",
    '"': "_q_",
    "=": "_eq_",
    "+": "_pl_",
    ":": "_co_",
    "/": "_sl_",
    "*": "_as_",
    "`": "_ap_",
    "[": "_ob_",
    "]": "_cb_",
}
_UNESCAPES = {v[1:-1]: k for k, v in ESCAPES.items()}
_PASSTHROUGH = re.compile(r"[A-Za-z0-9.\-]")


class UriError(ValueError):
    pass


class DecodeError(UriError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def encode_notation(raw: str) -> str:
    """``(492)`` -> ``_or_492_cr_``. Apostrophes are written as backticks."""
    tokenize(raw)
    out = []
    for c in raw:
        if c == "'":
            c = "`"
        out.append(ESCAPES.get(c, c))
    return "".join(out)


def decode_notation(encoded: str) -> str:
    out = []
    i = 0
    while i < len(encoded):
        c = encoded[i]
        if c == "_":
            end = encoded.find("_", i + 1)
            if end < 0:
                raise DecodeError("unterminated escape", i)
            name = encoded[i + 1:end]
            if name not in _UNESCAPES:
                raise DecodeError(f"unknown escape _{name}_", i)
            out.append(_UNESCAPES[name])
            i = end + 1
        elif _PASSTHROUGH.match(c):
            out.append(c)
            i += 1
        else:
            raise DecodeError(f"character {c!r} not allowed", i)
    return "".join(out)


@dataclass(frozen=True)
class UriParts:
    dataset: Tier
    version: str
    encoded_notation: str
    base_domain: str = DEFAULT_BASE_DOMAIN
    path_mode: bool = False

    @classmethod
    def for_notation(cls, dataset: Tier, version: str, notation: str, **kw) -> "UriParts":
        return cls(dataset, version, encode_notation(notation), **kw)

    @property
    def notation(self) -> str:
        return decode_notation(self.encoded_notation)


def mint_class_uri(parts: UriParts, scheme: str = "http") -> str:
    """Host mode puts the dataset in a subdomain; path mode (for local
    deployments) puts it in the first path segment."""
    if parts.path_mode:
        return f"{scheme}://{parts.base_domain}/{parts.dataset.subdomain}/{parts.version}/{parts.encoded_notation}"
    return f"{scheme}://{parts.dataset.subdomain}.{parts.base_domain}/{parts.version}/{parts.encoded_notation}"


def parse_class_uri(uri: str, catalog: Optional[VersionCatalog] = None) -> UriParts:
    split = urlsplit(uri)
    if split.scheme not in ("http", "https"):
        raise UriError(f"unsupported scheme in {uri!r}")
    host = split.netloc
    segments = split.path.split("/")[1:]

    dataset = None
    sub, _, rest = host.partition(".")
    if rest:
        try:
            dataset = Tier.from_name(sub)
        except ValueError:
            dataset = None
        if dataset is not None and sub != dataset.subdomain:
            dataset = None
    if dataset is not None:
        base, path_mode = rest, False
    else:
        if not segments or not segments[0]:
            raise UriError(f"no dataset in {uri!r}")
        try:
            dataset = Tier.from_name(segments[0])
        except ValueError:
            raise UriError(f"unknown dataset in {uri!r}") from None
        if segments[0] != dataset.subdomain:
            raise UriError(f"unknown dataset in {uri!r}")
        base, path_mode = host, True
        segments = segments[1:]

    if len(segments) != 2 or not all(segments):
        raise UriError(f"expected /version/notation in {uri!r}")
    version, encoded = segments
    if not re.fullmatch(r"mrf[0-9]{2}", version) or (catalog is not None and version not in catalog):
        raise UriError(f"unknown version {version!r}")
    try:
        notation = decode_notation(encoded)
        parse(notation)
    except ValueError as exc:
        raise UriError(f"undecodable notation segment {encoded!r}: {exc}") from None
    return UriParts(dataset, version, encoded, base, path_mode)


@dataclass(frozen=True)
class UriStyle:
    """How class URIs are minted for one deployment."""

    base_domain: str = DEFAULT_BASE_DOMAIN
    path_mode: bool = False
    scheme: str = "http"

    def class_uri(self, record: ClassRecord, dataset: Tier) -> str:
        """URI of ``record`` in ``dataset``; the version segment is always the
        record's introduction version."""
        parts = UriParts.for_notation(dataset, record.introduced, record.notation,
                                      base_domain=self.base_domain, path_mode=self.path_mode)
        return mint_class_uri(parts, self.scheme)

    def dataset_root(self, dataset: Tier) -> str:
        if self.path_mode:
            return f"{self.scheme}://{self.base_domain}/{dataset.subdomain}/"
        return f"{self.scheme}://{dataset.subdomain}.{self.base_domain}/"

    def scheme_iri(self, dataset: Tier) -> str:
        return self.dataset_root(dataset) + "scheme"

    def parse_api(self, dataset: Tier, notation: str) -> str:
        return self.dataset_root(dataset) + "api/parse/" + quote(notation, safe="")


def legacy_lookup(store: ClassStore, legacy_id: str, style: UriStyle = UriStyle()) -> Optional[str]:
    """Map a 2011-2019 numeric identifier to the current URI of its class,
    in the most open dataset that holds it."""
    rec = store.by_legacy_id(legacy_id)
    if rec is None:
        return None
    return style.class_uri(rec, rec.lowest_tier)
