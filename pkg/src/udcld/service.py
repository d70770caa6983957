"""HTTP look-up service: token tiers, the parse API, class records and
legacy redirects.

Routes (path mode; host mode maps ``{sub}.{base_domain}`` onto the first
segment)::

    GET /{dataset}/api/parse/{percent-encoded notation}
    GET /{dataset}/{version}/{encoded notation}
    GET /legacy/{id}

``LookupService.handle`` is a plain function of the request, so it can be
exercised without a socket; ``make_server`` wraps it in a threading HTTP
server.
"""

from __future__ import annotations

import hmac
import json
import logging
import os
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Mapping, Optional, Union
from urllib.parse import parse_qs, unquote, urlsplit

from .notation import ElementKind, NotationError, leaves, parse
from .rdf import graph_json, record_graph, to_turtle
from .store import ClassRecord, ClassStore, Tier, ingest
from .uri import UriError, UriStyle, decode_notation, legacy_lookup
from .views import interpret, record_html, to_html, to_json

__all__ = [
    "AuthConfig",
    "AuthError",
    "ServiceConfig",
    "ConfigError",
    "Response",
    "LookupService",
    "authenticate",
    "load_config",
    "make_server",
]

log = logging.getLogger(__name__)

MEDIA_TYPES = {
    "html": "text/html; charset=utf-8",
    "json": "application/json; charset=utf-8",
    "ttl": "text/turtle; charset=utf-8",
}
_ACCEPT = {"text/html": "html", "application/json": "json", "text/turtle": "ttl",
           "application/x-turtle": "ttl"}


class ConfigError(ValueError):
    pass


class AuthError(Exception):
    pass


@dataclass(frozen=True)
class AuthConfig:
    tokens: Mapping[str, Tier] = field(default_factory=dict)

    def __post_init__(self):
        for tier in self.tokens.values():
            if tier is Tier.SUMMARY:
                raise ConfigError("the summary dataset is open; tokens must grant abridged or mrf")


def authenticate(headers: Mapping[str, str], auth: AuthConfig) -> Tier:
    """Tier granted by the request's bearer token; no token means Summary."""
    value = _header(headers, "authorization")
    if value is None:
        return Tier.SUMMARY
    scheme, _, token = value.partition(" ")
    if scheme.lower() != "bearer" or not token:
        raise AuthError("malformed Authorization header")
    granted = None
    for known, tier in auth.tokens.items():
        if hmac.compare_digest(known.encode("utf-8"), token.encode("utf-8")):
            granted = tier
    if granted is None:
        raise AuthError("unknown token")
    return granted


def _header(headers: Mapping[str, str], name: str) -> Optional[str]:
    for key, value in headers.items():
        if key.lower() == name:
            return value
    return None


@dataclass(frozen=True)
class ServiceConfig:
    dataset_files: tuple[Path, ...]
    version_catalog: Path
    base_domain: str = "localhost:8080"
    listen_address: str = "127.0.0.1:8080"
    tokens: Mapping[str, Tier] = field(default_factory=dict)
    host_routing: bool = False
    scheme: str = "http"

    def __post_init__(self):
        AuthConfig(dict(self.tokens))

    @property
    def uri_style(self) -> UriStyle:
        return UriStyle(self.base_domain, path_mode=not self.host_routing, scheme=self.scheme)

    @property
    def auth(self) -> AuthConfig:
        return AuthConfig(dict(self.tokens))

    def listen(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        try:
            return host or "127.0.0.1", int(port)
        except ValueError:
            raise ConfigError(f"bad listen_address {self.listen_address!r}") from None

    def load_store(self) -> ClassStore:
        return ingest(self.dataset_files, self.version_catalog)


def load_config(path: Union[str, Path]) -> ServiceConfig:
    """Read the JSON service config. Relative file paths are resolved
    against the config file's directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    here = path.parent

    def resolve(p: str) -> Path:
        return Path(p) if os.path.isabs(p) else here / p

    try:
        files = data["dataset_files"]
        if isinstance(files, str):
            files = [files]
        tokens = {tok: Tier.from_name(name) for tok, name in data.get("tokens", {}).items()}
        return ServiceConfig(
            dataset_files=tuple(resolve(p) for p in files),
            version_catalog=resolve(data["version_catalog"]),
            base_domain=data.get("base_domain", "localhost:8080"),
            listen_address=data.get("listen_address", "127.0.0.1:8080"),
            tokens=tokens,
            host_routing=bool(data.get("host_routing", False)),
            scheme=data.get("scheme", "http"),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


@dataclass
class Response:
    status: int
    body: bytes = b""
    headers: dict = field(default_factory=dict)

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")

    def json(self):
        return json.loads(self.body)


def _error(status: int, code: str, message: str, fallback: Optional[dict] = None,
           **extra) -> Response:
    body = {"status": status, "code": code, "message": message}
    body.update(extra)
    if fallback is not None:
        body["fallback"] = fallback
    return Response(status, json.dumps(body, ensure_ascii=False, indent=2).encode("utf-8"),
                    {"Content-Type": MEDIA_TYPES["json"]})


def negotiate(query: Mapping[str, list], headers: Mapping[str, str]) -> str:
    """``format`` query parameter, then Accept, then JSON."""
    requested = (query.get("format") or [None])[0]
    if requested in MEDIA_TYPES:
        return requested
    accept = _header(headers, "accept")
    if not accept:
        return "json"
    ranges = []
    for i, item in enumerate(accept.split(",")):
        media, *params = [x.strip() for x in item.split(";")]
        q = 1.0
        for param in params:
            name, _, value = param.partition("=")
            if name.strip() == "q":
                try:
                    q = float(value)
                except ValueError:
                    q = 0.0
        ranges.append((-q, i, media.lower()))
    for neg_q, _, media in sorted(ranges):
        if neg_q >= 0:
            break
        if media in _ACCEPT:
            return _ACCEPT[media]
        if media in ("*/*", "application/*"):
            return "json"
    return "json"


class LookupService:
    def __init__(self, store: ClassStore, auth: AuthConfig = AuthConfig(),
                 style: UriStyle = UriStyle(),
                 host_routing: bool = False):
        self.store = store
        self.auth = auth
        self.style = style
        self.host_routing = host_routing

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "LookupService":
        return cls(config.load_store(), config.auth, config.uri_style, config.host_routing)

    def handle(self, method: str, target: str, headers: Mapping[str, str] = {}) -> Response:
        if method not in ("GET", "HEAD"):
            return _error(405, "method_not_allowed", f"{method} is not supported")
        split = urlsplit(target)
        segments = split.path.split("/")[1:]
        query = parse_qs(split.query)

        try:
            granted = authenticate(headers, self.auth)
        except AuthError as exc:
            resp = _error(401, "unauthorized", str(exc))
            resp.headers["WWW-Authenticate"] = 'Bearer realm="udc"'
            return resp

        if self.host_routing:
            host = (_header(headers, "host") or "").lower()
            sub, _, rest = host.partition(".")
            if rest == self.style.base_domain and sub in _DATASETS:
                segments = [sub, *segments]
            elif host == self.style.base_domain and len(segments) == 1 and segments[0].isdigit():
                segments = ["legacy", segments[0]]

        if len(segments) == 2 and segments[0] == "legacy":
            return self._legacy(segments[1])
        if not segments or segments[0] not in _DATASETS:
            return _error(404, "not_found", "no such route")
        dataset = _DATASETS[segments[0]]
        fmt = negotiate(query, headers)
        if len(segments) == 4 and segments[1:3] == ["api", "parse"]:
            resp = self._parse(dataset, granted, unquote(segments[3]), fmt)
        elif len(segments) == 3:
            resp = self._record(dataset, granted, segments[1], segments[2], fmt)
        else:
            return _error(404, "not_found", "no such route")
        resp.headers["Vary"] = "Accept"
        if method == "HEAD":
            resp.body = b""
        return resp

    # -- routes -------------------------------------------------------------

    def _forbidden(self, dataset: Tier, granted: Tier, fallback: Optional[ClassRecord]) -> Response:
        brief = None
        if fallback is not None:
            brief = {
                "notation": fallback.notation,
                "caption": fallback.caption(),
                "uri": self.style.class_uri(fallback, granted),
            }
        return _error(403, "forbidden",
                      f"the {dataset.value} dataset requires a licence token; "
                      f"this request is limited to {granted.value}", brief)

    def _fallback_for(self, notation: str, granted: Tier) -> Optional[ClassRecord]:
        try:
            tree = parse(notation)
        except NotationError:
            return None
        for leaf in leaves(tree):
            if leaf.kind is not ElementKind.MAIN and not leaf.kind.is_common_auxiliary:
                continue
            found = self.store.nearest(leaf.raw)
            if found is None:
                continue
            ancestor = self.store.fallback_ancestor(found[1], granted)
            if ancestor is not None:
                return ancestor
        return None

    def _parse(self, dataset: Tier, granted: Tier, notation: str, fmt: str) -> Response:
        if dataset.rank > granted.rank:
            return self._forbidden(dataset, granted, self._fallback_for(notation, granted))
        try:
            result = interpret(self.store, notation, dataset, self.style)
        except NotationError as exc:
            return _error(400, "parse_error", str(exc), position=exc.position,
                          expected=getattr(exc, "expected", "") or None)
        if fmt == "html":
            body = to_html(result)
        elif fmt == "ttl":
            body = to_turtle(result.graph())
        else:
            body = to_json(result)
        return Response(200, body.encode("utf-8"), {"Content-Type": MEDIA_TYPES[fmt]})

    def _record(self, dataset: Tier, granted: Tier, version: str, encoded: str, fmt: str) -> Response:
        try:
            notation = decode_notation(encoded)
        except UriError as exc:
            return _error(400, "bad_notation", str(exc))
        if dataset.rank > granted.rank:
            rec = self.store.record_at(notation, version)
            fallback = self.store.fallback_ancestor(rec.notation, granted) if rec else None
            return self._forbidden(dataset, granted, fallback)
        if version not in self.store.catalog:
            return _error(404, "not_found", f"unknown version {version}")
        rec = self.store.record_at(notation, version)
        if rec is None or not rec.visible_at(dataset):
            return _error(404, "not_found", f"no class {notation} introduced in {version} "
                                            f"in the {dataset.value} dataset")
        if fmt == "html":
            body = record_html(self.store, rec, dataset, self.style)
        else:
            graph = record_graph(self.store, rec, dataset, self.style)
            body = to_turtle(graph) if fmt == "ttl" else graph_json(graph)
        return Response(200, body.encode("utf-8"), {"Content-Type": MEDIA_TYPES[fmt]})

    def _legacy(self, legacy_id: str) -> Response:
        target = legacy_lookup(self.store, legacy_id, self.style)
        if target is None:
            return _error(404, "not_found", f"unknown legacy identifier {legacy_id}")
        return Response(301, f"Moved to {target}\n".encode("utf-8"),
                        {"Location": target, "Content-Type": "text/plain; charset=utf-8"})


_DATASETS = {tier.subdomain: tier for tier in Tier}


class _Handler(BaseHTTPRequestHandler):
    service: LookupService  # set on the subclass made by make_server
    protocol_version = "HTTP/1.1"

    def _dispatch(self, method: str) -> None:
        resp = self.service.handle(method, self.path, dict(self.headers.items()))
        self.send_response(resp.status, HTTPStatus(resp.status).phrase)
        for name, value in resp.headers.items():
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(resp.body)))
        self.end_headers()
        if method != "HEAD":
            self.wfile.write(resp.body)

    def do_GET(self):
        self._dispatch("GET")

    def do_HEAD(self):
        self._dispatch("HEAD")

    def log_message(self, format, *args):
        log.info("%s %s", self.address_string(), format % args)


def make_server(service: LookupService, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)
