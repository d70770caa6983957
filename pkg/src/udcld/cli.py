"""``udcld`` command line tool.

Exit status: 0 on success, 1 for domain errors (bad notation, unknown class,
invalid dataset file), 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .notation import NotationError
from .rdf import dataset_graph, to_turtle
from .service import ConfigError, LookupService, ServiceConfig, load_config, make_server
from .store import Active, Cancelled, ClassStore, CycleError, IngestError, Tier, ingest
from .uri import UriError, decode_notation, encode_notation
from .views import ParseResult, interpret, to_html, to_json

_SAMPLE = Path(__file__).resolve().parents[2] / "sample"


class _Fail(Exception):
    def __init__(self, message: str, status: int = 1):
        super().__init__(message)
        self.status = status


def _config(args) -> ServiceConfig:
    path = args.config or os.environ.get("UDC_CONFIG")
    if path:
        try:
            cfg = load_config(path)
        except ConfigError as exc:
            raise _Fail(str(exc), 2) from None
    else:
        cfg = ServiceConfig(
            dataset_files=(_SAMPLE / "udc-sample.jsonl",),
            version_catalog=_SAMPLE / "versions.json",
            base_domain="udcdata.info",
            host_routing=True,
        )
    changes = {}
    if args.data:
        changes["dataset_files"] = tuple(Path(p) for p in args.data)
    if args.catalog:
        changes["version_catalog"] = Path(args.catalog)
    if args.base_domain:
        changes["base_domain"] = args.base_domain
    if changes:
        cfg = ServiceConfig(**{**cfg.__dict__, **changes})
    return cfg


def _store(cfg: ServiceConfig) -> ClassStore:
    try:
        return cfg.load_store()
    except (OSError, ValueError) as exc:
        raise _Fail(f"cannot load dataset: {exc}", 2) from None


def _table(result: ParseResult) -> str:
    header = ("Notation", "Caption", "Type", "Version", "Status")
    rows = [header]
    for el in result.elements:
        status = "" if el.is_connector else el.status
        if el.status == "cancelled" and el.replaced_by:
            status += " -> " + ", ".join(el.replaced_by)
        rows.append((el.notation, el.caption or "", el.label, el.version or "", status))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def cmd_parse(args, cfg: ServiceConfig) -> str:
    store = _store(cfg)
    try:
        result = interpret(store, args.notation, args.tier, cfg.uri_style, args.lang)
    except NotationError as exc:
        raise _Fail(f"parse error: {exc}") from None
    if args.format == "json":
        return to_json(result).rstrip("\n")
    if args.format == "ttl":
        return to_turtle(result.graph()).rstrip("\n")
    if args.format == "html":
        return to_html(result).rstrip("\n")
    return _table(result)


def describe_resolution(store: ClassStore, notation: str, tier: Tier, lang: str = "en") -> str:
    try:
        res = store.resolve(notation)
    except CycleError as exc:
        raise _Fail(str(exc)) from None
    if isinstance(res, Active):
        rec = res.record
        caption = rec.caption(lang) if rec.visible_at(tier) else None
        return f"active since {rec.introduced}" + (f" ({caption})" if caption else "")
    if not isinstance(res, Cancelled):
        raise _Fail(f"unknown notation {notation}")
    if not res.chain:
        return f"cancelled in {res.record.cancelled}; no replacement"
    parts = []
    for i, step in enumerate(res.chain):
        who = "" if i == 0 else f"{step.notation} "
        parts.append(f"{who}cancelled in {step.cancelled_in}; replaced by {step.replaced_by}")
    term = res.terminal
    if term is not None and term.visible_at(tier) and term.caption(lang):
        parts[-1] += f" ({term.caption(lang)})"
    elif term is None:
        parts.append(f"{res.chain[-1].replaced_by} cancelled in "
                     f"{store.current(res.chain[-1].replaced_by).cancelled}; no replacement")
    return "; ".join(parts)


def cmd_resolve(args, cfg: ServiceConfig) -> str:
    return describe_resolution(_store(cfg), args.notation, args.tier, args.lang)


def cmd_encode(args, cfg) -> str:
    try:
        return encode_notation(args.text)
    except NotationError as exc:
        raise _Fail(str(exc)) from None


def cmd_decode(args, cfg) -> str:
    try:
        return decode_notation(args.text)
    except UriError as exc:
        raise _Fail(str(exc)) from None


def cmd_ingest(args, cfg: ServiceConfig) -> str:
    try:
        store = ingest(args.files, cfg.version_catalog)
    except IngestError as exc:
        raise _Fail(str(exc)) from None
    except OSError as exc:
        raise _Fail(str(exc), 2) from None
    return f"{len(store)} records"


def cmd_dump(args, cfg: ServiceConfig) -> Optional[str]:
    text = to_turtle(dataset_graph(_store(cfg), args.dataset, cfg.uri_style))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return None
    return text.rstrip("\n")


def cmd_serve(args, cfg: ServiceConfig) -> None:
    service = LookupService(_store(cfg), cfg.auth, cfg.uri_style, cfg.host_routing)
    try:
        host, port = cfg.listen() if not args.listen else ServiceConfig(
            (), Path(), listen_address=args.listen).listen()
    except ConfigError as exc:
        raise _Fail(str(exc), 2) from None
    server = make_server(service, host, port)
    print(f"serving on http://{host}:{server.server_port}/", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def _tier(name: str) -> Tier:
    try:
        return Tier.from_name(name)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown tier {name!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="udcld", description="UDC notation and linked data tools")
    p.add_argument("--config", help="service config JSON (default: $UDC_CONFIG)")
    p.add_argument("--data", action="append", metavar="FILE", help="JSONL record file (repeatable)")
    p.add_argument("--catalog", metavar="FILE", help="version catalog JSON")
    p.add_argument("--base-domain", help="base domain for minted URIs")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def tiered(sp):
        sp.add_argument("--tier", type=_tier, default=Tier.SUMMARY,
                        help="access tier to simulate: summary, abridged or mrf")
        sp.add_argument("--lang", default="en")
        return sp

    sp = tiered(sub.add_parser("parse", help="decompose a notation into its elements"))
    sp.add_argument("notation")
    sp.add_argument("--format", choices=("table", "json", "ttl", "html"), default="table")
    sp.set_defaults(func=cmd_parse)

    sp = tiered(sub.add_parser("resolve", help="lifecycle status and replacement chain"))
    sp.add_argument("notation")
    sp.set_defaults(func=cmd_resolve)

    for name, func in (("encode", cmd_encode), ("decode", cmd_decode)):
        sp = sub.add_parser(name, help=f"{name} a notation URI segment")
        sp.add_argument("text")
        sp.set_defaults(func=func, standalone=True)

    sp = sub.add_parser("ingest", help="validate record files and count records")
    sp.add_argument("files", nargs="+")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("dump", help="Turtle dump of every record visible in a dataset")
    sp.add_argument("--dataset", type=_tier, required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_dump)

    sp = sub.add_parser("serve", help="run the HTTP look-up service")
    sp.add_argument("--listen", help="host:port, overrides the config")
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = None if getattr(args, "standalone", False) else _config(args)
        out = args.func(args, cfg)
    except _Fail as exc:
        print(f"udcld: {exc}", file=sys.stderr)
        return exc.status
    if out is not None:
        sys.stdout.write(out + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
