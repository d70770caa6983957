import json
import threading
import urllib.request
from urllib.error import HTTPError

import pytest

from conftest import ABRIDGED_TOKEN, MRF_TOKEN
from udcld.service import (
    AuthConfig,
    AuthError,
    ConfigError,
    LookupService,
    authenticate,
    load_config,
    make_server,
    negotiate,
)
from udcld.store import Tier
from udcld.uri import UriStyle, parse_class_uri

MRF = {"Authorization": f"Bearer {MRF_TOKEN}"}


def get(service, path, **headers):
    return service.handle("GET", path, headers)


def test_authenticate():
    auth = AuthConfig({MRF_TOKEN: Tier.MRF})
    assert authenticate({}, auth) is Tier.SUMMARY
    assert authenticate(MRF, auth) is Tier.MRF
    for bad in ("Bearer nope", "Basic abc", "Bearer", f"Bearer {MRF_TOKEN} "):
        with pytest.raises(AuthError):
            authenticate({"authorization": bad}, auth)


def test_summary_token_rejected():
    with pytest.raises(ConfigError):
        AuthConfig({"x": Tier.SUMMARY})


def test_parse_history_of_netherlands(service):
    r = get(service, "/udcsummary/api/parse/94%28492%29")
    assert r.status == 200 and r.headers["Vary"] == "Accept"
    els = r.json()["elements"]
    assert [(e["notation"], e["caption"]) for e in els] == [("94", "General History"), ("(492)", "Netherlands")]
    assert all(e["uri"] for e in els)


def test_parse_cancelled(service):
    r = get(service, "/udcsummary/api/parse/582.281.1%28035%29")
    first = r.json()["elements"][0]
    assert (r.status, first["status"], first["replaced_by"]) == (200, "cancelled", ["582.244"])


def test_parse_error_position(service):
    r = get(service, "/udcsummary/api/parse/%28")
    assert r.status == 400 and r.json()["position"] == 0


def test_bad_token_is_401_without_fallback(service):
    r = get(service, "/mrf/api/parse/512.742", Authorization="Bearer garbage")
    assert r.status == 401 and "fallback" not in r.json()


def test_forbidden_with_fallback(service):
    r = get(service, "/mrf/api/parse/512.742")
    body = r.json()
    assert r.status == 403
    assert body["fallback"]["notation"] == "512.7"
    parse_class_uri(body["fallback"]["uri"])


def test_abridged_token_cannot_read_mrf(service):
    r = get(service, "/mrf/mrf92/512.742", Authorization=f"Bearer {ABRIDGED_TOKEN}")
    assert r.status == 403
    assert get(service, "/abridged/mrf98/582.244", Authorization=f"Bearer {ABRIDGED_TOKEN}").status == 200


def test_token_grants_mrf(service):
    r = service.handle("GET", "/mrf/api/parse/512.742", MRF)
    assert r.status == 200
    assert r.json()["elements"][0]["uri"] == "http://mrf.udcdata.info/mrf92/512.742"


def test_record_turtle(service):
    r = get(service, "/udcsummary/mrf93/_or_492_cr_", Accept="text/turtle")
    assert r.status == 200 and r.headers["Content-Type"].startswith("text/turtle")
    assert '"Netherlands"@en' in r.text


def test_record_version_must_match(service):
    assert get(service, "/udcsummary/mrf94/94").status == 200
    assert get(service, "/udcsummary/mrf93/94").status == 404
    assert get(service, "/udcsummary/mrf00/94").status == 404
    assert get(service, "/udcsummary/mrf92/9~4").status == 400


def test_restricted_record_not_found_in_open_set(service):
    assert get(service, "/udcsummary/mrf92/512.742").status == 404


def test_legacy(service, catalog):
    r = get(service, "/legacy/018809")
    assert r.status == 301
    assert r.headers["Location"] == "http://udcsummary.udcdata.info/mrf92/311"
    parse_class_uri(r.headers["Location"], catalog)
    assert get(service, "/legacy/000000").status == 404


def test_unknown_routes(service):
    for path in ("/", "/nope/api/parse/94", "/udcsummary/api/parse", "/udcsummary/a/b/c/d"):
        assert get(service, path).status == 404


@pytest.mark.parametrize("query, accept, fmt", [
    ({"format": ["ttl"]}, "text/html", "ttl"),
    ({}, "text/html,application/xhtml+xml;q=0.9", "html"),
    ({}, "application/json;q=0.5, text/turtle", "ttl"),
    ({}, "image/png", "json"),
    ({}, "text/turtle;q=0", "json"),
    ({"format": ["xml"]}, None, "json"),
])
def test_negotiation(query, accept, fmt):
    headers = {"Accept": accept} if accept else {}
    assert negotiate(query, headers) == fmt


def test_every_format_served(service):
    for fmt, ctype in (("html", "text/html"), ("json", "application/json"), ("ttl", "text/turtle")):
        for path in ("/udcsummary/api/parse/94%28492%29", "/udcsummary/mrf92/311"):
            r = get(service, f"{path}?format={fmt}")
            assert r.status == 200 and r.headers["Content-Type"].startswith(ctype)


def test_replay_is_byte_identical(service):
    a = get(service, "/udcsummary/api/parse/94%28492%29%3A94%28729.885%29", Accept="text/turtle")
    b = get(service, "/udcsummary/api/parse/94%28492%29%3A94%28729.885%29", Accept="text/turtle")
    assert a.body == b.body


def test_tier_confinement_scan(service, store):
    hidden = [r for r in store if not r.visible_at(Tier.SUMMARY)]
    secrets = {c.encode() for r in hidden for c in r.captions.values()}
    secrets |= {f"mrf.udcdata.info".encode(), b"abridged.udcdata.info"}
    paths = []
    for r in store:
        enc = urllib.request.quote(r.notation, safe="")
        paths += [f"/udcsummary/api/parse/{enc}", f"/mrf/api/parse/{enc}", f"/abridged/api/parse/{enc}"]
        paths += [f"/mrf/{r.introduced}/{enc}", f"/udcsummary/{r.introduced}/{enc}"]
    for path in paths:
        for fmt in ("json", "html", "ttl"):
            body = get(service, f"{path}?format={fmt}").body
            for secret in secrets:
                assert secret not in body, (path, secret)


def test_emitted_uris_parse(service, store, catalog):
    import re
    for r in store:
        body = get(service, "/udcsummary/api/parse/" + urllib.request.quote(r.notation, safe="")).text
        for uri in re.findall(r'"(http://[^"]+)"', body):
            parse_class_uri(uri, catalog)


def test_host_routing(store):
    svc = LookupService(store, AuthConfig(), UriStyle("udcdata.info"), host_routing=True)
    r = svc.handle("GET", "/mrf93/_or_492_cr_", {"Host": "udcsummary.udcdata.info"})
    assert r.status == 200
    r = svc.handle("GET", "/018809", {"Host": "udcdata.info"})
    assert r.status == 301


def test_config_file(tmp_path):
    cfg_path = tmp_path / "udc.json"
    cfg_path.write_text(json.dumps({
        "base_domain": "localhost:9000",
        "listen_address": "127.0.0.1:0",
        "dataset_files": [str(__import__("conftest").RECORDS)],
        "version_catalog": str(__import__("conftest").VERSIONS),
        "tokens": {"t1": "mrf"},
    }))
    cfg = load_config(cfg_path)
    assert cfg.listen() == ("127.0.0.1", 0)
    assert cfg.uri_style.path_mode
    svc = LookupService.from_config(cfg)
    r = svc.handle("GET", "/legacy/018809")
    assert r.headers["Location"] == "http://localhost:9000/udcsummary/mrf92/311"
    parse_class_uri(r.headers["Location"])

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dataset_files": [], "version_catalog": "x", "tokens": {"t": "summary"}}))
    with pytest.raises(ConfigError):
        load_config(bad)


def test_over_http(service):
    server = make_server(service, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_port}"
    try:
        with urllib.request.urlopen(base + "/udcsummary/api/parse/94%28492%29") as resp:
            assert json.load(resp)["elements"][1]["caption"] == "Netherlands"
        with pytest.raises(HTTPError) as info:
            urllib.request.urlopen(base + "/mrf/api/parse/512.742")
        assert info.value.code == 403
    finally:
        server.shutdown()
        server.server_close()
