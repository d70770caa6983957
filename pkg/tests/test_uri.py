import re

import pytest
from hypothesis import given, settings

from strategies import notations
from udcld.notation import LexError
from udcld.store import Tier
from udcld.uri import (
    DecodeError,
    UriError,
    UriParts,
    UriStyle,
    decode_notation,
    encode_notation,
    legacy_lookup,
    mint_class_uri,
    parse_class_uri,
)


def test_encode_place():
    assert encode_notation("(492)") == "_or_492_cr_"


def test_mint_summary_uri():
    parts = UriParts.for_notation(Tier.SUMMARY, "mrf93", "(492)")
    assert mint_class_uri(parts) == "http://udcsummary.udcdata.info/mrf93/_or_492_cr_"


def test_other_datasets_and_path_mode():
    parts = UriParts.for_notation(Tier.MRF, "mrf94", "94")
    assert mint_class_uri(parts) == "http://mrf.udcdata.info/mrf94/94"
    local = UriParts.for_notation(Tier.ABRIDGED, "mrf98", "582.244", base_domain="localhost:8080",
                                  path_mode=True)
    assert mint_class_uri(local) == "http://localhost:8080/abridged/mrf98/582.244"
    assert parse_class_uri(mint_class_uri(local)) == local


@pytest.mark.parametrize("raw, encoded", [
    ('94(492)"19"', "94_or_492_cr__q_19_q_"),
    ("=111", "_eq_111"),
    ("94(492):94(729.885)", "94_or_492_cr__co_94_or_729.885_cr_"),
    ("[311+51]/512", "_ob_311_pl_51_cb__sl_512"),
    ("821.111'06", "821.111_ap_06"),
    ("621*ABC", "621_as_ABC"),
    ("-032", "-032"),
])
def test_escape_table(raw, encoded):
    assert encode_notation(raw) == encoded


def test_encode_rejects_foreign_glyph():
    with pytest.raises(LexError):
        encode_notation("94 (492)")


@pytest.mark.parametrize("segment, position", [
    ("_or", 0),
    ("94_xx_", 2),
    ("94%28", 2),
    ("9~4", 1),
])
def test_decode_errors(segment, position):
    with pytest.raises(DecodeError) as info:
        decode_notation(segment)
    assert info.value.position == position


def test_parse_class_uri():
    parts = parse_class_uri("http://udcsummary.udcdata.info/mrf93/_or_492_cr_")
    assert (parts.dataset, parts.version, parts.notation) == (Tier.SUMMARY, "mrf93", "(492)")


@pytest.mark.parametrize("uri", [
    "http://udcdata.info/018809",
    "ftp://udcsummary.udcdata.info/mrf93/311",
    "http://udcsummary.udcdata.info/v93/311",
    "http://udcsummary.udcdata.info/mrf93/_or_492",
    "http://udcsummary.udcdata.info/mrf93/311/extra",
    "http://example.org/nothing/mrf93/311",
])
def test_parse_class_uri_rejects(uri):
    with pytest.raises(UriError):
        parse_class_uri(uri)


def test_parse_class_uri_checks_catalog(catalog):
    with pytest.raises(UriError):
        parse_class_uri("http://mrf.udcdata.info/mrf00/311", catalog)


def test_legacy_lookup(store):
    assert legacy_lookup(store, "018809") == "http://udcsummary.udcdata.info/mrf92/311"
    assert legacy_lookup(store, "000000") is None


def test_legacy_targets_parse(store, catalog):
    for rec in store:
        for legacy_id in rec.legacy_ids:
            parts = parse_class_uri(legacy_lookup(store, legacy_id), catalog)
            assert parts.notation == rec.notation


SAFE = re.compile(r"[A-Za-z0-9._\-]*")


@settings(max_examples=1000, deadline=None)
@given(notations)
def test_decode_inverts_encode(case):
    text, _ = case
    encoded = encode_notation(text)
    assert SAFE.fullmatch(encoded)
    assert decode_notation(encoded) == text
    style = UriStyle()
    uri = mint_class_uri(UriParts(Tier.ABRIDGED, "mrf01", encoded, style.base_domain))
    assert parse_class_uri(uri).notation == text
