from pathlib import Path

import pytest

from udcld.service import AuthConfig, LookupService
from udcld.store import Tier, ingest, load_catalog
from udcld.uri import UriStyle

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "sample"
RECORDS = SAMPLE / "udc-sample.jsonl"
VERSIONS = SAMPLE / "versions.json"
GOLDEN = Path(__file__).parent / "golden"

MRF_TOKEN = "mrf-secret-token"
ABRIDGED_TOKEN = "abridged-token"


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(VERSIONS)


@pytest.fixture(scope="session")
def store(catalog):
    return ingest(RECORDS, catalog)


@pytest.fixture(scope="session")
def style():
    return UriStyle()


@pytest.fixture(scope="session")
def service(store, style):
    auth = AuthConfig({MRF_TOKEN: Tier.MRF, ABRIDGED_TOKEN: Tier.ABRIDGED})
    return LookupService(store, auth, style)
