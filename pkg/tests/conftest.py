from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SRC = REPO_ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from secmap import data as data_pkg  # noqa: E402
from secmap.model import Catalog  # noqa: E402
from secmap.oscal import load_document, parse_catalog, parse_profile  # noqa: E402
from secmap.profiles import Profile, ScenarioMap, scenario_from_document  # noqa: E402

DATA_DIR = Path(data_pkg.__file__).resolve().parent

SEED_CATALOG = DATA_DIR / "seed_catalog.json"
LOG4J_SCENARIO = DATA_DIR / "log4j_scenario.json"
LOG4J_PROFILE = DATA_DIR / "log4j_profile.json"
CORPUS_NOTES = DATA_DIR / "CORPUS_NOTES.md"

# Frozen digest of the reviewed seed corpus serialization.
GOLDEN_CORPUS_SHA256 = "7468045fb7ebefc4c1d814cd9073ccf52e851fe9bf8646fc744192f60b3a73e3"


@pytest.fixture(scope="session")
def corpus_bytes() -> bytes:
    return SEED_CATALOG.read_bytes()


@pytest.fixture(scope="session")
def corpus(corpus_bytes: bytes) -> Catalog:
    catalog, diagnostics = parse_catalog(load_document(SEED_CATALOG))
    assert catalog is not None and not diagnostics, diagnostics
    return catalog


@pytest.fixture(scope="session")
def corpus_doc(corpus_bytes: bytes) -> dict:
    """Raw document dict; tests use it for independent brute-force walks."""
    return json.loads(corpus_bytes.decode("utf-8"))


@pytest.fixture(scope="session")
def log4j_scenario() -> ScenarioMap:
    return scenario_from_document(json.loads(LOG4J_SCENARIO.read_text(encoding="utf-8")))


@pytest.fixture(scope="session")
def log4j_profile() -> Profile:
    profile, diagnostics = parse_profile(load_document(LOG4J_PROFILE))
    assert profile is not None and not diagnostics, diagnostics
    return profile
