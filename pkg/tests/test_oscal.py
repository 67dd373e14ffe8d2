from __future__ import annotations

import hashlib
import json
import random

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN_CORPUS_SHA256
from docgen import random_catalog_doc
from secmap.canonical import canonical_bytes
from secmap.model import Level, Phase, validate_catalog
from secmap.oscal import (
    DocumentFormat,
    RawDocument,
    Severity,
    load_document,
    parse_catalog,
    parse_profile,
    serialize_catalog,
)


def jdoc(document: dict, origin: str = "test.json") -> RawDocument:
    return RawDocument(canonical_bytes(document), DocumentFormat.JSON, origin)


def minimal_doc(**overrides) -> dict:
    body = {
        "uuid": "u-1",
        "metadata": {"title": "t", "version": "1", "last-modified": "2025-01-01T00:00:00Z"},
        "groups": [],
    }
    body.update(overrides)
    return {"catalog": body}


class TestParseCatalog:
    def test_goal_example(self):
        doc = minimal_doc(groups=[{"id": "SSS-01", "title": "Secure Software Environment",
                                   "description": "", "controls": []}])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert not diagnostics
        assert len(catalog.goals) == 1
        assert catalog.goals[0].id == "SSS-01"
        assert catalog.goals[0].title == "Secure Software Environment"

    def test_nested_control_example(self):
        doc = minimal_doc(groups=[{
            "id": "SSS-01", "title": "Secure Software Environment", "description": "",
            "controls": [{"id": "SSS-01-01", "title": "Environment segregation"}],
        }])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert not diagnostics
        control = catalog.goals[0].children[0]
        assert control.id == "SSS-01-01"
        assert control.title == "Environment segregation"
        assert control.level is Level.L1

    def test_operation_example(self):
        doc = minimal_doc(groups=[{
            "id": "SSS-01", "title": "g", "description": "",
            "controls": [{
                "id": "SSS-01-01", "title": "l1",
                "controls": [{
                    "id": "SSS-01-01-01", "title": "l2",
                    "controls": [{
                        "id": "SSS-01-01-01-01", "title": "l3",
                        "operations": [{
                            "id": "SSS-01-01-01-01-02",
                            "title": "Ensure Secret Isolation",
                            "description": "",
                            "props": [
                                {"name": "operation-agent", "value": "Security Teams"},
                                {"name": "operation-phase", "value": "Development"},
                            ],
                        }],
                    }],
                }],
            }],
        }])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert not diagnostics
        op = catalog.goals[0].children[0].children[0].children[0].operations[0]
        assert op.id == "SSS-01-01-01-01-02"
        assert op.title == "Ensure Secret Isolation"
        assert op.phase is Phase.DEVELOPMENT
        assert [a.name for a in op.agents] == ["Security Teams"]

    def test_unknown_top_level_key_warns(self):
        doc = minimal_doc()
        doc["vendor-extension"] = {}
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert catalog is not None
        assert [d for d in diagnostics if d.severity is Severity.WARNING]

    def test_missing_metadata_field_errors(self):
        doc = minimal_doc(metadata={"title": "t", "version": "1"})
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert catalog is None
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        assert errors and all(d.path for d in errors)

    def test_invalid_phase_prop_errors(self):
        doc = minimal_doc(groups=[{
            "id": "SSS-01", "title": "g", "description": "",
            "controls": [{
                "id": "SSS-01-01", "title": "l1",
                "controls": [{
                    "id": "SSS-01-01-01", "title": "l2",
                    "controls": [{
                        "id": "SSS-01-01-01-01", "title": "l3",
                        "operations": [{
                            "id": "SSS-01-01-01-01-01", "title": "op", "description": "",
                            "props": [
                                {"name": "operation-agent", "value": "Security Teams"},
                                {"name": "operation-phase", "value": "Runtime"},
                            ],
                        }],
                    }],
                }],
            }],
        }])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert catalog is None
        assert any("Runtime" in d.message for d in diagnostics
                   if d.severity is Severity.ERROR)

    def test_blank_agent_prop_errors(self):
        doc = minimal_doc(groups=[{
            "id": "SSS-01", "title": "g", "description": "",
            "controls": [{
                "id": "SSS-01-01", "title": "l1",
                "controls": [{
                    "id": "SSS-01-01-01", "title": "l2",
                    "controls": [{
                        "id": "SSS-01-01-01-01", "title": "l3",
                        "operations": [{
                            "id": "SSS-01-01-01-01-01", "title": "op", "description": "",
                            "props": [
                                {"name": "operation-agent", "value": "   "},
                                {"name": "operation-phase", "value": "development"},
                            ],
                        }],
                    }],
                }],
            }],
        }])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert catalog is None

    def test_structural_violation_surfaces_with_node_path(self):
        doc = minimal_doc(groups=[{
            "id": "SSS-01", "title": "g", "description": "",
            "controls": [{"id": "SSS-02-01", "title": "orphan"}],
        }])
        catalog, diagnostics = parse_catalog(jdoc(doc))
        assert catalog is None
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        assert any(d.path.startswith("/catalog/groups/0/controls/0") for d in errors)

    @pytest.mark.parametrize("payload", [
        b"{not json",
        b'{"catalog": 3}',
        b'{"nope": {}}',
        b'["array"]',
        b"\xff\xfe\x00bad",
        b'{"catalog": {"uuid": "u"}}',
    ])
    def test_no_diagnostic_free_failure(self, payload):
        catalog, diagnostics = parse_catalog(
            RawDocument(payload, DocumentFormat.JSON, "bad.json"))
        assert catalog is None
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        assert errors and all(d.path for d in errors)

    def test_corruption_fuzz_never_fails_silently(self):
        # Randomly damage generated documents; a rejected document must always
        # carry at least one error diagnostic with a non-empty path.
        rng = random.Random(0xF12)
        rejected = 0
        for _ in range(40):
            doc = random_catalog_doc(rng)
            _corrupt(doc, rng)
            catalog, diagnostics = parse_catalog(jdoc(doc))
            if catalog is None:
                rejected += 1
                errors = [d for d in diagnostics if d.severity is Severity.ERROR]
                assert errors and all(d.path for d in errors)
        assert rejected > 0, "fuzz should reject at least some documents"


class TestSerializeCatalog:
    def test_corpus_round_trip_identity(self, corpus, corpus_bytes):
        assert serialize_catalog(corpus) == corpus_bytes
        reparsed, diagnostics = parse_catalog(
            RawDocument(corpus_bytes, DocumentFormat.JSON))
        assert not diagnostics
        assert reparsed == corpus

    def test_serialization_is_deterministic(self, corpus):
        assert serialize_catalog(corpus) == serialize_catalog(corpus)

    def test_golden_digest(self, corpus):
        digest = hashlib.sha256(serialize_catalog(corpus)).hexdigest()
        assert digest == GOLDEN_CORPUS_SHA256

    def test_invalid_catalog_refused(self, corpus):
        from dataclasses import replace

        from secmap.model import InvalidCatalogError

        broken = replace(corpus, metadata=replace(corpus.metadata, last_modified="nope"))
        with pytest.raises(InvalidCatalogError):
            serialize_catalog(broken)

    def test_generated_round_trips(self):
        rng = random.Random(20250808)
        for _ in range(60):
            doc = random_catalog_doc(rng)
            first, diagnostics = parse_catalog(jdoc(doc))
            assert first is not None, diagnostics
            payload = serialize_catalog(first)
            second, diagnostics2 = parse_catalog(
                RawDocument(payload, DocumentFormat.JSON))
            assert not [d for d in diagnostics2 if d.severity is Severity.ERROR]
            assert second == first
            assert serialize_catalog(second) == payload


class TestYamlInput:
    def test_corpus_yaml_twin(self, corpus, corpus_bytes):
        text = yaml.safe_dump(json.loads(corpus_bytes.decode("utf-8")),
                              sort_keys=False, allow_unicode=True)
        twin, diagnostics = parse_catalog(
            RawDocument(text.encode("utf-8"), DocumentFormat.YAML, "twin.yaml"))
        assert not diagnostics
        assert twin == corpus

    def test_yaml_syntax_error(self):
        catalog, diagnostics = parse_catalog(
            RawDocument(b"catalog: [unclosed", DocumentFormat.YAML, "bad.yaml"))
        assert catalog is None
        assert any(d.severity is Severity.ERROR and d.path for d in diagnostics)

    def test_extension_dispatch(self, tmp_path, corpus, corpus_bytes):
        target = tmp_path / "c.yml"
        target.write_text(yaml.safe_dump(json.loads(corpus_bytes.decode("utf-8")),
                                         sort_keys=False, allow_unicode=True),
                          encoding="utf-8")
        catalog, diagnostics = parse_catalog(load_document(target))
        assert catalog == corpus
        with pytest.raises(ValueError):
            load_document(tmp_path / "c.txt")


class TestParseProfile:
    def test_log4j_fixture(self, log4j_profile):
        assert len(log4j_profile.selections) == 21
        assert len(set(log4j_profile.selections)) == 21
        assert log4j_profile.catalog_ref == "seed_catalog.json"

    def test_duplicate_with_ids_warn_and_dedupe(self):
        doc = {"profile": {
            "uuid": "p1",
            "imports": [{"href": "c.json", "include-controls": [
                {"with-ids": ["SSS-01-01", "SSS-01-02", "SSS-01-01"]},
            ]}],
        }}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert profile.selections == ("SSS-01-01", "SSS-01-02")
        assert [d for d in diagnostics if d.severity is Severity.WARNING]

    def test_empty_selection(self):
        doc = {"profile": {"uuid": "p1",
                           "imports": [{"href": "c.json",
                                        "include-controls": [{"with-ids": []}]}]}}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert profile is not None and profile.selections == ()

    def test_unknown_catalog_ref_parses(self):
        doc = {"profile": {"uuid": "p1",
                           "imports": [{"href": "missing://nowhere",
                                        "include-controls": [{"with-ids": ["SSS-01"]}]}]}}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert profile is not None
        assert profile.catalog_ref == "missing://nowhere"

    def test_modify_section(self):
        doc = {"profile": {
            "uuid": "p1",
            "imports": [{"href": "c.json",
                         "include-controls": [{"with-ids": ["SSS-01-01"]}]}],
            "modify": {"alters": [
                {"control-id": "SSS-01-01", "field": "title", "replacement": "New"},
            ]},
        }}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert not diagnostics
        assert profile.tailoring[0].target == "SSS-01-01"
        assert profile.tailoring[0].field == "title"

    def test_malformed_selection_id_errors(self):
        doc = {"profile": {"uuid": "p1",
                           "imports": [{"href": "c.json",
                                        "include-controls": [{"with-ids": ["SSS-1"]}]}]}}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert profile is None
        assert any(d.severity is Severity.ERROR for d in diagnostics)

    def test_multi_import_rejected(self):
        doc = {"profile": {"uuid": "p1", "imports": [
            {"href": "a.json", "include-controls": [{"with-ids": []}]},
            {"href": "b.json", "include-controls": [{"with-ids": []}]},
        ]}}
        profile, diagnostics = parse_profile(jdoc(doc))
        assert profile is None

    def test_profile_yaml_twin(self, log4j_profile):
        from conftest import LOG4J_PROFILE

        document = json.loads(LOG4J_PROFILE.read_text(encoding="utf-8"))
        text = yaml.safe_dump(document, sort_keys=False, allow_unicode=True)
        twin, diagnostics = parse_profile(
            RawDocument(text.encode("utf-8"), DocumentFormat.YAML, "twin.yaml"))
        assert not diagnostics
        assert twin == log4j_profile


def test_validate_catalog_matches_parser_acceptance(corpus):
    # A catalog the parser accepted re-validates clean through the model API.
    assert validate_catalog(corpus) == []


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_round_trip_property(seed):
    doc = random_catalog_doc(random.Random(seed))
    first, diagnostics = parse_catalog(jdoc(doc))
    assert first is not None, diagnostics
    payload = serialize_catalog(first)
    second, _ = parse_catalog(RawDocument(payload, DocumentFormat.JSON))
    assert second == first
    assert serialize_catalog(second) == payload


def _corrupt(doc: dict, rng: random.Random) -> None:
    """Apply one random piece of damage to a generated document."""
    catalog = doc["catalog"]
    groups = catalog.get("groups", [])
    damage = rng.randrange(6)
    if damage == 0:
        catalog.pop("metadata", None)
    elif damage == 1:
        catalog.get("metadata", {}).pop("last-modified", None)
    elif damage == 2 and groups:
        rng.choice(groups).pop("id", None)
    elif damage == 3 and groups:
        rng.choice(groups)["id"] = "BAD-1"
    elif damage == 4:
        catalog["groups"] = "not-a-list"
    else:
        # Duplicate a goal id when possible; harmless on single-goal docs.
        if len(groups) >= 2:
            groups[1]["id"] = groups[0]["id"]
