"""Release acceptance suite.

One test per release criterion, run at the pinned tolerance; each prints a
PASS line with its measured runtime where the criterion bounds one.
"""

from __future__ import annotations

import copy
import json
import os
import random
import shutil
import subprocess
import sys
import threading
import time
import urllib.request

import pytest

from conftest import (
    CORPUS_NOTES,
    GOLDEN_CORPUS_SHA256,
    LOG4J_SCENARIO,
    SEED_CATALOG,
    SRC,
)
from docgen import random_catalog_doc
from secmap.canonical import canonical_bytes
from secmap.lint import LintRule, lint, normalize_title
from secmap.model import (
    Level,
    Phase,
    iter_controls,
    iter_nodes,
    validate_catalog,
)
from secmap.oscal import (
    DocumentFormat,
    RawDocument,
    load_document,
    parse_catalog,
    serialize_catalog,
)
from secmap.profiles import (
    Profile,
    Tailoring,
    generate_checklist,
    resolve,
    strip_provenance,
    export_checklist,
    ChecklistFormat,
)
from secmap.trace import build_matrix, completion_rate
from test_profiles import LOG4J_TITLES
from treeops import (
    collect_nodes,
    find_control,
    insert_complete_chain,
    parse_doc,
    rate_of,
    set_statement,
)

import hashlib

TABLE_OPERATIONS = [
    ("Ensure Secret Isolation", Phase.DEVELOPMENT,
     ["Security Teams", "Build Platform Engineers"]),
    ("Enforce ephemeral build environments", Phase.DEPLOYMENT,
     ["DevOps Teams", "IT Operations"]),
    ("Prevent concurrent build interference", Phase.DEVELOPMENT,
     ["Infrastructure Teams", "Security Engineers"]),
    ("Safeguard against cache poisoning", Phase.POST_DEPLOYMENT,
     ["DevOps Teams", "Security Analysts"]),
    ("Restrict remote influence", Phase.DEVELOPMENT,
     ["Security Teams", "Build Platform Engineers"]),
]

ENV_SEGREGATION_L3_TITLES = {
    "Secure and isolate sensitive application secrets.",
    "Build platform-isolation strength-hosted.",
    "Implement isolated build platforms for secure environment segregation.",
}


def _announce(name: str, elapsed: float | None = None) -> None:
    suffix = f" ({elapsed:.3f}s)" if elapsed is not None else ""
    print(f"ACCEPT {name}: PASS{suffix}")


def test_c1_seed_corpus_structural_validation(corpus):
    started = time.perf_counter()
    loaded, diagnostics = parse_catalog(load_document(SEED_CATALOG), validate=False)
    violations = validate_catalog(loaded)
    elapsed = time.perf_counter() - started
    assert not diagnostics and loaded == corpus
    assert violations == []
    assert elapsed < 1.0, f"load + validation took {elapsed:.3f}s"

    assert [goal.title for goal in corpus.goals] == [
        "Secure Software Environment",
        "Secure Software Development",
        "Software Traceability",
        "Vulnerability Management",
    ]
    per_goal_l1 = {goal.id: len(goal.children) for goal in corpus.goals}
    assert per_goal_l1 == {"SSS-01": 5, "SSS-02": 9, "SSS-03": 1, "SSS-04": 7}
    assert sum(per_goal_l1.values()) == 22

    env_segregation = corpus.goals[0].children[0]
    assert env_segregation.title == "Environment segregation"
    l3s = [c for child in env_segregation.children for c in child.children]
    assert {c.title for c in l3s} == ENV_SEGREGATION_L3_TITLES

    isolated = next(c for c in l3s if c.title.startswith("Implement isolated"))
    assert [(op.title, op.phase, [a.name for a in op.agents])
            for op in isolated.operations] == TABLE_OPERATIONS

    notes = CORPUS_NOTES.read_text(encoding="utf-8")
    assert "23" in notes and "22" in notes, "count discrepancy must be documented"
    _announce("C1 seed-corpus structural validation", elapsed)


def test_c2_round_trip_determinism(corpus, corpus_bytes):
    started = time.perf_counter()

    assert serialize_catalog(corpus) == corpus_bytes
    assert hashlib.sha256(corpus_bytes).hexdigest() == GOLDEN_CORPUS_SHA256
    reparsed, diagnostics = parse_catalog(RawDocument(corpus_bytes, DocumentFormat.JSON))
    assert not diagnostics and reparsed == corpus

    rng = random.Random(0xC2)
    generated = 0
    while generated < 200:
        doc = random_catalog_doc(rng)
        first, diags = parse_catalog(
            RawDocument(canonical_bytes(doc), DocumentFormat.JSON))
        assert first is not None, diags
        payload = serialize_catalog(first)
        second, _ = parse_catalog(RawDocument(payload, DocumentFormat.JSON))
        assert second == first, "parse-serialize-parse must be identity"
        assert serialize_catalog(second) == payload, "serialize must be byte-stable"
        generated += 1

    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"round-trip suite took {elapsed:.3f}s"
    _announce(f"C2 round-trip determinism ({generated} generated catalogs)", elapsed)


def test_c3_completion_metric(corpus, corpus_doc):
    assert completion_rate(build_matrix(corpus)) == 1.0

    # Brute-force cell count: every goal/L1/L2/L3 object in the raw document.
    n = len(collect_nodes(corpus_doc))
    doc = copy.deepcopy(corpus_doc)
    find_control(doc, "SSS-01-01-01-03").pop("operations")
    assert rate_of(doc) == (n - 1) / n

    rng = random.Random(0xC3)
    doc = copy.deepcopy(corpus_doc)
    rate = rate_of(doc)
    inserted: list[tuple[list, dict]] = []
    steps = {"insert": 0, "remove": 0}
    for _ in range(1000):
        if inserted and rng.random() < 0.5:
            container, node = inserted.pop(rng.randrange(len(inserted)))
            container.remove(node)
            new_rate = rate_of(doc)
            assert new_rate <= rate + 1e-12, "removing a link must never raise completion"
            steps["remove"] += 1
        else:
            container, node = insert_complete_chain(doc, rng)
            inserted.append((container, node))
            new_rate = rate_of(doc)
            assert new_rate >= rate - 1e-12, "adding a link must never lower completion"
            steps["insert"] += 1
        rate = new_rate
    assert steps["insert"] + steps["remove"] == 1000
    _announce(f"C3 completion metric (monotone over {steps['insert']} inserts / "
              f"{steps['remove']} removals)")


def test_c4_log4j_checklist_reproduction(corpus, log4j_scenario):
    started = time.perf_counter()
    checklist = generate_checklist(log4j_scenario, corpus)
    markdown = export_checklist(checklist, ChecklistFormat.MARKDOWN).decode("utf-8")
    elapsed = time.perf_counter() - started

    assert len(checklist.items) == 21
    counts = checklist.distribution.per_goal_count
    assert counts == {"SSS-01": 3, "SSS-02": 8, "SSS-03": 2, "SSS-04": 8}
    percents = checklist.distribution.per_goal_percent
    labels = {"SSS-01": 14, "SSS-02": 38, "SSS-03": 10, "SSS-04": 38}
    for goal, label in labels.items():
        assert abs(percents[goal] - label) <= 1, (goal, percents[goal], label)

    titles = [line[len("- [ ] "):] for line in markdown.splitlines()
              if line.startswith("- [ ] ")]
    assert titles == LOG4J_TITLES
    assert elapsed < 1.0, f"checklist generation took {elapsed:.3f}s"
    _announce("C4 Log4j checklist reproduction", elapsed)


def test_c5_resolution_invariants(corpus):
    l1_ids = tuple(l1.id for goal in corpus.goals for l1 in goal.children)
    full = resolve(Profile(uuid="all-l1", selections=l1_ids), corpus)
    assert strip_provenance(full) == corpus

    node_ids = [node.id for node in iter_nodes(corpus)]
    control_ids = {c.id for c in iter_controls(corpus)}
    rng = random.Random(0xC5)
    checked = 0
    for i in range(500):
        size = rng.randint(0, 8)
        selections = tuple(rng.sample(node_ids, size))
        profile = Profile(uuid=f"p{i}", selections=selections)
        resolved = resolve(profile, corpus)
        assert validate_catalog(resolved) == [], f"profile {i} produced invalid output"

        base_ids = {node.id for node in iter_nodes(resolved)}
        targets = [node_id for node_id in base_ids if node_id in control_ids]
        tailoring = tuple(
            Tailoring(target=t, field=rng.choice(("title", "description")),
                      replacement=f"tailored {i}")
            for t in rng.sample(targets, min(len(targets), rng.randint(0, 3)))
        )
        tailored = resolve(
            Profile(uuid=f"p{i}t", selections=selections, tailoring=tailoring), corpus)
        assert validate_catalog(tailored) == []
        assert {node.id for node in iter_nodes(tailored)} == base_ids, \
            "tailoring must never change the node id set"
        checked += 1
    assert checked == 500
    _announce(f"C5 resolution invariants ({checked} random profiles)")


def test_c6_lint_mutation_detection(corpus, corpus_doc):
    assert lint(corpus) == [], "unmutated corpus must be finding-free"

    rng = random.Random(0xC6)
    nodes = collect_nodes(corpus_doc)
    l2_l3_ids = [node["id"] for node, depth in nodes if depth in (2, 3)]
    l3_ids = [node["id"] for node, depth in nodes if depth == 3]
    by_goal_level: dict[tuple[str, int], list[str]] = {}
    for node, depth in nodes:
        if depth == 0:
            continue
        goal = "SSS-" + node["id"].split("-")[1]
        if normalize_title(node["title"]):
            by_goal_level.setdefault((goal, depth), []).append(node["id"])
    overlap_groups = [ids for ids in by_goal_level.values() if len(ids) >= 2]

    detected = 0
    for i in range(50):
        doc = copy.deepcopy(corpus_doc)
        kind = ("relevance", "overlap", "feasibility")[i % 3]
        if kind == "relevance":
            target = rng.choice(l2_l3_ids)
            control = find_control(doc, target)
            assert control.pop("links", None), "mutation must remove real sources"
            expected = (LintRule.RELEVANCE, target, ())
        elif kind == "overlap":
            group = rng.choice(overlap_groups)
            a, b = rng.sample(group, 2)
            find_control(doc, b)["title"] = find_control(doc, a)["title"]
            low, high = sorted((a, b))
            expected = (LintRule.OVERLAP, low, (high,))
        else:
            target = rng.choice(l3_ids)
            control = find_control(doc, target)
            control.pop("operations", None)
            set_statement(control, "Keep the build safe.")
            expected = (LintRule.FEASIBILITY, target, ())

        findings = lint(parse_doc(doc))
        got = {(d.rule, d.node, d.related) for d in findings}
        assert expected in got, f"mutation {i} ({kind}) went undetected"
        assert got == {expected}, f"mutation {i} ({kind}) raised extra findings: {got}"
        detected += 1

    assert detected == 50
    _announce("C6 lint mutation detection (50/50 found, zero false positives)")


def test_c7_cli_api_equivalence(corpus, log4j_scenario, tmp_path):
    from secmap.api import make_server
    from secmap.profiles import scenario_to_document

    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC) + os.pathsep + env.get("PYTHONPATH", "")

    def cli(*args: str) -> bytes:
        result = subprocess.run([sys.executable, "-m", "secmap", *args],
                                capture_output=True, env=env)
        assert result.returncode == 0, result.stderr
        return result.stdout

    httpd = make_server(corpus, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        def api(payload: dict) -> bytes:
            request = urllib.request.Request(
                f"{base}/api/checklists", data=json.dumps(payload).encode("utf-8"),
                headers={"Content-Type": "application/json"}, method="POST")
            with urllib.request.urlopen(request) as response:
                assert response.status == 200
                return response.read()

        cli_scenario = cli("checklist", "--scenario", str(LOG4J_SCENARIO),
                           "--catalog", str(SEED_CATALOG), "--format", "json")
        api_scenario = api({"scenario": scenario_to_document(log4j_scenario)})
        assert cli_scenario == api_scenario, "scenario outputs must be byte-identical"

        selection = [cid for entry in log4j_scenario.entries
                     for cid in entry.control_ids]
        distinct = list(dict.fromkeys(selection))
        assert len(distinct) == 21
        cli_selection = cli("checklist", "--select", ",".join(distinct),
                            "--catalog", str(SEED_CATALOG), "--format", "json")
        api_selection = api({"selection": distinct})
        assert cli_selection == api_selection, "selection outputs must be byte-identical"
    finally:
        httpd.shutdown()
        httpd.server_close()
    _announce("C7 CLI/API equivalence (Log4j scenario and 21-id selection)")
