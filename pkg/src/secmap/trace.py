"""Traceability matrix, completion metric, gap reports, and distribution stats.

The matrix has one cell per non-operation node (goal, L1, L2, L3); the cell
value is the node's direct child count (operation count for L3).  Completion
is the share of cells with at least one child, hitting 1.0 exactly when every
requirement is refined all the way down to operations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canonical import canonical_bytes
from .model import (
    Catalog,
    Control,
    InvalidCatalogError,
    Level,
    derive_level,
    iter_controls,
    parent_of,
    validate_catalog,
)


class MatrixMismatchError(ValueError):
    """Raised when a matrix and catalog passed together do not line up."""


@dataclass(frozen=True)
class TraceMatrix:
    """Node id -> direct child count, for every goal/L1/L2/L3 node."""

    cells: dict[str, int]


@dataclass(frozen=True)
class GapReport:
    topdown_gaps: tuple[str, ...]   # nodes with zero children
    bottomup_gaps: tuple[str, ...]  # nodes whose prefix parent is absent


@dataclass(frozen=True)
class LevelCounts:
    l1: int = 0
    l2: int = 0
    l3: int = 0
    operations: int = 0


@dataclass(frozen=True)
class DistributionReport:
    per_goal: dict[str, LevelCounts]
    per_framework: dict[str, LevelCounts]  # operations always 0 here
    totals: LevelCounts
    # Duplicated L2 nodes (canonical_id set) are distinct nodes and count per
    # occurrence above; this reports how many L2s remain after collapsing them.
    canonical_distinct_l2: int = 0


def _require_valid(catalog: Catalog) -> None:
    violations = validate_catalog(catalog)
    if violations:
        raise InvalidCatalogError(violations)


def build_matrix(catalog: Catalog) -> TraceMatrix:
    """One cell per non-operation node; value = direct child count."""
    _require_valid(catalog)
    cells: dict[str, int] = {}
    for goal in catalog.goals:
        cells[goal.id] = len(goal.children)
    for control in iter_controls(catalog):
        if control.level is Level.L3:
            cells[control.id] = len(control.operations)
        else:
            cells[control.id] = len(control.children)
    return TraceMatrix(cells=cells)


def completion_rate(matrix: TraceMatrix) -> float:
    """Filled cells over total cells; 1.0 for an empty matrix by convention."""
    if not matrix.cells:
        return 1.0
    filled = sum(1 for count in matrix.cells.values() if count >= 1)
    return filled / len(matrix.cells)


def gap_report(matrix: TraceMatrix, catalog: Catalog) -> GapReport:
    """Top-down gaps (unrefined nodes) and bottom-up gaps (orphaned ids).

    Bottom-up gaps are normally empty once validation passed; they surface
    when validation was deliberately bypassed.
    """
    expected = {goal.id for goal in catalog.goals}
    expected.update(control.id for control in iter_controls(catalog))
    if expected != set(matrix.cells):
        raise MatrixMismatchError("matrix cells do not match the catalog's nodes")

    present = set(matrix.cells)
    orphaned = {
        node_id for node_id in present
        if (parent := parent_of(node_id)) is not None and parent not in present
    }
    # An orphan with no children is reported once, as the bottom-up problem.
    topdown = tuple(sorted(node_id for node_id, count in matrix.cells.items()
                           if count == 0 and node_id not in orphaned))
    return GapReport(topdown_gaps=topdown, bottomup_gaps=tuple(sorted(orphaned)))


def distribution(catalog: Catalog) -> DistributionReport:
    """Per-goal and per-framework level counts plus catalog totals.

    A control counts once for every distinct framework its sources cite.
    Duplicated L2s count once per occurrence; the canonical-distinct L2 count
    is reported alongside.
    """
    _require_valid(catalog)

    per_goal: dict[str, LevelCounts] = {}
    per_framework_raw: dict[str, dict[str, int]] = {}
    totals = {"l1": 0, "l2": 0, "l3": 0, "operations": 0}
    distinct_l2: set[str] = set()

    level_keys = {Level.L1: "l1", Level.L2: "l2", Level.L3: "l3"}

    for goal in catalog.goals:
        counts = {"l1": 0, "l2": 0, "l3": 0, "operations": 0}

        def tally(control: Control) -> None:
            key = level_keys[control.level]
            counts[key] += 1
            totals[key] += 1
            # One tally per distinct framework: citing two SSDF practices
            # still makes this a single SSDF-derived control.
            for framework in {ref.framework.value for ref in control.sources}:
                fw = per_framework_raw.setdefault(framework,
                                                  {"l1": 0, "l2": 0, "l3": 0})
                fw[key] += 1
            if control.level is Level.L2:
                distinct_l2.add(control.canonical_id or control.id)
            if control.level is Level.L3:
                counts["operations"] += len(control.operations)
                totals["operations"] += len(control.operations)
            for child in control.children:
                tally(child)

        for child in goal.children:
            tally(child)
        per_goal[goal.id] = LevelCounts(**counts)

    per_framework = {
        name: LevelCounts(l1=raw["l1"], l2=raw["l2"], l3=raw["l3"])
        for name, raw in sorted(per_framework_raw.items())
    }
    return DistributionReport(
        per_goal=per_goal,
        per_framework=per_framework,
        totals=LevelCounts(**totals),
        canonical_distinct_l2=len(distinct_l2),
    )


# --- rendering ----------------------------------------------------------------


def _level_counts_obj(counts: LevelCounts, *, operations: bool) -> dict:
    obj = {"level-1": counts.l1, "level-2": counts.l2, "level-3": counts.l3}
    if operations:
        obj["operations"] = counts.operations
    return obj


def distribution_to_document(report: DistributionReport) -> dict:
    return {
        "per-goal": {goal: _level_counts_obj(counts, operations=True)
                     for goal, counts in sorted(report.per_goal.items())},
        "per-framework": {fw: _level_counts_obj(counts, operations=False)
                          for fw, counts in sorted(report.per_framework.items())},
        "totals": _level_counts_obj(report.totals, operations=True),
        "canonical-distinct-level-2": report.canonical_distinct_l2,
    }


def render_distribution_json(report: DistributionReport) -> bytes:
    return canonical_bytes(distribution_to_document(report))


def render_distribution_text(report: DistributionReport) -> str:
    """Aligned table for terminals."""
    rows = [("goal", "level-1", "level-2", "level-3", "operations")]
    for goal, counts in sorted(report.per_goal.items()):
        rows.append((goal, str(counts.l1), str(counts.l2), str(counts.l3),
                     str(counts.operations)))
    t = report.totals
    rows.append(("total", str(t.l1), str(t.l2), str(t.l3), str(t.operations)))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in rows]
    lines.append("")
    lines.append(f"canonical-distinct level-2 requirements: {report.canonical_distinct_l2}")
    if report.per_framework:
        lines.append("")
        fw_rows = [("framework", "level-1", "level-2", "level-3")]
        for fw, counts in sorted(report.per_framework.items()):
            fw_rows.append((fw, str(counts.l1), str(counts.l2), str(counts.l3)))
        fw_widths = [max(len(row[i]) for row in fw_rows) for i in range(4)]
        lines.extend("  ".join(cell.ljust(fw_widths[i]) for i, cell in enumerate(row)).rstrip()
                     for row in fw_rows)
    return "\n".join(lines) + "\n"


def trace_to_document(matrix: TraceMatrix, report: GapReport | None = None) -> dict:
    per_level: dict[str, dict[str, int]] = {}
    for node_id, count in matrix.cells.items():
        level = _matrix_level(node_id)
        bucket = per_level.setdefault(level, {"cells": 0, "filled": 0})
        bucket["cells"] += 1
        if count >= 1:
            bucket["filled"] += 1
    document: dict = {
        "cells": dict(sorted(matrix.cells.items())),
        "per-level": {level: per_level[level] for level in
                      ("goal", "level-1", "level-2", "level-3") if level in per_level},
        "completion": round(completion_rate(matrix), 4),
    }
    if report is not None:
        document["topdown-gaps"] = list(report.topdown_gaps)
        document["bottomup-gaps"] = list(report.bottomup_gaps)
    return document


def _matrix_level(node_id: str) -> str:
    return derive_level(node_id).value


def render_trace_text(matrix: TraceMatrix, report: GapReport | None = None) -> str:
    document = trace_to_document(matrix, report)
    rows = [("level", "cells", "filled")]
    for level, bucket in document["per-level"].items():
        rows.append((level, str(bucket["cells"]), str(bucket["filled"])))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in rows]
    lines.append("")
    lines.append(f"completion: {completion_rate(matrix):.4f}")
    if report is not None:
        lines.append("")
        lines.append(f"top-down gaps ({len(report.topdown_gaps)}):")
        lines.extend(f"  {node_id}" for node_id in report.topdown_gaps)
        lines.append(f"bottom-up gaps ({len(report.bottomup_gaps)}):")
        lines.extend(f"  {node_id}" for node_id in report.bottomup_gaps)
    return "\n".join(lines) + "\n"
