"""Profile resolution and scenario checklist generation.

A profile selects catalog nodes (plus optional title/description tailoring)
and resolves to a pruned catalog: the selected nodes, all their ancestors up
to the goals, and every descendant down to the operations, nothing else.
A scenario map (recommendation -> control ids -> instruction) turns into a
deduplicated checklist with a per-goal distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Optional

from .canonical import canonical_bytes
from .model import (
    Catalog,
    Control,
    InvalidCatalogError,
    ancestors_of,
    goal_id_of,
    node_index,
    validate_catalog,
)


class MissingControlError(ValueError):
    """Raised when a selection or tailoring target names no catalog node."""

    def __init__(self, missing: list[str]):
        self.missing = sorted(set(missing))
        super().__init__(f"unknown node ids: {', '.join(self.missing)}")


@dataclass(frozen=True)
class Tailoring:
    """One replacement applied during resolution."""

    target: str
    field: str  # "title" | "description"
    replacement: str


@dataclass(frozen=True)
class Profile:
    """Selection + tailoring of controls over one catalog."""

    uuid: str
    title: str = ""
    catalog_ref: str = ""
    selections: tuple[str, ...] = ()
    tailoring: tuple[Tailoring, ...] = ()


def resolve(profile: Profile, catalog: Catalog) -> Catalog:
    """Resolve a profile against a catalog.

    The result keeps exactly the selected nodes, their ancestors up to the
    goals, and their full descendant subtrees, in catalog order (never
    selection order); it revalidates cleanly and records the profile uuid as
    metadata provenance.  Tailoring replaces the title or description of
    control nodes.  Unknown selection ids, or tailoring targets that do not
    name a control in the catalog, raise ``MissingControlError`` listing every
    offender.
    """
    violations = validate_catalog(catalog)
    if violations:
        raise InvalidCatalogError(violations)

    index = node_index(catalog)
    missing = [sel for sel in profile.selections if sel not in index]
    if missing:
        raise MissingControlError(missing)

    # Keep = every selected id, its ancestors (context), and its subtree.
    keep: set[str] = set()
    for sel in profile.selections:
        keep.add(sel)
        keep.update(ancestors_of(sel))
    subtree_roots = tuple(profile.selections)

    def in_subtree(node_id: str) -> bool:
        return any(node_id == root or node_id.startswith(root + "-") for root in subtree_roots)

    kept_ids = {node_id for node_id in index
                if in_subtree(node_id) or node_id in keep}

    # Tailoring may only touch controls inside the selections' closure.
    bad_targets = [t.target for t in profile.tailoring
                   if t.target not in kept_ids
                   or not isinstance(index.get(t.target), Control)]
    if bad_targets:
        raise MissingControlError(bad_targets)

    tailor_by_target: dict[str, list[Tailoring]] = {}
    for t in profile.tailoring:
        tailor_by_target.setdefault(t.target, []).append(t)

    def tailored(control: Control) -> Control:
        out = control
        for t in tailor_by_target.get(control.id, ()):
            if t.field == "title":
                out = replace(out, title=t.replacement)
            else:
                out = replace(out, description=t.replacement)
        return out

    def keep_control(control: Control) -> Optional[Control]:
        if control.id not in kept_ids:
            return None
        children = tuple(c for c in (keep_control(child) for child in control.children)
                         if c is not None)
        operations = tuple(op for op in control.operations if in_subtree(op.id))
        out = replace(tailored(control), children=children, operations=operations)
        # A canonical partner pruned away would dangle; the link only means
        # something inside one catalog, so the resolved view drops it.
        if out.canonical_id is not None and out.canonical_id not in kept_ids:
            out = replace(out, canonical_id=None)
        return out

    goals = []
    for goal in catalog.goals:
        if goal.id not in kept_ids:
            continue
        children = tuple(c for c in (keep_control(child) for child in goal.children)
                         if c is not None)
        goals.append(replace(goal, children=children))

    metadata = replace(catalog.metadata, resolved_from=profile.uuid)
    return replace(catalog, metadata=metadata, goals=tuple(goals))


def strip_provenance(catalog: Catalog) -> Catalog:
    """Identity on ordinary catalogs; drops resolution provenance otherwise."""
    if catalog.metadata.resolved_from is None:
        return catalog
    return replace(catalog, metadata=replace(catalog.metadata, resolved_from=None))


# --- scenarios and checklists ------------------------------------------------


@dataclass(frozen=True)
class ScenarioEntry:
    """One recommendation row; empty control_ids means the recommendation is
    covered by a neighboring entry's checklist item."""

    recommendation: str
    control_ids: tuple[str, ...] = ()
    instruction: str = ""


@dataclass(frozen=True)
class ScenarioMap:
    scenario_name: str
    entries: tuple[ScenarioEntry, ...] = ()


@dataclass(frozen=True)
class ChecklistItem:
    control_id: str
    title: str
    instruction: str
    recommendations: tuple[str, ...] = ()
    done: bool = False


@dataclass(frozen=True)
class ChecklistDistribution:
    per_goal_count: dict[str, int]
    per_goal_percent: dict[str, int]


@dataclass(frozen=True)
class Checklist:
    items: tuple[ChecklistItem, ...]
    distribution: ChecklistDistribution


class ChecklistFormat(str, Enum):
    JSON = "json"
    MARKDOWN = "markdown"


def selection_scenario(selection: list[str], name: str = "selection") -> ScenarioMap:
    """Wrap a bare id selection as a degenerate scenario (no recommendations)."""
    entries = tuple(ScenarioEntry(recommendation="", control_ids=(node_id,), instruction="")
                    for node_id in selection)
    return ScenarioMap(scenario_name=name, entries=entries)


def generate_checklist(scenario: ScenarioMap, catalog: Catalog) -> Checklist:
    """One item per distinct referenced node, in first-occurrence order.

    The instruction comes from the first entry naming the node; every
    non-empty recommendation naming it is collected.  The distribution maps
    each item to its goal ancestor, with percentages rounded half-up to whole
    percents.
    """
    index = node_index(catalog)
    missing = [node_id for entry in scenario.entries for node_id in entry.control_ids
               if node_id not in index]
    if missing:
        raise MissingControlError(missing)

    order: list[str] = []
    instructions: dict[str, str] = {}
    recommendations: dict[str, list[str]] = {}
    for entry in scenario.entries:
        for node_id in entry.control_ids:
            if node_id not in instructions:
                order.append(node_id)
                instructions[node_id] = entry.instruction
                recommendations[node_id] = []
            if entry.recommendation and entry.recommendation not in recommendations[node_id]:
                recommendations[node_id].append(entry.recommendation)

    items = tuple(
        ChecklistItem(
            control_id=node_id,
            title=index[node_id].title,
            instruction=instructions[node_id],
            recommendations=tuple(recommendations[node_id]),
        )
        for node_id in order
    )

    counts: dict[str, int] = {}
    for item in items:
        goal = goal_id_of(item.control_id)
        counts[goal] = counts.get(goal, 0) + 1
    counts = dict(sorted(counts.items()))
    total = len(items)
    percents: dict[str, int] = {}
    if total:
        percents = {
            goal: int((Decimal(count) * 100 / Decimal(total))
                      .quantize(Decimal(1), rounding=ROUND_HALF_UP))
            for goal, count in counts.items()
        }
    return Checklist(items=items,
                     distribution=ChecklistDistribution(per_goal_count=counts,
                                                        per_goal_percent=percents))


def checklist_to_document(checklist: Checklist) -> dict:
    return {
        "items": [
            {
                "control-id": item.control_id,
                "title": item.title,
                "instruction": item.instruction,
                "recommendations": list(item.recommendations),
                "done": item.done,
            }
            for item in checklist.items
        ],
        "distribution": {
            "per-goal-count": dict(checklist.distribution.per_goal_count),
            "per-goal-percent": dict(checklist.distribution.per_goal_percent),
        },
    }


def export_checklist(checklist: Checklist, fmt: ChecklistFormat) -> bytes:
    if fmt is ChecklistFormat.JSON:
        return canonical_bytes(checklist_to_document(checklist))
    lines = ["# Security checklist", ""]
    for item in checklist.items:
        lines.append(f"- [ ] {item.title}")
        lines.append(f"  - control: {item.control_id}")
        if item.instruction:
            lines.append(f"  - instruction: {item.instruction}")
        for rec in item.recommendations:
            lines.append(f"  - recommendation: {rec}")
    lines.append("")
    lines.append("## Distribution by goal")
    lines.append("")
    for goal, count in checklist.distribution.per_goal_count.items():
        percent = checklist.distribution.per_goal_percent[goal]
        lines.append(f"- {goal}: {count} items ({percent}%)")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- scenario document I/O ----------------------------------------------------


def scenario_to_document(scenario: ScenarioMap) -> dict:
    return {
        "scenario_name": scenario.scenario_name,
        "entries": [
            {
                "recommendation": entry.recommendation,
                "control_ids": list(entry.control_ids),
                "instruction": entry.instruction,
            }
            for entry in scenario.entries
        ],
    }


def scenario_from_document(document: object) -> ScenarioMap:
    """Strict read of a scenario map dict; raises ValueError on shape issues."""
    if not isinstance(document, dict):
        raise ValueError("scenario document must be an object")
    name = document.get("scenario_name")
    if not isinstance(name, str):
        raise ValueError("scenario_name must be a string")
    raw_entries = document.get("entries", [])
    if not isinstance(raw_entries, list):
        raise ValueError("entries must be an array")
    entries = []
    for i, raw in enumerate(raw_entries):
        if not isinstance(raw, dict):
            raise ValueError(f"entries[{i}] must be an object")
        recommendation = raw.get("recommendation", "")
        instruction = raw.get("instruction", "")
        control_ids = raw.get("control_ids", [])
        if not isinstance(recommendation, str) or not isinstance(instruction, str):
            raise ValueError(f"entries[{i}] recommendation/instruction must be strings")
        if not isinstance(control_ids, list) or not all(isinstance(c, str) for c in control_ids):
            raise ValueError(f"entries[{i}].control_ids must be an array of strings")
        entries.append(ScenarioEntry(recommendation=recommendation,
                                     control_ids=tuple(control_ids),
                                     instruction=instruction))
    return ScenarioMap(scenario_name=name, entries=tuple(entries))
