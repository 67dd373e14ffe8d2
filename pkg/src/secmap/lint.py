"""Refinement lints: relevance, overlap, feasibility, plus custom-agent notes.

These automate the curation criteria as advisory heuristics; they never
mutate or reject a catalog.  Thresholds (feasibility word floor, overlap
title normalization) are configuration values with the documented defaults;
they are engineering choices, not sourced numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .canonical import canonical_bytes
from .model import (
    Catalog,
    Control,
    InvalidCatalogError,
    Level,
    goal_id_of,
    iter_controls,
    validate_catalog,
)


class LintRule(str, Enum):
    RELEVANCE = "relevance"
    OVERLAP = "overlap"
    FEASIBILITY = "feasibility"
    CUSTOM_AGENT = "custom-agent"


class LintSeverity(str, Enum):
    WARNING = "warning"
    INFO = "info"


_RULE_ORDER = {rule: i for i, rule in enumerate(LintRule)}

DEFAULT_FEASIBILITY_MIN_WORDS = 15

# Minimal stop-word set for overlap title normalization.
DEFAULT_STOP_WORDS = frozenset(
    "a an and are as at be by for from in is of on or the to with".split()
)

_WORD_RE = re.compile(r"[a-z0-9]+")


def normalize_title(title: str, stop_words: frozenset[str] = DEFAULT_STOP_WORDS) -> str:
    """Lowercase, strip punctuation and stop-words, collapse whitespace."""
    words = [w for w in _WORD_RE.findall(title.lower()) if w not in stop_words]
    return " ".join(words)


@dataclass(frozen=True)
class LintDiagnostic:
    rule: LintRule
    node: str
    related: tuple[str, ...]
    message: str
    severity: LintSeverity

    def render(self) -> str:
        return f"{self.node}: {self.rule.value}: {self.message}"


def lint(
    catalog: Catalog,
    rules: Optional[Iterable[LintRule]] = None,
    *,
    feasibility_min_words: int = DEFAULT_FEASIBILITY_MIN_WORDS,
    stop_words: frozenset[str] = DEFAULT_STOP_WORDS,
) -> list[LintDiagnostic]:
    """Run the selected rules (all by default) over a valid catalog.

    Relevance: L2/L3 controls with neither sources nor links.
    Overlap: same-level controls within one goal whose normalized titles
    collide without a canonical link; reported once per pair, keyed by the
    lexicographically smaller id.
    Feasibility: L3 controls with zero operations and a statement shorter
    than the word floor.
    CustomAgent: operations naming agents outside the controlled vocabulary.
    """
    violations = validate_catalog(catalog)
    if violations:
        raise InvalidCatalogError(violations)
    active = set(rules) if rules is not None else set(LintRule)
    diagnostics: list[LintDiagnostic] = []

    if LintRule.RELEVANCE in active:
        for control in iter_controls(catalog):
            if control.level is Level.L1:
                continue
            if not control.sources and not control.links:
                diagnostics.append(LintDiagnostic(
                    rule=LintRule.RELEVANCE,
                    node=control.id,
                    related=(),
                    message="no sources or links trace this requirement to any framework",
                    severity=LintSeverity.WARNING,
                ))

    if LintRule.OVERLAP in active:
        diagnostics.extend(_overlap(catalog, stop_words))

    if LintRule.FEASIBILITY in active:
        for control in iter_controls(catalog):
            if control.level is not Level.L3:
                continue
            words = len(control.statement.split())
            if not control.operations and words < feasibility_min_words:
                diagnostics.append(LintDiagnostic(
                    rule=LintRule.FEASIBILITY,
                    node=control.id,
                    related=(),
                    message=(f"no operations and only {words} statement words; "
                             "too thin to operationalize"),
                    severity=LintSeverity.WARNING,
                ))

    if LintRule.CUSTOM_AGENT in active:
        for control in iter_controls(catalog):
            for op in control.operations:
                custom = sorted({agent.name for agent in op.agents if agent.custom})
                if custom:
                    diagnostics.append(LintDiagnostic(
                        rule=LintRule.CUSTOM_AGENT,
                        node=op.id,
                        related=(),
                        message="agents outside the controlled vocabulary: " + ", ".join(custom),
                        severity=LintSeverity.INFO,
                    ))

    diagnostics.sort(key=lambda d: (_RULE_ORDER[d.rule], d.node, d.related))
    return diagnostics


def _overlap(catalog: Catalog, stop_words: frozenset[str]) -> list[LintDiagnostic]:
    by_key: dict[tuple[str, Level, str], list[Control]] = {}
    for control in iter_controls(catalog):
        key = (goal_id_of(control.id), control.level, normalize_title(control.title, stop_words))
        if key[2]:
            by_key.setdefault(key, []).append(control)

    out: list[LintDiagnostic] = []
    for (_, _, _), group in by_key.items():
        if len(group) < 2:
            continue
        group = sorted(group, key=lambda c: c.id)
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if _canonically_linked(a, b):
                    continue
                out.append(LintDiagnostic(
                    rule=LintRule.OVERLAP,
                    node=a.id,
                    related=(b.id,),
                    message=f"title duplicates {b.id} ({b.title!r}) without a canonical link",
                    severity=LintSeverity.WARNING,
                ))
    return out


def _canonically_linked(a: Control, b: Control) -> bool:
    if a.canonical_id == b.id or b.canonical_id == a.id:
        return True
    return a.canonical_id is not None and a.canonical_id == b.canonical_id


def lints_to_document(diagnostics: list[LintDiagnostic]) -> dict:
    return {
        "diagnostics": [
            {
                "rule": d.rule.value,
                "node": d.node,
                "related": list(d.related),
                "message": d.message,
                "severity": d.severity.value,
            }
            for d in diagnostics
        ]
    }


def render_lints_json(diagnostics: list[LintDiagnostic]) -> bytes:
    return canonical_bytes(lints_to_document(diagnostics))


def render_lints_text(diagnostics: list[LintDiagnostic]) -> str:
    return "".join(d.render() + "\n" for d in diagnostics)
