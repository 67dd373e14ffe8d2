"""Domain model for the security mapping catalog.

The catalog is a strict hierarchy: four kinds of nodes hang off a fixed
``SSS`` id namespace: goals (1 segment), requirement controls at three
levels (2-4 segments), and leaf operations (5 segments).  Everything here
is an immutable value; construction never validates cross-node rules, so a
structurally broken catalog can be represented and then diagnosed by
``validate_catalog``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Iterator, Optional, Union

ID_PREFIX = "SSS"

# `SSS` followed by 1-5 two-digit segments, 01-99 each (leading zeros kept).
_NODE_ID_RE = re.compile(r"^SSS(-\d{2}){1,5}$")

MAX_SEGMENTS = 5


class MalformedIdError(ValueError):
    """Raised when a string does not match the node id grammar."""


class InvalidCatalogError(ValueError):
    """Raised when an operation requires a catalog that validates cleanly."""

    def __init__(self, violations: list["StructuralViolation"]):
        self.violations = violations
        summary = ", ".join(f"{v.node or '<catalog>'}:{v.rule}" for v in violations[:5])
        if len(violations) > 5:
            summary += f", … ({len(violations)} total)"
        super().__init__(f"catalog has structural violations: {summary}")


class Level(str, Enum):
    """Hierarchy level implied by an id's segment count."""

    GOAL = "goal"
    L1 = "level-1"
    L2 = "level-2"
    L3 = "level-3"
    OPERATION = "operation"


_LEVEL_BY_SEGMENTS = {
    1: Level.GOAL,
    2: Level.L1,
    3: Level.L2,
    4: Level.L3,
    5: Level.OPERATION,
}

CONTROL_LEVELS = (Level.L1, Level.L2, Level.L3)


class Phase(str, Enum):
    """Supply-chain stage an operation belongs to; closed set."""

    PREPARATION = "preparation"
    DEVELOPMENT = "development"
    DEPLOYMENT = "deployment"
    POST_DEPLOYMENT = "post-deployment"


def parse_phase(raw: str) -> Optional[Phase]:
    """Map a phase spelling to the enum; None when unrecognized.

    Accepts case and separator variants ("Post-deployment", "post_deployment",
    "PostDeployment"); the canonical serialized form is the enum value.
    """
    token = re.sub(r"[\s_-]+", "-", raw.strip().lower())
    if token in ("postdeployment", "post-deployment"):
        return Phase.POST_DEPLOYMENT
    try:
        return Phase(token)
    except ValueError:
        return None


class Framework(str, Enum):
    """Source frameworks a requirement may cite."""

    ISM = "ISM"
    SSDF = "SSDF"
    SLSA = "SLSA"
    SAMM = "SAMM"
    TUF = "TUF"
    S2C2F = "S2C2F"
    CISA = "CISA"
    OWASP = "OWASP"
    NIST_AI_RMF = "NIST-AI-RMF"
    OTHER = "Other"


# Controlled vocabulary for operation agents; names compared
# case-insensitively after whitespace normalization.
AGENT_VOCABULARY = (
    "Security Teams",
    "Development Teams",
    "Software Developers",
    "DevOps Teams",
    "IT Operations",
    "Infrastructure Teams",
    "Security Engineers",
    "Security Analysts",
    "Build Platform Engineers",
    "Automated Security Tools",
)

_VOCABULARY_KEYS = {" ".join(name.split()).lower() for name in AGENT_VOCABULARY}


def normalize_agent_name(name: str) -> str:
    return " ".join(name.split())


@dataclass(frozen=True)
class Agent:
    """Team or role accountable for an operation."""

    name: str
    custom: bool = False


def make_agent(name: str) -> Agent:
    """Build an Agent, flagging names outside the controlled vocabulary."""
    normalized = normalize_agent_name(name)
    return Agent(name=normalized, custom=normalized.lower() not in _VOCABULARY_KEYS)


@dataclass(frozen=True)
class SourceRef:
    """Pointer into a source framework (framework + its own identifier)."""

    framework: Framework
    source_id: str
    url: Optional[str] = None


@dataclass(frozen=True)
class OperationTask:
    """Leaf actionable step under a level-3 control.

    ``phase`` is typed ``Phase | str`` so that an out-of-vocabulary value can
    be represented and reported by validation instead of crashing construction.
    """

    id: str
    title: str
    description: str
    agents: tuple[Agent, ...]
    phase: Union[Phase, str]


@dataclass(frozen=True)
class Control:
    """Requirement at level 1-3.

    ``statement`` carries the original requirement text, ``description`` the
    interpreted guidance (may be empty, typically at L1).  ``canonical_id``
    marks an intentional duplicate of another same-level control with an
    identical statement.
    """

    id: str
    title: str
    statement: str = ""
    description: str = ""
    sources: tuple[SourceRef, ...] = ()
    links: tuple[str, ...] = ()
    children: tuple["Control", ...] = ()
    operations: tuple[OperationTask, ...] = ()
    canonical_id: Optional[str] = None

    @property
    def level(self) -> Level:
        return derive_level(self.id)


@dataclass(frozen=True)
class Goal:
    id: str
    title: str
    description: str = ""
    children: tuple[Control, ...] = ()


@dataclass(frozen=True)
class CatalogMetadata:
    title: str
    version: str
    last_modified: str
    # Set on resolution output only: uuid of the profile that produced it.
    resolved_from: Optional[str] = None


@dataclass(frozen=True)
class Catalog:
    uuid: str
    metadata: CatalogMetadata
    goals: tuple[Goal, ...] = ()
    back_matter: tuple[SourceRef, ...] = ()


Node = Union[Goal, Control, OperationTask]


def is_valid_id(raw: str) -> bool:
    if not _NODE_ID_RE.match(raw):
        return False
    return all(seg != "00" for seg in raw.split("-")[1:])


def id_segments(raw: str) -> list[str]:
    """Numeric segments of a valid id, e.g. 'SSS-01-02' -> ['01', '02']."""
    if not is_valid_id(raw):
        raise MalformedIdError(f"not a valid node id: {raw!r}")
    return raw.split("-")[1:]


def derive_level(raw: str) -> Level:
    """Level implied by segment count; total on valid ids."""
    return _LEVEL_BY_SEGMENTS[len(id_segments(raw))]


def parent_of(raw: str) -> Optional[str]:
    """Id minus its final segment; None for goal (single-segment) ids."""
    segments = id_segments(raw)
    if len(segments) == 1:
        return None
    return ID_PREFIX + "".join(f"-{seg}" for seg in segments[:-1])


def ancestors_of(raw: str) -> list[str]:
    """All proper ancestors, nearest first."""
    out = []
    current = parent_of(raw)
    while current is not None:
        out.append(current)
        current = parent_of(current)
    return out


def goal_id_of(raw: str) -> str:
    """The single-segment goal ancestor (the id itself for goals)."""
    return ID_PREFIX + "-" + id_segments(raw)[0]


def child_id(parent: str, ordinal: int) -> str:
    """Id of the ordinal-th (1-based) child slot under parent."""
    if not 1 <= ordinal <= 99:
        raise MalformedIdError(f"child ordinal out of range: {ordinal}")
    return f"{parent}-{ordinal:02d}"


@dataclass(frozen=True)
class StructuralViolation:
    """One broken invariant; ``node`` is empty for catalog-scope issues."""

    node: str
    rule: str
    message: str

    def render(self) -> str:
        return f"{self.node or '<catalog>'}: {self.rule}: {self.message}"


def iter_controls(catalog: Catalog) -> Iterator[Control]:
    """Depth-first walk over every control in catalog order."""
    for goal in catalog.goals:
        stack = list(reversed(goal.children))
        while stack:
            control = stack.pop()
            yield control
            stack.extend(reversed(control.children))


def iter_operations(catalog: Catalog) -> Iterator[OperationTask]:
    for control in iter_controls(catalog):
        yield from control.operations


def iter_nodes(catalog: Catalog) -> Iterator[Node]:
    """Goals, controls, and operations in catalog order."""
    for goal in catalog.goals:
        yield goal
        stack = list(reversed(goal.children))
        while stack:
            control = stack.pop()
            yield control
            yield from control.operations
            stack.extend(reversed(control.children))


def node_index(catalog: Catalog) -> dict[str, Node]:
    """Id -> node map; later duplicates win, which validation forbids anyway."""
    return {node.id: node for node in iter_nodes(catalog)}


def _check_rfc3339(value: str) -> bool:
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        return False
    return True


def validate_catalog(catalog: Catalog) -> list[StructuralViolation]:
    """Check every structural invariant; violations are data, not failures.

    Deterministic output: sorted by (node id, rule name).  Empty result means
    the catalog satisfies the full type contract (id grammar, uniqueness,
    prefix-parent integrity, level nesting, phase/agent validity, canonical
    duplication rules, metadata timestamp format).
    """
    violations: list[StructuralViolation] = []

    def flag(node: str, rule: str, message: str) -> None:
        violations.append(StructuralViolation(node=node, rule=rule, message=message))

    if not _check_rfc3339(catalog.metadata.last_modified):
        flag("", "invalid-timestamp",
             f"metadata.last-modified is not RFC 3339: {catalog.metadata.last_modified!r}")

    seen: set[str] = set()
    all_ids: set[str] = set()
    controls_by_id: dict[str, Control] = {}

    def register(node_id: str) -> None:
        if node_id in seen:
            flag(node_id, "duplicate-id", "node id appears more than once")
        seen.add(node_id)
        all_ids.add(node_id)

    def check_id(node_id: str, expected: Level, parent_id: Optional[str]) -> bool:
        if not is_valid_id(node_id):
            flag(node_id, "malformed-id", "id does not match the SSS-nn[-nn…] grammar")
            return False
        register(node_id)
        actual = derive_level(node_id)
        if actual is not expected:
            flag(node_id, "level-mismatch",
                 f"id implies {actual.value} but node sits at {expected.value}")
            return False
        if parent_id is not None and parent_of(node_id) != parent_id:
            flag(node_id, "orphan-id",
                 f"prefix parent {parent_of(node_id)} is not the structural parent {parent_id}")
        return True

    def check_operation(op: OperationTask, parent_id: str) -> None:
        ok = check_id(op.id, Level.OPERATION, parent_id)
        if not ok:
            return
        if not op.agents:
            flag(op.id, "missing-agent", "operation has no agents")
        for agent in op.agents:
            if not normalize_agent_name(agent.name):
                flag(op.id, "blank-agent", "operation agent name is empty")
        if not isinstance(op.phase, Phase):
            flag(op.id, "invalid-phase",
                 f"phase {op.phase!r} is not one of {[p.value for p in Phase]}")

    def check_control(control: Control, expected: Level, parent_id: str) -> None:
        ok = check_id(control.id, expected, parent_id)
        controls_by_id[control.id] = control
        seen_refs: set[tuple[Framework, str]] = set()
        for ref in control.sources:
            pair = (ref.framework, ref.source_id)
            if pair in seen_refs:
                flag(control.id, "duplicate-source",
                     f"source {ref.framework.value}:{ref.source_id} listed twice")
            seen_refs.add(pair)
        if not ok:
            return
        if expected is not Level.L3:
            if control.operations:
                flag(control.id, "operations-on-non-leaf",
                     "operations are only allowed under level-3 controls")
            child_level = Level.L2 if expected is Level.L1 else Level.L3
            for child in control.children:
                check_control(child, child_level, control.id)
        else:
            if control.children:
                flag(control.id, "children-on-leaf",
                     "level-3 controls may only contain operations")
            for op in control.operations:
                check_operation(op, control.id)

    for goal in catalog.goals:
        if not check_id(goal.id, Level.GOAL, None):
            continue
        for child in goal.children:
            check_control(child, Level.L1, goal.id)

    # Prefix-parent existence over the whole id set (bottom-up integrity).
    for node_id in sorted(all_ids):
        if not is_valid_id(node_id):
            continue
        parent = parent_of(node_id)
        if parent is not None and parent not in all_ids:
            flag(node_id, "orphan-id", f"prefix parent {parent} is absent from the catalog")

    # Canonical duplication rules.
    for control_id, control in controls_by_id.items():
        if control.canonical_id is None:
            continue
        target_id = control.canonical_id
        if target_id == control_id:
            flag(control_id, "canonical-self", "canonical-id points at the control itself")
            continue
        target = controls_by_id.get(target_id)
        if target is None:
            flag(control_id, "canonical-dangling",
                 f"canonical-id {target_id} names no control in the catalog")
            continue
        if is_valid_id(control_id) and is_valid_id(target_id) and \
                derive_level(control_id) is not derive_level(target_id):
            flag(control_id, "canonical-level-mismatch",
                 f"canonical-id {target_id} is at a different level")
        if target.statement != control.statement:
            flag(control_id, "canonical-statement-mismatch",
                 f"statement differs from canonical control {target_id}")

    deduped = sorted(set(violations), key=lambda v: (v.node, v.rule, v.message))
    return deduped
