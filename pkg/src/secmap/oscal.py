"""Reader/writer for the extended OSCAL catalog and profile documents.

Documents are JSON (canonical output) or YAML (accepted on input only).
The catalog document mirrors the in-memory model: a top-level ``catalog``
object with ``metadata``, ``groups`` (goals), controls nested three deep,
and an ``operations`` array inside level-3 controls.  Operations carry
their agents and phase as repeatable ``operation-agent`` props plus exactly
one ``operation-phase`` prop.

Fixed serialization order (golden-file friendly):
  catalog: uuid, metadata, groups, back-matter
  group:   id, title, description, controls
  control: id, title, props, parts, links, controls, operations
  operation: id, title, description, props

Source references render as links ``{href, rel: "source", text: "FW:id"}``
(href falls back to a ``#framework`` fragment when the ref has no URL);
plain reference URLs render as ``rel: "related"`` links.  The original
requirement statement is a part named ``statement`` and the interpreted
guidance a part named ``guidance``, so unextended OSCAL tooling can still
read the non-operation content.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import yaml

from .canonical import canonical_bytes
from .model import (
    Agent,
    Catalog,
    CatalogMetadata,
    Control,
    Framework,
    Goal,
    InvalidCatalogError,
    OperationTask,
    Phase,
    SourceRef,
    is_valid_id,
    make_agent,
    parse_phase,
    validate_catalog,
)
from .profiles import Profile, Tailoring


class DocumentFormat(str, Enum):
    JSON = "json"
    YAML = "yaml"


@dataclass(frozen=True)
class RawDocument:
    """Bytes plus how to decode them and where they came from (diagnostics)."""

    data: bytes
    format: DocumentFormat
    origin: str = "<memory>"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    """One finding against a document; ``path`` is a slash-delimited pointer."""

    severity: Severity
    path: str
    message: str

    def render(self) -> str:
        return f"{self.severity.value}: {self.path}: {self.message}"


def load_document(path: str | Path) -> RawDocument:
    """Read a document from disk, inferring the format from the extension."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix in (".yaml", ".yml"):
        fmt = DocumentFormat.YAML
    elif suffix == ".json":
        fmt = DocumentFormat.JSON
    else:
        raise ValueError(f"unsupported document extension: {p.name} (expected .json/.yaml/.yml)")
    return RawDocument(data=p.read_bytes(), format=fmt, origin=str(p))


class _Reader:
    """Walks a decoded document, accumulating diagnostics with pointers."""

    def __init__(self) -> None:
        self.diagnostics: list[ParseDiagnostic] = []

    @property
    def failed(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self.diagnostics)

    def error(self, path: str, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(Severity.ERROR, path, message))

    def warn(self, path: str, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(Severity.WARNING, path, message))

    def decode(self, doc: RawDocument) -> Any:
        try:
            text = doc.data.decode("utf-8")
        except UnicodeDecodeError as exc:
            self.error("/", f"document is not valid UTF-8: {exc}")
            return None
        try:
            if doc.format is DocumentFormat.JSON:
                return json.loads(text)
            return yaml.safe_load(text)
        except Exception as exc:  # json.JSONDecodeError / yaml.YAMLError
            self.error("/", f"syntax error: {exc}")
            return None

    def require_object(self, value: Any, path: str) -> Optional[dict]:
        if not isinstance(value, dict):
            self.error(path, f"expected an object, got {type(value).__name__}")
            return None
        return value

    def require_str(self, obj: dict, key: str, path: str) -> Optional[str]:
        if key not in obj:
            self.error(f"{path}/{key}", f"missing mandatory field {key!r}")
            return None
        value = obj[key]
        if not isinstance(value, str):
            self.error(f"{path}/{key}", f"expected a string, got {type(value).__name__}")
            return None
        return value

    def optional_str(self, obj: dict, key: str, path: str, default: str = "") -> str:
        value = obj.get(key, default)
        if not isinstance(value, str):
            self.error(f"{path}/{key}", f"expected a string, got {type(value).__name__}")
            return default
        return value

    def array(self, obj: dict, key: str, path: str) -> list:
        value = obj.get(key, [])
        if not isinstance(value, list):
            self.error(f"{path}/{key}", f"expected an array, got {type(value).__name__}")
            return []
        return value

    def check_keys(self, obj: dict, allowed: tuple[str, ...], path: str) -> None:
        for key in obj:
            if key not in allowed:
                self.warn(f"{path}/{key}", f"unknown key {key!r} ignored")


_FRAMEWORKS_BY_NAME = {fw.value.lower(): fw for fw in Framework}


def _parse_source_text(text: str, href: str, reader: _Reader, path: str) -> Optional[SourceRef]:
    framework_name, _, source_id = text.partition(":")
    framework = _FRAMEWORKS_BY_NAME.get(framework_name.strip().lower())
    if framework is None:
        reader.error(f"{path}/text", f"unknown source framework {framework_name!r}")
        return None
    if not source_id.strip():
        reader.error(f"{path}/text", "source link text must look like 'FRAMEWORK:source-id'")
        return None
    url = href if href.startswith(("http://", "https://")) else None
    return SourceRef(framework=framework, source_id=source_id.strip(), url=url)


def _read_links(reader: _Reader, raw_links: list, path: str) -> tuple[tuple[SourceRef, ...], tuple[str, ...]]:
    sources: list[SourceRef] = []
    links: list[str] = []
    for i, raw in enumerate(raw_links):
        link_path = f"{path}/links/{i}"
        obj = reader.require_object(raw, link_path)
        if obj is None:
            continue
        rel = reader.optional_str(obj, "rel", link_path, "related")
        href = reader.optional_str(obj, "href", link_path)
        if rel == "source":
            text = reader.require_str(obj, "text", link_path)
            if text is None:
                continue
            ref = _parse_source_text(text, href, reader, link_path)
            if ref is not None:
                sources.append(ref)
        elif rel == "related":
            if not href:
                reader.error(f"{link_path}/href", "related link needs a non-empty href")
            else:
                links.append(href)
        else:
            reader.warn(f"{link_path}/rel", f"unknown link rel {rel!r} ignored")
    return tuple(sources), tuple(links)


def _read_operation(reader: _Reader, raw: Any, path: str) -> Optional[OperationTask]:
    obj = reader.require_object(raw, path)
    if obj is None:
        return None
    reader.check_keys(obj, ("id", "title", "description", "props"), path)
    op_id = reader.require_str(obj, "id", path)
    title = reader.require_str(obj, "title", path)
    description = reader.optional_str(obj, "description", path)
    agents: list[Agent] = []
    phases: list[Phase] = []
    for i, raw_prop in enumerate(reader.array(obj, "props", path)):
        prop_path = f"{path}/props/{i}"
        prop = reader.require_object(raw_prop, prop_path)
        if prop is None:
            continue
        name = reader.require_str(prop, "name", prop_path)
        value = reader.require_str(prop, "value", prop_path)
        if name is None or value is None:
            continue
        if name == "operation-agent":
            if not value.strip():
                reader.error(f"{prop_path}/value", "operation-agent must not be blank")
            else:
                agents.append(make_agent(value))
        elif name == "operation-phase":
            phase = parse_phase(value)
            if phase is None:
                reader.error(f"{prop_path}/value",
                             f"invalid phase {value!r}; expected one of {[p.value for p in Phase]}")
            else:
                phases.append(phase)
        else:
            reader.warn(f"{prop_path}/name", f"unknown prop {name!r} ignored")
    if not agents:
        reader.error(f"{path}/props", "operation needs at least one operation-agent prop")
    if len(phases) != 1:
        reader.error(f"{path}/props",
                     f"operation needs exactly one operation-phase prop, found {len(phases)}")
    if op_id is None or title is None or not agents or len(phases) != 1:
        return None
    return OperationTask(id=op_id, title=title, description=description,
                         agents=tuple(agents), phase=phases[0])


def _read_control(reader: _Reader, raw: Any, path: str) -> Optional[Control]:
    obj = reader.require_object(raw, path)
    if obj is None:
        return None
    reader.check_keys(obj, ("id", "title", "props", "parts", "links", "controls", "operations"), path)
    control_id = reader.require_str(obj, "id", path)
    title = reader.require_str(obj, "title", path)

    canonical_id: Optional[str] = None
    for i, raw_prop in enumerate(reader.array(obj, "props", path)):
        prop_path = f"{path}/props/{i}"
        prop = reader.require_object(raw_prop, prop_path)
        if prop is None:
            continue
        name = reader.optional_str(prop, "name", prop_path)
        value = reader.optional_str(prop, "value", prop_path)
        if name == "canonical-id":
            canonical_id = value
        else:
            reader.warn(f"{prop_path}/name", f"unknown prop {name!r} ignored")

    statement = ""
    description = ""
    for i, raw_part in enumerate(reader.array(obj, "parts", path)):
        part_path = f"{path}/parts/{i}"
        part = reader.require_object(raw_part, part_path)
        if part is None:
            continue
        name = reader.optional_str(part, "name", part_path)
        prose = reader.optional_str(part, "prose", part_path)
        if name == "statement":
            statement = prose
        elif name == "guidance":
            description = prose
        else:
            reader.warn(f"{part_path}/name", f"unknown part {name!r} ignored")

    sources, links = _read_links(reader, reader.array(obj, "links", path), path)

    children = []
    for i, raw_child in enumerate(reader.array(obj, "controls", path)):
        child = _read_control(reader, raw_child, f"{path}/controls/{i}")
        if child is not None:
            children.append(child)

    operations = []
    for i, raw_op in enumerate(reader.array(obj, "operations", path)):
        op = _read_operation(reader, raw_op, f"{path}/operations/{i}")
        if op is not None:
            operations.append(op)

    if control_id is None or title is None:
        return None
    return Control(id=control_id, title=title, statement=statement, description=description,
                   sources=sources, links=links, children=tuple(children),
                   operations=tuple(operations), canonical_id=canonical_id)


def _read_goal(reader: _Reader, raw: Any, path: str) -> Optional[Goal]:
    obj = reader.require_object(raw, path)
    if obj is None:
        return None
    reader.check_keys(obj, ("id", "title", "description", "controls"), path)
    goal_id = reader.require_str(obj, "id", path)
    title = reader.require_str(obj, "title", path)
    description = reader.optional_str(obj, "description", path)
    children = []
    for i, raw_control in enumerate(reader.array(obj, "controls", path)):
        control = _read_control(reader, raw_control, f"{path}/controls/{i}")
        if control is not None:
            children.append(control)
    if goal_id is None or title is None:
        return None
    return Goal(id=goal_id, title=title, description=description, children=tuple(children))


def parse_catalog(doc: RawDocument, *, validate: bool = True) -> tuple[Optional[Catalog], list[ParseDiagnostic]]:
    """Parse a catalog document.

    Returns ``(catalog, diagnostics)``; the catalog is None whenever any
    error-severity diagnostic was produced.  With ``validate`` (the default),
    structural violations surface as error diagnostics located at the
    offending node's document path.
    """
    reader = _Reader()
    root = reader.decode(doc)
    if root is None:
        return None, reader.diagnostics
    root_obj = reader.require_object(root, "/")
    if root_obj is None:
        return None, reader.diagnostics
    reader.check_keys(root_obj, ("catalog",), "/")
    if "catalog" not in root_obj:
        reader.error("/catalog", "missing mandatory top-level 'catalog' object")
        return None, reader.diagnostics
    catalog_obj = reader.require_object(root_obj["catalog"], "/catalog")
    if catalog_obj is None:
        return None, reader.diagnostics
    reader.check_keys(catalog_obj, ("uuid", "metadata", "groups", "back-matter"), "/catalog")

    uuid = reader.require_str(catalog_obj, "uuid", "/catalog")
    metadata_obj = None
    if "metadata" not in catalog_obj:
        reader.error("/catalog/metadata", "missing mandatory field 'metadata'")
    else:
        metadata_obj = reader.require_object(catalog_obj["metadata"], "/catalog/metadata")

    metadata = None
    if metadata_obj is not None:
        reader.check_keys(metadata_obj, ("title", "version", "last-modified", "resolved-from"),
                          "/catalog/metadata")
        title = reader.require_str(metadata_obj, "title", "/catalog/metadata")
        version = reader.require_str(metadata_obj, "version", "/catalog/metadata")
        last_modified = reader.require_str(metadata_obj, "last-modified", "/catalog/metadata")
        resolved_from = metadata_obj.get("resolved-from")
        if resolved_from is not None and not isinstance(resolved_from, str):
            reader.error("/catalog/metadata/resolved-from", "expected a string")
            resolved_from = None
        if title is not None and version is not None and last_modified is not None:
            metadata = CatalogMetadata(title=title, version=version,
                                       last_modified=last_modified, resolved_from=resolved_from)

    goals = []
    for i, raw_goal in enumerate(reader.array(catalog_obj, "groups", "/catalog")):
        goal = _read_goal(reader, raw_goal, f"/catalog/groups/{i}")
        if goal is not None:
            goals.append(goal)

    back_matter: list[SourceRef] = []
    for i, raw in enumerate(reader.array(catalog_obj, "back-matter", "/catalog")):
        bm_path = f"/catalog/back-matter/{i}"
        obj = reader.require_object(raw, bm_path)
        if obj is None:
            continue
        text = reader.require_str(obj, "text", bm_path)
        href = reader.optional_str(obj, "href", bm_path)
        if text is None:
            continue
        ref = _parse_source_text(text, href, reader, bm_path)
        if ref is not None:
            back_matter.append(ref)

    if reader.failed or uuid is None or metadata is None:
        return None, reader.diagnostics

    catalog = Catalog(uuid=uuid, metadata=metadata, goals=tuple(goals),
                      back_matter=tuple(back_matter))

    if validate:
        violations = validate_catalog(catalog)
        if violations:
            paths = _paths_by_id(catalog)
            for violation in violations:
                reader.error(paths.get(violation.node, "/catalog"),
                             f"{violation.rule}: {violation.message}")
            return None, reader.diagnostics

    return catalog, reader.diagnostics


def _paths_by_id(catalog: Catalog) -> dict[str, str]:
    paths: dict[str, str] = {}

    def walk_control(control: Control, path: str) -> None:
        paths[control.id] = path
        for i, child in enumerate(control.children):
            walk_control(child, f"{path}/controls/{i}")
        for i, op in enumerate(control.operations):
            paths[op.id] = f"{path}/operations/{i}"

    for gi, goal in enumerate(catalog.goals):
        goal_path = f"/catalog/groups/{gi}"
        paths[goal.id] = goal_path
        for ci, control in enumerate(goal.children):
            walk_control(control, f"{goal_path}/controls/{ci}")
    return paths


# --- serialization ---------------------------------------------------------


def _source_to_link(ref: SourceRef) -> dict:
    href = ref.url if ref.url else f"#{ref.framework.value.lower()}"
    return {"href": href, "rel": "source", "text": f"{ref.framework.value}:{ref.source_id}"}


def _operation_to_obj(op: OperationTask) -> dict:
    props = [{"name": "operation-agent", "value": agent.name} for agent in op.agents]
    phase = op.phase.value if isinstance(op.phase, Phase) else str(op.phase)
    props.append({"name": "operation-phase", "value": phase})
    return {"id": op.id, "title": op.title, "description": op.description, "props": props}


def _control_to_obj(control: Control) -> dict:
    obj: dict[str, Any] = {"id": control.id, "title": control.title}
    if control.canonical_id is not None:
        obj["props"] = [{"name": "canonical-id", "value": control.canonical_id}]
    parts = []
    if control.statement:
        parts.append({"name": "statement", "prose": control.statement})
    if control.description:
        parts.append({"name": "guidance", "prose": control.description})
    if parts:
        obj["parts"] = parts
    links = [_source_to_link(ref) for ref in control.sources]
    links.extend({"href": url, "rel": "related"} for url in control.links)
    if links:
        obj["links"] = links
    if control.children:
        obj["controls"] = [_control_to_obj(child) for child in control.children]
    if control.operations:
        obj["operations"] = [_operation_to_obj(op) for op in control.operations]
    return obj


def catalog_to_document(catalog: Catalog) -> dict:
    """Plain-dict form of the catalog in canonical key order."""
    metadata: dict[str, Any] = {
        "title": catalog.metadata.title,
        "version": catalog.metadata.version,
        "last-modified": catalog.metadata.last_modified,
    }
    if catalog.metadata.resolved_from is not None:
        metadata["resolved-from"] = catalog.metadata.resolved_from
    body: dict[str, Any] = {"uuid": catalog.uuid, "metadata": metadata}
    body["groups"] = [
        {
            "id": goal.id,
            "title": goal.title,
            "description": goal.description,
            "controls": [_control_to_obj(control) for control in goal.children],
        }
        for goal in catalog.goals
    ]
    if catalog.back_matter:
        body["back-matter"] = [_source_to_link(ref) for ref in catalog.back_matter]
    return {"catalog": body}


def serialize_catalog(catalog: Catalog) -> bytes:
    """Canonical bytes for a valid catalog; equal catalogs yield equal bytes."""
    violations = validate_catalog(catalog)
    if violations:
        raise InvalidCatalogError(violations)
    return canonical_bytes(catalog_to_document(catalog))


# --- profiles ---------------------------------------------------------------


def parse_profile(doc: RawDocument) -> tuple[Optional[Profile], list[ParseDiagnostic]]:
    """Parse a profile document (selection + tailoring over one catalog).

    Duplicate with-ids entries warn and deduplicate (first occurrence wins);
    tailoring targets unknown to the catalog are a resolution-time concern,
    so parsing succeeds without consulting any catalog.
    """
    reader = _Reader()
    root = reader.decode(doc)
    if root is None:
        return None, reader.diagnostics
    root_obj = reader.require_object(root, "/")
    if root_obj is None:
        return None, reader.diagnostics
    reader.check_keys(root_obj, ("profile",), "/")
    if "profile" not in root_obj:
        reader.error("/profile", "missing mandatory top-level 'profile' object")
        return None, reader.diagnostics
    profile_obj = reader.require_object(root_obj["profile"], "/profile")
    if profile_obj is None:
        return None, reader.diagnostics
    reader.check_keys(profile_obj, ("uuid", "metadata", "imports", "modify"), "/profile")

    uuid = reader.require_str(profile_obj, "uuid", "/profile")
    title = ""
    metadata_obj = profile_obj.get("metadata")
    if metadata_obj is not None:
        metadata = reader.require_object(metadata_obj, "/profile/metadata")
        if metadata is not None:
            title = reader.optional_str(metadata, "title", "/profile/metadata")

    imports = reader.array(profile_obj, "imports", "/profile")
    if not imports:
        reader.error("/profile/imports", "profile needs exactly one import")
    elif len(imports) > 1:
        reader.error("/profile/imports", "multi-catalog imports are not supported")

    catalog_ref = ""
    selections: list[str] = []
    seen: set[str] = set()
    if imports:
        import_path = "/profile/imports/0"
        import_obj = reader.require_object(imports[0], import_path)
        if import_obj is not None:
            reader.check_keys(import_obj, ("href", "include-controls"), import_path)
            catalog_ref = reader.optional_str(import_obj, "href", import_path)
            for i, raw_block in enumerate(reader.array(import_obj, "include-controls", import_path)):
                block_path = f"{import_path}/include-controls/{i}"
                block = reader.require_object(raw_block, block_path)
                if block is None:
                    continue
                reader.check_keys(block, ("with-ids",), block_path)
                for j, raw_id in enumerate(reader.array(block, "with-ids", block_path)):
                    id_path = f"{block_path}/with-ids/{j}"
                    if not isinstance(raw_id, str):
                        reader.error(id_path, f"expected a string id, got {type(raw_id).__name__}")
                        continue
                    if not is_valid_id(raw_id):
                        reader.error(id_path, f"malformed node id {raw_id!r}")
                        continue
                    if raw_id in seen:
                        reader.warn(id_path, f"duplicate selection {raw_id} ignored")
                        continue
                    seen.add(raw_id)
                    selections.append(raw_id)

    tailoring: list[Tailoring] = []
    modify_obj = profile_obj.get("modify")
    if modify_obj is not None:
        modify = reader.require_object(modify_obj, "/profile/modify")
        if modify is not None:
            reader.check_keys(modify, ("alters",), "/profile/modify")
            for i, raw_alter in enumerate(reader.array(modify, "alters", "/profile/modify")):
                alter_path = f"/profile/modify/alters/{i}"
                alter = reader.require_object(raw_alter, alter_path)
                if alter is None:
                    continue
                reader.check_keys(alter, ("control-id", "field", "replacement"), alter_path)
                target = reader.require_str(alter, "control-id", alter_path)
                fld = reader.require_str(alter, "field", alter_path)
                replacement = reader.optional_str(alter, "replacement", alter_path)
                if target is None or fld is None:
                    continue
                if not is_valid_id(target):
                    reader.error(f"{alter_path}/control-id", f"malformed node id {target!r}")
                    continue
                if fld not in ("title", "description"):
                    reader.error(f"{alter_path}/field",
                                 f"field must be 'title' or 'description', got {fld!r}")
                    continue
                tailoring.append(Tailoring(target=target, field=fld, replacement=replacement))

    if reader.failed or uuid is None:
        return None, reader.diagnostics
    profile = Profile(uuid=uuid, title=title, catalog_ref=catalog_ref,
                      selections=tuple(selections), tailoring=tuple(tailoring))
    return profile, reader.diagnostics


def profile_to_document(profile: Profile) -> dict:
    body: dict[str, Any] = {"uuid": profile.uuid}
    if profile.title:
        body["metadata"] = {"title": profile.title}
    body["imports"] = [
        {
            "href": profile.catalog_ref,
            "include-controls": [{"with-ids": list(profile.selections)}],
        }
    ]
    if profile.tailoring:
        body["modify"] = {
            "alters": [
                {"control-id": t.target, "field": t.field, "replacement": t.replacement}
                for t in profile.tailoring
            ]
        }
    return {"profile": body}


def serialize_profile(profile: Profile) -> bytes:
    return canonical_bytes(profile_to_document(profile))
