"""Read-mostly HTTP facade over a loaded catalog for the navigator UI.

Endpoints (JSON over HTTP, ETag on GETs):

    GET  /api/health
    GET  /api/tree?depth=N        goal/requirement summaries (default depth 2)
    GET  /api/nodes/{id}          full node detail at any level
    GET  /api/stats               distribution report
    GET  /api/lints               lint diagnostics
    POST /api/checklists          {"selection": [ids]} or {"scenario": {...}}
    POST /api/reload              re-read the catalog file (admin)

Every handler works against one immutable snapshot grabbed at request start;
reloads (POST /api/reload or SIGHUP) publish a fresh snapshot atomically, so
in-flight requests finish on the snapshot they started with.  Static UI
assets, when a directory is supplied, are served beneath ``/``.
"""

from __future__ import annotations

import hashlib
import json
import re
import signal
import sys
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional
from urllib.parse import parse_qs, urlparse

from .canonical import canonical_bytes
from .lint import lint, lints_to_document
from .model import (
    Catalog,
    Control,
    Goal,
    Level,
    Node,
    OperationTask,
    Phase,
    is_valid_id,
    node_index,
    parent_of,
)
from .oscal import load_document, parse_catalog, serialize_catalog
from .profiles import (
    ChecklistFormat,
    MissingControlError,
    checklist_to_document,
    export_checklist,
    generate_checklist,
    scenario_from_document,
    selection_scenario,
)
from .trace import distribution, distribution_to_document

DEFAULT_PORT = 8080
PORT_ENV_VAR = "SECMAP_PORT"


@dataclass(frozen=True)
class CatalogSnapshot:
    """Immutable published state: catalog plus its content digest."""

    catalog: Catalog
    etag: str
    index: dict[str, Node]
    children: dict[str, tuple[Node, ...]]


def make_snapshot(catalog: Catalog) -> CatalogSnapshot:
    etag = hashlib.sha256(serialize_catalog(catalog)).hexdigest()
    children: dict[str, tuple[Node, ...]] = {}
    for goal in catalog.goals:
        children[goal.id] = tuple(goal.children)

    def walk(control: Control) -> None:
        if control.level is Level.L3:
            children[control.id] = tuple(control.operations)
        else:
            children[control.id] = tuple(control.children)
        for child in control.children:
            walk(child)

    for goal in catalog.goals:
        for control in goal.children:
            walk(control)
    return CatalogSnapshot(catalog=catalog, etag=etag,
                           index=node_index(catalog), children=children)


def _node_level(node: Node) -> Level:
    if isinstance(node, Goal):
        return Level.GOAL
    if isinstance(node, OperationTask):
        return Level.OPERATION
    return node.level


def _summary(snapshot: CatalogSnapshot, node: Node) -> dict:
    return {
        "id": node.id,
        "title": node.title,
        "level": _node_level(node).value,
        "child-count": len(snapshot.children.get(node.id, ())),
    }


class NavigatorService:
    """Pure request logic; the HTTP handler is a thin shell around this."""

    def __init__(self, snapshot: Optional[CatalogSnapshot] = None):
        self._lock = threading.Lock()
        self._snapshot = snapshot

    @property
    def snapshot(self) -> Optional[CatalogSnapshot]:
        return self._snapshot

    def publish(self, snapshot: CatalogSnapshot) -> None:
        with self._lock:
            self._snapshot = snapshot

    # Each method returns (http status, document-or-bytes).

    def health(self, snapshot: Optional[CatalogSnapshot]) -> tuple[int, dict]:
        if snapshot is None:
            return 503, {"status": "no-catalog-loaded"}
        return 200, {"status": "ok", "catalog-uuid": snapshot.catalog.uuid,
                     "etag": snapshot.etag}

    def tree(self, snapshot: CatalogSnapshot, depth: int) -> tuple[int, dict]:
        depth = max(1, min(depth, 5))

        def summarize(node: Node, remaining: int) -> dict:
            obj = _summary(snapshot, node)
            kids = snapshot.children.get(node.id, ())
            if remaining > 1 and kids:
                obj["children"] = [summarize(child, remaining - 1) for child in kids]
            return obj

        return 200, {"tree": [summarize(goal, depth) for goal in snapshot.catalog.goals]}

    def node(self, snapshot: CatalogSnapshot, node_id: str) -> tuple[int, dict]:
        node = snapshot.index.get(node_id)
        if node is None:
            return 404, {"error": "not-found", "id": node_id}
        obj: dict[str, Any] = {
            "id": node.id,
            "title": node.title,
            "level": _node_level(node).value,
        }
        parent = parent_of(node.id) if is_valid_id(node.id) else None
        if parent is not None:
            obj["parent"] = parent
        if isinstance(node, Goal):
            obj["description"] = node.description
        elif isinstance(node, Control):
            obj["statement"] = node.statement
            obj["description"] = node.description
            if node.canonical_id is not None:
                obj["canonical-id"] = node.canonical_id
            obj["sources"] = [
                {"framework": ref.framework.value, "source-id": ref.source_id,
                 **({"url": ref.url} if ref.url else {})}
                for ref in node.sources
            ]
            obj["links"] = list(node.links)
        else:
            obj["description"] = node.description
            obj["agents"] = [agent.name for agent in node.agents]
            obj["phase"] = node.phase.value if isinstance(node.phase, Phase) else str(node.phase)
        kids = snapshot.children.get(node.id, ())
        if isinstance(node, Control) and node.level is Level.L3:
            obj["operations"] = [
                {
                    "id": op.id,
                    "title": op.title,
                    "description": op.description,
                    "agents": [agent.name for agent in op.agents],
                    "phase": op.phase.value if isinstance(op.phase, Phase) else str(op.phase),
                }
                for op in node.operations
            ]
        elif not isinstance(node, OperationTask):
            obj["children"] = [_summary(snapshot, child) for child in kids]
        return 200, obj

    def stats(self, snapshot: CatalogSnapshot) -> tuple[int, dict]:
        return 200, distribution_to_document(distribution(snapshot.catalog))

    def lints(self, snapshot: CatalogSnapshot) -> tuple[int, dict]:
        return 200, lints_to_document(lint(snapshot.catalog))

    def checklist(self, snapshot: CatalogSnapshot, payload: Any) -> tuple[int, dict | bytes]:
        if not isinstance(payload, dict):
            return 400, {"error": "invalid-request", "message": "body must be a JSON object"}
        has_selection = "selection" in payload
        has_scenario = "scenario" in payload
        if has_selection == has_scenario:
            return 400, {"error": "invalid-request",
                         "message": "provide exactly one of 'selection' or 'scenario'"}
        try:
            if has_selection:
                selection = payload["selection"]
                if not isinstance(selection, list) or \
                        not all(isinstance(s, str) for s in selection):
                    return 400, {"error": "invalid-request",
                                 "message": "'selection' must be an array of node ids"}
                scenario = selection_scenario(selection)
            else:
                scenario = scenario_from_document(payload["scenario"])
        except ValueError as exc:
            return 400, {"error": "invalid-request", "message": str(exc)}
        try:
            checklist = generate_checklist(scenario, snapshot.catalog)
        except MissingControlError as exc:
            return 422, {"error": "missing-control", "missing-ids": exc.missing}
        fmt = payload.get("format", "json")
        if fmt == "markdown":
            return 200, export_checklist(checklist, ChecklistFormat.MARKDOWN)
        return 200, checklist_to_document(checklist)


class _ServerState:
    def __init__(self, service: NavigatorService, catalog_path: Optional[Path],
                 ui_dir: Optional[Path]):
        self.service = service
        self.catalog_path = catalog_path
        self.ui_dir = ui_dir

    def reload(self) -> tuple[bool, str]:
        """Re-read the catalog file; keep the old snapshot on any failure."""
        if self.catalog_path is None:
            return False, "no catalog path configured"
        try:
            catalog, diagnostics = parse_catalog(load_document(self.catalog_path))
        except (OSError, ValueError) as exc:
            return False, str(exc)
        if catalog is None:
            first = next(d for d in diagnostics if d.severity.value == "error")
            return False, first.render()
        self.service.publish(make_snapshot(catalog))
        return True, "reloaded"


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}

_NODE_PATH_RE = re.compile(r"^/api/nodes/([^/]+)$")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "secmap"

    # Quiet by default; the CLI enables logging via server attribute.
    def log_message(self, fmt: str, *args: Any) -> None:
        if getattr(self.server, "verbose", False):
            sys.stderr.write("%s - %s\n" % (self.address_string(), fmt % args))

    @property
    def state(self) -> _ServerState:
        return self.server.state  # type: ignore[attr-defined]

    def _send(self, status: int, body: bytes, content_type: str,
              etag: Optional[str] = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        if etag is not None:
            self.send_header("ETag", f'"{etag}"')
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, document: Any, etag: Optional[str] = None) -> None:
        self._send(status, canonical_bytes(document), "application/json", etag)

    def _not_modified(self, etag: str) -> None:
        self.send_response(304)
        self.send_header("ETag", f'"{etag}"')
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        url = urlparse(self.path)
        snapshot = self.state.service.snapshot
        if url.path == "/api/health":
            status, doc = self.state.service.health(snapshot)
            self._send_json(status, doc, snapshot.etag if snapshot else None)
            return
        if url.path.startswith("/api/"):
            if snapshot is None:
                self._send_json(503, {"error": "no-catalog-loaded"})
                return
            client_etag = self.headers.get("If-None-Match", "")
            if client_etag.strip('"W/ ') == snapshot.etag:
                self._not_modified(snapshot.etag)
                return
            if url.path == "/api/tree":
                query = parse_qs(url.query)
                try:
                    depth = int(query.get("depth", ["2"])[0])
                except ValueError:
                    self._send_json(400, {"error": "invalid-request",
                                          "message": "depth must be an integer"})
                    return
                status, doc = self.state.service.tree(snapshot, depth)
            elif url.path == "/api/stats":
                status, doc = self.state.service.stats(snapshot)
            elif url.path == "/api/lints":
                status, doc = self.state.service.lints(snapshot)
            else:
                match = _NODE_PATH_RE.match(url.path)
                if match:
                    status, doc = self.state.service.node(snapshot, match.group(1))
                else:
                    status, doc = 404, {"error": "not-found", "path": url.path}
            self._send_json(status, doc, snapshot.etag)
            return
        self._serve_static(url.path)

    def do_POST(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        if url.path == "/api/reload":
            ok, message = self.state.reload()
            self._send_json(200 if ok else 500,
                            {"status": "ok" if ok else "error", "message": message})
            return
        if url.path == "/api/checklists":
            snapshot = self.state.service.snapshot
            if snapshot is None:
                self._send_json(503, {"error": "no-catalog-loaded"})
                return
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            try:
                payload = json.loads(raw.decode("utf-8")) if raw else {}
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._send_json(400, {"error": "invalid-request", "message": str(exc)})
                return
            status, result = self.state.service.checklist(snapshot, payload)
            if isinstance(result, bytes):
                self._send(status, result, "text/markdown; charset=utf-8", snapshot.etag)
            else:
                self._send_json(status, result, snapshot.etag)
            return
        self._send_json(404, {"error": "not-found", "path": url.path})

    def _serve_static(self, raw_path: str) -> None:
        ui_dir = self.state.ui_dir
        if ui_dir is None:
            if raw_path in ("/", "/index.html"):
                self._send(200, b"secmap api: see /api/health\n", "text/plain; charset=utf-8")
                return
            self._send_json(404, {"error": "not-found", "path": raw_path})
            return
        rel = raw_path.lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not-found", "path": raw_path})
            return
        content_type = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)


def make_server(catalog: Catalog, *, port: int = 0, host: str = "127.0.0.1",
                catalog_path: Optional[Path] = None,
                ui_dir: Optional[Path] = None,
                verbose: bool = False) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = NavigatorService(make_snapshot(catalog))
    server = ThreadingHTTPServer((host, port), _Handler)
    server.daemon_threads = True
    server.state = _ServerState(service, catalog_path, ui_dir)  # type: ignore[attr-defined]
    server.verbose = verbose  # type: ignore[attr-defined]
    return server


def serve(catalog: Catalog, *, port: int, host: str = "127.0.0.1",
          catalog_path: Optional[Path] = None, ui_dir: Optional[Path] = None,
          verbose: bool = True) -> None:
    """Run the server until interrupted; SIGHUP reloads the catalog file."""
    server = make_server(catalog, port=port, host=host, catalog_path=catalog_path,
                         ui_dir=ui_dir, verbose=verbose)
    state: _ServerState = server.state  # type: ignore[attr-defined]
    if hasattr(signal, "SIGHUP"):
        signal.signal(signal.SIGHUP, lambda *_: state.reload())
    actual_port = server.server_address[1]
    sys.stderr.write(f"serving catalog on http://{host}:{actual_port} (ETag "
                     f"{state.service.snapshot.etag[:12]})\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
