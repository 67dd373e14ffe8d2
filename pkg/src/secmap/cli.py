"""Command-line interface.

Subcommands: validate, stats, trace, lint, resolve, checklist, serve.
All file arguments accept .json and .yaml/.yml documents.

Exit codes:
  0  success
  1  validation violations, or lint findings under --strict
  2  usage error
  3  I/O or parse error
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

import yaml

from .api import DEFAULT_PORT, PORT_ENV_VAR, serve
from .lint import LintRule, lint, render_lints_json, render_lints_text
from .model import Catalog, validate_catalog
from .oscal import (
    DocumentFormat,
    ParseDiagnostic,
    load_document,
    parse_catalog,
    parse_profile,
    serialize_catalog,
)
from .profiles import (
    ChecklistFormat,
    MissingControlError,
    export_checklist,
    generate_checklist,
    resolve,
    scenario_from_document,
    selection_scenario,
)
from .trace import (
    build_matrix,
    gap_report,
    render_distribution_json,
    render_distribution_text,
    render_trace_text,
    distribution,
    trace_to_document,
)
from .canonical import canonical_bytes

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _print_diagnostics(diagnostics: list[ParseDiagnostic], origin: str) -> None:
    for diagnostic in diagnostics:
        sys.stderr.write(f"{origin}: {diagnostic.render()}\n")


def _load_untyped(path: str):
    """Decode a JSON or YAML file (by extension) into plain data."""
    doc = load_document(path)
    text = doc.data.decode("utf-8")
    if doc.format is DocumentFormat.YAML:
        return yaml.safe_load(text)
    return json.loads(text)


def _load_catalog(path: str, *, validate: bool = True) -> Catalog:
    try:
        doc = load_document(path)
    except (OSError, ValueError) as exc:
        raise _CliError(EXIT_IO, str(exc)) from exc
    catalog, diagnostics = parse_catalog(doc, validate=validate)
    _print_diagnostics(diagnostics, path)
    if catalog is None:
        raise _CliError(EXIT_IO, f"{path}: catalog could not be parsed")
    return catalog


def _write_output(data: bytes, out: Optional[str]) -> None:
    """Write to stdout, or atomically (temp file + rename) to a path."""
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        doc = load_document(args.catalog)
    except (OSError, ValueError) as exc:
        raise _CliError(EXIT_IO, str(exc)) from exc
    catalog, diagnostics = parse_catalog(doc, validate=False)
    _print_diagnostics(diagnostics, args.catalog)
    if catalog is None:
        raise _CliError(EXIT_IO, f"{args.catalog}: catalog could not be parsed")
    violations = validate_catalog(catalog)
    if violations:
        for violation in violations:
            sys.stdout.write(violation.render() + "\n")
        return EXIT_FINDINGS
    sys.stdout.write("valid\n")
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    catalog = _load_catalog(args.catalog)
    report = distribution(catalog)
    if args.format == "json":
        _write_output(render_distribution_json(report), None)
    else:
        sys.stdout.write(render_distribution_text(report))
    return EXIT_OK


def _cmd_trace(args: argparse.Namespace) -> int:
    catalog = _load_catalog(args.catalog)
    matrix = build_matrix(catalog)
    report = gap_report(matrix, catalog) if args.gaps else None
    if args.format == "json":
        _write_output(canonical_bytes(trace_to_document(matrix, report)), None)
    else:
        sys.stdout.write(render_trace_text(matrix, report))
    return EXIT_OK


def _cmd_lint(args: argparse.Namespace) -> int:
    catalog = _load_catalog(args.catalog)
    rules = None
    if args.rules:
        rules = []
        for name in args.rules.split(","):
            try:
                rules.append(LintRule(name.strip()))
            except ValueError:
                valid = ", ".join(rule.value for rule in LintRule)
                raise _CliError(EXIT_USAGE, f"unknown lint rule {name.strip()!r} (valid: {valid})")
    diagnostics = lint(catalog, rules)
    if args.format == "json":
        _write_output(render_lints_json(diagnostics), None)
    else:
        sys.stdout.write(render_lints_text(diagnostics))
    if diagnostics and args.strict:
        return EXIT_FINDINGS
    return EXIT_OK


def _cmd_resolve(args: argparse.Namespace) -> int:
    try:
        doc = load_document(args.profile)
    except (OSError, ValueError) as exc:
        raise _CliError(EXIT_IO, str(exc)) from exc
    profile, diagnostics = parse_profile(doc)
    _print_diagnostics(diagnostics, args.profile)
    if profile is None:
        raise _CliError(EXIT_IO, f"{args.profile}: profile could not be parsed")
    if args.catalog is None:
        raise _CliError(EXIT_IO,
                        f"missing-catalog: profile imports {profile.catalog_ref!r}; "
                        "supply the catalog file with --catalog")
    catalog = _load_catalog(args.catalog)
    try:
        resolved = resolve(profile, catalog)
    except MissingControlError as exc:
        raise _CliError(EXIT_IO, f"missing-control: {', '.join(exc.missing)}") from exc
    _write_output(serialize_catalog(resolved), args.output)
    return EXIT_OK


def _cmd_checklist(args: argparse.Namespace) -> int:
    catalog = _load_catalog(args.catalog)
    if (args.scenario is None) == (args.select is None):
        raise _CliError(EXIT_USAGE, "provide exactly one of --scenario or --select")
    if args.scenario is not None:
        try:
            scenario = scenario_from_document(_load_untyped(args.scenario))
        except (OSError, ValueError) as exc:
            raise _CliError(EXIT_IO, f"{args.scenario}: {exc}") from exc
    else:
        ids = [token.strip() for token in args.select.split(",") if token.strip()]
        scenario = selection_scenario(ids)
    try:
        checklist = generate_checklist(scenario, catalog)
    except MissingControlError as exc:
        raise _CliError(EXIT_IO, f"missing-control: {', '.join(exc.missing)}") from exc
    fmt = ChecklistFormat.MARKDOWN if args.format == "markdown" else ChecklistFormat.JSON
    _write_output(export_checklist(checklist, fmt), args.output)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    catalog_path = Path(args.catalog)
    catalog = _load_catalog(args.catalog)
    port = args.port
    if port is None:
        env_port = os.environ.get(PORT_ENV_VAR)
        if env_port is not None:
            try:
                port = int(env_port)
            except ValueError:
                raise _CliError(EXIT_USAGE, f"{PORT_ENV_VAR} must be an integer, got {env_port!r}")
        else:
            port = DEFAULT_PORT
    ui_dir = Path(args.ui).resolve() if args.ui else None
    if ui_dir is not None and not ui_dir.is_dir():
        raise _CliError(EXIT_IO, f"ui directory not found: {ui_dir}")
    serve(catalog, port=port, host=args.host, catalog_path=catalog_path, ui_dir=ui_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secmap",
        description="Security requirement mapping toolchain: validate, analyze, "
                    "resolve, and serve goal-to-operation catalogs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a catalog's structural invariants")
    p.add_argument("catalog")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("stats", help="distribution of requirements and operations")
    p.add_argument("catalog")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("trace", help="traceability matrix and completion rate")
    p.add_argument("catalog")
    p.add_argument("--gaps", action="store_true", help="include top-down/bottom-up gap lists")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("lint", help="advisory refinement diagnostics")
    p.add_argument("catalog")
    p.add_argument("--rules", help="comma-separated rule names "
                                   "(relevance,overlap,feasibility,custom-agent)")
    p.add_argument("--strict", action="store_true", help="exit 1 when any finding is reported")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("resolve", help="resolve a profile against a catalog")
    p.add_argument("profile")
    p.add_argument("--catalog", required=False)
    p.add_argument("-o", "--output", help="write atomically to this path (default stdout)")
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("checklist", help="generate a scenario checklist")
    p.add_argument("--scenario", help="scenario map JSON file")
    p.add_argument("--select", help="comma-separated node ids (alternative to --scenario)")
    p.add_argument("--catalog", required=True)
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("-o", "--output", help="write atomically to this path (default stdout)")
    p.set_defaults(func=_cmd_checklist)

    p = sub.add_parser("serve", help="serve the navigator HTTP API")
    p.add_argument("--catalog", required=True)
    p.add_argument("--port", type=int, default=None,
                   help=f"listen port (default ${PORT_ENV_VAR} or {DEFAULT_PORT})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of static navigator assets to serve under /")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; surface as-is.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except BrokenPipeError:
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
