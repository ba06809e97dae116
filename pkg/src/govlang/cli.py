"""Command-line front end: parse, validate, simulate, ingest.

Machine output goes to files or stdout as JSON; human-readable diagnostics
go to stderr.  Exit codes: 0 on success, 1 when error diagnostics were
emitted, 2 on usage problems (unreadable files, bad arguments).  Setting
``GOVLANG_COLOR=0|1`` forces diagnostic coloring off or on.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .diagnostics import Diagnostic, has_errors
from .engine import reports_to_json, run_log, snapshot_to_json
from .ingest import load_mapping, read_webhook_log, translate_log, validate_mapping
from .syntax import parse, parse_policy_text, tokenize
from .syntax.ast import PolicyFile

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2


def _use_color() -> bool:
    forced = os.environ.get("GOVLANG_COLOR")
    if forced == "1":
        return True
    if forced == "0":
        return False
    return sys.stderr.isatty()


def _print_diagnostics(diagnostics: list[Diagnostic]) -> None:
    color = _use_color()
    for diag in diagnostics:
        print(diag.render(color=color), file=sys.stderr)


def _read_text(path: str) -> str | None:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        return None


def _write_text(path: str, text: str) -> bool:
    if path == "-":
        sys.stdout.write(text)
        return True
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {path}: {exc.strerror or exc}", file=sys.stderr)
        return False
    return True


def _load_model(path: str):
    """Returns (model, diagnostics) or (None, None) when the file is unreadable."""
    text = _read_text(path)
    if text is None:
        return None, None
    result = parse_policy_text(text, source=path)
    return result.model if result.ok else None, result.diagnostics


# ---------------------------------------------------------------------------
# Subcommands


def _ast_summary(tree: PolicyFile) -> dict:
    return {
        "scopes": {
            "projects": [p.name for p in tree.projects],
            "activities": [a.name for p in tree.projects for a in p.activities],
            "tasks": [t.name for p in tree.projects for a in p.activities for t in a.tasks],
        },
        "profiles": [p.name for p in tree.profiles],
        "roles": [r.name for r in tree.roles],
        "individuals": [
            {"id": i.name, "kind": "Agent" if i.is_agent else "Human"}
            for i in tree.individuals
        ],
        "policies": [
            {"kind": p.kind, "id": p.name, "scope": p.scope} for p in tree.policies
        ],
    }


def cmd_parse(args: argparse.Namespace) -> int:
    text = _read_text(args.policy_file)
    if text is None:
        return EXIT_USAGE
    result = parse(tokenize(text))
    diagnostics = [
        dataclasses.replace(d, source=args.policy_file) if d.source is None else d
        for d in result.diagnostics
    ]
    _print_diagnostics(diagnostics)
    print(json.dumps(_ast_summary(result.ast), indent=2))
    return EXIT_DIAGNOSTICS if has_errors(diagnostics) else EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    model, diagnostics = _load_model(args.policy_file)
    if diagnostics is None:
        return EXIT_USAGE
    _print_diagnostics(diagnostics)
    if model is not None and not has_errors(diagnostics):
        print("OK")
        return EXIT_OK
    errors = sum(1 for d in diagnostics if d.is_error)
    print(f"{errors} error(s)")
    return EXIT_DIAGNOSTICS


def cmd_simulate(args: argparse.Namespace) -> int:
    model, diagnostics = _load_model(args.policy_file)
    if diagnostics is None:
        return EXIT_USAGE
    _print_diagnostics(diagnostics)
    if model is None or has_errors(diagnostics):
        return EXIT_DIAGNOSTICS
    events_text = _read_text(args.events_file)
    if events_text is None:
        return EXIT_USAGE
    result = run_log(model, events_text, source=args.events_file)
    _print_diagnostics(result.diagnostics)
    if not _write_text(args.report_file, reports_to_json(result.reports)):
        return EXIT_USAGE
    if args.snapshot and not _write_text(args.snapshot, snapshot_to_json(result.store)):
        return EXIT_USAGE
    for report in result.reports:
        outcome = report.final.outcome.value if report.final else report.status
        print(f"{report.collab_id}: {outcome} ({report.policy_id})", file=sys.stderr)
    return EXIT_DIAGNOSTICS if not result.ok else EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    model, diagnostics = _load_model(args.policy)
    if diagnostics is None:
        return EXIT_USAGE
    _print_diagnostics(diagnostics)
    if model is None or has_errors(diagnostics):
        return EXIT_DIAGNOSTICS
    mapping_text = _read_text(args.mapping_file)
    if mapping_text is None:
        return EXIT_USAGE
    try:
        mapping_obj = json.loads(mapping_text)
    except json.JSONDecodeError as exc:
        print(f"error: {args.mapping_file} is not valid JSON: {exc.msg}", file=sys.stderr)
        return EXIT_USAGE
    config, config_diags = load_mapping(mapping_obj)
    config_diags.extend(validate_mapping(config, model))
    webhooks_text = _read_text(args.webhooks_file)
    if webhooks_text is None:
        return EXIT_USAGE
    records, record_diags = read_webhook_log(webhooks_text, source=args.webhooks_file)
    log_text, translate_diags = translate_log(records, config, model)
    all_diags = config_diags + record_diags + translate_diags
    _print_diagnostics(all_diags)
    if not _write_text(args.events_file, log_text):
        return EXIT_USAGE
    errors = sum(1 for d in all_diags if d.is_error)
    print(f"{errors} diagnostic(s) with errors", file=sys.stderr)
    return EXIT_DIAGNOSTICS if errors else EXIT_OK


# ---------------------------------------------------------------------------
# Entry point


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="govlang",
        description="Governance policy toolchain: parse, validate, simulate, ingest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse a policy file and print a structure summary")
    p_parse.add_argument("policy_file")
    p_parse.set_defaults(func=cmd_parse)

    p_validate = sub.add_parser("validate", help="parse and validate a policy file")
    p_validate.add_argument("policy_file")
    p_validate.set_defaults(func=cmd_validate)

    p_sim = sub.add_parser("simulate", help="run an event log through the decision engine")
    p_sim.add_argument("policy_file")
    p_sim.add_argument("events_file")
    p_sim.add_argument("report_file", help="where to write the report array ('-' for stdout)")
    p_sim.add_argument("--format", choices=["json"], default="json")
    p_sim.add_argument("--snapshot", metavar="PATH", help="also dump the final engine state")
    p_sim.set_defaults(func=cmd_simulate)

    p_ing = sub.add_parser("ingest", help="translate recorded webhooks into an event log")
    p_ing.add_argument("webhooks_file")
    p_ing.add_argument("mapping_file")
    p_ing.add_argument("events_file", help="where to write the event log")
    p_ing.add_argument(
        "--policy",
        required=True,
        metavar="POLICY_FILE",
        help="governance model used to validate bindings and size the final tick",
    )
    p_ing.set_defaults(func=cmd_ingest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
