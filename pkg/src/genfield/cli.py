"""`genfield` command line: run verification suites from a JSON config.

Exit codes: 0 when every non-evidence suite passes, 1 on a suite failure,
2 when the config fails the schema gate, 3 on an internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .config import FORMAT_VERSION, SCHEMA, SUITE_IDS, ConfigError, RunConfig, load
from .suites import SUITES, SuiteContext, SuiteResult

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_INTERNAL = 0, 1, 2, 3


def fmt(value):
    """Fixed-format rendering so reports are byte-stable."""
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (complex, np.complexfloating)):
        v = complex(value)
        return f"{v.real:.6e}{v.imag:+.6e}j"
    if isinstance(value, (int, np.integer)):
        return int(value)
    return f"{float(value):.6e}"


def _record(res: SuiteResult) -> dict:
    return {
        "suite": res.suite,
        "status": res.status,
        "quantities": [
            {"name": q.name, "measured": fmt(q.measured), "predicted": fmt(q.predicted),
             "tol": fmt(q.tol), "pass": bool(q.passed)}
            for q in res.quantities
        ],
        "notes": list(res.notes),
    }


def run(config: RunConfig, suite_ids=None) -> tuple[dict, int]:
    """Execute the selected suites; returns (report, exit code)."""
    ids = sorted(suite_ids) if suite_ids else list(config.suites)
    ctx = SuiteContext(config)
    records, runtime = [], {}
    t_start = time.perf_counter()
    for sid in ids:
        fn, _ = SUITES[sid]
        t0 = time.perf_counter()
        try:
            rec = _record(fn(ctx))
        except Exception as exc:  # reported, mapped to exit 3
            rec = {"suite": sid, "status": "error", "quantities": [],
                   "notes": [f"{type(exc).__name__}: {exc}"]}
            traceback.print_exc(file=sys.stderr)
        runtime[sid] = round(time.perf_counter() - t0, 3)
        records.append(rec)
    records.sort(key=lambda r: r["suite"])
    statuses = [r["status"] for r in records]
    if "error" in statuses:
        code = EXIT_INTERNAL
    elif "fail" in statuses:
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    report = {
        "format_version": FORMAT_VERSION,
        "artifact_version": __version__,
        "config": config.echo(),
        "records": records,
        "summary": {s: statuses.count(s) for s in ("pass", "evidence", "fail", "error")},
        "exit_code": code,
        "runtime": {
            "suites_s": runtime,
            "total_s": round(time.perf_counter() - t_start, 3),
            "kernel_backend": _kernels.backend(),
        },
    }
    return report, code


def payload(report: dict) -> dict:
    """Report without the runtime section; this part is reproducible."""
    return {k: v for k, v in report.items() if k != "runtime"}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "quantity", "measured", "predicted", "tol", "pass"])
    for rec in report["records"]:
        for q in rec["quantities"]:
            w.writerow([rec["suite"], q["name"], q["measured"], q["predicted"], q["tol"], q["pass"]])
    return buf.getvalue()


def _cmd_run(args) -> int:
    try:
        config = load(args.config)
    except ConfigError as exc:
        print(f"genfield: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    unknown = [s for s in args.suite or [] if s not in SUITES]
    if unknown:
        print(f"genfield: unknown suite id(s) {unknown}; see `genfield list-suites`", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        report, code = run(config, args.suite)
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL
    text = dumps(report)
    out = args.out or config.report_path
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    csv_path = args.csv or config.csv_path
    if csv_path:
        Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
        Path(csv_path).write_text(to_csv(report))
    for rec in report["records"]:
        t = report["runtime"]["suites_s"].get(rec["suite"], 0.0)
        print(f"{rec['status'].upper():8s} {rec['suite']:14s} {t:7.2f}s", file=sys.stderr)
        for note in rec["notes"][:3]:
            print(f"         note: {note}", file=sys.stderr)
    return code


def _cmd_schema(args) -> int:
    sys.stdout.write(json.dumps(SCHEMA, indent=2) + "\n")
    return EXIT_OK


def _cmd_list(args) -> int:
    for sid in SUITE_IDS:
        print(f"{sid:14s} {SUITES[sid][1]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genfield", description="Second-quantized free field verification runner.")
    p.add_argument("--version", action="version", version=f"genfield {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run verification suites")
    r.add_argument("--config", required=True, help="path to a JSON run config")
    r.add_argument("--suite", action="append", metavar="ID", help="restrict to this suite (repeatable)")
    r.add_argument("--out", help="report path (default: config output.report or stdout)")
    r.add_argument("--csv", help="also write a flat CSV of quantities")
    r.set_defaults(func=_cmd_run)
    s = sub.add_parser("schema", help="print the config JSON schema")
    s.set_defaults(func=_cmd_schema)
    ls = sub.add_parser("list-suites", help="list suite ids")
    ls.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
