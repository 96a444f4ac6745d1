"""Batch front door: run scenarios, replicate over seeds, check against bands.

Commands:
    run        simulate one scenario, write series.csv and report.json
    replicate  run N seeds, write summary.json with per-metric spread
    check      compare a report's steady bands against reference bands
    defaults   print the shipped default scenario

Exit codes: 0 success, 1 validation or band failure, 2 runtime failure.
Output files are written atomically (temp file + rename), so a failed run
leaves no partial artifacts behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .commerce import CLASS_ORDER, ScenarioRunResult, run_scenario
from .engine import NonFiniteStateError
from .metrics import (
    DEFAULT_TAIL_FRACTION,
    DEFAULT_WINDOW,
    METRIC_NAMES,
    MetricReport,
    build_report,
)
from .scenario_io import ScenarioError, default_document, load_scenario_file

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

SEED_ENV_VAR = "STOCKFLOW_SEED"
DEFAULT_CHECK_TOLERANCE = 0.30

_CLASS_COLUMNS = ("arrivals", "browsing", "in_cart", "payers",
                  "exit_no_purchase", "exit_abandoned_cart", "revenue", "cumulative_revenue")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_seed(flag_seed: int | None, file_seed: int) -> int:
    """Flag wins over the environment, the environment over the file."""
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ScenarioError("RANGE_VIOLATION", SEED_ENV_VAR,
                                f"not an integer: {env!r}") from exc
    return file_seed


def _series_csv(run: ScenarioRunResult) -> str:
    header = ["time"]
    for cls in CLASS_ORDER:
        header.extend(f"{cls.value}_{column}" for column in _CLASS_COLUMNS)
    header.extend(["aggregate_revenue", "aggregate_cumulative_revenue"])

    columns: list[np.ndarray] = [run.times]
    for cls in CLASS_ORDER:
        series = run.classes[cls]
        columns.extend([
            series.arrivals, series.browsing, series.in_cart, series.payers,
            series.exit_no_purchase, series.exit_abandoned_cart, series.revenue,
            np.cumsum(series.revenue),
        ])
    aggregate = run.revenue
    columns.extend([aggregate, np.cumsum(aggregate)])

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([repr(float(value)) for value in row])
    return buffer.getvalue()


def _report_json(report: MetricReport, scenario_path: str) -> str:
    payload = {
        "schema_version": 1,
        "scenario_path": scenario_path,
        "version": __version__,
    }
    payload.update(report.summary())
    return json.dumps(payload, indent=2) + "\n"


def _widened(lo: float, hi: float, tolerance: float) -> tuple[float, float]:
    return lo - tolerance * abs(lo), hi + tolerance * abs(hi)


def _load_reference_bands(path: Path) -> dict:
    document = json.loads(path.read_text("utf-8"))
    if isinstance(document, dict) and "reference_bands" in document:
        return document["reference_bands"]
    return document


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    scenario, _ = load_scenario_file(args.scenario)
    seed = _resolve_seed(args.seed, scenario.sim.seed)
    run = run_scenario(scenario, seed=seed)
    report = build_report(run, window=args.window, tail_fraction=args.tail_fraction)

    out = Path(args.out)
    _atomic_write(out / "series.csv", _series_csv(run))
    _atomic_write(out / "report.json", _report_json(report, str(args.scenario)))
    print(f"wrote {out / 'series.csv'} and {out / 'report.json'} (seed {seed})")
    return EXIT_OK


def cmd_replicate(args: argparse.Namespace) -> int:
    if args.seeds < 1:
        raise ScenarioError("RANGE_VIOLATION", "--seeds", f"must be >= 1, got {args.seeds}")
    scenario, reference = load_scenario_file(args.scenario)
    base_seed = _resolve_seed(args.base_seed, scenario.sim.seed)

    means: dict[str, dict[str, list[float]]] = {}
    for offset in range(args.seeds):
        run = run_scenario(scenario, seed=base_seed + offset)
        report = build_report(run, window=args.window, tail_fraction=args.tail_fraction)
        for label, group in report.groups.items():
            for metric in METRIC_NAMES:
                means.setdefault(label, {}).setdefault(metric, []).append(group.steady_means[metric])

    summary: dict = {
        "schema_version": 1,
        "n_runs": args.seeds,
        "base_seed": base_seed,
        "window": args.window,
        "tail_fraction": args.tail_fraction,
        "metrics": {},
    }
    for label, per_metric in means.items():
        summary["metrics"][label] = {
            metric: {
                "mean": float(np.mean(values)),
                "min": float(np.min(values)),
                "max": float(np.max(values)),
            }
            for metric, values in per_metric.items()
        }

    if reference:
        checks = {}
        for metric, per_class in reference.items():
            for label, (lo, hi) in per_class.items():
                widened = _widened(lo, hi, args.tolerance)
                value = summary["metrics"][label][metric]["mean"]
                checks[f"{metric}.{label}"] = {
                    "reference": [lo, hi],
                    "tolerance": args.tolerance,
                    "mean": value,
                    "pass": bool(widened[0] <= value <= widened[1]),
                }
        summary["reference_checks"] = checks

    out = Path(args.out)
    _atomic_write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    print(f"wrote {out / 'summary.json'} ({args.seeds} runs from seed {base_seed})")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    report = json.loads(Path(args.report).read_text("utf-8"))
    reference = _load_reference_bands(Path(args.reference))

    rows = []
    failures = 0
    for metric, per_class in reference.items():
        for label, (lo, hi) in per_class.items():
            group = report.get("groups", {}).get(label)
            if group is None or metric not in group.get("bands", {}):
                rows.append((metric, label, "MISSING", None))
                failures += 1
                continue
            band = group["bands"][metric]
            wide_lo, wide_hi = _widened(lo, hi, args.tolerance)
            ok = wide_lo <= band[0] and band[1] <= wide_hi
            rows.append((metric, label, "PASS" if ok else "FAIL", band))
            if not ok:
                failures += 1

    width = max(len(f"{metric}.{label}") for metric, label, _, _ in rows) if rows else 0
    for metric, label, verdict, band in rows:
        name = f"{metric}.{label}".ljust(width)
        detail = "" if band is None else f" band=[{band[0]:.6g}, {band[1]:.6g}]"
        ref = reference[metric][label]
        print(f"{verdict:4s} {name} reference=[{ref[0]}, {ref[1]}] tol={args.tolerance}{detail}")
    if failures:
        print(f"{failures} of {len(rows)} checks failed")
        return EXIT_INVALID
    print(f"all {len(rows)} checks passed")
    return EXIT_OK


def cmd_defaults(_: argparse.Namespace) -> int:
    print(json.dumps(default_document(), indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stockflow",
        description="Stochastic stock-and-flow simulation of e-commerce shopper behavior.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one scenario and write series.csv + report.json")
    run_p.add_argument("--scenario", required=True, help="path to a *.scenario.json file")
    run_p.add_argument("--seed", type=int, default=None,
                       help=f"run seed; falls back to ${SEED_ENV_VAR}, then the scenario file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                       help="trailing-average window in steps (default %(default)s)")
    run_p.add_argument("--tail-fraction", type=float, default=DEFAULT_TAIL_FRACTION,
                       help="fraction of the series used for steady bands (default %(default)s)")
    run_p.set_defaults(handler=cmd_run)

    rep_p = sub.add_parser("replicate", help="run many seeds and summarize the spread")
    rep_p.add_argument("--scenario", required=True)
    rep_p.add_argument("--seeds", type=int, required=True, help="number of runs")
    rep_p.add_argument("--base-seed", type=int, default=None,
                       help=f"first seed; falls back to ${SEED_ENV_VAR}, then the scenario file")
    rep_p.add_argument("--out", required=True)
    rep_p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    rep_p.add_argument("--tail-fraction", type=float, default=DEFAULT_TAIL_FRACTION)
    rep_p.add_argument("--tolerance", type=float, default=DEFAULT_CHECK_TOLERANCE,
                       help="relative widening applied to reference bands (default %(default)s)")
    rep_p.set_defaults(handler=cmd_replicate)

    check_p = sub.add_parser("check", help="compare a report against reference bands")
    check_p.add_argument("--report", required=True, help="report.json from a run")
    check_p.add_argument("--reference", required=True,
                         help="reference bands file (or a scenario file carrying reference_bands)")
    check_p.add_argument("--tolerance", type=float, default=0.0,
                         help="relative widening applied to reference bands (default %(default)s)")
    check_p.set_defaults(handler=cmd_check)

    def_p = sub.add_parser("defaults", help="print the default scenario document")
    def_p.set_defaults(handler=cmd_defaults)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonFiniteStateError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
