"""Command-line interface: suite generation, the live service, headless
simulation, analysis, statistics, replay and schema validation."""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import sys
from pathlib import Path
from typing import Optional

from .analytics import (
    AnalyticsError,
    SessionData,
    fit_experience_curve,
    kruskal_wallis,
    pairwise_tests,
    summarize,
    switch_times,
)
from .backends import PrErrorModel
from .domain import Catalog, DomainError, default_catalog, parse_grasp
from .sequencer import SequenceError, Suite, SuiteConfig, generate_suite
from .session import SessionConfig, SessionError, load_session_data, replay_log
from .server import ServiceConfig, run_service
from .simulate import SimConfig, SimulationError, UserModel, run_experiment, sessions_to_data
from .wire import WireError


def _load_base_config(path: Optional[str]) -> SessionConfig:
    if path is None:
        return SessionConfig()
    return SessionConfig.from_dict(json.loads(Path(path).read_text()))


def _collect_logs(paths: list[str]) -> list[Path]:
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(q for q in p.glob("*.jsonl") if not q.name.endswith(".commands.jsonl")))
        else:
            out.append(p)
    if not out:
        raise SessionError("no session logs found")
    return out


def _load_sessions(paths: list[str]) -> list[SessionData]:
    return [load_session_data(p) for p in _collect_logs(paths)]


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_gen_suite(args) -> int:
    catalog = Catalog.load(args.catalog) if args.catalog else default_catalog()
    config = SuiteConfig(
        n_sets=args.sets,
        seed=args.seed,
        balance_tolerance=args.balance_tolerance,
        max_attempts=args.max_attempts,
        initial_grasp=parse_grasp(args.initial),
    )
    suite = generate_suite(config, catalog)
    suite.save(args.out)
    deviation = suite.max_relative_deviation()
    print(f"wrote {args.out}: {args.sets} sets, max step-frequency deviation {deviation:.3f}")
    return 0


def cmd_validate(args) -> int:
    failures = 0
    if args.suite:
        try:
            Suite.load(args.suite)
            print(f"{args.suite}: ok")
        except (SequenceError, DomainError, json.JSONDecodeError) as e:
            print(f"{args.suite}: INVALID: {e}", file=sys.stderr)
            failures += 1
    for raw in args.log or []:
        try:
            load_session_data(raw)
            print(f"{raw}: ok")
        except (SessionError, DomainError, KeyError, json.JSONDecodeError) as e:
            print(f"{raw}: INVALID: {e}", file=sys.stderr)
            failures += 1
    if not args.suite and not args.log:
        print("nothing to validate: pass --suite and/or --log", file=sys.stderr)
        return 2
    return 1 if failures else 0


def cmd_simulate(args) -> int:
    suite = Suite.load(args.suite)
    kinds = ("i-gsi", "pr", "fsm", "app") if args.gsis == "all" else tuple(args.gsis.split(","))
    sim = SimConfig(
        n_subjects=args.subjects,
        gsi_kinds=kinds,
        feedback_enabled=not args.no_feedback,
        max_corrections=args.max_corrections,
        seed=args.seed,
        gaze_rate_hz=args.rate,
        set_indices=tuple(range(1, args.sets + 1)) if args.sets else None,
    )
    import dataclasses

    model = UserModel(pattern_error_prob=args.error_prob, learning_b=args.learning_b)
    models = {f"vs{i + 1:02d}": dataclasses.replace(model, rng_seed=i + 1) for i in range(args.subjects)}
    out_dir = Path(args.out_dir) if args.out_dir else None
    sessions = run_experiment(sim, suite, models=models, write_dir=out_dir)
    n_trials = sum(len(s.records) for s in sessions)
    where = f" under {out_dir}" if out_dir else ""
    print(f"simulated {len(sessions)} sessions, {n_trials} scored trials{where}")
    return 0


def cmd_analyze(args) -> int:
    sessions = _load_sessions(args.logs)
    report = summarize(sessions, le_anchor=args.anchor, le_sets=args.le_sets)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    if args.csv_dir:
        _write_csv_tables(report, Path(args.csv_dir))
        print(f"wrote CSV tables under {args.csv_dir}")
    if args.plots_dir:
        _write_plot_series(report, sessions, Path(args.plots_dir))
        print(f"wrote plot data series under {args.plots_dir}")
    return 0


def cmd_fit_le(args) -> int:
    sessions = _load_sessions(args.logs)
    by_kind: dict[str, list[SessionData]] = {}
    for s in sessions:
        by_kind.setdefault(s.gsi_kind, []).append(s)
    kinds = [args.gsi] if args.gsi else sorted(by_kind)
    for kind in kinds:
        group = by_kind.get(kind)
        if not group:
            print(f"{kind}: no sessions", file=sys.stderr)
            return 1
        per_set: dict[int, list[float]] = {}
        for s in group:
            per_set.setdefault(s.set_index, []).extend(switch_times(s.records))
        if args.le_sets == "tryout":
            keep = sorted(per_set)[-10:]
            per_set = {k: per_set[k] for k in keep}
        agg = (lambda v: sum(v) / len(v)) if args.anchor == "mean" else (lambda v: sorted(v)[len(v) // 2])
        points = [(float(k), float(agg(v))) for k, v in sorted(per_set.items()) if v]
        fit = fit_experience_curve(points)
        print(
            f"{kind}: LE {fit.le_percent:.2f}% (k={fit.k:.3f}, n={fit.n:.4f}, "
            f"r2={fit.r_squared:.4f}, {fit.n_points} sets)"
        )
    return 0


def cmd_stats(args) -> int:
    sessions = _load_sessions(args.logs)
    groups: dict[str, list[float]] = {}
    if args.by == "gsi":
        for s in sessions:
            groups.setdefault(s.gsi_kind, []).extend(switch_times(s.records))
    else:
        for s in sessions:
            if args.gsi and s.gsi_kind != args.gsi:
                continue
            for r in s.records:
                if r.correct and r.st_ms is not None:
                    groups.setdefault(r.target_grasp.value, []).append(r.st_seconds)
    groups = {k: v for k, v in groups.items() if v}
    if len(groups) < 2:
        print("need at least two non-empty groups", file=sys.stderr)
        return 1
    overall = kruskal_wallis(list(groups.values()), exact=args.exact)
    matrix = pairwise_tests(groups)
    out = {
        "groups": {k: len(v) for k, v in sorted(groups.items())},
        "kruskal_wallis": overall.to_dict(),
        "pairwise_bonferroni": {f"{a}|{b}": p for (a, b), p in sorted(matrix.items())},
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    failures = 0
    for raw in args.log:
        result = replay_log(raw)
        status = "ok" if result.ok else "DIVERGED"
        print(f"{raw}: {status} ({len(result.records)} records)")
        if not result.ok:
            print(f"  {result.describe()}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


def cmd_serve(args) -> int:
    base = _load_base_config(args.config)
    suite = Suite.load(args.suite) if args.suite else None
    config = ServiceConfig(
        base=base,
        suite=suite,
        log_dir=Path(args.log_dir) if args.log_dir else None,
        sink_spec=args.sink,
    )

    def ready(host: str, port: int) -> None:
        print(f"listening on {host}:{port}", flush=True)

    try:
        asyncio.run(run_service(config, args.host, args.port, ready))
    except KeyboardInterrupt:
        pass
    return 0


# --------------------------------------------------------------------------
# Report export helpers
# --------------------------------------------------------------------------

def _write_csv_tables(report: dict, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "per_gsi.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gsi", "n_trials", "ssr", "median_st", "q1", "q3", "le_percent", "grasp_kw_p"])
        for kind, entry in sorted(report["per_gsi"].items()):
            st = entry.get("st") or {}
            exp = (entry.get("experience") or {}).get("fit") or {}
            writer.writerow([
                kind,
                entry["n_trials"],
                entry.get("ssr"),
                st.get("median"),
                st.get("q1"),
                st.get("q3"),
                exp.get("le_percent"),
                entry.get("grasp_kw_p"),
            ])
    with open(directory / "per_grasp.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gsi", "grasp", "n", "median_st", "q1", "q3"])
        for kind, entry in sorted(report["per_gsi"].items()):
            for grasp, stats in sorted(entry["per_grasp_st"].items()):
                writer.writerow([
                    kind, grasp, stats.get("n"), stats.get("median"), stats.get("q1"), stats.get("q3"),
                ])


def _write_plot_series(report: dict, sessions: list[SessionData], directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "st_boxplot.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gsi", "min", "q1", "median", "q3", "max", "n"])
        for kind, entry in sorted(report["per_gsi"].items()):
            st = entry.get("st")
            if st:
                writer.writerow([kind, st["min"], st["q1"], st["median"], st["q3"], st["max"], st["n"]])
    for kind, entry in sorted(report["per_gsi"].items()):
        exp = entry.get("experience")
        if not exp:
            continue
        fit = exp["fit"]
        with open(directory / f"experience_{kind}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["set_index", "st", "fitted"])
            for x, y in exp["points"]:
                writer.writerow([x, y, fit["k"] * x ** fit["n"]])
    steps_rows = [
        (r.steps_required, r.st_seconds, s.gsi_kind)
        for s in sessions
        for r in s.records
        if r.steps_required and r.correct and r.st_ms is not None
    ]
    if steps_rows:
        with open(directory / "st_by_steps.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["steps", "st", "gsi"])
            writer.writerows(steps_rows)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graspbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-suite", help="generate a balanced presentation suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sets", type=int, default=30)
    p.add_argument("--out", default="suite.json")
    p.add_argument("--catalog", default=None, help="catalog JSON (default: built-in)")
    p.add_argument("--balance-tolerance", type=float, default=0.10)
    p.add_argument("--max-attempts", type=int, default=1000)
    p.add_argument("--initial", default="Cylindrical")
    p.set_defaults(func=cmd_gen_suite)

    p = sub.add_parser("validate", help="schema-check a suite and/or session logs")
    p.add_argument("--suite", default=None)
    p.add_argument("--log", action="append", default=[])
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run synthetic subjects over a suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--subjects", type=int, default=8)
    p.add_argument("--gsis", default="all", help="'all' or comma list of i-gsi,pr,fsm,app")
    p.add_argument("--sets", type=int, default=None, help="only the first N sets")
    p.add_argument("--out-dir", default=None, help="write one JSONL log per session")
    p.add_argument("--no-feedback", action="store_true")
    p.add_argument("--max-corrections", type=int, default=3)
    p.add_argument("--error-prob", type=float, default=0.0)
    p.add_argument("--learning-b", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=50.0, help="simulated gaze rate (Hz)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="aggregate logs into a summary report")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--csv-dir", default=None)
    p.add_argument("--plots-dir", default=None)
    p.add_argument("--anchor", choices=("mean", "median"), default="mean")
    p.add_argument("--le-sets", choices=("all", "tryout"), default="all")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit-le", help="experience-curve fit per GSI")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--gsi", default=None)
    p.add_argument("--anchor", choices=("mean", "median"), default="mean")
    p.add_argument("--le-sets", choices=("all", "tryout"), default="all")
    p.set_defaults(func=cmd_fit_le)

    p = sub.add_parser("stats", help="rank tests over logs")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--by", choices=("gsi", "grasp"), default="gsi")
    p.add_argument("--gsi", default=None, help="restrict grasp grouping to one GSI")
    p.add_argument("--exact", action="store_true", help="exact permutation p (small inputs)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replay", help="re-run logs and compare recorded outputs")
    p.add_argument("--log", action="append", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--suite", default=None)
    p.add_argument("--log-dir", default=None)
    p.add_argument("--sink", default="logdir", help="stdout | file:PATH | tcp:HOST:PORT | logdir")
    p.add_argument("--config", default=None, help="JSON config overriding session defaults")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        AnalyticsError,
        DomainError,
        SequenceError,
        SessionError,
        SimulationError,
        WireError,
        FileNotFoundError,
        json.JSONDecodeError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
