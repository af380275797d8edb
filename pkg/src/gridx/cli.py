"""Command-line entry point: ``gridx <command> ...``.

Commands follow the pipeline order: ``cluster``, ``demand``, ``build``,
``solve``, ``report`` and ``sweep``.  Every command that needs a scenario
takes ``--scenario`` and falls back to the bundled three-bus toy.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

from .data import toy_scenario_path
from .domain import TechKind
from .lp import Status


def _scenario(args) -> Path:
    return Path(args.scenario) if args.scenario else toy_scenario_path()


def _omegas(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_cluster(args) -> int:
    from .cluster import build_features, cluster_days, clustering_diagnostics
    from .ingest import load_scenario

    cfg = load_scenario(_scenario(args))
    overrides = {k: getattr(args, k) for k in ("k", "seed", "restarts") if getattr(args, k) is not None}
    if overrides:
        cfg = dataclasses.replace(cfg, clustering=dataclasses.replace(cfg.clustering, **overrides))
    _, base_load, cf_solar, cf_wind = _pipeline().load_hourly(cfg)
    if args.diagnostics:
        lo, hi = (int(v) for v in args.diagnostics.split("-"))
        X = build_features(base_load, cf_solar, cf_wind)
        print("k,inertia,silhouette")
        for k, inertia, sil in clustering_diagnostics(X, range(lo, hi + 1), cfg.clustering.seed, cfg.clustering.restarts):
            print(f"{k},{inertia!r},{sil!r}")
        return 0
    rd = cluster_days(base_load, cf_solar, cf_wind, cfg.clustering)
    rd.save(args.out)
    print(f"{rd.k} representative days, weights {[int(w) for w in rd.weights]} -> {args.out}")
    return 0


def cmd_demand(args) -> int:
    inputs = _pipeline().load_inputs(_scenario(args))
    inputs.demand.save(args.out)
    if args.audit_dir:
        audit = Path(args.audit_dir)
        inputs.demand.write_audit(audit)
        if inputs.region_map is not None:
            inputs.region_map.save(audit / "region_map.json")
    peaks = ", ".join(f"{y}: {p / 1000:.2f} GW" for y, p in zip(inputs.demand.years, inputs.demand.peak))
    print(f"peaks {peaks} -> {args.out}")
    return 0


def cmd_build(args) -> int:
    from .lp import write_mps
    from .planner import build_model

    inputs = _pipeline().load_inputs(_scenario(args))
    t0 = time.perf_counter()
    plan = build_model(inputs)
    elapsed = time.perf_counter() - t0
    if args.out:
        write_mps(plan.model, args.out)
    if args.provenance:
        plan.write_provenance(args.provenance)
    stats = json.dumps(plan.stats.to_dict())
    if args.stats:
        Path(args.stats).write_text(stats + "\n")
    print(f"{stats} built in {elapsed:.3f} s")
    return 0


def cmd_solve(args) -> int:
    from .lp import write_mps
    from .report import extract_solution

    pipeline = _pipeline()
    inputs = pipeline.load_inputs(_scenario(args))
    plan, sol = pipeline.build_and_solve(inputs)
    if args.mps:
        write_mps(plan.model, args.mps)
    if not sol.optimal:
        print(f"solver status: {sol.status.value} {sol.message}".rstrip(), file=sys.stderr)
        return 2
    ps = extract_solution(plan, sol)
    ps.save(args.out)
    print(f"objective {ps.objective!r} after {sol.iterations} iterations -> {args.out}")
    return 0


def cmd_report(args) -> int:
    from .report import PlanSolution, capacity_table, write_reports

    ps = PlanSolution.load(args.solution)
    paths = write_reports(ps, args.out_dir)
    print(capacity_table(ps).to_csv(), end="")
    print(f"wrote {len(paths)} files to {args.out_dir}")
    return 0


def cmd_sweep(args) -> int:
    from .report import sweep_construction_time, sweep_csv

    inputs = _pipeline().load_inputs(_scenario(args))
    rows = sweep_construction_time(inputs, TechKind.parse(args.tech), args.omega, max_workers=args.workers)
    text = sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0 if all(r.status == Status.OPTIMAL.value for r in rows) else 2


def _pipeline():
    from . import pipeline

    return pipeline


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridx", description="Grid capacity expansion planning")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_scenario(sp):
        sp.add_argument("--scenario", help="scenario JSON (default: bundled toy)")
        return sp

    sp = with_scenario(sub.add_parser("cluster", help="pick representative days"))
    sp.add_argument("--k", type=int, help="number of representative days")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--out", default="repdays.json")
    sp.add_argument("--diagnostics", metavar="KMIN-KMAX", help="print inertia and silhouette for a range of k instead")
    sp.set_defaults(func=cmd_cluster)

    sp = with_scenario(sub.add_parser("demand", help="synthesize demand and write audit tables"))
    sp.add_argument("--out", default="demand_cube.npz", help="binary demand cube")
    sp.add_argument("--audit-dir", help="also write one CSV per year and the region map")
    sp.set_defaults(func=cmd_demand)

    sp = with_scenario(sub.add_parser("build", help="build the planning LP"))
    sp.add_argument("--out", help="write the model as free-format MPS")
    sp.add_argument("--stats", help="write variable/row/nonzero counts as JSON")
    sp.add_argument("--provenance", help="write one JSON line per row (rows.jsonl)")
    sp.set_defaults(func=cmd_build)

    sp = with_scenario(sub.add_parser("solve", help="build and solve, write a solution summary"))
    sp.add_argument("--out", default="solution.json")
    sp.add_argument("--mps", help="also write the model as MPS")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("report", help="tables from a solution summary")
    sp.add_argument("--solution", required=True)
    sp.add_argument("--out-dir", default="reports")
    sp.set_defaults(func=cmd_report)

    sp = with_scenario(sub.add_parser("sweep", help="re-plan over construction times of one technology"))
    sp.add_argument("--tech", required=True)
    sp.add_argument("--omega", required=True, type=_omegas, help="comma-separated construction times in years")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="CSV path")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"gridx {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
