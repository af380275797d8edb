"""End-to-end glue: files -> representative days -> demand -> LP -> solution."""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

from .cluster import cluster_days, compute_renewable_cf
from .demand import build_demand_cube
from .domain import GridTopology, ScenarioConfig, SolverSettings, TechKind
from .ingest import ProfileMatrix, load_bus_county, load_centroids, load_profiles, load_scenario, load_topology
from .lp import LpModel, LpSolution, solve, solve_external
from .planner import PlanInputs, PlanModel, build_model
from .spatial import RegionMap, build_region_map

log = logging.getLogger(__name__)


def _config(config: ScenarioConfig | str | Path) -> ScenarioConfig:
    cfg = config if isinstance(config, ScenarioConfig) else load_scenario(config)
    if cfg.data_dir is None:
        raise ValueError("scenario has no data_dir")
    return cfg


def load_hourly(config: ScenarioConfig | str | Path) -> tuple[GridTopology, ProfileMatrix, ProfileMatrix | None, ProfileMatrix | None]:
    """Topology, hourly base load and hourly solar/wind capacity factors.

    Capacity factors come from ``cf_*.csv`` when present, otherwise from
    ``gen_*.csv`` divided by the installed capacity at each bus.
    """
    cfg = _config(config)
    d = Path(cfg.data_dir)
    topo = load_topology(d)
    prof = load_profiles(d, known_buses=[b.id for b in topo.buses])
    cfs = {}
    for kind, cf_key, gen_key in ((TechKind.SOLAR, "cf_solar", "gen_solar"), (TechKind.WIND, "cf_wind", "gen_wind")):
        if cf_key in prof:
            cfs[kind] = prof[cf_key]
        elif gen_key in prof:
            caps = {g.bus: g.initial_capacity for g in topo.generators if g.tech is kind}
            cfs[kind] = compute_renewable_cf(prof[gen_key], caps)
    return topo, prof["base_load"], cfs.get(TechKind.SOLAR), cfs.get(TechKind.WIND)


def load_inputs(config: ScenarioConfig | str | Path) -> PlanInputs:
    """Read every input file of a scenario and derive the planning inputs."""
    cfg = _config(config)
    d = Path(cfg.data_dir)
    topo, base_load, cf_solar, cf_wind = load_hourly(cfg)
    repdays = cluster_days(base_load, cf_solar, cf_wind, cfg.clustering)

    region_map = None
    if cfg.demand.psi_dc or cfg.demand.psi_em:
        centroids = load_centroids(d / "county_centroids.csv") if (d / "county_centroids.csv").exists() else {}
        explicit = load_bus_county(d / "bus_county.csv") if (d / "bus_county.csv").exists() else None
        region_map = build_region_map(topo.buses, centroids, cfg.demand.psi_dc, cfg.demand.psi_em, explicit)
    psi_dc = region_map.psi_dc if region_map else {}
    psi_em = region_map.psi_em if region_map else {}
    demand = build_demand_cube(cfg.demand, repdays, psi_dc, psi_em)
    return PlanInputs(cfg, topo, repdays, demand, region_map)


def with_lead_time(config: ScenarioConfig, tech: TechKind, lead_time: int) -> ScenarioConfig:
    """Copy of ``config`` with one technology's construction time replaced."""
    techs = dict(config.techs)
    techs[tech] = dataclasses.replace(techs[tech], lead_time=int(lead_time))
    return dataclasses.replace(config, techs=techs)


def solve_lp(model: LpModel, settings: SolverSettings = SolverSettings(), workdir=None) -> LpSolution:
    if settings.backend == "simplex":
        return solve(model, feas_tol=settings.tolerance, opt_tol=settings.tolerance, max_iters=settings.max_iters)
    if settings.backend == "external":
        if not settings.command:
            raise ValueError("external backend needs solver.command")
        return solve_external(model, settings.command, workdir=workdir)
    raise ValueError(f"unknown solver backend {settings.backend!r}")


def build_and_solve(inputs: PlanInputs) -> tuple[PlanModel, LpSolution]:
    plan = build_model(inputs)
    log.info("model: %d vars, %d rows, %d nonzeros", plan.stats.n_vars, plan.stats.n_constraints, plan.stats.n_nonzeros)
    sol = solve_lp(plan.model, inputs.config.solver)
    log.info("solve: %s after %d iterations", sol.status.value, sol.iterations)
    return plan, sol


__all__ = ["load_hourly", "load_inputs", "with_lead_time", "solve_lp", "build_and_solve", "RegionMap"]
