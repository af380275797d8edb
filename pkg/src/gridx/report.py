"""Result tables from a solved planning LP, and construction-time sweeps.

Everything here works on :class:`PlanSolution`, a self-contained summary
that can be written to JSON after a solve and read back for reporting.
Capacities are in MW internally and GW (2 decimals) in tables; energies in
MWh; money in dollars.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .domain import TECH_ORDER, TechKind
from .lp import LpSolution, Status
from .planner import PlanInputs, PlanModel, build_model

log = logging.getLogger(__name__)

MW_PER_GW = 1000.0

CAPEX_KINDS = ("c_gen", "c_trans", "c_stor")
FOM_KINDS = ("C_gen", "C_stor")
VARIABLE_KINDS = ("p_gen",)
CURTAIL_KINDS = ("p_curt_gen", "p_curt_dem")

ENERGY_TERMS = ("generation", "gen_curtailment", "discharge", "charge", "demand", "demand_curtailment")


class NotOptimalError(RuntimeError):
    pass


@dataclass
class PlanSolution:
    """Summary of an optimal plan, per calendar year.

    ``capacity`` and ``new_capacity`` are keyed by technology value
    (e.g. ``"solar"``); ``capacity_by_gen`` by ``"bus,tech"``.
    ``costs`` holds discounted dollars per year for the components
    ``capex``, ``fom``, ``variable`` and ``curtailment``; ``discount``
    the matching discount factors.  ``energy`` holds weighted annual MWh
    for the terms in ``ENERGY_TERMS``.
    """

    status: str
    objective: float
    years: list[int]
    capacity: dict[str, list[float]]
    new_capacity: dict[str, list[float]]
    capacity_by_gen: dict[str, list[float]]
    transmission: list[float]
    new_transmission: list[float]
    storage: list[float]
    new_storage: list[float]
    costs: dict[str, list[float]]
    discount: list[float]
    energy: dict[str, list[float]]
    realized_cf: dict[str, list[float | None]]
    cf_bounds: dict[str, list[float]] = field(default_factory=dict)
    iterations: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PlanSolution":
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PlanSolution":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    @property
    def curtailed_demand(self) -> list[float]:
        return self.energy["demand_curtailment"]


def _require_optimal(sol: LpSolution) -> None:
    if sol.status is not Status.OPTIMAL:
        raise NotOptimalError(f"solution status is {sol.status.value}")


def _values(plan: PlanModel, x: np.ndarray, kind: str) -> np.ndarray:
    blk = plan.vars[kind]
    return x[blk.all_ids()].reshape(blk.shape)


def _clean(v: float) -> float:
    # collapse solver noise such as -0.0 or 1e-13 to exact zero for stable output
    return 0.0 if abs(v) < 1e-9 else float(v)


def _listify(a) -> list[float]:
    return [_clean(v) for v in np.asarray(a, dtype=float).ravel()]


def extract_solution(plan: PlanModel, sol: LpSolution) -> PlanSolution:
    """Summarise an optimal LP solution of a planning model."""
    _require_optimal(sol)
    inputs = plan.inputs
    cfg, topo, rd, dem = inputs.config, inputs.topology, inputs.repdays, inputs.demand
    x = np.asarray(sol.x, dtype=float)
    years = list(cfg.horizon)
    T = len(years)
    gens = list(topo.generators)
    th = [k for k, g in enumerate(gens) if g.tech.is_thermal]
    w = np.asarray(rd.weights, dtype=float)
    hours_per_year = float(w.sum()) * rd.hours

    C_gen = _values(plan, x, "C_gen")
    c_gen = _values(plan, x, "c_gen")
    techs = [t for t in TECH_ORDER if any(g.tech is t for g in gens)]
    capacity, new_capacity = {}, {}
    for tech in techs:
        rows = [k for k, g in enumerate(gens) if g.tech is tech]
        capacity[tech.value] = _listify(C_gen[rows].sum(axis=0))
        new_capacity[tech.value] = _listify(c_gen[rows].sum(axis=0))
    by_gen = {f"{g.bus},{g.tech.value}": _listify(C_gen[k]) for k, g in enumerate(gens)}

    # annual energies, MWh
    p_gen = _values(plan, x, "p_gen")
    gen_th = np.einsum("gtdh,d->gt", p_gen, w)
    gen_rn = np.zeros((len(gens), T))
    for k, g in enumerate(gens):
        if not g.tech.is_thermal:
            gen_rn[k] = C_gen[k] * np.einsum("dh,d->", rd.cf(g.tech)[g.bus], w)
    gen_energy = gen_rn
    gen_energy[th] += gen_th
    curt_gen = np.einsum("gtdh,d->gt", _values(plan, x, "p_curt_gen"), w)
    demand = dem.annual_energy(w)
    energy = {
        "generation": _listify(gen_energy.sum(axis=0)),
        "gen_curtailment": _listify(curt_gen.sum(axis=0)),
        "discharge": _listify(np.einsum("ntdh,d->t", _values(plan, x, "p_disch"), w)),
        "charge": _listify(np.einsum("ntdh,d->t", _values(plan, x, "p_charge"), w)),
        "demand": _listify(demand["base"] + demand["dc"] + demand["em"]),
        "demand_curtailment": _listify(np.einsum("ntdh,d->t", _values(plan, x, "p_curt_dem"), w)),
    }

    # realized capacity factor: delivered energy over available capacity
    realized, bounds = {}, {}
    delivered = gen_energy - curt_gen
    for tech in techs:
        rows = [k for k, g in enumerate(gens) if g.tech is tech]
        cap = C_gen[rows].sum(axis=0)
        # thermal spill is bounded by output, so report gross thermal output
        num = gen_energy[rows].sum(axis=0) if tech.is_thermal else delivered[rows].sum(axis=0)
        realized[tech.value] = [float(n / (hours_per_year * c)) if c > 1e-9 else None for n, c in zip(num, cap)]
        if tech.is_thermal:
            entry = cfg.techs[tech]
            bounds[tech.value] = [entry.f_min, entry.f_max]

    # discounted cost per component and year, straight from the objective
    contrib = plan.model.obj * x
    year_of = plan.vars.year_index()
    costs = {}
    for name, kinds in (("capex", CAPEX_KINDS), ("fom", FOM_KINDS), ("variable", VARIABLE_KINDS), ("curtailment", CURTAIL_KINDS)):
        ids = np.concatenate([plan.vars[k].all_ids() for k in kinds])
        costs[name] = [float(v) for v in np.bincount(year_of[ids], weights=contrib[ids], minlength=T)]

    return PlanSolution(
        status=sol.status.value,
        objective=float(sol.objective),
        years=years,
        capacity=capacity,
        new_capacity=new_capacity,
        capacity_by_gen=by_gen,
        transmission=_listify(_values(plan, x, "C_trans").sum(axis=0)),
        new_transmission=_listify(_values(plan, x, "c_trans").sum(axis=0)),
        storage=_listify(_values(plan, x, "C_stor").sum(axis=0)),
        new_storage=_listify(_values(plan, x, "c_stor").sum(axis=0)),
        costs=costs,
        discount=[cfg.econ.discount_factor(y) for y in years],
        energy=energy,
        realized_cf=realized,
        cf_bounds=bounds,
        iterations=int(sol.iterations),
    )


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    """A labelled 2-D table; ``rows`` pairs a row label with its cells."""

    header: list[str]
    rows: list[tuple[str, list]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for label, cells in self.rows:
            w.writerow([label] + ["" if c is None else c for c in cells])
        return buf.getvalue()

    def row(self, label: str) -> list:
        for name, cells in self.rows:
            if name == label:
                return cells
        raise KeyError(label)


def _check_status(ps: PlanSolution) -> None:
    if ps.status != Status.OPTIMAL.value:
        raise NotOptimalError(f"solution status is {ps.status}")


def _gw(values: Sequence[float]) -> list[float]:
    return [round(v / MW_PER_GW, 2) + 0.0 for v in values]


def capacity_table(ps: PlanSolution) -> Table:
    """Available capacity in GW: one row per technology plus transmission and storage."""
    _check_status(ps)
    rows = []
    for tech in TECH_ORDER:
        values = ps.capacity.get(tech.value, [0.0] * len(ps.years))
        rows.append((tech.value, _gw(values)))
    rows.append(("transmission", _gw(ps.transmission)))
    rows.append(("storage", _gw(ps.storage)))
    return Table(["capacity_gw"] + [str(y) for y in ps.years], rows)


def capacity_factor_table(ps: PlanSolution) -> Table:
    """Realized capacity factor per technology and year (empty where no capacity)."""
    _check_status(ps)
    rows = [(tech, [None if v is None else round(v, 4) for v in vals]) for tech, vals in ps.realized_cf.items()]
    return Table(["capacity_factor"] + [str(y) for y in ps.years], rows)


def cost_breakdown(ps: PlanSolution) -> dict:
    """Per-year CAPEX and OPEX (undiscounted and discounted) and the discounted total.

    OPEX covers fixed O&M, variable cost and curtailment penalties.
    """
    disc = ps.discount
    capex_d = ps.costs["capex"]
    opex_d = [math.fsum(v) for v in zip(ps.costs["fom"], ps.costs["variable"], ps.costs["curtailment"])]
    out = {
        "years": list(ps.years),
        "capex": [c / f for c, f in zip(capex_d, disc)],
        "opex": [o / f for o, f in zip(opex_d, disc)],
        "capex_discounted": capex_d,
        "opex_discounted": opex_d,
        "components_discounted": {k: list(v) for k, v in ps.costs.items()},
    }
    out["total_discounted"] = math.fsum(capex_d) + math.fsum(opex_d)
    return out


def cost_table(ps: PlanSolution) -> Table:
    cb = cost_breakdown(ps)
    rows = [(k, [repr(v) for v in cb[k]]) for k in ("capex", "opex", "capex_discounted", "opex_discounted")]
    return Table(["cost_usd"] + [str(y) for y in ps.years], rows)


def curtailment_report(ps: PlanSolution, demand_cube=None, weights=None) -> list[dict]:
    """Curtailed demand per year in MWh and as a percentage of annual demand.

    The annual demand comes from ``demand_cube`` (with ``weights``) when
    given, else from the summary itself.
    """
    _check_status(ps)
    if demand_cube is not None:
        if weights is None:
            raise ValueError("weights are required with a demand cube")
        parts = demand_cube.annual_energy(weights)
        totals = list(parts["base"] + parts["dc"] + parts["em"])
    else:
        totals = ps.energy["demand"]
    out = []
    for y, cut, tot in zip(ps.years, ps.curtailed_demand, totals):
        out.append({"year": y, "curtailed_mwh": cut, "demand_mwh": float(tot), "percent": 100.0 * cut / tot if tot else 0.0})
    return out


def energy_balance_residual(ps: PlanSolution) -> list[float]:
    """Relative residual of supply minus served demand per year."""
    e = ps.energy
    out = []
    for i in range(len(ps.years)):
        supply = e["generation"][i] - e["gen_curtailment"][i] + e["discharge"][i] - e["charge"][i]
        served = e["demand"][i] - e["demand_curtailment"][i]
        out.append(abs(supply - served) / max(1.0, abs(e["demand"][i])))
    return out


def write_reports(ps: PlanSolution, out_dir) -> list[Path]:
    """Write the CSV tables and a JSON summary into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "capacity.csv": capacity_table(ps).to_csv(),
        "capacity_factor.csv": capacity_factor_table(ps).to_csv(),
        "costs.csv": cost_table(ps).to_csv(),
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "curtailed_mwh", "demand_mwh", "percent"])
    for r in curtailment_report(ps):
        w.writerow([r["year"], repr(r["curtailed_mwh"]), repr(r["demand_mwh"]), repr(r["percent"])])
    files["curtailment.csv"] = buf.getvalue()
    summary = {
        "objective": ps.objective,
        "costs": cost_breakdown(ps),
        "curtailment": curtailment_report(ps),
        "energy_balance_residual": energy_balance_residual(ps),
    }
    files["summary.json"] = json.dumps(summary, indent=2) + "\n"
    paths = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text)
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# construction-time sweep


@dataclass
class SweepRow:
    omega: int
    status: str
    objective: float | None = None
    new_gen_gw: dict[str, float] = field(default_factory=dict)
    new_transmission_gw: float | None = None
    new_storage_gw: float | None = None
    error: str = ""


def _sweep_point(inputs: PlanInputs, tech: TechKind, omega: int, solve_fn) -> SweepRow:
    from .pipeline import with_lead_time

    try:
        point = dataclasses.replace(inputs, config=with_lead_time(inputs.config, tech, omega))
        plan = build_model(point)
        sol = solve_fn(plan.model, point.config.solver)
        if sol.status is not Status.OPTIMAL:
            return SweepRow(omega, sol.status.value, error=sol.message)
        ps = extract_solution(plan, sol)
    except Exception as exc:  # recorded per point; the sweep carries on
        log.warning("sweep point omega=%s failed: %s", omega, exc)
        return SweepRow(omega, "error", error=f"{type(exc).__name__}: {exc}")
    return SweepRow(
        omega,
        ps.status,
        ps.objective,
        {t: round(sum(v) / MW_PER_GW, 6) + 0.0 for t, v in ps.new_capacity.items()},
        round(sum(ps.new_transmission) / MW_PER_GW, 6) + 0.0,
        round(sum(ps.new_storage) / MW_PER_GW, 6) + 0.0,
    )


def sweep_construction_time(
    inputs: PlanInputs,
    tech: TechKind,
    omega_values: Sequence[int],
    max_workers: int = 1,
    solve_fn: Callable | None = None,
) -> list[SweepRow]:
    """Re-plan once per construction time of ``tech``; rows come back in ``omega`` order.

    Every point is an independent build and solve.  A failing point yields a
    row with status ``"error"`` and the message, and the others still run.
    """
    if solve_fn is None:
        from .pipeline import solve_lp as solve_fn
    omegas = [int(o) for o in omega_values]
    if any(o < 0 for o in omegas):
        raise ValueError("construction times must be non-negative")
    if max_workers <= 1:
        return [_sweep_point(inputs, tech, o, solve_fn) for o in omegas]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda o: _sweep_point(inputs, tech, o, solve_fn), omegas))


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    techs = [t.value for t in TECH_ORDER if any(t.value in r.new_gen_gw for r in rows)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "status", "objective"] + [f"new_{t}_gw" for t in techs] + ["new_transmission_gw", "new_storage_gw", "error"])
    for r in rows:
        w.writerow(
            [r.omega, r.status, "" if r.objective is None else repr(r.objective)]
            + ["" if t not in r.new_gen_gw else r.new_gen_gw[t] for t in techs]
            + ["" if r.new_transmission_gw is None else r.new_transmission_gw]
            + ["" if r.new_storage_gw is None else r.new_storage_gw, r.error]
        )
    return buf.getvalue()
