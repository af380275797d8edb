"""Multi-period capacity-expansion LP with DC power flow.

Index sets: buses ``N``, lines ``L`` (one per connected pair), generators
``G`` split into thermal ``G_th`` and renewable ``G_rn``, model years
``T``, representative days ``D`` and hours per day ``H``.  ``B_dc``/``B_em``
count buses inside regions with positive data-center / manufacturing share
and ``R_dc``/``R_em`` count those regions.

Columns, in order (entity axis first, then t, d, h)::

    c_gen, C_gen          G x T        new / available generation, MW
    c_trans, C_trans      L x T
    c_stor, C_stor        N x T
    e_init                N x T        storage level before the first hour
    p_gen                 G_th x T x D x H   (renewable output is CF x C_gen)
    p_curt_gen            G x T x D x H
    p_curt_dem            N x T x D x H
    p_trans               L x T x D x H  (free)
    p_charge, p_disch     N x T x D x H
    e_stor                N x T x D x H
    p_DC                  B_dc x T x D x H
    p_EOR                 B_em x T x D x H
    theta                 N x T x D x H  in [-pi, pi], lowest bus fixed at 0

    n_vars = T (2G + 2L + 3N) + TDH (G_th + G + 5N + L + B_dc + B_em)

Rows, in order::

    capacity_link         (G + L + N) T    C_t - sum of matured builds = c0
    peak_adequacy         T
    storage_init_cap      N T
    power_balance         N TDH
    dc_flow               L TDH
    line_limit            2 L TDH
    dc_region, em_region  (R_dc + R_em) TDH
    thermal_min/max       2 G_th TDH
    curtail_cap           G_th TDH     thermal spill <= output
    renewable_avail       G_rn TDH     spill <= CF x C
    ramp_intraday         2 G_th T D (H - 1)
    ramp_interday         2 G_th T (D - 1)
    storage_level         N T D H - N T (D - 1)
    storage_day_link      N T (D - 1)
    storage_energy_cap    N TDH
    charge_limit          N TDH
    discharge_limit       N TDH

    n_rows = T (G + L + 2N + 1) + TDH (5N + 3L + 3 G_th + G_rn + R_dc + R_em)
             + 2 G_th T (DH - 1)

A build whose lead time pushes completion past the horizon still gets a
column; it never enters any available capacity, so its capital cost keeps it
at zero (or its upper bound is set to zero with
``planner.forbid_stranded_investment``).  Representative days are chained in
cluster-id order for the inter-day ramp and storage links.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cluster import RepresentativeDays
from .demand import DemandCube
from .domain import GridTopology, ScenarioConfig, TechKind
from .lp import LpModel, Sense
from .spatial import RegionMap, haversine_miles

# notation symbol -> variable kind
VAR_SYMBOLS: dict[str, str] = {
    "c_gen": "c_gen",
    "c_trans": "c_trans",
    "c_stor": "c_stor",
    "C_gen": "C_gen",
    "C_trans": "C_trans",
    "C_stor": "C_stor",
    "p_gen": "p_gen",
    "p_curt_gen": "p_curt_gen",
    "p_curt_dem": "p_curt_dem",
    "p_trans": "p_trans",
    "p_charge": "p_charge",
    "p_disch": "p_disch",
    "e_stor": "e_stor",
    "p_DC": "p_DC",
    "p_EOR": "p_EOR",
    "theta": "theta",
}

VAR_KINDS = (
    "c_gen",
    "C_gen",
    "c_trans",
    "C_trans",
    "c_stor",
    "C_stor",
    "e_init",
    "p_gen",
    "p_curt_gen",
    "p_curt_dem",
    "p_trans",
    "p_charge",
    "p_disch",
    "e_stor",
    "p_DC",
    "p_EOR",
    "theta",
)
INVESTMENT_KINDS = ("c_gen", "c_trans", "c_stor")

# every constraint family the builder emits
ROW_FAMILIES = (
    "capacity_link",
    "peak_adequacy",
    "storage_init_cap",
    "power_balance",
    "dc_flow",
    "line_limit",
    "dc_region",
    "em_region",
    "thermal_min",
    "thermal_max",
    "curtail_cap",
    "renewable_avail",
    "ramp_intraday",
    "ramp_interday",
    "storage_level",
    "storage_day_link",
    "storage_energy_cap",
    "charge_limit",
    "discharge_limit",
)
# families expressed as column bounds rather than rows
BOUND_FAMILIES = ("build_limit", "angle_limit")


def _label(x) -> str:
    return "_".join(str(x).split())


@dataclass
class Block:
    """A rectangular block of columns or rows with labelled axes."""

    name: str
    tag: str
    start: int
    labels: tuple[tuple[str, ...], ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.labels)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def ids(self, *idx) -> np.ndarray:
        if self.size == 0:
            return np.zeros(np.broadcast(*idx).shape, dtype=np.int64)
        return self.start + np.ravel_multi_index(tuple(np.asarray(i, dtype=np.int64) for i in idx), self.shape)

    def all_ids(self) -> np.ndarray:
        return self.start + np.arange(self.size)

    def grid(self) -> tuple[np.ndarray, ...]:
        """Per-axis index arrays aligned with :meth:`all_ids`."""
        return tuple(a.ravel() for a in np.indices(self.shape))

    def coords(self, local: int) -> tuple[str, ...]:
        idx = np.unravel_index(local, self.shape)
        return tuple(self.labels[a][i] for a, i in enumerate(idx))

    def entry_name(self, local: int) -> str:
        return f"{self.name}({','.join(self.coords(local))})"


class _Registry:
    def __init__(self) -> None:
        self.blocks: list[Block] = []
        self._by_name: dict[str, Block] = {}
        self._starts: list[int] = []
        self.count = 0

    def add(self, name: str, tag: str, labels) -> Block:
        blk = Block(name, tag, self.count, tuple(tuple(a) for a in labels))
        self.blocks.append(blk)
        self._by_name[name] = blk
        self._starts.append(self.count)
        self.count += blk.size
        return blk

    def __getitem__(self, name: str) -> Block:
        return self._by_name[name]

    def locate(self, j: int) -> tuple[Block, int]:
        if not 0 <= j < self.count:
            raise IndexError(j)
        b = bisect.bisect_right(self._starts, j) - 1
        while self.blocks[b].size == 0 or j >= self.blocks[b].start + self.blocks[b].size:
            b += 1
        return self.blocks[b], j - self.blocks[b].start


class VarIndex(_Registry):
    """Bijection between ``(kind, coords)`` and column ids."""

    def column(self, kind: str, *coords: str | int) -> int:
        blk = self[kind]
        idx = [blk.labels[a].index(str(c)) for a, c in enumerate(coords)]
        return int(blk.ids(*idx))

    def describe(self, j: int) -> tuple[str, tuple[str, ...]]:
        blk, local = self.locate(j)
        return blk.name, blk.coords(local)

    def year_index(self) -> np.ndarray:
        """0-based model year of every column (axis 1 of every block)."""
        out = np.empty(self.count, dtype=np.int64)
        for blk in self.blocks:
            if blk.size:
                out[blk.all_ids()] = blk.grid()[1]
        return out


class RowIndex(_Registry):
    def provenance(self, i: int) -> dict:
        blk, local = self.locate(i)
        return {"row": i, "name": blk.entry_name(local), "family": blk.tag, "coords": list(blk.coords(local))}

    def families(self) -> set[str]:
        return {b.tag for b in self.blocks if b.size}


@dataclass(frozen=True)
class PlanModelStats:
    n_vars: int
    n_constraints: int
    n_nonzeros: int

    def to_dict(self) -> dict:
        return {"n_vars": self.n_vars, "n_constraints": self.n_constraints, "n_nonzeros": self.n_nonzeros}


@dataclass
class PlanInputs:
    config: ScenarioConfig
    topology: GridTopology
    repdays: RepresentativeDays
    demand: DemandCube
    region_map: RegionMap | None = None


@dataclass
class PlanModel:
    inputs: PlanInputs
    model: LpModel
    vars: VarIndex
    rows: RowIndex
    stats: PlanModelStats
    bound_families: dict[str, list[str]] = field(default_factory=dict)

    def write_provenance(self, path) -> None:
        with open(path, "w") as fh:
            for i in range(self.rows.count):
                fh.write(json.dumps(self.rows.provenance(i)) + "\n")


class _Build:
    """Shared state while assembling one model."""

    def __init__(self, inputs: PlanInputs) -> None:
        cfg, topo, rd, dem = inputs.config, inputs.topology, inputs.repdays, inputs.demand
        self.inputs = inputs
        self.cfg = cfg
        self.topo = topo
        self.years = tuple(cfg.horizon)
        if not self.years:
            raise ValueError("horizon must be non-empty")
        bus_ids = tuple(b.id for b in topo.buses)
        if tuple(rd.bus_ids) != bus_ids or tuple(dem.bus_ids) != bus_ids:
            raise ValueError("representative days and demand must list the topology's buses in order")
        if tuple(dem.years) != self.years:
            raise ValueError("demand years do not match the horizon")
        self.T = len(self.years)
        self.D = rd.k
        self.H = rd.hours
        if dem.base.shape[2:] != (self.D, self.H):
            raise ValueError("demand and representative days disagree on (days, hours)")
        self.N = len(bus_ids)
        self.gens = list(topo.generators)
        for g in self.gens:
            if g.tech not in cfg.techs:
                raise KeyError(f"missing cost entry for {g.tech.value}")
        self.th = [k for k, g in enumerate(self.gens) if g.tech.is_thermal]
        self.rn = [k for k, g in enumerate(self.gens) if not g.tech.is_thermal]
        self.lines = list(topo.lines)
        self.L = len(self.lines)
        self.G = len(self.gens)

        rm = inputs.region_map
        self.dc_members = self._members(dem.dc_regions, rm)
        self.em_members = self._members(dem.em_regions, rm)
        self.dc_buses = sorted({b for m in self.dc_members for b in m})
        self.em_buses = sorted({b for m in self.em_members for b in m})

        self.model = LpModel(cfg.raw.get("name", "plan") if cfg.raw else "plan")
        self.vars = VarIndex()
        self.rows = RowIndex()
        self.bound_families: dict[str, list[str]] = {}

        self.lab_t = tuple(str(t + 1) for t in range(self.T))
        self.lab_d = tuple(str(d + 1) for d in range(self.D))
        self.lab_h = tuple(str(h + 1) for h in range(self.H))
        self.lab_n = tuple(str(b) for b in bus_ids)
        self.lab_g = tuple(f"{g.bus},{g.tech.value}" for g in self.gens)
        self.lab_gth = tuple(self.lab_g[k] for k in self.th)
        self.lab_grn = tuple(self.lab_g[k] for k in self.rn)
        self.lab_l = tuple(f"{ln.from_bus},{ln.to_bus}" for ln in self.lines)
        # cache of (row-grid) index arrays for a full (T, D, H) sweep
        self.tdh = self.T * self.D * self.H

    @staticmethod
    def _members(regions: Sequence[str], rm: RegionMap | None) -> list[list[int]]:
        if not regions:
            return []
        if rm is None:
            raise ValueError("regional loads need a region map")
        out = []
        for r in regions:
            buses = rm.buses_in(r)
            if not buses:
                raise ValueError(f"active region {r} has no bus")
            out.append(buses)
        return out

    # -- helpers ----------------------------------------------------------

    def add_var_block(self, kind: str, labels, lb=0.0, ub=np.inf) -> Block:
        blk = self.vars.add(kind, kind, labels)
        self.model.add_columns(blk.size, lb=lb, ub=ub, names=blk.entry_name)
        return blk

    def add_row_block(self, name: str, tag: str, labels, sense: Sense, rhs=0.0) -> Block:
        blk = self.rows.add(name, tag, labels)
        self.model.add_rows(blk.size, sense, rhs=rhs, names=blk.entry_name)
        return blk

    def terms(self, rows, cols, vals) -> None:
        self.model.add_terms(rows, cols, vals)


# ---------------------------------------------------------------------------
# variables


def register_variables(b: _Build) -> None:
    T4 = (b.lab_t, b.lab_d, b.lab_h)
    b.add_var_block("c_gen", (b.lab_g, b.lab_t))
    b.add_var_block("C_gen", (b.lab_g, b.lab_t))
    b.add_var_block("c_trans", (b.lab_l, b.lab_t))
    b.add_var_block("C_trans", (b.lab_l, b.lab_t))
    b.add_var_block("c_stor", (b.lab_n, b.lab_t))
    b.add_var_block("C_stor", (b.lab_n, b.lab_t))
    b.add_var_block("e_init", (b.lab_n, b.lab_t))
    b.add_var_block("p_gen", (b.lab_gth,) + T4)
    b.add_var_block("p_curt_gen", (b.lab_g,) + T4)
    b.add_var_block("p_curt_dem", (b.lab_n,) + T4)
    b.add_var_block("p_trans", (b.lab_l,) + T4, lb=-np.inf, ub=np.inf)
    b.add_var_block("p_charge", (b.lab_n,) + T4)
    b.add_var_block("p_disch", (b.lab_n,) + T4)
    b.add_var_block("e_stor", (b.lab_n,) + T4)
    b.add_var_block("p_DC", (tuple(str(n) for n in b.dc_buses),) + T4)
    b.add_var_block("p_EOR", (tuple(str(n) for n in b.em_buses),) + T4)
    theta = b.add_var_block("theta", (b.lab_n,) + T4, lb=-math.pi, ub=math.pi)
    b.bound_families["angle_limit"] = ["theta"]
    if b.N and b.tdh:
        ref = theta.ids(*np.indices((1, b.T, b.D, b.H)).reshape(4, -1))
        b.model.set_bounds(ref, 0.0, 0.0)


# ---------------------------------------------------------------------------
# constraint families


def add_investment_and_accumulation(b: _Build) -> None:
    """Build limits as column bounds, then available = initial + matured builds."""
    cfg, econ = b.cfg, b.cfg.econ
    T = b.T
    forbid = cfg.planner.forbid_stranded_investment
    t_idx = np.arange(T)

    c_gen, C_gen = b.vars["c_gen"], b.vars["C_gen"]
    ub = np.full((b.G, T), econ.max_new_gen)
    for g, gen in enumerate(b.gens):
        entry = cfg.techs[gen.tech]
        if entry.earliest_build_year is not None:
            ub[g, np.array(b.years) < entry.earliest_build_year] = 0.0
        if forbid:
            ub[g, t_idx + entry.lead_time > T - 1] = 0.0
    b.model.set_bounds(c_gen.all_ids(), 0.0, ub.ravel())
    c_trans = b.vars["c_trans"]
    ub_tr = np.full((b.L, T), econ.max_new_trans)
    if forbid:
        ub_tr[:, t_idx + econ.trans_lead_time > T - 1] = 0.0
    b.model.set_bounds(c_trans.all_ids(), 0.0, ub_tr.ravel())
    c_stor = b.vars["c_stor"]
    ub_st = np.full((b.N, T), econ.max_new_stor)
    if forbid:
        ub_st[:, t_idx + cfg.storage.lead_time > T - 1] = 0.0
    b.model.set_bounds(c_stor.all_ids(), 0.0, ub_st.ravel())
    b.bound_families["build_limit"] = ["c_gen", "c_trans", "c_stor"]

    def link(new: Block, avail: Block, labels, lead: np.ndarray, initial: np.ndarray) -> None:
        rows = b.add_row_block(f"link_{avail.name}", "capacity_link", (labels, b.lab_t), Sense.EQ, np.repeat(initial, T))
        e, t = rows.grid()
        b.terms(rows.all_ids(), avail.ids(e, t), 1.0)
        # matured builds: t' <= t - lead
        E = len(labels)
        ee, tt, tp = np.indices((E, T, T)).reshape(3, -1)
        ok = tp <= tt - lead[ee]
        b.terms(rows.ids(ee[ok], tt[ok]), new.ids(ee[ok], tp[ok]), -1.0)

    lead_g = np.array([cfg.techs[g.tech].lead_time for g in b.gens], dtype=np.int64)
    link(c_gen, C_gen, b.lab_g, lead_g, np.array([g.initial_capacity for g in b.gens]))
    link(
        c_trans,
        b.vars["C_trans"],
        b.lab_l,
        np.full(b.L, econ.trans_lead_time, dtype=np.int64),
        np.array([ln.initial_capacity for ln in b.lines]),
    )
    link(
        c_stor,
        b.vars["C_stor"],
        b.lab_n,
        np.full(b.N, cfg.storage.lead_time, dtype=np.int64),
        np.array([b.topo.storage_at(int(n)) for n in b.lab_n]),
    )


def add_peak_adequacy(b: _Build) -> None:
    rows = b.add_row_block("peak", "peak_adequacy", (b.lab_t,), Sense.GE, b.inputs.demand.peak)
    g, t = b.vars["C_gen"].grid()
    b.terms(rows.ids(t), b.vars["C_gen"].all_ids(), 1.0)


def _storage_init_cap(b: _Build) -> None:
    rows = b.add_row_block("e_init_cap", "storage_init_cap", (b.lab_n, b.lab_t), Sense.LE)
    n, t = rows.grid()
    b.terms(rows.all_ids(), b.vars["e_init"].ids(n, t), 1.0)
    b.terms(rows.all_ids(), b.vars["C_stor"].ids(n, t), -b.cfg.storage.duration_h)


def _renewable_cf(b: _Build) -> np.ndarray:
    """CF per renewable generator, shape (G_rn, D, H)."""
    rd = b.inputs.repdays
    out = np.empty((len(b.rn), b.D, b.H))
    for k, g in enumerate(b.rn):
        gen = b.gens[g]
        out[k] = rd.cf(gen.tech)[gen.bus]
    return out


def add_power_balance(b: _Build) -> None:
    """Supply minus withdrawals at each bus equals local demand."""
    dem = b.inputs.demand
    rows = b.add_row_block("balance", "power_balance", (b.lab_n, b.lab_t, b.lab_d, b.lab_h), Sense.EQ, dem.base.ravel())
    gen_bus = np.array([g.bus for g in b.gens], dtype=np.int64)

    blk = b.vars["p_gen"]
    e, t, d, h = blk.grid()
    th = np.array(b.th, dtype=np.int64)
    b.terms(rows.ids(gen_bus[th][e], t, d, h), blk.all_ids(), 1.0)

    # renewable output enters as CF * available capacity
    if b.rn:
        cf = _renewable_cf(b)
        k, t, d, h = np.indices((len(b.rn), b.T, b.D, b.H)).reshape(4, -1)
        rn = np.array(b.rn, dtype=np.int64)
        b.terms(rows.ids(gen_bus[rn][k], t, d, h), b.vars["C_gen"].ids(rn[k], t), cf[k, d, h])

    blk = b.vars["p_curt_gen"]
    e, t, d, h = blk.grid()
    b.terms(rows.ids(gen_bus[e], t, d, h), blk.all_ids(), -1.0)

    blk = b.vars["p_trans"]
    e, t, d, h = blk.grid()
    fr = np.array([ln.from_bus for ln in b.lines], dtype=np.int64)
    to = np.array([ln.to_bus for ln in b.lines], dtype=np.int64)
    if blk.size:
        b.terms(rows.ids(fr[e], t, d, h), blk.all_ids(), -1.0)
        b.terms(rows.ids(to[e], t, d, h), blk.all_ids(), 1.0)

    for kind, sign in (("p_disch", 1.0), ("p_charge", -1.0), ("p_curt_dem", 1.0)):
        blk = b.vars[kind]
        b.terms(rows.all_ids(), blk.all_ids(), sign)

    for kind, buses in (("p_DC", b.dc_buses), ("p_EOR", b.em_buses)):
        blk = b.vars[kind]
        if blk.size:
            e, t, d, h = blk.grid()
            b.terms(rows.ids(np.array(buses, dtype=np.int64)[e], t, d, h), blk.all_ids(), -1.0)


def add_dcopf(b: _Build) -> None:
    """Flow equals susceptance times angle difference; flows within capacity."""
    full = (b.lab_l, b.lab_t, b.lab_d, b.lab_h)
    flow = b.add_row_block("flow", "dc_flow", full, Sense.EQ)
    p = b.vars["p_trans"]
    theta = b.vars["theta"]
    if flow.size:
        x = np.array([ln.reactance for ln in b.lines])
        if np.any(x <= 0):
            raise ValueError("line reactance must be positive")
        susc = b.cfg.econ.s_base / x
        fr = np.array([ln.from_bus for ln in b.lines], dtype=np.int64)
        to = np.array([ln.to_bus for ln in b.lines], dtype=np.int64)
        e, t, d, h = flow.grid()
        b.terms(flow.all_ids(), p.all_ids(), 1.0)
        b.terms(flow.all_ids(), theta.ids(fr[e], t, d, h), -susc[e])
        b.terms(flow.all_ids(), theta.ids(to[e], t, d, h), susc[e])
    C = b.vars["C_trans"]
    for name, sense, sign in (("line_up", Sense.LE, -1.0), ("line_lo", Sense.GE, 1.0)):
        rows = b.add_row_block(name, "line_limit", full, sense)
        if rows.size:
            e, t, d, h = rows.grid()
            b.terms(rows.all_ids(), p.all_ids(), 1.0)
            b.terms(rows.all_ids(), C.ids(e, t), sign)


def add_regional_large_loads(b: _Build) -> None:
    dem = b.inputs.demand
    for name, tag, kind, regions, members, buses, load in (
        ("dc", "dc_region", "p_DC", dem.dc_regions, b.dc_members, b.dc_buses, dem.dc),
        ("em", "em_region", "p_EOR", dem.em_regions, b.em_members, b.em_buses, dem.em),
    ):
        labels = (tuple(_label(r) for r in regions), b.lab_t, b.lab_d, b.lab_h)
        rows = b.add_row_block(name, tag, labels, Sense.EQ, load.ravel())
        blk = b.vars[kind]
        pos = {n: i for i, n in enumerate(buses)}
        for r, bus_list in enumerate(members):
            for n in bus_list:
                t, d, h = np.indices((b.T, b.D, b.H)).reshape(3, -1)
                b.terms(rows.ids(r, t, d, h), blk.ids(pos[n], t, d, h), 1.0)


def add_dispatch_limits(b: _Build) -> None:
    """Thermal output between min and max CF of available capacity; spill limits."""
    techs = b.cfg.techs
    full_th = (b.lab_gth, b.lab_t, b.lab_d, b.lab_h)
    p = b.vars["p_gen"]
    C = b.vars["C_gen"]
    th = np.array(b.th, dtype=np.int64)
    fmin = np.array([techs[b.gens[g].tech].f_min for g in b.th])
    fmax = np.array([techs[b.gens[g].tech].f_max for g in b.th])
    if np.any(fmin > fmax):
        raise ValueError("f_min exceeds f_max")
    for name, sense, coef in (("gen_min", Sense.GE, fmin), ("gen_max", Sense.LE, fmax)):
        tag = "thermal_min" if name == "gen_min" else "thermal_max"
        rows = b.add_row_block(name, tag, full_th, sense)
        if rows.size:
            e, t, d, h = rows.grid()
            b.terms(rows.all_ids(), p.all_ids(), 1.0)
            b.terms(rows.all_ids(), C.ids(th[e], t), -coef[e])

    curt = b.vars["p_curt_gen"]
    rows = b.add_row_block("curt_th", "curtail_cap", full_th, Sense.LE)
    if rows.size:
        e, t, d, h = rows.grid()
        b.terms(rows.all_ids(), curt.ids(th[e], t, d, h), 1.0)
        b.terms(rows.all_ids(), p.all_ids(), -1.0)

    rows = b.add_row_block("curt_rn", "renewable_avail", (b.lab_grn, b.lab_t, b.lab_d, b.lab_h), Sense.LE)
    if rows.size:
        rn = np.array(b.rn, dtype=np.int64)
        cf = _renewable_cf(b)
        e, t, d, h = rows.grid()
        b.terms(rows.all_ids(), curt.ids(rn[e], t, d, h), 1.0)
        b.terms(rows.all_ids(), C.ids(rn[e], t), -cf[e, d, h])


def add_ramping(b: _Build) -> None:
    """Hour-to-hour thermal ramp limits, within a day and across day boundaries."""
    techs = b.cfg.techs
    p = b.vars["p_gen"]
    C = b.vars["C_gen"]
    th = np.array(b.th, dtype=np.int64)
    ramp = np.array([techs[b.gens[g].tech].ramp for g in b.th])
    specs = (
        ("ramp_up", "ramp_intraday", (b.lab_gth, b.lab_t, b.lab_d, b.lab_h[1:]), Sense.LE, -1.0),
        ("ramp_dn", "ramp_intraday", (b.lab_gth, b.lab_t, b.lab_d, b.lab_h[1:]), Sense.GE, 1.0),
        ("ramp_day_up", "ramp_interday", (b.lab_gth, b.lab_t, b.lab_d[1:]), Sense.LE, -1.0),
        ("ramp_day_dn", "ramp_interday", (b.lab_gth, b.lab_t, b.lab_d[1:]), Sense.GE, 1.0),
    )
    for name, tag, labels, sense, sign in specs:
        rows = b.add_row_block(name, tag, labels, sense)
        if not rows.size:
            continue
        if len(labels) == 4:
            e, t, d, h = rows.grid()
            cur = p.ids(e, t, d, h + 1)
            prev = p.ids(e, t, d, h)
        else:
            e, t, d = rows.grid()
            cur = p.ids(e, t, d + 1, 0)
            prev = p.ids(e, t, d, b.H - 1)
        ids = rows.all_ids()
        b.terms(ids, cur, 1.0)
        b.terms(ids, prev, -1.0)
        b.terms(ids, C.ids(th[e], t), sign * ramp[e])


def add_storage(b: _Build) -> None:
    """State of charge, day chaining, energy and power limits."""
    st = b.cfg.storage
    e_st, ch, dis = b.vars["e_stor"], b.vars["p_charge"], b.vars["p_disch"]
    C = b.vars["C_stor"]
    e_init = b.vars["e_init"]
    eta_c, inv_eta_d = st.eta_charge, 1.0 / st.eta_discharge

    def level(rows: Block, n, t, d, h, prev_ids) -> None:
        ids = rows.all_ids()
        b.terms(ids, e_st.ids(n, t, d, h), 1.0)
        b.terms(ids, prev_ids, -1.0)
        b.terms(ids, ch.ids(n, t, d, h), -eta_c)
        b.terms(ids, dis.ids(n, t, d, h), inv_eta_d)

    rows = b.add_row_block("soc_first", "storage_level", (b.lab_n, b.lab_t, b.lab_d[:1], b.lab_h[:1]), Sense.EQ)
    if rows.size:
        n, t, d, h = rows.grid()
        level(rows, n, t, d, h, e_init.ids(n, t))
    rows = b.add_row_block("soc", "storage_level", (b.lab_n, b.lab_t, b.lab_d, b.lab_h[1:]), Sense.EQ)
    if rows.size:
        n, t, d, h = rows.grid()
        level(rows, n, t, d, h + 1, e_st.ids(n, t, d, h))
    rows = b.add_row_block("soc_day", "storage_day_link", (b.lab_n, b.lab_t, b.lab_d[1:], b.lab_h[:1]), Sense.EQ)
    if rows.size:
        n, t, d, h = rows.grid()
        level(rows, n, t, d + 1, h, e_st.ids(n, t, d, b.H - 1))

    full = (b.lab_n, b.lab_t, b.lab_d, b.lab_h)
    for name, tag, var, coef in (
        ("soc_cap", "storage_energy_cap", e_st, st.duration_h),
        ("charge_cap", "charge_limit", ch, 1.0),
        ("disch_cap", "discharge_limit", dis, 1.0),
    ):
        rows = b.add_row_block(name, tag, full, Sense.LE)
        if rows.size:
            n, t, d, h = rows.grid()
            b.terms(rows.all_ids(), var.all_ids(), 1.0)
            b.terms(rows.all_ids(), C.ids(n, t), -coef)


def line_lengths(topology: GridTopology) -> np.ndarray:
    """Line lengths in miles; great-circle bus distance where not given."""
    out = []
    for ln in topology.lines:
        if ln.length_mi is not None:
            out.append(ln.length_mi)
            continue
        a, c = topology.bus(ln.from_bus), topology.bus(ln.to_bus)
        if not (a.has_coordinates and c.has_coordinates):
            raise ValueError(f"line {ln.from_bus}-{ln.to_bus} has no length and its buses lack coordinates")
        out.append(haversine_miles((a.latitude, a.longitude), (c.latitude, c.longitude)))
    return np.array(out, dtype=float)


def build_objective(b: _Build) -> None:
    """Discounted capital plus operating cost."""
    cfg, econ, st = b.cfg, b.cfg.econ, b.cfg.storage
    years = b.years
    df = np.array([econ.discount_factor(y) for y in years])
    w = b.inputs.repdays.weights
    for g in b.gens:
        for y in years:
            cfg.techs[g.tech].cost(y)

    alpha = np.array([[cfg.techs[g.tech].cost(y).capex for y in years] for g in b.gens]).reshape(b.G, b.T)
    beta = np.array([[cfg.techs[g.tech].cost(y).fom for y in years] for g in b.gens]).reshape(b.G, b.T)
    b.model.set_objective(b.vars["c_gen"].all_ids(), (alpha * df).ravel())
    b.model.set_objective(b.vars["C_gen"].all_ids(), (beta * df).ravel())

    a_tr = np.array([econ.trans_capex[y] for y in years])
    length = line_lengths(b.topo)
    b.model.set_objective(b.vars["c_trans"].all_ids(), (length[:, None] * (a_tr * df)[None, :]).ravel())
    a_st = np.array([st.capex[y] for y in years])
    b_st = np.array([st.fom[y] for y in years])
    b.model.set_objective(b.vars["c_stor"].all_ids(), np.tile(a_st * df, b.N))
    b.model.set_objective(b.vars["C_stor"].all_ids(), np.tile(b_st * df, b.N))

    # hourly operating terms weighted by days represented
    scale = df[:, None, None] * w[None, :, None] * np.ones((1, 1, b.H))  # (T, D, H)
    gamma = np.array([[cfg.techs[b.gens[g].tech].cost(y).variable_cost for y in years] for g in b.th]).reshape(
        len(b.th), b.T
    )
    b.model.set_objective(b.vars["p_gen"].all_ids(), (gamma[:, :, None, None] * scale[None]).ravel())
    b.model.set_objective(
        b.vars["p_curt_gen"].all_ids(), np.broadcast_to(econ.gen_curtail_cost * scale[None], (b.G, b.T, b.D, b.H)).ravel()
    )
    b.model.set_objective(
        b.vars["p_curt_dem"].all_ids(),
        np.broadcast_to(econ.demand_curtail_cost * scale[None], (b.N, b.T, b.D, b.H)).ravel(),
    )


def build_model(inputs: PlanInputs) -> PlanModel:
    """Assemble, finalize and index the full planning LP."""
    b = _Build(inputs)
    register_variables(b)
    add_investment_and_accumulation(b)
    add_peak_adequacy(b)
    _storage_init_cap(b)
    add_power_balance(b)
    add_dcopf(b)
    add_regional_large_loads(b)
    add_dispatch_limits(b)
    add_ramping(b)
    add_storage(b)
    build_objective(b)
    model = b.model.finalize()
    stats = PlanModelStats(model.n_cols, model.n_rows, model.n_nonzeros)
    return PlanModel(inputs, model, b.vars, b.rows, stats, b.bound_families)


def expected_counts(
    T: int, D: int, H: int, N: int, L: int, G_th: int, G_rn: int, B_dc: int, B_em: int, R_dc: int, R_em: int
) -> tuple[int, int]:
    """Closed-form (n_vars, n_rows) matching the layout in the module docstring."""
    G = G_th + G_rn
    tdh = T * D * H
    n_vars = T * (2 * G + 2 * L + 3 * N) + tdh * (G_th + G + 5 * N + L + B_dc + B_em)
    n_rows = T * (G + L + 2 * N + 1) + tdh * (5 * N + 3 * L + 3 * G_th + G_rn + R_dc + R_em) + 2 * G_th * T * (D * H - 1)
    return n_vars, n_rows
