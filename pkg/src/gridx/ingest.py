"""Readers and writers for scenario configs, grid tables and hourly profiles.

File layout of a scenario data directory::

    scenario.json         scalars and per-tech / per-year tables
    buses.csv             id,lat,lon[,county]
    generators.csv        bus,tech,capacity_mw
    lines.csv             from,to,reactance_pu,capacity_mw[,length_mi]
    storage.csv           bus,capacity_mw                      (optional)
    base_load.csv         one column per bus id, 8760 rows (MW)
    cf_solar.csv          same layout, capacity factors        (optional)
    cf_wind.csv           same layout                          (optional)
    gen_solar.csv         hourly MW output, turned into CFs     (optional)
    gen_wind.csv          same                                 (optional)
    psi_dc.csv            county,share                         (optional)
    psi_em.csv            county,share                         (optional)
    county_centroids.csv  county,lat,lon
    bus_county.csv        bus,county                           (optional)

Per-year tables in the JSON may be objects keyed by year or lists aligned
with ``horizon``.  Capital and fixed costs are read in $/kW (-yr) and stored
per MW.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .domain import (
    Bus,
    ClusteringSettings,
    DemandScenario,
    EconParams,
    Generator,
    GridTopology,
    Line,
    PlannerSettings,
    ScenarioConfig,
    SolverSettings,
    StorageParams,
    TechCatalogEntry,
    TechKind,
    TechYearCost,
    aggregate_raw_grid,
    validate_topology,
)

HOURS = 8760
CF_SLACK = 1.0001
KW_PER_MW = 1000.0


@dataclass(eq=False)
class ProfileMatrix:
    """Hourly values for a set of buses, shape ``(n_buses, 8760)``."""

    bus_ids: tuple[int, ...]
    values: np.ndarray
    kind: str = "load"  # or "cf"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.bus_ids), HOURS):
            raise ValueError(f"profile shape {self.values.shape} does not match {len(self.bus_ids)} buses x {HOURS}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile contains NaN or infinite values")

    def row(self, bus: int) -> np.ndarray:
        return self.values[self.bus_ids.index(bus)]

    def __contains__(self, bus: int) -> bool:
        return bus in self.bus_ids


# ---------------------------------------------------------------------------
# scenario config


def _per_year(table: Any, horizon: tuple[int, ...], what: str) -> dict[int, float]:
    if isinstance(table, (int, float)):
        return {y: float(table) for y in horizon}
    if isinstance(table, list):
        if len(table) != len(horizon):
            raise ValueError(f"year lists inconsistent: {what} has {len(table)} values for {len(horizon)} years")
        return {y: float(v) for y, v in zip(horizon, table)}
    if isinstance(table, Mapping):
        years = {int(k) for k in table}
        if years != set(horizon):
            raise ValueError(f"year lists inconsistent: {what} covers {sorted(years)}, horizon is {list(horizon)}")
        return {int(k): float(v) for k, v in table.items()}
    raise ValueError(f"{what}: expected number, list or year map")


def _require(node: Mapping, key: str, where: str):
    if key not in node:
        raise KeyError(f"missing required key {where}.{key}" if where else f"missing required key {key}")
    return node[key]


def _horizon(raw: Any) -> tuple[int, ...]:
    if isinstance(raw, Mapping):
        return tuple(range(int(raw["start"]), int(raw["end"]) + 1))
    return tuple(int(y) for y in raw)


def _read_share_csv(path: Path) -> dict[str, float]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {str(r["county"]).strip(): float(r["share"]) for r in rows}


def _check_shares(shares: Mapping[str, float], what: str) -> None:
    if not shares:
        return
    total = math.fsum(shares.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{what}: region weights sum {total:.6g}")


def normalize_scenario(raw: Mapping, base_dir: Path | None = None) -> dict:
    """Fill defaults and resolve per-year tables; returns a plain JSON-able dict."""
    raw = copy.deepcopy(dict(raw))
    horizon = _horizon(_require(raw, "horizon", ""))
    if not horizon:
        raise ValueError("horizon must be non-empty")
    out: dict[str, Any] = {"name": raw.get("name", "scenario"), "horizon": list(horizon)}
    data_dir = raw.get("data_dir")
    if data_dir is not None and base_dir is not None and not os.path.isabs(data_dir):
        data_dir = str((base_dir / data_dir).resolve())
    elif data_dir is None and base_dir is not None:
        data_dir = str(base_dir.resolve())
    out["data_dir"] = data_dir

    econ = dict(_require(raw, "econ", ""))
    out["econ"] = {
        "interest_rate": float(_require(econ, "interest_rate", "econ")),
        "base_year": int(_require(econ, "base_year", "econ")),
        "demand_curtail_cost": float(econ.get("demand_curtail_cost", 5000.0)),
        "gen_curtail_cost": float(econ.get("gen_curtail_cost", 100.0)),
        "s_base": float(econ.get("s_base", 100.0)),
        "trans_capex": _str_keys(_per_year(_require(econ, "trans_capex", "econ"), horizon, "econ.trans_capex")),
        "trans_lead_time": int(econ.get("trans_lead_time", 3)),
        "max_new_gen": float(econ.get("max_new_gen", 1e5)),
        "max_new_trans": float(econ.get("max_new_trans", 1e5)),
        "max_new_stor": float(econ.get("max_new_stor", 1e5)),
    }

    st = dict(_require(raw, "storage", ""))
    if "eta_charge" in st or "eta_discharge" in st:
        eta_c = float(_require(st, "eta_charge", "storage"))
        eta_d = float(_require(st, "eta_discharge", "storage"))
    else:
        rte = float(st.get("round_trip", 0.85))
        eta_c = eta_d = math.sqrt(rte)
    out["storage"] = {
        "capex": _str_keys(_per_year(_require(st, "capex", "storage"), horizon, "storage.capex")),
        "fom": _str_keys(_per_year(_require(st, "fom", "storage"), horizon, "storage.fom")),
        "lead_time": int(st.get("lead_time", 1)),
        "duration_h": float(st.get("duration_h", 4.0)),
        "eta_charge": eta_c,
        "eta_discharge": eta_d,
    }

    techs = dict(_require(raw, "tech", ""))
    out["tech"] = {}
    for name, given in techs.items():
        kind = TechKind.parse(name)
        given = dict(given)
        years = {k: v for k, v in given.items() if str(k).isdigit()}
        if {int(y) for y in years} != set(horizon):
            raise ValueError(
                f"year lists inconsistent: tech.{kind.value} covers {sorted(int(y) for y in years)}, horizon is {list(horizon)}"
            )
        entry: dict[str, Any] = {
            "lead_time": int(_require(given, "lead_time", f"tech.{kind.value}")),
            "f_min": float(given.get("f_min", 0.0)),
            "f_max": float(given.get("f_max", 1.0)),
            "ramp": float(given.get("ramp", 1.0)),
            "earliest_build_year": given.get("earliest_build_year"),
        }
        for y in sorted(years, key=int):
            c = years[y]
            entry[str(int(y))] = {
                "capex": float(_require(c, "capex", f"tech.{kind.value}.{y}")),
                "fom": float(_require(c, "fom", f"tech.{kind.value}.{y}")),
                "vom": float(c.get("vom", 0.0)),
                "fuel": float(c.get("fuel", 0.0)),
                "heat_rate": float(c.get("heat_rate", 0.0)),
            }
        out["tech"][kind.value] = entry

    dem = dict(_require(raw, "demand", ""))
    psi_dc = dem.get("psi_dc")
    psi_em = dem.get("psi_em")
    if psi_dc is None and data_dir and (Path(data_dir) / "psi_dc.csv").exists():
        psi_dc = _read_share_csv(Path(data_dir) / "psi_dc.csv")
    if psi_em is None and data_dir and (Path(data_dir) / "psi_em.csv").exists():
        psi_em = _read_share_csv(Path(data_dir) / "psi_em.csv")
    psi_dc = {str(k): float(v) for k, v in (psi_dc or {}).items()}
    psi_em = {str(k): float(v) for k, v in (psi_em or {}).items()}
    _check_shares(psi_dc, "psi_dc")
    _check_shares(psi_em, "psi_em")
    out["demand"] = {
        "E_base": _str_keys(_per_year(_require(dem, "E_base", "demand"), horizon, "demand.E_base")),
        "E_base_t0": None if dem.get("E_base_t0") is None else float(dem["E_base_t0"]),
        "P_DC": _str_keys(_per_year(_require(dem, "P_DC", "demand"), horizon, "demand.P_DC")),
        "LF_DC": float(dem.get("LF_DC", 0.9)),
        "Q_M": float(_require(dem, "Q_M", "demand")),
        "phi": _str_keys(_per_year(_require(dem, "phi", "demand"), horizon, "demand.phi")),
        "eta_elec": float(dem.get("eta_elec", 0.97)),
        "P_base_peak": _str_keys(_per_year(_require(dem, "P_base_peak", "demand"), horizon, "demand.P_base_peak")),
        "psi_dc": psi_dc,
        "psi_em": psi_em,
    }
    if any(v > 0 for v in out["demand"]["P_DC"].values()) and not psi_dc:
        raise ValueError("data-center load given but no psi_dc shares")
    if out["demand"]["Q_M"] > 0 and any(v > 0 for v in out["demand"]["phi"].values()) and not psi_em:
        raise ValueError("electrified manufacturing load given but no psi_em shares")

    cl = dict(raw.get("clustering", {}))
    out["clustering"] = {
        "k": int(cl.get("k", 5)),
        "seed": int(cl.get("seed", 7)),
        "restarts": int(cl.get("restarts", 10)),
        "profile": str(cl.get("profile", "mean")),
        "max_iter": int(cl.get("max_iter", 300)),
    }
    so = dict(raw.get("solver", {}))
    out["solver"] = {
        "backend": str(so.get("backend", "simplex")),
        "tolerance": float(so.get("tolerance", 1e-7)),
        "max_iters": None if so.get("max_iters") is None else int(so["max_iters"]),
        "command": so.get("command"),
    }
    pl = dict(raw.get("planner", {}))
    out["planner"] = {"forbid_stranded_investment": bool(pl.get("forbid_stranded_investment", False))}
    return out


def _str_keys(d: Mapping[int, float]) -> dict[str, float]:
    return {str(k): v for k, v in d.items()}


def _years(d: Mapping[str, float]) -> dict[int, float]:
    return {int(k): float(v) for k, v in d.items()}


def scenario_from_dict(raw: Mapping, base_dir: Path | None = None) -> ScenarioConfig:
    norm = normalize_scenario(raw, base_dir)
    horizon = tuple(norm["horizon"])
    e = norm["econ"]
    econ = EconParams(
        interest_rate=e["interest_rate"],
        base_year=e["base_year"],
        trans_capex=_years(e["trans_capex"]),
        demand_curtail_cost=e["demand_curtail_cost"],
        gen_curtail_cost=e["gen_curtail_cost"],
        s_base=e["s_base"],
        trans_lead_time=e["trans_lead_time"],
        max_new_gen=e["max_new_gen"],
        max_new_trans=e["max_new_trans"],
        max_new_stor=e["max_new_stor"],
    )
    if econ.gen_curtail_cost <= 0 or econ.demand_curtail_cost <= econ.gen_curtail_cost:
        import warnings

        warnings.warn("curtailment costs should satisfy demand cost > generation cost > 0", stacklevel=2)
    s = norm["storage"]
    storage = StorageParams(
        capex={y: v * KW_PER_MW for y, v in _years(s["capex"]).items()},
        fom={y: v * KW_PER_MW for y, v in _years(s["fom"]).items()},
        lead_time=s["lead_time"],
        duration_h=s["duration_h"],
        eta_charge=s["eta_charge"],
        eta_discharge=s["eta_discharge"],
    )
    techs: dict[TechKind, TechCatalogEntry] = {}
    for name, t in norm["tech"].items():
        kind = TechKind(name)
        costs = {
            int(y): TechYearCost(
                capex=c["capex"] * KW_PER_MW,
                fom=c["fom"] * KW_PER_MW,
                vom=c["vom"],
                fuel=c["fuel"],
                heat_rate=c["heat_rate"],
            )
            for y, c in t.items()
            if y.isdigit()
        }
        eby = t["earliest_build_year"]
        techs[kind] = TechCatalogEntry(
            kind=kind,
            lead_time=t["lead_time"],
            costs=costs,
            f_min=t["f_min"],
            f_max=t["f_max"],
            ramp=t["ramp"],
            earliest_build_year=None if eby is None else int(eby),
        )
    d = norm["demand"]
    demand = DemandScenario(
        horizon=horizon,
        e_base=_years(d["E_base"]),
        p_dc=_years(d["P_DC"]),
        q_m=d["Q_M"],
        phi=_years(d["phi"]),
        p_base_peak=_years(d["P_base_peak"]),
        psi_dc=d["psi_dc"],
        psi_em=d["psi_em"],
        lf_dc=d["LF_DC"],
        eta_elec=d["eta_elec"],
        e_base_t0=d["E_base_t0"],
    )
    return ScenarioConfig(
        horizon=horizon,
        techs=techs,
        storage=storage,
        econ=econ,
        demand=demand,
        clustering=ClusteringSettings(**norm["clustering"]),
        solver=SolverSettings(**norm["solver"]),
        planner=PlannerSettings(**norm["planner"]),
        data_dir=norm["data_dir"],
        raw=norm,
    )


def load_scenario(config_path: str | os.PathLike) -> ScenarioConfig:
    path = Path(config_path)
    with open(path) as fh:
        raw = json.load(fh)
    return scenario_from_dict(raw, path.parent)


def scenario_to_dict(config: ScenarioConfig) -> dict:
    """Inverse of :func:`scenario_from_dict` (costs back in $/kW)."""
    h = config.horizon
    ys = lambda table, scale=1.0: {str(y): table[y] / scale for y in h}  # noqa: E731
    e = config.econ
    s = config.storage
    d = config.demand
    return {
        "name": config.raw.get("name", "scenario") if config.raw else "scenario",
        "horizon": list(h),
        "data_dir": config.data_dir,
        "econ": {
            "interest_rate": e.interest_rate,
            "base_year": e.base_year,
            "demand_curtail_cost": e.demand_curtail_cost,
            "gen_curtail_cost": e.gen_curtail_cost,
            "s_base": e.s_base,
            "trans_capex": ys(e.trans_capex),
            "trans_lead_time": e.trans_lead_time,
            "max_new_gen": e.max_new_gen,
            "max_new_trans": e.max_new_trans,
            "max_new_stor": e.max_new_stor,
        },
        "storage": {
            "capex": ys(s.capex, KW_PER_MW),
            "fom": ys(s.fom, KW_PER_MW),
            "lead_time": s.lead_time,
            "duration_h": s.duration_h,
            "eta_charge": s.eta_charge,
            "eta_discharge": s.eta_discharge,
        },
        "tech": {
            kind.value: {
                "lead_time": t.lead_time,
                "f_min": t.f_min,
                "f_max": t.f_max,
                "ramp": t.ramp,
                "earliest_build_year": t.earliest_build_year,
                **{
                    str(y): {
                        "capex": t.costs[y].capex / KW_PER_MW,
                        "fom": t.costs[y].fom / KW_PER_MW,
                        "vom": t.costs[y].vom,
                        "fuel": t.costs[y].fuel,
                        "heat_rate": t.costs[y].heat_rate,
                    }
                    for y in h
                },
            }
            for kind, t in config.techs.items()
        },
        "demand": {
            "E_base": ys(d.e_base),
            "E_base_t0": d.e_base_t0,
            "P_DC": ys(d.p_dc),
            "LF_DC": d.lf_dc,
            "Q_M": d.q_m,
            "phi": ys(d.phi),
            "eta_elec": d.eta_elec,
            "P_base_peak": ys(d.p_base_peak),
            "psi_dc": dict(d.psi_dc),
            "psi_em": dict(d.psi_em),
        },
        "clustering": vars(config.clustering).copy(),
        "solver": vars(config.solver).copy(),
        "planner": vars(config.planner).copy(),
    }


def dump_scenario(config: ScenarioConfig, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# grid tables


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return [{k.strip(): (v.strip() if v is not None else "") for k, v in r.items()} for r in csv.DictReader(fh)]


def _opt_float(s: str | None) -> float | None:
    return None if s is None or s == "" else float(s)


def load_topology(data_dir: str | os.PathLike, validate: bool = True) -> GridTopology:
    d = Path(data_dir)
    buses = [
        Bus(int(r["id"]), _opt_float(r.get("lat")), _opt_float(r.get("lon")), (r.get("county") or None))
        for r in _read_rows(d / "buses.csv")
    ]
    gens = [Generator(int(r["bus"]), TechKind.parse(r["tech"]), float(r["capacity_mw"])) for r in _read_rows(d / "generators.csv")]
    lines = []
    if (d / "lines.csv").exists():
        for r in _read_rows(d / "lines.csv"):
            a, b = int(r["from"]), int(r["to"])
            lines.append(Line(a, b, float(r["reactance_pu"]), float(r["capacity_mw"]), _opt_float(r.get("length_mi"))))
    storage = {}
    if (d / "storage.csv").exists():
        storage = {int(r["bus"]): float(r["capacity_mw"]) for r in _read_rows(d / "storage.csv")}
    topo = aggregate_raw_grid(buses, gens, lines, storage)
    if validate:
        report = validate_topology(topo)
        if not report.ok:
            raise ValueError("invalid topology: " + "; ".join(report.violations))
    return topo


def write_topology(topology: GridTopology, data_dir: str | os.PathLike) -> None:
    d = Path(data_dir)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "buses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "lat", "lon", "county"])
        for b in topology.buses:
            w.writerow([b.id, _fmt(b.latitude), _fmt(b.longitude), b.county_id or ""])
    with open(d / "generators.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bus", "tech", "capacity_mw"])
        for g in topology.generators:
            w.writerow([g.bus, g.tech.value, _fmt(g.initial_capacity)])
    with open(d / "lines.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "reactance_pu", "capacity_mw", "length_mi"])
        for ln in topology.lines:
            w.writerow([ln.from_bus, ln.to_bus, _fmt(ln.reactance), _fmt(ln.initial_capacity), _fmt(ln.length_mi)])
    if topology.initial_storage:
        with open(d / "storage.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bus", "capacity_mw"])
            for bus, cap in sorted(topology.initial_storage.items()):
                w.writerow([bus, _fmt(cap)])


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


# ---------------------------------------------------------------------------
# hourly profiles


def read_profile_csv(path: str | os.PathLike, kind: str = "load", known_buses=None) -> ProfileMatrix:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [row for row in reader if row]
    try:
        bus_ids = tuple(int(h) for h in header)
    except ValueError:
        raise ValueError(f"{path.name}: header must list integer bus ids") from None
    if known_buses is not None:
        unknown = [b for b in bus_ids if b not in set(known_buses)]
        if unknown:
            raise ValueError(f"{path.name}: unknown bus id {unknown[0]}")
    if len(body) != HOURS:
        raise ValueError(f"{path.name}: expected {HOURS} values, got {len(body)}")
    for k, row in enumerate(body):
        if len(row) != len(bus_ids):
            raise ValueError(f"{path.name}: row {k + 2} has {len(row)} fields, expected {len(bus_ids)}")
    values = np.array(body, dtype=float).T.copy()
    if np.isnan(values).any():
        raise ValueError(f"{path.name}: contains NaN")
    if kind == "cf":
        values = check_capacity_factors(values, path.name)
    return ProfileMatrix(bus_ids, values, kind)


def check_capacity_factors(values: np.ndarray, what: str = "profile") -> np.ndarray:
    if (values < 0).any() or (values > CF_SLACK).any():
        raise ValueError(f"{what}: capacity factor out of range")
    return np.minimum(values, 1.0)


def write_profile_csv(profile: ProfileMatrix, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(profile.bus_ids)
        for h in range(HOURS):
            w.writerow([repr(float(v)) for v in profile.values[:, h]])


def load_profiles(data_dir: str | os.PathLike, known_buses=None) -> dict[str, ProfileMatrix]:
    """Read ``base_load`` plus whichever of ``cf_solar``/``cf_wind`` exist.

    Raw generation files (``gen_solar.csv``/``gen_wind.csv``) are returned
    under their own keys; :func:`gridx.cluster.compute_renewable_cf` turns
    them into capacity factors once capacities are known.
    """
    d = Path(data_dir)
    out = {"base_load": read_profile_csv(d / "base_load.csv", "load", known_buses)}
    for name in ("cf_solar", "cf_wind"):
        if (d / f"{name}.csv").exists():
            out[name] = read_profile_csv(d / f"{name}.csv", "cf", known_buses)
    for name in ("gen_solar", "gen_wind"):
        if (d / f"{name}.csv").exists():
            out[name] = read_profile_csv(d / f"{name}.csv", "load", known_buses)
    return out


# ---------------------------------------------------------------------------
# spatial tables


def load_centroids(path: str | os.PathLike) -> dict[str, tuple[float, float]]:
    return {r["county"]: (float(r["lat"]), float(r["lon"])) for r in _read_rows(Path(path))}


def load_bus_county(path: str | os.PathLike) -> dict[int, str]:
    return {int(r["bus"]): r["county"] for r in _read_rows(Path(path))}
