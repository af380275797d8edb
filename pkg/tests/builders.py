"""In-memory fixture builders shared by the test modules."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from gridx.cluster import RepresentativeDays
from gridx.demand import DemandCube
from gridx.domain import (
    Bus,
    DemandScenario,
    EconParams,
    Generator,
    GridTopology,
    Line,
    PlannerSettings,
    ScenarioConfig,
    StorageParams,
    TechCatalogEntry,
    TechKind,
    TechYearCost,
)
from gridx.planner import PlanInputs
from gridx.spatial import RegionMap


def tech(
    kind: TechKind,
    years: Sequence[int],
    capex: float = 0.0,
    fom: float = 0.0,
    vom: float = 0.0,
    lead_time: int = 0,
    f_min: float = 0.0,
    f_max: float = 1.0,
    ramp: float = 1.0,
    earliest_build_year: int | None = None,
) -> TechCatalogEntry:
    costs = {y: TechYearCost(capex=capex, fom=fom, vom=vom) for y in years}
    return TechCatalogEntry(kind, lead_time, costs, f_min, f_max, ramp, earliest_build_year)


def make_config(
    years: Sequence[int],
    techs: Mapping[TechKind, TechCatalogEntry],
    *,
    base_year: int | None = None,
    interest_rate: float = 0.05,
    trans_capex: float = 1000.0,
    storage_capex: float = 1400.0,
    storage_fom: float = 35.0,
    storage_lead_time: int = 1,
    duration_h: float = 4.0,
    round_trip: float = 0.85,
    planner: PlannerSettings = PlannerSettings(),
    **econ,
) -> ScenarioConfig:
    years = tuple(years)
    zeros = {y: 0.0 for y in years}
    eta = math.sqrt(round_trip)
    return ScenarioConfig(
        horizon=years,
        techs=dict(techs),
        storage=StorageParams(
            capex={y: storage_capex for y in years},
            fom={y: storage_fom for y in years},
            lead_time=storage_lead_time,
            duration_h=duration_h,
            eta_charge=eta,
            eta_discharge=eta,
        ),
        econ=EconParams(
            interest_rate=interest_rate,
            base_year=years[0] if base_year is None else base_year,
            trans_capex={y: trans_capex for y in years},
            **econ,
        ),
        demand=DemandScenario(years, zeros, zeros, 0.0, zeros, zeros, {}, {}),
        planner=planner,
    )


def make_topology(
    coords: Sequence[tuple[float, float]],
    generators: Sequence[tuple[int, TechKind, float]],
    lines: Sequence[tuple[int, int, float, float]] = (),
    storage: Mapping[int, float] | None = None,
    counties: Sequence[str] | None = None,
) -> GridTopology:
    """``lines`` entries are ``(from, to, reactance, capacity)``."""
    buses = tuple(
        Bus(i, lat, lon, None if counties is None else counties[i]) for i, (lat, lon) in enumerate(coords)
    )
    gens = tuple(Generator(b, k, c) for b, k, c in generators)
    lns = tuple(Line(a, b, x, c) for a, b, x, c in lines)
    return GridTopology(buses, gens, lns, dict(storage or {}))


def make_repdays(
    base_load: np.ndarray, weights: Sequence[float], cf: Mapping[TechKind, np.ndarray] | None = None
) -> RepresentativeDays:
    """Representative days from (N, D, H) profiles; calendar days follow the weights."""
    base_load = np.asarray(base_load, dtype=float)
    w = np.asarray(weights, dtype=float)
    counts = np.maximum(np.round(w).astype(int), 1)
    assignments = np.repeat(np.arange(w.size), counts)
    return RepresentativeDays(
        tuple(range(base_load.shape[0])),
        assignments,
        w,
        base_load,
        {k: np.asarray(v, dtype=float) for k, v in (cf or {}).items()},
    )


def make_inputs(
    config: ScenarioConfig,
    topology: GridTopology,
    base: np.ndarray,
    weights: Sequence[float],
    cf: Mapping[TechKind, np.ndarray] | None = None,
    peak: Sequence[float] | None = None,
    dc: Mapping[str, np.ndarray] | None = None,
    em: Mapping[str, np.ndarray] | None = None,
    region_map: RegionMap | None = None,
) -> PlanInputs:
    """Planning inputs with an explicit base-load cube of shape (N, T, D, H).

    ``dc``/``em`` map a region id to its (T, D, H) load; ``peak`` defaults to
    zero so adequacy never binds unless a test asks for it.
    """
    base = np.asarray(base, dtype=float)
    N, T, D, H = base.shape
    repdays = make_repdays(base[:, 0], weights, cf)

    def regional(table):
        table = dict(table or {})
        names = tuple(table)
        arr = np.array([table[r] for r in names], dtype=float).reshape(len(names), T, D, H)
        return names, arr

    dc_regions, dc_arr = regional(dc)
    em_regions, em_arr = regional(em)
    demand = DemandCube(
        tuple(config.horizon),
        repdays.bus_ids,
        dc_regions,
        em_regions,
        base,
        dc_arr,
        em_arr,
        np.zeros(T) if peak is None else np.asarray(peak, dtype=float),
    )
    return PlanInputs(config, topology, repdays, demand, region_map)


def ercot_scale_inputs(seed: int = 0) -> PlanInputs:
    """Synthetic inputs at the published ERCOT dimensions.

    123 buses, 151 generators (70 thermal, 81 renewable), 173 lines, 7 years,
    5 representative days of 24 hours, 38 data-center and 10 manufacturing
    regions with one bus each.
    """
    rng = np.random.default_rng(seed)
    years = tuple(range(2025, 2032))
    N, T, D, H = 123, len(years), 5, 24
    coords = list(zip(rng.uniform(26.0, 36.0, N), rng.uniform(-106.0, -94.0, N)))
    counties = [f"C{i:03d}" for i in range(N)]

    gens: list[tuple[int, TechKind, float]] = []
    gens += [(b, TechKind.NATURAL_GAS, 500.0) for b in range(50)]
    gens += [(b, TechKind.COAL, 600.0) for b in range(50, 65)]
    gens += [(b, TechKind.NUCLEAR, 1000.0) for b in range(65, 70)]
    gens += [(b, TechKind.SOLAR, 200.0) for b in range(41)]
    gens += [(b, TechKind.WIND, 300.0) for b in range(41, 81)]

    pairs = [(i, i + 1) for i in range(N - 1)]
    seen = set(pairs)
    while len(pairs) < 173:
        a, b = sorted(int(v) for v in rng.choice(N, 2, replace=False))
        if (a, b) not in seen:
            seen.add((a, b))
            pairs.append((a, b))
    lines = [(a, b, float(rng.uniform(0.01, 0.2)), 800.0) for a, b in sorted(pairs)]
    topo = make_topology(coords, gens, lines, storage={0: 100.0}, counties=counties)

    techs = {k: tech(k, years, capex=1000.0, fom=20.0, vom=5.0, lead_time=2) for k in TechKind}
    cfg = make_config(years, techs)

    base = rng.uniform(100.0, 400.0, (N, 1, D, H)) * np.ones((1, T, 1, 1))
    weights = [73.0] * D
    cf = {TechKind.SOLAR: rng.uniform(0, 1, (N, D, H)), TechKind.WIND: rng.uniform(0, 1, (N, D, H))}
    dc_ids, em_ids = counties[:38], counties[38:48]
    dc = {c: np.full((T, D, H), 50.0) for c in dc_ids}
    em = {c: np.full((T, D, H), 20.0) for c in em_ids}
    region_map = RegionMap(
        bus_county={i: counties[i] for i in range(N)},
        centroids={},
        psi_dc={c: 1.0 / 38 for c in dc_ids},
        psi_em={c: 1.0 / 10 for c in em_ids},
    )
    return make_inputs(cfg, topo, base, weights, cf, dc=dc, em=em, region_map=region_map)


def write_mini_scenario(directory, k: int = 2, with_dc: bool = True):
    """Two-bus, two-year scenario on disk (JSON plus CSV tables); returns the JSON path."""
    import json
    from pathlib import Path

    from gridx.ingest import ProfileMatrix, write_profile_csv, write_topology

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    topo = make_topology(
        [(30.27, -97.74), (29.76, -95.37)],
        [(0, TechKind.NATURAL_GAS, 300.0), (1, TechKind.SOLAR, 100.0), (1, TechKind.WIND, 50.0)],
        [(0, 1, 0.05, 150.0)],
        storage={1: 20.0},
        counties=["48453", "48201"],
    )
    write_topology(topo, d)
    hours = np.arange(8760)
    day = (hours % 24) / 24.0
    season = np.cos(2 * np.pi * hours / 8760.0)
    load = np.vstack([150 + 40 * np.sin(2 * np.pi * day) + 20 * season, 90 + 25 * np.sin(2 * np.pi * day) - 10 * season])
    solar = np.clip(np.sin(np.pi * (day - 0.25) / 0.5), 0, 1) * (day > 0.25) * (day < 0.75)
    wind = 0.4 + 0.3 * np.cos(2 * np.pi * hours / 400.0)
    write_profile_csv(ProfileMatrix((0, 1), load), d / "base_load.csv")
    write_profile_csv(ProfileMatrix((0, 1), np.vstack([np.zeros(8760), solar]), "cf"), d / "cf_solar.csv")
    write_profile_csv(ProfileMatrix((0, 1), np.vstack([np.zeros(8760), wind]), "cf"), d / "cf_wind.csv")
    (d / "county_centroids.csv").write_text("county,lat,lon\n48453,30.33,-97.78\n48201,29.86,-95.39\n48491,30.66,-97.6\n")
    e0 = load.sum() / 1e6
    years = [2025, 2026]
    cost = lambda capex, fom, vom: {str(y): {"capex": capex, "fom": fom, "vom": vom} for y in years}  # noqa: E731
    raw = {
        "name": "mini",
        "horizon": years,
        "econ": {"interest_rate": 0.05, "base_year": 2024, "trans_capex": 1.0, "trans_lead_time": 1},
        "storage": {"capex": 1.2, "fom": 0.03, "lead_time": 1, "duration_h": 4, "round_trip": 0.85},
        "tech": {
            "natural_gas": {"lead_time": 1, "f_min": 0.1, "f_max": 0.95, "ramp": 0.5, **cost(1.0, 0.02, 30.0)},
            "solar": {"lead_time": 1, **cost(1.1, 0.02, 0.0)},
            "wind": {"lead_time": 1, **cost(1.4, 0.03, 0.0)},
        },
        "demand": {
            "E_base": [e0, e0 * 1.05],
            "E_base_t0": e0,
            "P_DC": [0.0, 0.05 if with_dc else 0.0],
            "Q_M": 0.0,
            "phi": [0.0, 0.0],
            "P_base_peak": [0.25, 0.27],
            "psi_dc": {"48491": 1.0} if with_dc else {},
        },
        "clustering": {"k": k, "seed": 3, "restarts": 3},
    }
    path = d / "scenario.json"
    path.write_text(json.dumps(raw, indent=2))
    return path


THERMAL = (TechKind.NATURAL_GAS, TechKind.COAL, TechKind.NUCLEAR)
RENEWABLE = (TechKind.SOLAR, TechKind.WIND, TechKind.HYDRO)


def small_plan_inputs(
    n_bus=3,
    n_th=2,
    n_rn=2,
    extra_lines=0,
    T=2,
    D=2,
    H=3,
    dc_regions=1,
    em_regions=1,
    lead=1,
    planner: PlannerSettings = PlannerSettings(),
    seed=0,
    **econ,
) -> PlanInputs:
    """Small random planning instance with every constraint family present."""
    rng = np.random.default_rng(seed)
    years = tuple(range(2030, 2030 + T))
    coords = [(30.0 + 0.5 * i, -97.0 - 0.3 * i) for i in range(n_bus)]
    gens = [(i % n_bus, THERMAL[i // n_bus % 3], 100.0) for i in range(n_th)]
    gens += [(i % n_bus, RENEWABLE[i // n_bus % 3], 50.0) for i in range(n_rn)]
    lines = [(i, i + 1, 0.1, 80.0) for i in range(n_bus - 1)]
    pairs = {(a, b) for a, b, *_ in lines}
    for a in range(n_bus):
        for b in range(a + 2, n_bus):
            if len(pairs) < n_bus - 1 + extra_lines:
                pairs.add((a, b))
                lines.append((a, b, 0.2, 40.0))
    counties = [f"R{i}" for i in range(n_bus)]
    topo = make_topology(coords, gens, lines, storage={0: 10.0}, counties=counties)
    techs = {
        k: tech(k, years, capex=500.0, fom=10.0, vom=20.0 if k.is_thermal else 0.0, lead_time=lead, ramp=0.5)
        for k in TechKind
    }
    cfg = make_config(years, techs, planner=planner, **econ)
    base = rng.uniform(20, 60, (n_bus, T, D, H))
    cf = {TechKind.SOLAR: rng.uniform(0, 1, (n_bus, D, H)), TechKind.WIND: rng.uniform(0, 1, (n_bus, D, H))}
    dc = {counties[i]: np.full((T, D, H), 5.0) for i in range(dc_regions)}
    em = {counties[n_bus - 1 - i]: np.full((T, D, H), 3.0) for i in range(em_regions)}
    rm = RegionMap(
        {i: counties[i] for i in range(n_bus)},
        {},
        {c: 1 / max(dc_regions, 1) for c in dc},
        {c: 1 / max(em_regions, 1) for c in em},
    )
    return make_inputs(cfg, topo, base, np.full(D, 365.0 / D), cf, dc=dc, em=em, region_map=rm)
