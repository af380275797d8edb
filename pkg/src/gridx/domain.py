"""Typed, validated value objects shared by every other module.

Units are normalised on ingest: capacities in MW, energy in MWh, money in
USD.  Capital and fixed costs given in $/kW are stored per MW.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

DEFAULT_ROUND_TRIP = 0.85
DEFAULT_STORAGE_HOURS = 4.0
HOURS_PER_YEAR = 8760


class TechClass(enum.Enum):
    THERMAL = "thermal"
    RENEWABLE = "renewable"


class TechKind(enum.Enum):
    NUCLEAR = "nuclear"
    COAL = "coal"
    NATURAL_GAS = "natural_gas"
    SOLAR = "solar"
    WIND = "wind"
    HYDRO = "hydro"

    @property
    def tech_class(self) -> TechClass:
        if self in (TechKind.NUCLEAR, TechKind.COAL, TechKind.NATURAL_GAS):
            return TechClass.THERMAL
        return TechClass.RENEWABLE

    @property
    def is_thermal(self) -> bool:
        return self.tech_class is TechClass.THERMAL

    @classmethod
    def parse(cls, text: str) -> "TechKind":
        key = text.strip().lower().replace(" ", "_").replace("-", "_")
        aliases = {"ng": "natural_gas", "gas": "natural_gas", "naturalgas": "natural_gas", "pv": "solar"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown technology {text!r}") from None


# canonical ordering used for generator columns and report rows
TECH_ORDER: tuple[TechKind, ...] = (
    TechKind.NUCLEAR,
    TechKind.NATURAL_GAS,
    TechKind.COAL,
    TechKind.SOLAR,
    TechKind.WIND,
    TechKind.HYDRO,
)


@dataclass(frozen=True)
class Bus:
    id: int
    latitude: float | None = None
    longitude: float | None = None
    county_id: str | None = None

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None and self.longitude is not None


@dataclass(frozen=True)
class Generator:
    bus: int
    tech: TechKind
    initial_capacity: float


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    reactance: float
    initial_capacity: float
    length_mi: float | None = None

    @property
    def pair(self) -> tuple[int, int]:
        return (self.from_bus, self.to_bus)


@dataclass(frozen=True)
class GridTopology:
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    initial_storage: Mapping[int, float] = field(default_factory=dict)

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def bus(self, bus_id: int) -> Bus:
        return self.buses[bus_id]

    def storage_at(self, bus_id: int) -> float:
        return float(self.initial_storage.get(bus_id, 0.0))


@dataclass(frozen=True)
class TechYearCost:
    """Per-year cost entry.  ``capex`` and ``fom`` are per MW."""

    capex: float
    fom: float
    vom: float = 0.0
    fuel: float = 0.0
    heat_rate: float = 0.0

    @property
    def variable_cost(self) -> float:
        """Total variable cost in $/MWh: VOM plus fuel times heat rate."""
        return self.vom + self.fuel * self.heat_rate


@dataclass(frozen=True)
class TechCatalogEntry:
    kind: TechKind
    lead_time: int
    costs: Mapping[int, TechYearCost]
    f_min: float = 0.0
    f_max: float = 1.0
    ramp: float = 1.0
    earliest_build_year: int | None = None

    def __post_init__(self) -> None:
        if int(self.lead_time) != self.lead_time or self.lead_time < 0:
            raise ValueError(f"{self.kind.value}: lead_time must be a non-negative integer")
        if not (0.0 <= self.f_min <= self.f_max <= 1.0):
            raise ValueError(f"{self.kind.value}: need 0 <= f_min <= f_max <= 1")
        if not 0.0 <= self.ramp <= 1.0:
            raise ValueError(f"{self.kind.value}: ramp must lie in [0, 1]")
        for year, c in self.costs.items():
            if min(c.capex, c.fom, c.vom, c.fuel, c.heat_rate) < 0:
                raise ValueError(f"{self.kind.value} {year}: costs must be non-negative")

    def cost(self, year: int) -> TechYearCost:
        try:
            return self.costs[year]
        except KeyError:
            raise KeyError(f"no cost entry for {self.kind.value} in {year}") from None


@dataclass(frozen=True)
class StorageParams:
    capex: Mapping[int, float]
    fom: Mapping[int, float]
    lead_time: int = 1
    duration_h: float = DEFAULT_STORAGE_HOURS
    eta_charge: float = math.sqrt(DEFAULT_ROUND_TRIP)
    eta_discharge: float = math.sqrt(DEFAULT_ROUND_TRIP)

    def __post_init__(self) -> None:
        for eta in (self.eta_charge, self.eta_discharge):
            if not 0.0 < eta <= 1.0:
                raise ValueError("storage efficiencies must lie in (0, 1]")
        if self.duration_h <= 0:
            raise ValueError("storage duration must be positive")
        if int(self.lead_time) != self.lead_time or self.lead_time < 0:
            raise ValueError("storage lead_time must be a non-negative integer")

    @property
    def round_trip(self) -> float:
        return self.eta_charge * self.eta_discharge


@dataclass(frozen=True)
class EconParams:
    interest_rate: float
    base_year: int
    trans_capex: Mapping[int, float]
    demand_curtail_cost: float = 5000.0
    gen_curtail_cost: float = 100.0
    s_base: float = 100.0
    trans_lead_time: int = 3
    max_new_gen: float = 1e5
    max_new_trans: float = 1e5
    max_new_stor: float = 1e5

    def discount_factor(self, year: int) -> float:
        return (1.0 + self.interest_rate) ** -(year - self.base_year)


@dataclass(frozen=True)
class DemandScenario:
    """Annual demand drivers.  Energies in TWh, powers in GW."""

    horizon: tuple[int, ...]
    e_base: Mapping[int, float]
    p_dc: Mapping[int, float]
    q_m: float
    phi: Mapping[int, float]
    p_base_peak: Mapping[int, float]
    psi_dc: Mapping[str, float]
    psi_em: Mapping[str, float]
    lf_dc: float = 0.9
    eta_elec: float = 0.97
    e_base_t0: float | None = None

    def __post_init__(self) -> None:
        for name, weights in (("psi_dc", self.psi_dc), ("psi_em", self.psi_em)):
            if not weights:
                continue
            total = math.fsum(weights.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{name}: region weights sum {total:.6g}")
            if any(v < 0 for v in weights.values()):
                raise ValueError(f"{name}: negative region weight")
        phis = [self.phi[y] for y in self.horizon]
        if any(b < a for a, b in zip(phis, phis[1:])):
            raise ValueError("electrification ratio must be non-decreasing in time")
        values = [self.q_m, self.lf_dc, self.eta_elec]
        for table in (self.e_base, self.p_dc, self.phi, self.p_base_peak):
            values.extend(table[y] for y in self.horizon)
        if any(v < 0 for v in values):
            raise ValueError("demand scenario values must be non-negative")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_topology(topology: GridTopology) -> ValidationReport:
    """Collect every structural problem of a topology instead of raising."""
    out: list[str] = []
    ids = [b.id for b in topology.buses]
    if sorted(ids) != list(range(len(ids))) or ids != sorted(ids):
        out.append("bus ids must be dense 0..N-1 in order")
    known = set(ids)
    for b in topology.buses:
        if b.latitude is not None and abs(b.latitude) > 90:
            out.append(f"bus {b.id}: latitude out of range")
        if b.longitude is not None and abs(b.longitude) > 180:
            out.append(f"bus {b.id}: longitude out of range")

    seen_gen: set[tuple[int, TechKind]] = set()
    for g in topology.generators:
        if g.bus not in known:
            out.append(f"generator at unknown bus {g.bus}")
        key = (g.bus, g.tech)
        if key in seen_gen:
            out.append(f"duplicate (bus,tech) generator ({g.bus}, {g.tech.value})")
        seen_gen.add(key)
        if g.initial_capacity < 0:
            out.append(f"generator ({g.bus}, {g.tech.value}): negative capacity")

    seen_line: set[tuple[int, int]] = set()
    adjacency: dict[int, set[int]] = defaultdict(set)
    for ln in topology.lines:
        bad = [b for b in ln.pair if b not in known]
        for b in bad:
            out.append(f"line {ln.from_bus}-{ln.to_bus}: unknown bus {b}")
        if ln.from_bus >= ln.to_bus:
            out.append(f"line {ln.from_bus}-{ln.to_bus}: endpoints must satisfy from < to")
        if ln.reactance <= 0:
            out.append(f"line {ln.from_bus}-{ln.to_bus}: nonpositive reactance")
        if ln.initial_capacity < 0:
            out.append(f"line {ln.from_bus}-{ln.to_bus}: negative capacity")
        if ln.length_mi is not None and ln.length_mi < 0:
            out.append(f"line {ln.from_bus}-{ln.to_bus}: negative length")
        key = tuple(sorted(ln.pair))
        if key in seen_line:
            out.append(f"duplicate line {key[0]}-{key[1]}")
        seen_line.add(key)
        if not bad:
            adjacency[ln.from_bus].add(ln.to_bus)
            adjacency[ln.to_bus].add(ln.from_bus)

    if len(ids) > 1:
        start = ids[0]
        reached = {start}
        queue = deque([start])
        while queue:
            for nb in adjacency[queue.popleft()]:
                if nb not in reached:
                    reached.add(nb)
                    queue.append(nb)
        for b in ids:
            if b not in reached:
                out.append(f"bus {b}: disconnected from bus {start}")
    return ValidationReport(tuple(out))


def _parallel_reactance(xs: Sequence[float]) -> float:
    if any(x == 0 for x in xs):
        raise ValueError("cannot merge lines with zero reactance")
    signs = {math.copysign(1.0, x) for x in xs}
    if len(signs) > 1:
        raise ValueError("mixed reactance signs on merged lines")
    return 1.0 / math.fsum(1.0 / x for x in xs)


def aggregate_raw_grid(
    buses: Iterable[Bus],
    raw_generators: Iterable[Generator],
    raw_lines: Iterable[Line],
    initial_storage: Mapping[int, float] | None = None,
) -> GridTopology:
    """Merge parallel generators per (bus, tech) and parallel lines per bus pair.

    Capacities add.  Merged lines take the parallel reactance
    ``1/X = sum(1/X_i)`` and the longest reported length.
    """
    gen_cap: dict[tuple[int, TechKind], list[float]] = defaultdict(list)
    for g in raw_generators:
        gen_cap[(g.bus, g.tech)].append(g.initial_capacity)
    tech_rank = {k: i for i, k in enumerate(TECH_ORDER)}
    generators = tuple(
        Generator(bus, tech, math.fsum(caps))
        for (bus, tech), caps in sorted(gen_cap.items(), key=lambda kv: (kv[0][0], tech_rank[kv[0][1]]))
    )

    grouped: dict[tuple[int, int], list[Line]] = defaultdict(list)
    for ln in raw_lines:
        a, b = sorted((ln.from_bus, ln.to_bus))
        grouped[(a, b)].append(ln)
    lines = []
    for (a, b), group in sorted(grouped.items()):
        if len(group) == 1:
            x = group[0].reactance
        else:
            x = _parallel_reactance([ln.reactance for ln in group])
        lengths = [ln.length_mi for ln in group if ln.length_mi is not None]
        lines.append(
            Line(a, b, x, math.fsum(ln.initial_capacity for ln in group), max(lengths) if lengths else None)
        )
    storage = {int(k): float(v) for k, v in (initial_storage or {}).items() if v}
    return GridTopology(tuple(sorted(buses, key=lambda b: b.id)), generators, tuple(lines), storage)


# Notation symbol -> (owning type, field).  Decision variables live in
# ``gridx.planner.VAR_SYMBOLS``.
SYMBOL_TABLE: dict[str, tuple[str, str]] = {
    "N": ("GridTopology", "buses"),
    "c_gen_0": ("Generator", "initial_capacity"),
    "c_trans_0": ("Line", "initial_capacity"),
    "c_stor_0": ("GridTopology", "initial_storage"),
    "X": ("Line", "reactance"),
    "L": ("Line", "length_mi"),
    "alpha_gen": ("TechYearCost", "capex"),
    "beta_gen": ("TechYearCost", "fom"),
    "gamma_gen": ("TechYearCost", "vom"),
    "gamma_fuel": ("TechYearCost", "fuel"),
    "HR": ("TechYearCost", "heat_rate"),
    "omega_gen": ("TechCatalogEntry", "lead_time"),
    "F_min": ("TechCatalogEntry", "f_min"),
    "F_max": ("TechCatalogEntry", "f_max"),
    "R_ramp": ("TechCatalogEntry", "ramp"),
    "alpha_stor": ("StorageParams", "capex"),
    "beta_stor": ("StorageParams", "fom"),
    "omega_stor": ("StorageParams", "lead_time"),
    "H_stor": ("StorageParams", "duration_h"),
    "eta_charge": ("StorageParams", "eta_charge"),
    "eta_disch": ("StorageParams", "eta_discharge"),
    "Ir": ("EconParams", "interest_rate"),
    "t_base": ("EconParams", "base_year"),
    "delta": ("EconParams", "demand_curtail_cost"),
    "zeta": ("EconParams", "gen_curtail_cost"),
    "alpha_trans": ("EconParams", "trans_capex"),
    "omega_trans": ("EconParams", "trans_lead_time"),
    "S_base": ("EconParams", "s_base"),
    "c_gen_max": ("EconParams", "max_new_gen"),
    "c_trans_max": ("EconParams", "max_new_trans"),
    "c_stor_max": ("EconParams", "max_new_stor"),
    "T": ("DemandScenario", "horizon"),
    "E_base": ("DemandScenario", "e_base"),
    "E_base_t0": ("DemandScenario", "e_base_t0"),
    "P_DC": ("DemandScenario", "p_dc"),
    "LF_DC": ("DemandScenario", "lf_dc"),
    "psi_c": ("DemandScenario", "psi_dc"),
    "psi_e": ("DemandScenario", "psi_em"),
    "Q_M": ("DemandScenario", "q_m"),
    "phi": ("DemandScenario", "phi"),
    "eta_elec": ("DemandScenario", "eta_elec"),
    "D_base_0": ("RepresentativeDays", "base_load"),
    "F_RN": ("RepresentativeDays", "capacity_factors"),
    "w_d": ("RepresentativeDays", "weights"),
    "D_base": ("DemandCube", "base"),
    "D_DC": ("DemandCube", "dc"),
    "D_EOR": ("DemandCube", "em"),
    "P_peak": ("DemandCube", "peak"),
}


@dataclass(frozen=True)
class ClusteringSettings:
    k: int = 5
    seed: int = 7
    restarts: int = 10
    profile: str = "mean"  # or "medoid"
    max_iter: int = 300


@dataclass(frozen=True)
class SolverSettings:
    backend: str = "simplex"  # or "external"
    tolerance: float = 1e-7
    max_iters: int | None = None
    command: str | None = None


@dataclass(frozen=True)
class PlannerSettings:
    forbid_stranded_investment: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    horizon: tuple[int, ...]
    techs: Mapping[TechKind, TechCatalogEntry]
    storage: StorageParams
    econ: EconParams
    demand: DemandScenario
    clustering: ClusteringSettings = ClusteringSettings()
    solver: SolverSettings = SolverSettings()
    planner: PlannerSettings = PlannerSettings()
    data_dir: str | None = None
    raw: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.horizon:
            raise ValueError("horizon must be non-empty")
        if list(self.horizon) != sorted(set(self.horizon)):
            raise ValueError("horizon years must be strictly increasing")

    @property
    def n_years(self) -> int:
        return len(self.horizon)

    def model_year(self, year: int) -> int:
        """1-based model index of a calendar year."""
        return self.horizon.index(year) + 1

    def lookup(self, key: str):
        """Resolve a dotted key such as ``demand.LF_DC`` in the normalised config."""
        node = self.raw
        for part in key.split("."):
            if isinstance(node, Mapping) and part in node:
                node = node[part]
            else:
                raise KeyError(key)
        return node
