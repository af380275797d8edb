"""Load synthesis on the representative-day grid.

Three components, all in MW:

* base load per bus: the clustered base profile plus a uniform increment
  ``(E_t - E_t0) * 1e6 / (n_buses * 8760)`` that spreads the annual energy
  growth (TWh) evenly over buses and hours;
* data-center load per region: ``psi_c * P_DC_t * LF * 1000``, flat within
  a year;
* electrified manufacturing load per region:
  ``psi_e * Q_M * phi_t / eta_elec * 1000``, flat within a year.

The annual system peak is the sum of the base peak, the data-center peak and
the manufacturing electric load (all GW in, MW out).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cluster import RepresentativeDays
from .domain import DemandScenario

MW_PER_GW = 1000.0
MWH_PER_TWH = 1e6
HOURS_PER_YEAR = 8760


@dataclass(eq=False)
class DemandCube:
    """Loads per (location, year, day, hour) plus annual peaks.

    ``base`` has shape (n_buses, T, D, H); ``dc`` and ``em`` have shape
    (n_regions, T, D, H) with region order given by ``dc_regions`` and
    ``em_regions``; ``peak`` has shape (T,).
    """

    years: tuple[int, ...]
    bus_ids: tuple[int, ...]
    dc_regions: tuple[str, ...]
    em_regions: tuple[str, ...]
    base: np.ndarray
    dc: np.ndarray
    em: np.ndarray
    peak: np.ndarray

    def system_total(self) -> np.ndarray:
        """System demand per (t, d, h) in MW."""
        return self.base.sum(axis=0) + self.dc.sum(axis=0) + self.em.sum(axis=0)

    def annual_energy(self, weights: np.ndarray) -> dict[str, np.ndarray]:
        """Weighted annual energy per component and year, MWh."""
        w = np.asarray(weights, dtype=float)
        return {
            "base": np.einsum("ntdh,d->t", self.base, w),
            "dc": np.einsum("ctdh,d->t", self.dc, w),
            "em": np.einsum("etdh,d->t", self.em, w),
        }

    def save(self, path) -> None:
        """Binary dump (numpy ``.npz`` container)."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                years=np.array(self.years),
                bus_ids=np.array(self.bus_ids),
                dc_regions=np.array(self.dc_regions, dtype=str),
                em_regions=np.array(self.em_regions, dtype=str),
                base=self.base,
                dc=self.dc,
                em=self.em,
                peak=self.peak,
            )

    @classmethod
    def load(cls, path) -> "DemandCube":
        with np.load(path) as z:
            return cls(
                tuple(int(y) for y in z["years"]),
                tuple(int(b) for b in z["bus_ids"]),
                tuple(str(r) for r in z["dc_regions"]),
                tuple(str(r) for r in z["em_regions"]),
                z["base"].copy(),
                z["dc"].copy(),
                z["em"].copy(),
                z["peak"].copy(),
            )

    def audit_csv(self, year: int) -> str:
        """One row per (location, day, hour) for a single year."""
        t = self.years.index(year)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "location", "day", "hour", "mw"])
        for comp, labels, arr in (
            ("base", self.bus_ids, self.base),
            ("dc", self.dc_regions, self.dc),
            ("em", self.em_regions, self.em),
        ):
            for i, loc in enumerate(labels):
                for d in range(arr.shape[2]):
                    for h in range(arr.shape[3]):
                        w.writerow([comp, loc, d + 1, h + 1, repr(float(arr[i, t, d, h]))])
        return buf.getvalue()

    def write_audit(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for y in self.years:
            p = out_dir / f"demand_{y}.csv"
            p.write_text(self.audit_csv(y))
            paths.append(p)
        return paths


def base_increment_mw(e_t: float, e_t0: float, n_buses: int) -> float:
    """Per-bus constant increment in MW for an energy change in TWh."""
    return (e_t - e_t0) * MWH_PER_TWH / (n_buses * HOURS_PER_YEAR)


def build_base_load(
    base_profiles: np.ndarray, e_base: Mapping[int, float], e_base_t0: float, years: Sequence[int]
) -> np.ndarray:
    """Base load for every year, shape (n_buses, T, D, H).

    Parameters
    ----------
    base_profiles : ndarray, shape (n_buses, D, H)
        Representative-day base load of the reference year, MW.
    e_base : mapping
        Annual base energy per calendar year, TWh.
    e_base_t0 : float
        Annual base energy of the reference profiles, TWh.
    """
    prof = np.asarray(base_profiles, dtype=float)
    n = prof.shape[0]
    out = np.empty((n, len(years)) + prof.shape[1:])
    for t, y in enumerate(years):
        if e_base[y] < e_base_t0:
            warnings.warn(f"{y}: base energy below the reference year", stacklevel=2)
        out[:, t] = prof + base_increment_mw(e_base[y], e_base_t0, n)
    if np.any(out < 0):
        raise ValueError("base load becomes negative after scaling")
    return out


def build_dc_load(
    p_dc: Mapping[int, float], lf: float, psi: Mapping[str, float], years: Sequence[int], days: int, hours: int
) -> tuple[tuple[str, ...], np.ndarray]:
    """Data-center load per region, flat over (d, h).  ``p_dc`` in GW."""
    if not 0.0 < lf <= 1.0:
        raise ValueError("load factor must lie in (0, 1]")
    regions = tuple(psi)
    level = np.array([[psi[c] * p_dc[y] * lf * MW_PER_GW for y in years] for c in regions]).reshape(len(regions), len(years))
    return regions, np.broadcast_to(level[:, :, None, None], level.shape + (days, hours)).copy()


def em_system_mw(q_m: float, phi: float, eta_elec: float) -> float:
    """Electric load replacing a heat duty ``q_m * phi`` GW, in MW."""
    return q_m * phi / eta_elec * MW_PER_GW


def build_em_load(
    q_m: float,
    phi: Mapping[int, float],
    eta_elec: float,
    psi: Mapping[str, float],
    years: Sequence[int],
    days: int,
    hours: int,
) -> tuple[tuple[str, ...], np.ndarray]:
    """Electrified manufacturing load per region, flat over (d, h)."""
    if not 0.0 < eta_elec <= 1.0:
        raise ValueError("heating efficiency must lie in (0, 1]")
    if any(not 0.0 <= phi[y] <= 1.0 for y in years):
        raise ValueError("electrification ratio must lie in [0, 1]")
    regions = tuple(psi)
    level = np.array([[psi[e] * em_system_mw(q_m, phi[y], eta_elec) for y in years] for e in regions]).reshape(
        len(regions), len(years)
    )
    return regions, np.broadcast_to(level[:, :, None, None], level.shape + (days, hours)).copy()


def compute_peak(
    p_base_peak: Mapping[int, float],
    p_dc: Mapping[int, float],
    q_m: float,
    phi: Mapping[int, float],
    eta_elec: float,
    years: Sequence[int],
) -> np.ndarray:
    """Annual system peak in MW from GW inputs."""
    return np.array([(p_base_peak[y] + p_dc[y] + q_m * phi[y] / eta_elec) * MW_PER_GW for y in years])


def build_demand_cube(
    scenario: DemandScenario,
    repdays: RepresentativeDays,
    psi_dc: Mapping[str, float] | None = None,
    psi_em: Mapping[str, float] | None = None,
) -> DemandCube:
    """Assemble all demand components.

    ``psi_dc``/``psi_em`` are the effective regional shares after spatial
    reallocation; they default to the scenario's raw shares.
    """
    years = tuple(scenario.horizon)
    psi_dc = dict(scenario.psi_dc if psi_dc is None else psi_dc)
    psi_em = dict(scenario.psi_em if psi_em is None else psi_em)
    psi_dc = {c: v for c, v in psi_dc.items() if v > 0}
    psi_em = {e: v for e, v in psi_em.items() if v > 0}
    e0 = scenario.e_base_t0
    if e0 is None:
        e0 = repdays.annual_base_energy() / MWH_PER_TWH
    base = build_base_load(repdays.base_load, scenario.e_base, e0, years)
    _, days, hours = repdays.base_load.shape
    dc_regions, dc = build_dc_load(scenario.p_dc, scenario.lf_dc, psi_dc, years, days, hours)
    em_regions, em = build_em_load(scenario.q_m, scenario.phi, scenario.eta_elec, psi_em, years, days, hours)
    peak = compute_peak(scenario.p_base_peak, scenario.p_dc, scenario.q_m, scenario.phi, scenario.eta_elec, years)
    return DemandCube(years, tuple(repdays.bus_ids), dc_regions, em_regions, base, dc, em, peak)
