"""Regenerate the bundled three-bus toy scenario under src/gridx/data/toy.

Synthetic West/Central/Gulf Texas system: a windy remote bus (Midland), a
mid-size load bus (Austin) and a large coastal load bus (Houston).  Demand
growth follows the shape of the full-scale scenario, scaled to toy size.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "gridx" / "data" / "toy"
YEARS = list(range(2025, 2032))

# full-scale trajectories, used only for their shape
E_BASE_FULL = [485.90, 538.94, 595.63, 685.31, 747.59, 808.97, 846.99]
P_BASE_FULL = [85.76, 92.22, 97.63, 107.64, 110.86, 116.77, 120.33]
P_DC_FULL = [0.00, 2.43, 6.66, 13.90, 18.00, 22.18, 24.20]
PHI = [0.00, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30]


def profiles(rng: np.random.Generator):
    hours = np.arange(8760)
    day = hours // 24
    hod = hours % 24
    season = 1.0 + 0.18 * np.cos(2 * np.pi * (day - 200) / 365)  # summer peak
    diurnal = 1.0 + 0.22 * np.sin(2 * np.pi * (hod - 9) / 24)
    means = np.array([300.0, 600.0, 900.0])
    noise = rng.normal(0.0, 0.03, size=(3, 8760))
    load = means[:, None] * season * diurnal * (1.0 + noise)

    daylight = np.clip(np.sin(np.pi * (hod - 6) / 13), 0.0, None) * (hod >= 6) * (hod <= 19)
    clouds = np.repeat(rng.uniform(0.55, 1.0, size=365), 24)
    solar_season = 0.85 + 0.15 * np.cos(2 * np.pi * (day - 172) / 365)
    solar = np.vstack([daylight * clouds * solar_season * s for s in (0.95, 0.85)])

    front = np.repeat(rng.uniform(0.2, 1.0, size=365), 24)
    night = 0.75 + 0.25 * np.cos(2 * np.pi * hod / 24)
    wind = np.clip(0.55 * front * night + rng.normal(0.0, 0.04, 8760), 0.0, 1.0)[None, :]
    return load, np.clip(solar, 0.0, 1.0), wind


def write_matrix(path: Path, bus_ids, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(bus_ids)
        for h in range(values.shape[1]):
            w.writerow([f"{v:.4f}" for v in values[:, h]])


def write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20250101)
    load, solar, wind = profiles(rng)
    write_matrix(OUT / "base_load.csv", [0, 1, 2], load)
    write_matrix(OUT / "cf_solar.csv", [0, 1], solar)
    write_matrix(OUT / "cf_wind.csv", [0], wind)

    write_rows(
        OUT / "buses.csv",
        ["id", "lat", "lon", "county"],
        [[0, 31.9974, -102.0779, ""], [1, 30.2672, -97.7431, ""], [2, 29.7604, -95.3698, ""]],
    )
    write_rows(
        OUT / "generators.csv",
        ["bus", "tech", "capacity_mw"],
        [
            [0, "natural_gas", 150],
            [0, "solar", 120],
            [0, "wind", 500],
            [0, "wind", 200],
            [1, "natural_gas", 500],
            [1, "solar", 150],
            [1, "hydro", 40],
            [2, "natural_gas", 700],
            [2, "natural_gas", 250],
            [2, "coal", 400],
        ],
    )
    write_rows(
        OUT / "lines.csv",
        ["from", "to", "reactance_pu", "capacity_mw", "length_mi"],
        [[0, 1, 0.12, 300, ""], [1, 2, 0.06, 500, ""], [0, 2, 0.16, 200, ""], [1, 2, 0.06, 200, ""]],
    )
    write_rows(
        OUT / "county_centroids.csv",
        ["county", "lat", "lon"],
        [
            ["48201", 29.8577, -95.3936],  # Harris
            ["48245", 29.8540, -94.1520],  # Jefferson (no bus)
            ["48329", 31.8693, -102.0316],  # Midland
            ["48453", 30.3345, -97.7819],  # Travis
            ["48491", 30.6483, -97.6013],  # Williamson (no bus)
        ],
    )
    write_rows(OUT / "psi_dc.csv", ["county", "share"], [["48453", 0.45], ["48491", 0.25], ["48201", 0.30]])
    write_rows(OUT / "psi_em.csv", ["county", "share"], [["48201", 0.55], ["48245", 0.45]])

    e0 = float(load.sum()) / 1e6  # TWh
    peak0 = float(load.sum(axis=0).max()) / 1e3  # GW
    scale = e0 / E_BASE_FULL[0]
    per_year = lambda vals: {str(y): round(v, 6) for y, v in zip(YEARS, vals)}  # noqa: E731

    def tech(lead, capex, fom, vom=0.0, fuel=0.0, hr=0.0, decline=0.0, **extra):
        entry = {"lead_time": lead, **extra}
        for k, y in enumerate(YEARS):
            entry[str(y)] = {
                "capex": round(capex * (1 - decline) ** k, 2),
                "fom": fom,
                "vom": vom,
                "fuel": fuel,
                "heat_rate": hr,
            }
        return entry

    scenario = {
        "name": "toy3",
        "horizon": {"start": 2025, "end": 2031},
        "econ": {
            "interest_rate": 0.05,
            "base_year": 2022,
            "trans_capex": 1000.0,
            "demand_curtail_cost": 5000.0,
            "gen_curtail_cost": 100.0,
            "s_base": 100.0,
            "trans_lead_time": 3,
            "max_new_gen": 5000.0,
            "max_new_trans": 2000.0,
            "max_new_stor": 2000.0,
        },
        "storage": {
            "capex": {str(y): round(1400 * 0.96**k, 2) for k, y in enumerate(YEARS)},
            "fom": 35.0,
            "lead_time": 1,
            "duration_h": 4,
            "round_trip": 0.85,
        },
        "tech": {
            "nuclear": tech(6, 7500, 150, vom=2.5, fuel=0.7, hr=10.4, f_min=0.5, f_max=0.95, ramp=0.2, earliest_build_year=2029),
            "coal": tech(5, 4500, 80, vom=5.0, fuel=2.0, hr=10.0, f_min=0.3, f_max=0.9, ramp=0.4),
            "natural_gas": tech(3, 1100, 27, vom=2.0, fuel=3.5, hr=6.5, f_min=0.1, f_max=0.95, ramp=0.7),
            "solar": tech(1, 1300, 20, decline=0.03),
            "wind": tech(3, 1400, 30, decline=0.01),
            "hydro": tech(3, 5000, 50),
        },
        "demand": {
            "E_base": per_year([e0 * v / E_BASE_FULL[0] for v in E_BASE_FULL]),
            "P_DC": per_year([v * scale for v in P_DC_FULL]),
            "Q_M": round(18.97 * scale, 6),
            "phi": per_year(PHI),
            "eta_elec": 0.97,
            "P_base_peak": per_year([peak0 * v / P_BASE_FULL[0] for v in P_BASE_FULL]),
        },
        "clustering": {"k": 2, "seed": 7, "restarts": 10},
        "solver": {"backend": "simplex", "tolerance": 1e-7},
    }
    with open(OUT / "scenario.json", "w") as fh:
        json.dump(scenario, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
