"""Bus-to-county mapping and reallocation of large-load shares.

Buses take their county from an explicit table when one is given and
otherwise from the nearest county centroid (great-circle distance, ties to
the lower county id).  A county that carries large-load share but hosts no
bus hands its share to the nearest county that does, in a single hop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .domain import Bus

EARTH_RADIUS_MI = _kernels.EARTH_RADIUS_MI


def haversine_miles(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in miles between two (lat, lon) points in degrees."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2.0 * EARTH_RADIUS_MI * math.asin(math.sqrt(min(h, 1.0)))


def _county_key(cid: str):
    # numeric ids (FIPS codes) compare numerically, others lexically
    return (0, int(cid), cid) if cid.isdigit() else (1, 0, cid)


@dataclass
class RegionMap:
    bus_county: dict[int, str]
    centroids: dict[str, tuple[float, float]]
    psi_dc: dict[str, float] = field(default_factory=dict)
    psi_em: dict[str, float] = field(default_factory=dict)

    def buses_in(self, county: str) -> list[int]:
        return sorted(b for b, c in self.bus_county.items() if c == county)

    @property
    def dc_regions(self) -> list[str]:
        return sorted((c for c, v in self.psi_dc.items() if v > 0), key=_county_key)

    @property
    def em_regions(self) -> list[str]:
        return sorted((c for c, v in self.psi_em.items() if v > 0), key=_county_key)

    def to_dict(self) -> dict:
        return {
            "bus_county": {str(b): c for b, c in sorted(self.bus_county.items())},
            "psi_dc": dict(sorted(self.psi_dc.items(), key=lambda kv: _county_key(kv[0]))),
            "psi_em": dict(sorted(self.psi_em.items(), key=lambda kv: _county_key(kv[0]))),
            "dc_regions": {c: self.buses_in(c) for c in self.dc_regions},
            "em_regions": {c: self.buses_in(c) for c in self.em_regions},
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def assign_buses(
    buses: Iterable[Bus],
    county_centroids: Mapping[str, tuple[float, float]],
    explicit_map: Mapping[int, str] | None = None,
) -> RegionMap:
    """Give every bus exactly one county.

    Precedence: ``explicit_map`` entry, then the bus's own ``county_id``,
    then the nearest centroid.
    """
    explicit_map = explicit_map or {}
    names = sorted(county_centroids, key=_county_key)
    lat = np.array([county_centroids[c][0] for c in names], dtype=float)
    lon = np.array([county_centroids[c][1] for c in names], dtype=float)
    out: dict[int, str] = {}
    pending: list[Bus] = []
    for b in buses:
        if b.id in explicit_map:
            out[b.id] = str(explicit_map[b.id])
        elif b.county_id:
            out[b.id] = str(b.county_id)
        elif b.has_coordinates:
            pending.append(b)
        else:
            raise ValueError(f"bus {b.id} has neither a county entry nor coordinates")
    if pending:
        if not names:
            raise ValueError("nearest-county fallback needs county centroids")
        dist = _kernels.haversine_matrix(
            np.array([b.latitude for b in pending]), np.array([b.longitude for b in pending]), lat, lon
        )
        for b, row in zip(pending, dist):
            out[b.id] = names[int(np.argmin(row))]  # first minimum = lowest id
    return RegionMap(dict(sorted(out.items())), dict(county_centroids))


def reallocate_empty_regions(psi: Mapping[str, float], region_map: RegionMap) -> dict[str, float]:
    """Move the share of every bus-less region to its nearest bus-bearing region.

    Only regions with positive share survive.  Shares are moved as exact
    summands so the total is preserved.
    """
    occupied = set(region_map.bus_county.values())
    if not any(v > 0 for v in psi.values()):
        return {}
    targets = sorted((c for c in occupied if c in region_map.centroids), key=_county_key)
    gathered: dict[str, list[float]] = {}
    for region in sorted(psi, key=_county_key):
        share = float(psi[region])
        if share <= 0:
            continue
        if region in occupied:
            gathered.setdefault(region, []).append(share)
            continue
        if not targets:
            raise ValueError("no region contains any bus")
        if region not in region_map.centroids:
            raise ValueError(f"region {region} has no bus and no centroid")
        origin = region_map.centroids[region]
        dists = [haversine_miles(origin, region_map.centroids[t]) for t in targets]
        nearest = targets[int(np.argmin(dists))]
        gathered.setdefault(nearest, []).append(share)
    return {c: math.fsum(v) for c, v in sorted(gathered.items(), key=lambda kv: _county_key(kv[0]))}


def build_region_map(
    buses: Iterable[Bus],
    county_centroids: Mapping[str, tuple[float, float]],
    psi_dc: Mapping[str, float],
    psi_em: Mapping[str, float],
    explicit_map: Mapping[int, str] | None = None,
) -> RegionMap:
    rm = assign_buses(buses, county_centroids, explicit_map)
    rm.psi_dc = reallocate_empty_regions(psi_dc, rm)
    rm.psi_em = reallocate_empty_regions(psi_em, rm)
    return rm
