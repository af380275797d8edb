"""Representative-day selection and renewable capacity factors.

Each of the 365 days becomes one feature vector: the 24-hour load of every
bus (z-normalised per bus over the year), followed by the raw 24-hour solar
and wind capacity factors of every bus that has them.  Days are grouped
with k-means (k-means++ seeding, several restarts, best inertia wins) and
every cluster is represented by the mean of its member days in physical
units, or optionally by its medoid day.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .domain import ClusteringSettings, TechKind
from .ingest import HOURS, ProfileMatrix

DAYS = 365
HOURS_PER_DAY = 24
HYDRO_CF = 0.41


@dataclass(eq=False)
class RepresentativeDays:
    """Weighted representative days.

    Attributes
    ----------
    bus_ids : tuple of int
        Row order of ``base_load`` and of each capacity-factor array.
    assignments : ndarray, shape (365,)
        Cluster id of every calendar day, 0-based.
    weights : ndarray, shape (k,)
        Number of calendar days each cluster stands for; sums to 365.
    base_load : ndarray, shape (n_buses, k, hours)
        Base load in MW.
    capacity_factors : dict
        ``TechKind -> ndarray (n_buses, k, hours)``; zero rows for buses
        without data.
    """

    bus_ids: tuple[int, ...]
    assignments: np.ndarray
    weights: np.ndarray
    base_load: np.ndarray
    capacity_factors: dict[TechKind, np.ndarray] = field(default_factory=dict)
    inertia: float = 0.0

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        self.base_load = np.asarray(self.base_load, dtype=float)
        self.assignments = np.asarray(self.assignments, dtype=np.int64)
        if self.base_load.ndim != 3 or self.base_load.shape[:2] != (len(self.bus_ids), self.weights.size):
            raise ValueError("base_load must have shape (n_buses, k, hours)")
        if np.any(self.weights <= 0):
            raise ValueError("every representative day needs a positive weight")
        for kind, arr in self.capacity_factors.items():
            if arr.shape != self.base_load.shape:
                raise ValueError(f"capacity factors for {kind.value} have the wrong shape")
        if not (np.all(np.isfinite(self.base_load)) and all(np.all(np.isfinite(a)) for a in self.capacity_factors.values())):
            raise ValueError("representative profiles must be finite")

    @property
    def k(self) -> int:
        return int(self.weights.size)

    @property
    def hours(self) -> int:
        return int(self.base_load.shape[2])

    def cf(self, kind: TechKind) -> np.ndarray:
        """Capacity factors for ``kind``; hydro is the constant availability."""
        if kind in self.capacity_factors:
            return self.capacity_factors[kind]
        if kind is TechKind.HYDRO:
            return hydro_cf(self.base_load.shape)
        return np.zeros_like(self.base_load)

    def annual_base_energy(self) -> float:
        """Weighted base energy in MWh represented by the profiles."""
        return float(np.einsum("d,ndh->", self.weights, self.base_load))

    def to_dict(self) -> dict:
        return {
            "bus_ids": list(self.bus_ids),
            "assignments": self.assignments.tolist(),
            "weights": self.weights.tolist(),
            "base_load": self.base_load.tolist(),
            "capacity_factors": {k.value: v.tolist() for k, v in self.capacity_factors.items()},
            "inertia": self.inertia,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RepresentativeDays":
        return cls(
            bus_ids=tuple(int(b) for b in data["bus_ids"]),
            assignments=np.array(data["assignments"], dtype=np.int64),
            weights=np.array(data["weights"], dtype=float),
            base_load=np.array(data["base_load"], dtype=float),
            capacity_factors={TechKind(k): np.array(v, dtype=float) for k, v in data["capacity_factors"].items()},
            inertia=float(data.get("inertia", 0.0)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "RepresentativeDays":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    restart: int


# ---------------------------------------------------------------------------
# capacity factors


def compute_renewable_cf(generation: ProfileMatrix, capacity: Mapping[int, float]) -> ProfileMatrix:
    """Hourly capacity factors ``output / installed capacity``, clamped to [0, 1].

    Parameters
    ----------
    generation : ProfileMatrix
        Hourly output in MW per bus.
    capacity : mapping
        Installed MW per bus.
    """
    rows = []
    for bus, series in zip(generation.bus_ids, generation.values):
        cap = float(capacity.get(bus, 0.0))
        if cap <= 0.0:
            if np.any(series != 0.0):
                raise ValueError(f"bus {bus}: generation reported with zero installed capacity")
            rows.append(np.zeros(HOURS))
            continue
        cf = series / cap
        if np.any(cf > 1.0):
            warnings.warn(f"bus {bus}: output above installed capacity, clamped to 1", stacklevel=2)
        rows.append(np.clip(cf, 0.0, 1.0))
    return ProfileMatrix(generation.bus_ids, np.array(rows).reshape(len(rows), HOURS), "cf")


def hydro_cf(shape=None):
    """Hydro availability: a constant 0.41, optionally broadcast to ``shape``."""
    if shape is None:
        return HYDRO_CF
    return np.full(shape, HYDRO_CF)


# ---------------------------------------------------------------------------
# features


def _daily(values: np.ndarray) -> np.ndarray:
    """(n, 8760) -> (365, n*24) with bus-major blocks of 24 hours."""
    n = values.shape[0]
    return values.reshape(n, DAYS, HOURS_PER_DAY).transpose(1, 0, 2).reshape(DAYS, n * HOURS_PER_DAY)


def build_features(
    base_load: ProfileMatrix, cf_solar: ProfileMatrix | None = None, cf_wind: ProfileMatrix | None = None
) -> np.ndarray:
    """Day-by-feature matrix, shape ``(365, F)``."""
    load = base_load.values
    mu = load.mean(axis=1, keepdims=True)
    sd = load.std(axis=1, keepdims=True)
    sd[sd == 0.0] = 1.0
    blocks = [_daily((load - mu) / sd)]
    for cf in (cf_solar, cf_wind):
        if cf is not None and len(cf.bus_ids):
            blocks.append(_daily(cf.values))
    return np.ascontiguousarray(np.hstack(blocks))


# ---------------------------------------------------------------------------
# k-means


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            nxt = int(np.argmax(d2))
        else:
            cum = np.cumsum(d2)
            nxt = int(np.searchsorted(cum, rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        centers.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[centers].copy()


def _lloyd(X: np.ndarray, C: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray, float]:
    k = C.shape[0]
    labels = None
    for _ in range(max_iter):
        new_labels, d2 = _kernels.assign_labels(X, C)
        # reseed empty clusters to the point farthest from its centroid
        counts = np.bincount(new_labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(d2))
            C[j] = X[far]
            new_labels[far] = j
            d2[far] = 0.0
            counts = np.bincount(new_labels, minlength=k)
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for j in range(k):
            C[j] = X[labels == j].mean(axis=0)
    labels, d2 = _kernels.assign_labels(X, C)
    return labels, C, float(d2.sum())


def kmeans(
    X: np.ndarray,
    k: int,
    seed: int = 7,
    restarts: int = 10,
    max_iter: int = 300,
    warm_start: np.ndarray | None = None,
) -> KMeansResult:
    """Best-of-restarts k-means.

    Restart ``r`` draws its seeding from ``default_rng([seed, r])`` so results
    do not depend on execution order.  A ``warm_start`` centroid matrix is run
    as one extra candidate.  The winner has the lowest inertia, then the
    lowest restart index.
    """
    X = np.ascontiguousarray(X, dtype=float)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of days ({n})")
    if np.unique(X, axis=0).shape[0] < k:
        raise ValueError(f"fewer distinct days than clusters (k={k})")
    candidates = []
    for r in range(max(1, restarts)):
        rng = np.random.default_rng([seed, r])
        C0 = _kmeans_pp(X, k, rng)
        labels, C, inertia = _lloyd(X, C0, max_iter)
        candidates.append(KMeansResult(labels, C, inertia, r))
    if warm_start is not None:
        labels, C, inertia = _lloyd(X, np.array(warm_start, dtype=float), max_iter)
        candidates.append(KMeansResult(labels, C, inertia, len(candidates)))
    best = min(candidates, key=lambda c: (c.inertia, c.restart))
    if np.any(np.bincount(best.labels, minlength=k) == 0):
        raise RuntimeError("k-means left an empty cluster")
    return _canonical(best)


def _canonical(res: KMeansResult) -> KMeansResult:
    """Relabel clusters in order of first appearance in the year."""
    _, first = np.unique(res.labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    return KMeansResult(remap[res.labels], res.centroids[order], res.inertia, res.restart)


def silhouette(X: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient; singletons score 0."""
    X = np.asarray(X, dtype=float)
    k = int(labels.max()) + 1
    if k < 2:
        return 0.0
    sq = (X * X).sum(axis=1)
    D = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0))
    np.fill_diagonal(D, 0.0)
    counts = np.bincount(labels, minlength=k).astype(float)
    sums = np.zeros((X.shape[0], k))
    for j in range(k):
        sums[:, j] = D[:, labels == j].sum(axis=1)
    own = counts[labels]
    a = np.where(own > 1, sums[np.arange(len(labels)), labels] / np.maximum(own - 1, 1), 0.0)
    other = sums / np.where(counts > 0, counts, np.inf)
    other[np.arange(len(labels)), labels] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def clustering_diagnostics(
    features: np.ndarray, k_range: Sequence[int], seed: int = 7, restarts: int = 10
) -> list[tuple[int, float, float]]:
    """Rows of ``(k, inertia, silhouette)`` for the elbow analysis.

    Each k is also warm-started from the previous solution plus its worst
    fitted day, so inertia never increases along the sweep.
    """
    rows = []
    prev: KMeansResult | None = None
    for k in sorted(k_range):
        warm = None
        if prev is not None and prev.centroids.shape[0] == k - 1:
            _, d2 = _kernels.assign_labels(features, np.ascontiguousarray(prev.centroids))
            warm = np.vstack([prev.centroids, features[int(np.argmax(d2))]])
        res = kmeans(features, k, seed=seed, restarts=restarts, warm_start=warm)
        rows.append((k, res.inertia, silhouette(features, res.labels)))
        prev = res
    return rows


def cluster_days(
    base_load: ProfileMatrix,
    cf_solar: ProfileMatrix | None = None,
    cf_wind: ProfileMatrix | None = None,
    settings: ClusteringSettings = ClusteringSettings(),
    warm_start: np.ndarray | None = None,
) -> RepresentativeDays:
    """Group the 365 days of the profiles into ``settings.k`` weighted days."""
    X = build_features(base_load, cf_solar, cf_wind)
    res = kmeans(X, settings.k, settings.seed, settings.restarts, settings.max_iter, warm_start)
    k = settings.k
    weights = np.bincount(res.labels, minlength=k).astype(float)
    if settings.profile == "mean":
        pick = None
    elif settings.profile == "medoid":
        pick = np.empty(k, dtype=np.int64)
        for j in range(k):
            members = np.flatnonzero(res.labels == j)
            d2 = ((X[members] - res.centroids[j]) ** 2).sum(axis=1)
            pick[j] = members[int(np.argmin(d2))]
    else:
        raise ValueError(f"unknown clustering profile {settings.profile!r}")

    def reduce(values: np.ndarray) -> np.ndarray:
        days = values.reshape(values.shape[0], DAYS, HOURS_PER_DAY)
        if pick is not None:
            return days[:, pick, :].copy()
        out = np.empty((values.shape[0], k, HOURS_PER_DAY))
        for j in range(k):
            out[:, j, :] = days[:, res.labels == j, :].mean(axis=1)
        return out

    bus_ids = base_load.bus_ids
    load = reduce(base_load.values)
    cfs: dict[TechKind, np.ndarray] = {}
    for kind, prof in ((TechKind.SOLAR, cf_solar), (TechKind.WIND, cf_wind)):
        arr = np.zeros_like(load)
        if prof is not None:
            red = reduce(prof.values)
            for row, bus in enumerate(prof.bus_ids):
                arr[bus_ids.index(bus)] = red[row]
        cfs[kind] = np.clip(arr, 0.0, 1.0)
    cfs[TechKind.HYDRO] = hydro_cf(load.shape)
    return RepresentativeDays(bus_ids, res.labels, weights, load, cfs, res.inertia)
