"""Solver-agnostic LP container.

Columns carry bounds and an objective coefficient; rows carry a sense and a
right-hand side; the constraint matrix is accumulated as COO triplets and
canonicalised by :meth:`LpModel.finalize` (duplicates summed, explicit zeros
dropped, CSC order).  Row and column order is insertion order, which the
builders keep deterministic.
"""

from __future__ import annotations

import bisect
import copy
import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

INF = np.inf


class Sense(str, enum.Enum):
    LE = "L"
    GE = "G"
    EQ = "E"


_SENSE_CODE = {Sense.LE: 0, Sense.GE: 1, Sense.EQ: 2}
SENSE_LETTERS = ("L", "G", "E")


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


Namer = Callable[[int], str]


class _Names:
    """Names stored either literally or as per-block formatters."""

    def __init__(self) -> None:
        self._starts: list[int] = []
        self._blocks: list[tuple[int, Sequence[str] | Namer]] = []
        self._count = 0

    def add(self, count: int, names: Sequence[str] | Namer | None, prefix: str) -> None:
        if names is None:
            start = self._count
            names = lambda i, _s=start, _p=prefix: f"{_p}{_s + i}"  # noqa: E731
        elif not callable(names) and len(names) != count:
            raise ValueError("names length does not match count")
        self._starts.append(self._count)
        self._blocks.append((count, names))
        self._count += count

    def __len__(self) -> int:
        return self._count

    def __getitem__(self, j: int) -> str:
        if not 0 <= j < self._count:
            raise IndexError(j)
        b = bisect.bisect_right(self._starts, j) - 1
        _, names = self._blocks[b]
        local = j - self._starts[b]
        return names(local) if callable(names) else names[local]

    def all(self) -> list[str]:
        out: list[str] = []
        for count, names in self._blocks:
            if callable(names):
                out.extend(names(i) for i in range(count))
            else:
                out.extend(names)
        return out


@dataclass
class LpSolution:
    status: Status
    objective: float
    x: np.ndarray
    duals: np.ndarray | None = None
    iterations: int = 0
    basis: np.ndarray | None = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class LpModel:
    name: str = "model"
    finalized: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._obj: list[np.ndarray] = []
        self._sense: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self._ti: list[np.ndarray] = []
        self._tj: list[np.ndarray] = []
        self._tv: list[np.ndarray] = []
        self._cols = _Names()
        self._rows = _Names()
        self._n_cols = 0
        self._n_rows = 0
        self._bound_edits: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._obj_edits: list[tuple[np.ndarray, np.ndarray]] = []

    # -- building ---------------------------------------------------------

    def _check_open(self) -> None:
        if self.finalized:
            raise RuntimeError("model is finalized")

    def add_columns(self, count: int, lb=0.0, ub=INF, obj=0.0, names=None) -> np.ndarray:
        self._check_open()
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), (count,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), (count,)).copy())
        self._obj.append(np.broadcast_to(np.asarray(obj, dtype=float), (count,)).copy())
        self._cols.add(count, names, "x")
        idx = np.arange(self._n_cols, self._n_cols + count)
        self._n_cols += count
        return idx

    def add_rows(self, count: int, sense: Sense | str, rhs=0.0, names=None) -> np.ndarray:
        self._check_open()
        code = _SENSE_CODE[Sense(sense)]
        self._sense.append(np.full(count, code, dtype=np.int8))
        self._rhs.append(np.broadcast_to(np.asarray(rhs, dtype=float), (count,)).copy())
        self._rows.add(count, names, "r")
        idx = np.arange(self._n_rows, self._n_rows + count)
        self._n_rows += count
        return idx

    def add_terms(self, rows, cols, vals) -> None:
        self._check_open()
        rows, cols, vals = np.broadcast_arrays(
            np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64), np.asarray(vals, dtype=float)
        )
        self._ti.append(rows.ravel().copy())
        self._tj.append(cols.ravel().copy())
        self._tv.append(vals.ravel().copy())

    def set_bounds(self, cols, lb, ub) -> None:
        """Override bounds of existing columns (applied at finalize)."""
        self._check_open()
        cols, lb, ub = np.broadcast_arrays(np.asarray(cols, dtype=np.int64), np.asarray(lb, float), np.asarray(ub, float))
        self._bound_edits.append((cols.ravel().copy(), lb.ravel().copy(), ub.ravel().copy()))

    def set_objective(self, cols, coef) -> None:
        """Override objective coefficients of existing columns (applied at finalize)."""
        self._check_open()
        cols, coef = np.broadcast_arrays(np.asarray(cols, dtype=np.int64), np.asarray(coef, float))
        self._obj_edits.append((cols.ravel().copy(), coef.ravel().copy()))

    # -- finalization -----------------------------------------------------

    def finalize(self) -> "LpModel":
        """Return a frozen canonical copy; raises on non-finite data."""
        if self.finalized:
            return self
        out = LpModel(self.name)
        cat = lambda parts, dt=float: np.concatenate(parts) if parts else np.zeros(0, dtype=dt)  # noqa: E731
        lb, ub, obj = cat(self._lb), cat(self._ub), cat(self._obj)
        for cols, l, u in self._bound_edits:
            lb[cols] = l
            ub[cols] = u
        for cols, c in self._obj_edits:
            obj[cols] = c
        sense, rhs = cat(self._sense, np.int8), cat(self._rhs)
        ti, tj, tv = cat(self._ti, np.int64), cat(self._tj, np.int64), cat(self._tv)

        if not np.all(np.isfinite(tv)):
            raise ValueError("non-finite constraint coefficient")
        if not np.all(np.isfinite(obj)):
            raise ValueError("non-finite objective coefficient")
        if not np.all(np.isfinite(rhs)):
            raise ValueError("non-finite right-hand side")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)) or np.any(lb > ub):
            raise ValueError("invalid column bounds (need lower <= upper)")
        if np.any(lb == INF) or np.any(ub == -INF):
            raise ValueError("invalid infinite bound")
        if ti.size and (ti.min() < 0 or ti.max() >= self._n_rows or tj.min() < 0 or tj.max() >= self._n_cols):
            raise ValueError("triplet index out of range")

        A = sp.coo_matrix((tv, (ti, tj)), shape=(self._n_rows, self._n_cols)).tocsc()
        A.sum_duplicates()
        A.eliminate_zeros()
        A.sort_indices()
        obj = obj + 0.0  # drop negative zeros
        out._A = A
        out._lb, out._ub, out._obj = lb, ub, obj
        out._sense_arr, out._rhs_arr = sense, rhs + 0.0
        out._cols, out._rows = self._cols, self._rows
        out._n_cols, out._n_rows = self._n_cols, self._n_rows
        for arr in (out._lb, out._ub, out._obj, out._sense_arr, out._rhs_arr, A.data, A.indices, A.indptr):
            arr.setflags(write=False)
        out.finalized = True
        return out

    def with_bounds(self, cols, lb, ub) -> "LpModel":
        """Finalized copy of this model with the bounds of ``cols`` replaced."""
        self._need_final()
        cols, lb, ub = np.broadcast_arrays(np.asarray(cols, dtype=np.int64), np.asarray(lb, float), np.asarray(ub, float))
        new_lb, new_ub = self._lb.copy(), self._ub.copy()
        new_lb[cols.ravel()] = lb.ravel()
        new_ub[cols.ravel()] = ub.ravel()
        if np.any(np.isnan(new_lb)) or np.any(np.isnan(new_ub)) or np.any(new_lb > new_ub):
            raise ValueError("invalid column bounds (need lower <= upper)")
        if np.any(new_lb == INF) or np.any(new_ub == -INF):
            raise ValueError("invalid infinite bound")
        out = copy.copy(self)
        new_lb.setflags(write=False)
        new_ub.setflags(write=False)
        out._lb, out._ub = new_lb, new_ub
        return out

    # -- accessors (finalized models) -------------------------------------

    def _need_final(self) -> None:
        if not self.finalized:
            raise RuntimeError("call finalize() first")

    @property
    def n_cols(self) -> int:
        return self._n_cols

    @property
    def n_rows(self) -> int:
        return self._n_rows

    @property
    def n_nonzeros(self) -> int:
        self._need_final()
        return int(self._A.nnz)

    @property
    def A(self) -> sp.csc_matrix:
        self._need_final()
        return self._A

    @property
    def lb(self) -> np.ndarray:
        self._need_final()
        return self._lb

    @property
    def ub(self) -> np.ndarray:
        self._need_final()
        return self._ub

    @property
    def obj(self) -> np.ndarray:
        self._need_final()
        return self._obj

    @property
    def sense(self) -> np.ndarray:
        """Row senses as codes 0='L', 1='G', 2='E'."""
        self._need_final()
        return self._sense_arr

    @property
    def rhs(self) -> np.ndarray:
        self._need_final()
        return self._rhs_arr

    def col_name(self, j: int) -> str:
        return self._cols[j]

    def row_name(self, i: int) -> str:
        return self._rows[i]

    def col_names(self) -> list[str]:
        return self._cols.all()

    def row_names(self) -> list[str]:
        return self._rows.all()

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.obj @ x)

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def max_violation(self, x: np.ndarray) -> tuple[float, float]:
        """(worst scaled row residual, worst bound violation) at ``x``."""
        act = self.row_activity(x)
        rhs = self.rhs
        scale = 1.0 + np.abs(rhs)
        viol = np.zeros_like(act)
        le, ge = self.sense == 0, self.sense == 1
        eq = self.sense == 2
        viol[le] = np.maximum(act[le] - rhs[le], 0.0)
        viol[ge] = np.maximum(rhs[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - rhs[eq])
        row = float((viol / scale).max()) if viol.size else 0.0
        bnd = np.maximum(self.lb - x, 0.0).max() if x.size else 0.0
        bnd = max(bnd, np.maximum(x - self.ub, 0.0).max() if x.size else 0.0)
        return row, float(bnd)
