"""Bounded revised simplex for desk-scale LPs.

Every row ``i`` gets a logical column ``s_i`` with ``A x - s = 0`` and the
row sense turned into bounds on ``s_i``.  Two routes share one basis
representation:

* dual route: when the all-logical basis is dual feasible (the usual case
  for cost-minimisation models with non-negative costs), a bounded dual
  simplex drives out primal infeasibility, followed by a primal clean-up;
* primal route: otherwise, phase 1 adds an artificial only for rows whose
  logical would start outside its bounds, and phase 2 pins them to zero.

Primal pricing is Dantzig (most negative reduced cost); dual pricing is
steepest edge, with row weights ``||e_r^T B^-1||^2`` kept by the usual
update formula.  Both switch to Bland's rule after a run of degenerate
pivots.  The basis is held as a sparse LU
(SuperLU) plus a product-form eta file, refactorised every
``refactor_every`` pivots.  Rows and columns are equilibrated with
power-of-two factors so scaling is exact to undo.
"""

from __future__ import annotations

import logging
import time

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .. import _kernels as K
from .model import LpModel, LpSolution, Status

log = logging.getLogger(__name__)

BASIC, AT_LOWER, AT_UPPER, FREE, FIXED = K.BASIC, K.AT_LOWER, K.AT_UPPER, K.FREE, K.FIXED
PIVOT_TOL = 1e-9


class SingularBasisError(RuntimeError):
    pass


def _pow2(x: np.ndarray) -> np.ndarray:
    out = np.ones_like(x)
    pos = x > 0
    out[pos] = np.exp2(np.round(np.log2(x[pos])))
    return out


def _equilibrate(A: sp.csc_matrix, passes: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-mean row/column scaling rounded to powers of two."""
    m, n = A.shape
    r = np.ones(m)
    c = np.ones(n)
    if A.nnz == 0:
        return r, c
    absA = abs(A).tocoo()
    for _ in range(passes):
        vals = absA.data * r[absA.row] * c[absA.col]
        lo = np.full(m, np.inf)
        hi = np.zeros(m)
        np.minimum.at(lo, absA.row, vals)
        np.maximum.at(hi, absA.row, vals)
        ok = hi > 0
        r[ok] /= np.sqrt(lo[ok] * hi[ok])
        vals = absA.data * r[absA.row] * c[absA.col]
        lo = np.full(n, np.inf)
        hi = np.zeros(n)
        np.minimum.at(lo, absA.col, vals)
        np.maximum.at(hi, absA.col, vals)
        ok = hi > 0
        c[ok] /= np.sqrt(lo[ok] * hi[ok])
    return _pow2(r), _pow2(c)


class _Basis:
    """LU of the basis matrix plus a sparse eta file.

    Unit columns (logicals and artificials) are eliminated up front: only
    the structural columns restricted to the rows no unit column covers are
    handed to SuperLU.
    """

    def __init__(self, M: sp.csc_matrix, n_struct: int, cols: np.ndarray):
        self.M = M
        self.n_struct = n_struct
        self.m = M.shape[0]
        self.refactor(cols)

    def refactor(self, cols: np.ndarray) -> None:
        m = self.m
        cols = np.asarray(cols)
        unit = cols >= self.n_struct
        ucols = cols[unit]
        # row covered by each unit column and its sign
        urow = self.M.indices[self.M.indptr[ucols]]
        usgn = self.M.data[self.M.indptr[ucols]]
        covered = np.zeros(m, dtype=bool)
        covered[urow] = True
        kpos = np.flatnonzero(~unit)
        krows = np.flatnonzero(~covered)
        if krows.size != kpos.size:
            raise SingularBasisError("basis has a repeated unit column")
        self.unit_pos = np.flatnonzero(unit)
        self.unit_row = urow
        self.unit_sgn = usgn
        self.kpos = kpos
        self.krows = krows
        Bs = self.M[:, cols[kpos]].tocsr()
        self.B_cov = Bs[urow]  # rows covered by unit columns
        self.B_cov_T = self.B_cov.T.tocsr()
        if kpos.size:
            Bk = Bs[krows].tocsc()
            try:
                self.lu = splu(Bk, permc_spec="COLAMD", options={"SymmetricMode": False})
            except RuntimeError as exc:
                raise SingularBasisError(str(exc)) from exc
        else:
            self.lu = None
        self.rows: list[int] = []
        self.piv: list[float] = []
        self.ptr: list[int] = [0]
        self.idx: list[np.ndarray] = []
        self.val: list[np.ndarray] = []
        self._packed = None

    @property
    def n_etas(self) -> int:
        return len(self.rows)

    def _pack(self):
        if self._packed is None:
            self._packed = (
                np.asarray(self.rows, dtype=np.int64),
                np.asarray(self.piv, dtype=float),
                np.asarray(self.ptr, dtype=np.int64),
                np.concatenate(self.idx) if self.idx else np.zeros(0, dtype=np.int64),
                np.concatenate(self.val) if self.val else np.zeros(0),
            )
        return self._packed

    def _solve0(self, a: np.ndarray) -> np.ndarray:
        """Solve with the refactored basis (no etas); result indexed by basis position."""
        out = np.empty(a.shape)
        if self.lu is not None:
            zk = self.lu.solve(a[self.krows])
            out[self.kpos] = zk
            resid = a[self.unit_row] - self.B_cov @ zk
        else:
            resid = a[self.unit_row]
        out[self.unit_pos] = resid / self.unit_sgn
        return out

    def _solve0_T(self, c: np.ndarray) -> np.ndarray:
        """Solve ``B^T w = c`` with ``c`` indexed by basis position."""
        w = np.empty(self.m)
        wc = c[self.unit_pos] / self.unit_sgn
        w[self.unit_row] = wc
        if self.lu is not None:
            rhs = c[self.kpos] - (self.B_cov_T @ wc if wc.size else 0.0)
            w[self.krows] = self.lu.solve(rhs, trans="T")
        return w

    def ftran(self, a: np.ndarray) -> np.ndarray:
        v = self._solve0(a)
        if self.rows:
            K.ftran_etas(v, *self._pack())
        return v

    def btran(self, c: np.ndarray) -> np.ndarray:
        w = np.array(c, dtype=float)
        if self.rows:
            K.btran_etas(w, *self._pack())
        return self._solve0_T(w)

    def push(self, r: int, alpha: np.ndarray) -> None:
        nz = np.flatnonzero(alpha)
        nz = nz[nz != r]
        self.rows.append(r)
        self.piv.append(float(alpha[r]))
        self.idx.append(nz.astype(np.int64))
        self.val.append(alpha[nz].copy())
        self.ptr.append(self.ptr[-1] + nz.size)
        self._packed = None


class _Simplex:
    """Solver state in scaled space with column layout ``[x | s | art]``."""

    def __init__(self, model: LpModel, feas_tol, opt_tol, max_iters, refactor_every, degenerate_switch, scale, time_limit):
        self.model = model
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.refactor_every = refactor_every
        self.degenerate_switch = degenerate_switch
        self.time_limit = time_limit
        self.t0 = time.perf_counter()
        m, n = model.n_rows, model.n_cols
        self.m, self.n = m, n
        self.max_iters = 10 * (m + n) if max_iters is None else max_iters
        self.iters = 0

        A = model.A.astype(float)
        self.rs, self.cs = _equilibrate(A) if scale else (np.ones(m), np.ones(n))
        self.A_s = (sp.diags(self.rs) @ A @ sp.diags(self.cs)).tocsc()
        rhs = model.rhs * self.rs
        sense = model.sense
        self.s_lb = np.where(sense == 0, -np.inf, rhs)
        self.s_ub = np.where(sense == 1, np.inf, rhs)
        self.x_lb = model.lb / self.cs
        self.x_ub = model.ub / self.cs
        c_x = model.obj * self.cs
        cmax = np.abs(c_x).max() if n else 0.0
        self.obj_scale = float(_pow2(np.array([cmax]))[0]) if cmax > 0 else 1.0
        self.c_x = c_x / self.obj_scale

    # -- setup ------------------------------------------------------------

    def _assemble(self, art_rows: np.ndarray, art_sign: np.ndarray) -> None:
        m, n = self.m, self.n
        k = art_rows.size
        self.n_art = k
        self.M = sp.hstack(
            [
                self.A_s,
                -sp.identity(m, format="csc"),
                sp.csc_matrix((art_sign, (art_rows, np.arange(k))), shape=(m, k)),
            ],
            format="csc",
        )
        self.MT = self.M.T.tocsr()
        self.lb = np.concatenate([self.x_lb, self.s_lb, np.zeros(k)])
        self.ub = np.concatenate([self.x_ub, self.s_ub, np.full(k, np.inf)])

    def _nonbasic_start(self, prefer_upper: np.ndarray | None = None):
        n = self.n
        lb, ub = self.x_lb, self.x_ub
        status = np.full(n, FREE, dtype=np.int64)
        val = np.zeros(n)
        has_lb, has_ub = np.isfinite(lb), np.isfinite(ub)
        status[has_ub] = AT_UPPER
        val[has_ub] = ub[has_ub]
        use_lb = has_lb if prefer_upper is None else has_lb & ~(prefer_upper & has_ub)
        status[use_lb] = AT_LOWER
        val[use_lb] = lb[use_lb]
        status[has_lb & has_ub & (lb == ub)] = FIXED
        return status, val

    def dual_feasible_start(self) -> bool:
        c = self.c_x
        lb, ub = self.x_lb, self.x_ub
        has_lb, has_ub = np.isfinite(lb), np.isfinite(ub)
        bad = (~has_ub & (c < 0)) | (~has_lb & (c > 0))
        return not bad.any()

    # -- shared helpers ---------------------------------------------------

    def _recompute(self, fac: _Basis) -> np.ndarray:
        nonbasic = self.status != BASIC
        rhs = -(self.M[:, nonbasic] @ self.value[nonbasic])
        return fac.ftran(rhs)

    def _column(self, q: int) -> np.ndarray:
        col = np.zeros(self.m)
        lo, hi = self.M.indptr[q], self.M.indptr[q + 1]
        col[self.M.indices[lo:hi]] = self.M.data[lo:hi]
        return col

    def _out_of_budget(self) -> bool:
        if self.iters >= self.max_iters:
            return True
        return self.time_limit is not None and time.perf_counter() - self.t0 > self.time_limit

    def _leave(self, r: int, p: int, to_upper: bool) -> None:
        lb, ub = self.lb, self.ub
        self.value[p] = ub[p] if to_upper else lb[p]
        if lb[p] == ub[p]:
            self.status[p] = FIXED
        else:
            self.status[p] = AT_UPPER if to_upper else AT_LOWER

    # -- primal -----------------------------------------------------------

    def primal(self, cost: np.ndarray) -> Status:
        basis, status, value = self.basis, self.status, self.value
        lb, ub = self.lb, self.ub
        fac = _Basis(self.M, self.n, basis)
        self.fac = fac
        degenerate = 0
        bland = False
        x_b = value[basis].copy()
        ratio_tol = min(self.feas_tol, 1e-9)
        while True:
            if self._out_of_budget():
                value[basis] = x_b
                return Status.ITERATION_LIMIT
            if fac.n_etas >= self.refactor_every:
                value[basis] = x_b
                fac.refactor(basis)
                x_b = self._recompute(fac)
            y = fac.btran(cost[basis])
            d = cost - self.MT @ y
            q = K.select_entering(d, status, self.opt_tol, bland)
            if q < 0 and fac.n_etas:
                # confirm with a fresh factorization before declaring optimality
                value[basis] = x_b
                fac.refactor(basis)
                x_b = self._recompute(fac)
                y = fac.btran(cost[basis])
                d = cost - self.MT @ y
                q = K.select_entering(d, status, self.opt_tol, bland)
            if q < 0:
                value[basis] = x_b
                return Status.OPTIMAL
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = fac.ftran(self._column(q))
            delta = -direction * alpha
            r, theta, hits_upper = K.ratio_test(x_b, delta, lb[basis], ub[basis], basis, ratio_tol, PIVOT_TOL, bland)
            theta_q = ub[q] - value[q] if direction > 0 else value[q] - lb[q]
            self.iters += 1
            if r < 0 and not np.isfinite(theta_q):
                value[basis] = x_b
                return Status.UNBOUNDED
            if theta_q <= theta:
                # bound flip, basis unchanged
                x_b += theta_q * delta
                value[q] += direction * theta_q
                status[q] = AT_UPPER if direction > 0 else AT_LOWER
                degenerate = 0
                bland = False
                continue
            x_b += theta * delta
            entering_value = value[q] + direction * theta
            self._leave(r, basis[r], hits_upper)
            basis[r] = q
            status[q] = BASIC
            x_b[r] = entering_value
            fac.push(r, alpha)
            if theta <= 1e-12:
                degenerate += 1
                bland = bland or degenerate >= self.degenerate_switch
            else:
                degenerate = 0
                bland = False

    # -- dual -------------------------------------------------------------

    def dual(self, cost: np.ndarray) -> Status:
        """Bounded dual simplex from a dual-feasible basis."""
        basis, status, value = self.basis, self.status, self.value
        lb, ub = self.lb, self.ub
        fac = _Basis(self.M, self.n, basis)
        self.fac = fac
        m = self.m
        degenerate = 0
        bland = False

        def fresh():
            value[basis] = x_b
            fac.refactor(basis)
            xb = self._recompute(fac)
            y = fac.btran(cost[basis])
            dd = cost - self.MT @ y
            dd[basis] = 0.0
            return xb, dd

        x_b = value[basis].copy()
        x_b, d = fresh()
        # exact for the all-logical start; otherwise a reference framework
        weights = np.ones(m)
        while True:
            if self._out_of_budget():
                value[basis] = x_b
                return Status.ITERATION_LIMIT
            if fac.n_etas >= self.refactor_every:
                x_b, d = fresh()
            r = K.select_leaving(x_b, lb[basis], ub[basis], weights, self.feas_tol, bland, basis)
            if r < 0 and fac.n_etas:
                x_b, d = fresh()
                r = K.select_leaving(x_b, lb[basis], ub[basis], weights, self.feas_tol, bland, basis)
            if r < 0:
                value[basis] = x_b
                return Status.OPTIMAL
            p = basis[r]
            to_upper = x_b[r] > ub[p]
            sign = 1.0 if to_upper else -1.0
            e_r = np.zeros(m)
            e_r[r] = 1.0
            rho = fac.btran(e_r)
            alpha_row = self.MT @ rho
            q = K.dual_ratio_test(d, alpha_row, status, sign, self.opt_tol, PIVOT_TOL, bland)
            if q < 0:
                if fac.n_etas:
                    x_b, d = fresh()
                    continue
                value[basis] = x_b
                return Status.INFEASIBLE
            alpha_q = fac.ftran(self._column(q))
            if abs(alpha_q[r] - alpha_row[q]) > 1e-7 * (1.0 + abs(alpha_row[q])) and fac.n_etas:
                # row and column disagree: numerical drift, start over from a fresh LU
                x_b, d = fresh()
                continue
            self.iters += 1
            piv = alpha_q[r]
            tau = fac.ftran(rho)
            ratio = alpha_q / piv
            w_r = weights[r]
            weights += ratio * (ratio * w_r - 2.0 * tau)
            np.maximum(weights, 1e-8, out=weights)
            weights[r] = max(w_r / (piv * piv), 1e-8)
            theta_d = d[q] / piv
            if sign * theta_d < 0:
                theta_d = 0.0
            d -= theta_d * alpha_row
            d[q] = 0.0
            target = ub[p] if to_upper else lb[p]
            theta_p = (x_b[r] - target) / piv
            x_b -= theta_p * alpha_q
            entering_value = value[q] + theta_p
            self._leave(r, p, to_upper)
            basis[r] = q
            status[q] = BASIC
            x_b[r] = entering_value
            fac.push(r, alpha_q)
            if abs(theta_d) <= 1e-12:
                degenerate += 1
                bland = bland or degenerate >= self.degenerate_switch
            else:
                degenerate = 0
                bland = False

    # -- drivers ----------------------------------------------------------

    def run(self) -> LpSolution:
        m, n = self.m, self.n
        if self.dual_feasible_start():
            status_x, val_x = self._nonbasic_start(prefer_upper=self.c_x < 0)
            self._assemble(np.zeros(0, dtype=np.int64), np.zeros(0))
            self.status = np.concatenate([status_x, np.full(m, BASIC, dtype=np.int64)])
            self.value = np.concatenate([val_x, self.A_s @ val_x])
            self.basis = np.arange(n, n + m)
            cost = np.concatenate([self.c_x, np.zeros(m)])
            st = self.dual(cost)
            if st is Status.OPTIMAL:
                st = self.primal(cost)
            return self._finish(st, cost, "dual")
        return self._two_phase()

    def _two_phase(self) -> LpSolution:
        m, n = self.m, self.n
        status_x, val_x = self._nonbasic_start()
        act = self.A_s @ val_x
        below = act < self.s_lb - self.feas_tol
        above = act > self.s_ub + self.feas_tol
        need_art = np.flatnonzero(below | above)
        k = need_art.size
        # act - s = 0 with s at the violated bound; art absorbs the gap
        self._assemble(need_art, np.where(below[need_art], 1.0, -1.0))
        self.status = np.concatenate([status_x, np.full(m, BASIC, dtype=np.int64), np.full(k, BASIC, dtype=np.int64)])
        self.value = np.concatenate([val_x, act, np.zeros(k)])
        self.basis = np.arange(n, n + m)
        for j, i in enumerate(need_art):
            js = n + i
            bound = self.s_lb[i] if below[i] else self.s_ub[i]
            self.value[js] = bound
            if self.s_lb[i] == self.s_ub[i]:
                self.status[js] = FIXED
            else:
                self.status[js] = AT_LOWER if below[i] else AT_UPPER
            self.basis[i] = n + m + j
            self.value[n + m + j] = abs(act[i] - bound)

        if k:
            phase1 = np.zeros(n + m + k)
            phase1[n + m :] = 1.0
            st = self.primal(phase1)
            if st is Status.ITERATION_LIMIT:
                return self._finish(st, None, "phase 1")
            infeas = float(self.value[n + m :].sum())
            if infeas > self.feas_tol * max(1.0, k):
                return self._finish(Status.INFEASIBLE, None, f"phase 1 infeasibility {infeas:.3g}")
            # pin artificials at zero for phase 2
            self.ub[n + m :] = 0.0
            art = np.arange(n + m, n + m + k)
            nb = art[self.status[art] != BASIC]
            self.status[nb] = FIXED
            self.value[nb] = 0.0
        cost = np.concatenate([self.c_x, np.zeros(m + k)])
        st = self.primal(cost)
        return self._finish(st, cost, "primal")

    def _finish(self, st: Status, cost, route: str) -> LpSolution:
        model = self.model
        duals = None
        if st is Status.OPTIMAL and cost is not None:
            y = self.fac.btran(cost[self.basis])
            duals = y * self.rs * self.obj_scale
        x = self.value[: self.n] * self.cs
        if st is Status.OPTIMAL:
            x = np.clip(x, model.lb, model.ub)
        log.debug("simplex (%s) finished: %s after %d iterations", route, st.value, self.iters)
        return LpSolution(st, float(model.obj @ x), x, duals, self.iters, self.basis.copy(), route)


def solve(
    model: LpModel,
    feas_tol: float = 1e-7,
    opt_tol: float = 1e-7,
    max_iters: int | None = None,
    refactor_every: int = 100,
    degenerate_switch: int = 50,
    scale: bool = True,
    time_limit: float | None = None,
) -> LpSolution:
    """Minimise ``obj @ x`` over the rows and bounds of a finalized model.

    Parameters
    ----------
    feas_tol, opt_tol : float
        Primal feasibility and reduced-cost tolerances (scaled space).
    max_iters : int, optional
        Pivot budget; defaults to ``10 * (rows + cols)``.
    """
    if not model.finalized:
        raise RuntimeError("solve requires a finalized model")
    if model.n_rows == 0:
        return _solve_rowless(model)
    return _Simplex(model, feas_tol, opt_tol, max_iters, refactor_every, degenerate_switch, scale, time_limit).run()


def _solve_rowless(model: LpModel) -> LpSolution:
    c, lb, ub = model.obj, model.lb, model.ub
    x = np.where(c > 0, lb, np.where(c < 0, ub, np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))))
    if not np.all(np.isfinite(x)):
        return LpSolution(Status.UNBOUNDED, -np.inf, np.nan_to_num(x), None, 0, np.zeros(0, dtype=np.int64))
    return LpSolution(Status.OPTIMAL, float(c @ x), x, np.zeros(0), 0, np.zeros(0, dtype=np.int64))
