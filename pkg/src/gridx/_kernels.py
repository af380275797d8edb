"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba versions are used when numba imports and ``GRIDX_DISABLE_NUMBA``
is unset (or "0").  Both flavours make identical decisions: reductions that
pick an index scan in ascending order and keep the first best value.

Simplex status codes shared with :mod:`gridx.lp.simplex`:
0 basic, 1 at lower bound, 2 at upper bound, 3 free (nonbasic at zero), 4 fixed.
"""

from __future__ import annotations

import os

import numpy as np

EARTH_RADIUS_MI = 3958.761

BASIC, AT_LOWER, AT_UPPER, FREE, FIXED = 0, 1, 2, 3, 4


def _numba_requested() -> bool:
    return os.environ.get("GRIDX_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


# --------------------------------------------------------------------------
# numpy flavour


def assign_labels_np(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels and squared distances."""
    d2 = np.empty((X.shape[0], C.shape[0]))
    for j in range(C.shape[0]):
        diff = X - C[j]
        d2[:, j] = np.einsum("ij,ij->i", diff, diff)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(X.shape[0]), labels]


def haversine_matrix_np(lat1, lon1, lat2, lon2) -> np.ndarray:
    p1 = np.radians(np.asarray(lat1, dtype=float))[:, None]
    p2 = np.radians(np.asarray(lat2, dtype=float))[None, :]
    dphi = p2 - p1
    dlmb = np.radians(np.asarray(lon2, dtype=float))[None, :] - np.radians(np.asarray(lon1, dtype=float))[:, None]
    a = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2.0) ** 2
    a = np.minimum(a, 1.0)
    return 2.0 * EARTH_RADIUS_MI * np.arcsin(np.sqrt(a))


def select_entering_np(d: np.ndarray, status: np.ndarray, tol: float, bland: bool) -> int:
    eligible = ((status == AT_LOWER) & (d < -tol)) | ((status == AT_UPPER) & (d > tol)) | (
        (status == FREE) & (np.abs(d) > tol)
    )
    idx = np.flatnonzero(eligible)
    if idx.size == 0:
        return -1
    if bland:
        return int(idx[0])
    return int(idx[np.argmax(np.abs(d[idx]))])


def ratio_test_np(x_b, delta, lb_b, ub_b, var_ids, feas_tol, pivot_tol, bland):
    """Bounded ratio test for basic values moving as ``x_b + theta * delta``.

    Returns ``(row, theta, hits_upper)``; row is -1 when nothing blocks.
    Default mode is a two-pass Harris test (largest |delta| among rows whose
    exact ratio fits under the relaxed minimum); Bland mode takes the exact
    minimum and breaks ties by lowest variable id.
    """
    dec = (delta < -pivot_tol) & np.isfinite(lb_b)
    inc = (delta > pivot_tol) & np.isfinite(ub_b)
    cand = np.flatnonzero(dec | inc)
    if cand.size == 0:
        return -1, np.inf, False
    dc = delta[cand]
    up = dc > 0
    # rows already past their bound (within tolerance drift) block at zero
    gap = np.maximum(np.where(up, ub_b[cand] - x_b[cand], x_b[cand] - lb_b[cand]), 0.0)
    step = np.abs(dc)
    exact = gap / step
    if bland:
        best = exact.min()
        ties = np.flatnonzero(exact == best)
        pick = ties[np.argmin(var_ids[cand[ties]])]
    else:
        relaxed = ((gap + feas_tol) / step).min()
        fits = np.flatnonzero(exact <= relaxed)
        pick = fits[np.argmax(step[fits])]
    return int(cand[pick]), float(exact[pick]), bool(up[pick])


def select_leaving_np(x_b, lb_b, ub_b, weights, tol, bland, var_ids) -> int:
    """Basic row maximising ``violation**2 / weight`` (lowest variable id in Bland mode)."""
    infeas = np.maximum(lb_b - x_b, x_b - ub_b)
    cand = np.flatnonzero(infeas > tol)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[np.argmin(var_ids[cand])])
    v = infeas[cand]
    return int(cand[np.argmax(v * v / weights[cand])])


def dual_ratio_test_np(d, alpha_r, status, sign, dual_tol, pivot_tol, bland) -> int:
    """Entering column for a dual pivot, or -1 if the pivot row blocks nothing.

    ``sign`` is +1 when the leaving variable moves to its upper bound and -1
    when it moves to its lower bound.  Harris two-pass in default mode;
    Bland mode takes the exact minimum ratio and the lowest column index.
    """
    a = sign * alpha_r
    cand = np.flatnonzero(
        ((status == AT_LOWER) & (a > pivot_tol))
        | ((status == AT_UPPER) & (a < -pivot_tol))
        | ((status == FREE) & (np.abs(a) > pivot_tol))
    )
    if cand.size == 0:
        return -1
    dc = d[cand]
    st = status[cand]
    # slightly wrong-signed reduced costs (drift) count as zero
    slack = np.maximum(np.where(st == AT_LOWER, dc, np.where(st == AT_UPPER, -dc, np.abs(dc))), 0.0)
    step = np.abs(a[cand])
    exact = slack / step
    if bland:
        return int(cand[np.argmin(exact)])
    relaxed = ((slack + dual_tol) / step).min()
    fits = np.flatnonzero(exact <= relaxed)
    return int(cand[fits[np.argmax(step[fits])]])


def ftran_etas_np(v, rows, piv, ptr, idx, val):
    """Apply product-form etas in order: ``v <- E_k^-1 ... E_1^-1 v`` in place."""
    for e in range(rows.shape[0]):
        r = rows[e]
        vr = v[r] / piv[e]
        if vr != 0.0:
            sl = slice(ptr[e], ptr[e + 1])
            v[idx[sl]] -= val[sl] * vr
        v[r] = vr
    return v


def btran_etas_np(c, rows, piv, ptr, idx, val):
    """Apply transposed etas in reverse order, in place."""
    for e in range(rows.shape[0] - 1, -1, -1):
        r = rows[e]
        sl = slice(ptr[e], ptr[e + 1])
        c[r] = (c[r] - val[sl] @ c[idx[sl]]) / piv[e]
    return c


# --------------------------------------------------------------------------
# numba flavour

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def assign_labels_nb(X, C):
        n, f = X.shape
        k = C.shape[0]
        labels = np.empty(n, dtype=np.int64)
        best_d = np.empty(n)
        for i in range(n):
            bd = np.inf
            bj = 0
            for j in range(k):
                s = 0.0
                for q in range(f):
                    diff = X[i, q] - C[j, q]
                    s += diff * diff
                if s < bd:
                    bd = s
                    bj = j
            labels[i] = bj
            best_d[i] = bd
        return labels, best_d

    @numba.njit(cache=True)
    def haversine_matrix_nb(lat1, lon1, lat2, lon2):
        n1 = lat1.shape[0]
        n2 = lat2.shape[0]
        out = np.empty((n1, n2))
        for i in range(n1):
            p1 = np.radians(lat1[i])
            l1 = np.radians(lon1[i])
            for j in range(n2):
                p2 = np.radians(lat2[j])
                dphi = p2 - p1
                dl = np.radians(lon2[j]) - l1
                a = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
                if a > 1.0:
                    a = 1.0
                out[i, j] = 2.0 * EARTH_RADIUS_MI * np.arcsin(np.sqrt(a))
        return out

    @numba.njit(cache=True)
    def select_entering_nb(d, status, tol, bland):
        best = -1
        best_val = 0.0
        for j in range(d.shape[0]):
            s = status[j]
            dj = d[j]
            ok = (s == 1 and dj < -tol) or (s == 2 and dj > tol) or (s == 3 and abs(dj) > tol)
            if not ok:
                continue
            if bland:
                return j
            if abs(dj) > best_val:
                best_val = abs(dj)
                best = j
        return best

    @numba.njit(cache=True)
    def _ratio_test_nb(x_b, delta, lb_b, ub_b, var_ids, feas_tol, pivot_tol, bland):
        m = x_b.shape[0]
        relaxed = np.inf
        best_exact = np.inf
        for i in range(m):
            di = delta[i]
            if di < -pivot_tol and np.isfinite(lb_b[i]):
                gap = x_b[i] - lb_b[i]
            elif di > pivot_tol and np.isfinite(ub_b[i]):
                gap = ub_b[i] - x_b[i]
            else:
                continue
            gap = max(gap, 0.0)
            step = abs(di)
            r = (gap + feas_tol) / step
            if r < relaxed:
                relaxed = r
            e = max(gap, 0.0) / step
            if e < best_exact:
                best_exact = e
        if not np.isfinite(relaxed):
            return -1, np.inf, False
        pick = -1
        pick_step = -1.0
        pick_id = 0
        for i in range(m):
            di = delta[i]
            if di < -pivot_tol and np.isfinite(lb_b[i]):
                gap = x_b[i] - lb_b[i]
            elif di > pivot_tol and np.isfinite(ub_b[i]):
                gap = ub_b[i] - x_b[i]
            else:
                continue
            step = abs(di)
            e = max(gap, 0.0) / step
            if bland:
                if e == best_exact and (pick < 0 or var_ids[i] < pick_id):
                    pick = i
                    pick_id = var_ids[i]
            elif e <= relaxed and step > pick_step:
                pick = i
                pick_step = step
        e = max(ub_b[pick] - x_b[pick] if delta[pick] > 0 else x_b[pick] - lb_b[pick], 0.0) / abs(delta[pick])
        return pick, e, delta[pick] > 0


    @numba.njit(cache=True)
    def select_leaving_nb(x_b, lb_b, ub_b, weights, tol, bland, var_ids):
        best = -1
        best_val = -1.0
        best_id = 0
        for i in range(x_b.shape[0]):
            v = max(lb_b[i] - x_b[i], x_b[i] - ub_b[i])
            if v <= tol:
                continue
            if bland:
                if best < 0 or var_ids[i] < best_id:
                    best = i
                    best_id = var_ids[i]
                continue
            score = v * v / weights[i]
            if score > best_val:
                best_val = score
                best = i
        return best

    @numba.njit(cache=True)
    def _dual_slack_nb(a, s, dj, pivot_tol):
        # slack of an eligible candidate, or -1.0 when the column cannot enter
        if a > pivot_tol:
            if s == 1:
                return max(dj, 0.0)
            if s == 3:
                return abs(dj)
        elif a < -pivot_tol:
            if s == 2:
                return max(-dj, 0.0)
            if s == 3:
                return abs(dj)
        return -1.0

    @numba.njit(cache=True)
    def dual_ratio_test_nb(d, alpha_r, status, sign, dual_tol, pivot_tol, bland):
        n = d.shape[0]
        relaxed = np.inf
        best_exact = np.inf
        best = -1
        for j in range(n):
            a = sign * alpha_r[j]
            if abs(a) <= pivot_tol:
                continue
            sl = _dual_slack_nb(a, status[j], d[j], pivot_tol)
            if sl < 0.0:
                continue
            step = abs(a)
            e = sl / step
            if e < best_exact:
                best_exact = e
                best = j
            r = (sl + dual_tol) / step
            if r < relaxed:
                relaxed = r
        if best < 0 or bland:
            return best
        pick = -1
        pick_step = -1.0
        for j in range(n):
            a = sign * alpha_r[j]
            if abs(a) <= pivot_tol:
                continue
            sl = _dual_slack_nb(a, status[j], d[j], pivot_tol)
            if sl < 0.0:
                continue
            step = abs(a)
            if sl / step <= relaxed and step > pick_step:
                pick_step = step
                pick = j
        return pick

    @numba.njit(cache=True)
    def ftran_etas_nb(v, rows, piv, ptr, idx, val):
        for e in range(rows.shape[0]):
            r = rows[e]
            vr = v[r] / piv[e]
            if vr != 0.0:
                for k in range(ptr[e], ptr[e + 1]):
                    v[idx[k]] -= val[k] * vr
            v[r] = vr
        return v

    @numba.njit(cache=True)
    def btran_etas_nb(c, rows, piv, ptr, idx, val):
        for e in range(rows.shape[0] - 1, -1, -1):
            r = rows[e]
            s = 0.0
            for k in range(ptr[e], ptr[e + 1]):
                s += val[k] * c[idx[k]]
            c[r] = (c[r] - s) / piv[e]
        return c

    def ratio_test_nb(x_b, delta, lb_b, ub_b, var_ids, feas_tol, pivot_tol, bland):
        r, theta, up = _ratio_test_nb(x_b, delta, lb_b, ub_b, var_ids, feas_tol, pivot_tol, bland)
        return int(r), float(theta), bool(up)

# --------------------------------------------------------------------------
# active selection

if USE_NUMBA:
    assign_labels = assign_labels_nb
    haversine_matrix = lambda lat1, lon1, lat2, lon2: haversine_matrix_nb(  # noqa: E731
        np.ascontiguousarray(lat1, dtype=np.float64),
        np.ascontiguousarray(lon1, dtype=np.float64),
        np.ascontiguousarray(lat2, dtype=np.float64),
        np.ascontiguousarray(lon2, dtype=np.float64),
    )
    select_entering = select_entering_nb
    ratio_test = ratio_test_nb
    select_leaving = select_leaving_nb
    dual_ratio_test = dual_ratio_test_nb
    ftran_etas = ftran_etas_nb
    btran_etas = btran_etas_nb
else:
    assign_labels = assign_labels_np
    haversine_matrix = haversine_matrix_np
    select_entering = select_entering_np
    ratio_test = ratio_test_np
    select_leaving = select_leaving_np
    dual_ratio_test = dual_ratio_test_np
    ftran_etas = ftran_etas_np
    btran_etas = btran_etas_np


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
