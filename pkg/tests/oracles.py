"""Independent reference implementations used as test oracles.

Nothing here imports the package's solver or MPS writer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


# ---------------------------------------------------------------------------
# brute-force LP solver


def vertex_enumeration(c, A, sense, b, lb, ub, tol: float = 1e-9) -> tuple[float, np.ndarray] | None:
    """Minimise ``c x`` by checking every basic solution of a bounded LP.

    ``sense`` holds "L", "G" or "E" per row.  Every candidate vertex is the
    solution of ``n`` linearly independent active constraints drawn from the
    rows and the finite bounds.  Returns ``None`` if no vertex is feasible.
    Only valid when the optimum is attained at a vertex (bounded, pointed).
    """
    c = np.asarray(c, float)
    A = np.asarray(A, float).reshape(-1, c.size)
    b = np.asarray(b, float)
    lb, ub = np.asarray(lb, float), np.asarray(ub, float)
    n = c.size
    eye = np.eye(n)
    planes = [(A[i], b[i]) for i in range(A.shape[0])]
    eq = [i for i, s in enumerate(sense) if s == "E"]
    planes += [(eye[j], lb[j]) for j in range(n) if np.isfinite(lb[j])]
    planes += [(eye[j], ub[j]) for j in range(n) if np.isfinite(ub[j])]
    others = [k for k in range(len(planes)) if k not in eq]

    def feasible(x) -> bool:
        act = A @ x
        scale = 1.0 + np.abs(b)
        for i, s in enumerate(sense):
            if s == "L" and act[i] > b[i] + tol * scale[i]:
                return False
            if s == "G" and act[i] < b[i] - tol * scale[i]:
                return False
            if s == "E" and abs(act[i] - b[i]) > tol * scale[i]:
                return False
        return bool(np.all(x >= lb - tol * (1 + np.abs(lb))) and np.all(x <= ub + tol * (1 + np.abs(ub))))

    def search(choices):
        best = None
        for subset in choices:
            M = np.array([planes[k][0] for k in subset])
            rhs = np.array([planes[k][1] for k in subset])
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            x = np.linalg.solve(M, rhs)
            if not feasible(x):
                continue
            val = float(c @ x)
            if best is None or val < best[0]:
                best = (val, x)
        return best

    best = None
    if len(eq) <= n:
        best = search(tuple(eq) + extra for extra in itertools.combinations(others, n - len(eq)))
    if best is None:
        # rank-deficient equality rows: fall back to every subset
        best = search(itertools.combinations(range(len(planes)), n))
    return best


# ---------------------------------------------------------------------------
# free-format MPS reader


@dataclass
class ParsedMps:
    name: str
    objective_row: str
    rows: dict[str, str] = field(default_factory=dict)  # name -> sense letter
    columns: list[str] = field(default_factory=list)
    coef: dict[tuple[str, str], float] = field(default_factory=dict)  # (row, column) -> value
    rhs: dict[str, float] = field(default_factory=dict)
    lower: dict[str, float] = field(default_factory=dict)
    upper: dict[str, float] = field(default_factory=dict)

    def arrays(self):
        """Dense ``(c, A, sense, b, lb, ub)`` in file order (objective row excluded)."""
        rnames = list(self.rows)
        cpos = {cname: j for j, cname in enumerate(self.columns)}
        rpos = {rname: i for i, rname in enumerate(rnames)}
        c = np.zeros(len(self.columns))
        A = np.zeros((len(rnames), len(self.columns)))
        for (r, col), v in self.coef.items():
            if r == self.objective_row:
                c[cpos[col]] = v
            else:
                A[rpos[r], cpos[col]] = v
        b = np.array([self.rhs.get(r, 0.0) for r in rnames])
        lb = np.array([self.lower.get(col, 0.0) for col in self.columns])
        ub = np.array([self.upper.get(col, np.inf) for col in self.columns])
        return c, A, [self.rows[r] for r in rnames], b, lb, ub


def read_mps(text: str) -> ParsedMps:
    section = None
    out = ParsedMps(name="", objective_row="")
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0]
            if section == "NAME":
                out.name = head[1] if len(head) > 1 else ""
            if section == "ENDATA":
                break
            continue
        tok = raw.split()
        if section == "ROWS":
            kind, rname = tok
            if kind == "N":
                if not out.objective_row:
                    out.objective_row = rname
            else:
                out.rows[rname] = kind
        elif section == "COLUMNS":
            col = tok[0]
            if not out.columns or out.columns[-1] != col:
                if col in out.columns:
                    raise ValueError(f"column {col} is not contiguous")
                out.columns.append(col)
            for r, v in zip(tok[1::2], tok[2::2]):
                out.coef[(r, col)] = out.coef.get((r, col), 0.0) + float(v)
        elif section == "RHS":
            for r, v in zip(tok[1::2], tok[2::2]):
                out.rhs[r] = float(v)
        elif section == "BOUNDS":
            kind, col = tok[0], tok[2]
            val = float(tok[3]) if len(tok) > 3 else None
            if kind == "UP":
                out.upper[col] = val
            elif kind == "LO":
                out.lower[col] = val
            elif kind == "FX":
                out.lower[col] = out.upper[col] = val
            elif kind == "FR":
                out.lower[col], out.upper[col] = -np.inf, np.inf
            elif kind == "MI":
                out.lower[col] = -np.inf
            elif kind == "PL":
                out.upper[col] = np.inf
            else:
                raise ValueError(f"unsupported bound type {kind}")
        else:
            raise ValueError(f"unsupported section {section}")
    return out


# ---------------------------------------------------------------------------
# misc closed forms


def haversine_reference(lat1, lon1, lat2, lon2, radius: float = 3958.761) -> float:
    """Great-circle distance by the spherical law of cosines (a different formula)."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dl = np.radians(lon2 - lon1)
    cosang = np.sin(p1) * np.sin(p2) + np.cos(p1) * np.cos(p2) * np.cos(dl)
    return float(radius * np.arccos(np.clip(cosang, -1.0, 1.0)))


def highs_optimum(c, A, sense, b, lb, ub) -> tuple[str, float]:
    """Model status string and objective from HiGHS for a dense LP."""
    import highspy

    A = np.asarray(A, dtype=float)
    m, n = A.shape
    inf = highspy.kHighsInf
    row_lo = np.array([b[i] if sense[i] in "GE" else -inf for i in range(m)])
    row_hi = np.array([b[i] if sense[i] in "LE" else inf for i in range(m)])
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("presolve", "off")
    lp = highspy.HighsLp()
    lp.num_col_, lp.num_row_ = n, m
    lp.col_cost_ = np.asarray(c, dtype=float)
    lp.col_lower_ = np.where(np.isinf(lb), -inf, lb)
    lp.col_upper_ = np.where(np.isinf(ub), inf, ub)
    lp.row_lower_, lp.row_upper_ = row_lo, row_hi
    csc = [(A[:, j].nonzero()[0], A[A[:, j] != 0, j]) for j in range(n)]
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.concatenate([[0], np.cumsum([len(i) for i, _ in csc])]).astype(np.int32)
    lp.a_matrix_.index_ = np.concatenate([i for i, _ in csc] or [np.zeros(0)]).astype(np.int32)
    lp.a_matrix_.value_ = np.concatenate([v for _, v in csc] or [np.zeros(0)]).astype(float)
    h.passModel(lp)
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    return status, float(h.getInfo().objective_function_value)
