"""Time the numba and numpy flavours of every kernel on representative inputs.

Usage::

    python3 benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python3 benchmarks/bench_kernels.py --solve    # plus a toy solve under each backend

The solve comparison runs in subprocesses because the backend is chosen at
import time from ``GRIDX_DISABLE_NUMBA``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from gridx import _kernels as K


def _inputs(rng: np.random.Generator) -> dict[str, tuple]:
    m, n = 20_000, 30_000
    X = rng.normal(size=(365, 240))
    C = X[rng.choice(365, 5, replace=False)].copy()
    lat1, lon1 = rng.uniform(26, 36, 500), rng.uniform(-106, -94, 500)
    lat2, lon2 = rng.uniform(26, 36, 254), rng.uniform(-106, -94, 254)
    d = rng.normal(size=n)
    status = rng.integers(0, 4, n).astype(np.int64)
    x_b = rng.normal(size=m)
    lb_b = np.where(rng.random(m) < 0.5, 0.0, -np.inf)
    ub_b = np.where(rng.random(m) < 0.5, 1.0, np.inf)
    delta = rng.normal(size=m) * (rng.random(m) < 0.05)
    var_ids = rng.permutation(m).astype(np.int64)
    weights = rng.uniform(0.5, 2.0, m)
    alpha_r = rng.normal(size=n) * (rng.random(n) < 0.05)
    k = 100
    rows = rng.integers(0, m, k).astype(np.int64)
    piv = rng.uniform(0.5, 2.0, k)
    lens = rng.integers(1, 40, k)
    ptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
    idx = rng.integers(0, m, ptr[-1]).astype(np.int64)
    val = rng.normal(size=ptr[-1])
    v = rng.normal(size=m)
    return {
        "assign_labels": (X, C),
        "haversine_matrix": (lat1, lon1, lat2, lon2),
        "select_entering": (d, status, 1e-7, False),
        "ratio_test": (x_b, delta, lb_b, ub_b, var_ids, 1e-7, 1e-9, False),
        "select_leaving": (x_b, lb_b, ub_b, weights, 1e-7, False, var_ids),
        "dual_ratio_test": (np.abs(d), alpha_r, status, 1.0, 1e-7, 1e-9, False),
        "ftran_etas": (v, rows, piv, ptr, idx, val),
        "btran_etas": (v, rows, piv, ptr, idx, val),
    }


def bench_kernels(repeat: int = 5, number: int = 20) -> list[tuple[str, float, float | None]]:
    rng = np.random.default_rng(0)
    out = []
    for name, args in _inputs(rng).items():
        copy = name.endswith("_etas")  # in-place kernels get a fresh vector each call
        fn_np = getattr(K, f"{name}_np")
        call_np = (lambda f=fn_np, a=args: f(a[0].copy(), *a[1:])) if copy else (lambda f=fn_np, a=args: f(*a))
        t_np = min(timeit.repeat(call_np, repeat=repeat, number=number)) / number
        t_nb = None
        if K.HAVE_NUMBA:
            fn_nb = getattr(K, f"{name}_nb")
            call_nb = (lambda f=fn_nb, a=args: f(a[0].copy(), *a[1:])) if copy else (lambda f=fn_nb, a=args: f(*a))
            call_nb()  # compile outside the timing
            t_nb = min(timeit.repeat(call_nb, repeat=repeat, number=number)) / number
        out.append((name, t_np, t_nb))
    return out


SOLVE_SNIPPET = """
import time
from gridx import _kernels
from gridx.data import toy_scenario_path
from gridx.pipeline import load_inputs
from gridx.planner import build_model
from gridx.lp import solve
plan = build_model(load_inputs(toy_scenario_path()))
t0 = time.perf_counter()
sol = solve(plan.model)
print(_kernels.backend(), sol.status.value, repr(sol.objective), sol.iterations, round(time.perf_counter() - t0, 2))
"""


def bench_solve() -> list[str]:
    lines = []
    for disable in ("0", "1"):
        env = dict(os.environ, GRIDX_DISABLE_NUMBA=disable)
        res = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, capture_output=True, text=True, check=True)
        lines.append(res.stdout.strip())
    return lines


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--solve", action="store_true", help="also time a full toy solve per backend")
    args = p.parse_args(argv)
    print(f"{'kernel':<18} {'numpy [us]':>12} {'numba [us]':>12} {'speed-up':>9}")
    for name, t_np, t_nb in bench_kernels():
        nb = f"{t_nb * 1e6:12.1f}" if t_nb is not None else f"{'n/a':>12}"
        ratio = f"{t_np / t_nb:9.1f}" if t_nb else f"{'':>9}"
        print(f"{name:<18} {t_np * 1e6:12.1f} {nb} {ratio}")
    if args.solve:
        print("\nbackend status objective iterations seconds")
        for line in bench_solve():
            print(line)


if __name__ == "__main__":
    main()
