"""Hand an LP to an external solver through MPS files.

The command template may use ``{mps}`` and ``{solution}`` placeholders.  The
solver must write a plain-text file of ``<column name> <value>`` lines; any
other line (headers, comments starting with ``#``) is ignored.  Columns
absent from the file are taken at zero.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from .model import LpModel, LpSolution, Status
from .mps import write_mps


def read_solution_file(path: str | Path, names: list[str]) -> np.ndarray:
    index = {name: j for j, name in enumerate(names)}
    x = np.zeros(len(names))
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if len(parts) != 2 or parts[0].startswith("#"):
            continue
        j = index.get(parts[0])
        if j is None:
            continue
        try:
            x[j] = float(parts[1])
        except ValueError:
            continue
    return x


def solve_external(model: LpModel, command: str, workdir: str | Path | None = None, timeout: float | None = None) -> LpSolution:
    if not model.finalized:
        raise RuntimeError("solve_external requires a finalized model")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        mps_path = Path(tmp) / "model.mps"
        sol_path = Path(tmp) / "model.sol"
        write_mps(model, mps_path)
        cmd = command.format(mps=shlex.quote(str(mps_path)), solution=shlex.quote(str(sol_path)))
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0:
            raise RuntimeError(f"external solver failed ({proc.returncode}): {proc.stderr.strip()[:500]}")
        if not sol_path.exists():
            raise RuntimeError("external solver wrote no solution file")
        x = read_solution_file(sol_path, model.col_names())
    row, bnd = model.max_violation(x)
    status = Status.OPTIMAL if row <= 1e-6 and bnd <= 1e-6 else Status.INFEASIBLE
    msg = "" if status is Status.OPTIMAL else f"external solution violates rows by {row:.3g}, bounds by {bnd:.3g}"
    return LpSolution(status, model.objective_value(x), x, None, 0, None, msg)
