"""Free-format MPS writer.

Layout: NAME, ROWS (objective row ``OBJ`` first), COLUMNS with one entry per
line in column-major order, RHS, BOUNDS, ENDATA.  Numbers use 17 significant
digits so every double round-trips.  Columns without any coefficient are
written with an explicit zero objective entry so readers still declare them.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .model import SENSE_LETTERS, LpModel

OBJ_ROW = "OBJ"
RHS_SET = "RHS"
BND_SET = "BND"


def fmt(v: float) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, ".17g")


def _check_name(name: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"MPS names must be non-empty without whitespace: {name!r}")
    return name


def mps_text(model: LpModel) -> str:
    if not model.finalized:
        raise RuntimeError("write_mps requires a finalized model")
    buf = io.StringIO()
    w = buf.write
    cols = [_check_name(n) for n in model.col_names()]
    rows = [_check_name(n) for n in model.row_names()]
    if OBJ_ROW in rows:
        raise ValueError(f"row name {OBJ_ROW!r} is reserved")

    w(f"NAME {_check_name(model.name)}\n")
    w("ROWS\n")
    w(f" N {OBJ_ROW}\n")
    for name, code in zip(rows, model.sense):
        w(f" {SENSE_LETTERS[code]} {name}\n")

    w("COLUMNS\n")
    A = model.A
    obj = model.obj
    indptr, indices, data = A.indptr, A.indices, A.data
    for j, cname in enumerate(cols):
        lo, hi = indptr[j], indptr[j + 1]
        if obj[j] != 0.0 or lo == hi:
            w(f" {cname} {OBJ_ROW} {fmt(obj[j])}\n")
        for k in range(lo, hi):
            w(f" {cname} {rows[indices[k]]} {fmt(data[k])}\n")

    w("RHS\n")
    for i in np.flatnonzero(model.rhs):
        w(f" {RHS_SET} {rows[i]} {fmt(model.rhs[i])}\n")

    w("BOUNDS\n")
    for j, cname in enumerate(cols):
        lo, hi = model.lb[j], model.ub[j]
        if lo == hi:
            w(f" FX {BND_SET} {cname} {fmt(lo)}\n")
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            w(f" FR {BND_SET} {cname}\n")
            continue
        if np.isneginf(lo):
            w(f" MI {BND_SET} {cname}\n")
        elif lo != 0.0:
            w(f" LO {BND_SET} {cname} {fmt(lo)}\n")
        if np.isfinite(hi):
            w(f" UP {BND_SET} {cname} {fmt(hi)}\n")
    w("ENDATA\n")
    return buf.getvalue()


def write_mps(model: LpModel, path: str | os.PathLike) -> None:
    text = mps_text(model)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write MPS file {os.fspath(path)!r}: {exc}") from exc
