"""LP representation, MPS output and the reference simplex solver."""

from .external import solve_external
from .model import LpModel, LpSolution, Sense, Status
from .mps import mps_text, write_mps
from .simplex import solve

__all__ = ["LpModel", "LpSolution", "Sense", "Status", "mps_text", "solve", "solve_external", "write_mps"]
