"""Staggered finite-volume solver for compressible reactive Euler flow.

Pressure-correction time stepping on a 1D MAC grid, with a transported
burnt-zone indicator, stoichiometry-constrained species transport and an
exact-solution oracle for the infinitely fast chemistry limit.
"""

from .errors import ConfigError, OracleError, StepFailure
from .grid import StaggeredGrid, build_uniform_grid

__all__ = [
    "ConfigError",
    "OracleError",
    "StepFailure",
    "StaggeredGrid",
    "build_uniform_grid",
]

__version__ = "0.1.0"
