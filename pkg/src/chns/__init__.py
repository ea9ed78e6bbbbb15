"""Finite-difference IMEX solver for the compressible isentropic
Cahn-Hilliard-Navier-Stokes equations on (0,1)^d, d = 1, 2."""

__version__ = "0.1.0"

from .fields import Grid, PhysParams, State, primitives, state_from_primitive
from .driver import RunConfig, run, load_config, parse_config

__all__ = [
    "Grid", "PhysParams", "State", "primitives", "state_from_primitive",
    "RunConfig", "run", "load_config", "parse_config", "__version__",
]
