"""Grids, state vectors and elementwise field algebra.

Fields live on cell centers x_{i,j} = ((i-1/2)h, (j-1/2)h), i,j = 1..M,
h = 1/M, on the unit square (or unit interval in 1D).  A 2D field is a
(M, M) float64 array with axis 0 = x index i and axis 1 = y index j, so
that C-order ravel() reproduces the lexicographic layout k = M(i-1)+j
used for all flattened linear algebra.  1D fields are plain (M,) arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDensity


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on (0,1)^dim."""

    dim: int
    M: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.M < 3:
            raise ValueError("M must be at least 3")

    @property
    def h(self):
        return 1.0 / self.M

    @property
    def shape(self):
        return (self.M,) if self.dim == 1 else (self.M, self.M)

    @property
    def ncells(self):
        return self.M**self.dim

    def cell_centers(self):
        """1D array of per-axis cell-center coordinates."""
        return (np.arange(self.M) + 0.5) * self.h

    def meshgrid(self):
        """(X, Y) coordinate arrays for 2D grids, X for 1D."""
        xc = self.cell_centers()
        if self.dim == 1:
            return xc
        return np.meshgrid(xc, xc, indexing="ij")

    def flat_index(self, i, j=None):
        """Lexicographic index k = M(i-1)+j for 1-based (i, j)."""
        if self.dim == 1:
            return i - 1
        return self.M * (i - 1) + (j - 1)


@dataclass
class PhysParams:
    """Physical parameters of the model.

    gamma: adiabatic exponent of the pressure law p = rho^gamma (> 1)
    nu:    shear viscosity (>= 0)
    lam:   second viscosity
    eps:   interface thickness parameter (> 0)
    G:     gravitational acceleration (acts on momentum-2 in 2D,
           momentum-1 in 1D)
    """

    gamma: float = 5.0 / 3.0
    nu: float = 0.0
    lam: float = 0.0
    eps: float = 1e-4
    G: float = 0.0

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


@dataclass
class State:
    """Conserved variables (rho, m, q) on one grid.

    m is a tuple with one (1D) or two (2D) momentum components rho*v_k,
    and q = rho*c.  All arrays share the grid's shape.
    """

    grid: Grid
    rho: np.ndarray
    m: tuple
    q: np.ndarray

    def components(self):
        """Conserved fields in equation order (rho, m..., q)."""
        return (self.rho, *self.m, self.q)

    def copy(self):
        return State(self.grid, self.rho.copy(),
                     tuple(mk.copy() for mk in self.m), self.q.copy())

    def max_abs(self):
        return max(float(np.max(np.abs(f))) for f in self.components())

    def all_finite(self):
        return all(np.all(np.isfinite(f)) for f in self.components())


def state_from_primitive(grid, rho, v, c):
    """Build a State from primitive fields (v is a tuple of components)."""
    rho = np.asarray(rho, dtype=float)
    m = tuple(rho * np.asarray(vk, dtype=float) for vk in v)
    return State(grid, rho, m, rho * np.asarray(c, dtype=float))


def check_positive_density(rho):
    """Raise NonPositiveDensity pointing at the first offending cell."""
    if np.all(rho > 0.0):
        return
    flat = np.asarray(rho).ravel()
    idx = int(np.argmax(flat <= 0.0))
    raise NonPositiveDensity(idx, float(flat[idx]))


def primitives(state):
    """Primitive fields (v, c) with v_k = m_k/rho and c = q/rho."""
    check_positive_density(state.rho)
    v = tuple(mk / state.rho for mk in state.m)
    c = state.q / state.rho
    return v, c


def concentration(state):
    check_positive_density(state.rho)
    return state.q / state.rho


def grid_sum(f):
    """Plain sum over all cells (no cell-volume factor).

    This is the quantity whose drift defines the conservation errors
    err_rho and err_q.
    """
    return float(np.sum(f))


def volume_integral(f, grid):
    """Cell-volume weighted sum h^dim * sum(f), for energy diagnostics."""
    return grid_sum(f) * grid.h**grid.dim


def axpy_state(base, coeffs, increments):
    """base + sum_j coeffs[j] * increments[j], per conserved component.

    increments are tuples of arrays in equation order.
    """
    comps = [f.copy() for f in base.components()]
    for a, inc in zip(coeffs, increments):
        if a == 0.0:
            continue
        for k, dk in enumerate(inc):
            comps[k] += a * dk
    nm = len(base.m)
    return State(base.grid, comps[0], tuple(comps[1:1 + nm]), comps[1 + nm])
