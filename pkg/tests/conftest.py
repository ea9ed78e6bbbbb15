import numpy as np
import pytest

from chns.fields import state_from_primitive


def dense_from_apply(apply_fn, shape):
    """Dense matrix of a linear map by probing with basis fields."""
    n = int(np.prod(shape))
    A = np.empty((n, n))
    e = np.zeros(n)
    for k in range(n):
        e[k] = 1.0
        A[:, k] = np.asarray(apply_fn(e.reshape(shape))).ravel()
        e[k] = 0.0
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)


def random_state(grid, rng, rho_range=(0.8, 1.6), v_amp=0.5, c_amp=0.4):
    """Admissible random state (positive density, |c| below 1)."""
    rho = rng.uniform(*rho_range, size=grid.shape)
    v = tuple(v_amp * rng.uniform(-1.0, 1.0, size=grid.shape)
              for _ in range(grid.dim))
    c = c_amp * rng.uniform(-1.0, 1.0, size=grid.shape)
    return state_from_primitive(grid, rho, v, c)


def smooth_state(grid):
    """Wall-compatible smooth state used by consistency checks."""
    if grid.dim == 1:
        x = grid.cell_centers()
        rho = 1.25 + 0.1 * np.cos(2 * np.pi * x)
        v = (np.sin(np.pi * x),)
        c = 0.1 * np.cos(np.pi * x)
    else:
        X, Y = grid.meshgrid()
        rho = 1.25 + 0.1 * np.cos(2 * np.pi * X) * np.cos(np.pi * Y)
        v = (np.sin(np.pi * X) * np.sin(np.pi * Y),
             np.sin(np.pi * X) * np.sin(2 * np.pi * Y))
        c = 0.1 * np.cos(np.pi * X) * np.cos(np.pi * Y)
    return state_from_primitive(grid, rho, v, c)
