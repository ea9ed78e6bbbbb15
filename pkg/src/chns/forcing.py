"""Manufactured solution and its source terms for the forced order test.

The prescribed fields (compatible with the wall boundary conditions):

    rho = cos(2 pi x) cos(pi y) (t+1)/10 + 5/4
    v1  = -sin(pi x) sin(pi y) (2 t^2 - 1)
    v2  =  sin(pi x) sin(2 pi y) (t^2 + 1)
    c   =  3/4 - cos(pi x) cos(pi y) (t-1)/10

The four source terms below are the closed-form residuals obtained by
substituting these fields into the governing equations; adding them to
the right-hand side makes the fields an exact solution.  All derivative
pieces are written out by hand; the test suite guards the transcription
with an independent finite-difference residual oracle.
"""

import numpy as np

from .fields import state_from_primitive

PI = np.pi


def _trig(x, y):
    return {
        "sx": np.sin(PI * x), "cx": np.cos(PI * x),
        "sy": np.sin(PI * y), "cy": np.cos(PI * y),
        "s2x": np.sin(2 * PI * x), "c2x": np.cos(2 * PI * x),
        "s2y": np.sin(2 * PI * y), "c2y": np.cos(2 * PI * y),
    }


def exact_fields(x, y, t):
    """Primitive solution fields (rho, v1, v2, c) at (x, y, t)."""
    g = _trig(x, y)
    rho = g["c2x"] * g["cy"] * (t + 1.0) / 10.0 + 1.25
    v1 = -g["sx"] * g["sy"] * (2.0 * t * t - 1.0)
    v2 = g["sx"] * g["s2y"] * (t * t + 1.0)
    c = 0.75 - g["cx"] * g["cy"] * (t - 1.0) / 10.0
    return rho, v1, v2, c


def exact_state(grid, t):
    """Exact solution sampled on a 2D grid, as a conserved State."""
    X, Y = grid.meshgrid()
    rho, v1, v2, c = exact_fields(X, Y, t)
    return state_from_primitive(grid, rho, (v1, v2), c)


def exact_time_derivative(x, y, t):
    """d/dt of the conserved fields (rho, m1, m2, q)."""
    g = _trig(x, y)
    rho, v1, v2, c = exact_fields(x, y, t)
    rho_t = g["c2x"] * g["cy"] / 10.0
    v1_t = -4.0 * t * g["sx"] * g["sy"]
    v2_t = 2.0 * t * g["sx"] * g["s2y"]
    c_t = -g["cx"] * g["cy"] / 10.0
    return (rho_t,
            rho_t * v1 + rho * v1_t,
            rho_t * v2 + rho * v2_t,
            rho_t * c + rho * c_t)


def _derivatives(x, y, t):
    """All spatial derivatives needed to assemble the residuals."""
    g = _trig(x, y)
    a = (t + 1.0) / 10.0          # rho amplitude
    b = 1.0 - 2.0 * t * t        # v1 amplitude
    d = t * t + 1.0              # v2 amplitude
    e = (1.0 - t) / 10.0         # c amplitude

    sx, cx, sy, cy = g["sx"], g["cx"], g["sy"], g["cy"]
    s2x, c2x, s2y, c2y = g["s2x"], g["c2x"], g["s2y"], g["c2y"]

    D = {}
    D["rho"] = a * c2x * cy + 1.25
    D["rho_x"] = -2.0 * PI * a * s2x * cy
    D["rho_y"] = -PI * a * c2x * sy
    D["rho_xx"] = -4.0 * PI**2 * a * c2x * cy
    D["rho_yy"] = -PI**2 * a * c2x * cy

    D["v1"] = b * sx * sy
    D["v1_x"] = PI * b * cx * sy
    D["v1_y"] = PI * b * sx * cy
    D["v1_xx"] = -PI**2 * b * sx * sy
    D["v1_yy"] = -PI**2 * b * sx * sy
    D["v1_xy"] = PI**2 * b * cx * cy

    D["v2"] = d * sx * s2y
    D["v2_x"] = PI * d * cx * s2y
    D["v2_y"] = 2.0 * PI * d * sx * c2y
    D["v2_xx"] = -PI**2 * d * sx * s2y
    D["v2_yy"] = -4.0 * PI**2 * d * sx * s2y
    D["v2_xy"] = 2.0 * PI**2 * d * cx * c2y

    D["c"] = 0.75 + e * cx * cy
    D["c_x"] = -PI * e * sx * cy
    D["c_y"] = -PI * e * cx * sy
    D["c_xx"] = -PI**2 * e * cx * cy
    D["c_yy"] = -PI**2 * e * cx * cy
    D["c_xy"] = PI**2 * e * sx * sy
    # Laplacian of c and its derivatives up to second order
    D["lc"] = -2.0 * PI**2 * e * cx * cy
    D["lc_x"] = 2.0 * PI**3 * e * sx * cy
    D["lc_y"] = 2.0 * PI**3 * e * cx * sy
    D["lc_xx"] = 2.0 * PI**4 * e * cx * cy
    D["lc_yy"] = 2.0 * PI**4 * e * cx * cy
    return D


def source_terms(x, y, t, params):
    """Source terms (F1, F2, F3, F4) of the forced equations."""
    gam, nu, lam, eps, G = (params.gamma, params.nu, params.lam,
                            params.eps, params.G)
    D = _derivatives(x, y, t)
    rho_t, m1_t, m2_t, q_t = exact_time_derivative(x, y, t)

    rho, rho_x, rho_y = D["rho"], D["rho_x"], D["rho_y"]
    v1, v1_x, v1_y = D["v1"], D["v1_x"], D["v1_y"]
    v2, v2_x, v2_y = D["v2"], D["v2_x"], D["v2_y"]
    c, c_x, c_y = D["c"], D["c_x"], D["c_y"]
    lc = D["lc"]
    p_x = gam * rho ** (gam - 1.0) * rho_x
    p_y = gam * rho ** (gam - 1.0) * rho_y

    F1 = rho_t + rho_x * v1 + rho * v1_x + rho_y * v2 + rho * v2_y

    conv2 = (rho_x * v1 * v1 + 2.0 * rho * v1 * v1_x + p_x
             + rho_y * v1 * v2 + rho * v1_y * v2 + rho * v1 * v2_y)
    # capillary forcing reduces to -eps * Laplacian(c) * grad(c)
    rhs2 = (-eps * lc * c_x
            + nu * (D["v1_xx"] + D["v1_yy"])
            + (nu + lam) * (D["v1_xx"] + D["v2_xy"]))
    F2 = m1_t + conv2 - rhs2

    conv3 = (rho_x * v1 * v2 + rho * v1_x * v2 + rho * v1 * v2_x
             + rho_y * v2 * v2 + 2.0 * rho * v2 * v2_y + p_y)
    rhs3 = (rho * G - eps * lc * c_y
            + nu * (D["v2_xx"] + D["v2_yy"])
            + (nu + lam) * (D["v1_xy"] + D["v2_yy"]))
    F3 = m2_t + conv3 - rhs3

    conv4 = (rho_x * c * v1 + rho * c_x * v1 + rho * c * v1_x
             + rho_y * c * v2 + rho * c_y * v2 + rho * c * v2_y)
    # Delta(psi'(c)) = psi''(c) Delta c + psi'''(c) |grad c|^2
    lap_psi = (3.0 * c * c - 1.0) * lc + 6.0 * c * (c_x**2 + c_y**2)
    # Delta(Delta c / rho) by quotient rule
    w_lap = ((D["lc_xx"] + D["lc_yy"]) / rho
             - 2.0 * (D["lc_x"] * rho_x + D["lc_y"] * rho_y) / rho**2
             - lc * (D["rho_xx"] + D["rho_yy"]) / rho**2
             + 2.0 * lc * (rho_x**2 + rho_y**2) / rho**3)
    lap_mu = lap_psi - eps * w_lap
    F4 = q_t + conv4 - lap_mu

    return F1, F2, F3, F4


class ManufacturedForcing:
    """Grid-sampled source terms, cached per evaluation time."""

    def __init__(self, grid, params):
        self.params = params
        self.X, self.Y = grid.meshgrid()

    def __call__(self, t):
        return source_terms(self.X, self.Y, t, self.params)
