"""Convective right-hand side via WENO5 flux differences.

Finite-difference formulation: split each directional physical flux
globally (Lax-Friedrichs, f_pm = (f +- alpha*u)/2 with alpha the maximum
characteristic speed), reconstruct upwind interface values of both
halves with fifth-order WENO, and take divided differences of the
numerical flux.

Walls are handled with reflecting ghost states: density and rho*c are
extended evenly, the wall-normal momentum oddly and the tangential
momentum evenly.  The odd/even pairing makes the numerical mass and
concentration fluxes vanish identically at the walls, so plain grid
sums of those components are conserved by telescoping.
"""

import numpy as np

from .fields import check_positive_density

# Jiang-Shu smoothness constants and ideal weights
_EPS_WENO = 1e-6
_IW0, _IW1, _IW2 = 0.1, 0.6, 0.3
_K1 = 13.0 / 12.0
_K2 = 0.25


def weno5_left(a, b, c, d, e):
    """Fifth-order WENO value at the right interface of cell c.

    Arguments are the five upwind-biased stencil values (i-2 .. i+2) for
    the interface i+1/2; vectorized over arrays.
    """
    q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q2 = (2.0 * c + 5.0 * d - e) / 6.0

    b0 = _K1 * (a - 2.0 * b + c) ** 2 + _K2 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = _K1 * (b - 2.0 * c + d) ** 2 + _K2 * (b - d) ** 2
    b2 = _K1 * (c - 2.0 * d + e) ** 2 + _K2 * (3.0 * c - 4.0 * d + e) ** 2

    w0 = _IW0 / (_EPS_WENO + b0) ** 2
    w1 = _IW1 / (_EPS_WENO + b1) ** 2
    w2 = _IW2 / (_EPS_WENO + b2) ** 2
    return (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)


def weno5_weights(a, b, c, d, e):
    """Normalized nonlinear weights of the left-biased reconstruction.

    Diagnostic helper: the weights are nonnegative, sum to one, and
    approach the ideal values (0.1, 0.6, 0.3) on smooth data.
    """
    b0 = _K1 * (a - 2.0 * b + c) ** 2 + _K2 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = _K1 * (b - 2.0 * c + d) ** 2 + _K2 * (b - d) ** 2
    b2 = _K1 * (c - 2.0 * d + e) ** 2 + _K2 * (3.0 * c - 4.0 * d + e) ** 2
    w0 = _IW0 / (_EPS_WENO + b0) ** 2
    w1 = _IW1 / (_EPS_WENO + b1) ** 2
    w2 = _IW2 / (_EPS_WENO + b2) ** 2
    total = w0 + w1 + w2
    return w0 / total, w1 / total, w2 / total


def weno5_reconstruct(stencil, bias):
    """Reconstruct one interface value from a 5-value stencil.

    bias 'left' treats the stencil as cells i-2..i+2 for interface
    i+1/2; bias 'right' as cells i-1..i+3 (downwind half).
    """
    a, b, c, d, e = stencil
    if bias == "left":
        return weno5_left(a, b, c, d, e)
    if bias == "right":
        return weno5_left(e, d, c, b, a)
    raise ValueError(f"unknown bias {bias!r}")


def char_speed(state, gamma):
    """Maximum characteristic speed max_k,j (|v_k| + sqrt(gamma rho^(gamma-1)))."""
    check_positive_density(state.rho)
    sound = np.sqrt(gamma * state.rho ** (gamma - 1.0))
    vmax = np.zeros_like(state.rho)
    for mk in state.m:
        np.maximum(vmax, np.abs(mk / state.rho), out=vmax)
    return float(np.max(vmax + sound))


def glf_split(f, u, alpha):
    """Global Lax-Friedrichs splitting f_pm = (f +- alpha*u)/2."""
    fp = 0.5 * (f + alpha * u)
    fm = 0.5 * (f - alpha * u)
    return fp, fm


def _extend(u, sign, bc):
    """Prepend/append 3 ghost layers along axis 0.

    'reflect' mirrors across the walls with the given sign; 'periodic'
    wraps (testing hook for interior-order studies).
    """
    if bc == "periodic":
        return np.concatenate([u[-3:], u, u[:3]], axis=0)
    lo = sign * u[2::-1]
    hi = sign * u[:-4:-1]
    return np.concatenate([lo, u, hi], axis=0)


def _flux_divergence(cons_ext, flux_ext, alpha, h):
    """-d/dx of the WENO5 GLF numerical flux, along axis 0.

    cons_ext/flux_ext carry 3 ghost layers on each side (M+6 rows);
    returns M rows.
    """
    fp = 0.5 * (flux_ext + alpha * cons_ext)
    fm = 0.5 * (flux_ext - alpha * cons_ext)
    # interface l (= wall + l*h) upwinds cells l-2..l+2 of fp, l-1..l+3 of fm
    fhat = weno5_left(fp[:-5], fp[1:-4], fp[2:-3], fp[3:-2], fp[4:-1])
    fhat = fhat + weno5_left(fm[5:], fm[4:-1], fm[3:-2], fm[2:-3], fm[1:-4])
    return -(fhat[1:] - fhat[:-1]) / h


def convective_rhs(state, gamma, alpha=None, bc="reflect"):
    """Convective part of the semidiscretization, one array per equation.

    alpha defaults to the state's own characteristic speed; the stepper
    passes the value it computed for the current stage.
    """
    check_positive_density(state.rho)
    if alpha is None:
        alpha = char_speed(state, gamma)
    h = state.grid.h
    if state.grid.dim == 1:
        return _convective_rhs_1d(state, gamma, alpha, h, bc)
    return _convective_rhs_2d(state, gamma, alpha, h, bc)


def _convective_rhs_1d(state, gamma, alpha, h, bc):
    rho, (m,), q = state.rho, state.m, state.q
    re = _extend(rho, 1.0, bc)
    me = _extend(m, -1.0, bc)
    qe = _extend(q, 1.0, bc)
    ve = me / re
    pe = re**gamma
    fluxes = (me, me * ve + pe, qe * ve)
    cons = (re, me, qe)
    return tuple(_flux_divergence(cons[k], fluxes[k], alpha, h)
                 for k in range(3))


def _convective_rhs_2d(state, gamma, alpha, h, bc):
    rho, (m1, m2), q = state.rho, state.m, state.q
    out = [np.zeros(state.grid.shape) for _ in range(4)]
    for axis in range(2):
        if axis == 0:
            fields = (rho, m1, m2, q)
            signs = (1.0, -1.0, 1.0, 1.0)   # m1 is wall-normal
        else:
            fields = (rho.T, m1.T, m2.T, q.T)
            signs = (1.0, 1.0, -1.0, 1.0)   # m2 is wall-normal
        ext = [_extend(f, s if bc == "reflect" else 1.0, bc)
               for f, s in zip(fields, signs)]
        re, m1e, m2e, qe = ext
        vn = (m1e if axis == 0 else m2e) / re
        pe = re**gamma
        fluxes = [re * vn, m1e * vn, m2e * vn, qe * vn]
        fluxes[1 + axis] += pe
        for k in range(4):
            div = _flux_divergence(ext[k], fluxes[k], alpha, h)
            out[k] += div if axis == 0 else div.T
    return tuple(out)
