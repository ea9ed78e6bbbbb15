"""Finite-difference operators with their exact boundary closures.

All operators act along a chosen axis (0 = x, 1 = y) of a cell-centered
field.  Rows are numbered i = 1..M in the formulas below; arrays are
0-based.  The boundary rows are part of each operator's definition, not
ghost-cell fixes:

  d1star : (f_i - f_{i-1})/h interior, f_1/h at i=1, -f_{M-1}/h at i=M;
           adjoint relation d1star = -(d1)^T
  d1     : (f_{i+1} - f_i)/h, zero last row
  dc     : centered (f_{i+1} - f_{i-1})/2h, one-sided
           (f_2-f_1)/h and (f_M-f_{M-1})/h at the ends
  dstar  : centered, with (f_2-f_1)/2h and (f_M-f_{M-1})/2h at the ends
  shift  : f_{i+1}, zero last row
  e_noslip : second derivative under no-slip values, boundary rows
           (-4, 4/3)/h^2
  lap_axis : second derivative under homogeneous Neumann, boundary rows
           (f_2 - f_1)/h^2

The split-potential tensors M_plus / M_minus discretize Delta(phi(c))
in edge-flux form with edge weights (phi'(c_L) + phi'(c_R))/2, for the
convex-concave splitting psi' = phi_plus + phi_minus, phi_plus(c) = 2c,
phi_minus(c) = c^3 - 3c.
"""

from dataclasses import dataclass

import numpy as np

from .fields import check_positive_density

AXIS_X = 0
AXIS_Y = 1


def _to_axis0(f, axis):
    if axis == 0 or f.ndim == 1:
        return f
    return f.T


def _from_axis0(f, axis, ndim):
    if axis == 0 or ndim == 1:
        return f
    return f.T


def _axis_op(core):
    """Wrap a first-axis kernel so it applies along either axis."""

    def apply(f, h, axis=0):
        f = np.asarray(f, dtype=float)
        g = core(_to_axis0(f, axis), h)
        return _from_axis0(g, axis, f.ndim)

    return apply


def _d1star_core(f, h):
    out = np.empty_like(f)
    out[0] = f[0] / h
    out[1:-1] = (f[1:-1] - f[:-2]) / h
    out[-1] = -f[-2] / h
    return out


def _d1_core(f, h):
    out = np.empty_like(f)
    out[:-1] = (f[1:] - f[:-1]) / h
    out[-1] = 0.0
    return out


def _dc_core(f, h):
    out = np.empty_like(f)
    out[0] = (f[1] - f[0]) / h
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[-1] = (f[-1] - f[-2]) / h
    return out


def _dstar_core(f, h):
    out = np.empty_like(f)
    out[0] = (f[1] - f[0]) / (2.0 * h)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[-1] = (f[-1] - f[-2]) / (2.0 * h)
    return out


def _shift_core(f, h):
    out = np.empty_like(f)
    out[:-1] = f[1:]
    out[-1] = 0.0
    return out


def _e_core(f, h):
    out = np.empty_like(f)
    h2 = h * h
    out[0] = (4.0 / 3.0 * f[1] - 4.0 * f[0]) / h2
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    out[-1] = (-4.0 * f[-1] + 4.0 / 3.0 * f[-2]) / h2
    return out


def _lap_core(f, h):
    out = np.empty_like(f)
    h2 = h * h
    out[0] = (f[1] - f[0]) / h2
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    out[-1] = (f[-2] - f[-1]) / h2
    return out


d1star = _axis_op(_d1star_core)
d1 = _axis_op(_d1_core)
dc = _axis_op(_dc_core)
dstar = _axis_op(_dstar_core)
shift = _axis_op(_shift_core)
e_noslip = _axis_op(_e_core)
lap_axis = _axis_op(_lap_core)


def laplacian(f, h):
    """Neumann Laplacian: lap_axis summed over the field's axes.

    Symmetric negative semidefinite; annihilates constants exactly.
    """
    f = np.asarray(f, dtype=float)
    out = lap_axis(f, h, axis=0)
    if f.ndim == 2:
        out += lap_axis(f, h, axis=1)
    return out


def phi_plus_prime(c):
    return np.full_like(np.asarray(c, dtype=float), 2.0)


def phi_minus_prime(c):
    c = np.asarray(c, dtype=float)
    return 3.0 * (c * c - 1.0)


def psi(c):
    c2 = np.asarray(c, dtype=float) ** 2
    return 0.25 * (c2 - 1.0) ** 2


def psi_prime(c):
    c = np.asarray(c, dtype=float)
    return c**3 - c


def psi_double_prime(c):
    return 3.0 * np.asarray(c, dtype=float) ** 2 - 1.0


@dataclass
class SplitPotentialTensor:
    """Edge-weighted Laplacian M_{+/-}(Cref) in flux form.

    edge_weights[axis][k] holds (phi'(c_k) + phi'(c_{k+1}))/2 on the edge
    between cells k and k+1 along that axis, with a zero entry on the
    last (wall) row.  Applying the tensor to any field C gives the
    divided difference of the weighted edge fluxes, which approximates
    Delta(phi(c)) when C = Cref.
    """

    h: float
    sign: str
    edge_weights: tuple

    def apply(self, C):
        C = np.asarray(C, dtype=float)
        out = np.zeros_like(C)
        h2 = self.h * self.h
        for axis, lam in enumerate(self.edge_weights):
            Ca = _to_axis0(C, axis)
            la = _to_axis0(lam, axis)
            flux = np.zeros_like(Ca)
            flux[:-1] = la[:-1] * (Ca[1:] - Ca[:-1])
            part = np.empty_like(Ca)
            part[0] = flux[0] / h2
            part[1:] = (flux[1:] - flux[:-1]) / h2
            out += _from_axis0(part, axis, C.ndim)
        return out


def split_tensor(c_ref, h, sign):
    """Assemble M_plus (sign '+') or M_minus (sign '-') from a reference field."""
    c_ref = np.asarray(c_ref, dtype=float)
    dphi = phi_plus_prime(c_ref) if sign == "+" else phi_minus_prime(c_ref)
    weights = []
    ndim = c_ref.ndim
    for axis in range(ndim):
        da = _to_axis0(dphi, axis)
        lam = np.zeros_like(da)
        lam[:-1] = 0.5 * (da[:-1] + da[1:])
        weights.append(_from_axis0(lam, axis, ndim))
    return SplitPotentialTensor(h, sign, tuple(weights))


def chemical_potential_laplacian(C, rho, c_ref, eps, h):
    """Discrete Delta(mu) with the convex-concave split.

    Returns M_plus(c_ref) C + M_minus(c_ref) c_ref
            - eps * Lap( Lap(C) / rho ),
    which reduces to the unsplit chemical-potential Laplacian when
    c_ref = C.  M_plus(anything) acts as 2*Lap, so it is applied
    directly.
    """
    check_positive_density(rho)
    mminus = split_tensor(c_ref, h, "-")
    return (2.0 * laplacian(C, h)
            + mminus.apply(c_ref)
            - eps * laplacian(laplacian(C, h) / rho, h))


def capillary_terms(C, eps, h):
    """Capillary forcings of the two momentum equations (2D).

    f2 = eps*( (c_y^2)_x/2 - (c_x^2)_x/2 - (c_x c_y)_y )
    f3 = eps*( (c_x^2)_y/2 - (c_y^2)_y/2 - (c_x c_y)_x )

    Each derivative uses the composite difference formulas tied to the
    Neumann closure of c: pure-square terms via d1star(d1 C * d1 C),
    cross-direction squares via dc(dstar C * dstar C), and the mixed
    terms via the symmetrized shift form with the 1/2 factor.
    """
    C = np.asarray(C, dtype=float)
    d1x = d1(C, h, 0)
    d1y = d1(C, h, 1)
    dsx = dstar(C, h, 0)
    dsy = dstar(C, h, 1)

    cx2_x = d1star(d1x * d1x, h, 0)
    cy2_x = dc(dsy * dsy, h, 0)
    cy2_y = d1star(d1y * d1y, h, 1)
    cx2_y = dc(dsx * dsx, h, 1)
    # (c_x c_y)_x and (c_x c_y)_y, each with the averaged shifted factor
    cxcy_x = 0.5 * d1star(d1x * (shift(dsy, h, 0) + dsy), h, 0)
    cxcy_y = 0.5 * d1star(d1y * (shift(dsx, h, 1) + dsx), h, 1)

    f2 = eps * (0.5 * cy2_x - 0.5 * cx2_x - cxcy_y)
    f3 = eps * (0.5 * cx2_y - 0.5 * cy2_y - cxcy_x)
    return f2, f3


def capillary_term_1d(C, eps, h):
    """1D momentum capillary forcing -(eps/2) (c_x^2)_x."""
    d1x = d1(C, h, 0)
    return -0.5 * eps * d1star(d1x * d1x, h, 0)


def viscous_terms(V1, V2, nu, lam, h):
    """Viscous momentum operator (2D), matrix-free.

    g2 = (2nu+lam) Ex V1 + nu Ey V1 + (nu+lam) Dx Dy V2
    g3 = (nu+lam) Dx Dy V1 + nu Ex V2 + (2nu+lam) Ey V2

    Equals the Kronecker block form built from the dense E and D
    matrices (tested against it for small M).
    """
    g2 = ((2.0 * nu + lam) * e_noslip(V1, h, 0) + nu * e_noslip(V1, h, 1)
          + (nu + lam) * dc(dc(V2, h, 1), h, 0))
    g3 = ((nu + lam) * dc(dc(V1, h, 1), h, 0) + nu * e_noslip(V2, h, 0)
          + (2.0 * nu + lam) * e_noslip(V2, h, 1))
    return g2, g3


def viscous_term_1d(V, nu, lam, h):
    """1D momentum diffusion ((2nu+lam) v_x)_x."""
    return (2.0 * nu + lam) * e_noslip(V, h, 0)


def dense_from_apply(apply_fn, shape):
    """Dense matrix of a linear operator by applying it to basis fields.

    Intended for small grids in tests and for coarse-level direct solves.
    """
    n = int(np.prod(shape))
    A = np.empty((n, n))
    e = np.zeros(n)
    for k in range(n):
        e[k] = 1.0
        A[:, k] = np.asarray(apply_fn(e.reshape(shape))).ravel()
        e[k] = 0.0
    return A


def dense_e_matrix(M, h):
    return dense_from_apply(lambda f: e_noslip(f, h, 0), (M,))


def dense_dc_matrix(M, h):
    return dense_from_apply(lambda f: dc(f, h, 0), (M,))


def dense_laplacian(grid):
    return dense_from_apply(lambda f: laplacian(f, grid.h), grid.shape)
