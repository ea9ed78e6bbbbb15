"""Method-of-lines right-hand side assembly.

The semidiscrete system is U' = L(U) with

    L(U) = C(U) + L1(U) + L2(U) + L3(U) + L4(U)

(convection, gravity, capillary, Cahn-Hilliard, viscous).  The split
variant Ltilde(Ut, U) evaluates convection at the explicitly-treated
state Ut and keeps the concave potential part at Ut while the convex
part and the fourth-order term act on U; Ltilde(U, U) = L(U) holds by
construction.
"""

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .convection import convective_rhs
from .fields import check_positive_density, primitives


@dataclass
class RhsParts:
    """Per-mechanism contributions to the semidiscrete right-hand side.

    Slots not present in an equation are zero.  Gravity enters the last
    momentum equation (momentum-2 in 2D, the single momentum in 1D).
    """

    convective: tuple
    gravity: np.ndarray
    capillary: tuple
    cahn_hilliard: np.ndarray
    viscous: tuple
    forcing: tuple = None

    def total(self):
        """Summed right-hand side, one array per conserved equation."""
        conv = self.convective
        n = len(conv)
        out = [c.copy() for c in conv]
        if n == 4:
            out[1] += self.capillary[0] + self.viscous[0]
            out[2] += self.gravity + self.capillary[1] + self.viscous[1]
            out[3] += self.cahn_hilliard
        else:
            out[1] += self.gravity + self.capillary[0] + self.viscous[0]
            out[2] += self.cahn_hilliard
        if self.forcing is not None:
            for k, fk in enumerate(self.forcing):
                out[k] = out[k] + fk
        return tuple(out)


def rhs_split(state_tilde, state, params, t=0.0, forcing=None, alpha=None):
    """Split right-hand side Ltilde(state_tilde, state) as RhsParts."""
    check_positive_density(state_tilde.rho)
    check_positive_density(state.rho)
    grid = state.grid
    h = grid.h
    conv = convective_rhs(state_tilde, params.gamma, alpha=alpha)
    v, c = primitives(state)
    _, c_tilde = primitives(state_tilde)

    gravity = state.rho * params.G
    ch = ops.chemical_potential_laplacian(c, state.rho, c_tilde,
                                          params.eps, h)
    if grid.dim == 2:
        capillary = ops.capillary_terms(c, params.eps, h)
        viscous = ops.viscous_terms(v[0], v[1], params.nu, params.lam, h)
    else:
        capillary = (ops.capillary_term_1d(c, params.eps, h),)
        viscous = (ops.viscous_term_1d(v[0], params.nu, params.lam, h),)

    fvals = forcing(t) if forcing is not None else None
    return RhsParts(conv, gravity, capillary, ch, viscous, fvals)


def rhs_full(state, params, t=0.0, forcing=None):
    """Unsplit right-hand side L(state) = Ltilde(state, state)."""
    return rhs_split(state, state, params, t=t, forcing=forcing)


def mixing_energy(state, params):
    """Discrete Ginzburg-Landau mixing energy.

    h^dim * sum( psi(c) + eps/2 |grad_h c|^2 ) with forward-difference
    gradients, whose squared sum pairs with the Neumann Laplacian.
    Monitored as a diagnostic; decreasing for pure Cahn-Hilliard flow.
    """
    _, c = primitives(state)
    h = state.grid.h
    grad2 = ops.d1(c, h, 0) ** 2
    if state.grid.dim == 2:
        grad2 = grad2 + ops.d1(c, h, 1) ** 2
    dens = ops.psi(c) + 0.5 * params.eps * grad2
    return float(np.sum(dens)) * h**state.grid.dim
