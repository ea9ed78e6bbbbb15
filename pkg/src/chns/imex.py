"""Partitioned implicit-explicit Runge-Kutta stepping.

One step runs the stage recursion

    Ut_i = U^n + dt * sum_{j<i} at[i,j] K_j
    U_i  = U^n + dt * sum_{j<i} a[i,j] K_j + dt a[i,i] Ltilde(Ut_i, U_i)
    U^{n+1} = U^n + dt * sum_j beta[j] K_j,     K_j = Ltilde(Ut_j, U_j)

where convection and the concave potential part are evaluated at the
explicitly-predicted Ut_i, so each stage needs only linear solves:
the density update is explicit, then the concentration system, then
the velocity block system.  Both shipped tableaus are stiffly accurate
(the beta row repeats the last row of the implicit alpha), so U^{n+1}
coincides with the last stage up to solver tolerance; the beta-form
update is used because it conserves the plain sums of rho and rho*c to
rounding regardless of solver tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linsolve, operators as ops
from .convection import char_speed, convective_rhs
from .errors import BoundViolation, UnknownScheme
from .fields import State, axpy_state, check_positive_density

_SQ2_INV = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class ButcherPair:
    """Explicit/diagonally-implicit tableau pair with shared beta."""

    name: str
    gamma_ex: tuple
    alpha_ex: tuple        # strictly lower triangular
    gamma_im: tuple
    alpha_im: tuple        # lower triangular with diagonal
    beta: tuple

    @property
    def stages(self):
        return len(self.beta)

    def is_stiffly_accurate(self):
        return np.allclose(self.alpha_im[-1], self.beta, rtol=0, atol=0)


def tableau(name):
    """Shipped schemes: 'ee-ie' (order 1) and 'dirksa' (order 2)."""
    key = name.lower().replace("*", "").replace("_", "-")
    if key in ("ee-ie", "eeie"):
        return ButcherPair(
            name="EE-IE",
            gamma_ex=(0.0,), alpha_ex=((0.0,),),
            gamma_im=(1.0,), alpha_im=((1.0,),),
            beta=(1.0,),
        )
    if key in ("dirksa", "-dirksa"):
        s = _SQ2_INV
        return ButcherPair(
            name="*-DIRKSA",
            gamma_ex=(0.0, 1.0 + s),
            alpha_ex=((0.0, 0.0), (1.0 + s, 0.0)),
            gamma_im=(1.0 - s, 1.0),
            alpha_im=((1.0 - s, 0.0), (s, 1.0 - s)),
            beta=(s, 1.0 - s),
        )
    raise UnknownScheme(name)


@dataclass
class StepStats:
    """Per-step diagnostics collected by the stepper."""

    char_speed: float = 0.0
    max_abs_c: float = 0.0
    conc_iters: list = field(default_factory=list)
    vel_iters: list = field(default_factory=list)


def solve_concentration_stage(rho, rhs, dt_alpha, eps, grid, solver="multigrid",
                              rel_tol=1e-6, max_iters=200, x0=None):
    """Solve the concentration stage system for C; returns (C, iterations)."""
    check_positive_density(rho)
    if dt_alpha == 0.0:
        return rhs / rho, 0
    if solver == "multigrid":
        mg = linsolve.MultigridSolver(
            rho, grid,
            lambda r, g: linsolve.concentration_operator(r, dt_alpha, eps, g))
        return mg.solve(rhs, x0=x0, rel_tol=rel_tol, max_cycles=max_iters,
                        name="concentration")
    op = linsolve.concentration_operator(rho, dt_alpha, eps, grid)
    if solver == "pcg":
        pc = linsolve.DCTPreconditioner(rho, dt_alpha, eps, grid)
        return linsolve.pcg_solve(op, rhs, x0=x0, precond=pc, rel_tol=rel_tol,
                                  max_iters=max_iters, name="concentration")
    if solver == "direct":
        return linsolve.DirectSolver(op).solve(rhs)
    raise ValueError(f"unknown solver {solver!r}")


def solve_velocity_stage(rho, rhs, dt_alpha, nu, lam, grid, solver="multigrid",
                         rel_tol=1e-6, max_iters=200, x0=None):
    """Solve the velocity stage system; rhs and result are stacked components."""
    check_positive_density(rho)
    if dt_alpha == 0.0 or (nu == 0.0 and lam == 0.0):
        return rhs / rho, 0
    if solver == "direct":
        op = linsolve.velocity_operator(rho, dt_alpha, nu, lam, grid)
        return linsolve.DirectSolver(op).solve(rhs)
    mg = linsolve.MultigridSolver(
        rho, grid,
        lambda r, g: linsolve.velocity_operator(r, dt_alpha, nu, lam, g))
    return mg.solve(rhs, x0=x0, rel_tol=rel_tol, max_cycles=max_iters,
                    name="velocity")


class ImexStepper:
    """Advances a State by one IMEX Runge-Kutta step.

    solver: 'multigrid', 'pcg' (concentration system only; the velocity
    block always uses multigrid) or 'direct' (small grids, tests).
    c_threshold, when set, raises BoundViolation after a step whose
    max|c| reaches it, signalling the driver's time-step controller.
    """

    def __init__(self, grid, params, scheme="dirksa", solver="multigrid",
                 rel_tol=1e-6, max_iters=200, c_threshold=None, forcing=None):
        self.grid = grid
        self.params = params
        self.tab = scheme if isinstance(scheme, ButcherPair) else tableau(scheme)
        self.solver = solver
        self.rel_tol = rel_tol
        self.max_iters = max_iters
        self.c_threshold = c_threshold
        self.forcing = forcing
        self._warm_c = None
        self._warm_v = None

    def _forcing_at(self, t):
        if self.forcing is None:
            return None
        return self.forcing(t)

    def step(self, state, dt, t=0.0, return_stages=False):
        """One step from t to t+dt; returns (new_state, StepStats)."""
        p = self.params
        tab = self.tab
        grid = self.grid
        stats = StepStats()
        K = []
        stages = []
        for i in range(tab.stages):
            at_row = tab.alpha_ex[i][:i]
            a_row = tab.alpha_im[i][:i]
            aii = tab.alpha_im[i][i]
            t_stage = t + tab.gamma_im[i] * dt

            u_tilde = axpy_state(state, [dt * a for a in at_row], K)
            w = axpy_state(state, [dt * a for a in a_row], K)
            check_positive_density(u_tilde.rho)

            alpha = char_speed(u_tilde, p.gamma)
            stats.char_speed = max(stats.char_speed, alpha)
            conv = convective_rhs(u_tilde, p.gamma, alpha=alpha)
            fvals = self._forcing_at(t_stage)

            nm = len(state.m)
            dta = dt * aii

            # (a) explicit density update
            rho_i = w.rho + dta * conv[0]
            if fvals is not None:
                rho_i = rho_i + dta * fvals[0]
            check_positive_density(rho_i)

            # (b) concentration system
            c_tilde = u_tilde.q / u_tilde.rho
            mminus = ops.split_tensor(c_tilde, grid.h, "-")
            rhs_c = w.q + dta * (conv[1 + nm] + mminus.apply(c_tilde))
            if fvals is not None:
                rhs_c = rhs_c + dta * fvals[1 + nm]
            c_i, c_iters = solve_concentration_stage(
                rho_i, rhs_c, dta, p.eps, grid, solver=self.solver,
                rel_tol=self.rel_tol, max_iters=self.max_iters,
                x0=self._warm_c)
            self._warm_c = c_i
            stats.conc_iters.append(c_iters)

            # (c) velocity system; gravity and capillary use stage values
            if grid.dim == 2:
                cap = ops.capillary_terms(c_i, p.eps, grid.h)
                grav = (np.zeros(grid.shape), rho_i * p.G)
            else:
                cap = (ops.capillary_term_1d(c_i, p.eps, grid.h),)
                grav = (rho_i * p.G,)
            rhs_v = []
            for k in range(nm):
                rk = w.m[k] + dta * (conv[1 + k] + grav[k] + cap[k])
                if fvals is not None:
                    rk = rk + dta * fvals[1 + k]
                rhs_v.append(rk)
            rhs_v = np.stack(rhs_v) if nm == 2 else rhs_v[0]
            v_i, v_iters = solve_velocity_stage(
                rho_i, rhs_v, dta, p.nu, p.lam, grid, solver=self.solver,
                rel_tol=self.rel_tol, max_iters=self.max_iters,
                x0=self._warm_v)
            self._warm_v = v_i
            stats.vel_iters.append(v_iters)
            v_comps = (v_i[0], v_i[1]) if nm == 2 else (v_i,)

            u_i = State(grid, rho_i, tuple(rho_i * vk for vk in v_comps),
                        rho_i * c_i)
            stages.append(u_i)

            # K_i = Ltilde(Ut_i, U_i) + forcing, from the solved values
            k_i = self._assemble_k(conv, u_i, c_i, v_comps, c_tilde, fvals)
            K.append(k_i)

        new_state = axpy_state(state, [dt * b for b in tab.beta], K)
        stats.max_abs_c = self._max_abs_c(new_state)
        if self.c_threshold is not None and stats.max_abs_c >= self.c_threshold:
            raise BoundViolation(stats.max_abs_c, self.c_threshold)
        if return_stages:
            return new_state, stats, stages, K
        return new_state, stats

    def _assemble_k(self, conv, u_i, c_i, v_comps, c_tilde, fvals):
        p = self.params
        h = self.grid.h
        nm = len(v_comps)
        ch = ops.chemical_potential_laplacian(c_i, u_i.rho, c_tilde, p.eps, h)
        out = [conv[0].copy()]
        if nm == 2:
            visc = ops.viscous_terms(v_comps[0], v_comps[1], p.nu, p.lam, h)
            cap = ops.capillary_terms(c_i, p.eps, h)
            out.append(conv[1] + cap[0] + visc[0])
            out.append(conv[2] + u_i.rho * p.G + cap[1] + visc[1])
        else:
            visc = ops.viscous_term_1d(v_comps[0], p.nu, p.lam, h)
            cap = ops.capillary_term_1d(c_i, p.eps, h)
            out.append(conv[1] + u_i.rho * p.G + cap + visc)
        out.append(conv[1 + nm] + ch)
        if fvals is not None:
            out = [ok + fk for ok, fk in zip(out, fvals)]
        return tuple(out)

    @staticmethod
    def _max_abs_c(state):
        check_positive_density(state.rho)
        return float(np.max(np.abs(state.q / state.rho)))
