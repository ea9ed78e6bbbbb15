"""Simulation orchestration: configuration, time loop, diagnostics, output.

The time step follows the convective CFL rule dt = CFL * dx / cs with
cs the maximum characteristic speed, recomputed every step.  When
adaptation is enabled, a step whose max|c| reaches the configured
threshold (or that drives the density non-positive) is rejected, the
CFL number is backed off and the step retried from the same state; an
accepted step lets the CFL number recover toward its configured
maximum.
"""

import csv
import io
import os
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .convection import char_speed
from .errors import (BoundViolation, ConfigError, NonPositiveDensity,
                     SimulationBlowUp, SolverDivergence,
                     StepRejectedTooManyTimes)
from .fields import Grid, PhysParams, grid_sum, state_from_primitive
from .forcing import ManufacturedForcing, exact_state
from .imex import ImexStepper
from .semidisc import mixing_energy, rhs_full

# figure output instants that runs hit exactly when saving snapshots
FIGURE_TIMES = (0.0, 0.01, 0.02, 0.03, 0.04, 0.1, 0.14, 0.23, 0.24,
                0.28, 0.29, 0.3, 0.5, 0.6, 0.7, 1.0)

DIAG_COLUMNS = ("t", "dt", "cfl", "err_rho", "err_q", "cmin", "cmax",
                "cs", "mg_iters_c", "mg_iters_v", "energy")

KNOWN_TESTS = ("test1", "test2", "test3", "stability1d", "order")


@dataclass
class RunConfig:
    test: str = "test1"
    dim: int = 2
    M: int = 64
    T_final: float = 0.1
    gamma: float = 5.0 / 3.0
    nu: float = 1e-3
    lam: float = 1e-4
    eps: float = 1e-4
    G: float = -10.0
    scheme: str = "dirksa"
    cfl: float = 0.4
    cfl_adapt: bool = True
    c_threshold: float = 1.5
    dt_backoff: float = 0.5
    dt_recovery: float = 1.1
    max_retries: int = 20
    solver: str = "multigrid"
    solver_tol: float = 1e-6
    solver_max_iters: int = 400
    dt_fixed: float = 0.0          # 0 disables; overrides the CFL rule
    snapshot_interval: float = 0.0  # 0: only t=0, figure times and T_final
    outdir: str = ""
    seed: int = 0
    noise_std: float = 1e-10
    blowup_limit: float = 1e6

    def validate(self):
        if self.test not in KNOWN_TESTS:
            raise ConfigError(f"unknown test {self.test!r}")
        if self.dim not in (1, 2):
            raise ConfigError("dim must be 1 or 2")
        if self.M < 8:
            raise ConfigError("M must be at least 8")
        if self.cfl <= 0.0:
            raise ConfigError("cfl must be positive")
        if self.c_threshold <= 1.0:
            raise ConfigError("c_threshold must exceed 1")
        if not (0.0 < self.dt_backoff < 1.0):
            raise ConfigError("dt_backoff must lie in (0, 1)")
        if self.dt_recovery < 1.0:
            raise ConfigError("dt_recovery must be >= 1")
        if self.scheme.lower() not in ("dirksa", "*-dirksa", "ee-ie"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.solver not in ("multigrid", "pcg", "direct"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.T_final < 0.0:
            raise ConfigError("T_final must be non-negative")
        expected_dim = 1 if self.test == "stability1d" else 2
        if self.dim != expected_dim:
            raise ConfigError(
                f"test {self.test!r} is {expected_dim}D; got dim={self.dim}")
        return self

    def phys_params(self):
        return PhysParams(gamma=self.gamma, nu=self.nu, lam=self.lam,
                          eps=self.eps, G=self.G)

    def grid(self):
        return Grid(self.dim, self.M)

    def canonical_text(self):
        lines = [f"{f.name} = {getattr(self, f.name)!r}"
                 for f in dc_fields(self)]
        return "\n".join(lines) + "\n"


_BOOL_STRINGS = {"true": True, "false": False, "1": True, "0": False,
                 "yes": True, "no": False}


def parse_config(text):
    """Parse the flat key-value run configuration format."""
    cfg = RunConfig()
    types = {f.name: type(getattr(cfg, f.name)) for f in dc_fields(cfg)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        ftype = types[key]
        try:
            if ftype is bool:
                parsed = _BOOL_STRINGS[value.lower()]
            elif ftype is int:
                parsed = int(value)
            elif ftype is float:
                parsed = float(value)
            else:
                parsed = value
        except (ValueError, KeyError) as exc:
            raise ConfigError(
                f"line {lineno}: bad value {value!r} for {key}") from exc
        setattr(cfg, key, parsed)
    return cfg.validate()


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# initial conditions

def initial_state(config):
    """Initial State for the configured test case."""
    grid = config.grid()
    if config.test == "stability1d":
        x = grid.cell_centers()
        rho = 0.1 * np.cos(2 * np.pi * x) + 1.25
        v = np.sin(np.pi * x)
        c = 0.1 * np.cos(np.pi * x)
        return state_from_primitive(grid, rho, (v,), c)
    if config.test == "order":
        return exact_state(grid, 0.0)
    X, Y = grid.meshgrid()
    if config.test in ("test1", "test2"):
        rho = 0.1 * np.cos(2 * np.pi * X) * np.cos(np.pi * Y) + 1.25
        v1 = np.sin(np.pi * X) * np.sin(np.pi * Y)
        v2 = np.sin(np.pi * X) * np.sin(2 * np.pi * Y)
        c = 0.1 * np.cos(np.pi * X) * np.cos(np.pi * Y)
        if config.test == "test2":
            c = c + 0.75
        return state_from_primitive(grid, rho, (v1, v2), c)
    if config.test == "test3":
        rng = np.random.default_rng(config.seed)
        # uniform noise with the requested standard deviation, recentred
        half_width = config.noise_std * np.sqrt(3.0)
        c = rng.uniform(-half_width, half_width, size=grid.shape)
        c -= c.mean()
        rho = np.ones(grid.shape)
        zero = np.zeros(grid.shape)
        return state_from_primitive(grid, rho, (zero, zero), c)
    raise ConfigError(f"no initial condition for test {config.test!r}")


# ---------------------------------------------------------------------------
# time-step selection

def select_dt(state, cfl, gamma):
    """Convective step dt = cfl * dx / cs."""
    cs = char_speed(state, gamma)
    return cfl * state.grid.h / cs


def adapt_cfl(max_abs_c, c_threshold, current_cfl, cfl_max,
              backoff=0.5, recovery=1.1):
    """CFL controller: (new_cfl, step_accepted)."""
    if max_abs_c >= c_threshold:
        return current_cfl * backoff, False
    return min(cfl_max, current_cfl * recovery), True


# ---------------------------------------------------------------------------
# the run loop

@dataclass
class RunResult:
    config: RunConfig
    state: object
    t: float
    diagnostics: list
    snapshot_paths: list = field(default_factory=list)
    rejections: int = 0

    def column(self, name):
        idx = DIAG_COLUMNS.index(name)
        return np.array([row[idx] for row in self.diagnostics])

    def mean_conc_iters(self):
        return float(np.mean(self.column("mg_iters_c")[1:])) \
            if len(self.diagnostics) > 1 else 0.0

    def mean_vel_iters(self):
        return float(np.mean(self.column("mg_iters_v")[1:])) \
            if len(self.diagnostics) > 1 else 0.0


class _Output:
    """Snapshot and CSV writers for one run directory."""

    def __init__(self, config):
        self.config = config
        self.dir = config.outdir
        self.count = 0
        self.paths = []
        self._csv = None
        if self.dir:
            os.makedirs(self.dir, exist_ok=True)
            self._csv = open(os.path.join(self.dir, "diagnostics.csv"),
                             "w", newline="")
            self._writer = csv.writer(self._csv)
            self._writer.writerow(DIAG_COLUMNS)

    def row(self, values):
        if self._csv is not None:
            self._writer.writerow([f"{v:.17g}" for v in values])
            self._csv.flush()

    def snapshot(self, state, t):
        if not self.dir:
            return
        from .snapshots import write_snapshot, write_sidecar
        path = os.path.join(self.dir, f"snap_{self.count:05d}.chns")
        write_snapshot(path, state, t)
        write_sidecar(path, self.config.canonical_text(), self.config.seed)
        self.paths.append(path)
        self.count += 1

    def close(self):
        if self._csv is not None:
            self._csv.close()


def _event_times(config):
    events = {config.T_final}
    if config.outdir:
        events.update(tf for tf in FIGURE_TIMES if 0.0 < tf <= config.T_final)
    if config.snapshot_interval > 0.0:
        n = int(np.floor(config.T_final / config.snapshot_interval + 1e-9))
        events.update(k * config.snapshot_interval for k in range(1, n + 1))
    return sorted(events)


def run(config, initial=None, collect=None):
    """Advance the configured problem from t=0 to T_final.

    initial overrides the test-case initial condition.  collect, when
    given, is called as collect(t, state) after every accepted step
    (plus once at t=0) for in-memory analysis.
    """
    config.validate()
    grid = config.grid()
    params = config.phys_params()
    state = initial_state(config) if initial is None else initial.copy()
    forcing = ManufacturedForcing(grid, params) if config.test == "order" else None
    stepper = ImexStepper(
        grid, params, scheme=config.scheme, solver=config.solver,
        rel_tol=config.solver_tol, max_iters=config.solver_max_iters,
        c_threshold=config.c_threshold if config.cfl_adapt else None,
        forcing=forcing)

    out = _Output(config)
    sum_rho0 = grid_sum(state.rho)
    sum_q0 = grid_sum(state.q)
    diagnostics = []

    def record(t, dt, cfl, stats):
        c = state.q / state.rho
        row = (t, dt, cfl,
               grid_sum(state.rho) - sum_rho0,
               grid_sum(state.q) - sum_q0,
               float(np.min(c)), float(np.max(c)),
               stats.char_speed if stats else char_speed(state, params.gamma),
               float(np.mean(stats.conc_iters)) if stats else 0.0,
               float(np.mean(stats.vel_iters)) if stats else 0.0,
               mixing_energy(state, params))
        diagnostics.append(row)
        out.row(row)

    try:
        t = 0.0
        cfl = config.cfl
        record(t, 0.0, cfl, None)
        out.snapshot(state, t)
        if collect is not None:
            collect(t, state)
        events = _event_times(config)
        rejections = 0
        tiny = 1e-12 * max(config.T_final, 1.0)
        while t < config.T_final - tiny:
            next_event = next(e for e in events if e > t + tiny)
            if config.dt_fixed > 0.0:
                dt = config.dt_fixed
            else:
                dt = select_dt(state, cfl, params.gamma)
            dt = min(dt, next_event - t)
            retries = 0
            while True:
                try:
                    new_state, stats = stepper.step(state, dt, t)
                except (BoundViolation, NonPositiveDensity,
                        SolverDivergence) as exc:
                    if not config.cfl_adapt:
                        raise SimulationBlowUp(t, str(exc)) from exc
                    retries += 1
                    rejections += 1
                    if retries > config.max_retries:
                        raise StepRejectedTooManyTimes(t, retries) from exc
                    cfl *= config.dt_backoff
                    dt *= config.dt_backoff
                    continue
                break
            if (not new_state.all_finite()
                    or new_state.max_abs() > config.blowup_limit):
                raise SimulationBlowUp(
                    t + dt, "non-finite or oversized fields after step")
            state = new_state
            t += dt
            if config.cfl_adapt and retries == 0:
                cfl = min(config.cfl, cfl * config.dt_recovery)
            record(t, dt, cfl, stats)
            if any(abs(t - e) <= tiny for e in events):
                out.snapshot(state, t)
            if collect is not None:
                collect(t, state)
    finally:
        out.close()
    return RunResult(config, state, t, diagnostics, out.paths, rejections)


# ---------------------------------------------------------------------------
# verification helpers

def global_error(state, reference):
    """Mean absolute nodal error over all conserved components.

    (1/M^dim) * sum_k sum_nodes |u_k - ref_k|; the averaged l1 norm used
    by the forced-solution order study.
    """
    total = 0.0
    for a, b in zip(state.components(), reference.components()):
        total += float(np.sum(np.abs(a - b)))
    return total / state.grid.ncells


def order_test(scheme, Ms, cfl=0.4, T=0.01, solver="multigrid",
               solver_tol=1e-8):
    """Run the forced-solution convergence study; returns {M: e_M}.

    Parameters follow the order-test setup: nu=1, lam=0.1, eps=1e-4,
    G=-10, gamma=5/3.
    """
    errors = {}
    for M in Ms:
        config = RunConfig(test="order", dim=2, M=M, T_final=T,
                           nu=1.0, lam=0.1, eps=1e-4, G=-10.0,
                           scheme=scheme, cfl=cfl, cfl_adapt=False,
                           solver=solver, solver_tol=solver_tol)
        result = run(config)
        ref = exact_state(config.grid(), result.t)
        errors[M] = global_error(result.state, ref)
    return errors


def convergence_ratios(errors):
    Ms = sorted(errors)
    return {M: errors[M] / errors[2 * M] for M in Ms if 2 * M in errors}


def explicit_euler_run(state, params, dt, t_end, forcing=None,
                       blowup_limit=1e6, max_steps=None):
    """Fully explicit Euler integration U += dt * L(U).

    Used by the stability study; returns (state, t, blew_up).  The loop
    stops at the first non-finite or oversized field.
    """
    t = 0.0
    steps = 0
    while t < t_end - 1e-15:
        try:
            parts = rhs_full(state, params, t=t, forcing=forcing)
        except NonPositiveDensity:
            return state, t, True
        total = parts.total()
        comps = [f + dt * df for f, df in zip(state.components(), total)]
        nm = len(state.m)
        state = type(state)(state.grid, comps[0], tuple(comps[1:1 + nm]),
                            comps[1 + nm])
        t += dt
        steps += 1
        if not state.all_finite() or state.max_abs() > blowup_limit:
            return state, t, True
        if max_steps is not None and steps >= max_steps:
            break
    return state, t, False
