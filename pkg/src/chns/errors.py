"""Exception types shared across the solver."""


class ChnsError(Exception):
    """Base class for all solver errors."""


class NonPositiveDensity(ChnsError):
    """Density hit zero or went negative somewhere on the grid.

    Stage solves require rho > 0; a violation is detected and reported,
    never silently clipped.
    """

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"non-positive density {value!r} at flat index {index}")


class UnknownScheme(ChnsError):
    pass


class ZeroDiagonal(ChnsError):
    """A smoother was asked to relax a system with a zero diagonal entry."""


class SolverDivergence(ChnsError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, system, residual, iterations):
        self.system = system
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{system} solve stalled at relative residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class NotApplicable(ChnsError):
    """Solver/system combination that is not supported (e.g. PCG on the velocity block)."""


class BoundViolation(ChnsError):
    """max|c| exceeded the configured threshold; signals the time-step controller."""

    def __init__(self, max_abs_c, threshold):
        self.max_abs_c = max_abs_c
        self.threshold = threshold
        super().__init__(f"max|c| = {max_abs_c:.4f} exceeded threshold {threshold}")


class StepRejectedTooManyTimes(ChnsError):
    def __init__(self, t, retries):
        self.t = t
        self.retries = retries
        super().__init__(f"step at t = {t:.6e} rejected {retries} times")


class SimulationBlowUp(ChnsError):
    """Fields became non-finite or exceeded the blow-up magnitude limit."""

    def __init__(self, t, reason):
        self.t = t
        self.reason = reason
        super().__init__(f"blow-up detected at t = {t:.6e}: {reason}")


class OutsideSpinodal(ChnsError):
    """Base concentration is linearly stable (psi''(c0) >= 0)."""


class AmplitudeTooLarge(ChnsError):
    """Perturbation left the linear regime; growth-rate fit would be meaningless."""


class ConfigError(ChnsError):
    pass
