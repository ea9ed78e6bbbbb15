"""Linearized spinodal-decomposition analysis.

Perturbing a uniform concentration c0 inside the spinodal interval
(|c0| < 1/sqrt(3), where psi''(c0) < 0) and linearizing the pure
Cahn-Hilliard dynamics gives independently evolving cosine modes

    u_k(x, t) = cos(k1 pi x) cos(k2 pi y) exp(sigma(k) t),
    sigma(k) = -(psi''(c0) K + eps K^2),   K = (k1^2 + k2^2) pi^2.

Modes with sigma > 0 grow until nonlinearity saturates them; the
fastest-growing admissible integer mode dominates the early pattern.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn

from .errors import AmplitudeTooLarge, OutsideSpinodal
from .operators import psi_double_prime

SPINODAL_EDGE = 1.0 / np.sqrt(3.0)


def growth_exponent(k, c0, eps):
    """sigma for an integer mode tuple k (1 or 2 wavenumbers)."""
    K = float(sum(ki**2 for ki in k)) * np.pi**2
    d2 = float(psi_double_prime(c0))
    return -(d2 * K + eps * K**2)


@dataclass
class SpinodalPrediction:
    c0: float
    eps: float
    dim: int
    modes: list              # [(k, sigma)] for unstable modes, sigma desc
    dominant: tuple          # wavenumbers of the fastest-growing mode
    dominant_sigma: float
    has_unstable: bool

    @property
    def dominant_k_squared(self):
        return sum(ki**2 for ki in self.dominant) if self.dominant else None


def predict_spinodal_mode(c0, eps, dim=2):
    """Enumerate unstable modes and the dominant one.

    Raises OutsideSpinodal when psi''(c0) >= 0.  Inside the spinodal
    region but with every mode damped (eps too large), returns an empty
    prediction with has_unstable False.
    """
    d2 = float(psi_double_prime(c0))
    if d2 >= 0.0:
        raise OutsideSpinodal(
            f"psi''({c0}) = {d2:.4f} >= 0; no linear instability")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    # sigma > 0 iff 0 < k1^2+k2^2 < -psi''/(eps pi^2)
    ksq_cut = -d2 / (eps * np.pi**2)
    kmax = int(np.floor(np.sqrt(ksq_cut))) + 1
    modes = []
    if dim == 1:
        candidates = [(k,) for k in range(1, kmax + 1)]
    else:
        candidates = [(k1, k2)
                      for k1 in range(kmax + 1)
                      for k2 in range(kmax + 1)
                      if (k1, k2) != (0, 0)]
    for k in candidates:
        s = growth_exponent(k, c0, eps)
        if s > 0.0:
            modes.append((k, s))
    modes.sort(key=lambda ks: (-ks[1], ks[0]))
    if not modes:
        return SpinodalPrediction(c0, eps, dim, [], None, 0.0, False)
    dom, dom_s = modes[0]
    return SpinodalPrediction(c0, eps, dim, modes, dom, dom_s, True)


def cosine_spectrum(c, c0=0.0):
    """Orthonormal cosine-transform coefficients of c - c0."""
    return dctn(np.asarray(c, dtype=float) - c0, type=2, norm="ortho")


def dominant_mode(c, c0=0.0):
    """Wavenumbers of the largest cosine coefficient (mean mode excluded)."""
    spec = np.abs(cosine_spectrum(c, c0))
    spec[(0,) * spec.ndim] = 0.0
    flat = int(np.argmax(spec))
    return np.unravel_index(flat, spec.shape)


def linearized_growth_check(snapshots, c0, amp_limit=1e-4, floor_factor=1e3):
    """Fit per-mode exponential rates from concentration snapshots.

    snapshots is a sequence of (t, c_field) with at least two entries;
    returns {mode: rate} for modes whose coefficients sit above the
    noise floor at both ends of the window.  Raises AmplitudeTooLarge
    outside the linear regime.
    """
    if len(snapshots) < 2:
        raise ValueError("need at least two snapshots")
    t0, c_first = snapshots[0]
    t1, c_last = snapshots[-1]
    for t, c in (snapshots[0], snapshots[-1]):
        amp = float(np.max(np.abs(np.asarray(c) - c0)))
        if amp >= amp_limit:
            raise AmplitudeTooLarge(
                f"perturbation amplitude {amp:.3e} at t = {t} exceeds "
                f"{amp_limit:.1e}")
    s0 = cosine_spectrum(c_first, c0)
    s1 = cosine_spectrum(c_last, c0)
    eps_floor = floor_factor * np.finfo(float).eps * max(
        1.0, float(np.max(np.abs(s0))), float(np.max(np.abs(s1))))
    rates = {}
    it = np.ndindex(s0.shape)
    for idx in it:
        if all(i == 0 for i in idx):
            continue
        a0, a1 = abs(s0[idx]), abs(s1[idx])
        if a0 > eps_floor and a1 > eps_floor:
            rates[idx] = float(np.log(a1 / a0) / (t1 - t0))
    return rates
