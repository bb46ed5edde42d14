"""Single-state analytics: survival, Zeno time, effective decay rate, tau*.

The survival amplitude of ``psi`` is a weighted sum of phases over the
spectrum of ``H``::

    A(t) = sum_k |<v_k|psi>|^2 exp(-i lambda_k t)

so after one diagonalization every quantity in this module is cheap to
evaluate on long time grids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidBracket,
    ValidationError,
    VanishingSurvival,
    WindowTooNarrow,
)
from .linops import (
    check_hermitian,
    check_projector,
    check_state,
    dagger,
    spectral,
)
from .tables import write_csv

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-14
UNDERFLOW = 1e-300
MAX_BISECTIONS = 200
MIN_FIT_SAMPLES = 8


def _weights(H, psi):
    dec = spectral(H)
    psi = check_state(psi)
    if psi.size != dec.source_dim:
        raise DimensionMismatch(f"state has dim {psi.size}, operator {dec.source_dim}")
    c = dagger(dec.eigenvectors) @ psi
    return dec.eigenvalues, np.abs(c) ** 2


def survival_amplitude(H, psi, t):
    """``<psi| exp(-iHt) |psi>``; ``t`` may be a scalar or an array."""
    lam, w = _weights(H, psi)
    t_arr = np.asarray(t, dtype=float)
    amp = np.exp(-1j * np.multiply.outer(t_arr, lam)) @ w
    return complex(amp) if amp.ndim == 0 else amp


def survival_probability(H, psi, t):
    a = survival_amplitude(H, psi, t)
    return float(abs(a) ** 2) if np.ndim(a) == 0 else np.abs(a) ** 2


def zeno_time(H, psi) -> float:
    """Inverse square root of the energy variance; ``inf`` for eigenstates."""
    m = check_hermitian(H)
    psi = check_state(psi)
    if psi.size != m.shape[0]:
        raise DimensionMismatch(f"state has dim {psi.size}, operator {m.shape[0]}")
    h_psi = m @ psi
    mean = np.vdot(psi, h_psi).real
    var = np.vdot(h_psi, h_psi).real - mean**2
    if var <= VARIANCE_FLOOR:
        return math.inf
    return 1.0 / math.sqrt(var)


def split_hamiltonian(H, P):
    """Block split ``H = (PHP + QHQ) + (PHQ + QHP)`` with ``Q = 1 - P``."""
    h = check_hermitian(H)
    p = check_projector(P)
    if h.shape != p.shape:
        raise DimensionMismatch(f"H is {h.shape}, P is {p.shape}")
    q = np.eye(h.shape[0]) - p
    h0 = p @ h @ p + q @ h @ q
    # define Hint as the exact remainder so that H0 + Hint == H bit for bit
    return h0, h - h0


def survival_after_measurements(H, psi, N: int, t: float) -> float:
    """``p(t/N)^N``: survival after ``N`` projective checks in time ``t``."""
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")
    a = survival_amplitude(H, psi, t / N)
    return float(abs(a) ** (2 * int(N)))


def effective_decay_rate(H, psi, tau: float) -> float:
    """``-log p(tau) / tau``."""
    if tau <= 0:
        raise ValidationError(f"tau must be positive, got {tau!r}")
    p = survival_probability(H, psi, tau)
    if p <= UNDERFLOW:
        raise VanishingSurvival(f"p({tau!r}) = {p!r} underflows")
    return _rate(p, tau)


def _rate(p, tau):
    # p can exceed 1 by roundoff; the rate is then a harmless -0
    return -math.log(min(p, 1.0)) / tau if p > 0 else math.inf


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    probabilities: np.ndarray
    hamiltonian_dim: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if t.shape != p.shape or t.ndim != 1:
            raise ValidationError("times and probabilities must be 1-d and of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValidationError("probabilities outside [0, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "probabilities", p)

    def to_csv(self, path):
        return write_csv(path, ["t", "p"], zip(self.times, self.probabilities))


@dataclass(frozen=True)
class DecayRateProfile:
    """``gamma_eff`` sampled on ascending ``taus``; ``inf`` marks ``p(tau) == 0``."""

    taus: np.ndarray
    gamma_eff: np.ndarray
    gamma_asymptotic: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.taus, dtype=float)
        g = np.asarray(self.gamma_eff, dtype=float)
        if t.shape != g.shape or t.ndim != 1:
            raise ValidationError("taus and gamma_eff must be 1-d and of equal length")
        if np.any(t <= 0):
            raise ValidationError("taus must be positive")
        object.__setattr__(self, "taus", t)
        object.__setattr__(self, "gamma_eff", g)

    def to_csv(self, path):
        return write_csv(path, ["tau", "gamma_eff"], zip(self.taus, self.gamma_eff))


def survival_curve(H, psi, times) -> SurvivalCurve:
    dec = spectral(H)
    p = np.clip(np.atleast_1d(survival_probability(dec, psi, np.asarray(times, float))), 0.0, 1.0)
    return SurvivalCurve(np.asarray(times, float), p, dec.source_dim)


def decay_rate_profile(H, psi, taus, gamma_asymptotic=None) -> DecayRateProfile:
    dec = spectral(H)
    taus = np.asarray(taus, dtype=float)
    p = np.atleast_1d(survival_probability(dec, psi, taus))
    g = np.array([_rate(pi, ti) if pi > UNDERFLOW else math.inf for pi, ti in zip(p, taus)])
    return DecayRateProfile(taus, g, gamma_asymptotic)


def estimate_asymptotic_rate(curve: SurvivalCurve, fit_window: Sequence[float]):
    """Least-squares line through ``log p`` on ``[t_lo, t_hi]``.

    Returns ``(gamma, Z)`` for the model ``p ~ Z exp(-gamma t)``.  The window
    is always supplied by the caller; no attempt is made to detect where the
    exponential regime starts.
    """
    t_lo, t_hi = fit_window
    if not t_lo < t_hi:
        raise ValidationError(f"empty fit window {fit_window!r}")
    if t_lo < curve.times[0] or t_hi > curve.times[-1]:
        raise ValidationError(f"fit window {fit_window!r} outside the curve domain")
    sel = (curve.times >= t_lo) & (curve.times <= t_hi)
    n = int(sel.sum())
    if n < MIN_FIT_SAMPLES:
        raise WindowTooNarrow(f"{n} samples in window, need at least {MIN_FIT_SAMPLES}")
    p = curve.probabilities[sel]
    if np.any(p <= 0):
        raise ValidationError("survival probability vanishes inside the fit window")
    slope, intercept = np.polyfit(curve.times[sel], np.log(p), 1)
    return float(-slope), float(math.exp(intercept))


def find_transition_time(H, psi, gamma: float, bracket: Sequence[float]) -> Optional[float]:
    """Interval ``tau*`` at which ``gamma_eff(tau*) == gamma``, or ``None``.

    Equivalently the crossing of ``p(tau)`` with ``exp(-gamma tau)``.
    """
    dec = spectral(H)
    psi = check_state(psi)
    return transition_time(lambda tau: survival_probability(dec, psi, tau), gamma, bracket)


def transition_time(
    survival: Callable[[float], float], gamma: float, bracket: Sequence[float]
) -> Optional[float]:
    """Bisection for ``-log p(tau)/tau = gamma`` on a user-given bracket.

    Works from any survival function so that closed-form models can be fed
    directly.  Bisection rather than Newton: ``gamma_eff`` jumps to ``+inf``
    at zeros of ``p``.  Returns ``None`` when the bracket holds no sign change
    or the only sign change is such a jump.
    """
    if not gamma > 0:
        raise InvalidBracket(f"gamma must be positive, got {gamma!r}")
    lo, hi = (float(b) for b in bracket)
    if not (0 < lo < hi):
        raise InvalidBracket(f"bracket must satisfy 0 < lo < hi, got {bracket!r}")

    def excess(tau):
        p = survival(tau)
        g = _rate(p, tau) if p > UNDERFLOW else math.inf
        return g - gamma

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo < 0) == (f_hi < 0):
        return None
    target = 1e-8 * gamma
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if abs(f_mid) <= target:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    logger.debug("bisection converged on a discontinuity near tau=%g", lo)
    return None
