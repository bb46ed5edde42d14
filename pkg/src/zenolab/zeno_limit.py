"""Zeno product formula ``V_N(t) = [P exp(-iHt/N) P]^N`` and its limit.

For bounded ``H`` the limit is ``U_Z(t) = P exp(-i PHP t)``.  The finite-N
product is built by explicit repeated multiplication: ``P U P`` is not normal,
and the finite-N object is what gets measured against the limit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .linops import (
    SpectralDecomposition,
    check_hermitian,
    check_projector,
    dagger,
    max_abs,
    operator_norm,
    propagator,
    psd_sqrt,
    spectral,
)
from .tables import write_csv

# beyond this many factors the running product is re-sandwiched with P
COMPENSATE_ABOVE = 100_000
COMPENSATE_EVERY = 1024


def _checked(H, P):
    """Return ``(decomposition, projector)`` after symmetry and shape checks."""
    dec = spectral(H)
    p = check_projector(P)
    if p.shape[0] != dec.source_dim:
        raise DimensionMismatch(f"H has dim {dec.source_dim}, P has dim {p.shape[0]}")
    return dec, p


def _matrix(H) -> np.ndarray:
    if isinstance(H, SpectralDecomposition):
        r = H.reconstruct()
        return (r + dagger(r)) / 2
    return check_hermitian(H)


def _positive_int(N) -> int:
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")
    return int(N)


def _power_by_products(step: np.ndarray, n: int, p: np.ndarray) -> np.ndarray:
    out = step.copy()
    compensate = n > COMPENSATE_ABOVE
    for k in range(1, n):
        out = step @ out
        if compensate and k % COMPENSATE_EVERY == 0:
            out = p @ out @ p
    return out


def zeno_product(H, P, N: int, t: float) -> np.ndarray:
    dec, p = _checked(H, P)
    n = _positive_int(N)
    step = p @ dec.propagator(t / n) @ p
    return _power_by_products(step, n, p)


def zeno_product_state(H, P, N: int, t: float, psi) -> np.ndarray:
    """``V_N(t) psi`` by ``N`` matrix-vector steps (no N-fold matrix product)."""
    dec, p = _checked(H, P)
    n = _positive_int(N)
    step = p @ dec.propagator(t / n) @ p
    v = np.asarray(psi, dtype=np.complex128)
    for _ in range(n):
        v = step @ v
    return v


def zeno_hamiltonian(H, P) -> np.ndarray:
    """``PHP``."""
    h = check_hermitian(H)
    p = check_projector(P)
    if h.shape != p.shape:
        raise DimensionMismatch(f"H is {h.shape}, P is {p.shape}")
    hz = p @ h @ p
    return (hz + dagger(hz)) / 2


def zeno_unitary(H, P, t: float) -> np.ndarray:
    """``U_Z(t) = P exp(-i PHP t)``."""
    p = check_projector(P)
    return p @ propagator(zeno_hamiltonian(H, p), t)


def zeno_hamiltonian_form(H, P) -> np.ndarray:
    """``(H^{1/2} P)^dagger (H^{1/2} P)`` for positive semidefinite ``H``.

    On finite matrices this coincides with ``PHP``; the form expression is the
    one that stays meaningful when ``H`` is unbounded.
    """
    root = psd_sqrt(H)
    p = check_projector(P)
    if root.shape != p.shape:
        raise DimensionMismatch(f"H is {root.shape}, P is {p.shape}")
    a = root @ p
    hz = dagger(a) @ a
    return (hz + dagger(hz)) / 2


@dataclass(frozen=True)
class ZenoProductResult:
    N: int
    V_N: np.ndarray
    U_Z: np.ndarray
    defect: float
    defect_opnorm: float
    survival: float


def convergence_profile(
    H,
    P,
    t: float,
    N_list: Sequence[int],
    rho0: Optional[np.ndarray] = None,
    workers: Optional[int] = None,
) -> list[ZenoProductResult]:
    """``V_N(t)`` against ``U_Z(t)`` for each ``N``, sharing one diagonalization of ``H``.

    ``survival`` is ``Tr[V_N rho0 V_N^dagger]`` with ``rho0`` defaulting to
    the normalized projector ``P / Tr P``.
    """
    if len(N_list) == 0:
        raise ValidationError("N_list must be non-empty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValidationError("N_list must be strictly ascending")
    dec, p = _checked(H, P)
    uz = zeno_unitary(_matrix(H), p, t)
    if rho0 is None:
        rank = np.trace(p).real
        rho0 = p / rank if rank > 0.5 else p

    def one(n):
        v = zeno_product(dec, p, n, t)
        diff = v - uz
        surv = float(np.trace(v @ rho0 @ dagger(v)).real)
        return ZenoProductResult(int(n), v, uz, max_abs(diff), operator_norm(diff), surv)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, N_list))
    return [one(n) for n in N_list]


def profile_to_csv(results: Sequence[ZenoProductResult], path):
    rows = [(r.N, r.defect, r.defect_opnorm, r.survival) for r in results]
    return write_csv(path, ["N", "defect_max", "defect_opnorm", "survival"], rows)


def semigroup_defect(H, P, t: float, s: float) -> float:
    """``max|(P U(t) P)(P U(s) P) - P U(t+s) P|``."""
    dec, p = _checked(H, P)
    a = p @ dec.propagator(t) @ p
    b = p @ dec.propagator(s) @ p
    c = p @ dec.propagator(t + s) @ p
    return max_abs(a @ b - c)


def time_averaged_defect(
    H, P, N: int, t_max: float, psi0, samples: int = 33
) -> float:
    """Trapezoid estimate of ``int_0^t_max |V_N(t) psi0 - U_Z(t) psi0|^2 dt``."""
    if t_max < 0:
        raise ValidationError("t_max must be non-negative")
    if t_max == 0:
        return 0.0
    dec, p = _checked(H, P)
    zdec = spectral(zeno_hamiltonian(_matrix(H), p))
    psi0 = np.asarray(psi0, dtype=np.complex128)
    ts = np.linspace(0.0, t_max, samples)
    vals = []
    for t in ts:
        v = zeno_product_state(dec, p, N, t, psi0) if t > 0 else p @ psi0
        z = p @ zdec.evolve(psi0, t)
        vals.append(float(np.vdot(v - z, v - z).real))
    return float(np.trapezoid(vals, ts))
