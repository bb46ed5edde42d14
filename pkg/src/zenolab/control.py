"""Unitary routes to Zeno subspaces: bang-bang kicks and strong continuous coupling.

Both routes generate the same block-diagonal generator ``sum_n P_n H P_n``,
where ``{P_n}`` are the spectral projections of the kick ``U_kick`` or of the
coupling ``H_c``.  The hybrid pulse train ``H(tau, K)`` interpolates between
them: idle periods ``tau`` under ``H`` alternate with rectangular pulses of
length ``tau0 / K`` under ``H + K H_c``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InvalidPartition,
    NonCommensurateTime,
    ResonantPulseArea,
    ValidationError,
)
from .linops import (
    check_hermitian,
    check_unitary,
    dagger,
    hermitian_eig,
    max_abs,
    propagator,
)
from .subspaces import ZenoPartition, offdiagonal_block_norm
from .tables import write_csv

GROUPING_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-9
RESONANCE_TOL = 1e-6


def _wrap_phase(x):
    """Map angles into ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(y <= -math.pi, math.pi, y)


def _cluster_circular(phases: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(phases, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and phases[i] - phases[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    # the first and last clusters may touch across the branch cut at +-pi
    if len(groups) > 1:
        gap = phases[groups[0][0]] + 2 * math.pi - phases[groups[-1][-1]]
        if gap <= tol:
            groups[0] = groups.pop() + groups[0]
    return groups


def _circular_mean(phases: np.ndarray) -> float:
    return float(_wrap_phase(np.angle(np.mean(np.exp(1j * phases)))))


@dataclass(frozen=True)
class KickSpec:
    """Kick unitary with its spectral resolution ``U_kick = sum_n exp(-i lam_n) P_n``."""

    U_kick: np.ndarray
    eigenphase_groups: tuple
    grouping_tol: float = GROUPING_TOL

    def __post_init__(self):
        u = check_unitary(self.U_kick)
        phases = [float(lam) for lam, _ in self.eigenphase_groups]
        part = ZenoPartition(tuple(p for _, p in self.eigenphase_groups))
        if part.dim != u.shape[0]:
            raise DimensionMismatch(f"kick has dim {u.shape[0]}, projectors {part.dim}")
        rebuilt = sum(np.exp(-1j * lam) * p for lam, p in zip(phases, part))
        d = max_abs(rebuilt - u)
        if d > RECONSTRUCTION_TOL:
            raise InvalidPartition(f"eigenphase groups reconstruct U_kick only to {d:.3e}")
        for i in range(len(phases)):
            for j in range(i + 1, len(phases)):
                sep = abs(_wrap_phase(phases[i] - phases[j]))
                if sep <= self.grouping_tol:
                    raise InvalidPartition(f"groups {i} and {j} share eigenphase {phases[i]:.6g}")
        object.__setattr__(self, "_partition", part)

    @property
    def partition(self) -> ZenoPartition:
        return self._partition

    @property
    def phases(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.eigenphase_groups])

    @classmethod
    def from_unitary(cls, U, grouping_tol: float = GROUPING_TOL) -> "KickSpec":
        u = check_unitary(U)
        # complex Schur form of a normal matrix is diagonal with unitary Z
        t, z = scipy.linalg.schur(u, output="complex")
        phases = _wrap_phase(-np.angle(np.diag(t)))
        groups = _cluster_circular(phases, grouping_tol)
        pairs = []
        for idx in groups:
            v = z[:, idx]
            pairs.append((_circular_mean(phases[idx]), v @ dagger(v)))
        return cls(u, tuple(pairs), grouping_tol)

    @classmethod
    def from_groups(cls, phases: Sequence[float], projectors: Sequence, grouping_tol=GROUPING_TOL):
        projectors = [np.asarray(p, dtype=np.complex128) for p in projectors]
        u = sum(np.exp(-1j * lam) * p for lam, p in zip(phases, projectors))
        return cls(u, tuple(zip((float(x) for x in _wrap_phase(phases)), projectors)), grouping_tol)

    @classmethod
    def from_coupling(cls, coupling: "CouplingSpec", tau0: float) -> "KickSpec":
        """``U_kick = exp(-i tau0 H_c)``, the zero-width limit of a pulse of area ``tau0``."""
        check_pulse_area(coupling, tau0)
        phases = [tau0 * eta for eta, _ in coupling.eigenvalue_groups]
        return cls.from_groups(phases, [p for _, p in coupling.eigenvalue_groups])


@dataclass(frozen=True)
class CouplingSpec:
    """Coupling Hamiltonian with its eigenprojections ``H_c = sum_n eta_n P_n``."""

    H_c: np.ndarray
    eigenvalue_groups: tuple
    grouping_tol: float = GROUPING_TOL

    def __post_init__(self):
        h = check_hermitian(self.H_c)
        part = ZenoPartition(tuple(p for _, p in self.eigenvalue_groups))
        if part.dim != h.shape[0]:
            raise DimensionMismatch(f"H_c has dim {h.shape[0]}, projectors {part.dim}")
        rebuilt = sum(eta * p for eta, p in zip(self.etas, part))
        d = max_abs(rebuilt - h)
        if d > RECONSTRUCTION_TOL:
            raise InvalidPartition(f"eigenvalue groups reconstruct H_c only to {d:.3e}")
        object.__setattr__(self, "_partition", part)

    @property
    def partition(self) -> ZenoPartition:
        return self._partition

    @property
    def etas(self) -> np.ndarray:
        return np.array([eta for eta, _ in self.eigenvalue_groups], dtype=float)

    @classmethod
    def from_hamiltonian(cls, H_c, grouping_tol: float = GROUPING_TOL) -> "CouplingSpec":
        dec = hermitian_eig(H_c)
        lam = dec.eigenvalues
        groups: list[list[int]] = []
        for i in range(lam.size):
            if groups and lam[i] - lam[groups[-1][-1]] <= grouping_tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        pairs = []
        for idx in groups:
            v = dec.eigenvectors[:, idx]
            pairs.append((float(np.mean(lam[idx])), v @ dagger(v)))
        return cls(check_hermitian(H_c), tuple(pairs), grouping_tol)


def _rect(x):
    # half-open [-1/2, 1/2) so the integer translates tile the line exactly
    x = np.asarray(x, dtype=float)
    return ((x >= -0.5) & (x < 0.5)).astype(float)


PULSE_SHAPES = {"rectangular": _rect}


@dataclass(frozen=True)
class PulseTrain:
    tau: float
    tau0: float
    K: float
    shape: str = "rectangular"

    def __post_init__(self):
        if self.tau < 0:
            raise ValidationError("idle period tau must be non-negative")
        if not self.tau0 > 0:
            raise ValidationError("pulse area tau0 must be positive")
        if not self.K > 0:
            raise ValidationError("coupling strength K must be positive")
        if self.shape not in PULSE_SHAPES:
            raise ValidationError(f"unsupported pulse shape {self.shape!r}")

    @property
    def pulse_length(self) -> float:
        return self.tau0 / self.K

    @property
    def period(self) -> float:
        return self.tau + self.pulse_length

    def g(self, x):
        return PULSE_SHAPES[self.shape](x)

    def partition_of_unity_defect(self, samples: int = 1001) -> float:
        """``max |sum_n g(x - n) - 1|`` on a grid over ``[-2, 2]``."""
        x = np.linspace(-2.0, 2.0, samples)
        total = sum(self.g(x - n) for n in range(-4, 5))
        return float(np.max(np.abs(total - 1.0)))

    def periods_in(self, t: float) -> int:
        n = t / self.period
        k = round(n)
        if abs(n - k) > 1e-9 or k < 0:
            raise NonCommensurateTime(
                f"t = {t!r} is {n!r} periods of length {self.period!r}, not a whole number"
            )
        return int(k)


def check_pulse_area(coupling: CouplingSpec, tau0: float) -> None:
    """Reject pulse areas at which two coupling eigenspaces acquire equal phase.

    The phase imprinted on sector ``n`` by one pulse is ``tau0 * eta_n``; when
    ``tau0 (eta_n - eta_m)`` is a nonzero multiple of ``2 pi`` the kick no
    longer separates the two sectors.
    """
    etas = coupling.etas
    for i in range(etas.size):
        for j in range(i + 1, etas.size):
            d = tau0 * (etas[i] - etas[j])
            if abs(d - 2 * math.pi * round(d / (2 * math.pi))) <= RESONANCE_TOL:
                raise ResonantPulseArea(
                    f"tau0 = {tau0!r} is resonant: tau0 (eta_{i} - eta_{j}) = {d:.9g}"
                )


def _same(H, dim):
    h = check_hermitian(H)
    if h.shape[0] != dim:
        raise DimensionMismatch(f"H has dim {h.shape[0]}, control has dim {dim}")
    return h


def _power(a: np.ndarray, n: int) -> np.ndarray:
    if int(n) != n or n < 1:
        raise ValidationError(f"N must be a positive integer, got {n!r}")
    return np.linalg.matrix_power(a, int(n))


def kicked_evolution(H, kick: KickSpec, N: int, t: float) -> np.ndarray:
    """``[U_kick U(t/N)]^N``."""
    h = _same(H, kick.partition.dim)
    return _power(kick.U_kick @ propagator(h, t / N), N)


def kick_frame_limit(H, kick: KickSpec, N: int, t: float) -> np.ndarray:
    """``(U_kick^dagger)^N [U_kick U(t/N)]^N``, tending to ``exp(-i H_Z t)``."""
    # (U_kick^dagger)^N is diagonal in the kick eigenbasis; build it from the phases
    frame = sum(np.exp(1j * N * lam) * p for lam, p in kick.eigenphase_groups)
    return frame @ kicked_evolution(H, kick, N, t)


def centralizer_project(X, part: ZenoPartition) -> np.ndarray:
    """``sum_n P_n X P_n``."""
    x = np.asarray(X, dtype=np.complex128)
    if x.shape != (part.dim, part.dim):
        raise DimensionMismatch(f"X is {x.shape}, partition has dim {part.dim}")
    return sum(p @ x @ p for p in part)


def kick_zeno_hamiltonian(H, kick: KickSpec) -> np.ndarray:
    h = _same(H, kick.partition.dim)
    hz = centralizer_project(h, kick.partition)
    return (hz + dagger(hz)) / 2


def coupling_zeno_hamiltonian(H, coupling: CouplingSpec) -> np.ndarray:
    h = _same(H, coupling.partition.dim)
    hz = centralizer_project(h, coupling.partition)
    return (hz + dagger(hz)) / 2


def continuous_evolution(H, coupling: CouplingSpec, K: float, t: float) -> np.ndarray:
    """``exp(-i (H + K H_c) t)``."""
    h = _same(H, coupling.partition.dim)
    return propagator(h + K * coupling.H_c, t)


def coupling_frame(coupling: CouplingSpec, area: float) -> np.ndarray:
    """``exp(+i area H_c)`` assembled from the eigenprojections."""
    return sum(np.exp(1j * area * eta) * p for eta, p in coupling.eigenvalue_groups)


def coupling_frame_limit(H, coupling: CouplingSpec, K: float, t: float) -> np.ndarray:
    """``exp(i K H_c t) exp(-i (H + K H_c) t)``, tending to ``exp(-i H_Z t)``."""
    return coupling_frame(coupling, K * t) @ continuous_evolution(H, coupling, K, t)


def hybrid_evolution(H, coupling: CouplingSpec, pulses: PulseTrain, t: float) -> np.ndarray:
    """Piecewise-constant propagation under ``H(tau, K)`` over a whole number of periods.

    Each period is an idle stretch ``exp(-i H tau)`` followed by a pulse
    ``exp(-i (H + K H_c) tau0 / K)``.
    """
    h = _same(H, coupling.partition.dim)
    n = pulses.periods_in(t)
    if n == 0:
        return np.eye(h.shape[0], dtype=np.complex128)
    pulse = propagator(h + pulses.K * coupling.H_c, pulses.pulse_length)
    if pulses.tau == 0:
        step = pulse
    else:
        step = pulse @ propagator(h, pulses.tau)
    return np.linalg.matrix_power(step, n)


def hybrid_frame_limit(H, coupling: CouplingSpec, pulses: PulseTrain, t: float) -> np.ndarray:
    """Hybrid evolution with the accumulated pulse phase ``exp(-i n tau0 H_c)`` removed."""
    n = pulses.periods_in(t)
    return coupling_frame(coupling, n * pulses.tau0) @ hybrid_evolution(H, coupling, pulses, t)


@dataclass(frozen=True)
class InterchangeRow:
    """One ``(K, tau)`` cell of the limit-interchange table.

    ``*_KT`` is the pulsed route (``K -> inf`` taken exactly: zero-width kicks
    ``exp(-i tau0 H_c)`` every ``tau``), ``*_TK`` the continuous route
    (``tau -> 0`` taken exactly: ``H + K H_c``).  ``defect_vs_HZ`` belongs to
    the genuine hybrid at finite ``(K, tau)``, propagated over the whole
    number of periods closest to ``t`` (elapsed time ``t_hybrid``).
    """

    K: float
    tau: float
    offdiag_KT: float
    defect_KT: float
    offdiag_TK: float
    defect_TK: float
    offdiag_hybrid: float
    defect_vs_HZ: float
    t_hybrid: float


def limit_interchange_report(
    H,
    coupling: CouplingSpec,
    t: float,
    K_list: Sequence[float],
    tau_list: Sequence[float],
    tau0: float = 1.0,
    workers: Optional[int] = None,
) -> list[InterchangeRow]:
    """Frame-conjugated evolutions on a ``(K, tau)`` grid, rows sorted by ``(K, tau)`` as given."""
    if not K_list or not tau_list:
        raise ValidationError("K_list and tau_list must be non-empty")
    h = _same(H, coupling.partition.dim)
    check_pulse_area(coupling, tau0)
    part = coupling.partition
    hz = coupling_zeno_hamiltonian(h, coupling)
    kick = KickSpec.from_coupling(coupling, tau0)

    def pulsed(tau):
        n = t / tau
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise NonCommensurateTime(f"t = {t!r} is not a whole number of intervals tau = {tau!r}")
        w = kick_frame_limit(h, kick, int(round(n)), t)
        return offdiagonal_block_norm(w, part), max_abs(w - propagator(hz, t))

    def continuous(K):
        w = coupling_frame_limit(h, coupling, K, t)
        return offdiagonal_block_norm(w, part), max_abs(w - propagator(hz, t))

    def cell(K, tau, kt, tk):
        pulses = PulseTrain(tau=tau, tau0=tau0, K=K)
        n = max(1, round(t / pulses.period))
        th = n * pulses.period
        w = hybrid_frame_limit(h, coupling, pulses, th)
        return InterchangeRow(
            float(K), float(tau), kt[0], kt[1], tk[0], tk[1],
            offdiagonal_block_norm(w, part), max_abs(w - propagator(hz, th)), th,
        )

    kt = {tau: pulsed(tau) for tau in tau_list}
    tk = {K: continuous(K) for K in K_list}
    grid = [(K, tau) for K in K_list for tau in tau_list]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda kt_: cell(kt_[0], kt_[1], kt[kt_[1]], tk[kt_[0]]), grid))
    return [cell(K, tau, kt[tau], tk[K]) for K, tau in grid]


def interchange_to_csv(rows: Sequence[InterchangeRow], path):
    header = ["K", "tau", "offdiag_norm_order_KT", "offdiag_norm_order_TK", "defect_vs_HZ"]
    return write_csv(
        path, header, [(r.K, r.tau, r.offdiag_KT, r.offdiag_TK, r.defect_vs_HZ) for r in rows]
    )


def route_sequences(rows: Sequence[InterchangeRow]):
    """Defects along each order: pulsed route vs ``tau``, continuous route vs ``K``.

    Returns ``(taus, defects_KT, Ks, defects_TK)`` ordered towards the limit
    (``tau`` descending, ``K`` ascending).
    """
    kt = sorted({(r.tau, r.defect_KT) for r in rows}, key=lambda x: -x[0])
    tk = sorted({(r.K, r.defect_TK) for r in rows}, key=lambda x: x[0])
    return [a for a, _ in kt], [b for _, b in kt], [a for a, _ in tk], [b for _, b in tk]
