"""Zeno subspaces for an orthogonal resolution of the identity ``{P_n}``.

Nonselective measurement acts on density matrices as
``rho -> sum_n P_n rho P_n``; interleaving it with unitary evolution ``N``
times over ``[0, t]`` and letting ``N`` grow confines the dynamics to the
sectors ``P_n H`` with generator ``sum_n P_n H P_n``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidPartition, InvariantViolation, ValidationError
from .linops import (
    SpectralDecomposition,
    as_matrix,
    check_density,
    check_hermitian,
    check_projector,
    dagger,
    eigenspace_projectors,
    max_abs,
    propagator,
    spectral,
)
from .tables import write_csv

logger = logging.getLogger(__name__)

PARTITION_TOL = 1e-10


@dataclass(frozen=True)
class ZenoPartition:
    """Mutually orthogonal projectors summing to the identity."""

    projectors: tuple

    def __post_init__(self):
        if len(self.projectors) == 0:
            raise InvalidPartition("a partition needs at least one projector")
        mats = []
        for k, p in enumerate(self.projectors):
            try:
                mats.append(check_projector(p))
            except ValidationError as exc:
                raise InvalidPartition(f"member {k}: {exc}") from exc
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise InvalidPartition(f"members have different dimensions {sorted(dims)}")
        n = dims.pop()
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                d = max_abs(mats[i] @ mats[j])
                if d > PARTITION_TOL:
                    raise InvalidPartition(f"P_{i} P_{j} = {d:.3e}, members not orthogonal")
        d = max_abs(sum(mats) - np.eye(n))
        if d > PARTITION_TOL:
            raise InvalidPartition(f"sum of projectors differs from identity by {d:.3e}")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "projectors", tuple(mats))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projectors]

    def __len__(self):
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    @classmethod
    def trivial(cls, dim: int) -> "ZenoPartition":
        return cls((np.eye(dim, dtype=np.complex128),))

    @classmethod
    def from_eigenbasis(cls, basis, groups: Sequence[Sequence[int]]) -> "ZenoPartition":
        """Group columns of an orthonormal basis (or eigenvectors of a Hermitian matrix).

        Ties between eigenvalues are not resolved here; choose groups that keep
        degenerate eigenvectors together.
        """
        if isinstance(basis, SpectralDecomposition):
            dec = basis
        else:
            v = as_matrix(basis)
            dec = SpectralDecomposition(np.zeros(v.shape[0]), v)
        return cls(tuple(eigenspace_projectors(dec, groups)))

    @classmethod
    def from_diagonal(cls, labels: Sequence) -> "ZenoPartition":
        """Coordinate projectors, one per distinct label, in order of first appearance."""
        labels = list(labels)
        order = list(dict.fromkeys(labels))
        return cls(
            tuple(np.diag([1.0 if x == lab else 0.0 for x in labels]).astype(np.complex128) for lab in order)
        )


def _dims(part: ZenoPartition, *mats):
    for m in mats:
        if np.shape(m)[0] != part.dim:
            raise DimensionMismatch(f"operand has dim {np.shape(m)[0]}, partition {part.dim}")


def nonselective_project(rho, part: ZenoPartition) -> np.ndarray:
    """``sum_n P_n rho P_n``."""
    rho = as_matrix(rho)
    _dims(part, rho)
    return sum(p @ rho @ p for p in part)


def _check_channel_output(rho, trace_tol=1e-10, psd_tol=1e-9):
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise InvariantViolation("trace preservation", f"Tr rho = {tr!r}")
    lo = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0])
    if lo < -psd_tol:
        raise InvariantViolation("positivity", f"smallest eigenvalue {lo:.3e}")


def measurement_trajectory(rho0, H, part: ZenoPartition, N: int, t: float):
    """States after each of the ``N`` steps ``rho -> P^(U rho U^dagger)``.

    Returns ``(times, states)`` with ``times[k] = k t / N`` and ``states[0] = rho0``.
    """
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    rho = check_density(rho0)
    dec = spectral(H)
    _dims(part, rho, dec.eigenvectors)
    u = dec.propagator(t / N)
    ud = dagger(u)
    states = [rho]
    for _ in range(N):
        rho = nonselective_project(u @ rho @ ud, part)
        states.append(rho)
    return np.linspace(0.0, t, N + 1), states


def evolve_with_measurements(rho0, H, part: ZenoPartition, N: int, t: float) -> np.ndarray:
    """``(P^ U^_{t/N})^N rho0``: ``N`` nonselective measurements in time ``t``."""
    _, states = measurement_trajectory(rho0, H, part, N, t)
    out = states[-1]
    _check_channel_output(out)
    return out


def branch_operator(H, part: ZenoPartition, sectors: Sequence[int], t: float) -> np.ndarray:
    """``P_{n_N} U(t/N) ... P_{n_1} U(t/N)`` for the outcome record ``sectors = (n_1, ..., n_N)``.

    Summing ``B rho B^dagger`` over every record reproduces
    :func:`evolve_with_measurements`.  Records that switch sector vanish in
    the Zeno limit.
    """
    n = len(sectors)
    if n == 0:
        raise ValidationError("empty outcome record")
    dec = spectral(H)
    _dims(part, dec.eigenvectors)
    u = dec.propagator(t / n)
    out = np.eye(part.dim, dtype=np.complex128)
    for k in sectors:
        out = part.projectors[k] @ u @ out
    return out


def sector_zeno_unitaries(H, part: ZenoPartition, t: float) -> list:
    """``U_Z^(n)(t) = P_n exp(-i P_n H P_n t)`` for every sector."""
    h = check_hermitian(H)
    _dims(part, h)
    out = []
    for p in part:
        hn = p @ h @ p
        out.append(p @ propagator((hn + dagger(hn)) / 2, t))
    return out


def zeno_limit_channel(rho0, H, part: ZenoPartition, t: float) -> np.ndarray:
    """``sum_n U_Z^(n)(t) rho0 U_Z^(n)(t)^dagger``.

    A ``rho0`` with cross-sector coherences is first projected, as the first
    measurement would do.
    """
    rho = check_density(rho0)
    _dims(part, rho)
    projected = nonselective_project(rho, part)
    if offdiagonal_block_norm(rho, part) > 1e-12:
        logger.info(
            "initial state carries cross-sector coherence; projecting first (purity %.6g -> %.6g)",
            purity(rho),
            purity(projected),
        )
    out = sum(u @ projected @ dagger(u) for u in sector_zeno_unitaries(H, part, t))
    _check_channel_output(out)
    return out


def global_zeno_hamiltonian(H, part: ZenoPartition) -> np.ndarray:
    """``sum_n P_n H P_n``."""
    h = check_hermitian(H)
    _dims(part, h)
    hz = sum(p @ h @ p for p in part)
    return (hz + dagger(hz)) / 2


def sector_probabilities(rho, part: ZenoPartition) -> np.ndarray:
    rho = as_matrix(rho)
    _dims(part, rho)
    return np.array([np.trace(rho @ p).real for p in part])


def offdiagonal_block_norm(A, part: ZenoPartition) -> float:
    """Largest entry modulus among the blocks ``P_n A P_m`` with ``n != m``."""
    a = as_matrix(A)
    _dims(part, a)
    best = 0.0
    for i, p in enumerate(part):
        for j, q in enumerate(part):
            if i != j:
                best = max(best, max_abs(p @ a @ q))
    return best


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def star_product(A, B, P) -> np.ndarray:
    """Projected product ``A * B = A P B``; ``P`` is its unit on ``P``-sandwiched operators."""
    a, b = as_matrix(A), as_matrix(B)
    p = check_projector(P)
    if not a.shape == b.shape == p.shape:
        raise DimensionMismatch(f"shapes {a.shape}, {b.shape}, {p.shape}")
    return a @ p @ b


def sectors_to_csv(times, states, part: ZenoPartition, path):
    k = len(part)
    header = ["t"] + [f"p_{i + 1}" for i in range(k)] + ["purity"]
    rows = [
        [t, *sector_probabilities(rho, part), purity(rho)] for t, rho in zip(times, states)
    ]
    return write_csv(path, header, rows)
