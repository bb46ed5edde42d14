"""Dense complex operator algebra.

Everything downstream is built on one primitive: the Hermitian
eigendecomposition.  Propagators are assembled as ``V exp(-i L t) V^dagger``
from it, which keeps them unitary to roundoff and makes re-evaluation at a new
time O(n^2) once the decomposition exists.

Operators are plain ``numpy`` arrays everywhere.  :class:`Operator` is a thin
tagged wrapper used where a symmetry guarantee has to travel with the data,
e.g. JSON configs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NegativeSpectrum,
    NonHermitianInput,
    NonUnitaryInput,
    NotAProjector,
    RankDeficient,
    ValidationError,
)

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
PROJECTOR_TOL = 1e-10
STATE_NORM_TOL = 1e-12
PSD_CLAMP = 1e-10

SYMMETRIES = ("hermitian", "unitary", "projector", "general")


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 array."""
    if isinstance(a, Operator):
        a = a.matrix
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d state vector, got shape {v.shape}")
    return v


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def max_abs(a) -> float:
    """Entrywise max modulus, the default distance used for reporting."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def same_dim(*mats) -> int:
    dims = {np.shape(m)[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def hermitian_defect(a) -> float:
    a = np.asarray(a)
    return max_abs(a - dagger(a))


def unitary_defect(a) -> float:
    a = np.asarray(a)
    return max_abs(dagger(a) @ a - np.eye(a.shape[0]))


def projector_defect(a) -> float:
    a = np.asarray(a)
    return max(hermitian_defect(a), max_abs(a @ a - a))


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(a)
    d = hermitian_defect(m)
    if d > tol:
        raise NonHermitianInput(f"max|A - A^dagger| = {d:.3e} exceeds {tol:g}")
    return m


def check_unitary(a, tol: float = UNITARY_TOL) -> np.ndarray:
    m = as_matrix(a)
    d = unitary_defect(m)
    if d > tol:
        raise NonUnitaryInput(f"max|U^dagger U - I| = {d:.3e} exceeds {tol:g}")
    return m


def check_projector(a, tol: float = PROJECTOR_TOL) -> np.ndarray:
    m = as_matrix(a)
    d = projector_defect(m)
    if d > tol:
        raise NotAProjector(f"projector defect {d:.3e} exceeds {tol:g}")
    return m


def check_state(psi, tol: float = STATE_NORM_TOL) -> np.ndarray:
    v = as_vector(psi)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol:
        raise InvalidState(f"state norm {n!r} differs from 1 by more than {tol:g}")
    return v


def normalize(psi) -> np.ndarray:
    v = as_vector(psi)
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidState("cannot normalize the zero vector")
    return v / n


def check_density(rho, trace_tol: float = 1e-12, psd_tol: float = 1e-10) -> np.ndarray:
    m = check_hermitian(rho)
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidState(f"density matrix trace {tr!r} is not 1")
    lo = float(np.linalg.eigvalsh(m)[0])
    if lo < -psd_tol:
        raise InvalidState(f"density matrix has eigenvalue {lo:.3e}")
    return m


def pure_density(psi) -> np.ndarray:
    v = check_state(psi)
    return np.outer(v, np.conj(v))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def operator_norm(a) -> float:
    """Largest singular value, from the spectrum of ``A^dagger A``."""
    a = np.asarray(a, dtype=np.complex128)
    gram = dagger(a) @ a
    lam = np.linalg.eigvalsh((gram + dagger(gram)) / 2)
    return float(np.sqrt(max(lam[-1], 0.0)))


@dataclass(frozen=True)
class Operator:
    """Square complex matrix carrying a symmetry tag that is checked on construction."""

    matrix: np.ndarray
    symmetry: str = "general"

    def __post_init__(self):
        if self.symmetry not in SYMMETRIES:
            raise ValidationError(f"unknown symmetry tag {self.symmetry!r}")
        m = as_matrix(self.matrix)
        if self.symmetry == "hermitian":
            check_hermitian(m)
        elif self.symmetry == "unitary":
            check_unitary(m)
        elif self.symmetry == "projector":
            check_projector(m)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "dim": self.dim,
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
            "symmetry": self.symmetry,
        }

    @classmethod
    def from_dict(cls, doc: dict, symmetry: str | None = None) -> "Operator":
        m = matrix_from_dict(doc)
        return cls(m, symmetry or doc.get("symmetry", "general"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, symmetry: str | None = None) -> "Operator":
        return cls.from_dict(json.loads(text), symmetry)


def _flat_complex(doc: dict, n_expected: int) -> np.ndarray:
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed complex array document: {exc}") from exc
    if re.shape != (n_expected,) or im.shape != (n_expected,):
        raise ValidationError(
            f"expected {n_expected} real and imaginary entries, got {re.shape} and {im.shape}"
        )
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise ValidationError("non-finite entries")
    return re + 1j * im


def matrix_from_dict(doc: dict) -> np.ndarray:
    """Row-major ``{"dim", "re", "im"}`` document to a square array."""
    try:
        n = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"operator document needs an integer 'dim': {exc}") from exc
    if n < 1:
        raise ValidationError("dim must be positive")
    return _flat_complex(doc, n * n).reshape(n, n)


def state_to_dict(psi) -> dict:
    v = as_vector(psi)
    return {"dim": v.size, "re": v.real.tolist(), "im": v.imag.tolist()}


def state_from_dict(doc: dict, normalize_input: bool = False) -> np.ndarray:
    try:
        n = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"state document needs an integer 'dim': {exc}") from exc
    v = _flat_complex(doc, n)
    return normalize(v) if normalize_input else check_state(v)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    _adjoint: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_adjoint", dagger(self.eigenvectors))

    @property
    def source_dim(self) -> int:
        return self.eigenvectors.shape[0]

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Matrix function ``V f(L) V^dagger``."""
        return (self.eigenvectors * f(self.eigenvalues)) @ self._adjoint

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda lam: lam.astype(np.complex128))

    def propagator(self, t: float) -> np.ndarray:
        return (self.eigenvectors * np.exp(-1j * self.eigenvalues * t)) @ self._adjoint

    def evolve(self, psi, t: float) -> np.ndarray:
        """``exp(-iAt) psi`` without forming the full propagator."""
        coeff = self._adjoint @ psi
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * coeff)


def hermitian_eig(a) -> SpectralDecomposition:
    m = check_hermitian(a)
    # eigh reads one triangle only; symmetrize so both halves contribute equally
    lam, vec = np.linalg.eigh((m + dagger(m)) / 2)
    return SpectralDecomposition(lam, vec)


SpectralLike = Union[SpectralDecomposition, np.ndarray, Operator]


def spectral(a: SpectralLike) -> SpectralDecomposition:
    return a if isinstance(a, SpectralDecomposition) else hermitian_eig(a)


def propagator(a: SpectralLike, t: float) -> np.ndarray:
    """``exp(-iAt)`` for Hermitian ``A``.

    Accepts a precomputed :class:`SpectralDecomposition` so that sweeps over
    ``t`` share one diagonalization.
    """
    return spectral(a).propagator(t)


def psd_sqrt(a) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-10, 0)`` are treated as roundoff and clamped to zero.
    """
    dec = hermitian_eig(a)
    lo = dec.eigenvalues[0]
    if lo < -PSD_CLAMP:
        raise NegativeSpectrum(f"smallest eigenvalue {lo:.3e} < -{PSD_CLAMP:g}")
    return dec.apply(lambda lam: np.sqrt(np.clip(lam, 0.0, None)).astype(np.complex128))


def projector_from_columns(vectors: Iterable) -> np.ndarray:
    """Orthogonal projector onto the span of linearly independent vectors."""
    cols = [as_vector(v) for v in vectors]
    if not cols:
        raise RankDeficient("no vectors given")
    if len({c.size for c in cols}) != 1:
        raise DimensionMismatch("vectors have different lengths")
    b = np.stack(cols, axis=1)
    gram = dagger(b) @ b
    # scale-free singularity test on the Gram matrix
    sv = np.linalg.eigvalsh((gram + dagger(gram)) / 2)
    if sv[0] <= 1e-10 * max(sv[-1], 1.0):
        raise RankDeficient(f"Gram matrix singular (smallest eigenvalue {sv[0]:.3e})")
    q, _ = np.linalg.qr(b)
    p = q @ dagger(q)
    return (p + dagger(p)) / 2


def basis_vector(dim: int, k: int) -> np.ndarray:
    e = np.zeros(dim, dtype=np.complex128)
    e[k] = 1.0
    return e


def eigenspace_projectors(dec: SpectralDecomposition, groups: Sequence[Sequence[int]]) -> list:
    """Projectors onto the spans of grouped eigenvector columns."""
    out = []
    for idx in groups:
        v = dec.eigenvectors[:, list(idx)]
        out.append(v @ dagger(v))
    return out


def group_sorted(values: np.ndarray, tol: float) -> list[list[int]]:
    """Cluster indices of ascending ``values`` wherever consecutive gaps are <= tol."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


# random model generation, seeded explicitly (numpy PCG64 via default_rng)

def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """GUE-style draw: ``(X + X^dagger)/2`` with standard complex Gaussian ``X``."""
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (x + dagger(x)) / 2


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(x)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_projector(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    u = random_unitary(rng, dim)
    return projector_from_columns(u[:, k] for k in range(rank))
