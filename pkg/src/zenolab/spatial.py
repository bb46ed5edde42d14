"""Position measurements on a 1-d lattice.

Repeatedly checking whether a particle is inside a window ``[lo, hi)`` turns
free motion into motion in a box with hard walls.  On the lattice this is
exact algebra: with a 0/1 diagonal ``P``, ``PHP`` restricted to the window is
the second-difference operator with Dirichlet truncation, so the Zeno product
``[P exp(-iHt/N) P]^N`` should converge to the Dirichlet propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonLatticeTime, ValidationError, WindowTooSmall
from .linops import SpectralDecomposition, dagger, hermitian_eig
from .tables import write_csv

MIN_POINTS = 16
MIN_WINDOW = 4
SUPPORT_TOL = 1e-12
LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    """Periodic lattice ``x_j = j dx``, ``j = 0 .. n_points - 1``."""

    n_points: int
    box_length: float
    mass: float = 1.0
    potential: Optional[np.ndarray] = None
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise ValidationError(f"n_points must be an integer >= {MIN_POINTS}")
        if not self.box_length > 0:
            raise ValidationError("box_length must be positive")
        if not self.mass > 0:
            raise ValidationError("mass must be positive")
        if self.boundary != "periodic":
            raise ValidationError(f"unsupported boundary {self.boundary!r}")
        v = np.zeros(self.n_points) if self.potential is None else np.asarray(self.potential, float)
        if v.shape != (self.n_points,):
            raise DimensionMismatch(f"potential has shape {v.shape}, grid has {self.n_points} points")
        if not np.all(np.isfinite(v)):
            raise ValidationError("potential must be finite everywhere")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "potential", v)

    @property
    def dx(self) -> float:
        return self.box_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx


@dataclass(frozen=True)
class Window:
    """Lattice points ``lo <= j < hi``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi - self.lo < MIN_WINDOW:
            raise WindowTooSmall(f"window [{self.lo}, {self.hi}) has fewer than {MIN_WINDOW} points")
        if self.lo < 0:
            raise ValidationError("window starts before the grid")

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def check(self, grid: Grid1D) -> "Window":
        if self.hi > grid.n_points:
            raise ValidationError(f"window end {self.hi} exceeds {grid.n_points} grid points")
        return self

    @classmethod
    def interior(cls, grid: Grid1D, a: float, b: float) -> "Window":
        """Lattice points strictly inside ``(a, b)``.

        The walls sit on the lattice sites next to the window, so the box the
        Dirichlet operator sees has width ``b - a`` up to rounding to ``dx``.
        """
        lo = int(round(a / grid.dx)) + 1
        hi = int(round(b / grid.dx))
        return cls(lo, hi).check(grid)

    @classmethod
    def span(cls, grid: Grid1D, a: float, b: float) -> "Window":
        """Lattice points in ``[a, b)``: ``width * dx == b - a``."""
        return cls(int(round(a / grid.dx)), int(round(b / grid.dx))).check(grid)

    def box_width(self, grid: Grid1D) -> float:
        """Distance between the two wall sites."""
        return (self.width + 1) * grid.dx


def laplacian(grid: Grid1D) -> np.ndarray:
    n, h2 = grid.n_points, grid.dx**2
    lap = np.zeros((n, n))
    idx = np.arange(n)
    lap[idx, idx] = -2.0 / h2
    lap[idx, (idx + 1) % n] = 1.0 / h2
    lap[idx, (idx - 1) % n] = 1.0 / h2
    return lap


def build_hamiltonian(grid: Grid1D) -> np.ndarray:
    """``-Laplacian / (2m) + diag(V)`` with periodic wrap."""
    return (-laplacian(grid) / (2 * grid.mass) + np.diag(grid.potential)).astype(np.complex128)


def window_projector(grid: Grid1D, w: Window) -> np.ndarray:
    w.check(grid)
    d = np.zeros(grid.n_points)
    d[w.lo : w.hi] = 1.0
    return np.diag(d).astype(np.complex128)


def dirichlet_block(grid: Grid1D, w: Window) -> np.ndarray:
    """Window block of ``H``: the second difference truncated at the walls.

    This is ``PHP`` restricted to range(P).  A window covering the whole box
    has no walls and keeps the periodic wrap.
    """
    w.check(grid)
    n, h2 = w.width, grid.dx**2
    main = 1.0 / (grid.mass * h2) + grid.potential[w.lo : w.hi]
    off = -0.5 / (grid.mass * h2) * np.ones(n - 1)
    block = (np.diag(main) + np.diag(off, 1) + np.diag(off, -1)).astype(np.complex128)
    if n == grid.n_points:
        block[0, -1] = block[-1, 0] = -0.5 / (grid.mass * h2)
    return block


def dirichlet_hamiltonian(grid: Grid1D, w: Window) -> np.ndarray:
    """:func:`dirichlet_block` embedded on ``range(P)``, zero elsewhere."""
    out = np.zeros((grid.n_points, grid.n_points), dtype=np.complex128)
    out[w.lo : w.hi, w.lo : w.hi] = dirichlet_block(grid, w)
    return out


def dirichlet_spectrum(grid: Grid1D, w: Window) -> SpectralDecomposition:
    """Eigenpairs of the window block; eigenvectors live on the window only."""
    return hermitian_eig(dirichlet_block(grid, w))


def box_levels(n, width: float, mass: float = 1.0) -> np.ndarray:
    """``n^2 pi^2 / (2 m a^2)``."""
    n = np.asarray(n, dtype=float)
    return n**2 * math.pi**2 / (2 * mass * width**2)


def dirichlet_mode(grid: Grid1D, w: Window, k: int = 0) -> np.ndarray:
    """Normalized ``k``-th Dirichlet eigenvector on the full grid, real and positive at its first maximum."""
    dec = dirichlet_spectrum(grid, w)
    v = dec.eigenvectors[:, k]
    v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    out = np.zeros(grid.n_points, dtype=np.complex128)
    out[w.lo : w.hi] = v
    return out


def _require_room(grid: Grid1D, w: Window):
    # a full-box window has P = 1 and nothing can leak
    if w.width < grid.n_points and grid.n_points < 2 * w.width:
        raise ValidationError(
            f"outer box of {grid.n_points} points must be at least twice the window ({w.width})"
        )


def _window_state(grid: Grid1D, w: Window, psi0) -> np.ndarray:
    psi = np.asarray(psi0, dtype=np.complex128)
    if psi.shape != (grid.n_points,):
        raise DimensionMismatch(f"state has shape {psi.shape}, grid has {grid.n_points} points")
    outside = np.concatenate([psi[: w.lo], psi[w.hi :]])
    if outside.size and np.max(np.abs(outside)) > SUPPORT_TOL:
        raise ValidationError("initial state must be supported in the window")
    return psi


@dataclass
class ZenoStepper:
    """Reusable window block of ``exp(-iH dt)`` for one grid and window.

    Since ``P`` is a 0/1 diagonal, ``P U P`` acts on range(P) as the window
    block of the full-grid propagator; iterating that block is the same
    product as iterating the full sandwich.
    """

    grid: Grid1D
    window: Window
    dec: Optional[SpectralDecomposition] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.window.check(self.grid)
        _require_room(self.grid, self.window)
        if self.dec is None:
            self.dec = hermitian_eig(build_hamiltonian(self.grid))

    def block(self, dt: float) -> np.ndarray:
        if dt not in self._cache:
            w = self.window
            v = self.dec.eigenvectors[w.lo : w.hi]
            self._cache[dt] = (v * np.exp(-1j * self.dec.eigenvalues * dt)) @ dagger(v)
        return self._cache[dt]

    def run(self, N: int, t: float, psi0, return_norms: bool = False):
        if int(N) != N or N < 1:
            raise ValidationError(f"N must be a positive integer, got {N!r}")
        w = self.window
        psi = _window_state(self.grid, w, psi0)
        b = self.block(t / N)
        v = psi[w.lo : w.hi].copy()
        norms = [float(np.linalg.norm(v))]
        for _ in range(int(N)):
            v = b @ v
            if return_norms:
                norms.append(float(np.linalg.norm(v)))
        out = np.zeros(self.grid.n_points, dtype=np.complex128)
        out[w.lo : w.hi] = v
        return (out, np.array(norms)) if return_norms else out


def spatial_zeno_product(grid: Grid1D, w: Window, N: int, t: float, psi0, return_norms=False):
    """``[P exp(-iHt/N) P]^N psi0``; the surviving vector is not renormalized."""
    return ZenoStepper(grid, w).run(N, t, psi0, return_norms)


def dirichlet_propagate(grid: Grid1D, w: Window, psi0, t: float, dec=None) -> np.ndarray:
    """``P exp(-i H_D t) psi0`` with ``H_D`` the Dirichlet operator."""
    psi = _window_state(grid, w, psi0)
    dec = dec or dirichlet_spectrum(grid, w)
    out = np.zeros(grid.n_points, dtype=np.complex128)
    out[w.lo : w.hi] = dec.evolve(psi[w.lo : w.hi], t)
    return out


def fidelity(psi_ref, psi) -> float:
    """``|<psi_ref|psi>| / (||psi_ref|| ||psi||)``."""
    a = np.asarray(psi_ref, dtype=np.complex128)
    b = np.asarray(psi, dtype=np.complex128)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValidationError("fidelity of a zero vector")
    return float(abs(np.vdot(a, b)) / (na * nb))


def time_averaged_defect(grid: Grid1D, w: Window, N: int, t_max: float, psi0, samples: int = 33) -> float:
    """Trapezoid estimate of ``int_0^t_max ||V_N(t) psi0 - P exp(-i H_D t) psi0||^2 dt``."""
    if t_max < 0:
        raise ValidationError("t_max must be non-negative")
    if t_max == 0:
        return 0.0
    stepper = ZenoStepper(grid, w)
    ddec = dirichlet_spectrum(grid, w)
    ts = np.linspace(0.0, t_max, samples)
    vals = []
    for t in ts:
        z = stepper.run(N, t, psi0) if t > 0 else _window_state(grid, w, psi0)
        d = dirichlet_propagate(grid, w, psi0, t, ddec)
        vals.append(float(np.vdot(z - d, z - d).real))
    return float(np.trapezoid(vals, ts))


def richardson_ratios(values: Sequence[float], exact: float) -> list[float]:
    """``err_k / err_{k+1}`` for a sequence computed on successively halved meshes."""
    err = [abs(v - exact) for v in values]
    return [a / b for a, b in zip(err, err[1:])]


def dirichlet_ground_energy(n_points: int, box_length: float, a: float, b: float, mass=1.0) -> float:
    grid = Grid1D(n_points, box_length, mass)
    return float(dirichlet_spectrum(grid, Window.interior(grid, a, b)).eigenvalues[0])


# translations


def momentum_operator(grid: Grid1D) -> np.ndarray:
    """``-i d/dx`` diagonal in the discrete Fourier basis."""
    n = grid.n_points
    k = 2 * math.pi * np.fft.fftfreq(n, d=grid.dx)
    p = np.fft.ifft(k[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    return (p + dagger(p)) / 2


def _lattice_steps(grid: Grid1D, t: float) -> int:
    m = t / grid.dx
    k = round(m)
    if abs(m - k) > LATTICE_TOL:
        raise NonLatticeTime(f"t = {t!r} is {m!r} lattice spacings, not a whole number")
    return int(k)


@dataclass(frozen=True)
class TranslationReport:
    t: float
    s: float
    semigroup_defect: float
    survival: float
    survival_exact: float
    n_independence_defect: float
    n_independent: bool


def translation_semigroup_demo(
    grid: Grid1D, w: Window, t: float, s: float, n_checks: Sequence[int] = (1, 16)
) -> TranslationReport:
    """``H = p`` generates translations; projecting onto a window gives a semigroup, not a group.

    ``V_N(t) = (P U(t/N) P)^N`` equals ``P U(t) P`` for every ``N`` because a
    translated window never re-enters itself, and the uniform window state
    survives with probability ``(1 - t / a)^2``.
    """
    if t < 0 or s < 0:
        raise ValidationError("t and s must be non-negative")
    w.check(grid)
    _require_room(grid, w)
    m_t, m_s = _lattice_steps(grid, t), _lattice_steps(grid, s)
    if m_t + m_s >= w.width:
        raise ValidationError("t + s must be shorter than the window transit time")
    for n in n_checks:
        if t > 0:
            _lattice_steps(grid, t / n)
    dec = hermitian_eig(momentum_operator(grid))
    d = np.zeros(grid.n_points)
    d[w.lo : w.hi] = 1.0

    def sandwich(tt):
        return d[:, None] * dec.propagator(tt) * d[None, :]

    a, b, c = sandwich(t), sandwich(s), sandwich(t + s)
    semi = float(np.max(np.abs(a @ b - c)))
    v = [np.linalg.matrix_power(sandwich(t / n), n) for n in n_checks]
    nind = max(float(np.max(np.abs(x - v[0]))) for x in v)
    u = d / math.sqrt(w.width)
    surv = float(abs(np.vdot(u, a @ u)) ** 2)
    exact = ((w.width - m_t) / w.width) ** 2
    return TranslationReport(t, s, semi, surv, exact, nind, nind <= 1e-10)


# exports


def scenario_to_csv(rows: Sequence[tuple], path):
    """Rows of ``(N, fidelity, survival, time_avg_defect)``."""
    return write_csv(path, ["N", "fidelity", "survival", "time_avg_defect"], rows)


def wavefunction_to_csv(grid: Grid1D, psi, path):
    psi = np.asarray(psi, dtype=np.complex128)
    rows = zip(grid.x, psi.real, psi.imag, np.abs(psi) ** 2)
    return write_csv(path, ["x", "re_psi", "im_psi", "abs2"], rows)
