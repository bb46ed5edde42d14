"""Built-in model systems.

* two-level Rabi oscillator ``H = Omega sigma_1`` started in ``|+>``;
* the 3-level chain ``a - b - c`` with the partition ``{|a>,|b>}``, ``{|c>}``;
* the 4-level extension with an ancilla level ``|M>`` coupled to ``|c>``
  either by kicks or continuously;
* a Friedrichs chain, a single level coupled to a finite band, used as the
  desk-scale unstable system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import basis_vector

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PLUS = np.array([1, 0], dtype=np.complex128)


def rabi_hamiltonian(omega: float = 1.0) -> np.ndarray:
    return omega * SIGMA_1


def three_level_hamiltonian(omega1: float = 1.0, omega2: float = 1.0) -> np.ndarray:
    return np.array(
        [[0, omega1, 0], [omega1, 0, omega2], [0, omega2, 0]], dtype=np.complex128
    )


def three_level_partition():
    """``P1 = |a><a| + |b><b|`` and ``P2 = |c><c|``."""
    return np.diag([1, 1, 0]).astype(np.complex128), np.diag([0, 0, 1]).astype(np.complex128)


def four_level_hamiltonian(omega1: float = 1.0, omega2: float = 1.0) -> np.ndarray:
    h = np.zeros((4, 4), dtype=np.complex128)
    h[:3, :3] = three_level_hamiltonian(omega1, omega2)
    return h


def ancilla_coupling() -> np.ndarray:
    """``|c><M| + |M><c|`` on the 4-level space; equals ``P_+ - P_-``."""
    h = np.zeros((4, 4), dtype=np.complex128)
    h[2, 3] = h[3, 2] = 1.0
    return h


def four_level_projectors():
    """``P_1``, ``P_+``, ``P_-`` of the 4-level examples."""
    p1 = np.diag([1, 1, 0, 0]).astype(np.complex128)
    cp = (basis_vector(4, 2) + basis_vector(4, 3)) / math.sqrt(2)
    cm = (basis_vector(4, 2) - basis_vector(4, 3)) / math.sqrt(2)
    return p1, np.outer(cp, cp.conj()), np.outer(cm, cm.conj())


def kick_unitary(lam: float = math.pi / 2) -> np.ndarray:
    """``P_1 + exp(-i lam (|c><M| + |M><c|))``."""
    u = np.diag([1, 1, 0, 0]).astype(np.complex128)
    u[2:, 2:] = [[math.cos(lam), -1j * math.sin(lam)], [-1j * math.sin(lam), math.cos(lam)]]
    return u


def four_level_zeno_hamiltonian(omega1: float = 1.0) -> np.ndarray:
    h = np.zeros((4, 4), dtype=np.complex128)
    h[0, 1] = h[1, 0] = omega1
    return h


def four_level_asymptotic(omega1: float, t: float, phase: float) -> np.ndarray:
    """Block matrix with the ``Omega_1 t`` rotation on ``{a, b}`` and ``phase`` on ``{c, M}``.

    ``phase = N lam`` gives the kicked form, ``phase = K t`` the continuous one.
    """
    u = np.zeros((4, 4), dtype=np.complex128)
    c, s = math.cos(omega1 * t), math.sin(omega1 * t)
    u[:2, :2] = [[c, -1j * s], [-1j * s, c]]
    c, s = math.cos(phase), math.sin(phase)
    u[2:, 2:] = [[c, -1j * s], [-1j * s, c]]
    return u


@dataclass(frozen=True)
class FriedrichsChain:
    """Level ``|0>`` at ``omega0`` coupled to ``n_band`` equally spaced levels on ``[-W/2, W/2]``.

    Band level ``k`` at energy ``e_k`` couples with strength
    ``g * sqrt(1 + edge_enhancement * (2 e_k / W)**2)``.  With
    ``edge_enhancement = 0`` the coupling is uniform; a uniform coupling to a
    flat band always yields a long-time prefactor ``Z > 1``, so ``gamma_eff``
    approaches the asymptotic rate from below and never crosses it.  A
    coupling that grows towards the band edges gives ``Z < 1`` and hence a
    finite transition time.
    """

    n_band: int = 40
    bandwidth: float = 4.0
    coupling: float = 0.03
    omega0: float = 0.0
    edge_enhancement: float = 3.0

    @property
    def band_energies(self) -> np.ndarray:
        return np.linspace(-self.bandwidth / 2, self.bandwidth / 2, self.n_band)

    @property
    def couplings(self) -> np.ndarray:
        x = 2 * self.band_energies / self.bandwidth
        return self.coupling * np.sqrt(1 + self.edge_enhancement * x**2)

    @property
    def level_spacing(self) -> float:
        return self.bandwidth / (self.n_band - 1)

    @property
    def density_of_states(self) -> float:
        return 1.0 / self.level_spacing

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi / self.level_spacing

    def hamiltonian(self) -> np.ndarray:
        n = self.n_band + 1
        h = np.zeros((n, n), dtype=np.complex128)
        h[0, 0] = self.omega0
        h[0, 1:] = h[1:, 0] = self.couplings
        h[1:, 1:] = np.diag(self.band_energies)
        return h

    def initial_state(self) -> np.ndarray:
        return basis_vector(self.n_band + 1, 0)

    def golden_rule_rate(self) -> float:
        """``2 pi |g(omega0)|^2 rho`` with the coupling evaluated on shell."""
        x = 2 * self.omega0 / self.bandwidth
        g2 = self.coupling**2 * (1 + self.edge_enhancement * x**2)
        return 2 * math.pi * g2 * self.density_of_states
