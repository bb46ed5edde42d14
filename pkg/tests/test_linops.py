import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenolab import linops as lo
from zenolab.errors import (
    DimensionMismatch,
    InvalidState,
    NegativeSpectrum,
    NonHermitianInput,
    NonUnitaryInput,
    NotAProjector,
    RankDeficient,
)
from zenolab.models import SIGMA_1, three_level_hamiltonian

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=7)
times = st.floats(min_value=-5, max_value=5, allow_nan=False)


def taylor_exp(a, t, terms=30):
    # oracle: plain truncated power series
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ (-1j * a * t) / k
        out = out + term
    return out


def test_pauli_spectrum():
    dec = lo.hermitian_eig(SIGMA_1)
    assert np.allclose(dec.eigenvalues, [-1, 1], atol=1e-14)


def test_identity_spectrum():
    dec = lo.hermitian_eig(np.eye(3))
    assert np.allclose(dec.eigenvalues, 1.0)
    assert lo.unitary_defect(dec.eigenvectors) < 1e-12


def test_three_level_spectrum():
    dec = lo.hermitian_eig(three_level_hamiltonian(1.0, 1.0))
    assert np.allclose(dec.eigenvalues, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        lo.hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        lo.hermitian_eig(np.zeros((2, 3)))


def test_rabi_propagator():
    om, t = 1.3, 0.7
    u = lo.propagator(om * SIGMA_1, t)
    c, s = math.cos(om * t), math.sin(om * t)
    assert np.allclose(u, [[c, -1j * s], [-1j * s, c]], atol=1e-14)


def test_propagator_at_zero_is_identity(rng):
    assert np.allclose(lo.propagator(lo.random_hermitian(rng, 5), 0.0), np.eye(5), atol=1e-14)


def test_propagator_matches_taylor(rng):
    a = lo.random_hermitian(rng, 4)
    assert lo.max_abs(lo.propagator(a, 0.3) - taylor_exp(a, 0.3)) <= 1e-10


def test_decomposition_invariants(rng):
    a = lo.random_hermitian(rng, 6, scale=3.0)
    dec = lo.hermitian_eig(a)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert lo.unitary_defect(dec.eigenvectors) <= 1e-10
    assert lo.max_abs(dec.reconstruct() - a) <= 1e-9 * lo.max_abs(a)
    assert dec.source_dim == 6


def test_evolve_matches_propagator(rng):
    a = lo.random_hermitian(rng, 5)
    psi = lo.random_state(rng, 5)
    dec = lo.hermitian_eig(a)
    assert np.allclose(dec.evolve(psi, 0.9), dec.propagator(0.9) @ psi, atol=1e-13)


@given(seed=seeds, n=dims, t=times, s=times)
def test_propagator_group_law(seed, n, t, s):
    a = lo.random_hermitian(np.random.default_rng(seed), n)
    dec = lo.hermitian_eig(a)
    assert lo.max_abs(dec.propagator(t) @ dec.propagator(s) - dec.propagator(t + s)) <= 1e-9


@given(seed=seeds, n=dims, t=times)
def test_propagator_adjoint_is_time_reversal(seed, n, t):
    dec = lo.hermitian_eig(lo.random_hermitian(np.random.default_rng(seed), n))
    assert lo.max_abs(lo.dagger(dec.propagator(t)) - dec.propagator(-t)) <= 1e-12


@given(seed=seeds, n=dims)
def test_eig_reconstruction_idempotent(seed, n):
    dec = lo.hermitian_eig(lo.random_hermitian(np.random.default_rng(seed), n))
    again = lo.hermitian_eig(dec.reconstruct())
    assert np.max(np.abs(again.eigenvalues - dec.eigenvalues)) <= 1e-10


def test_psd_sqrt_examples():
    assert np.allclose(lo.psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
    assert np.allclose(lo.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


def test_psd_sqrt_clamps_roundoff_and_rejects_negative():
    r = lo.psd_sqrt(np.diag([1.0, -5e-11]))
    assert np.allclose(r, np.diag([1.0, 0.0]))
    with pytest.raises(NegativeSpectrum):
        lo.psd_sqrt(np.diag([1.0, -1e-6]))


@given(seed=seeds, n=dims)
def test_psd_sqrt_squares_back(seed, n):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = lo.dagger(b) @ b
    r = lo.psd_sqrt(a)
    assert lo.hermitian_defect(r) <= 1e-9
    assert lo.max_abs(r @ r - a) <= 1e-9 * max(1.0, lo.max_abs(a))


def test_projector_from_columns():
    assert np.allclose(lo.projector_from_columns([[1, 0]]), np.diag([1, 0]))
    p1 = lo.projector_from_columns([lo.basis_vector(3, 0), lo.basis_vector(3, 1)])
    assert np.allclose(p1, np.diag([1, 1, 0]), atol=1e-15)


def test_projector_from_random_orthonormal_pair(rng):
    u = lo.random_unitary(rng, 4)
    p = lo.projector_from_columns([u[:, 0], u[:, 1]])
    assert abs(np.trace(p).real - 2) <= 1e-12
    assert lo.projector_defect(p) <= 1e-12


def test_projector_from_dependent_columns():
    with pytest.raises(RankDeficient):
        lo.projector_from_columns([[1, 1], [2, 2]])
    with pytest.raises(RankDeficient):
        lo.projector_from_columns([])


def test_checkers():
    with pytest.raises(NonUnitaryInput):
        lo.check_unitary(np.diag([1.0, 2.0]))
    with pytest.raises(NotAProjector):
        lo.check_projector(np.diag([1.0, 0.5]))
    with pytest.raises(InvalidState):
        lo.check_state([1.0, 1.0])
    with pytest.raises(InvalidState):
        lo.check_density(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        lo.check_density(np.diag([1.5, -0.5]))
    assert lo.check_density(np.eye(2) / 2).shape == (2, 2)


def test_operator_json_round_trip(rng):
    op = lo.Operator(lo.random_hermitian(rng, 3), "hermitian")
    back = lo.Operator.from_json(op.to_json())
    assert back.symmetry == "hermitian"
    assert np.array_equal(back.matrix, op.matrix)
    assert back.dim == 3


def test_operator_validates_tag():
    with pytest.raises(NonHermitianInput):
        lo.Operator(np.array([[0, 1], [0, 0]]), "hermitian")
    with pytest.raises(NotAProjector):
        lo.Operator(np.eye(2) * 2, "projector")


def test_state_document(rng):
    psi = lo.random_state(rng, 4)
    assert np.array_equal(lo.state_from_dict(lo.state_to_dict(psi)), psi)
    assert np.allclose(lo.state_from_dict({"dim": 2, "re": [3, 4]}, normalize_input=True), [0.6, 0.8])


def test_operator_norm_is_top_singular_value(rng):
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert abs(lo.operator_norm(a) - np.linalg.svd(a, compute_uv=False)[0]) <= 1e-10


def test_seeded_generators_are_reproducible():
    a = lo.random_hermitian(lo.make_rng(7), 4)
    b = lo.random_hermitian(lo.make_rng(7), 4)
    assert np.array_equal(a, b)
    assert lo.hermitian_defect(a) == 0
