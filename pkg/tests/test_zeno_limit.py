import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenolab import zeno_limit as zl
from zenolab.errors import DimensionMismatch, NegativeSpectrum, ValidationError
from zenolab.linops import (
    basis_vector,
    dagger,
    make_rng,
    max_abs,
    operator_norm,
    propagator,
    random_hermitian,
    random_projector,
)
from zenolab.models import rabi_hamiltonian, three_level_hamiltonian, three_level_partition
from zenolab.survival import survival_after_measurements
from zenolab.tables import read_csv

seeds = st.integers(min_value=0, max_value=2**32 - 1)
H3 = three_level_hamiltonian(1.0, 1.0)
P1 = three_level_partition()[0]


def test_commuting_case_is_n_independent():
    h = np.diag([0.3, -1.0, 2.0]).astype(complex)
    ref = P1 @ propagator(h, 1.7) @ P1
    for n in (1, 3, 50):
        assert max_abs(zl.zeno_product(h, P1, n, 1.7) - ref) <= 1e-13


def test_two_level_corner_entry():
    v = zl.zeno_product(rabi_hamiltonian(1.0), np.diag([1, 0]), 5, 1.0)
    assert abs(v[0, 0] - math.cos(0.2) ** 5) <= 1e-14
    p = survival_after_measurements(rabi_hamiltonian(1.0), basis_vector(2, 0), 5, 1.0)
    assert abs(abs(v[0, 0]) ** 2 - p) <= 1e-14


def test_three_level_large_n():
    uz = zl.zeno_unitary(H3, P1, 1.0)
    assert max_abs(zl.zeno_product(H3, P1, 10_000, 1.0) - uz) <= 2e-3


def test_zeno_hamiltonian_examples(rng):
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.3
    assert np.array_equal(zl.zeno_hamiltonian(three_level_hamiltonian(1.3, 0.7), P1), expected)
    h = random_hermitian(rng, 4)
    assert max_abs(zl.zeno_hamiltonian(h, np.eye(4)) - h) == 0
    assert max_abs(zl.zeno_hamiltonian(h, np.zeros((4, 4)))) == 0
    with pytest.raises(DimensionMismatch):
        zl.zeno_hamiltonian(h, P1)


def test_zeno_unitary_blocks():
    t = 0.8
    u = zl.zeno_unitary(three_level_hamiltonian(1.5, 2.0), P1, t)
    c, s = math.cos(1.5 * t), math.sin(1.5 * t)
    expected = np.zeros((3, 3), dtype=complex)
    expected[:2, :2] = [[c, -1j * s], [-1j * s, c]]
    assert max_abs(u - expected) <= 1e-14
    assert max_abs(zl.zeno_unitary(H3, P1, 0.0) - P1) <= 1e-15
    assert max_abs(dagger(u) @ u - P1) <= 1e-10


def test_rank_one_zeno_unitary_is_phase(rng):
    h = random_hermitian(rng, 4)
    psi = basis_vector(4, 2)
    p = np.outer(psi, psi)
    e = np.vdot(psi, h @ psi).real
    assert max_abs(zl.zeno_unitary(h, p, 1.3) - np.exp(-1j * e * 1.3) * p) <= 1e-13


def test_form_version_examples(rng):
    p = random_projector(rng, 4, 2)
    assert max_abs(zl.zeno_hamiltonian_form(np.eye(4), p) - p) <= 1e-12
    plus = np.array([1, 1]) / math.sqrt(2)
    pp = np.outer(plus, plus)
    assert max_abs(zl.zeno_hamiltonian_form(np.diag([1.0, 4.0]), pp) - 2.5 * pp) <= 1e-12
    with pytest.raises(NegativeSpectrum):
        zl.zeno_hamiltonian_form(np.diag([1.0, -1.0]), pp)


@given(seed=seeds)
def test_form_version_equals_sandwich(seed):
    rng = make_rng(seed)
    b = random_hermitian(rng, 6)
    h = b @ b
    p = random_projector(rng, 6, 2)
    assert max_abs(zl.zeno_hamiltonian_form(h, p) - zl.zeno_hamiltonian(h, p)) <= 1e-9


@given(seed=seeds, n=st.integers(1, 40), t=st.floats(-3, 3))
def test_product_is_a_contraction(seed, n, t):
    rng = make_rng(seed)
    h = random_hermitian(rng, 5)
    p = random_projector(rng, 5, 2)
    assert operator_norm(zl.zeno_product(h, p, n, t)) <= 1 + 1e-10


def test_convergence_profile_rate():
    res = zl.convergence_profile(H3, P1, 1.0, [100, 200, 400, 800])
    d = [r.defect for r in res]
    for a, b in zip(d, d[1:]):
        assert 0.4 <= b / a <= 0.6
    assert all(r.defect_opnorm >= r.defect - 1e-15 for r in res)
    assert all(r.survival <= 1 + 1e-12 for r in res)


def test_convergence_profile_commuting():
    h = np.diag([1.0, 2.0, 3.0])
    res = zl.convergence_profile(h, P1, 2.0, [1, 10, 100])
    assert max(r.defect for r in res) <= 1e-10


def test_convergence_profile_two_level_rank_one():
    res = zl.convergence_profile(rabi_hamiltonian(1.0), np.diag([1, 0]), 1.0, [100, 200, 400])
    d = [r.defect for r in res]
    assert 0.4 <= d[1] / d[0] <= 0.6 and 0.4 <= d[2] / d[1] <= 0.6


def test_convergence_profile_parallel_matches_serial():
    a = zl.convergence_profile(H3, P1, 1.0, [10, 20, 40])
    b = zl.convergence_profile(H3, P1, 1.0, [10, 20, 40], workers=3)
    assert [r.defect for r in a] == [r.defect for r in b]


def test_convergence_profile_input_checks():
    with pytest.raises(ValidationError):
        zl.convergence_profile(H3, P1, 1.0, [])
    with pytest.raises(ValidationError):
        zl.convergence_profile(H3, P1, 1.0, [20, 10])


def test_limit_law_decade():
    uz = zl.zeno_unitary(H3, P1, 1.0)
    d4 = max_abs(zl.zeno_product(H3, P1, 10_000, 1.0) - uz)
    d5 = max_abs(zl.zeno_product(H3, P1, 100_000, 1.0) - uz)
    assert 0.08 <= d5 / d4 <= 0.12


def test_compensated_accumulation_stays_in_range():
    n = zl.COMPENSATE_ABOVE + 2048
    v = zl.zeno_product(H3, P1, n, 1.0)
    q = np.eye(3) - P1
    assert max_abs(q @ v) == 0 and max_abs(v @ q) == 0
    assert max_abs(v - zl.zeno_unitary(H3, P1, 1.0)) <= 1e-4


def test_survival_saturation():
    res = zl.convergence_profile(H3, P1, 1.0, [50, 100, 400, 1600])
    c = max(r.N * (1 - r.survival) for r in res[:2])
    for r in res:
        assert 1 - r.survival <= c / r.N * 1.05


def test_state_product_matches_matrix_product(rng):
    psi = basis_vector(3, 0)
    v = zl.zeno_product(H3, P1, 37, 1.2)
    assert max_abs(zl.zeno_product_state(H3, P1, 37, 1.2, psi) - v @ psi) <= 1e-13


def test_semigroup_defect_examples():
    assert zl.semigroup_defect(np.diag([1.0, 2.0, 3.0]), P1, 0.4, 0.9) <= 1e-12
    assert zl.semigroup_defect(H3, P1, 0.5, 0.5) > 1e-3


def test_time_averaged_defect_decreases():
    psi = basis_vector(3, 0)
    assert zl.time_averaged_defect(H3, P1, 100, 0.0, psi) == 0.0
    a = zl.time_averaged_defect(H3, P1, 100, 1.0, psi)
    b = zl.time_averaged_defect(H3, P1, 200, 1.0, psi)
    assert 0 <= b <= a


def test_invalid_n():
    with pytest.raises(ValidationError):
        zl.zeno_product(H3, P1, 0, 1.0)
    with pytest.raises(ValidationError):
        zl.zeno_product(H3, P1, 2.5, 1.0)


def test_profile_csv(tmp_path):
    res = zl.convergence_profile(H3, P1, 1.0, [10, 20])
    header, rows = read_csv(zl.profile_to_csv(res, tmp_path / "p.csv"))
    assert header == ["N", "defect_max", "defect_opnorm", "survival"]
    assert [r[0] for r in rows] == [10, 20]
