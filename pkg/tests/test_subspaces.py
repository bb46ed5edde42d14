import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenolab import subspaces as sb
from zenolab.errors import DimensionMismatch, InvalidPartition
from zenolab.linops import (
    basis_vector,
    dagger,
    hermitian_eig,
    make_rng,
    max_abs,
    propagator,
    pure_density,
    random_hermitian,
    random_projector,
    random_unitary,
)
from zenolab.models import SIGMA_1, three_level_hamiltonian, three_level_partition
from zenolab.tables import read_csv

seeds = st.integers(min_value=0, max_value=2**32 - 1)
H3 = three_level_hamiltonian(1.0, 1.0)
PART3 = sb.ZenoPartition(three_level_partition())
SIGMA3_PART = sb.ZenoPartition.from_diagonal([0, 1])


def random_density(rng, dim, rank=None):
    rank = rank or dim
    x = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = x @ dagger(x)
    return rho / np.trace(rho).real


def random_partition(rng, dim, sizes):
    u = random_unitary(rng, dim)
    out, k = [], 0
    for s in sizes:
        v = u[:, k : k + s]
        out.append(v @ dagger(v))
        k += s
    return sb.ZenoPartition(tuple(out))


def test_partition_invariants():
    with pytest.raises(InvalidPartition):
        sb.ZenoPartition((np.diag([1, 0, 0]), np.diag([0, 1, 0])))
    with pytest.raises(InvalidPartition):
        sb.ZenoPartition((np.diag([1, 1, 0]), np.diag([0, 1, 1])))
    with pytest.raises(InvalidPartition):
        sb.ZenoPartition((np.diag([1, 0.5]), np.diag([0, 0.5])))
    with pytest.raises(InvalidPartition):
        sb.ZenoPartition(())
    assert PART3.ranks == [2, 1] and PART3.dim == 3 and len(PART3) == 2


def test_partition_from_eigenbasis():
    dec = hermitian_eig(H3)
    part = sb.ZenoPartition.from_eigenbasis(dec, [[0], [1, 2]])
    assert part.ranks == [1, 2]
    assert max_abs(sb.global_zeno_hamiltonian(H3, part) - H3) <= 1e-12


def test_nonselective_examples():
    rho = np.diag([0.2, 0.5, 0.3]).astype(complex)
    assert max_abs(sb.nonselective_project(rho, PART3) - rho) == 0
    plus = np.array([1, 1]) / math.sqrt(2)
    out = sb.nonselective_project(pure_density(plus), SIGMA3_PART)
    assert max_abs(out - np.eye(2) / 2) <= 1e-15
    psi = np.array([0, 1, 1]) / math.sqrt(2)
    rho = pure_density(psi)
    out = sb.nonselective_project(rho, PART3)
    assert out[1, 2] == 0 and out[2, 1] == 0
    assert sb.purity(out) < sb.purity(rho) - 0.1


@given(seed=seeds)
def test_nonselective_channel_properties(seed):
    rng = make_rng(seed)
    part = random_partition(rng, 5, (2, 1, 2))
    rho = random_density(rng, 5, rank=2)
    out = sb.nonselective_project(rho, part)
    assert abs(np.trace(out).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(out)[0] >= -1e-9
    assert max_abs(sb.nonselective_project(out, part) - out) <= 1e-12
    assert sb.purity(out) <= sb.purity(rho) + 1e-12
    if sb.offdiagonal_block_norm(rho, part) > 1e-6:
        assert sb.purity(out) < sb.purity(rho)


@given(seed=seeds, n=st.integers(1, 30), t=st.floats(0, 3))
def test_measurement_channel_properties(seed, n, t):
    rng = make_rng(seed)
    part = random_partition(rng, 4, (1, 3))
    h = random_hermitian(rng, 4)
    out = sb.evolve_with_measurements(random_density(rng, 4), h, part, n, t)
    assert abs(np.trace(out).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(out)[0] >= -1e-9


def test_measurement_trivial_cases(rng):
    h = random_hermitian(rng, 3)
    rho = random_density(rng, 3)
    u = propagator(h, 0.7)
    trivial = sb.ZenoPartition.trivial(3)
    assert max_abs(sb.evolve_with_measurements(rho, h, trivial, 1, 0.7) - u @ rho @ dagger(u)) <= 1e-13
    d = np.diag([0.5, -1.0, 2.0])
    rho = np.diag([0.3, 0.3, 0.4]).astype(complex)
    u = propagator(d, 1.1)
    for n in (1, 7):
        out = sb.evolve_with_measurements(rho, d, PART3, n, 1.1)
        assert max_abs(out - u @ rho @ dagger(u)) <= 1e-13


def test_measurement_channel_near_limit():
    rho = pure_density(basis_vector(3, 0))
    out = sb.evolve_with_measurements(rho, H3, PART3, 1000, 1.0)
    assert max_abs(out - sb.zeno_limit_channel(rho, H3, PART3, 1.0)) <= 5e-3


def test_branch_operators_sum_to_channel(rng):
    rho = random_density(rng, 3)
    n, t = 3, 0.9
    total = np.zeros((3, 3), dtype=complex)
    for rec in np.ndindex(*(2,) * n):
        b = sb.branch_operator(H3, PART3, rec, t)
        total += b @ rho @ dagger(b)
    assert max_abs(total - sb.evolve_with_measurements(rho, H3, PART3, n, t)) <= 1e-13


def test_limit_channel_examples():
    rho = pure_density(basis_vector(3, 0))
    out = sb.zeno_limit_channel(rho, three_level_hamiltonian(2.0, 5.0), PART3, math.pi / 4)
    assert abs(out[1, 1] - 1) <= 1e-12 and abs(out[2, 2]) <= 1e-15
    assert np.allclose(sb.sector_probabilities(out, PART3), [1, 0], atol=1e-12)
    d = np.diag([0.5, -1.0, 2.0])
    rho = np.diag([0.2, 0.3, 0.5]).astype(complex)
    u = propagator(d, 1.3)
    assert max_abs(sb.zeno_limit_channel(rho, d, PART3, 1.3) - u @ rho @ dagger(u)) <= 1e-13


def test_limit_channel_projects_coherent_input():
    psi = np.array([1, 0, 1]) / math.sqrt(2)
    out = sb.zeno_limit_channel(pure_density(psi), H3, PART3, 0.6)
    assert sb.offdiagonal_block_norm(out, PART3) <= 1e-15
    assert np.allclose(sb.sector_probabilities(out, PART3), [0.5, 0.5], atol=1e-12)


@given(seed=seeds, t=st.floats(0, 10))
def test_limit_channel_conserves_sectors(seed, t):
    rng = make_rng(seed)
    part = random_partition(rng, 5, (2, 2, 1))
    rho = random_density(rng, 5)
    before = sb.sector_probabilities(rho, part)
    after = sb.sector_probabilities(sb.zeno_limit_channel(rho, random_hermitian(rng, 5), part, t), part)
    assert np.max(np.abs(after - before)) <= 1e-10


def test_global_zeno_hamiltonian_examples(rng):
    h = random_hermitian(rng, 3)
    assert max_abs(sb.global_zeno_hamiltonian(h, sb.ZenoPartition.trivial(3)) - h) <= 1e-15
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.0
    assert np.array_equal(sb.global_zeno_hamiltonian(H3, PART3), expected)
    fine = sb.ZenoPartition.from_diagonal([0, 1, 2])
    assert max_abs(sb.global_zeno_hamiltonian(h, fine) - np.diag(np.diag(h))) <= 1e-15
    hz = sb.global_zeno_hamiltonian(h, PART3)
    for p in PART3:
        assert max_abs(hz @ p - p @ hz) <= 1e-10


def test_sector_probabilities_examples():
    assert np.allclose(sb.sector_probabilities(pure_density(basis_vector(3, 0)), PART3), [1, 0])
    assert np.allclose(sb.sector_probabilities(np.eye(3) / 3, PART3), [2 / 3, 1 / 3])


def test_offdiagonal_norm_examples():
    assert sb.offdiagonal_block_norm(np.diag([1, 2, 3]), PART3) <= 1e-12
    assert sb.offdiagonal_block_norm(SIGMA_1, SIGMA3_PART) == 1.0
    with pytest.raises(DimensionMismatch):
        sb.offdiagonal_block_norm(np.eye(2), PART3)


def test_switching_branch_vanishes():
    n = 1000
    rec = [0] * (n // 2) + [1] * (n - n // 2)
    b = sb.branch_operator(H3, PART3, rec, 1.0)
    assert sb.offdiagonal_block_norm(b, PART3) <= 10 / n


def test_leakage_is_first_order():
    rho = pure_density(basis_vector(3, 0))
    leak = []
    for n in (250, 500, 1000, 2000):
        out = sb.evolve_with_measurements(rho, H3, PART3, n, 1.0)
        leak.append(np.max(np.abs(sb.sector_probabilities(out, PART3) - [1, 0])))
    for a, b in zip(leak, leak[1:]):
        assert 0.4 <= b / a <= 0.7


def test_purity_examples():
    assert abs(sb.purity(pure_density(basis_vector(3, 1))) - 1) <= 1e-15
    assert abs(sb.purity(np.eye(4) / 4) - 0.25) <= 1e-15


def test_star_product_examples(rng):
    p = random_projector(rng, 4, 2)
    i = np.eye(4)
    assert max_abs(sb.star_product(i, i, p) - p) <= 1e-15
    assert max_abs(sb.star_product(p, p, p) - p) <= 1e-12
    with pytest.raises(DimensionMismatch):
        sb.star_product(np.eye(3), i, p)


@given(seed=seeds)
def test_star_product_algebra(seed):
    rng = make_rng(seed)
    p = random_projector(rng, 5, 3)
    a, b, c = (rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)) for _ in range(3))
    lhs = sb.star_product(sb.star_product(a, b, p), c, p)
    rhs = sb.star_product(a, sb.star_product(b, c, p), p)
    assert max_abs(lhs - rhs) <= 1e-10
    hom = sb.star_product(p @ a @ p, p @ b @ p, p)
    assert max_abs(hom - p @ (a @ p @ b) @ p) <= 1e-10


def test_sectors_csv(tmp_path):
    rho = pure_density(basis_vector(3, 0))
    times, states = sb.measurement_trajectory(rho, H3, PART3, 4, 1.0)
    header, rows = read_csv(sb.sectors_to_csv(times, states, PART3, tmp_path / "s.csv"))
    assert header == ["t", "p_1", "p_2", "purity"]
    assert len(rows) == 5 and rows[0] == [0.0, 1.0, 0.0, 1.0]
