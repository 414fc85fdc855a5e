import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qslkit.core import (
    IDENTITY2,
    KET_E,
    KET_G,
    PAULIS,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Z,
    bloch_coeffs,
    bloch_vector,
    check_density,
    dagger,
    density_from_bloch,
    matrix_exponential,
    projector,
    purity,
    qubit_density,
    qubit_propagator,
    structure_constants,
    su_generators,
    thermal_state,
    trace_distance,
)
from qslkit.errors import DegenerateSpectrumError, InvalidArgumentError, NotAStateError

from .conftest import random_qubit


def test_basis_convention():
    assert np.allclose(SIGMA_Z @ KET_E, KET_E)
    assert np.allclose(SIGMA_MINUS @ KET_E, KET_G)
    assert np.allclose(bloch_vector(projector(KET_E)), [0, 0, 1])


def test_su2_generators_are_halved_paulis():
    assert np.allclose(su_generators(2), PAULIS / 2)
    g = su_generators(2)
    assert abs(np.trace(g[0] @ g[1])) < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_generators_orthonormal_and_traceless(n):
    g = su_generators(n)
    assert g.shape == (n * n - 1, n, n)
    assert np.allclose(np.trace(g, axis1=1, axis2=2), 0)
    assert np.allclose(np.einsum("aij,bji->ab", g, g), np.eye(n * n - 1) / 2)
    for t in g:
        assert np.allclose(t, dagger(t))


@pytest.mark.parametrize("n", [0, 1, 9, 2.0, True])
def test_generators_reject_bad_dimension(n):
    with pytest.raises(InvalidArgumentError):
        su_generators(n)


def test_su2_structure_constants_levi_civita():
    f = structure_constants(su_generators(2))
    eps = np.zeros((3, 3, 3))
    for (a, b, c), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (0, 2, 1): -1, (2, 1, 0): -1}.items():
        eps[a, b, c] = s
    assert np.allclose(f, eps)


def test_su3_gell_mann_values():
    f = structure_constants(su_generators(3))
    assert f[0, 1, 2] == pytest.approx(1.0, abs=1e-14)
    assert f[3, 4, 7] == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
    assert f[0, 0, 1] == 0.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_structure_constants_reconstruct_commutators(n):
    g = su_generators(n)
    f = structure_constants(g)
    comm = np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g)
    assert np.allclose(comm, 1j * np.einsum("abc,cij->abij", f, g), atol=1e-13)
    assert np.allclose(f, -np.swapaxes(f, 0, 1))
    assert np.allclose(f, -np.swapaxes(f, 1, 2))


def test_structure_constants_reject_non_orthonormal():
    with pytest.raises(InvalidArgumentError):
        structure_constants(PAULIS)


def test_bloch_examples():
    g = su_generators(2)
    assert np.allclose(bloch_coeffs(IDENTITY2 / 2, g), 0)
    assert np.allclose(bloch_coeffs(projector(KET_E), g), [0, 0, 1])
    assert np.allclose(density_from_bloch([0, 0, 0], g), IDENTITY2 / 2)
    plus = np.array([1, 1]) / math.sqrt(2)
    assert np.allclose(density_from_bloch([1, 0, 0], g), projector(plus))
    with pytest.raises(NotAStateError):
        density_from_bloch([0, 0, 1.5], g)


def test_bloch_round_trip_qutrit(rng):
    g = su_generators(3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rho = a @ dagger(a)
    rho /= np.trace(rho)
    assert np.allclose(density_from_bloch(bloch_coeffs(rho, g), g), rho, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bloch_round_trip_qubit(seed):
    rho = random_qubit(np.random.default_rng(seed))
    g = su_generators(2)
    assert np.max(np.abs(density_from_bloch(bloch_coeffs(rho, g), g) - rho)) < 1e-12


def test_check_density_errors():
    with pytest.raises(NotAStateError):
        check_density(np.eye(2))
    with pytest.raises(NotAStateError):
        check_density(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(NotAStateError):
        check_density(np.diag([1.5, -0.5]))
    with pytest.raises(NotAStateError):
        check_density(np.ones(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_exponential_of_anti_hermitian_is_unitary(seed, n):
    r = np.random.default_rng(seed)
    a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    h = a + dagger(a)
    u = matrix_exponential(-1j * h)
    assert np.max(np.abs(u @ dagger(u) - np.eye(n))) < 1e-12


def test_exponential_general_matches_series():
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    assert np.allclose(matrix_exponential(a), [[1, 1], [0, 1]])
    with pytest.raises(InvalidArgumentError):
        matrix_exponential(np.ones((2, 3)))


def test_qubit_propagator_matches_matrix_exponential(rng):
    for _ in range(20):
        c = rng.standard_normal(4)
        h = c[0] * IDENTITY2 + np.einsum("a,aij->ij", c[1:], PAULIS)
        dt = rng.random() * 3
        assert np.allclose(qubit_propagator(h, dt), matrix_exponential(-1j * dt * h), atol=1e-13)
    assert np.allclose(qubit_propagator(np.zeros((2, 2), complex), 1.0), IDENTITY2)


def test_thermal_state_limits():
    h = 0.3 * SIGMA_X + 0.7 * SIGMA_Z
    assert np.allclose(thermal_state(h, 0.0), IDENTITY2 / 2)
    ground = thermal_state(h, math.inf)
    w, v = np.linalg.eigh(h)
    assert np.allclose(ground, projector(v[:, 0]))
    assert np.allclose(thermal_state(h, 1e30), ground)
    with pytest.raises(DegenerateSpectrumError):
        thermal_state(IDENTITY2, math.inf)
    with pytest.raises(InvalidArgumentError):
        thermal_state(h, -1.0)


@pytest.mark.parametrize("beta", [0.1, 1.0, 7.0])
def test_thermal_bloch_oracle(beta):
    delta, g0 = 0.0628, 0.1257
    e0 = math.hypot(delta, g0)
    rho = thermal_state(delta * SIGMA_X + g0 * SIGMA_Z, beta)
    expected = -math.tanh(beta * e0) * np.array([delta, 0.0, g0]) / e0
    assert np.allclose(bloch_vector(rho), expected, atol=1e-14)


def test_trace_distance_and_purity():
    e, g = projector(KET_E), projector(KET_G)
    assert trace_distance(e, g) == pytest.approx(1.0)
    assert trace_distance(e, e) == pytest.approx(0.0)
    assert purity(IDENTITY2 / 2) == pytest.approx(0.5)
    assert np.allclose(purity(np.stack([e, IDENTITY2 / 2])), [1.0, 0.5])
    assert np.allclose(qubit_density([0, 0, 1]), e)
