import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qslkit.core import PAULIS, bloch_vector, qubit_density
from qslkit.errors import InvalidArgumentError
from qslkit.metrics import vqsl_qubit
from qslkit.phasespace import (
    phase_space_function,
    phase_space_purity_oracle,
    r_s,
    sphere_rule,
    vqsl_quadrature_oracle,
)

from .conftest import random_bloch, random_qubit


def test_sphere_rule():
    nodes, w = sphere_rule(16)
    assert w.sum() == pytest.approx(2.0)
    assert np.allclose(np.linalg.norm(nodes, axis=1), 1.0)
    assert np.allclose(w @ nodes, 0.0, atol=1e-14)
    with pytest.raises(InvalidArgumentError):
        sphere_rule(4)


def test_r_s_values():
    assert r_s(-1.0) == pytest.approx(0.5)
    assert r_s(0.0) == pytest.approx(math.sqrt(3) / 2)
    assert r_s(1.0) == pytest.approx(1.5)


def test_phase_space_function_normalized(rng):
    nodes, w = sphere_rule(32)
    b = random_bloch(rng)
    for s in (-1.0, 0.0, 1.0):
        assert w @ phase_space_function(b, s, nodes) == pytest.approx(1.0)


@pytest.mark.parametrize("s", [-2.0, 0.0, 1.0])
def test_pure_state_purity_is_one(rng, s):
    rho = random_qubit(rng, pure=True)
    assert phase_space_purity_oracle(rho, rho, s) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([-2.0, -1.0, 0.0, 1.0]))
def test_purity_oracle_matches_trace(seed, s):
    r = np.random.default_rng(seed)
    rho0, rhot = random_qubit(r), random_qubit(r)
    assert abs(phase_space_purity_oracle(rho0, rhot, s) - np.trace(rho0 @ rhot).real) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([-2.0, 0.0, 1.0]))
def test_vqsl_oracle_matches_closed_form(seed, s):
    r = np.random.default_rng(seed)
    rho0, rhot = random_qubit(r), random_qubit(r)
    hv = r.standard_normal(3)
    h = np.einsum("a,aij->ij", hv, PAULIS)
    closed = vqsl_qubit(s, bloch_vector(rho0), 2 * hv, bloch_vector(rhot))
    assert vqsl_quadrature_oracle(rho0, h, rhot, s) == pytest.approx(closed, rel=1e-4)


def test_vqsl_oracle_zero_for_stationary_state():
    rho = qubit_density([0, 0, 0.7])
    assert vqsl_quadrature_oracle(qubit_density([0.2, 0.1, 0]), PAULIS[2], rho, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_oracles_reject_neginf_and_large_s(rng):
    rho = random_qubit(rng)
    with pytest.raises(InvalidArgumentError):
        phase_space_purity_oracle(rho, rho, float("-inf"))
    with pytest.raises(InvalidArgumentError):
        vqsl_quadrature_oracle(rho, PAULIS[0], rho, 50.0)
