import math

import numpy as np
import pytest

from qslkit.core import IDENTITY2, KET_E, KET_G, SIGMA_X, SIGMA_Z, projector, trace_distance
from qslkit.dynamics import (
    LindbladModel,
    TimeGrid,
    Trajectory,
    propagate_lindblad,
    propagate_lindblad_piecewise,
    propagate_pulse_sequence,
    propagate_unitary,
)
from qslkit.errors import InvalidArgumentError, NumericalError
from qslkit.lz import CosineSchedule, LZParams, PulseSequence, PulseStep, discretize, total_hamiltonian
from qslkit.metrics import eigenstate_fidelities

OMEGA0 = 2 * math.pi * 0.04
PLUS = 0.5 * (IDENTITY2 + SIGMA_X)


@pytest.fixture
def fig2():
    return LZParams(OMEGA0 / 4, CosineSchedule(OMEGA0, 50.0))


def test_time_grid_validation():
    with pytest.raises(InvalidArgumentError):
        TimeGrid(1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        TimeGrid(0.0, 1.0, n_output=1)
    g = TimeGrid(0.0, 1.0, 11, 2)
    assert g.refined().substeps_per_output == 4
    assert np.allclose(g.times, np.linspace(0, 1, 11))


def test_zero_hamiltonian_is_identity():
    traj = propagate_unitary(lambda t: np.zeros((2, 2)), PLUS, TimeGrid(0, 3, 31))
    assert np.allclose(traj.states, PLUS)


def test_example1_bloch_rotation():
    traj = propagate_unitary(lambda t: 0.5 * SIGMA_Z, PLUS, TimeGrid(0, 2 * math.pi, 401))
    t = traj.times
    # db/dt = h x b with h = (0, 0, 1): counterclockwise about +z
    expected = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    assert np.max(np.abs(traj.bloch() - expected)) < 1e-12


def test_transitionless_tracking(fig2):
    from qslkit.lz import instantaneous_eigensystem

    psi = instantaneous_eigensystem(fig2, 0.0).eigvecs[0]
    traj = propagate_unitary(lambda t: total_hamiltonian(fig2, t), projector(psi), TimeGrid(0, 50, 501, 4))
    assert np.min(eigenstate_fidelities(fig2, traj)) > 0.999
    assert np.max(np.abs(traj.purities() - 1.0)) < 1e-12
    assert np.max(np.abs(np.trace(traj.states, axis1=1, axis2=2) - 1.0)) < 1e-12


def test_midpoint_converges_second_order(fig2):
    from qslkit.lz import instantaneous_eigensystem

    rho0 = projector(instantaneous_eigensystem(fig2, 0.0).eigvecs[0])
    ham = lambda t: total_hamiltonian(fig2, t)  # noqa: E731
    finals = [propagate_unitary(ham, rho0, TimeGrid(0, 50, 51, m)).bloch()[-1] for m in (4, 8, 16)]
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    assert e1 / e2 > 3.5


def test_halving_default_grid_moves_bloch_below_1e8(fig2):
    from qslkit.lz import instantaneous_eigensystem

    rho0 = projector(instantaneous_eigensystem(fig2, 0.0).eigvecs[0])
    ham = lambda t: total_hamiltonian(fig2, t)  # noqa: E731
    grid = TimeGrid(0, 50, 2001, 10)
    a = propagate_unitary(ham, rho0, grid).bloch()
    b = propagate_unitary(ham, rho0, grid.refined()).bloch()
    assert np.max(np.abs(a - b)) < 1e-8


def test_non_hermitian_hamiltonian_raises():
    bad = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(NumericalError) as err:
        propagate_unitary(lambda t: bad, PLUS, TimeGrid(0, 1, 3))
    assert err.value.time == 0.25


def test_pulse_sequence_zero_step_is_identity():
    seq = PulseSequence((PulseStep(1.0, 0.0, 0.0, 0.0),))
    traj = propagate_pulse_sequence(seq, PLUS)
    assert np.allclose(traj.states[-1], PLUS)
    with pytest.raises(InvalidArgumentError):
        propagate_pulse_sequence(PulseSequence(()), PLUS)


def test_twenty_step_sequence_close_to_continuous(fig2):
    from qslkit.lz import instantaneous_eigensystem

    rho0 = projector(instantaneous_eigensystem(fig2, 0.0).eigvecs[0])
    cont = propagate_unitary(lambda t: total_hamiltonian(fig2, t), rho0, TimeGrid(0, 50, 2001, 4))
    pulsed = propagate_pulse_sequence(discretize(fig2, 20), rho0)
    assert len(pulsed) == 21
    assert trace_distance(pulsed.states[-1], cont.states[-1]) < 5e-3
    fine = propagate_pulse_sequence(discretize(fig2, 200), rho0)
    assert trace_distance(fine.states[-1], cont.states[-1]) < 1e-3


def test_lindblad_without_decay_matches_unitary(fig2):
    from qslkit.lz import instantaneous_eigensystem

    rho0 = projector(instantaneous_eigensystem(fig2, 0.0).eigvecs[0])
    ham = lambda t: total_hamiltonian(fig2, t)  # noqa: E731
    grid = TimeGrid(0, 50, 101)
    lind = propagate_lindblad(LindbladModel(ham, 0.0), rho0, grid)
    unit = propagate_unitary(ham, rho0, TimeGrid(0, 50, 101, 200))
    assert np.max(np.abs(lind.states - unit.states)) < 1e-8


def test_lindblad_free_decay():
    gamma = 0.3
    grid = TimeGrid(0, 10, 41)
    traj = propagate_lindblad(LindbladModel(lambda t: np.zeros((2, 2)), gamma), projector(KET_E), grid)
    pe = traj.states[:, 0, 0].real
    assert np.max(np.abs(pe - np.exp(-gamma * grid.times))) < 1e-10
    long = propagate_lindblad(LindbladModel(lambda t: np.zeros((2, 2)), 1.0), PLUS, TimeGrid(0, 60, 7))
    assert trace_distance(long.states[-1], projector(KET_G)) < 1e-12


def test_lindblad_preserves_trace_and_positivity(fig2):
    model = LindbladModel(lambda t: total_hamiltonian(fig2, t), 0.25)
    traj = propagate_lindblad(model, PLUS, TimeGrid(0, 50, 201))
    assert np.max(np.abs(np.trace(traj.states, axis1=1, axis2=2).real - 1)) < 1e-10
    assert np.min(np.linalg.eigvalsh(traj.states)) >= -1e-9


def test_lindblad_rk4_fourth_order():
    model = LindbladModel(lambda t: 0.4 * SIGMA_X + 0.1 * math.cos(t) * SIGMA_Z, 0.2)
    grid = TimeGrid(0, 5, 2)
    res = [propagate_lindblad(model, PLUS, grid, dt_max=dt).states[-1] for dt in (0.4, 0.2, 0.1)]
    r = np.linalg.norm(res[0] - res[1]) / np.linalg.norm(res[1] - res[2])
    assert r > 12


def test_lindblad_aborts_on_coarse_step():
    model = LindbladModel(lambda t: 50.0 * SIGMA_X, 0.0)
    with pytest.raises(NumericalError):
        propagate_lindblad(model, projector(KET_G), TimeGrid(0, 10, 2), dt_max=1.0)


def test_piecewise_batch_matches_single():
    hams = np.stack([0.3 * SIGMA_X, 0.2 * SIGMA_Z + 0.1 * SIGMA_X])
    batch = np.stack([hams, 2 * hams])
    out = propagate_lindblad_piecewise(batch, [1.0, 2.0], projector(KET_G), 0.1)
    assert out.shape == (2, 3, 2, 2)
    single = propagate_lindblad_piecewise(2 * hams, [1.0, 2.0], projector(KET_G), 0.1)
    assert np.allclose(out[1], single, atol=1e-15)
    with pytest.raises(InvalidArgumentError):
        propagate_lindblad_piecewise(hams, [1.0], projector(KET_G), 0.1)


def test_trajectory_csv(tmp_path):
    traj = propagate_unitary(lambda t: 0.5 * SIGMA_Z, PLUS, TimeGrid(0, 1, 5))
    traj.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t_us,bx,by,bz,purity"
    assert len(lines) == 6
    assert isinstance(traj, Trajectory)
