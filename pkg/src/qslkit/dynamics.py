"""Time evolution of qubit (or small N-level) density matrices."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    SIGMA_MINUS,
    bloch_vector,
    check_density,
    dagger,
    matrix_exponential,
    purity,
    qubit_propagator,
)
from .errors import InvalidArgumentError, NumericalError

TRACE_ABORT = 1e-6
PSD_ABORT = 1e-9
RK4_SAFETY = 0.01


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    n_output: int = 2001
    substeps_per_output: int = 1

    def __post_init__(self):
        if not (self.t1 > self.t0):
            raise InvalidArgumentError(f"time grid needs t1 > t0, got [{self.t0}, {self.t1}]")
        if self.n_output < 2 or self.substeps_per_output < 1:
            raise InvalidArgumentError("time grid needs n_output >= 2 and substeps_per_output >= 1")

    @property
    def times(self):
        return np.linspace(self.t0, self.t1, self.n_output)

    def refined(self, factor=2):
        return TimeGrid(self.t0, self.t1, self.n_output, self.substeps_per_output * factor)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, N, N)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def bloch(self):
        return bloch_vector(self.states)

    def purities(self):
        return purity(self.states)

    def to_csv(self, path):
        b = self.bloch()
        p = self.purities()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_us", "bx", "by", "bz", "purity"])
            for t, (bx, by, bz), pu in zip(self.times, b, p):
                w.writerow([repr(float(t)), repr(float(bx)), repr(float(by)), repr(float(bz)), repr(float(pu))])


def _sample_hamiltonian(hamiltonian, t):
    h = np.asarray(hamiltonian(t), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - dagger(h))) > 1e-12 * scale:
        raise NumericalError(f"Hamiltonian is not Hermitian at t = {t!r}", time=t)
    return h


def propagate_unitary(hamiltonian, rho0, grid):
    """Piecewise-constant midpoint exponential integrator for rho' = -i[H(t), rho].

    Each output interval is split into ``grid.substeps_per_output`` substeps;
    on each substep rho <- U rho U^dagger with U = exp(-i H(t_mid) dt).
    """
    rho = check_density(rho0, "rho0")
    times = grid.times
    n = rho.shape[0]
    states = np.empty((len(times), n, n), dtype=complex)
    states[0] = rho
    m = grid.substeps_per_output
    for i in range(len(times) - 1):
        ta, tb = times[i], times[i + 1]
        dt = (tb - ta) / m
        for k in range(m):
            tm = ta + (k + 0.5) * dt
            h = _sample_hamiltonian(hamiltonian, tm)
            u = qubit_propagator(h, dt) if n == 2 else matrix_exponential(-1j * dt * h)
            rho = u @ rho @ dagger(u)
        states[i + 1] = rho
    return Trajectory(times, states, {"integrator": "midpoint-exponential", "grid": grid})


def propagate_pulse_sequence(seq, rho0):
    """Exact evolution through a piecewise-constant pulse table.

    States are recorded at t = 0 and at every step boundary.
    """
    if len(seq.steps) == 0:
        raise InvalidArgumentError("empty pulse sequence")
    rho = check_density(rho0, "rho0")
    times = [0.0]
    states = [rho]
    t = 0.0
    for step in seq.steps:
        u = matrix_exponential(-1j * step.duration * step.hamiltonian())
        rho = u @ rho @ dagger(u)
        t += step.duration
        times.append(t)
        states.append(rho)
    return Trajectory(np.array(times), np.array(states), {"integrator": "exact-step"})


@dataclass(frozen=True)
class LindbladModel:
    """rho' = -i[H(t), rho] + (gamma/2)(2 L rho L^+ - L^+L rho - rho L^+L)."""

    hamiltonian: object
    gamma_eff: float
    collapse: np.ndarray = field(default_factory=lambda: SIGMA_MINUS.copy())

    def __post_init__(self):
        if not (math.isfinite(self.gamma_eff) and self.gamma_eff >= 0):
            raise InvalidArgumentError(f"gamma_eff must be >= 0, got {self.gamma_eff!r}")


def _lindblad_rhs(h, rho, gamma, lop, lop_d, ldl):
    out = -1j * (h @ rho - rho @ h)
    if gamma:
        out = out + gamma * (lop @ rho @ lop_d - 0.5 * (ldl @ rho + rho @ ldl))
    return out


def _rk4_step(h_a, h_m, h_b, rho, dt, gamma, ops):
    k1 = _lindblad_rhs(h_a, rho, gamma, *ops)
    k2 = _lindblad_rhs(h_m, rho + 0.5 * dt * k1, gamma, *ops)
    k3 = _lindblad_rhs(h_m, rho + 0.5 * dt * k2, gamma, *ops)
    k4 = _lindblad_rhs(h_b, rho + dt * k3, gamma, *ops)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _collapse_ops(collapse):
    lop = np.asarray(collapse, dtype=complex)
    lop_d = dagger(lop)
    return lop, lop_d, lop_d @ lop


def _rate_scale(h, gamma):
    return max(float(np.max(np.linalg.norm(h, ord=2, axis=(-2, -1)))), gamma, 1e-300)


def _check_step(rho, t):
    if not np.all(np.isfinite(rho)):
        raise NumericalError(f"state diverged at t = {t!r}; use a finer time grid", time=t)
    drift = np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1).real - 1.0))
    if drift > TRACE_ABORT:
        raise NumericalError(f"trace drift {drift:.2e} at t = {t!r}; use a finer time grid", time=t)
    lam = np.min(np.linalg.eigvalsh(0.5 * (rho + dagger(rho))))
    if lam < -PSD_ABORT:
        raise NumericalError(f"negative eigenvalue {lam:.2e} at t = {t!r}; use a finer time grid", time=t)


def propagate_lindblad(model, rho0, grid, dt_max=None):
    """Fixed-step RK4 for the single-channel Lindblad equation.

    Each output interval uses at least ``grid.substeps_per_output`` steps and
    a step no longer than 0.01 / max(||H||, gamma) (or ``dt_max``).
    """
    rho = check_density(rho0, "rho0")
    ops = _collapse_ops(model.collapse)
    gamma = model.gamma_eff
    times = grid.times
    states = np.empty((len(times),) + rho.shape, dtype=complex)
    states[0] = rho
    for i in range(len(times) - 1):
        ta, tb = times[i], times[i + 1]
        h_probe = _sample_hamiltonian(model.hamiltonian, 0.5 * (ta + tb))
        dt_lim = dt_max if dt_max is not None else RK4_SAFETY / _rate_scale(h_probe, gamma)
        m = max(grid.substeps_per_output, math.ceil((tb - ta) / dt_lim))
        dt = (tb - ta) / m
        h_b = _sample_hamiltonian(model.hamiltonian, ta)
        for k in range(m):
            t = ta + k * dt
            h_a = h_b
            h_m = _sample_hamiltonian(model.hamiltonian, t + 0.5 * dt)
            h_b = _sample_hamiltonian(model.hamiltonian, t + dt)
            rho = _rk4_step(h_a, h_m, h_b, rho, dt, gamma, ops)
        _check_step(rho, tb)
        states[i + 1] = rho
    return Trajectory(times, states, {"integrator": "rk4", "grid": grid, "gamma_eff": gamma})


def propagate_lindblad_piecewise(hams, durations, rho0, gamma, collapse=SIGMA_MINUS, dt_max=None):
    """RK4 through piecewise-constant Hamiltonians, vectorized over a batch.

    ``hams`` has shape (..., n_steps, N, N) and ``durations`` shape (n_steps,).
    Returns the states at t = 0 and after every step, shape
    (..., n_steps + 1, N, N).  Used by the pulse optimizer to evaluate a whole
    population at once.
    """
    hams = np.asarray(hams, dtype=complex)
    durations = np.asarray(durations, dtype=float)
    rho0 = check_density(rho0, "rho0")
    batch = hams.shape[:-3]
    n_steps = hams.shape[-3]
    if durations.shape != (n_steps,) or np.any(durations <= 0):
        raise InvalidArgumentError("durations must be positive, one per step")
    ops = _collapse_ops(collapse)
    rho = np.broadcast_to(rho0, batch + rho0.shape).copy()
    out = np.empty(batch + (n_steps + 1,) + rho0.shape, dtype=complex)
    out[..., 0, :, :] = rho
    t = 0.0
    for k in range(n_steps):
        h = hams[..., k, :, :]
        dt_lim = dt_max if dt_max is not None else RK4_SAFETY / _rate_scale(h, gamma)
        m = max(1, math.ceil(durations[k] / dt_lim))
        dt = durations[k] / m
        for _ in range(m):
            rho = _rk4_step(h, h, h, rho, dt, gamma, ops)
        t += durations[k]
        _check_step(rho, t)
        out[..., k + 1, :, :] = rho
    return out
