"""Landau-Zener model with a counterdiabatic (transitionless) field.

H0(t) = delta*sigma_x + g(t)*sigma_z, with instantaneous eigenstates

    |psi+> = cos(theta)|e> + sin(theta)|g>,   |psi-> = sin(theta)|e> - cos(theta)|g>,
    theta(t) = atan2(delta, g(t)) / 2,

(|e> is the sigma_z = +1 level, see ``qslkit.core``).  The counterdiabatic
term is H1(t) = xi(t)*sigma_y with xi = -delta*g'/(2(delta^2 + g^2)) = theta'.

The laser form of the combined Hamiltonian is

    H = omega_eff * (exp(i phi) sigma_+ + exp(-i phi) sigma_-) + g * sigma_z
      = omega_eff * (cos(phi) sigma_x - sin(phi) sigma_y) + g * sigma_z,

so omega_eff = sqrt(delta^2 + xi^2) and phi = atan2(-xi, delta).  Writing the
Rabi term with a factor 1/2 instead gives the alternative parameterization
omega' = 2*omega_eff = sqrt(4 delta^2 + 4 xi^2); tables produced here always
regenerate delta*sigma_x + xi*sigma_y + g*sigma_z exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import SIGMA_X, SIGMA_Y, SIGMA_Z, matrix_exponential
from .errors import DegenerateSpectrumError, InvalidArgumentError, OutOfRangeError

_T_SLACK = 1e-12


@dataclass(frozen=True)
class CosineSchedule:
    """g(t) = (omega0/2) cos(pi t / tau)."""

    omega0: float
    tau: float
    kind: str = field(default="cosine", init=False)

    def __post_init__(self):
        _check_tau(self.tau)

    def __call__(self, t):
        x = math.pi * t / self.tau
        return 0.5 * self.omega0 * math.cos(x), -0.5 * self.omega0 * math.pi / self.tau * math.sin(x)


@dataclass(frozen=True)
class LinearSchedule:
    """g(t) = a - b t / tau."""

    a: float
    b: float
    tau: float
    kind: str = field(default="linear", init=False)

    def __post_init__(self):
        _check_tau(self.tau)

    def __call__(self, t):
        return self.a - self.b * t / self.tau, -self.b / self.tau


@dataclass(frozen=True, eq=False)
class TableSchedule:
    """Cubic-spline interpolation through sampled (t, g) points starting at t = 0."""

    times: tuple
    values: tuple
    kind: str = field(default="piecewise-table", init=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("table schedule needs >= 2 strictly increasing times starting at 0")
        if len(self.values) != len(t) or not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("table schedule values must be finite and match the times")
        object.__setattr__(self, "_spline", CubicSpline(t, np.asarray(self.values, dtype=float)))

    @property
    def tau(self):
        return float(self.times[-1])

    def __call__(self, t):
        return float(self._spline(t)), float(self._spline(t, 1))


def _check_tau(tau):
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidArgumentError(f"tau must be positive and finite, got {tau!r}")


def g_eval(schedule, t):
    """Return (g(t), g'(t)); t must lie in [0, tau]."""
    tau = schedule.tau
    if not (-_T_SLACK * tau <= t <= tau * (1 + _T_SLACK)):
        raise OutOfRangeError(f"t = {t!r} outside [0, {tau!r}]")
    t = min(max(t, 0.0), tau)
    return schedule(t)


@dataclass(frozen=True)
class LZParams:
    delta: float
    schedule: object

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta!r}")

    @property
    def tau(self):
        return self.schedule.tau


class Eigensystem(NamedTuple):
    theta: float
    eigvals: tuple  # (eps_plus, eps_minus)
    eigvecs: tuple  # (psi_plus, psi_minus)


class EffectiveControls(NamedTuple):
    omega_eff: float
    phase_eff: float
    detuning: float
    xi: float


def h0(lz, t):
    g, _ = g_eval(lz.schedule, t)
    return lz.delta * SIGMA_X + g * SIGMA_Z


def _gap_sq(lz, g):
    e2 = lz.delta ** 2 + g ** 2
    if e2 == 0.0:
        raise DegenerateSpectrumError("delta = g = 0: H0 has a degenerate spectrum")
    return e2


def instantaneous_eigensystem(lz, t):
    g, _ = g_eval(lz.schedule, t)
    e = math.sqrt(_gap_sq(lz, g))
    theta = 0.5 * math.atan2(lz.delta, g)
    c, s = math.cos(theta), math.sin(theta)
    psi_p = np.array([c, s], dtype=complex)
    psi_m = np.array([s, -c], dtype=complex)
    return Eigensystem(theta, (e, -e), (psi_p, psi_m))


def mixing_angle_rate(lz, t):
    """theta'(t) obtained from the eigenvectors: -<psi-|dH0/dt|psi+> / (eps+ - eps-)."""
    _, gp = g_eval(lz.schedule, t)
    es = instantaneous_eigensystem(lz, t)
    psi_p, psi_m = es.eigvecs
    dh = gp * SIGMA_Z
    return -float((psi_m.conj() @ dh @ psi_p).real) / (es.eigvals[0] - es.eigvals[1])


def xi_coefficient(lz, t):
    """sigma_y coefficient of the counterdiabatic field."""
    g, gp = g_eval(lz.schedule, t)
    return -lz.delta * gp / (2.0 * _gap_sq(lz, g))


def counterdiabatic_h1(lz, t):
    xi = xi_coefficient(lz, t)
    rate = mixing_angle_rate(lz, t)
    if abs(xi - rate) > 1e-12 * max(1.0, abs(xi)):
        raise ArithmeticError(f"counterdiabatic coefficient {xi!r} disagrees with theta' = {rate!r}")
    return xi * SIGMA_Y


def total_hamiltonian(lz, t, counterdiabatic=True):
    g, gp = g_eval(lz.schedule, t)
    h = lz.delta * SIGMA_X + g * SIGMA_Z
    if counterdiabatic:
        h = h + (-lz.delta * gp / (2.0 * _gap_sq(lz, g))) * SIGMA_Y
    return h


def effective_controls(lz, t, counterdiabatic=True):
    g, _ = g_eval(lz.schedule, t)
    xi = xi_coefficient(lz, t) if counterdiabatic else 0.0
    return EffectiveControls(math.hypot(lz.delta, xi), math.atan2(-xi, lz.delta), g, xi)


def laser_hamiltonian(omega_eff, phase_eff, detuning):
    """omega (e^{i phi} sigma_+ + h.c.) + detuning sigma_z."""
    return omega_eff * (math.cos(phase_eff) * SIGMA_X - math.sin(phase_eff) * SIGMA_Y) + detuning * SIGMA_Z


def carrier_pulse(theta, phi):
    """Resonant carrier rotation of area theta and laser phase phi.

    Generated by (Omega/2)(e^{i phi} sigma_+ + h.c.) for a time theta/Omega,
    i.e. exp(-i theta/2 (cos(phi) sigma_x - sin(phi) sigma_y)).  With this
    sign, phi = pi/2 maps the +x Bloch direction onto +z and phi = 0 maps +y
    onto +z.
    """
    return matrix_exponential(-0.5j * theta * (math.cos(phi) * SIGMA_X - math.sin(phi) * SIGMA_Y))


@dataclass(frozen=True)
class PulseStep:
    duration: float
    omega_eff: float
    phase_eff: float
    detuning: float

    def hamiltonian(self):
        return laser_hamiltonian(self.omega_eff, self.phase_eff, self.detuning)


CSV_COLUMNS = ("step_index", "duration_us", "omega_eff_rad_per_us", "phase_eff_rad", "detuning_rad_per_us")


@dataclass(frozen=True)
class PulseSequence:
    steps: tuple

    def __post_init__(self):
        if any(not (s.duration > 0) for s in self.steps):
            raise InvalidArgumentError("pulse step durations must be positive")

    @property
    def total_duration(self):
        return math.fsum(s.duration for s in self.steps)

    def __len__(self):
        return len(self.steps)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for i, s in enumerate(self.steps):
                w.writerow([i, repr(s.duration), repr(s.omega_eff), repr(s.phase_eff), repr(s.detuning)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["step_index"]))
        return cls(tuple(
            PulseStep(float(r["duration_us"]), float(r["omega_eff_rad_per_us"]),
                      float(r["phase_eff_rad"]), float(r["detuning_rad_per_us"]))
            for r in rows
        ))


def discretize(lz, n_steps, counterdiabatic=True):
    """Equal-duration staircase with controls sampled at step midpoints."""
    if isinstance(n_steps, bool) or not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise InvalidArgumentError(f"n_steps must be an integer >= 1, got {n_steps!r}")
    dt = lz.tau / n_steps
    steps = []
    for k in range(n_steps):
        c = effective_controls(lz, (k + 0.5) * dt, counterdiabatic)
        steps.append(PulseStep(dt, c.omega_eff, c.phase_eff, c.detuning))
    return PulseSequence(tuple(steps))
