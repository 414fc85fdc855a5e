"""Finite-shot single-qubit tomography in the x, y and z bases.

Measurement always projects onto |e>.  The x and y bases are reached with a
pi/2 carrier pulse before readout (phase pi/2 for x, phase 0 for y), using
the pulse convention of ``qslkit.lz.carrier_pulse``; with that convention
P_e^i = (1 + S_i)/2 and S_i = tr(sigma_i rho).  Whether the hardware phase
reference has the same sense is not knowable from the counts alone; it
would only flip the sign of S_x and S_y together.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import KET_E, check_density, dagger, qubit_density
from .errors import InvalidArgumentError
from .lz import carrier_pulse

EXACT = "exact"
BASES = ("x", "y", "z")
ANALYSIS_PULSES = {"x": (math.pi / 2, math.pi / 2), "y": (math.pi / 2, 0.0), "z": None}


@dataclass(frozen=True)
class MeasurementRecord:
    basis: str
    shots: object  # int, or EXACT
    excited_counts: float  # an integer count, or the probability for EXACT records
    seed: object = None

    @property
    def p_hat(self):
        return self.excited_counts if self.shots == EXACT else self.excited_counts / self.shots


@dataclass(frozen=True)
class StokesVector:
    sx: float
    sy: float
    sz: float

    def as_array(self):
        return np.array([self.sx, self.sy, self.sz])


def analysis_rotation(basis):
    if basis not in ANALYSIS_PULSES:
        raise InvalidArgumentError(f"basis must be one of {BASES}, got {basis!r}")
    pulse = ANALYSIS_PULSES[basis]
    return np.eye(2, dtype=complex) if pulse is None else carrier_pulse(*pulse)


def excited_probability(rho, basis):
    u = analysis_rotation(basis)
    rot = u @ np.asarray(rho) @ dagger(u)
    return float(np.clip((KET_E.conj() @ rot @ KET_E).real, 0.0, 1.0))


def measure_populations(rho, basis, shots, seed=None, rng=None):
    """Simulate ``shots`` projective readouts of |e> after the analysis pulse.

    ``shots=EXACT`` returns the probability itself.  Pass either a seed or a
    numpy Generator.
    """
    rho = check_density(rho)
    p = excited_probability(rho, basis)
    if shots == EXACT:
        return MeasurementRecord(basis, EXACT, p, seed)
    if isinstance(shots, bool) or not isinstance(shots, (int, np.integer)) or shots <= 0:
        raise InvalidArgumentError(f"shots must be a positive integer or EXACT, got {shots!r}")
    gen = rng if rng is not None else np.random.default_rng(seed)
    return MeasurementRecord(basis, int(shots), int(gen.binomial(shots, p)), seed)


def stokes_from_records(records):
    by_basis = {r.basis: r for r in records}
    missing = [b for b in BASES if b not in by_basis]
    if missing:
        raise InvalidArgumentError(f"missing measurement record for basis {missing}")
    return StokesVector(*(2.0 * by_basis[b].p_hat - 1.0 for b in BASES))


def reconstruct_density(stokes):
    """(I + S.sigma)/2, after radially projecting S onto the unit ball if |S| > 1."""
    s = stokes.as_array() if isinstance(stokes, StokesVector) else np.asarray(stokes, dtype=float)
    norm = float(np.linalg.norm(s))
    if norm > 1.0:
        s = s / norm
    return qubit_density(s)


def tomography_rows(times, states, shots, seed):
    """Measure every state in all three bases; one row per (time, basis).

    A single generator seeded once drives all draws so the table is
    reproducible from the seed.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for t, rho in zip(times, states):
        for basis in BASES:
            rec = measure_populations(rho, basis, shots, seed=seed, rng=rng)
            rows.append({
                "t_us": float(t),
                "basis": basis,
                "shots": rec.shots,
                "p_hat": rec.p_hat,
                "stokes_component": 2.0 * rec.p_hat - 1.0,
            })
    return rows


def write_tomography_csv(rows, path):
    cols = ["t_us", "basis", "shots", "p_hat", "stokes_component"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
