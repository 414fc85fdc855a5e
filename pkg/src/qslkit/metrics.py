"""Speed, cost and speed-limit functionals for qubit trajectories.

The phase-space index s is a plain float; ``NEG_INF = float('-inf')`` is the
optimal member of the family and makes 3**s exactly zero.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import argrelmin

from .core import PAULIS, bloch_vector, is_hermitian
from .errors import InvalidArgumentError
from .lz import counterdiabatic_h1, instantaneous_eigensystem, mixing_angle_rate

log = logging.getLogger(__name__)

NEG_INF = float("-inf")
S_MAX = 600.0
COST_FLOOR = 1e-12
RESIDUAL_SENTINEL = 2.0
PRIOR_SINGULAR = 1e-6


def check_s(s):
    s = float(s)
    if s == NEG_INF:
        return s
    if not math.isfinite(s) or abs(s) > S_MAX:
        raise InvalidArgumentError(f"s must be finite with |s| <= {S_MAX:g}, or -inf; got {s!r}")
    return s


def s_label(s):
    return "neginf" if s == NEG_INF else f"{s:g}"


def three_pow(s):
    return 0.0 if s == NEG_INF else 3.0 ** check_s(s)


def _same_dim(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def relative_purity(rho0, rhot):
    """P_t = tr(rho0 rho_t)."""
    rho0, rhot = _same_dim(rho0, rhot)
    return float(np.einsum("ij,ji->", rho0, rhot).real)


def speed(rho0, h, rhot):
    """|dP/dt| = |tr(rho0 [H, rho_t])| along the unitary flow (hbar = 1)."""
    rho0, rhot = _same_dim(rho0, rhot)
    h = np.asarray(h)
    if not is_hermitian(h, tol=1e-12 * max(1.0, float(np.max(np.abs(h))))):
        raise InvalidArgumentError("speed: H must be Hermitian")
    comm = h @ rhot - rhot @ h
    return abs(complex(np.einsum("ij,ji->", rho0, comm)).imag)


def cost_rate(lz, t):
    """Frobenius norm of the counterdiabatic field, checked against sqrt(2)|theta'|."""
    frob = float(np.linalg.norm(counterdiabatic_h1(lz, t)))
    via_angle = math.sqrt(2.0) * abs(mixing_angle_rate(lz, t))
    if abs(frob - via_angle) > 1e-12 * max(1.0, frob):
        raise ArithmeticError(f"cost rate paths disagree: {frob!r} vs {via_angle!r}")
    return frob


def _qubit_vec(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidArgumentError(f"{name} must be a length-3 qubit vector, got shape {v.shape}")
    return v


def vqsl_qubit(s, b0, h, b):
    """(1/2) sqrt(3^s + |b0|^2) |h x b|.

    ``h`` is the precession vector h_a = tr(H sigma_a), so that db/dt = h x b.
    """
    b0 = _qubit_vec(b0, "b0")
    h = _qubit_vec(h, "h")
    b = _qubit_vec(b, "b")
    return 0.5 * math.sqrt(three_pow(s) + float(b0 @ b0)) * float(np.linalg.norm(np.cross(h, b)))


def vqsl_eigenstate(s, lz, t):
    """Closed form for eigenstate initialization: sqrt(3^s + 1) |theta'|."""
    return math.sqrt(three_pow(s) + 1.0) * abs(mixing_angle_rate(lz, t))


def tradeoff_ratio(s):
    return math.sqrt(three_pow(s) + 1.0) / math.sqrt(2.0)


def tightness_residual(b0, h, b, f):
    """1 - |cos| of the angle between b0 and r_mu = h_nu b_lam f_{nu lam mu}.

    0 when the tightness condition holds (parallel or antiparallel); the
    sentinel 2.0 when r vanishes.
    """
    b0 = np.asarray(b0, dtype=float)
    h = np.asarray(h, dtype=float)
    b = np.asarray(b, dtype=float)
    f = np.asarray(f, dtype=float)
    m = f.shape[0]
    if f.shape != (m, m, m) or b0.shape != (m,) or h.shape != (m,) or b.shape != (m,):
        raise InvalidArgumentError("tightness_residual: vectors must match the structure-constant dimension")
    n0 = float(np.linalg.norm(b0))
    if n0 == 0.0:
        raise InvalidArgumentError("tightness_residual: b0 is zero")
    r = np.einsum("n,l,nlm->m", h, b, f)
    nr = float(np.linalg.norm(r))
    if nr < 1e-14:
        return RESIDUAL_SENTINEL
    return max(0.0, 1.0 - abs(float(b0 @ r)) / (n0 * nr))


@dataclass
class MetricsSeries:
    times: np.ndarray
    bloch: np.ndarray
    purity: np.ndarray
    speed: np.ndarray
    cost_rate: np.ndarray  # NaN where no counterdiabatic schedule applies
    vqsl: dict  # s -> array
    ratio: np.ndarray  # NaN where cost_rate < COST_FLOOR
    tightness_residual: np.ndarray
    meta: dict = field(default_factory=dict)

    def columns(self):
        cols = {
            "t_us": self.times,
            "bx": self.bloch[:, 0],
            "by": self.bloch[:, 1],
            "bz": self.bloch[:, 2],
            "purity_P": self.purity,
            "speed_absPdot": self.speed,
            "cost_rate": self.cost_rate,
        }
        for s, v in self.vqsl.items():
            cols[f"vqsl_s{s_label(s)}"] = v
        cols["ratio_speed_over_cost"] = self.ratio
        cols["tightness_residual"] = self.tightness_residual
        return cols

    def to_csv(self, path):
        cols = self.columns()
        names = list(cols)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for i in range(len(self.times)):
                w.writerow([_csv_num(cols[c][i]) for c in names])


def _csv_num(x):
    x = float(x)
    return "" if not math.isfinite(x) else repr(x)


def read_csv_columns(path):
    """Read a CSV written by this package back into float arrays (empty -> NaN)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    data = {n: [] for n in names}
    for row in rows[1:]:
        for n, v in zip(names, row):
            try:
                data[n].append(float(v) if v != "" else math.nan)
            except ValueError:
                data[n].append(v)
    return {n: (np.array(v) if all(isinstance(x, float) for x in v) else v) for n, v in data.items()}


def compute_series(trajectory, hamiltonian, s_list, lz=None):
    """Evaluate every metric on a qubit trajectory.

    ``hamiltonian`` is the generator actually used for the evolution; ``lz``
    (optional) supplies the counterdiabatic cost rate.
    """
    times = np.asarray(trajectory.times, dtype=float)
    states = np.asarray(trajectory.states)
    if states.shape[1:] != (2, 2):
        raise InvalidArgumentError("compute_series handles qubit trajectories only")
    s_list = [check_s(s) for s in s_list]
    rho0 = states[0]
    b0 = bloch_vector(rho0)
    bl = bloch_vector(states)
    hs = np.array([hamiltonian(t) for t in times])
    hv = np.einsum("tij,aji->ta", hs, PAULIS).real
    cross = np.cross(hv, bl)
    cross_norm = np.linalg.norm(cross, axis=1)
    pur = np.einsum("ij,tji->t", rho0, states).real
    spd = np.array([speed(rho0, h, r) for h, r in zip(hs, states)])
    b0_sq = float(b0 @ b0)
    vq = {s: 0.5 * math.sqrt(three_pow(s) + b0_sq) * cross_norm for s in s_list}
    if lz is not None:
        cost = np.array([cost_rate(lz, t) for t in times])
    else:
        cost = np.full(len(times), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cost >= COST_FLOOR, spd / cost, np.nan)
    nb0 = math.sqrt(b0_sq)
    if nb0 == 0.0:
        resid = np.full(len(times), RESIDUAL_SENTINEL)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            resid = np.where(
                cross_norm < 1e-14,
                RESIDUAL_SENTINEL,
                np.maximum(0.0, 1.0 - np.abs(cross @ b0) / (nb0 * cross_norm)),
            )
    return MetricsSeries(times, bl, pur, spd, cost, vq, ratio, resid)


def empirical_tradeoff(series):
    """Pointwise |P'| / cost rate; NaN where the cost rate is below 1e-12.

    Returns an empty array when the cost rate never exceeds the floor.
    """
    cost = np.asarray(series.cost_rate, dtype=float)
    ok = np.isfinite(cost) & (cost >= COST_FLOOR)
    if not np.any(ok):
        log.warning("cost rate is below %g everywhere; trade-off ratio undefined", COST_FLOOR)
        return np.array([])
    out = np.full(len(cost), np.nan)
    out[ok] = np.asarray(series.speed)[ok] / cost[ok]
    return out


def locate_tightness(series, tol=1e-4):
    """Grid times at which the tightness residual has a local minimum below ``tol``."""
    r = np.asarray(series.tightness_residual, dtype=float)
    if len(r) < 3:
        return []
    idx = set(argrelmin(r, mode="clip")[0].tolist())
    # plateaus and exact zeros are not strict minima for argrelmin
    idx.update(np.flatnonzero(r == 0.0).tolist())
    if r[0] < r[1]:
        idx.add(0)
    if r[-1] < r[-2]:
        idx.add(len(r) - 1)
    return [float(series.times[i]) for i in sorted(idx) if r[i] < tol]


def is_pure(rho, tol=1e-6):
    return abs(float(np.einsum("ij,ji->", rho, rho).real) - 1.0) < tol


def prior_vqsl(lz, trajectory):
    """Angle metric L_t = arccos|<psi0|psi_t>| and its bound sqrt(eps^2 + theta'^2)/(cos L sin L).

    The eigenvalue branch is the one the initial state occupies.  Returns a
    dict with ``L``, ``L_dot`` (central differences) and ``v_qsl``; points
    within 1e-6 of L in {0, pi/2} are NaN.
    """
    states = np.asarray(trajectory.states)
    times = np.asarray(trajectory.times, dtype=float)
    for r in (states[0], states[-1]):
        if not is_pure(r):
            raise InvalidArgumentError("prior_vqsl is defined for pure-state trajectories")
    rho0 = states[0]
    overlap = np.clip(np.einsum("ij,tji->t", rho0, states).real, 0.0, 1.0)
    big_l = np.arccos(np.sqrt(overlap))
    l_dot = np.gradient(big_l, times)
    es0 = instantaneous_eigensystem(lz, float(times[0]))
    branch = 0 if float(np.real(es0.eigvecs[0].conj() @ rho0 @ es0.eigvecs[0])) >= 0.5 else 1
    eps = np.array([instantaneous_eigensystem(lz, float(t)).eigvals[branch] for t in times])
    rate = np.array([mixing_angle_rate(lz, float(t)) for t in times])
    denom = np.cos(big_l) * np.sin(big_l)
    singular = (big_l < PRIOR_SINGULAR) | (np.abs(big_l - math.pi / 2) < PRIOR_SINGULAR)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(singular, np.nan, np.sqrt(eps ** 2 + rate ** 2) / np.abs(denom))
    return {"L": big_l, "L_dot": l_dot, "v_qsl": v}


def ideal_transitionless_states(lz, times, branch=0):
    """Instantaneous eigenprojectors |psi(t)><psi(t)| along ``times``."""
    out = []
    for t in times:
        psi = instantaneous_eigensystem(lz, float(t)).eigvecs[branch]
        out.append(np.outer(psi, psi.conj()))
    return np.array(out)


def eigenstate_fidelities(lz, trajectory, branch=0):
    ideal = ideal_transitionless_states(lz, trajectory.times, branch)
    return np.einsum("tij,tji->t", ideal, trajectory.states).real

