"""Dissipative preparation of a target qubit state with a piecewise-constant pulse.

Starting from |g>, each of ``n_steps`` equal steps applies

    H = (delta/2) sigma_z + (Omega_i/2) sigma_x + 2 f1 sigma_y + 2 f2 sigma_x

while an engineered decay |e> -> |g> at rate gamma_eff acts throughout.  The
controls (f1, f2, delta) per step are found with the cross-entropy method:
sample a population from a diagonal Gaussian, keep the elite fraction by
Uhlmann fidelity to the target, refit, repeat.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import KET_G, SIGMA_MINUS, SIGMA_X, SIGMA_Y, SIGMA_Z, check_density, projector
from .dynamics import RK4_SAFETY, LindbladModel, Trajectory, propagate_lindblad_piecewise
from .errors import InvalidArgumentError, OutOfRangeError

log = logging.getLogger(__name__)

OMEGA_I_DEFAULT = 2 * math.pi * 0.02
GAMMA_EFF_DEFAULT = 2 * math.pi * 0.04


@dataclass(frozen=True)
class PrepControls:
    f1: np.ndarray
    f2: np.ndarray
    delta: np.ndarray
    omega_i: float = OMEGA_I_DEFAULT
    step_duration: float = 0.125 / OMEGA_I_DEFAULT

    def __post_init__(self):
        f1, f2, d = (np.asarray(a, dtype=float).ravel() for a in (self.f1, self.f2, self.delta))
        if not (len(f1) == len(f2) == len(d) >= 1):
            raise InvalidArgumentError("f1, f2 and delta need one entry per step")
        if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2)) and np.all(np.isfinite(d))):
            raise InvalidArgumentError("controls must be finite")
        if not self.step_duration > 0:
            raise InvalidArgumentError("step_duration must be positive")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)
        object.__setattr__(self, "delta", d)

    @property
    def n_steps(self):
        return len(self.f1)

    @classmethod
    def zeros(cls, n_steps=13, omega_i=OMEGA_I_DEFAULT, step_duration=None):
        z = np.zeros(n_steps)
        return cls(z, z, z, omega_i, 0.125 / omega_i if step_duration is None else step_duration)


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 32
    elite_fraction: float = 0.25
    iterations: int = 15
    seed: int = 0
    f_max: float = 2 * math.pi * 0.05
    delta_max: float = 2 * math.pi * 0.1
    smoothing: float = 0.7
    init_sigma: float = 0.5
    min_sigma: float = 1e-4
    max_episodes: int = 500
    converged_fidelity: float = 0.90

    def __post_init__(self):
        if self.population < 8:
            raise InvalidArgumentError("population must be >= 8")
        if self.iterations < 1:
            raise InvalidArgumentError("iterations must be >= 1")
        if not 0 < self.elite_fraction < 1:
            raise InvalidArgumentError("elite_fraction must lie in (0, 1)")
        if not (self.f_max > 0 and self.delta_max > 0):
            raise InvalidArgumentError("control bounds must be positive")


@dataclass
class PrepResult:
    controls: PrepControls
    final_state: np.ndarray
    fidelity: float
    episodes_used: int
    converged: bool
    history: list = field(default_factory=list)  # best-so-far fidelity after each generation
    seed: int = 0
    trajectory: Trajectory = None  # re-simulation of ``controls``, states at step boundaries

    def to_csv(self, path):
        c = self.controls
        omega, phase = prep_pulse_parameters(c)
        with open(path, "w") as fh:
            fh.write("step_index,duration_us,f_opt1_rad_per_us,f_opt2_rad_per_us,delta_rad_per_us,"
                     "omega_eff_rad_per_us,phase_rad\n")
            for k in range(c.n_steps):
                vals = (c.step_duration, c.f1[k], c.f2[k], c.delta[k], omega[k], phase[k])
                fh.write(f"{k}," + ",".join(repr(float(v)) for v in vals) + "\n")

    def summary(self):
        return {
            "fidelity": self.fidelity,
            "episodes_used": self.episodes_used,
            "converged": self.converged,
            "seed": self.seed,
            "n_steps": self.controls.n_steps,
            "step_duration_us": self.controls.step_duration,
            "omega_i_rad_per_us": self.controls.omega_i,
            "best_fidelity_history": list(self.history),
        }


def _hamiltonians(f1, f2, delta, omega_i):
    f1 = np.asarray(f1)[..., None, None]
    f2 = np.asarray(f2)[..., None, None]
    delta = np.asarray(delta)[..., None, None]
    return 0.5 * delta * SIGMA_Z + (0.5 * omega_i + 2.0 * f2) * SIGMA_X + 2.0 * f1 * SIGMA_Y


def prep_hamiltonian(controls, step):
    if not 0 <= step < controls.n_steps:
        raise OutOfRangeError(f"step {step} outside [0, {controls.n_steps})")
    return _hamiltonians(controls.f1[step], controls.f2[step], controls.delta[step], controls.omega_i)


def prep_pulse_parameters(controls):
    """Laser amplitude and phase regenerating each step's Hamiltonian.

    H = (Omega/2)(cos(phi) sigma_x - sin(phi) sigma_y) + (delta/2) sigma_z with
    Omega = sqrt(16 f1^2 + (Omega_i + 4 f2)^2) and phi = atan2(-4 f1, Omega_i + 4 f2).
    """
    a = controls.omega_i + 4.0 * controls.f2
    return np.hypot(4.0 * controls.f1, a), np.arctan2(-4.0 * controls.f1, a)


def gamma_eff(omega1, gamma):
    """Effective decay Omega_1^2 / Gamma of the adiabatically eliminated level."""
    if not gamma > 0:
        raise InvalidArgumentError(f"Gamma must be positive, got {gamma!r}")
    return omega1 ** 2 / gamma


def uhlmann_fidelity(rho, sigma):
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2; closed form for qubits."""
    rho = check_density(rho, "rho")
    sigma = check_density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise InvalidArgumentError("fidelity arguments differ in dimension")
    if rho.shape == (2, 2):
        return float(np.clip(_qubit_fidelity(rho, sigma), 0.0, 1.0))
    sq = scipy.linalg.sqrtm(rho)
    return float(np.clip(np.trace(scipy.linalg.sqrtm(sq @ sigma @ sq)).real ** 2, 0.0, 1.0))


def _qubit_fidelity(rho, sigma):
    overlap = np.einsum("...ij,...ji->...", rho, sigma).real
    det = np.maximum(np.linalg.det(rho).real, 0.0) * np.maximum(np.linalg.det(sigma).real, 0.0)
    return overlap + 2.0 * np.sqrt(det)


def _dt_max(config, omega_i):
    h_max = math.sqrt((0.5 * omega_i + 2 * config.f_max) ** 2 + (2 * config.f_max) ** 2 + (0.5 * config.delta_max) ** 2)
    return RK4_SAFETY / h_max


def simulate_prep(controls, lindblad, dt_max=None):
    """Evolve |g><g| through the control table; states at every step boundary."""
    hams = _hamiltonians(controls.f1, controls.f2, controls.delta, controls.omega_i)
    durations = np.full(controls.n_steps, controls.step_duration)
    states = propagate_lindblad_piecewise(
        hams, durations, projector(KET_G), lindblad.gamma_eff, lindblad.collapse, dt_max=dt_max
    )
    times = controls.step_duration * np.arange(controls.n_steps + 1)
    return Trajectory(times, states, {"integrator": "rk4-piecewise", "gamma_eff": lindblad.gamma_eff})


def optimize_prep(target, lindblad, config=OptimizerConfig(), n_steps=13, omega_i=OMEGA_I_DEFAULT,
                  step_duration=None):
    """Cross-entropy search for controls steering |g> to ``target``.

    Deterministic for a given config.seed.  The reported fidelity is taken
    from an independent single-trajectory re-simulation of the best controls.
    """
    target = check_density(target, "target")
    if target.shape != (2, 2):
        raise InvalidArgumentError("optimize_prep handles qubit targets only")
    if step_duration is None:
        step_duration = 0.125 / omega_i
    pop = config.population
    generations = min(config.iterations, config.max_episodes // pop)
    if generations < 1:
        raise InvalidArgumentError("episode budget is smaller than one population")
    n_elite = max(2, int(round(config.elite_fraction * pop)))
    lo = np.concatenate([np.full(2 * n_steps, -config.f_max), np.full(n_steps, -config.delta_max)])
    hi = -lo
    dim = 3 * n_steps
    mean = np.zeros(dim)
    sigma = config.init_sigma * hi
    dt_max = _dt_max(config, omega_i)
    durations = np.full(n_steps, step_duration)
    rho_g = projector(KET_G)
    streams = np.random.SeedSequence(config.seed).spawn(generations)

    best_x, best_f = None, -math.inf
    history = []
    episodes = 0
    for gen in range(generations):
        rng = np.random.default_rng(streams[gen])
        xs = np.clip(mean + sigma * rng.standard_normal((pop, dim)), lo, hi)
        if best_x is not None:
            xs[0] = best_x
        f1, f2, dl = xs[:, :n_steps], xs[:, n_steps:2 * n_steps], xs[:, 2 * n_steps:]
        hams = _hamiltonians(f1, f2, dl, omega_i)
        final = propagate_lindblad_piecewise(hams, durations, rho_g, lindblad.gamma_eff, lindblad.collapse,
                                             dt_max=dt_max)[:, -1]
        fid = _qubit_fidelity(final, target)
        episodes += pop
        order = np.argsort(-fid, kind="stable")
        if fid[order[0]] > best_f:
            best_f = float(fid[order[0]])
            best_x = xs[order[0]].copy()
        history.append(best_f)
        elite = xs[order[:n_elite]]
        a = config.smoothing
        mean = a * elite.mean(axis=0) + (1 - a) * mean
        sigma = np.maximum(a * elite.std(axis=0) + (1 - a) * sigma, config.min_sigma)
        log.debug("generation %d: best %.6f, elite mean %.6f", gen, best_f, float(fid[order[:n_elite]].mean()))

    controls = PrepControls(best_x[:n_steps], best_x[n_steps:2 * n_steps], best_x[2 * n_steps:], omega_i,
                            step_duration)
    traj = simulate_prep(controls, lindblad, dt_max=dt_max)
    final_state = traj.states[-1]
    fidelity = uhlmann_fidelity(final_state, target)
    converged = fidelity >= config.converged_fidelity
    if not converged:
        log.warning("preparation did not converge: best fidelity %.4f after %d episodes", fidelity, episodes)
    return PrepResult(controls, final_state, fidelity, episodes, converged, history, config.seed, traj)


def default_lindblad(gamma=GAMMA_EFF_DEFAULT):
    return LindbladModel(hamiltonian=None, gamma_eff=gamma, collapse=SIGMA_MINUS.copy())
