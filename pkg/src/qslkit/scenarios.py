"""Named scenarios and their file outputs.

fig2         eigenstate |psi+(0)> driven through the cosine LZ sweep with the
             counterdiabatic field; metrics for every s in s_list.
fig3         same sweep from the thermal state of H0(0) (prepared analytically,
             or by the pulse optimizer when simulate_prep is set).
sm-lz-linear linear ramp g = a - b t/tau, plus the angle-metric bound.
sm-example1  H = sigma_z / 2 acting on |+>.
prep         dissipative 13-step preparation of the thermal target.
tomography   finite-shot tomography of the 20-step pulsed fig2 evolution.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import IDENTITY2, SIGMA_X, SIGMA_Z, bloch_vector, projector, thermal_state, trace_distance
from .dynamics import TimeGrid, propagate_pulse_sequence, propagate_unitary
from .lz import (
    CosineSchedule,
    LinearSchedule,
    LZParams,
    discretize,
    h0,
    instantaneous_eigensystem,
    total_hamiltonian,
)
from .metrics import (
    NEG_INF,
    compute_series,
    eigenstate_fidelities,
    locate_tightness,
    prior_vqsl,
    s_label,
)
from .prep import OptimizerConfig, default_lindblad, optimize_prep
from .tomography import reconstruct_density, tomography_rows, write_tomography_csv


@dataclass
class ScenarioRun:
    """In-memory products of a scenario; ``summary`` is what lands in summary.json."""

    config: object
    summary: dict
    trajectory: object = None
    series: object = None
    lz: object = None
    extras: dict = field(default_factory=dict)


def build_lz(cfg):
    if cfg.schedule == "cosine":
        sched = CosineSchedule(cfg.omega0_rad_per_us, cfg.tau_us)
    else:
        sched = LinearSchedule(cfg.ramp_a_rad_per_us, cfg.ramp_b_rad_per_us, cfg.tau_us)
    return LZParams(cfg.delta, sched)


def lz_hamiltonian(lz, counterdiabatic=True):
    return lambda t: total_hamiltonian(lz, t, counterdiabatic)


def grid_for(cfg, t1):
    return TimeGrid(0.0, t1, cfg.n_output, cfg.substeps_per_output)


def thermal_target(cfg, lz=None):
    lz = lz or build_lz(cfg)
    return thermal_state(h0(lz, 0.0), cfg.beta)


def prep_optimizer_config(cfg):
    return OptimizerConfig(
        population=cfg.prep_population,
        elite_fraction=cfg.prep_elite_fraction,
        iterations=cfg.prep_iterations,
        seed=cfg.seed,
        f_max=cfg.prep_f_max_rad_per_us,
        delta_max=cfg.prep_delta_max_rad_per_us,
    )


def _argmax_time(times, values):
    v = np.where(np.isfinite(values), values, -np.inf)
    return float(times[int(np.argmax(v))])


def _nanmax(a):
    a = np.asarray(a, dtype=float)
    return float(np.nanmax(a)) if np.any(np.isfinite(a)) else None


def _series_summary(series, cfg):
    tight = locate_tightness(series, cfg.tightness_tol)
    s_ref = NEG_INF if NEG_INF in series.vqsl else next(iter(series.vqsl))
    out = {
        "tightness_times_us": tight,
        "peak_times_us": {f"vqsl_s{s_label(s)}": _argmax_time(series.times, v) for s, v in series.vqsl.items()},
        "peak_time_speed_us": _argmax_time(series.times, series.speed),
        "max_speed": float(np.max(series.speed)),
        "max_ratio_speed_over_cost": _nanmax(series.ratio),
        "reference_s": s_label(s_ref),
    }
    out["peak_time_vqsl_ref_us"] = out["peak_times_us"][f"vqsl_s{s_label(s_ref)}"]
    return out


def _run_lz_sweep(cfg, rho0):
    lz = build_lz(cfg)
    ham = lz_hamiltonian(lz, cfg.counterdiabatic)
    traj = propagate_unitary(ham, rho0, grid_for(cfg, cfg.tau_us))
    series = compute_series(traj, ham, cfg.s_list, lz)
    return lz, ham, traj, series


def run_fig2(cfg):
    lz = build_lz(cfg)
    psi = instantaneous_eigensystem(lz, 0.0).eigvecs[0]
    lz, ham, traj, series = _run_lz_sweep(cfg, projector(psi))
    fid = eigenstate_fidelities(lz, traj, branch=0)
    seq = discretize(lz, cfg.n_pulse_steps, cfg.counterdiabatic)
    pulsed = propagate_pulse_sequence(seq, traj.states[0])
    summary = _series_summary(series, cfg)
    summary.update({
        "min_eigenstate_fidelity": float(np.min(fid)),
        "pulse_steps": len(seq),
        "pulse_step_duration_us": seq.steps[0].duration,
        "pulsed_final_trace_distance": trace_distance(pulsed.states[-1], traj.states[-1]),
    })
    return ScenarioRun(cfg, summary, traj, series, lz, {"pulse_sequence": seq, "eigenstate_fidelity": fid})


def run_fig3(cfg):
    lz = build_lz(cfg)
    target = thermal_target(cfg, lz)
    extras = {"target": target}
    summary_extra = {}
    if cfg.simulate_prep:
        prep = optimize_prep(target, default_lindblad(cfg.gamma_eff_rad_per_us), prep_optimizer_config(cfg),
                             n_steps=cfg.prep_n_steps, omega_i=cfg.omega_i_rad_per_us)
        rho0 = prep.final_state
        extras["prep"] = prep
        summary_extra["prep_fidelity"] = prep.fidelity
        summary_extra["prep_episodes"] = prep.episodes_used
    else:
        rho0 = target
    lz, ham, traj, series = _run_lz_sweep(cfg, rho0)
    ground_pop = eigenstate_fidelities(lz, traj, branch=1)
    summary = _series_summary(series, cfg)
    summary.update(summary_extra)
    summary.update({
        "initial_bloch": bloch_vector(rho0).tolist(),
        "min_ground_branch_population": float(np.min(ground_pop)),
    })
    return ScenarioRun(cfg, summary, traj, series, lz, extras)


def run_sm_lz_linear(cfg):
    lz = build_lz(cfg)
    psi = instantaneous_eigensystem(lz, 0.0).eigvecs[0]
    lz, ham, traj, series = _run_lz_sweep(cfg, projector(psi))
    prior = prior_vqsl(lz, traj)
    summary = _series_summary(series, cfg)
    summary["tightness_t_over_tau"] = [t / cfg.tau_us for t in summary["tightness_times_us"]]
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = prior["v_qsl"] / np.abs(prior["L_dot"])
    summary["max_prior_bound_over_L_dot"] = _nanmax(np.where(np.isfinite(excess), excess, np.nan))
    return ScenarioRun(cfg, summary, traj, series, lz, {"prior": prior})


def run_sm_example1(cfg):
    ham_m = 0.5 * SIGMA_Z
    rho0 = 0.5 * (IDENTITY2 + SIGMA_X)
    ham = lambda t: ham_m  # noqa: E731
    traj = propagate_unitary(ham, rho0, TimeGrid(0.0, cfg.t_end_us, cfg.n_output, cfg.substeps_per_output))
    series = compute_series(traj, ham, cfg.s_list)
    return ScenarioRun(cfg, _series_summary(series, cfg), traj, series)


def run_prep(cfg):
    target = thermal_target(cfg)
    lind = default_lindblad(cfg.gamma_eff_rad_per_us)
    prep = optimize_prep(target, lind, prep_optimizer_config(cfg), n_steps=cfg.prep_n_steps,
                         omega_i=cfg.omega_i_rad_per_us)
    traj = prep.trajectory
    summary = {
        "prep": prep.summary(),
        "target_bloch": bloch_vector(target).tolist(),
        "final_bloch": bloch_vector(prep.final_state).tolist(),
        "max_trace_drift": float(np.max(np.abs(np.trace(traj.states, axis1=1, axis2=2).real - 1.0))),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(traj.states))),
    }
    return ScenarioRun(cfg, summary, traj, None, None, {"prep": prep, "target": target})


def run_tomography(cfg):
    lz = build_lz(cfg)
    psi = instantaneous_eigensystem(lz, 0.0).eigvecs[0]
    seq = discretize(lz, cfg.n_pulse_steps, cfg.counterdiabatic)
    traj = propagate_pulse_sequence(seq, projector(psi))
    rows = tomography_rows(traj.times, traj.states, cfg.shots, cfg.seed)
    dists = []
    for k, rho in enumerate(traj.states):
        s = [r["stokes_component"] for r in rows[3 * k:3 * k + 3]]
        dists.append(trace_distance(reconstruct_density(s), rho))
    summary = {
        "points": len(traj.times),
        "shots_per_basis": cfg.shots,
        "mean_trace_distance": float(np.mean(dists)),
        "max_trace_distance": float(np.max(dists)),
    }
    return ScenarioRun(cfg, summary, traj, None, lz, {"rows": rows, "pulse_sequence": seq})


RUNNERS = {
    "fig2": run_fig2,
    "fig3": run_fig3,
    "sm-lz-linear": run_sm_lz_linear,
    "sm-example1": run_sm_example1,
    "prep": run_prep,
    "tomography": run_tomography,
}


def simulate(cfg):
    """Run a scenario in memory without writing files."""
    start = time.perf_counter()
    run = RUNNERS[cfg.scenario](cfg)
    run.summary = {
        "scenario": cfg.scenario,
        "parameters": cfg.resolved(),
        **run.summary,
        "wall_time_s": time.perf_counter() - start,
        "version": __version__,
    }
    return run


def write_outputs(run, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if run.trajectory is not None:
        run.trajectory.to_csv(out / "trajectory.csv")
    if run.series is not None:
        run.series.to_csv(out / "metrics.csv")
    if "pulse_sequence" in run.extras:
        run.extras["pulse_sequence"].to_csv(out / "pulse_sequence.csv")
    if "prior" in run.extras:
        _write_prior(run.trajectory.times, run.extras["prior"], out / "prior_metric.csv")
    if "prep" in run.extras:
        prep = run.extras["prep"]
        prep.to_csv(out / "prep_result.csv")
        (out / "prep_summary.json").write_text(json.dumps(prep.summary(), indent=2) + "\n")
    if "rows" in run.extras:
        write_tomography_csv(run.extras["rows"], out / "tomography.csv")
    (out / "summary.json").write_text(json.dumps(_json_safe(run.summary), indent=2) + "\n")
    return out


def _write_prior(times, prior, path):
    with open(path, "w") as fh:
        fh.write("t_us,L_rad,L_dot,v_qsl_prior\n")
        for t, big_l, ld, v in zip(times, prior["L"], prior["L_dot"], prior["v_qsl"]):
            fh.write(",".join("" if not math.isfinite(x) else repr(float(x)) for x in (t, big_l, ld, v)) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def run_scenario(cfg, out_dir=None):
    """Simulate ``cfg`` and write trajectory/metrics CSVs plus summary.json.

    Returns the summary dict.
    """
    run = simulate(cfg)
    write_outputs(run, out_dir if out_dir is not None else Path(cfg.output_dir) / cfg.scenario)
    return run.summary
