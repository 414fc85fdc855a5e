"""One-command acceptance suite.

Each ``check_*`` function returns a CriterionResult; ``run_acceptance``
runs them all and prints one PASS/FAIL line per criterion.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from .config import from_dict
from .core import PAULIS, bloch_vector, projector, qubit_density, trace_distance
from .dynamics import LindbladModel, TimeGrid, propagate_lindblad
from .lz import total_hamiltonian
from .metrics import (
    COST_FLOOR,
    NEG_INF,
    cost_rate,
    ideal_transitionless_states,
    locate_tightness,
    three_pow,
    vqsl_qubit,
)
from .phasespace import phase_space_purity_oracle, vqsl_quadrature_oracle
from .scenarios import build_lz, lz_hamiltonian, simulate
from .tomography import BASES, EXACT, excited_probability, measure_populations, reconstruct_density, stokes_from_records


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict
    tolerance: str
    runtime_s: float = 0.0

    def line(self):
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {vals} (tolerance: {self.tolerance}; {self.runtime_s:.2f} s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _cfg(scenario, **kw):
    return from_dict({"scenario": scenario, **kw})


def _random_bloch(rng, n, pure_fraction=0.25):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = np.where(rng.random(n) < pure_fraction, 1.0, rng.random(n) ** (1 / 3))
    return v * r[:, None]


def check_tradeoff_identity():
    """V^s / cost = sqrt(3^s + 1)/sqrt(2) along the transitionless trajectory."""
    start = time.perf_counter()
    cfg = _cfg("fig2")
    lz = build_lz(cfg)
    times = TimeGrid(0.0, cfg.tau_us, cfg.n_output).times
    ideal = ideal_transitionless_states(lz, times, branch=0)
    bl = bloch_vector(ideal)
    hs = np.array([total_hamiltonian(lz, t) for t in times])
    hv = np.einsum("tij,aji->ta", hs, PAULIS).real
    cost = np.array([cost_rate(lz, t) for t in times])
    ok = cost >= COST_FLOOR
    worst = 0.0
    for s in (NEG_INF, -1.0, 0.0, 1.0):
        expected = math.sqrt(three_pow(s) + 1.0) / math.sqrt(2.0)
        v = np.array([vqsl_qubit(s, bl[0], h, b) for h, b in zip(hv[ok], bl[ok])])
        worst = max(worst, float(np.max(np.abs(v / cost[ok] / expected - 1.0))))
    # the ideal states must actually solve rho' = -i[H, rho] for this H
    dt = times[1] - times[0]
    fd = (ideal[2:] - ideal[:-2]) / (2 * dt)
    mid = hs[1:-1]
    rhs = -1j * (mid @ ideal[1:-1] - ideal[1:-1] @ mid)
    guard = float(np.max(np.abs(fd - rhs)) / np.max(np.abs(rhs)))
    elapsed = time.perf_counter() - start
    passed = worst < 1e-9 and guard < 1e-3 and elapsed < 5.0
    return CriterionResult(1, "trade-off identity", passed,
                           {"max_rel_error": worst, "eom_residual": guard, "points": int(ok.sum())},
                           "rel error < 1e-9, eom residual < 1e-3, < 5 s", elapsed)


def check_bound_chain():
    start = time.perf_counter()
    worst_slack = math.inf
    for scen in ("fig2", "fig3", "sm-lz-linear"):
        run = simulate(_cfg(scen, s_list=["-inf", 0]))
        ser = run.series
        worst_slack = min(worst_slack,
                          float(np.min(ser.vqsl[NEG_INF] - ser.speed)),
                          float(np.min(ser.vqsl[0.0] - ser.vqsl[NEG_INF])))
        if scen == "fig2":
            max_ratio = float(np.nanmax(ser.ratio))
    bound = 1 / math.sqrt(2) + 1e-6
    passed = worst_slack >= -1e-9 and max_ratio <= bound
    return CriterionResult(2, "bound chain", passed, {"min_slack": worst_slack, "fig2_max_ratio": max_ratio},
                           "slack >= -1e-9, ratio <= 1/sqrt(2) + 1e-6", time.perf_counter() - start)


def _gap_at(series, t):
    i = int(np.argmin(np.abs(series.times - t)))
    v = series.vqsl[NEG_INF][i]
    return abs(v - series.speed[i]), v


def check_tightness():
    start = time.perf_counter()
    fig2 = simulate(_cfg("fig2")).series
    t_fig2 = locate_tightness(fig2)
    ok = any(abs(t - 29.0) <= 0.5 for t in t_fig2)
    ratios = []
    for tau in (1e3, 1.0, 1e-2):
        ser = simulate(_cfg("sm-lz-linear", tau_us=tau)).series
        r = [t / tau for t in locate_tightness(ser)]
        ratios.append(r[0] if r else math.nan)
        ok &= any(abs(x - 0.501) <= 0.005 for x in r)
    ex = simulate(_cfg("sm-example1")).series
    t_ex = locate_tightness(ex)
    near = [t for t in t_ex if abs(t - math.pi / 2) <= 1e-6]
    gap = _gap_at(ex, near[0])[0] if near else math.inf
    ok &= bool(near) and gap < 1e-9
    elapsed = time.perf_counter() - start
    return CriterionResult(3, "tightness locations", ok and elapsed < 30.0,
                           {"fig2_us": t_fig2, "linear_t_over_tau": ratios, "example1": t_ex, "example1_gap": gap},
                           "29 +- 0.5 us; 0.501 +- 0.005; pi/2 +- 1e-6 with gap < 1e-9; < 30 s", elapsed)


def check_peak_position():
    start = time.perf_counter()
    run = simulate(_cfg("fig2"))
    t_peak = run.summary["peak_times_us"]["vqsl_sneginf"]
    return CriterionResult(4, "QSL peak position", abs(t_peak - 27.5) <= 0.3, {"argmax_us": t_peak},
                           "27.5 +- 0.3 us", time.perf_counter() - start)


def check_prior_nontightness():
    start = time.perf_counter()
    run = simulate(_cfg("sm-lz-linear"))
    prior = run.extras["prior"]
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = prior["v_qsl"] / np.abs(prior["L_dot"])
    max_factor = float(np.nanmax(np.where(np.isfinite(factor), factor, np.nan)))
    ser = run.series
    tight = locate_tightness(ser)
    excess = math.inf
    for t in tight:
        gap, v = _gap_at(ser, t)
        excess = min(excess, gap / (v - gap) if v > gap else math.inf)
    passed = max_factor > 10 and excess < 0.10
    return CriterionResult(5, "prior-bound non-tightness", passed,
                           {"prior_over_Ldot": max_factor, "neginf_excess": excess},
                           "factor > 10 and excess < 10%", time.perf_counter() - start)


def check_phase_space_oracles():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    b0s, bts = _random_bloch(rng, 100), _random_bloch(rng, 100)
    hs = rng.standard_normal((100, 3))
    worst_p = worst_v = 0.0
    for b0, bt, hv in zip(b0s, bts, hs):
        rho0, rhot = qubit_density(b0), qubit_density(bt)
        h = np.einsum("a,aij->ij", hv, PAULIS)
        exact_p = float(np.trace(rho0 @ rhot).real)
        for s in (-2.0, 0.0, 1.0):
            worst_p = max(worst_p, abs(phase_space_purity_oracle(rho0, rhot, s) - exact_p))
            closed = vqsl_qubit(s, b0, 2.0 * hv, bt)
            quad = vqsl_quadrature_oracle(rho0, h, rhot, s)
            worst_v = max(worst_v, abs(quad - closed) / max(closed, 1e-300))
    elapsed = time.perf_counter() - start
    passed = worst_p < 1e-6 and worst_v < 1e-4 and elapsed < 60.0
    return CriterionResult(6, "phase-space oracles", passed, {"purity_abs_err": worst_p, "vqsl_rel_err": worst_v},
                           "purity < 1e-6, V^s < 1e-4 relative, < 60 s", elapsed)


def check_transitionless():
    start = time.perf_counter()
    with_cd = simulate(_cfg("fig2")).summary["min_eigenstate_fidelity"]
    without = simulate(_cfg("fig2", counterdiabatic=False)).summary["min_eigenstate_fidelity"]
    return CriterionResult(7, "transitionless driving", with_cd > 0.999 and without < 0.9,
                           {"min_fidelity_cd": with_cd, "min_fidelity_no_cd": without},
                           "> 0.999 with field, < 0.9 without", time.perf_counter() - start)


def check_thermal_prep(seed=0):
    start = time.perf_counter()
    prep = simulate(_cfg("prep", seed=seed)).extras["prep"]
    elapsed = time.perf_counter() - start
    passed = prep.fidelity >= 0.99 and prep.episodes_used <= 500 and elapsed < 60.0
    return CriterionResult(8, "thermal preparation", passed,
                           {"fidelity": prep.fidelity, "episodes": prep.episodes_used},
                           "F >= 0.99 within 500 episodes, < 60 s", elapsed)


def check_tomography_statistics(seed=0):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_rt = 0.0
    for b in _random_bloch(rng, 100):
        rho = qubit_density(b)
        recs = [measure_populations(rho, basis, EXACT) for basis in BASES]
        worst_rt = max(worst_rt, trace_distance(reconstruct_density(stokes_from_records(recs)), rho))
    shots = 50000
    rho = qubit_density(np.array([0.3, -0.5, 0.6]))
    ratios = []
    for basis in BASES:
        p = excited_probability(rho, basis)
        est = [2 * measure_populations(rho, basis, shots, seed=seed * 1000 + k).p_hat - 1 for k in range(200)]
        ratios.append(float(np.std(est, ddof=1)) / (2 * math.sqrt(p * (1 - p) / shots)))
    passed = worst_rt < 1e-12 and all(0.5 <= r <= 2.0 for r in ratios)
    return CriterionResult(9, "tomography statistics", passed, {"roundtrip_trace_dist": worst_rt, "std_ratio": ratios},
                           "round trip < 1e-12, std ratio in [0.5, 2]", time.perf_counter() - start)


def _summary_numbers(d, prefix=""):
    out = {}
    for k, v in d.items():
        if k in ("parameters", "wall_time_s", "version"):
            continue
        if isinstance(v, dict):
            out.update(_summary_numbers(v, f"{prefix}{k}."))
        elif isinstance(v, list):
            for i, x in enumerate(v):
                out[f"{prefix}{k}[{i}]"] = x
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out[f"{prefix}{k}"] = v
    return out


def check_numerics():
    start = time.perf_counter()
    drift = 0.0
    for scen in ("fig2", "fig3", "sm-lz-linear", "sm-example1"):
        pur = simulate(_cfg(scen)).trajectory.purities()
        drift = max(drift, float(np.max(np.abs(pur - pur[0]))))
    # Lindblad: the preparation trajectory and an open-system LZ sweep
    prep_states = simulate(_cfg("prep")).trajectory.states
    cfg = _cfg("fig2")
    lz = build_lz(cfg)
    model = LindbladModel(lz_hamiltonian(lz), 2 * math.pi * 0.04)
    psi0 = projector(np.array([1.0, 0.0], dtype=complex))
    open_states = propagate_lindblad(model, psi0, TimeGrid(0.0, cfg.tau_us, 501)).states
    trace_drift = min_eig = None
    for st in (prep_states, open_states):
        td = float(np.max(np.abs(np.trace(st, axis1=1, axis2=2).real - 1.0)))
        me = float(np.min(np.linalg.eigvalsh(st)))
        trace_drift = td if trace_drift is None else max(trace_drift, td)
        min_eig = me if min_eig is None else min(min_eig, me)
    # grid halving of the integration step on fig2 defaults
    base = simulate(cfg)
    fine = simulate(cfg.with_updates(substeps_per_output=2 * cfg.substeps_per_output))
    a, b = _summary_numbers(base.summary), _summary_numbers(fine.summary)
    halving = max(abs(a[k] - b[k]) for k in a) if a.keys() == b.keys() else math.inf
    halving = max(halving, float(np.max(np.abs(base.series.bloch - fine.series.bloch))))
    passed = drift < 1e-10 and trace_drift < 1e-10 and min_eig >= -1e-9 and halving < 1e-6
    return CriterionResult(10, "numerics", passed,
                           {"purity_drift": drift, "trace_drift": trace_drift, "min_eigenvalue": min_eig,
                            "halving_change": halving},
                           "drift < 1e-10, trace < 1e-10, eig >= -1e-9, halving < 1e-6", time.perf_counter() - start)


CRITERIA = (
    check_tradeoff_identity,
    check_bound_chain,
    check_tightness,
    check_peak_position,
    check_prior_nontightness,
    check_phase_space_oracles,
    check_transitionless,
    check_thermal_prep,
    check_tomography_statistics,
    check_numerics,
)


def run_acceptance(stream=None):
    stream = stream if stream is not None else sys.stdout
    results = []
    for check in CRITERIA:
        res = check()
        print(res.line(), file=stream, flush=True)
        results.append(res)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed", file=stream)
    return results
