"""Quadrature checks of the qubit phase-space formulas.

Spin-coherent states |eta> are labelled by a unit vector n on the Bloch
sphere.  For a qubit, R_mu = <eta|T_mu|eta> = n_mu / 2 and the s-ordered
phase-space function of a state with Bloch vector b is

    F^s(n) = 1/2 + r_s b.n,    r_s = sqrt(3^(1+s)) / 2,

integrated with the measure d(mu) = d(Omega) / (2 pi).  The integrals below
are evaluated numerically (Gauss-Legendre in cos(polar) times a uniform
azimuthal rule) and serve as independent oracles for the trace-form purity
and the closed-form speed limit.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .core import bloch_vector, structure_constants, su_generators
from .errors import InvalidArgumentError

MIN_ORDER = 8
DEFAULT_ORDER = 64
S_ORACLE_MAX = 20.0


@lru_cache(maxsize=8)
def sphere_rule(order):
    """Nodes n (M, 3) and weights w (M,) with sum(w) = 4 pi / (2 pi) = 2."""
    if order < MIN_ORDER:
        raise InvalidArgumentError(
            f"quadrature order {order} too small; use at least {MIN_ORDER} (default {DEFAULT_ORDER})"
        )
    x, wx = np.polynomial.legendre.leggauss(order)
    n_az = 2 * order
    phi = 2 * math.pi * np.arange(n_az) / n_az
    sin_t = np.sqrt(1.0 - x ** 2)
    nodes = np.stack(
        [np.outer(sin_t, np.cos(phi)), np.outer(sin_t, np.sin(phi)), np.outer(x, np.ones(n_az))], axis=-1
    ).reshape(-1, 3)
    weights = np.outer(wx, np.full(n_az, 2 * math.pi / n_az)).ravel() / (2 * math.pi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _check_s(s):
    s = float(s)
    if not math.isfinite(s) or abs(s) > S_ORACLE_MAX:
        raise InvalidArgumentError(f"quadrature oracles need finite s with |s| <= {S_ORACLE_MAX:g}, got {s!r}")
    return s


def r_s(s, n_levels=2):
    return math.sqrt((n_levels + 1) ** (1 + s)) / 2


def phase_space_function(b, s, nodes):
    return 0.5 + r_s(s) * (nodes @ np.asarray(b, dtype=float))


def phase_space_purity_oracle(rho0, rhot, s, order=DEFAULT_ORDER):
    """Integral of F^{-s}_{rho0} F^{s}_{rho_t} over the sphere."""
    s = _check_s(s)
    nodes, w = sphere_rule(order)
    f0 = phase_space_function(bloch_vector(rho0), -s, nodes)
    ft = phase_space_function(bloch_vector(rhot), s, nodes)
    return float(w @ (f0 * ft))


def vqsl_quadrature_oracle(rho0, h, rhot, s, order=DEFAULT_ORDER):
    """[int (F^{-s}_{rho0})^2]^(1/2) [int |dF^s_{rho_t}/dt|^2]^(1/2).

    The time derivative is the Moyal-bracket form
    (2/hbar) r_s b_mu h_nu R_lam f_{nu mu lam} with the SU(2) structure
    constants built from the generator set, not a hand-written cross product.
    """
    s = _check_s(s)
    nodes, w = sphere_rule(order)
    gens = su_generators(2)
    f = structure_constants(gens)
    b0 = bloch_vector(rho0)
    b = bloch_vector(rhot)
    hv = 2.0 * np.einsum("ij,aji->a", np.asarray(h), gens).real
    big_r = 0.5 * nodes
    fdot = 2.0 * r_s(s) * np.einsum("m,n,pl,nml->p", b, hv, big_r, f)
    f0 = phase_space_function(b0, -s, nodes)
    return math.sqrt(float(w @ f0 ** 2)) * math.sqrt(float(w @ fdot ** 2))
