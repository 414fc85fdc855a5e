"""Small dense linear algebra for N-level systems.

Basis convention for qubits: vector index 0 is the excited level |e>,
index 1 the ground level |g>, so the standard Pauli matrices satisfy
sigma_z|e> = +|e>.  sigma_- = |g><e| is the usual lowering operator.
All Bloch signs in the package follow from this single choice.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, InvalidArgumentError, NotAStateError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)
SIGMA_MINUS = np.outer(KET_G, KET_E.conj())  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.conj().T

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
MAX_DIM = 8


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a)), initial=0.0) < tol


def projector(ket):
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def check_density(rho, name="rho"):
    """Validate ``rho`` as a density matrix and return it as a complex array.

    Raises NotAStateError if the trace, Hermiticity or positivity checks fail.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAStateError(f"{name} must be a square matrix, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise NotAStateError(f"{name} is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAStateError(f"{name} has trace {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -PSD_TOL:
        raise NotAStateError(f"{name} has negative eigenvalue {lam_min:.3e}")
    return rho


def su_generators(n):
    """Generalized Gell-Mann generators T_mu of SU(n), tr(T_mu T_nu) = delta/2.

    Ordering follows the Gell-Mann matrices: for each column k = 2..n the
    symmetric and antisymmetric pairs (j, k), j < k, then the k-th diagonal
    generator.  For n = 2 this gives (sigma_x, sigma_y, sigma_z) / 2 and for
    n = 3 the familiar lambda_1 .. lambda_8 (halved).

    Returns an array of shape (n**2 - 1, n, n).
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_DIM:
        raise InvalidArgumentError(f"SU(N) dimension must be an integer in [2, {MAX_DIM}], got {n!r}")
    gens = []
    for k in range(1, n):
        for j in range(k):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            gens.append(sym / 2)
            gens.append(anti / 2)
        diag = np.zeros(n)
        diag[:k] = 1.0
        diag[k] = -k
        gens.append(np.diag(diag).astype(complex) / math.sqrt(2 * k * (k + 1)))
    return np.stack(gens)


def _check_generators(gens, tol=1e-12):
    gens = np.asarray(gens, dtype=complex)
    if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
        raise InvalidArgumentError("generator set must have shape (M, N, N)")
    n = gens.shape[1]
    if gens.shape[0] != n * n - 1:
        raise InvalidArgumentError(f"expected {n * n - 1} generators for N={n}, got {gens.shape[0]}")
    if np.max(np.abs(np.trace(gens, axis1=1, axis2=2))) > tol:
        raise InvalidArgumentError("generators are not traceless")
    gram = np.einsum("aij,bji->ab", gens, gens)
    if np.max(np.abs(gram - np.eye(len(gens)) / 2)) > tol:
        raise InvalidArgumentError("generators are not orthonormal under tr(T_a T_b) = delta_ab / 2")
    return gens


def structure_constants(gens):
    """f[a, b, c] = -2i tr([T_a, T_b] T_c), so that [T_a, T_b] = i f_abc T_c."""
    gens = _check_generators(gens)
    prod = np.einsum("aij,bjk->abik", gens, gens)
    comm = prod - np.swapaxes(prod, 0, 1)
    f = -2j * np.einsum("abij,cji->abc", comm, gens)
    if np.max(np.abs(f.imag)) > 1e-12:
        raise InvalidArgumentError("structure constants have a non-negligible imaginary part")
    return f.real


def bloch_coeffs(op, gens):
    """Return 2 tr(op T_mu).  For a qubit this is tr(op sigma_mu)."""
    op = np.asarray(op, dtype=complex)
    gens = np.asarray(gens)
    if op.shape != gens.shape[1:]:
        raise InvalidArgumentError(f"operator shape {op.shape} does not match generators {gens.shape[1:]}")
    return 2.0 * np.einsum("ij,aji->a", op, gens).real


def density_from_bloch(b, gens):
    """Inverse of bloch_coeffs for states: rho = I/N + b_mu T_mu."""
    b = np.asarray(b, dtype=float)
    gens = np.asarray(gens)
    if b.shape != (gens.shape[0],):
        raise InvalidArgumentError(f"expected {gens.shape[0]} Bloch coefficients, got shape {b.shape}")
    n = gens.shape[1]
    rho = np.eye(n, dtype=complex) / n + np.einsum("a,aij->ij", b, gens)
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -PSD_TOL:
        raise NotAStateError(f"Bloch vector gives eigenvalue {lam_min:.3e}")
    return rho


def bloch_vector(rho):
    """Qubit shorthand: (tr(rho sx), tr(rho sy), tr(rho sz)); accepts stacks."""
    return np.einsum("...ij,aji->...a", np.asarray(rho), PAULIS).real


def qubit_density(b):
    b = np.asarray(b, dtype=float)
    return 0.5 * (IDENTITY2 + np.einsum("a,aij->ij", b, PAULIS))


def matrix_exponential(a):
    """exp(a) for a dense square matrix.

    Hermitian and anti-Hermitian inputs go through an eigendecomposition,
    which keeps unitarity to machine precision; anything else falls back to
    scaling-and-squaring Pade.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"matrix_exponential needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix_exponential: non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a + dagger(a))) <= 1e-14 * scale:
        w, v = np.linalg.eigh(1j * a)
        return (v * np.exp(-1j * w)) @ dagger(v)
    if np.max(np.abs(a - dagger(a))) <= 1e-14 * scale:
        w, v = np.linalg.eigh(a)
        return (v * np.exp(w)) @ dagger(v)
    return scipy.linalg.expm(a)


def qubit_propagator(h, dt):
    """exp(-i h dt) for a 2x2 Hermitian h, closed form (hot loops use this)."""
    h0 = 0.5 * (h[0, 0] + h[1, 1]).real
    hx = h[0, 1].real
    hy = -h[0, 1].imag
    hz = 0.5 * (h[0, 0] - h[1, 1]).real
    norm = math.sqrt(hx * hx + hy * hy + hz * hz)
    phi = norm * dt
    c = math.cos(phi)
    s = math.sin(phi) / norm if norm > 0.0 else dt
    u = np.array(
        [[c - 1j * s * hz, -1j * s * (hx - 1j * hy)],
         [-1j * s * (hx + 1j * hy), c + 1j * s * hz]],
        dtype=complex,
    )
    if h0:
        u *= complex(math.cos(h0 * dt), -math.sin(h0 * dt))
    return u


def thermal_state(h, beta):
    """Gibbs state exp(-beta H)/Z.

    The ground energy is subtracted before exponentiating, so any beta
    (including the float ``math.inf``) is safe.  At beta = inf the ground
    projector is returned and a degenerate ground level is an error.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol=HERMITIAN_TOL * max(1.0, float(np.max(np.abs(h), initial=0.0)))):
        raise InvalidArgumentError("thermal_state needs a Hermitian matrix")
    beta = float(beta)
    if math.isnan(beta) or beta < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {beta!r}")
    w, v = np.linalg.eigh(h)
    shifted = w - w[0]
    if math.isinf(beta):
        gap_tol = 1e-12 * max(1.0, float(np.max(np.abs(w))))
        if len(w) > 1 and shifted[1] <= gap_tol:
            raise DegenerateSpectrumError("ground level is degenerate; beta = inf state is not unique")
        weights = np.zeros_like(w)
        weights[0] = 1.0
    elif beta == 0.0:
        weights = np.ones_like(w)
    else:
        weights = np.exp(-beta * shifted)
    weights = weights / weights.sum()
    rho = (v * weights) @ dagger(v)
    return 0.5 * (rho + dagger(rho))


def trace_distance(rho, sigma):
    w = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
    return 0.5 * float(np.sum(np.abs(w)))


def purity(rho):
    """tr(rho^2); works on a single matrix or a stack."""
    p = np.einsum("...ij,...ji->...", rho, rho).real
    return float(p) if np.ndim(p) == 0 else p
