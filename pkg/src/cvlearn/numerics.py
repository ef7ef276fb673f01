"""Shared numerical primitives: regularized incomplete gamma, Takagi
factorization of symmetric unitaries, complex Gaussian sampling, PSD checks.

All routines are pure; random sampling takes an explicit ``numpy.random.Generator``
so Monte Carlo work can be distributed over independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log, exp, isfinite

import numpy as np

from .errors import ValidationError, NumericFailure

DEFAULT_MATRIX_TOL = 1e-10

_GAMMA_ITMAX = 20000
_GAMMA_EPS = 1e-15
_FPMIN = 1e-300


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for (seed, stream); streams are independent."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


# ---------------------------------------------------------------------------
# Regularized incomplete gamma
# ---------------------------------------------------------------------------

def _upper_gamma_series(shape: float, x: float) -> float:
    # Q = 1 - P with P from the standard lower series; accurate for x < shape+1.
    ap = shape
    term = 1.0 / shape
    total = term
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise NumericFailure(f"incomplete gamma series did not converge (shape={shape}, x={x})")
    log_pref = shape * log(x) - x - lgamma(shape)
    return 1.0 - total * exp(log_pref)


def _upper_gamma_contfrac(shape: float, x: float) -> float:
    # Modified Lentz continued fraction for Q; accurate for x >= shape+1.
    b = x + 1.0 - shape
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX + 1):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise NumericFailure(f"incomplete gamma CF did not converge (shape={shape}, x={x})")
    log_pref = shape * log(x) - x - lgamma(shape)
    return exp(log_pref) * h


def regularized_upper_gamma(shape: float, x: float) -> float:
    """Q(shape, x) = Gamma(shape, x) / Gamma(shape).

    Series for x < shape+1 and continued fraction otherwise; the log-space
    prefactor keeps the split stable for shapes up to ~1.5e4.
    """
    shape = float(shape)
    x = float(x)
    if not (isfinite(shape) and isfinite(x)):
        raise ValidationError("regularized_upper_gamma requires finite inputs")
    if shape <= 0:
        raise ValidationError(f"shape must be > 0, got {shape}")
    if x < 0:
        raise ValidationError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if x < shape + 1.0:
        q = _upper_gamma_series(shape, x)
    else:
        q = _upper_gamma_contfrac(shape, x)
    # Clamp tiny negative round-off from the 1 - P branch.
    return min(1.0, max(q, 0.0))


# ---------------------------------------------------------------------------
# Symmetric unitaries and Takagi factorization
# ---------------------------------------------------------------------------

def _as_square_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class SymmetricUnitary:
    """A matrix U with U = U^T and U U* = I (reflection axes in phase space)."""

    matrix: np.ndarray
    tol: float = DEFAULT_MATRIX_TOL

    def __post_init__(self):
        m = _as_square_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        sym_err = np.max(np.abs(m - m.T)) if m.size else 0.0
        uni_err = np.max(np.abs(m @ np.conj(m) - np.eye(m.shape[0])))
        if sym_err > self.tol:
            raise ValidationError(f"matrix is not symmetric: max|U - U^T| = {sym_err:.3e}")
        if uni_err > self.tol:
            raise ValidationError(f"matrix is not unitary-symmetric: max|U U* - I| = {uni_err:.3e}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class TakagiFactor:
    """A unitary V with V V^T equal to the factored symmetric unitary."""

    v: np.ndarray

    def __post_init__(self):
        v = _as_square_matrix(self.v)
        object.__setattr__(self, "v", v)
        err = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0])))
        if err > DEFAULT_MATRIX_TOL:
            raise ValidationError(f"Takagi factor is not unitary: max|V^dag V - I| = {err:.3e}")


def takagi_decompose(u: SymmetricUnitary) -> TakagiFactor:
    """Factor U = V V^T for a symmetric unitary U.

    U = X + iY with X, Y real symmetric and commuting (from U U* = I), so a
    common orthogonal eigenbasis R gives U = R diag(e^{i theta}) R^T and
    V = R diag(e^{i theta / 2}). Any V' = V O with O orthogonal is equally
    valid; callers must not rely on a particular branch.
    """
    m = u.matrix
    n = m.shape[0]
    x = np.real(m)
    y = np.imag(m)
    rng = np.random.default_rng(0xC0FFEE)
    for _ in range(12):
        # A generic combination separates the joint eigenspaces of (X, Y).
        t = rng.normal()
        _, r = np.linalg.eigh(x + t * y)
        dx = r.T @ x @ r
        dy = r.T @ y @ r
        off = max(np.max(np.abs(dx - np.diag(np.diag(dx)))),
                  np.max(np.abs(dy - np.diag(np.diag(dy)))))
        if off < 1e-11:
            break
    else:
        raise NumericFailure("failed to simultaneously diagonalize the symmetric parts")
    phases = np.diag(dx) + 1j * np.diag(dy)
    phases = phases / np.abs(phases)  # unit modulus up to round-off
    v = r @ np.diag(np.exp(0.5j * np.angle(phases)))
    err = np.max(np.abs(v @ v.T - m))
    if err > 1e-9:
        raise NumericFailure(f"Takagi reconstruction error {err:.3e} exceeds tolerance")
    return TakagiFactor(v=v)


def random_symmetric_unitary(n: int, rng: np.random.Generator) -> SymmetricUnitary:
    """Haar-ish symmetric unitary built as V0 V0^T from a random unitary V0."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return SymmetricUnitary(matrix=q @ q.T)


# ---------------------------------------------------------------------------
# Complex Gaussian sampling
# ---------------------------------------------------------------------------

def sample_complex_gaussian(n: int, variance: float, count: int,
                            rng: np.random.Generator,
                            dtype=np.float64) -> np.ndarray:
    """Draws from q(gamma) = (2 pi V)^{-n} exp(-|gamma|^2 / (2V)).

    Each of the 2n real coordinates is N(0, variance). Returns an array of
    shape (count, n), complex.
    """
    if variance < 0:
        raise ValidationError(f"variance must be >= 0, got {variance}")
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    if variance == 0.0:
        return np.zeros((count, n), dtype=complex)
    scale = np.sqrt(variance)
    re = rng.standard_normal((count, n), dtype=dtype)
    im = rng.standard_normal((count, n), dtype=dtype)
    return scale * (re + 1j * im)


# ---------------------------------------------------------------------------
# PSD check
# ---------------------------------------------------------------------------

def psd_check(m, tol: float = 1e-9) -> tuple[bool, float]:
    """Whether the Hermitian matrix m is PSD up to -tol; also returns min eig."""
    m = _as_square_matrix(m)
    herm_err = np.max(np.abs(m - m.conj().T))
    if herm_err > max(tol, DEFAULT_MATRIX_TOL):
        raise ValidationError(f"matrix is not Hermitian: max|M - M^dag| = {herm_err:.3e}")
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    min_eig = float(eigs[0])
    return min_eig >= -tol, min_eig
