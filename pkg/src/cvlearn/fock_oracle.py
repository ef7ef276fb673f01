"""Brute-force truncated Fock-basis oracle.

Builds dense matrices for peak states, displacement operators, and the photon
number operator at 1-2 modes, so every closed-form evaluator in `states` can
be validated against an independent numerical route. Validation support only;
dimensions are capped accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import ValidationError, NumericFailure
from .states import PeakState, char_fn, mean_photon

MAX_MODES = 2
MAX_DIM = 16384


@dataclass(frozen=True)
class FockMatrix:
    """Dense operator on the truncated n-mode Fock space (cutoff levels per mode)."""

    n: int
    cutoff: int
    data: np.ndarray

    @property
    def dim(self) -> int:
        return self.cutoff ** self.n


def default_cutoff(state: PeakState) -> int:
    """Covers the thermal tail plus displacement support with a wide margin."""
    max_g2 = float(np.max(np.sum(np.abs(state.centers) ** 2, axis=1), initial=0.0))
    return math.ceil((state.nu ** 2 / (1.0 - state.nu ** 2) + max_g2) * 8.0 + 20.0)


def _check_shape(n: int, cutoff: int):
    if n > MAX_MODES:
        raise ValidationError(f"oracle supports at most {MAX_MODES} modes, got {n}")
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    if cutoff ** n > MAX_DIM:
        raise ValidationError(
            f"truncated dimension {cutoff ** n} exceeds the oracle cap {MAX_DIM}")


def _displacement_1mode(alpha: complex, cutoff: int) -> np.ndarray:
    """<m|D(alpha)|n> via the associated-Laguerre matrix elements."""
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    m, n = np.meshgrid(np.arange(cutoff), np.arange(cutoff), indexing="ij")
    x = abs(alpha) ** 2
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    log_ratio = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1))
    lag = eval_genlaguerre(lo, k, x)
    base = np.where(m >= n, alpha, -np.conj(alpha)) ** k
    return np.exp(log_ratio - x / 2.0) * base * lag


def displacement_matrix(alpha, cutoff: int) -> FockMatrix:
    """D(alpha) on the truncated space; unitary on the low-photon block."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    n = alpha.shape[0]
    _check_shape(n, cutoff)
    data = _displacement_1mode(complex(alpha[0]), cutoff)
    for a in alpha[1:]:
        data = np.kron(data, _displacement_1mode(complex(a), cutoff))
    return FockMatrix(n=n, cutoff=cutoff, data=data)


def number_operator(n: int, cutoff: int) -> FockMatrix:
    _check_shape(n, cutoff)
    k = np.arange(cutoff, dtype=float)
    diag = k.copy()
    for _ in range(n - 1):
        diag = (diag[:, None] + k[None, :]).reshape(-1)
    return FockMatrix(n=n, cutoff=cutoff, data=np.diag(diag))


def _nu_power_diag(state: PeakState, cutoff: int, power: float = 1.0) -> np.ndarray:
    k = np.arange(cutoff, dtype=float)
    d = state.nu ** (power * k)
    for _ in range(state.n - 1):
        d = np.outer(d, state.nu ** (power * k)).reshape(-1)
    return d


def build_state(state: PeakState, cutoff: int | None = None,
                trace_tol: float = 1e-8) -> FockMatrix:
    """Dense density matrix (1-nu^2)^n nu^N (sum_k w_k D^dag(gamma_k)) nu^N."""
    if cutoff is None:
        cutoff = default_cutoff(state)
    _check_shape(state.n, cutoff)
    dim = cutoff ** state.n
    core = np.zeros((dim, dim), dtype=complex)
    for w, g in zip(state.weights, state.centers):
        core += w * displacement_matrix(-g, cutoff).data  # D^dag(g) = D(-g)
    filt = _nu_power_diag(state, cutoff)
    rho = (1.0 - state.nu ** 2) ** state.n * (filt[:, None] * core * filt[None, :])
    trace_err = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_err > trace_tol:
        raise ValidationError(
            f"cutoff {cutoff} too small: |Tr rho - 1| = {trace_err:.2e}; "
            f"suggested cutoff >= {default_cutoff(state)}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > 1e-10:
        raise NumericFailure(f"oracle state not Hermitian: {herm_err:.2e}")
    return FockMatrix(n=state.n, cutoff=cutoff, data=rho)


# ---------------------------------------------------------------------------
# Oracle evaluations
# ---------------------------------------------------------------------------

def char_trace(fm: FockMatrix, alpha) -> complex:
    """Tr[rho D(alpha)]."""
    d = displacement_matrix(alpha, fm.cutoff)
    return complex(np.sum(fm.data.T * d.data))


def mean_photon_trace(fm: FockMatrix) -> float:
    num = number_operator(fm.n, fm.cutoff)
    return float(np.real(np.sum(np.diag(fm.data) * np.diag(num.data))))


def _coherent_vector(zeta, cutoff: int) -> np.ndarray:
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    k = np.arange(cutoff)
    vec = None
    for z in zeta:
        amps = np.exp(-0.5 * abs(z) ** 2 + k * np.log(z) - 0.5 * gammaln(k + 1)) \
            if z != 0 else np.eye(cutoff, dtype=complex)[:, 0]
        vec = amps if vec is None else np.kron(vec, amps)
    return vec


def husimi(fm: FockMatrix, zeta) -> float:
    """<zeta|rho|zeta> / pi^n, the heterodyne outcome density."""
    v = _coherent_vector(zeta, fm.cutoff)
    return float(np.real(np.conj(v) @ fm.data @ v)) / math.pi ** fm.n


def wigner_parity(fm: FockMatrix, beta) -> float:
    """(2/pi)^n Tr[rho D(beta) P D^dag(beta)] with P the photon parity."""
    d = displacement_matrix(beta, fm.cutoff).data
    num_diag = np.diag(number_operator(fm.n, fm.cutoff).data)
    parity = (-1.0) ** num_diag
    shifted = d.conj().T @ fm.data @ d
    return float((2.0 / math.pi) ** fm.n * np.real(np.sum(np.diag(shifted) * parity)))


def min_eigenvalue(fm: FockMatrix) -> float:
    return float(np.linalg.eigvalsh(0.5 * (fm.data + fm.data.conj().T))[0])


# ---------------------------------------------------------------------------
# Petz-Renyi D2 against the thermal reference
# ---------------------------------------------------------------------------

def _three_peak_gamma_eps0(state: PeakState):
    if state.eps0 is None or len(state.weights) != 3:
        raise ValidationError("petz_d2 requires a non-degenerate three-peak state")
    for w, g in zip(state.weights, state.centers):
        if w.imag > 1e-14 and np.linalg.norm(g) > 0:
            return g, state.eps0
    raise ValidationError("could not locate the +gamma peak")


def petz_d2_closed_form(state_gamma: PeakState) -> float:
    """log2 Tr[rho_gamma rho_0^-1 rho_gamma] = log2(1 + 8 eps0^2 (1 - e^{-4a|gamma|^2}))."""
    g, eps0 = _three_peak_gamma_eps0(state_gamma)
    g2 = float(np.sum(np.abs(g) ** 2))
    return math.log2(1.0 + 8.0 * eps0 ** 2 * (1.0 - math.exp(-4.0 * state_gamma.a * g2)))


def petz_d2(state_gamma: PeakState, state_thermal: PeakState,
            cutoff: int | None = None, mismatch_tol: float = 1e-4):
    """Numeric D2(rho_gamma || rho_0) in the truncated basis plus the closed form.

    The thermal reference is diagonal, so its inverse is exact on the truncated
    space; a closed-form mismatch above `mismatch_tol` flags an insufficient
    cutoff.
    """
    if state_gamma.n != state_thermal.n or abs(state_gamma.nu - state_thermal.nu) > 1e-12:
        raise ValidationError("petz_d2 requires a shared (n, nu) family")
    if len(state_thermal.weights) != 1:
        raise ValidationError("second argument must be the thermal (gamma = 0) member")
    rho = build_state(state_gamma, cutoff)
    inv_diag = 1.0 / ((1.0 - state_thermal.nu ** 2) ** state_thermal.n
                      * _nu_power_diag(state_thermal, rho.cutoff, power=2.0))
    val = np.real(np.trace(rho.data @ (inv_diag[:, None] * rho.data)))
    numeric = math.log2(max(val, 1e-300))
    closed = petz_d2_closed_form(state_gamma)
    if abs(numeric - closed) > mismatch_tol:
        raise NumericFailure(
            f"Petz D2 mismatch {abs(numeric - closed):.2e} suggests cutoff "
            f"{rho.cutoff} is insufficient")
    return numeric, closed


# ---------------------------------------------------------------------------
# Aggregate report (CLI debugging aid)
# ---------------------------------------------------------------------------

def oracle_check(state: PeakState, cutoff: int | None = None,
                 rng: np.random.Generator | None = None, points: int = 20) -> dict:
    """Compare closed forms against the oracle at random points; returns a summary."""
    rng = rng or np.random.default_rng(0)
    fm = build_state(state, cutoff)
    pts = (rng.normal(size=(points, state.n)) + 1j * rng.normal(size=(points, state.n)))
    closed = char_fn(state, pts)
    numeric = np.array([char_trace(fm, p) for p in pts])
    return {
        "cutoff": fm.cutoff,
        "trace_error": float(abs(np.trace(fm.data) - 1.0)),
        "min_eigenvalue": min_eigenvalue(fm),
        "char_max_abs_error": float(np.max(np.abs(closed - numeric))),
        "mean_photon_error": float(abs(mean_photon_trace(fm) - mean_photon(state))),
    }
