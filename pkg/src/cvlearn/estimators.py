"""Estimators for the characteristic function and the sample-size planner.

The planner fixes the artifact's normative constants: two-sided Hoeffding on
the real and imaginary parts with per-part failure budget delta/(4M) gives

    N = ceil( 4 B^2 ln(4M/delta) / eps_target^2 )

for a summand-modulus bound B. Every acceptance criterion that mentions a
planned N uses these constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ValidationError
from .measurements import MeasurementRecord

SCHEMES = ("bell_chi2", "bell_chi", "heterodyne", "classicality_aware")


@dataclass(frozen=True)
class PlannerInputs:
    epsilon: float
    delta: float
    M: int = 1
    alpha2_max: float | None = None   # largest queried |alpha|^2 (= kappa * n)
    S: float | None = None            # classicality floor

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValidationError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise ValidationError(f"delta must lie in (0,1), got {self.delta}")
        if self.M < 1:
            raise ValidationError(f"M must be >= 1, got {self.M}")


@dataclass(frozen=True)
class EstimateReport:
    point: list           # [[re, im], ...] of the query alpha
    estimate: complex
    scheme: str
    samples_used: int
    epsilon: float | None
    delta: float | None
    truncated: bool = False

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["estimate"] = [self.estimate.real, self.estimate.imag]
        return d


def hoeffding_count(bound: float, eps_target: float, delta: float, m: int) -> int:
    """ceil(4 B^2 ln(4M/delta) / t^2); per-part budget delta/(4M)."""
    raw = hoeffding_count_float(bound, eps_target, delta, m)
    if not math.isfinite(raw):
        raise ValidationError("planned sample count overflows a float; reduce the radius")
    return int(math.ceil(raw))


def hoeffding_count_float(bound: float, eps_target: float, delta: float, m: int) -> float:
    return 4.0 * bound * bound * math.log(4.0 * m / delta) / (eps_target * eps_target)


def effective_radius(classicality: float, epsilon: float) -> float:
    """L_eps(S) = (2/S) log(1/eps): beyond it the zero estimate is eps-accurate."""
    if classicality <= 0:
        raise ValidationError("effective radius needs a positive classicality floor")
    return (2.0 / classicality) * math.log(1.0 / epsilon)


def plan_samples(scheme: str, inputs: PlannerInputs) -> int:
    """Copies needed for all M queries to meet eps at confidence 1 - delta.

    bell_chi2        : |v - chi^2| <= eps,           B = 1
    bell_chi         : min_tau |tau u - chi| <= eps via the sign-resolution
                       guarantee, so chi^2 is targeted at eps^2/3, B = 1
    heterodyne       : |u - chi| <= eps,             B = e^{alpha2_max/2}
    classicality_aware: truncation at L_eps(S),      B = e^{L/2} = eps^{-1/S}
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    eps, delta, m = inputs.epsilon, inputs.delta, inputs.M
    if scheme == "bell_chi2":
        return hoeffding_count(1.0, eps, delta, m)
    if scheme == "bell_chi":
        return hoeffding_count(1.0, eps * eps / 3.0, delta, m)
    if scheme == "heterodyne":
        if inputs.alpha2_max is None or inputs.alpha2_max < 0:
            raise ValidationError("heterodyne planning needs alpha2_max >= 0")
        return hoeffding_count(math.exp(inputs.alpha2_max / 2.0), eps, delta, m)
    if inputs.S is None or not (0.0 < inputs.S <= 1.0):
        raise ValidationError("classicality-aware planning needs S in (0, 1]")
    return hoeffding_count(eps ** (-1.0 / inputs.S), eps, delta, m)


# ---------------------------------------------------------------------------
# Phase-factor means (shared vectorized core)
# ---------------------------------------------------------------------------

def _phase_factor_sums(outcomes: np.ndarray, mat_re: np.ndarray, mat_im: np.ndarray,
                       dtype, chunk: int) -> np.ndarray:
    """sum_j e^{2 i (Re(z_j) mat_re + Im(z_j) mat_im)} column-wise.

    One real matmul per sample block; in-place trig on reused buffers keeps
    the hot path allocation-free, with float64 accumulation of column sums.
    """
    n_samp, n_modes = outcomes.shape
    m = mat_re.shape[1]
    mat = np.concatenate([2.0 * mat_re, 2.0 * mat_im]).astype(dtype)
    acc = np.zeros(m, dtype=complex)
    parts = phases = cos_buf = None
    for lo in range(0, n_samp, chunk):
        zz = outcomes[lo:lo + chunk]
        b = zz.shape[0]
        if parts is None or parts.shape[0] != b:
            parts = np.empty((b, 2 * n_modes), dtype=dtype)
            phases = np.empty((b, m), dtype=dtype)
            cos_buf = np.empty((b, m), dtype=dtype)
        parts[:, :n_modes] = zz.real
        parts[:, n_modes:] = zz.imag
        np.matmul(parts, mat, out=phases)
        np.cos(phases, out=cos_buf)
        acc += cos_buf.sum(axis=0, dtype=np.float64)
        np.sin(phases, out=phases)
        acc += 1j * phases.sum(axis=0, dtype=np.float64)
    return acc


def chi_squared_means(outcomes: np.ndarray, alphas: np.ndarray,
                      dtype=np.float64, chunk: int = 1 << 20) -> np.ndarray:
    """(1/N) sum_j e^{-(zeta_j . a - zeta_j* . a*)} for each row a of `alphas`.

    The summand is e^{-2i Im(zeta . a)} (unconjugated dot), modulus one.
    """
    alphas = np.atleast_2d(np.asarray(alphas, dtype=complex))
    # Im(zeta . a) = Re(z).Im(a) + Im(z).Re(a); conjugate the sum for the -2i sign.
    sums = _phase_factor_sums(outcomes, np.imag(alphas).T, np.real(alphas).T,
                              dtype, chunk)
    return np.conj(sums) / outcomes.shape[0]


def chi_heterodyne_means(outcomes: np.ndarray, alphas: np.ndarray,
                         dtype=np.float64, chunk: int = 1 << 20) -> np.ndarray:
    """e^{|a|^2/2} (1/N) sum_j e^{zeta_j^dag a - a^dag zeta_j} per query row."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=complex))
    # Im(zeta^dag a) = Re(z).Im(a) - Im(z).Re(a)
    sums = _phase_factor_sums(outcomes, np.imag(alphas).T, -np.real(alphas).T,
                              dtype, chunk)
    boost = np.exp(0.5 * np.sum(np.abs(alphas) ** 2, axis=1))
    return boost * sums / outcomes.shape[0]


# ---------------------------------------------------------------------------
# Record-level estimators
# ---------------------------------------------------------------------------

def _require_scheme(record: MeasurementRecord, scheme: str):
    if record.scheme != scheme:
        raise ValidationError(f"record holds {record.scheme!r} outcomes, need {scheme!r}")
    if record.count < 1:
        raise ValidationError("empty measurement record")


def estimate_chi_squared(record: MeasurementRecord, alpha) -> complex:
    """Unbiased estimator of chi^2(alpha) from Bell outcomes."""
    _require_scheme(record, "bell")
    a = np.asarray(alpha, dtype=complex).reshape(1, record.n)
    return complex(chi_squared_means(record.outcomes, a)[0])


def estimate_chi_heterodyne(record: MeasurementRecord, alpha) -> complex:
    """Unbiased estimator of chi(alpha) from heterodyne outcomes."""
    _require_scheme(record, "heterodyne")
    a = np.asarray(alpha, dtype=complex).reshape(1, record.n)
    return complex(chi_heterodyne_means(record.outcomes, a)[0])


def resolve_sign(v_hat: complex, epsilon: float) -> complex:
    """chi estimate (up to sign) from a chi^2 estimate.

    |v| <= (2/3) eps^2 maps to 0 (the boundary included); otherwise the
    principal square root. Whenever |v - chi^2| <= eps^2/3 this guarantees
    min over tau in {+-1} of |tau sqrt(v) - chi| <= eps.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValidationError(f"epsilon must lie in (0,1), got {epsilon}")
    v = complex(v_hat)
    if abs(v) <= (2.0 / 3.0) * epsilon * epsilon:
        return 0.0 + 0.0j
    return complex(np.sqrt(complex(v)))


def estimate_chi_classicality_aware(record: MeasurementRecord, alpha,
                                    classicality: float, epsilon: float) -> EstimateReport:
    """Heterodyne estimate inside the effective radius, zero beyond it."""
    if classicality is None or classicality <= 0:
        raise ValidationError(
            "classicality-aware estimation needs S > 0; use the plain estimator otherwise")
    if classicality > 1.0:
        raise ValidationError(f"classicality floor must lie in (0,1], got {classicality}")
    a = np.asarray(alpha, dtype=complex).reshape(-1)
    radius2 = float(np.sum(np.abs(a) ** 2))
    point = [[z.real, z.imag] for z in a]
    if radius2 >= effective_radius(classicality, epsilon):
        _require_scheme(record, "heterodyne")
        return EstimateReport(point=point, estimate=0.0 + 0.0j, scheme="classicality_aware",
                              samples_used=record.count, epsilon=epsilon, delta=None,
                              truncated=True)
    est = estimate_chi_heterodyne(record, a)
    return EstimateReport(point=point, estimate=est, scheme="classicality_aware",
                          samples_used=record.count, epsilon=epsilon, delta=None,
                          truncated=False)
