"""The peak-state family and its closed-form descriptors.

A peak state is (1-nu^2)^n nu^N ( sum_k w_k D^dag(gamma_k) ) nu^N, stored as
the list of (weight, center) pairs. Its characteristic function is a finite
sum of real Gaussian kernels,

    chi(alpha) = sum_k w_k exp[ -(|alpha|^2+|gamma_k|^2)/(2 Sigma^2)
                                - |gamma_k-alpha|^2/(2 sigma^2) ],

with sigma^2 = (1/nu - nu)/2 and Sigma^2 = (1+nu)/(1-nu). Every s-ordered
quasiprobability of such a state is again a finite sum of Gaussians times
phase-space oscillations, evaluated here in closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import log

import numpy as np

from .errors import ValidationError
from .numerics import SymmetricUnitary

MERGE_TOL = 1e-12
EXP_FLOOR = -745.0  # exp() underflows to 0 below this; clamp to avoid noise


def _clamped_exp(x):
    return np.exp(np.maximum(x, EXP_FLOOR))


def _as_center_array(gamma, n: int) -> np.ndarray:
    g = np.atleast_1d(np.asarray(gamma, dtype=complex))
    if g.shape != (n,):
        raise ValidationError(f"expected a length-{n} complex vector, got shape {g.shape}")
    if not np.all(np.isfinite(g.view(float))):
        raise ValidationError("center vector has non-finite entries")
    return g


@dataclass(frozen=True)
class PeakState:
    """Immutable n-mode peak state; evaluators below are pure functions."""

    n: int
    nu: float
    weights: np.ndarray          # shape (k,), complex
    centers: np.ndarray          # shape (k, n), complex
    eps0: float | None = None    # constructor metadata, not used by evaluators

    def __post_init__(self):
        if not (0.0 < self.nu < 1.0):
            raise ValidationError(f"nu must lie in (0, 1), got {self.nu}")
        w = np.atleast_1d(np.asarray(self.weights, dtype=complex))
        c = np.asarray(self.centers, dtype=complex).reshape(len(w), self.n)
        w, c = _merge_peaks(w, c)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", c)
        self._validate()

    def _validate(self):
        norms = np.linalg.norm(self.centers, axis=1)
        anchor = np.flatnonzero(norms <= MERGE_TOL)
        if anchor.size != 1 or abs(self.weights[anchor[0]] - 1.0) > 1e-9:
            raise ValidationError("peak state needs exactly one unit-weight peak at the origin")
        offsets = np.flatnonzero(norms > MERGE_TOL)
        side_mass = float(np.sum(np.abs(self.weights[offsets])))
        if side_mass > 1.0 + 1e-9:
            raise ValidationError(
                f"sum of off-origin |weights| = {side_mass:.6f} > 1 breaks the positivity guarantee")
        for i in offsets:
            d = np.linalg.norm(self.centers + self.centers[i], axis=1)
            j = int(np.argmin(d))
            if d[j] > 1e-9 or abs(self.weights[j] - np.conj(self.weights[i])) > 1e-9:
                raise ValidationError("peaks are not Hermitian-paired: missing (w*, -gamma) partner")

    # -- derived thermal-filter parameters ---------------------------------
    @property
    def sigma2(self) -> float:
        return 0.5 * (1.0 / self.nu - self.nu)

    @property
    def Sigma2(self) -> float:
        return (1.0 + self.nu) / (1.0 - self.nu)

    @property
    def a(self) -> float:
        return 0.5 / self.sigma2 + 0.5 / self.Sigma2

    def thermal_reference(self) -> "PeakState":
        """The gamma = 0 member of the family (same nu)."""
        return PeakState(n=self.n, nu=self.nu,
                         weights=np.array([1.0 + 0j]),
                         centers=np.zeros((1, self.n), dtype=complex))

    def peak_multiset_equal(self, other: "PeakState", tol: float = 1e-9) -> bool:
        if self.n != other.n or abs(self.nu - other.nu) > tol:
            return False
        if len(self.weights) != len(other.weights):
            return False
        used = np.zeros(len(other.weights), dtype=bool)
        for w, g in zip(self.weights, self.centers):
            found = False
            for j in range(len(other.weights)):
                if used[j]:
                    continue
                if (abs(other.weights[j] - w) <= tol
                        and np.linalg.norm(other.centers[j] - g) <= tol):
                    used[j] = True
                    found = True
                    break
            if not found:
                return False
        return True

    # -- JSON schema: {n, nu, eps0?, peaks: [{w_re, w_im, center: [{re, im}...]}]}
    def to_json_dict(self) -> dict:
        peaks = []
        for w, g in zip(self.weights, self.centers):
            peaks.append({
                "w_re": float(w.real), "w_im": float(w.imag),
                "center": [{"re": float(z.real), "im": float(z.imag)} for z in g],
            })
        out = {"n": self.n, "nu": self.nu, "peaks": peaks}
        if self.eps0 is not None:
            out["eps0"] = self.eps0
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(d: dict) -> "PeakState":
        try:
            n = int(d["n"])
            nu = float(d["nu"])
            raw = d["peaks"]
            weights = np.array([p["w_re"] + 1j * p["w_im"] for p in raw], dtype=complex)
            centers = np.array(
                [[z["re"] + 1j * z["im"] for z in p["center"]] for p in raw],
                dtype=complex).reshape(len(raw), n)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed peak-state JSON: {exc}") from exc
        return PeakState(n=n, nu=nu, weights=weights, centers=centers,
                         eps0=d.get("eps0"))

    @staticmethod
    def from_json(s: str) -> "PeakState":
        return PeakState.from_json_dict(json.loads(s))


def _merge_peaks(weights: np.ndarray, centers: np.ndarray):
    """Coalesce coincident centers (summing weights) and drop null peaks."""
    out_w: list[complex] = []
    out_c: list[np.ndarray] = []
    for w, g in zip(weights, centers):
        for i, c in enumerate(out_c):
            if np.linalg.norm(g - c) <= MERGE_TOL:
                out_w[i] += w
                break
        else:
            out_w.append(complex(w))
            out_c.append(np.asarray(g, dtype=complex))
    keep = [i for i, w in enumerate(out_w) if abs(w) > 1e-15]
    w = np.array([out_w[i] for i in keep], dtype=complex)
    c = (np.array([out_c[i] for i in keep], dtype=complex).reshape(len(keep), centers.shape[1])
         if keep else np.zeros((0, centers.shape[1]), dtype=complex))
    return w, c


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def _check_eps0(eps0: float):
    if not (0.0 < eps0 <= 0.25):
        raise ValidationError(
            f"eps0 must lie in (0, 1/4] for guaranteed positivity, got {eps0}")


def make_thermal(n: int, nu: float) -> PeakState:
    return PeakState(n=n, nu=nu, weights=np.array([1.0 + 0j]),
                     centers=np.zeros((1, n), dtype=complex))


def make_three_peak(n: int, nu: float, eps0: float, gamma) -> PeakState:
    """Peaks {(1, 0), (2i eps0, gamma), (-2i eps0, -gamma)}."""
    _check_eps0(eps0)
    g = _as_center_array(gamma, n)
    weights = np.array([1.0, 2j * eps0, -2j * eps0], dtype=complex)
    centers = np.stack([np.zeros(n, dtype=complex), g, -g])
    return PeakState(n=n, nu=nu, weights=weights, centers=centers, eps0=eps0)


def make_five_peak(n: int, nu: float, eps0: float, gamma,
                   u: SymmetricUnitary) -> PeakState:
    """Peaks {(1,0), (+-i eps0, +-gamma), (+-i eps0, +-U^T gamma*)}; reflection symmetric."""
    _check_eps0(eps0)
    g = _as_center_array(gamma, n)
    if u.n != n:
        raise ValidationError(f"unitary is {u.n}x{u.n} but the state has {n} modes")
    gr = u.matrix.T @ np.conj(g)
    weights = np.array([1.0, 1j * eps0, -1j * eps0, 1j * eps0, -1j * eps0], dtype=complex)
    centers = np.stack([np.zeros(n, dtype=complex), g, -g, gr, -gr])
    return PeakState(n=n, nu=nu, weights=weights, centers=centers, eps0=eps0)


def make_three_peak_classical(n: int, classicality: float, eps0: float, gamma) -> PeakState:
    """Three-peak state guaranteed at least `classicality`-classical.

    Uses nu = sqrt((1-S)/(1+S)), the largest nu whose s'(nu) equals S, so
    s_max >= S for every gamma.
    """
    if not (0.0 < classicality < 1.0):
        raise ValidationError(f"classicality target must lie in (0,1), got {classicality}")
    nu = float(np.sqrt((1.0 - classicality) / (1.0 + classicality)))
    return make_three_peak(n, nu, eps0, gamma)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def reflect(state: PeakState, u: SymmetricUnitary) -> PeakState:
    """State with chi_out(alpha) = chi_in(U alpha*): peaks map to (w, U^T gamma*)."""
    if u.n != state.n:
        raise ValidationError("reflection unitary dimension mismatch")
    centers = np.conj(state.centers) @ u.matrix  # rows: U^T gamma* = (gamma^dag U)^T
    return PeakState(n=state.n, nu=state.nu, weights=state.weights.copy(),
                     centers=centers, eps0=state.eps0)


def apply_circuit(state: PeakState, u: SymmetricUnitary) -> PeakState:
    """Passive linear-optical circuit: chi_out(alpha) = chi_in(U^T alpha).

    Peaks map to (w, U* gamma).
    """
    if u.n != state.n:
        raise ValidationError("circuit unitary dimension mismatch")
    centers = state.centers @ np.conj(u.matrix).T  # rows: U* gamma
    return PeakState(n=state.n, nu=state.nu, weights=state.weights.copy(),
                     centers=centers, eps0=state.eps0)


def bell_partner(state: PeakState, u: SymmetricUnitary) -> PeakState:
    """The second Bell-measurement input: the reflected state sent through the circuit."""
    return apply_circuit(reflect(state, u), u)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

def _as_points(alpha, n: int):
    a = np.asarray(alpha, dtype=complex)
    single = (a.ndim == 1) or (a.ndim == 0 and n == 1)
    pts = np.atleast_2d(a.reshape(-1, n) if a.ndim else a.reshape(1, 1))
    if pts.shape[1] != n:
        raise ValidationError(f"phase-space points must have {n} columns, got {pts.shape}")
    return pts, single


def char_fn(state: PeakState, alpha):
    """chi(alpha) = Tr[rho D(alpha)]; accepts one point (n,) or a batch (m, n)."""
    pts, single = _as_points(alpha, state.n)
    abs2_a = np.sum(np.abs(pts) ** 2, axis=1)
    abs2_g = np.sum(np.abs(state.centers) ** 2, axis=1)
    cross = np.real(np.conj(pts) @ state.centers.T)            # Re(alpha^dag gamma)
    dist2 = abs2_g[None, :] + abs2_a[:, None] - 2.0 * cross    # |gamma - alpha|^2
    expo = (-(abs2_a[:, None] + abs2_g[None, :]) / (2.0 * state.Sigma2)
            - dist2 / (2.0 * state.sigma2))
    vals = _clamped_exp(expo) @ state.weights
    return vals[0] if single else vals


def s_char_fn(state: PeakState, s: float, alpha):
    """e^{s |alpha|^2 / 2} chi(alpha)."""
    _check_s(s)
    pts, single = _as_points(alpha, state.n)
    abs2 = np.sum(np.abs(pts) ** 2, axis=1)
    vals = _clamped_exp(0.5 * s * abs2) * char_fn(state, pts)
    return vals[0] if single else vals


def _check_s(s: float):
    if not (-1.0 <= s <= 1.0):
        raise ValidationError(f"ordering parameter s must lie in [-1, 1], got {s}")


def s_qpd(state: PeakState, s: float, beta):
    """s-ordered quasiprobability W(s, beta), exact for every peak state.

    Each peak contributes a Gaussian tilted by a phase-space oscillation:

        w (pi t)^-n e^{-|beta|^2/t} e^{(1/(4 t sigma^4) - a)|gamma|^2}
          e^{-i Im(beta^dag gamma) / (t sigma^2)},      t = a - s/2.

    For thermal / three-peak layouts this reduces to the W^(0) (1 + 4 eps0 ...)
    closed form with coefficients f1(s), f2(s) below.
    """
    _check_s(s)
    pts, single = _as_points(beta, state.n)
    t = state.a - 0.5 * s
    sig2 = state.sigma2
    abs2_b = np.sum(np.abs(pts) ** 2, axis=1)
    abs2_g = np.sum(np.abs(state.centers) ** 2, axis=1)
    im_bg = np.imag(np.conj(pts) @ state.centers.T)            # Im(beta^dag gamma)
    amp = state.weights * _clamped_exp((1.0 / (4.0 * t * sig2 ** 2) - state.a) * abs2_g)
    base = _clamped_exp(-abs2_b / t) / (np.pi * t) ** state.n
    vals = base * np.real(np.exp(-1j * im_bg / (t * sig2)) @ amp)
    return vals[0] if single else vals


def wigner(state: PeakState, beta):
    """Wigner function, the s = 0 quasiprobability."""
    return s_qpd(state, 0.0, beta)


def f1(s: float, nu: float) -> float:
    """Oscillation-amplitude exponent of the s-ordered QPD sine correction."""
    return 0.5 - (1.0 - s) / ((1.0 - s) + nu ** 2 * (1.0 + s))


def f2(s: float, nu: float) -> float:
    """Oscillation-frequency coefficient of the s-ordered QPD sine correction."""
    return 4.0 * nu / ((1.0 - s) + nu ** 2 * (1.0 + s))


def mean_photon(state: PeakState) -> float:
    """<N> = n (a - 1/2); shared by all members of a fixed-nu family."""
    return state.n * (state.a - 0.5)


def fock1_char(alpha):
    """Single-photon characteristic function (1 - |alpha|^2) e^{-|alpha|^2/2}."""
    a = np.asarray(alpha, dtype=complex)
    if a.ndim > 1 and a.shape[-1] != 1:
        raise ValidationError("fock1_char is single-mode only")
    abs2 = np.abs(a) ** 2 if a.ndim <= 1 else np.abs(a[..., 0]) ** 2
    return (1.0 - abs2) * np.exp(-abs2 / 2.0)


# ---------------------------------------------------------------------------
# Classicality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalityReport:
    s_max: float
    s_prime: float
    c: float  # log(1/(4 eps0)) / |gamma|^2; inf for the thermal member


def s_prime(nu: float) -> float:
    """Classicality floor (1 - nu^2)/(1 + nu^2) = 1/(2a), gamma-independent."""
    return (1.0 - nu ** 2) / (1.0 + nu ** 2)


def classicality_smax(nu: float, eps0: float, gamma) -> ClassicalityReport:
    """Largest s with a nonnegative s-ordered QPD for the three-peak state."""
    if not (0.0 < nu < 1.0):
        raise ValidationError(f"nu must lie in (0,1), got {nu}")
    _check_eps0(eps0)
    g = np.atleast_1d(np.asarray(gamma, dtype=complex))
    g2 = float(np.sum(np.abs(g) ** 2))
    sp = s_prime(nu)
    if g2 == 0.0:
        return ClassicalityReport(s_max=1.0, s_prime=sp, c=float("inf"))
    c = log(1.0 / (4.0 * eps0)) / g2
    s_max = min(1.0, ((1.0 - nu ** 2) + 2.0 * c * (1.0 + nu ** 2))
                / ((1.0 + nu ** 2) + 2.0 * c * (1.0 - nu ** 2)))
    if s_max < sp - 1e-12:
        raise ValidationError("internal inconsistency: s_max fell below s'(nu)")
    return ClassicalityReport(s_max=s_max, s_prime=sp, c=c)


# ---------------------------------------------------------------------------
# Grid-based symplectic Fourier transform (independent slow path, n = 1)
# ---------------------------------------------------------------------------

def s_qpd_grid_1mode(chi, s: float, betas, half_width: float, points: int = 512):
    """W(s, beta) for one mode by direct quadrature of the defining integral.

    `chi` maps a batch (m, 1) of alpha to chi(alpha). Used as the independent
    oracle for the closed-form evaluators; O(points^2) per call.
    """
    xs = np.linspace(-half_width, half_width, points)
    dx = xs[1] - xs[0]
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    alphas = (gx + 1j * gy).reshape(-1, 1)
    chi_s = np.asarray(chi(alphas)).reshape(-1) * np.exp(0.5 * s * (np.abs(alphas[:, 0]) ** 2))
    pts = np.atleast_1d(np.asarray(betas, dtype=complex)).reshape(-1)
    out = np.empty(pts.shape, dtype=float)
    for i, b in enumerate(pts):
        phase = np.exp(2j * (gx.reshape(-1) * b.imag - gy.reshape(-1) * b.real))
        out[i] = np.real(np.sum(chi_s * phase)) * dx * dx / np.pi ** 2
    return out if out.size > 1 else float(out[0])
