"""Exact outcome densities and samplers for the CV Bell measurement and
heterodyne detection on peak states.

Both densities are symplectic Fourier transforms of finite Gaussian sums, so
they are themselves finite signed mixtures of one shared isotropic Gaussian
times phase-space oscillations:

    p(zeta) = N_V(zeta) * [ c0 + sum_j 2 Re( amp_j e^{i Im(osc_j . zeta)} ) ],

with N_V the normalized 2n-dim Gaussian of per-coordinate variance V and
`.` the unconjugated dot product. Dropping the oscillations and taking
moduli gives a dominating envelope, which makes rejection sampling exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, NumericFailure
from .states import PeakState, char_fn

ENVELOPE_GUARD = {np.float64: 1e-9, np.float32: 3e-6}


class SignedGaussianMixture:
    """Signed mixture sharing one centered Gaussian profile.

    `amps`/`oscs` hold the full signed term list; construction merges
    coincident oscillation vectors and pairs (amp, osc) with (amp*, -osc) so
    evaluation touches each conjugate pair once. The normalization audit
    integral must come out at 1 for a probability density.
    """

    def __init__(self, n: int, variance: float, amps, oscs, audit_tol: float = 1e-6):
        self.n = int(n)
        self.variance = float(variance)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        oscs = np.asarray(oscs, dtype=complex).reshape(len(amps), self.n)
        amps, oscs = self._merge(amps, oscs)
        self.amps = amps
        self.oscs = oscs
        self._build_fast_path()
        self.normalization_audit = float(np.real(
            np.sum(self.amps * np.exp(-0.5 * self.variance
                                      * np.sum(np.abs(self.oscs) ** 2, axis=1)))))
        if abs(self.normalization_audit - 1.0) > audit_tol:
            raise NumericFailure(
                f"mixture normalization audit failed: integral = {self.normalization_audit}")

    @staticmethod
    def _merge(amps, oscs):
        out_a: list[complex] = []
        out_o: list[np.ndarray] = []
        for a, o in zip(amps, oscs):
            for i, oo in enumerate(out_o):
                if np.linalg.norm(o - oo) <= 1e-12:
                    out_a[i] += a
                    break
            else:
                out_a.append(complex(a))
                out_o.append(np.asarray(o, dtype=complex))
        keep = [i for i, a in enumerate(out_a) if abs(a) > 1e-16]
        n = oscs.shape[1]
        return (np.array([out_a[i] for i in keep], dtype=complex),
                np.array([out_o[i] for i in keep], dtype=complex).reshape(len(keep), n))

    def _build_fast_path(self):
        zero = [i for i in range(len(self.amps))
                if np.linalg.norm(self.oscs[i]) <= 1e-14]
        c0 = complex(np.sum(self.amps[zero]))
        if abs(c0.imag) > 1e-9:
            raise NumericFailure("zero-frequency coefficient is not real; broken Hermitian pairing")
        used = set(zero)
        half_a, half_o = [], []
        for i in range(len(self.amps)):
            if i in used:
                continue
            partner = None
            for j in range(len(self.amps)):
                if j in used or j == i:
                    continue
                if (np.linalg.norm(self.oscs[j] + self.oscs[i]) <= 1e-10
                        and abs(self.amps[j] - np.conj(self.amps[i])) <= 1e-10):
                    partner = j
                    break
            if partner is None:
                raise NumericFailure("oscillation term lacks its conjugate partner")
            used.update((i, partner))
            half_a.append(self.amps[i])
            half_o.append(self.oscs[i])
        self._c0 = c0.real
        self._half_amps = np.array(half_a, dtype=complex)
        self._half_oscs = (np.array(half_o, dtype=complex).reshape(len(half_a), self.n))
        # Split the canonical terms into base oscillations and exact second
        # harmonics (osc_j = 2 osc_i), which peak-pair mixtures always carry;
        # the harmonic's trig comes free from the base angle.
        k = len(self._half_amps)
        parent_of = {}
        for i in range(k):
            for j in range(k):
                if j != i and np.linalg.norm(
                        self._half_oscs[i] - 2.0 * self._half_oscs[j]) <= 1e-12:
                    parent_of[i] = j
                    break
        # a parent must itself be a base term; break chains conservatively
        base = [i for i in range(k)
                if i not in parent_of or parent_of[i] in parent_of]
        second = {parent_of[i]: i for i in parent_of if parent_of[i] not in parent_of}
        self._amp1 = np.array([self._half_amps[i] for i in base], dtype=complex)
        self._amp2 = np.array([self._half_amps[second[i]] if i in second else 0.0
                               for i in base], dtype=complex)
        base_oscs = (np.array([self._half_oscs[i] for i in base], dtype=complex)
                     .reshape(len(base), self.n))
        # Im(osc . zeta) = Re(zeta).Im(osc) + Im(zeta).Re(osc), split per block.
        self._mat_re = np.ascontiguousarray(np.imag(base_oscs).T)
        self._mat_im = np.ascontiguousarray(np.real(base_oscs).T)
        self._mats32 = (self._mat_re.astype(np.float32), self._mat_im.astype(np.float32))
        # envelope mass: oscillations dropped, amplitudes replaced by moduli
        self.envelope_mass = float(abs(self._c0) + 2.0 * np.sum(np.abs(self._half_amps)))

    # -- evaluation ---------------------------------------------------------
    def _bracket_parts(self, re: np.ndarray, im: np.ndarray,
                       work: dict | None = None) -> np.ndarray:
        """Bracket from split real/imag sample blocks, in their own dtype.

        `work` optionally carries reusable buffers across repeated batches.
        """
        if len(self._amp1) == 0:
            return np.full(re.shape[0], self._c0, dtype=re.dtype)
        f32 = re.dtype == np.float32
        mat_re, mat_im = self._mats32 if f32 else (self._mat_re, self._mat_im)
        rows, cols = re.shape[0], mat_re.shape[1]
        if work is None:
            work = {}
        if work.get("rows") != rows:
            work.update(rows=rows,
                        phases=np.empty((rows, cols), dtype=re.dtype),
                        c=np.empty(rows, dtype=re.dtype),
                        s=np.empty(rows, dtype=re.dtype),
                        out=np.empty(rows, dtype=re.dtype))
        phases, cbuf, sbuf = work["phases"], work["c"], work["s"]
        np.matmul(re, mat_re, out=phases)
        phases += im @ mat_im
        out = work["out"]
        out[:] = self._c0
        for b in range(cols):
            col = np.ascontiguousarray(phases[:, b])
            np.cos(col, out=cbuf)
            np.sin(col, out=sbuf)
            a1, a2 = self._amp1[b], self._amp2[b]
            out += (2.0 * a1.real) * cbuf
            if a1.imag != 0.0:
                out -= (2.0 * a1.imag) * sbuf
            if a2 != 0.0:
                # angle doubling: cos 2x = c^2 - s^2, sin 2x = 2 c s
                out += (2.0 * a2.real) * (cbuf * cbuf - sbuf * sbuf)
                if a2.imag != 0.0:
                    out -= (4.0 * a2.imag) * (cbuf * sbuf)
        return out

    def _bracket(self, zeta: np.ndarray) -> np.ndarray:
        """c0 + sum_j 2 Re(amp_j e^{i Im(osc_j . zeta)}) for a batch (m, n)."""
        return self._bracket_parts(np.ascontiguousarray(zeta.real),
                                   np.ascontiguousarray(zeta.imag))

    def value(self, zeta) -> np.ndarray:
        """Density values at a batch (m, n) of outcomes; real, >= -1e-9."""
        z = np.atleast_2d(np.asarray(zeta, dtype=complex))
        norm2 = np.sum(np.abs(z) ** 2, axis=1)
        gauss = np.exp(-norm2 / (2.0 * self.variance)) \
            / (2.0 * np.pi * self.variance) ** self.n
        return gauss * self._bracket(z)

    def log_value(self, zeta) -> np.ndarray:
        """log density, stable for product accumulation over many copies."""
        z = np.atleast_2d(np.asarray(zeta, dtype=complex))
        norm2 = np.sum(np.abs(z) ** 2, axis=1)
        bracket = np.maximum(self._bracket(z), 1e-300)
        return (-norm2 / (2.0 * self.variance)
                - self.n * np.log(2.0 * np.pi * self.variance) + np.log(bracket))

    # -- sampling -----------------------------------------------------------
    def sample(self, count: int, rng: np.random.Generator,
               dtype=np.float64) -> np.ndarray:
        """Exact draws by rejection against the oscillation-free envelope."""
        if count < 1:
            raise ValidationError(f"count must be >= 1, got {count}")
        guard = ENVELOPE_GUARD[np.dtype(dtype).type]
        scale = np.dtype(dtype).type(np.sqrt(self.variance))
        inv_mass = np.dtype(dtype).type(1.0 / self.envelope_mass)
        out = np.empty((count, self.n),
                       dtype=np.complex64 if dtype == np.float32 else complex)
        filled = 0
        # Envelope mass bounds the expected trials per accepted sample.
        batch = max(2048, min(int(1.2 * count * self.envelope_mass), 4_000_000))
        re = np.empty((batch, self.n), dtype=dtype)
        im = np.empty((batch, self.n), dtype=dtype)
        u = np.empty(batch, dtype=dtype)
        work: dict = {}
        while filled < count:
            rng.standard_normal(out=re, dtype=dtype)
            rng.standard_normal(out=im, dtype=dtype)
            re *= scale
            im *= scale
            ratio = self._bracket_parts(re, im, work)
            ratio *= inv_mass
            if np.max(ratio) > 1.0 + guard:
                raise NumericFailure(
                    f"rejection envelope violated: ratio {np.max(ratio)} > 1; "
                    "the proposal no longer dominates the density")
            rng.random(out=u, dtype=dtype)
            accept = u < ratio
            take = min(count - filled, int(np.count_nonzero(accept)))
            idx = np.flatnonzero(accept)[:take]
            out[filled:filled + take] = re[idx] + 1j * im[idx]
            filled += take
        return out.astype(complex, copy=False) if dtype == np.float64 else out


# ---------------------------------------------------------------------------
# Density constructors
# ---------------------------------------------------------------------------

def heterodyne_mixture(state: PeakState) -> SignedGaussianMixture:
    """Husimi Q density: one term per peak, V = (2a+1)/4."""
    t = state.a + 0.5
    sig2 = state.sigma2
    abs2_g = np.sum(np.abs(state.centers) ** 2, axis=1)
    amps = state.weights * np.exp((1.0 / (4.0 * t * sig2 ** 2) - state.a) * abs2_g)
    oscs = np.conj(state.centers) / (t * sig2)
    return SignedGaussianMixture(n=state.n, variance=t / 2.0, amps=amps, oscs=oscs)


def _validate_bell_pair(state: PeakState, partner: PeakState, tol: float = 1e-8):
    """The Bell inputs must satisfy chi_partner(alpha*) = chi_state(alpha).

    The partner is the reflected state sent through the linear-optical
    circuit; anything else breaks the chi^2 factorization of the outcome law.
    """
    if partner.n != state.n:
        raise ValidationError("Bell pair mode counts differ")
    rng = np.random.default_rng(0x5EED)
    pts = (rng.normal(size=(16, state.n)) + 1j * rng.normal(size=(16, state.n)))
    err = np.max(np.abs(char_fn(partner, np.conj(pts)) - char_fn(state, pts)))
    if err > tol:
        raise ValidationError(
            "Bell input pair violates the reflection contract "
            f"chi_partner(alpha*) = chi_state(alpha) (max deviation {err:.3e}); "
            "pass the reflected state propagated through the circuit")


def bell_mixture(state: PeakState, partner: PeakState) -> SignedGaussianMixture:
    """Bell outcome density: the symplectic Fourier transform of chi^2.

    chi^2 of a peak state is the double sum over peak pairs (j, k) of
    Gaussians in alpha, so p(zeta) has one term per ordered pair with

        amp = w_j w_k exp[-a(|g_j|^2+|g_k|^2) + |g_j+g_k|^2/(8 a sigma^4)],
        osc = (g_j + g_k)/(2 a sigma^2),          V = a.
    """
    _validate_bell_pair(state, partner)
    a = state.a
    sig2 = state.sigma2
    w = state.weights
    g = state.centers
    abs2_g = np.sum(np.abs(g) ** 2, axis=1)
    m = g[:, None, :] + g[None, :, :]                  # (k, k, n) pair sums
    m2 = np.sum(np.abs(m) ** 2, axis=2)
    amps = (w[:, None] * w[None, :]
            * np.exp(-a * (abs2_g[:, None] + abs2_g[None, :]) + m2 / (8.0 * a * sig2 ** 2)))
    oscs = m / (2.0 * a * sig2)
    return SignedGaussianMixture(n=state.n, variance=a,
                                 amps=amps.reshape(-1), oscs=oscs.reshape(-1, state.n))


def bell_density(state: PeakState, reflected_then_circuit: PeakState, zeta):
    """p(zeta) for the Bell measurement on state x (circuit-propagated reflection)."""
    mix = bell_mixture(state, reflected_then_circuit)
    vals = mix.value(zeta)
    return vals if np.asarray(zeta).ndim > 1 else float(vals[0])


def heterodyne_density(state: PeakState, zeta):
    """Husimi Q density <zeta|rho|zeta>/pi^n (= s-ordered QPD at s = -1)."""
    mix = heterodyne_mixture(state)
    vals = mix.value(zeta)
    return vals if np.asarray(zeta).ndim > 1 else float(vals[0])


# ---------------------------------------------------------------------------
# Measurement records
# ---------------------------------------------------------------------------

@dataclass
class MeasurementRecord:
    scheme: str                    # "bell" | "heterodyne"
    outcomes: np.ndarray           # (count, n) complex
    state_descriptor: dict
    seed: int
    n: int

    def __post_init__(self):
        if self.scheme not in ("bell", "heterodyne"):
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        self.outcomes = np.asarray(self.outcomes, dtype=complex).reshape(-1, self.n)
        if self.outcomes.shape[0] < 1:
            raise ValidationError("measurement record must hold at least one outcome")

    @property
    def count(self) -> int:
        return self.outcomes.shape[0]

    def write_jsonl(self, path):
        header = {"scheme": self.scheme, "n": self.n, "seed": self.seed,
                  "count": self.count, "state_descriptor": self.state_descriptor}
        with open(path, "w") as fh:
            fh.write(json.dumps(header) + "\n")
            for row in self.outcomes:
                flat = []
                for z in row:
                    flat.extend([float(z.real), float(z.imag)])
                fh.write(json.dumps(flat) + "\n")

    @staticmethod
    def read_jsonl(path) -> "MeasurementRecord":
        with open(path) as fh:
            header = json.loads(fh.readline())
            rows = [json.loads(line) for line in fh if line.strip()]
        n = int(header["n"])
        data = np.array(rows, dtype=float).reshape(len(rows), n, 2)
        outcomes = data[..., 0] + 1j * data[..., 1]
        return MeasurementRecord(scheme=header["scheme"], outcomes=outcomes,
                                 state_descriptor=header.get("state_descriptor", {}),
                                 seed=header.get("seed", 0), n=n)


def sample_bell(state: PeakState, reflected_then_circuit: PeakState, count: int,
                seed: int, stream: int = 0, dtype=np.float64) -> MeasurementRecord:
    """i.i.d. Bell outcomes for `count` copies of the validated input pair."""
    from .numerics import make_rng
    mix = bell_mixture(state, reflected_then_circuit)
    outcomes = mix.sample(count, make_rng(seed, stream), dtype=dtype)
    return MeasurementRecord(
        scheme="bell", outcomes=outcomes, seed=seed, n=state.n,
        state_descriptor={"state": state.to_json_dict(),
                          "partner": reflected_then_circuit.to_json_dict()})


def sample_heterodyne(state: PeakState, count: int, seed: int, stream: int = 0,
                      dtype=np.float64) -> MeasurementRecord:
    """i.i.d. heterodyne outcomes from the Husimi Q density."""
    from .numerics import make_rng
    mix = heterodyne_mixture(state)
    outcomes = mix.sample(count, make_rng(seed, stream), dtype=dtype)
    return MeasurementRecord(
        scheme="heterodyne", outcomes=outcomes, seed=seed, n=state.n,
        state_descriptor={"state": state.to_json_dict()})
