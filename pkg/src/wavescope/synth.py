"""Synthetic signals with known scaling, spectral or dynamical ground truth.

Every generator is deterministic for a given (parameters, seed) pair and
returns a :class:`~wavescope.signal_core.TimeSeries`.  Closed-form target
values (generalized Hurst exponents of the cascade, lag-1 correlation of
fractional noise) live here next to the generators they describe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import EmbeddingError, NyquistError, ValidationError
from .signal_core import TimeSeries

__all__ = [
    "BounceParams",
    "CascadeParams",
    "gen_fbm",
    "gen_power_law_noise",
    "gen_sine_mix",
    "gen_bouncing_ball",
    "gen_binomial_cascade",
    "bounce_map_trajectory",
    "bounce_map_jacobian",
    "cascade_hurst",
    "fgn_lag1_autocorr",
]

#: Ring-down time constant of the rendered impact response, seconds.
IMPACT_RINGDOWN_S = 2e-3


@dataclass(frozen=True)
class BounceParams:
    """Parameters of the sinusoidally driven impact map.

    The map advances the drive phase by the (dimensionless) impact
    velocity and updates the velocity with a restitution loss plus a
    kick from the drive:

        phi[k+1] = phi[k] + v[k]            (mod 2 pi)
        v[k+1]   = restitution * v[k] - amplitude * cos(phi[k+1])

    ``amplitude = 0`` collapses to pure geometric decay of ``v``.
    """

    amplitude: float
    drive_freq: float
    restitution: float
    n_impacts: int
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError("amplitude must be >= 0")
        if not self.drive_freq > 0:
            raise ValidationError("drive_freq must be positive")
        if not 0.0 < self.restitution < 1.0:
            raise ValidationError("restitution must lie in (0, 1)")
        if self.n_impacts < 1:
            raise ValidationError("n_impacts must be >= 1")


@dataclass(frozen=True)
class CascadeParams:
    """Binomial multiplicative cascade: weight ``a`` to the left half at
    every dyadic refinement.  The construction is deterministic; ``seed``
    is accepted for interface uniformity and recorded but unused."""

    a: float
    levels: int
    seed: int = 0

    def __post_init__(self):
        if not 0.5 < self.a < 1.0:
            raise ValidationError("cascade weight a must lie in (0.5, 1)")
        if self.levels < 1:
            raise ValidationError("levels must be >= 1")


def fgn_lag1_autocorr(hurst: float) -> float:
    """Lag-1 autocorrelation of fractional Gaussian noise: 2**(2H-1) - 1."""
    return 2.0 ** (2.0 * hurst - 1.0) - 1.0


def cascade_hurst(a: float, q: float) -> float:
    """Generalized Hurst exponent of the binomial cascade.

    h(q) = 1/q - ln(a**q + (1-a)**q) / (q ln 2), with the continuous
    q -> 0 limit -(ln a + ln(1-a)) / (2 ln 2).
    """
    b = 1.0 - a
    if q == 0:
        return -(math.log(a) + math.log(b)) / (2.0 * math.log(2.0))
    return 1.0 / q - math.log(a**q + b**q) / (q * math.log(2.0))


def _fgn_autocovariance(hurst: float, max_lag: int) -> np.ndarray:
    k = np.arange(max_lag + 1, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * (
        np.abs(k + 1) ** two_h - 2.0 * np.abs(k) ** two_h + np.abs(k - 1) ** two_h
    )


def _circulant_gaussian(cov: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a stationary Gaussian vector by circulant embedding.

    ``cov`` holds autocovariances for lags 0..m with m >= n - 1.  The
    embedding size is 2m; eigenvalues of the circulant must be
    non-negative for the construction to be exact.
    """
    first_row = np.concatenate([cov, cov[-2:0:-1]])
    lam = np.fft.fft(first_row).real
    if lam.min() < -1e-9 * lam.max():
        raise EmbeddingError(
            f"circulant embedding not non-negative definite "
            f"(min eigenvalue {lam.min():.3e})"
        )
    lam = np.clip(lam, 0.0, None)
    m = first_row.size
    half = m // 2
    z = np.zeros(m, dtype=complex)
    z[0] = math.sqrt(lam[0]) * rng.standard_normal()
    z[half] = math.sqrt(lam[half]) * rng.standard_normal()
    re = rng.standard_normal(half - 1)
    im = rng.standard_normal(half - 1)
    z[1:half] = np.sqrt(lam[1:half] / 2.0) * (re + 1j * im)
    z[half + 1 :] = np.conj(z[1:half][::-1])
    x = math.sqrt(m) * np.fft.ifft(z).real
    return x[:n]


def gen_fbm(
    hurst: float,
    n: int,
    seed: int = 0,
    sample_rate: float = 1.0,
) -> TimeSeries:
    """Fractional Brownian motion as the running sum of exact fGn.

    The increments are drawn by circulant embedding of the fGn
    autocovariance, which reproduces the target covariance exactly (no
    truncation).  Should the embedding spectrum come out negative, the
    embedding is retried once at double size before failing.

    Requires ``n`` to be a power of two and at least 256.
    """
    if not 0.0 < hurst < 1.0:
        raise ValidationError("hurst must lie in (0, 1)")
    if n < 256 or n & (n - 1):
        raise ValidationError("n must be a power of two, at least 256")
    rng = np.random.default_rng(seed)
    for max_lag in (n, 2 * n):
        cov = _fgn_autocovariance(hurst, max_lag)
        try:
            fgn = _circulant_gaussian(cov, n, rng)
            break
        except EmbeddingError:
            if max_lag == 2 * n:
                raise
    samples = np.cumsum(fgn)
    return TimeSeries(samples, sample_rate, label=f"fbm(H={hurst:g}, seed={seed})")


def gen_power_law_noise(
    beta: float,
    n: int,
    seed: int = 0,
    sample_rate: float = 1.0,
) -> TimeSeries:
    """Gaussian noise with one-sided power spectrum proportional to f**-beta.

    Synthesized in the Fourier domain: independent complex coefficients
    scaled by f**(-beta/2), zero DC, then inverse transformed and
    normalized to unit variance.
    """
    if not 0.0 <= beta <= 8.0:
        raise ValidationError("beta must lie in [0, 8]")
    if n < 8 or n & (n - 1):
        raise ValidationError("n must be a power of two, at least 8")
    rng = np.random.default_rng(seed)
    half = n // 2
    freqs = np.arange(1, half + 1, dtype=float) / n
    scale = freqs ** (-beta / 2.0)
    re = rng.standard_normal(half)
    im = rng.standard_normal(half)
    spec = np.zeros(half + 1, dtype=complex)
    spec[1:half] = scale[: half - 1] * (re[: half - 1] + 1j * im[: half - 1])
    spec[half] = scale[half - 1] * re[half - 1]
    samples = np.fft.irfft(spec, n=n)
    samples /= samples.std()
    return TimeSeries(
        samples, sample_rate, label=f"powerlaw(beta={beta:g}, seed={seed})"
    )


def gen_sine_mix(
    components: Sequence[tuple[float, float, float]],
    sample_rate: float,
    n: int,
) -> TimeSeries:
    """Sum of sinusoids given as (period_s, amplitude, phase_rad) triples.

    Raises NyquistError if any period is at or below two samples.
    """
    if not components:
        raise ValidationError("need at least one component")
    if n < 2:
        raise ValidationError("need at least two samples")
    t = np.arange(n) / sample_rate
    samples = np.zeros(n)
    for period, amplitude, phase in components:
        if period <= 2.0 / sample_rate:
            raise NyquistError(
                f"period {period:g} s is not resolvable at {sample_rate:g} Hz"
            )
        samples += amplitude * np.sin(2.0 * math.pi * t / period + phase)
    label = "+".join(f"{p:g}s" for p, _, _ in components)
    return TimeSeries(samples, sample_rate, label=f"sines({label})")


def bounce_map_trajectory(
    p: BounceParams, n: int | None = None, burn_in: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Iterate the impact map; returns (phases, velocities) after burn-in.

    The initial condition is drawn from the seeded generator, so the
    trajectory is reproducible bit for bit.
    """
    n = p.n_impacts if n is None else n
    rng = np.random.default_rng(p.seed)
    phi = float(rng.uniform(0.0, 2.0 * math.pi))
    v = float(rng.uniform(math.pi, 3.0 * math.pi))
    phis = np.empty(n)
    vs = np.empty(n)
    total = burn_in + n
    for k in range(total):
        phi = (phi + v) % (2.0 * math.pi)
        v = p.restitution * v - p.amplitude * math.cos(phi)
        if k >= burn_in:
            phis[k - burn_in] = phi
            vs[k - burn_in] = v
    return phis, vs


def bounce_map_jacobian(phi_next: float, p: BounceParams) -> np.ndarray:
    """Jacobian of one impact-map step, evaluated at the updated phase."""
    s = p.amplitude * math.sin(phi_next)
    return np.array([[1.0, 1.0], [s, p.restitution + s]])


def gen_bouncing_ball(
    p: BounceParams,
    sample_rate: float | None = None,
    burn_in: int = 100,
) -> TimeSeries:
    """Impact train of the driven bouncing map rendered as a time series.

    Each impact contributes a spike whose height is the impact speed,
    followed by an exponential ring-down with a 2 ms time constant.  Time
    between impacts is the phase advance divided by the drive angular
    frequency; a small positive floor keeps degenerate (chattering)
    trajectories renderable.
    """
    if sample_rate is None:
        sample_rate = 64.0 * p.drive_freq
    phis, vs = bounce_map_trajectory(p, burn_in=burn_in)
    omega = 2.0 * math.pi * p.drive_freq
    gaps = np.maximum(np.abs(vs), 1e-3 * math.pi) / omega
    impact_times = np.concatenate([[0.0], np.cumsum(gaps[:-1])])
    duration = impact_times[-1] + 5.0 * IMPACT_RINGDOWN_S
    n_samples = int(math.ceil(duration * sample_rate)) + 1
    impulses = np.zeros(n_samples)
    idx = np.minimum(np.round(impact_times * sample_rate).astype(int), n_samples - 1)
    np.add.at(impulses, idx, np.abs(vs))
    decay = math.exp(-1.0 / (sample_rate * IMPACT_RINGDOWN_S))
    samples = lfilter([1.0], [1.0, -decay], impulses)
    return TimeSeries(
        samples,
        sample_rate,
        label=f"bounce(A={p.amplitude:g}, r={p.restitution:g}, seed={p.seed})",
    )


def gen_binomial_cascade(p: CascadeParams) -> TimeSeries:
    """Deterministic binomial measure of length 2**levels at unit rate.

    Element i receives weight a**popcount(i) * (1-a)**(levels-popcount(i)),
    the standard dyadic multiplicative construction whose generalized Hurst
    exponents are given by :func:`cascade_hurst`.
    """
    n = 2**p.levels
    idx = np.arange(n, dtype=np.uint64)
    bits = np.zeros(n, dtype=np.int64)
    tmp = idx.copy()
    while tmp.any():
        bits += (tmp & 1).astype(np.int64)
        tmp >>= 1
    samples = (p.a**bits) * ((1.0 - p.a) ** (p.levels - bits))
    return TimeSeries(
        samples, 1.0, label=f"cascade(a={p.a:g}, levels={p.levels})"
    )
