import math

import numpy as np
import pytest

from wavescope import NyquistError, ValidationError
from wavescope.synth import (
    BounceParams,
    CascadeParams,
    bounce_map_jacobian,
    bounce_map_trajectory,
    cascade_hurst,
    fgn_lag1_autocorr,
    gen_binomial_cascade,
    gen_bouncing_ball,
    gen_fbm,
    gen_power_law_noise,
    gen_sine_mix,
)


# ---------------------------------------------------------------- fbm / fgn


def test_fbm_requires_power_of_two():
    with pytest.raises(ValidationError):
        gen_fbm(0.5, 1000)
    with pytest.raises(ValidationError):
        gen_fbm(0.5, 128)  # below the 256 minimum


def test_fbm_hurst_range():
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValidationError):
            gen_fbm(bad, 1024)


def test_fbm_deterministic_per_seed():
    a = gen_fbm(0.7, 1024, seed=5)
    b = gen_fbm(0.7, 1024, seed=5)
    c = gen_fbm(0.7, 1024, seed=6)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_fbm_starts_near_origin_and_grows():
    ts = gen_fbm(0.5, 4096, seed=1)
    # a path, not noise: variance of the second half exceeds the first a lot
    assert np.var(ts.samples[2048:]) > np.var(ts.samples[:64])


def test_fbm_increment_scaling_matches_hurst():
    # E|B(t+k) - B(t)|^2 = c * k^{2H}; regress over dyadic lags
    H = 0.7
    ts = gen_fbm(H, 2**15, seed=3)
    x = ts.samples
    lags = np.array([1, 2, 4, 8, 16, 32])
    m2 = np.array([np.mean((x[k:] - x[:-k]) ** 2) for k in lags])
    slope = np.polyfit(np.log(lags), np.log(m2), 1)[0]
    assert slope / 2.0 == pytest.approx(H, abs=0.05)


def test_fgn_lag1_autocorr_closed_form():
    # rho(1) = 2^{2H-1} - 1
    for H in (0.3, 0.5, 0.7, 0.9):
        assert fgn_lag1_autocorr(H) == pytest.approx(2.0 ** (2 * H - 1) - 1.0)


def test_fgn_lag1_autocorr_sample_agreement():
    H = 0.8
    x = np.diff(gen_fbm(H, 2**15, seed=2).samples)
    x = x - x.mean()
    rho = float(np.dot(x[1:], x[:-1]) / np.dot(x, x))
    assert rho == pytest.approx(fgn_lag1_autocorr(H), abs=0.03)


# ------------------------------------------------------------ colored noise


def test_power_law_noise_unit_variance():
    for beta in (0.0, 1.0, 3.0, 7.0):
        ts = gen_power_law_noise(beta, 4096, seed=0)
        assert np.std(ts.samples) == pytest.approx(1.0, rel=1e-9)


def test_power_law_noise_validates_beta_and_n():
    with pytest.raises(ValidationError):
        gen_power_law_noise(-0.5, 1024)
    with pytest.raises(ValidationError):
        gen_power_law_noise(9.0, 1024)
    with pytest.raises(ValidationError):
        gen_power_law_noise(2.0, 1000)


def test_power_law_noise_slope():
    ts = gen_power_law_noise(2.0, 2**14, seed=4, sample_rate=1000.0)
    from wavescope.spectral import fit_power_law, power_spectrum

    fit = fit_power_law(power_spectrum(ts), 2.0, 200.0)
    assert fit.slope == pytest.approx(-2.0, abs=0.15)


# ----------------------------------------------------------------- sine mix


def test_sine_mix_exact_values():
    ts = gen_sine_mix([(0.5, 2.0, 0.3)], 100.0, 64)
    t = np.arange(64) / 100.0
    want = 2.0 * np.sin(2.0 * math.pi * t / 0.5 + 0.3)
    assert np.allclose(ts.samples, want)


def test_sine_mix_superposition():
    comps = [(0.5, 1.0, 0.0), (0.2, 0.5, 1.0)]
    both = gen_sine_mix(comps, 200.0, 128).samples
    parts = sum(gen_sine_mix([c], 200.0, 128).samples for c in comps)
    assert np.allclose(both, parts)


def test_sine_mix_rejects_subnyquist_period():
    with pytest.raises(NyquistError):
        gen_sine_mix([(0.001, 1.0, 0.0)], 100.0, 64)  # 1 kHz tone at 100 Hz


# -------------------------------------------------------------- bounce map


def test_bounce_map_trajectory_deterministic():
    p = BounceParams(7.0, 25.0, 0.9, 500, seed=3)
    a_phi, a_v = bounce_map_trajectory(p)
    b_phi, b_v = bounce_map_trajectory(p)
    assert np.array_equal(a_phi, b_phi)
    assert np.array_equal(a_v, b_v)


def test_bounce_map_update_rule():
    # one explicit step of phi' = phi + v (mod 2 pi), v' = r v - A cos(phi')
    p = BounceParams(2.0, 25.0, 0.5, 10, seed=0)
    phis, vs = bounce_map_trajectory(p, n=2, burn_in=0)
    phi1 = math.fmod(phis[0] + vs[0], 2.0 * math.pi)
    if phi1 < 0:
        phi1 += 2.0 * math.pi
    v1 = 0.5 * vs[0] - 2.0 * math.cos(phi1)
    assert phis[1] == pytest.approx(phi1, abs=1e-12)
    assert vs[1] == pytest.approx(v1, abs=1e-12)


def test_bounce_map_jacobian_matches_finite_difference():
    p = BounceParams(5.0, 25.0, 0.7, 10, seed=0)
    phi, v = 1.234, 3.456
    eps = 1e-7

    def step(phi, v):
        phi_next = math.fmod(phi + v, 2.0 * math.pi)
        return phi_next, p.restitution * v - p.amplitude * math.cos(phi_next)

    phi1, v1 = step(phi, v)
    J = bounce_map_jacobian(phi1, p)
    num = np.empty((2, 2))
    for j, (dphi, dv) in enumerate(((eps, 0.0), (0.0, eps))):
        p2, v2 = step(phi + dphi, v + dv)
        dp = p2 - phi1
        # unwrap across the 2 pi seam if the perturbation crossed it
        if dp > math.pi:
            dp -= 2.0 * math.pi
        elif dp < -math.pi:
            dp += 2.0 * math.pi
        num[0, j] = dp / eps
        num[1, j] = (v2 - v1) / eps
    assert np.allclose(J, num, atol=1e-5)


def test_bouncing_ball_render_defaults():
    p = BounceParams(7.0, 25.0, 0.9, 50, seed=1)
    ts = gen_bouncing_ball(p)
    assert ts.sample_rate == pytest.approx(64 * 25.0)
    assert np.all(np.isfinite(ts.samples))
    assert ts.samples.std() > 0


def test_bouncing_ball_param_validation():
    with pytest.raises(ValidationError):
        BounceParams(1.0, 25.0, 1.2, 100)  # restitution >= 1
    with pytest.raises(ValidationError):
        BounceParams(1.0, -25.0, 0.5, 100)
    with pytest.raises(ValidationError):
        BounceParams(1.0, 25.0, 0.5, 0)


# ----------------------------------------------------------------- cascade


def test_cascade_length_and_positivity():
    ts = gen_binomial_cascade(CascadeParams(0.75, 10))
    assert ts.samples.size == 2**10
    assert np.all(ts.samples > 0)


def test_cascade_mass_conservation():
    # each split only redistributes mass; the total stays at one
    for levels in (8, 12):
        x = gen_binomial_cascade(CascadeParams(0.6, levels)).samples
        assert x.sum() == pytest.approx(1.0, rel=1e-9)


def test_cascade_hurst_closed_form_values():
    # h(q) = 1/q - log2(a^q + (1-a)^q) / q
    a = 0.75
    for q in (-5.0, -2.0, 2.0, 5.0):
        want = 1.0 / q - math.log2(a**q + (1 - a) ** q) / q
        assert cascade_hurst(a, q) == pytest.approx(want)


def test_cascade_hurst_q_zero_limit():
    # continuous through q = 0: compare against +-1e-6 neighborhood
    a = 0.7
    h0 = cascade_hurst(a, 0.0)
    assert h0 == pytest.approx(cascade_hurst(a, 1e-6), abs=1e-4)
    assert h0 == pytest.approx(cascade_hurst(a, -1e-6), abs=1e-4)


def test_cascade_weight_validation():
    with pytest.raises(ValidationError):
        CascadeParams(0.5, 10)  # a = 1/2 degenerates to uniform
    with pytest.raises(ValidationError):
        CascadeParams(1.0, 10)
    with pytest.raises(ValidationError):
        CascadeParams(0.75, 0)
