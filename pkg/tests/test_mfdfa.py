import os
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavescope import (
    PoorFitWarning,
    ValidationError,
    ZeroVarianceError,
    ZeroVarianceWarning,
)
from wavescope.mfdfa import (
    FluctuationTable,
    MfdfaConfig,
    default_q_values,
    default_scales,
    fluctuation_function,
    generalized_hurst,
    segment_variance,
)
from wavescope.signal_core import profile
from wavescope.synth import gen_fbm


def test_default_q_grid():
    q = default_q_values()
    assert q[0] == -10.0 and q[-1] == 10.0
    assert 0.0 in q
    assert np.all(np.diff(q) == 1.0)


def test_segment_variance_hand_example():
    # n=10, scale=4: two front segments [0:4],[4:8], two back [2:6],[6:10]
    x = np.arange(10.0)
    seg = segment_variance(x, 4, min_segments=4)
    front0 = np.mean(x[0:4] ** 2)
    front1 = np.mean(x[4:8] ** 2)
    back0 = np.mean(x[2:6] ** 2)
    back1 = np.mean(x[6:10] ** 2)
    assert np.allclose(seg, [front0, front1, back0, back1])


def test_segment_variance_min_segments():
    with pytest.raises(ValidationError):
        segment_variance(np.arange(10.0), 8)  # only 2 segments possible
    with pytest.raises(ValidationError):
        segment_variance(np.arange(10.0), 1)


def test_fluctuation_q2_is_rms_of_segment_variance():
    # F_2(s)^2 must equal the arithmetic mean of segment variances
    ts = gen_fbm(0.6, 2048, seed=0)
    prof = profile(np.diff(ts.samples))
    cfg = MfdfaConfig(q_values=np.array([2.0]))
    table = fluctuation_function(prof, cfg)
    from wavescope.dwt import daubechies, extract_fluctuation

    spec = daubechies(2)
    for j, (lvl, s) in enumerate(zip(table.levels, table.scales)):
        fluct = extract_fluctuation(prof.values, spec, int(lvl))
        seg = segment_variance(fluct, int(s))
        assert table.fluctuation[0, j] == pytest.approx(
            np.sqrt(seg.mean()), rel=1e-12
        )


def test_fluctuation_monotone_in_q():
    # power-mean inequality: F_q(s) is nondecreasing in q at every scale
    ts = gen_fbm(0.4, 4096, seed=2)
    prof = profile(np.diff(ts.samples))
    q = np.arange(-6.0, 6.5, 0.5)
    table = fluctuation_function(prof, MfdfaConfig(q_values=q))
    diffs = np.diff(table.fluctuation, axis=0)
    assert np.all(diffs >= -1e-12 * table.fluctuation[:-1])


def test_scales_snap_to_dyadic_levels():
    prof = profile(np.diff(gen_fbm(0.5, 2048, seed=1).samples))
    cfg = MfdfaConfig(q_values=np.array([2.0]), scales=np.array([9.0, 30.0, 33.0]))
    table = fluctuation_function(prof, cfg)
    # 9 -> level 1 (scale 8), 30 and 33 both -> level 3 (scale 32)
    assert list(table.scales) == [8, 32]


def test_zero_variance_segments_warn_for_negative_q():
    x = np.zeros(512)
    x[200:260] = np.sin(np.arange(60.0))
    cfg = MfdfaConfig(q_values=np.array([-2.0, 2.0]))
    with pytest.warns(ZeroVarianceWarning):
        fluctuation_function(x, cfg)


def test_all_zero_variance_is_an_error():
    with pytest.warns(ZeroVarianceWarning):
        with pytest.raises((ZeroVarianceError, ValidationError)):
            fluctuation_function(np.zeros(512), MfdfaConfig(q_values=np.array([-2.0])))


def test_thread_env_does_not_change_values(monkeypatch):
    prof = profile(np.diff(gen_fbm(0.7, 4096, seed=5).samples))
    cfg = MfdfaConfig(q_values=default_q_values())
    monkeypatch.delenv("WAVESCOPE_THREADS", raising=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        seq = fluctuation_function(prof, cfg)
    monkeypatch.setenv("WAVESCOPE_THREADS", "4")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        par = fluctuation_function(prof, cfg)
    assert np.array_equal(seq.fluctuation, par.fluctuation)


def _exact_table(h_by_q, scales):
    q = np.array(sorted(h_by_q))
    fl = np.vstack([np.asarray(scales, float) ** h_by_q[v] for v in q])
    return FluctuationTable(
        q_values=q,
        scales=np.asarray(scales),
        levels=np.arange(1, len(scales) + 1),
        fluctuation=fl,
        n=4096,
        wavelet_support=4,
    )


def test_generalized_hurst_recovers_exact_slopes():
    scales = 4 * 2 ** np.arange(1, 8)
    table = _exact_table({-2.0: 0.9, 0.0: 0.7, 2.0: 0.5}, scales)
    out = generalized_hurst(table, fit_range=(8.0, 512.0), min_scales=6)
    assert out.hurst_at(-2.0) == pytest.approx(0.9, abs=1e-12)
    assert out.hurst_at(0.0) == pytest.approx(0.7, abs=1e-12)
    assert out.hurst_at(2.0) == pytest.approx(0.5, abs=1e-12)
    assert np.all(out.fit_r2 > 1.0 - 1e-12)
    assert out.delta_h == pytest.approx(0.4, abs=1e-12)


def test_generalized_hurst_default_fit_range():
    scales = 4 * 2 ** np.arange(1, 8)
    table = _exact_table({2.0: 0.5}, scales)
    out = generalized_hurst(table)
    lo, hi = out.fit_range
    assert lo == pytest.approx(2 * table.wavelet_support)
    assert hi == pytest.approx(table.n / 8)


def test_generalized_hurst_needs_enough_scales():
    scales = 4 * 2 ** np.arange(1, 4)
    table = _exact_table({2.0: 0.5}, scales)
    with pytest.raises(ValidationError):
        generalized_hurst(table, min_scales=6)


def test_generalized_hurst_warns_on_poor_fit():
    scales = 4 * 2 ** np.arange(1, 8)
    rng = np.random.default_rng(0)
    fl = np.exp(rng.standard_normal((1, scales.size)))  # no scaling at all
    table = FluctuationTable(
        q_values=np.array([2.0]),
        scales=scales,
        levels=np.arange(1, scales.size + 1),
        fluctuation=fl,
        n=4096,
        wavelet_support=4,
    )
    with pytest.warns(PoorFitWarning):
        generalized_hurst(table, fit_range=(8.0, 512.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_moments_match_direct_formula_property(seed):
    # random positive segment variances: compare the pipeline's power mean
    # against the direct textbook expression at a safe q
    rng = np.random.default_rng(seed)
    seg = np.exp(rng.standard_normal(16))
    x = np.repeat(np.sqrt(seg), 2)  # build a signal whose 2-sample segment
    # variances are exactly seg (constant within each segment)
    vs = segment_variance(x, 2)
    for q in (-3.0, 1.0, 4.0):
        direct = (np.mean(vs ** (q / 2.0))) ** (1.0 / q)
        # geometric route used internally must agree to float precision
        logv = np.log(vs)
        from scipy.special import logsumexp

        via_log = np.exp((logsumexp(0.5 * q * logv) - np.log(vs.size)) / q)
        assert direct == pytest.approx(via_log, rel=1e-10)
