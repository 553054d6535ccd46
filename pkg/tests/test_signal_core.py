import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavescope import ParseError, ValidationError
from wavescope.signal_core import (
    TimeSeries,
    detrend_mean,
    load_csv,
    profile,
    write_csv,
)


def test_timeseries_basic_fields():
    ts = TimeSeries(np.arange(8.0), 2.0)
    assert ts.sample_rate == 2.0
    assert ts.samples.size == 8
    assert ts.duration == pytest.approx(4.0)


def test_timeseries_rejects_nan_and_bad_rate():
    with pytest.raises(ValidationError):
        TimeSeries(np.array([1.0, np.nan, 2.0]), 1.0)
    with pytest.raises(ValidationError):
        TimeSeries(np.array([1.0, np.inf]), 1.0)
    with pytest.raises(ValidationError):
        TimeSeries(np.arange(4.0), 0.0)
    with pytest.raises(ValidationError):
        TimeSeries(np.arange(4.0), -5.0)


def test_timeseries_too_short():
    with pytest.raises(ValidationError):
        TimeSeries(np.array([1.0]), 1.0)


def test_profile_is_cumsum_of_mean_subtracted():
    x = np.array([2.0, -1.0, 3.0, 0.0])
    prof = profile(x)
    want = np.cumsum(x - x.mean())
    assert np.allclose(prof.values, want)


def test_profile_keeps_sample_rate_from_timeseries():
    ts = TimeSeries(np.random.default_rng(0).standard_normal(64), 250.0)
    prof = profile(ts)
    assert prof.sample_rate == 250.0
    assert prof.values.size == 64


@settings(max_examples=50)
@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=2,
        max_size=200,
    )
)
def test_profile_last_value_is_zero(xs):
    # cumsum of a mean-subtracted series always returns to zero
    prof = profile(np.asarray(xs))
    scale = max(1.0, np.max(np.abs(xs)))
    assert abs(prof.values[-1]) <= 1e-8 * scale * len(xs)


def test_detrend_mean():
    x = np.array([5.0, 7.0, 9.0])
    out = detrend_mean(x)
    assert out.mean() == pytest.approx(0.0)
    assert np.allclose(out, x - 7.0)


def test_csv_round_trip_with_time_column(tmp_path):
    ts = TimeSeries(np.sin(np.arange(32) * 0.3), 100.0, label="demo")
    path = tmp_path / "sig.csv"
    write_csv(ts, path)
    # CLI-facing layout: time_s,value with a header row
    back = load_csv(path, column=1, time_column=0)
    assert back.sample_rate == pytest.approx(100.0)
    assert np.allclose(back.samples, ts.samples)


def test_csv_bare_column_needs_rate(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("1.0\n2.0\n3.0\n")
    with pytest.raises(ValidationError):
        load_csv(path)
    ts = load_csv(path, sample_rate=10.0)
    assert np.allclose(ts.samples, [1.0, 2.0, 3.0])


def test_csv_parse_error_carries_row(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("value\n1.0\nnot-a-number\n")
    with pytest.raises(ParseError) as exc:
        load_csv(path, sample_rate=1.0)
    assert exc.value.row == 3


def test_csv_rejects_jittered_timestamps(tmp_path):
    t = np.arange(20) * 0.01
    t[10] += 0.004  # 40% of the period, far beyond the 1% tolerance
    rows = "\n".join(f"{ti},{vi}" for ti, vi in zip(t, np.ones(20)))
    path = tmp_path / "jitter.csv"
    path.write_text(rows + "\n")
    with pytest.raises(ValidationError):
        load_csv(path, column=1, time_column=0)


def test_csv_skips_blank_lines(tmp_path):
    path = tmp_path / "blanks.csv"
    path.write_text("1.0\n\n2.0\n\n3.0\n")
    ts = load_csv(path, sample_rate=1.0)
    assert ts.samples.size == 3
