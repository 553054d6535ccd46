"""Core time-series containers, CSV ingestion and the cumulative profile.

All analyses in this package operate on :class:`TimeSeries` (uniformly
sampled, finite values) or on :class:`Profile`, the mean-subtracted
cumulative sum that turns noise-like records into walk-like ones.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "TimeSeries",
    "Profile",
    "load_csv",
    "write_csv",
    "profile",
    "detrend_mean",
]

#: Allowed relative deviation of timestamp spacing from the nominal period.
MAX_TIMESTAMP_JITTER = 0.01


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled signal.

    samples
        1-D float array, finite, at least two points.
    sample_rate
        Samples per second, strictly positive.
    label
        Free-form provenance string (file name, generator name...).
    t0
        Time of the first sample in seconds.
    """

    samples: np.ndarray
    sample_rate: float
    label: str = ""
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ValidationError("samples must be one-dimensional")
        if samples.size < 2:
            raise ValidationError("need at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("samples contain NaN or Inf")
        if not (self.sample_rate > 0):
            raise ValidationError("sample_rate must be positive")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        return self.t0 + np.arange(self.samples.size) / self.sample_rate


@dataclass(frozen=True)
class Profile:
    """Cumulative sum of a mean-subtracted signal.

    By construction the final value is zero up to accumulated rounding,
    which downstream fluctuation analysis relies on.
    """

    values: np.ndarray
    source_mean: float
    sample_rate: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ValidationError("profile must be a 1-D array of length >= 2")
        scale = np.abs(values).max()
        tol = 1e-9 * values.size * max(scale, 1.0)
        if abs(values[-1]) > tol:
            raise ValidationError(
                f"profile does not return to zero: last={values[-1]!r}, tol={tol!r}"
            )

    def __len__(self) -> int:
        return self.values.size


def profile(x: TimeSeries | np.ndarray, sample_rate: float | None = None) -> Profile:
    """Cumulative sum of ``x`` after removing its mean.

    For x = [1, -1, 1, -1] the result is [1, 0, 1, 0].
    """
    if isinstance(x, TimeSeries):
        data = x.samples
        rate = x.sample_rate
    else:
        data = np.asarray(x, dtype=float)
        rate = 1.0 if sample_rate is None else sample_rate
    if data.size < 2:
        raise ValidationError("need at least two samples to build a profile")
    if not np.all(np.isfinite(data)):
        raise ValidationError("samples contain NaN or Inf")
    mean = data.mean()
    values = np.cumsum(data - mean)
    # Pin the final value to exact zero range by removing the residual
    # rounding drift; the drift is orders below any fluctuation of interest.
    return Profile(values=values, source_mean=float(mean), sample_rate=rate)


def detrend_mean(x: np.ndarray) -> np.ndarray:
    """Remove the arithmetic mean.  Output mean is zero to rounding."""
    data = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValidationError("samples contain NaN or Inf")
    return data - data.mean()


def _parse_float(token: str, row: int, path: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{path}: cannot parse {token!r} as a number", row=row) from None


def _looks_like_header(fields: list[str]) -> bool:
    for tok in fields:
        try:
            float(tok)
        except ValueError:
            return True
    return False


def load_csv(
    path: str | Path,
    sample_rate: float | None = None,
    column: int = 0,
    time_column: int | None = None,
) -> TimeSeries:
    """Read a single-channel signal from an RFC-4180-style CSV file.

    Two layouts are accepted.  With ``time_column`` set, that column holds
    timestamps in seconds and ``column`` the values; the rate is inferred
    from the median spacing and checked for uniformity (any gap deviating
    more than 1% from the nominal period is rejected).  Without it the file
    is a bare value column and ``sample_rate`` is required.

    An optional single header row is skipped.  Decimal separator is '.',
    encoding UTF-8.

    Raises
    ------
    ParseError
        Malformed row, with the offending 1-based row number.
    ValidationError
        Non-finite values, fewer than two samples, missing rate, or
        non-uniform timestamps.
    """
    path = Path(path)
    values: list[float] = []
    times: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for row_no, fields in enumerate(reader, start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            fields = [f.strip() for f in fields]
            if row_no == 1 and _looks_like_header(fields):
                continue
            needed = column if time_column is None else max(column, time_column)
            if len(fields) <= needed:
                raise ParseError(
                    f"{path}: expected at least {needed + 1} columns, got {len(fields)}",
                    row=row_no,
                )
            values.append(_parse_float(fields[column], row_no, str(path)))
            if time_column is not None:
                times.append(_parse_float(fields[time_column], row_no, str(path)))

    if len(values) < 2:
        raise ValidationError(f"{path}: need at least two samples, got {len(values)}")
    data = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data))[0])
        raise ValidationError(f"{path}: non-finite value at sample {bad}")

    if time_column is not None:
        tarr = np.asarray(times, dtype=float)
        gaps = np.diff(tarr)
        period = float(np.median(gaps))
        if period <= 0:
            raise ValidationError(f"{path}: timestamps are not increasing")
        worst = float(np.abs(gaps - period).max())
        if worst > MAX_TIMESTAMP_JITTER * period:
            raise ValidationError(
                f"{path}: non-uniform sampling, max deviation {worst:.3g} s "
                f"exceeds 1% of the nominal period {period:.3g} s"
            )
        inferred = 1.0 / period
        if sample_rate is not None and abs(inferred - sample_rate) > 0.01 * sample_rate:
            raise ValidationError(
                f"{path}: stated rate {sample_rate} Hz disagrees with "
                f"timestamps ({inferred:.6g} Hz)"
            )
        return TimeSeries(data, inferred, label=path.name, t0=float(tarr[0]))

    if sample_rate is None:
        raise ValidationError(f"{path}: sample_rate is required for bare value columns")
    return TimeSeries(data, sample_rate, label=path.name)


def write_csv(ts: TimeSeries, path: str | Path, with_time: bool = True) -> None:
    """Write a series as CSV with a header row.

    Values are written with shortest round-trip float formatting, so
    loading the file back yields bit-identical samples.
    """
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf)
    if with_time:
        writer.writerow(["time_s", "value"])
        for t, v in zip(ts.times(), ts.samples):
            writer.writerow([repr(float(t)), repr(float(v))])
    else:
        writer.writerow(["value"])
        for v in ts.samples:
            writer.writerow([repr(float(v))])
    path.write_text(buf.getvalue(), encoding="utf-8")
