"""Command line interface and config-driven pipeline runner.

Everything written here is deterministic: JSON is emitted with sorted
keys and repr-roundtrip floats, CSV numbers use repr, SVG uses fixed
precision, and no artifact carries a timestamp.  Identical config and
seed therefore produce byte-identical artifacts, which the run report
makes checkable by hashing every file it writes.

Exit codes: 0 success, 2 configuration problem, 3 stage failure,
4 filesystem problem.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cwt as cwtmod
from . import dwt, lyapunov, mfdfa, spectral, svg, synth
from .errors import (
    ConfigError,
    StageError,
    ValidationError,
    WavescopeError,
)
from .signal_core import TimeSeries, load_csv, profile, write_csv

__all__ = ["RunConfig", "RunReport", "validate_config", "run", "figure_repro", "main"]


# --------------------------------------------------------------------------
# serialization helpers


def _plain(obj):
    """Recursively convert numpy containers so json sees pure Python."""
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _write_json(path: Path, obj) -> Path:
    path.write_text(
        json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return path


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    rows = zip(*[np.asarray(c) for c in columns])
    lines = [",".join(header)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --------------------------------------------------------------------------
# run configuration


_SYNTH_REQUIRED = {
    "fbm": ("hurst", "n", "sample_rate"),
    "powerlaw": ("beta", "n", "sample_rate"),
    "sines": ("components", "sample_rate", "n"),
    "bounce": ("amplitude", "drive_freq", "restitution", "n_impacts"),
    "cascade": ("a", "levels"),
}
_SYNTH_OPTIONAL = {
    "fbm": ("increments",),
    "powerlaw": (),
    "sines": (),
    "bounce": ("sample_rate",),
    "cascade": (),
}

_STAGE_PARAMS = {
    "denoise": ((), ("rule", "levels", "kill_count", "vanishing_moments", "boundary")),
    "spectrum": ((), ("window",)),
    "fit": (("f_lo", "f_hi"), ()),
    "heisenberg": (("f_lo", "f_hi"), ("regime", "rel_tolerance")),
    "mfdfa": ((), ("difference", "fit_lo", "fit_hi", "q_min", "q_max", "q_step")),
    "cwt": ((), ("omega0", "norm", "pad")),
    "globalpower": ((), ("omega0", "background", "max_peaks")),
    "lyapunov": ((), ("dim", "delay", "theiler", "max_iter")),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline description (see :func:`validate_config`)."""

    input: dict
    pipeline: list
    output_dir: str
    seed: int = 0
    formats: dict = field(
        default_factory=lambda: {"csv": True, "json": True, "svg": False}
    )


@dataclass(frozen=True)
class RunReport:
    """What a run produced: artifact paths with content hashes."""

    artifacts: list
    summary: dict
    exit_code: int


def _require_keys(d: dict, required, optional, where: str):
    for key in required:
        if key not in d:
            raise ConfigError(f"{where}: missing required key {key!r}")
    allowed = set(required) | set(optional)
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")


def validate_config(raw: dict) -> RunConfig:
    """Check the whole config before any computation starts."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    _require_keys(
        raw, ("input", "pipeline", "output_dir"), ("seed", "formats"), "config"
    )
    inp = raw["input"]
    if not isinstance(inp, dict) or "kind" not in inp:
        raise ConfigError("input: must be a mapping with a 'kind' key")
    kind = inp["kind"]
    if kind == "csv":
        _require_keys(inp, ("kind", "path"), ("sample_rate", "column"), "input")
    elif kind == "synth":
        if "synth" not in inp or not isinstance(inp["synth"], dict):
            raise ConfigError("input: synth input needs a 'synth' mapping")
        spec = inp["synth"]
        if "kind" not in spec or spec["kind"] not in _SYNTH_REQUIRED:
            known = ", ".join(sorted(_SYNTH_REQUIRED))
            raise ConfigError(f"input.synth: kind must be one of {known}")
        skind = spec["kind"]
        _require_keys(
            spec,
            ("kind",) + _SYNTH_REQUIRED[skind],
            _SYNTH_OPTIONAL[skind] + ("seed",),
            f"input.synth({skind})",
        )
    else:
        raise ConfigError(f"input: unknown kind {kind!r}")
    stages = raw["pipeline"]
    if not isinstance(stages, list):
        raise ConfigError("pipeline: must be a list of stage mappings")
    for i, stage in enumerate(stages):
        if not isinstance(stage, dict) or "stage" not in stage:
            raise ConfigError(f"pipeline[{i}]: missing 'stage' key")
        name = stage["stage"]
        if name not in _STAGE_PARAMS:
            known = ", ".join(sorted(_STAGE_PARAMS))
            raise ConfigError(f"pipeline[{i}]: unknown stage {name!r} (known: {known})")
        required, optional = _STAGE_PARAMS[name]
        _require_keys(
            stage, ("stage",) + required, optional, f"pipeline[{i}].{name}"
        )
    if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
        raise ConfigError("output_dir: must be a non-empty string")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed: must be a non-negative integer")
    formats = {"csv": True, "json": True, "svg": False}
    for key, val in raw.get("formats", {}).items():
        if key not in formats:
            raise ConfigError(f"formats: unknown flag {key!r}")
        if not isinstance(val, bool):
            raise ConfigError(f"formats.{key}: must be true or false")
        formats[key] = val
    return RunConfig(
        input=inp,
        pipeline=stages,
        output_dir=raw["output_dir"],
        seed=seed,
        formats=formats,
    )


_TIME_HEADERS = ("time", "time_s", "t", "timestamp", "timestamp_s")


def _load_csv_sniffed(path, sample_rate=None, column=0) -> TimeSeries:
    """Load a CSV, treating a header column named like a time axis as one."""
    time_column = None
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except OSError:
        first = ""
    fields = [f.strip().lower() for f in first.split(",")]
    for i, name in enumerate(fields):
        if name in _TIME_HEADERS:
            time_column = i
            if column == i:
                column = 0 if i != 0 else 1
            break
    return load_csv(
        path, sample_rate=sample_rate, column=column, time_column=time_column
    )


def _build_input(cfg: RunConfig) -> TimeSeries:
    inp = cfg.input
    if inp["kind"] == "csv":
        return _load_csv_sniffed(
            inp["path"],
            sample_rate=inp.get("sample_rate"),
            column=inp.get("column", 0),
        )
    spec = dict(inp["synth"])
    kind = spec.pop("kind")
    seed = spec.pop("seed", cfg.seed)
    if kind == "fbm":
        ts = synth.gen_fbm(
            spec["hurst"], spec["n"], seed=seed, sample_rate=spec["sample_rate"]
        )
        if spec.get("increments"):
            ts = TimeSeries(np.diff(ts.samples), ts.sample_rate, label=ts.label)
        return ts
    if kind == "powerlaw":
        return synth.gen_power_law_noise(
            spec["beta"], spec["n"], seed=seed, sample_rate=spec["sample_rate"]
        )
    if kind == "sines":
        comps = [tuple(c) for c in spec["components"]]
        return synth.gen_sine_mix(comps, spec["sample_rate"], spec["n"])
    if kind == "bounce":
        p = synth.BounceParams(
            spec["amplitude"],
            spec["drive_freq"],
            spec["restitution"],
            spec["n_impacts"],
            seed=seed,
        )
        return synth.gen_bouncing_ball(p, sample_rate=spec.get("sample_rate"))
    p = synth.CascadeParams(spec["a"], spec["levels"], seed=seed)
    return synth.gen_binomial_cascade(p)


# --------------------------------------------------------------------------
# pipeline stages


def _stage_denoise(ts, stage, outdir, prefix, fmts, artifacts, summary):
    spec = dwt.daubechies(stage.get("vanishing_moments", 2))
    cleaned = dwt.denoise(
        ts.samples,
        spec,
        levels=stage.get("levels"),
        rule=stage.get("rule", "kill_details"),
        kill_count=stage.get("kill_count"),
        boundary=stage.get("boundary", "symmetric"),
    )
    out = TimeSeries(cleaned, ts.sample_rate, label=ts.label)
    if fmts["csv"]:
        p = outdir / f"{prefix}_denoised.csv"
        write_csv(out, p)
        artifacts.append(p)
    summary["denoise"] = {
        "rule": stage.get("rule", "kill_details"),
        "residual_rms": float(np.sqrt(np.mean((ts.samples - cleaned) ** 2))),
    }
    return out


def _stage_spectrum(ts, stage, outdir, prefix, fmts, artifacts, summary):
    ps = spectral.power_spectrum(ts, window=stage.get("window", "none"))
    if fmts["csv"]:
        p = _write_table(
            outdir / f"{prefix}_spectrum.csv", ["freq_hz", "power"], [ps.freqs, ps.power]
        )
        artifacts.append(p)
    if fmts["svg"]:
        nz = ps.freqs > 0
        p = svg.line_plot(
            outdir / f"{prefix}_spectrum.svg",
            [(ps.freqs[nz], ps.power[nz], "power")],
            xlabel="frequency (Hz)",
            ylabel="power",
            title="power spectrum",
            xlog=True,
            ylog=True,
        )
        artifacts.append(p)
    summary["spectrum"] = {
        "dominant_frequency_hz": spectral.dominant_frequency(ps),
        "n_bins": int(ps.freqs.size),
    }
    return ts


def _guide_line(fit, f_lo, f_hi, slope=None):
    f = np.array([f_lo, f_hi])
    s = fit.slope if slope is None else slope
    # anchor the guide at the fitted band center so it overlays the data
    fc = math.sqrt(f_lo * f_hi)
    level = fit.intercept + fit.slope * math.log10(fc)
    y = 10.0 ** (level + s * (np.log10(f) - math.log10(fc)))
    return f, y


def _stage_fit(ts, stage, outdir, prefix, fmts, artifacts, summary):
    ps = spectral.power_spectrum(ts)
    fit = spectral.fit_power_law(ps, stage["f_lo"], stage["f_hi"])
    info = {
        "slope": fit.slope,
        "alpha_abs": fit.alpha_abs,
        "intercept_log10": fit.intercept,
        "band_hz": list(fit.band),
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
    }
    try:
        info["hurst"] = spectral.hurst_from_alpha(fit.alpha_abs)
    except WavescopeError as err:
        info["hurst"] = None
        info["hurst_note"] = str(err)
    try:
        info["fractal_dimension"] = spectral.fractal_dimension(fit.alpha_abs)
    except WavescopeError as err:
        info["fractal_dimension"] = None
        info["fractal_dimension_note"] = str(err)
    if fmts["json"]:
        artifacts.append(_write_json(outdir / f"{prefix}_fit.json", info))
    if fmts["svg"]:
        nz = ps.freqs > 0
        gx, gy = _guide_line(fit, *fit.band)
        p = svg.line_plot(
            outdir / f"{prefix}_fit.svg",
            [
                (ps.freqs[nz], ps.power[nz], "power"),
                (gx, gy, f"slope {fit.slope:.3g}", True),
            ],
            xlabel="frequency (Hz)",
            ylabel="power",
            title="power-law fit",
            xlog=True,
            ylog=True,
        )
        artifacts.append(p)
    summary["fit"] = info
    return ts


def _stage_heisenberg(ts, stage, outdir, prefix, fmts, artifacts, summary):
    ps = spectral.power_spectrum(ts)
    res = spectral.heisenberg_fit(
        ps,
        stage["f_lo"],
        stage["f_hi"],
        regime=stage.get("regime", "neutral"),
        rel_tolerance=stage.get("rel_tolerance", 0.15),
    )
    info = {
        "slope": res.fit.slope,
        "target": res.target,
        "tolerance": res.tolerance,
        "matches": res.matches,
        "band_hz": list(res.fit.band),
        "r_squared": res.fit.r_squared,
    }
    if fmts["json"]:
        artifacts.append(_write_json(outdir / f"{prefix}_heisenberg.json", info))
    if fmts["svg"]:
        nz = ps.freqs > 0
        gx, gy = _guide_line(res.fit, *res.fit.band, slope=res.target)
        p = svg.line_plot(
            outdir / f"{prefix}_heisenberg.svg",
            [
                (ps.freqs[nz], ps.power[nz], "power"),
                (gx, gy, f"target {res.target:.3g}", True),
            ],
            xlabel="frequency (Hz)",
            ylabel="power",
            title="spectral regime fit",
            xlog=True,
            ylog=True,
        )
        artifacts.append(p)
    summary["heisenberg"] = info
    return ts


def _stage_mfdfa(ts, stage, outdir, prefix, fmts, artifacts, summary):
    data = ts.samples
    if stage.get("difference"):
        data = np.diff(data)
    q_min = stage.get("q_min", -10.0)
    q_max = stage.get("q_max", 10.0)
    q_step = stage.get("q_step", 1.0)
    q = np.arange(q_min, q_max + 0.5 * q_step, q_step)
    cfg = mfdfa.MfdfaConfig(q_values=q)
    table = mfdfa.fluctuation_function(profile(data, ts.sample_rate), cfg)
    fit_range = None
    if "fit_lo" in stage or "fit_hi" in stage:
        fit_range = (
            stage.get("fit_lo", 2.0 * table.wavelet_support),
            stage.get("fit_hi", table.n / 8.0),
        )
    table = mfdfa.generalized_hurst(table, fit_range=fit_range)
    if fmts["csv"]:
        p = outdir / f"{prefix}_fq.csv"
        header = ["scale"] + [f"q={v:g}" for v in table.q_values]
        cols = [table.scales.astype(float)] + [
            table.fluctuation[i] for i in range(table.q_values.size)
        ]
        artifacts.append(_write_table(p, header, cols))
        p = _write_table(
            outdir / f"{prefix}_hurst.csv",
            ["q", "h", "r_squared"],
            [table.q_values, table.hurst, table.fit_r2],
        )
        artifacts.append(p)
    if fmts["svg"]:
        curves = [
            (table.scales.astype(float), table.fluctuation[i], f"q={table.q_values[i]:g}")
            for i in range(0, table.q_values.size, max(1, table.q_values.size // 6))
        ]
        artifacts.append(
            svg.line_plot(
                outdir / f"{prefix}_fq.svg",
                curves,
                xlabel="scale (samples)",
                ylabel="F_q(s)",
                title="fluctuation function",
                xlog=True,
                ylog=True,
            )
        )
        artifacts.append(
            svg.line_plot(
                outdir / f"{prefix}_hurst.svg",
                [(table.q_values, table.hurst, "h(q)")],
                xlabel="q",
                ylabel="h(q)",
                title="generalized Hurst exponents",
            )
        )
    info = {
        "h2": table.hurst_at(2.0) if np.any(np.isclose(table.q_values, 2.0)) else None,
        "delta_h": table.delta_h,
        "fit_range": list(table.fit_range),
        "n_scales": int(table.scales.size),
        "differenced": bool(stage.get("difference", False)),
    }
    if fmts["json"]:
        artifacts.append(_write_json(outdir / f"{prefix}_mfdfa.json", info))
    summary["mfdfa"] = info
    return ts


def _stage_cwt(ts, stage, outdir, prefix, fmts, artifacts, summary):
    sg = cwtmod.cwt_morlet(
        ts,
        omega0=stage.get("omega0", 6.0),
        norm=stage.get("norm", "l2"),
        pad=stage.get("pad", "zero"),
    )
    mask = sg.reliable_mask()
    power = np.abs(sg.coeffs) ** 2
    mean_power = np.array(
        [row[m].mean() if m.any() else np.nan for row, m in zip(power, mask)]
    )
    if fmts["csv"]:
        p = _write_table(
            outdir / f"{prefix}_scales.csv",
            ["scale_s", "period_s", "mean_power_outside_coi"],
            [sg.scales, sg.periods, mean_power],
        )
        artifacts.append(p)
    if fmts["svg"]:
        artifacts.append(
            svg.heatmap(
                outdir / f"{prefix}_scalogram.svg",
                sg.times,
                sg.periods,
                np.log10(power / sg.signal_variance + 1e-300),
                xlabel="time (s)",
                ylabel="period (s)",
                title="scalogram, log10 power / variance",
                ylog=True,
                overlay=(sg.times, sg.coi),
            )
        )
    summary["cwt"] = {
        "n_scales": int(sg.scales.size),
        "period_range_s": [float(sg.periods[0]), float(sg.periods[-1])],
    }
    return ts


def _stage_globalpower(ts, stage, outdir, prefix, fmts, artifacts, summary):
    sg = cwtmod.cwt_morlet(ts, omega0=stage.get("omega0", 6.0))
    gp = cwtmod.global_power(
        sg, background=stage.get("background", "white"), series=ts.samples
    )
    peaks = cwtmod.dominant_periods(gp, max_count=stage.get("max_peaks"))
    if fmts["csv"]:
        p = _write_table(
            outdir / f"{prefix}_globalpower.csv",
            ["scale_s", "period_s", "power", "significance_95"],
            [gp.scales, gp.periods, gp.power, gp.significance_95],
        )
        artifacts.append(p)
    if fmts["svg"]:
        artifacts.append(
            svg.line_plot(
                outdir / f"{prefix}_globalpower.svg",
                [
                    (gp.periods, gp.power, "global power"),
                    (gp.periods, gp.significance_95, "95% level", True),
                ],
                xlabel="period (s)",
                ylabel="power",
                title="global wavelet power",
                xlog=True,
                ylog=True,
                vmarks=[(p_, f"{p_ * 1e3:.0f} ms") for p_ in peaks[:4]],
            )
        )
    info = {
        "dominant_periods_s": peaks,
        "background": gp.background,
        "n_scales": int(gp.scales.size),
    }
    if fmts["json"]:
        artifacts.append(_write_json(outdir / f"{prefix}_globalpower.json", info))
    summary["globalpower"] = info
    return ts


def _stage_lyapunov(ts, stage, outdir, prefix, fmts, artifacts, summary):
    delay = stage.get("delay", "auto")
    if delay == "auto":
        delay = lyapunov.estimate_delay(ts)
    cfg = lyapunov.EmbeddingConfig(
        dim=stage.get("dim", 5),
        delay=int(delay),
        theiler=stage.get("theiler"),
        max_iter=stage.get("max_iter"),
    )
    res = lyapunov.largest_lyapunov(ts, cfg)
    info = {
        "exponent_per_s": res.exponent,
        "fit_range": list(res.fit_range),
        "r_squared": res.r_squared,
        "n_pairs": res.n_pairs,
        "dim": cfg.dim,
        "delay": cfg.delay,
        "positive": res.positive,
    }
    if fmts["json"]:
        artifacts.append(_write_json(outdir / f"{prefix}_lyapunov.json", info))
    if fmts["csv"]:
        k = np.arange(res.divergence.size, dtype=float)
        p = _write_table(
            outdir / f"{prefix}_divergence.csv",
            ["iteration", "mean_log_distance"],
            [k, res.divergence],
        )
        artifacts.append(p)
    summary["lyapunov"] = info
    return ts


_STAGE_FUNCS = {
    "denoise": _stage_denoise,
    "spectrum": _stage_spectrum,
    "fit": _stage_fit,
    "heisenberg": _stage_heisenberg,
    "mfdfa": _stage_mfdfa,
    "cwt": _stage_cwt,
    "globalpower": _stage_globalpower,
    "lyapunov": _stage_lyapunov,
}


def run(cfg: RunConfig) -> RunReport:
    """Execute a validated pipeline; see :func:`validate_config`.

    Raises StageError naming the failing stage; before the raise, a
    ``<stage>.failed`` marker records the reason next to any partial
    output of that stage.
    """
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts: list[Path] = []
    summary: dict = {}

    def attempt(stage_name, fn, *args):
        try:
            return fn(*args)
        except WavescopeError as err:
            marker = outdir / f"{stage_name}.failed"
            marker.write_text(f"{type(err).__name__}: {err}\n", encoding="utf-8")
            raise StageError(stage_name, f"{stage_name}: {err}") from err

    ts = attempt("input", _build_input, cfg)
    if cfg.formats["csv"]:
        p = outdir / "input.csv"
        write_csv(ts, p)
        artifacts.append(p)
    summary["input"] = {
        "n": int(ts.samples.size),
        "sample_rate_hz": float(ts.sample_rate),
        "label": ts.label,
    }
    for i, stage in enumerate(cfg.pipeline):
        name = stage["stage"]
        prefix = f"{i:02d}_{name}"
        params = {k: v for k, v in stage.items() if k != "stage"}
        ts = attempt(
            name,
            _STAGE_FUNCS[name],
            ts,
            params,
            outdir,
            prefix,
            cfg.formats,
            artifacts,
            summary,
        )
    report = RunReport(
        artifacts=[
            {"path": p.name, "sha256": _sha256(p)} for p in artifacts
        ],
        summary=summary,
        exit_code=0,
    )
    _write_json(
        outdir / "report.json",
        {"artifacts": report.artifacts, "summary": report.summary, "exit_code": 0},
    )
    return report


# --------------------------------------------------------------------------
# figure reproduction presets

FIGURE_NAMES = (
    "fig7",
    "fig8",
    "fig9a",
    "fig9b",
    "fig10a",
    "fig10b",
    "fig11",
    "fig12",
)

_FOUR_TONES = [(0.018, 0.7, 0.0), (0.049, 1.5, 0.8), (0.226, 0.7, 1.6), (0.578, 1.3, 2.4)]


def _four_tone_series(n: int = 2**14, rate: float = 5000.0) -> TimeSeries:
    ts = synth.gen_sine_mix(_FOUR_TONES, rate, n)
    rng = np.random.default_rng(42)
    return TimeSeries(
        ts.samples + 0.05 * rng.standard_normal(n), rate, label="four tones"
    )


def _two_regime_noise(n: int = 2**15, rate: float = 50000.0, fc: float = 500.0):
    """Noise whose spectrum falls as f^-5/3 below fc and f^-7 above it."""
    rng = np.random.default_rng(11)
    half = n // 2
    freqs = np.arange(1, half + 1) * (rate / n)
    amp = np.where(
        freqs <= fc,
        freqs ** (-5.0 / 6.0),
        fc ** (7.0 / 2.0 - 5.0 / 6.0) * freqs ** (-7.0 / 2.0),
    )
    re = rng.standard_normal(half)
    im = rng.standard_normal(half)
    spec = np.zeros(half + 1, dtype=complex)
    spec[1:half] = amp[: half - 1] * (re[: half - 1] + 1j * im[: half - 1])
    spec[half] = amp[half - 1] * re[half - 1]
    samples = np.fft.irfft(spec, n=n)
    samples /= samples.std()
    return TimeSeries(samples, rate, label="two-regime noise")


def _fig7(outdir: Path) -> list[Path]:
    ts = synth.gen_power_law_noise(1.0, 2**14, seed=7, sample_rate=50000.0)
    prof = profile(ts)
    walk = TimeSeries(prof.values, ts.sample_rate)
    ps = spectral.power_spectrum(walk)
    fit = spectral.fit_power_law(ps, 330.0, 8000.0)
    hurst = spectral.hurst_from_alpha(min(fit.alpha_abs, 2.999))
    out = []
    t = np.arange(prof.values.size) / ts.sample_rate
    out.append(
        svg.line_plot(
            outdir / "fig7a.svg",
            [(t, prof.values, "profile")],
            xlabel="time (s)",
            ylabel="cumulative sum",
            title="profile of the series",
        )
    )
    nz = ps.freqs > 0
    gx, gy = _guide_line(fit, *fit.band)
    out.append(
        svg.line_plot(
            outdir / "fig7b.svg",
            [
                (ps.freqs[nz], ps.power[nz], "profile power"),
                (gx, gy, f"slope {fit.slope:.2f}", True),
            ],
            xlabel="frequency (Hz)",
            ylabel="power",
            title="power law of the profile",
            xlog=True,
            ylog=True,
        )
    )
    out.append(
        _write_table(outdir / "fig7.csv", ["freq_hz", "power"], [ps.freqs, ps.power])
    )
    out.append(
        _write_json(
            outdir / "fig7.json",
            {"alpha_abs": fit.alpha_abs, "slope": fit.slope, "hurst": hurst},
        )
    )
    return out


def _fig8(outdir: Path) -> list[Path]:
    ts = _four_tone_series()
    sg = cwtmod.cwt_morlet(ts)
    power = np.abs(sg.coeffs) ** 2 / sg.signal_variance
    out = [
        svg.heatmap(
            outdir / "fig8.svg",
            sg.times,
            sg.periods,
            np.log10(power + 1e-300),
            xlabel="time (s)",
            ylabel="period (s)",
            title="scalogram with cone of influence",
            ylog=True,
            overlay=(sg.times, sg.coi),
        )
    ]
    mask = sg.reliable_mask()
    mean_power = np.array(
        [row[m].mean() if m.any() else np.nan for row, m in zip(power, mask)]
    )
    out.append(
        _write_table(
            outdir / "fig8.csv",
            ["period_s", "mean_power_outside_coi"],
            [sg.periods, mean_power],
        )
    )
    return out


def _fig9(outdir: Path, which: str) -> list[Path]:
    ts = synth.gen_binomial_cascade(synth.CascadeParams(0.75, 14))
    q = np.arange(-10.0, 10.5, 1.0)
    table = mfdfa.fluctuation_function(profile(ts), mfdfa.MfdfaConfig(q_values=q))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = mfdfa.generalized_hurst(
            table, fit_range=(16.0, table.n / 16.0)
        )
    out = []
    if which == "fig9a":
        sel = np.flatnonzero(np.isin(table.q_values, (-10, -5, -2, 0, 2, 5, 10)))
        curves = [
            (
                table.scales.astype(float),
                table.fluctuation[i],
                f"q={table.q_values[i]:g}",
            )
            for i in sel
        ]
        out.append(
            svg.line_plot(
                outdir / "fig9a.svg",
                curves,
                xlabel="scale s (samples)",
                ylabel="F_q(s)",
                title="fluctuation functions of the cascade",
                xlog=True,
                ylog=True,
            )
        )
        header = ["scale"] + [f"q={v:g}" for v in table.q_values]
        cols = [table.scales.astype(float)] + [
            table.fluctuation[i] for i in range(q.size)
        ]
        out.append(_write_table(outdir / "fig9a.csv", header, cols))
    else:
        closed = np.array([synth.cascade_hurst(0.75, v) for v in table.q_values])
        out.append(
            svg.line_plot(
                outdir / "fig9b.svg",
                [
                    (table.q_values, table.hurst, "measured h(q)"),
                    (table.q_values, closed, "closed form", True),
                ],
                xlabel="q",
                ylabel="h(q)",
                title="generalized Hurst exponents",
            )
        )
        out.append(
            _write_table(
                outdir / "fig9b.csv",
                ["q", "h_measured", "h_closed_form"],
                [table.q_values, table.hurst, closed],
            )
        )
    return out


def _fig10(outdir: Path, which: str) -> list[Path]:
    ts = _four_tone_series()
    sg = cwtmod.cwt_morlet(ts)
    gp = cwtmod.global_power(sg, background="white", series=ts.samples)
    peaks = cwtmod.dominant_periods(gp, max_count=4)
    out = []
    if which == "fig10a":
        out.append(
            svg.line_plot(
                outdir / "fig10a.svg",
                [(gp.periods, gp.power, "global power")],
                xlabel="period (s)",
                ylabel="power",
                title="time-averaged wavelet power",
                xlog=True,
                vmarks=[(p, f"{p * 1e3:.0f} ms") for p in sorted(peaks)],
            )
        )
        out.append(
            _write_table(
                outdir / "fig10a.csv",
                ["period_s", "power"],
                [gp.periods, gp.power],
            )
        )
        out.append(
            _write_json(outdir / "fig10a.json", {"dominant_periods_s": sorted(peaks)})
        )
    else:
        out.append(
            svg.line_plot(
                outdir / "fig10b.svg",
                [
                    (gp.periods, gp.power, "global power"),
                    (gp.periods, gp.significance_95, "95% significance", True),
                ],
                xlabel="period (s)",
                ylabel="power",
                title="global power against the 95% level",
                xlog=True,
                ylog=True,
            )
        )
        sig = gp.power > gp.significance_95
        out.append(
            _write_table(
                outdir / "fig10b.csv",
                ["period_s", "power", "significance_95", "significant"],
                [gp.periods, gp.power, gp.significance_95, sig.astype(float)],
            )
        )
    return out


def _fig11(outdir: Path) -> list[Path]:
    rate, n = 200.0, 2**13
    period = 0.578
    base = synth.gen_sine_mix([(period, 1.0, 0.0)], rate, n)
    locked = synth.gen_sine_mix([(period, 1.0, math.pi / 4)], rate, n)
    detuned = synth.gen_sine_mix([(period / 1.01, 1.0, math.pi / 4)], rate, n)
    rng = np.random.default_rng(5)
    noise = lambda: 0.02 * rng.standard_normal(n)  # noqa: E731
    sga = cwtmod.cwt_morlet(TimeSeries(base.samples + noise(), rate))
    sgb = cwtmod.cwt_morlet(TimeSeries(locked.samples + noise(), rate))
    sgc = cwtmod.cwt_morlet(TimeSeries(detuned.samples + noise(), rate))
    idx = int(np.argmin(np.abs(sga.periods - period)))
    scale = float(sga.scales[idx])
    pa = cwtmod.phase_at_scale(sga, scale)
    pb = cwtmod.phase_at_scale(sgb, scale)
    pc = cwtmod.phase_at_scale(sgc, scale)
    locked_cmp = cwtmod.phase_difference(pb, pa)
    detuned_cmp = cwtmod.phase_difference(pc, pa)
    out = []
    for tag, cmp_ in (("locked", locked_cmp), ("detuned", detuned_cmp)):
        bands = [
            (float(cmp_.times[a]), float(cmp_.times[b - 1]))
            for a, b in cmp_.segments
        ]
        out.append(
            svg.line_plot(
                outdir / f"fig11_{tag}.svg",
                [(cmp_.times, cmp_.delta, "phase difference")],
                xlabel="time (s)",
                ylabel="delta phi (rad)",
                title=f"phase difference, {tag} pair",
                bands=bands,
            )
        )
        out.append(
            _write_table(
                outdir / f"fig11_{tag}.csv",
                ["time_s", "delta_phi_rad"],
                [cmp_.times, cmp_.delta],
            )
        )
    out.append(
        _write_json(
            outdir / "fig11.json",
            {
                "locked_median_rad": locked_cmp.median,
                "locked_segments": locked_cmp.segments,
                "detuned_segments": detuned_cmp.segments,
                "drift_bound_s": 0.4 / (2.0 * math.pi * (1.0 / period) * 0.01 / 1.01),
            },
        )
    )
    return out


def _fig12(outdir: Path) -> list[Path]:
    ts = _two_regime_noise()
    ps = spectral.power_spectrum(ts)
    neutral = spectral.heisenberg_fit(ps, 20.0, 400.0, regime="neutral")
    dissip = spectral.heisenberg_fit(ps, 800.0, 20000.0, regime="dissipation")
    nz = ps.freqs > 0
    gx1, gy1 = _guide_line(neutral.fit, *neutral.fit.band, slope=neutral.target)
    gx2, gy2 = _guide_line(dissip.fit, *dissip.fit.band, slope=dissip.target)
    out = [
        svg.line_plot(
            outdir / "fig12.svg",
            [
                (ps.freqs[nz], ps.power[nz], "power"),
                (gx1, gy1, "-5/3 neutral", True),
                (gx2, gy2, "-7 dissipation", True),
            ],
            xlabel="frequency (Hz)",
            ylabel="power",
            title="spectral regimes",
            xlog=True,
            ylog=True,
        )
    ]
    out.append(
        _write_table(outdir / "fig12.csv", ["freq_hz", "power"], [ps.freqs, ps.power])
    )
    out.append(
        _write_json(
            outdir / "fig12.json",
            {
                "neutral": {"slope": neutral.fit.slope, "matches": neutral.matches},
                "dissipation": {"slope": dissip.fit.slope, "matches": dissip.matches},
            },
        )
    )
    return out


def figure_repro(name: str, out_dir: str | Path) -> list[Path]:
    """Rebuild one documentation figure from its synthetic stand-in."""
    if name not in FIGURE_NAMES:
        raise ConfigError(f"unknown figure {name!r}; choose from {FIGURE_NAMES}")
    outdir = Path(out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if name == "fig7":
        return _fig7(outdir)
    if name == "fig8":
        return _fig8(outdir)
    if name in ("fig9a", "fig9b"):
        return _fig9(outdir, name)
    if name in ("fig10a", "fig10b"):
        return _fig10(outdir, name)
    if name == "fig11":
        return _fig11(outdir)
    return _fig12(outdir)


# --------------------------------------------------------------------------
# argument parsing


def _add_input_arg(sp):
    sp.add_argument("--input", required=True, help="input CSV path")
    sp.add_argument("--sample-rate", type=float, default=None)
    sp.add_argument("--column", type=int, default=0)


def _load_input(args) -> TimeSeries:
    return _load_csv_sniffed(
        args.input, sample_rate=args.sample_rate, column=args.column
    )


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wavescope",
        description="Wavelet-based characterization of nonstationary time series",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic series")
    sp.add_argument("--kind", required=True, choices=sorted(_SYNTH_REQUIRED))
    sp.add_argument("--hurst", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--sample-rate", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--amplitude", type=float)
    sp.add_argument("--drive-freq", type=float)
    sp.add_argument("--restitution", type=float)
    sp.add_argument("--n-impacts", type=int)
    sp.add_argument("--a", type=float, help="cascade weight")
    sp.add_argument("--levels", type=int)
    sp.add_argument(
        "--component",
        action="append",
        default=None,
        metavar="PERIOD,AMP,PHASE",
        help="sine component; repeatable",
    )
    sp.add_argument("--increments", action="store_true")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("spectrum", help="one-sided power spectrum")
    _add_input_arg(sp)
    sp.add_argument("--window", default="none", choices=("none", "hann"))
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("fit", help="power-law fit of the spectrum")
    _add_input_arg(sp)
    sp.add_argument("--f-lo", type=float, required=True)
    sp.add_argument("--f-hi", type=float, required=True)
    sp.add_argument("--out", required=True, help="JSON output path")

    sp = sub.add_parser("heisenberg", help="spectral regime comparison")
    _add_input_arg(sp)
    sp.add_argument("--f-lo", type=float, required=True)
    sp.add_argument("--f-hi", type=float, required=True)
    sp.add_argument("--regime", default="neutral")
    sp.add_argument("--rel-tolerance", type=float, default=0.15)
    sp.add_argument("--out", required=True)
    sp.add_argument("--svg", default=None)

    sp = sub.add_parser("denoise", help="wavelet denoising")
    _add_input_arg(sp)
    sp.add_argument("--rule", default="kill_details",
                    choices=("kill_details", "soft_threshold"))
    sp.add_argument("--levels", type=int, default=None)
    sp.add_argument("--kill-count", type=int, default=None)
    sp.add_argument("--vanishing-moments", type=int, default=2)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("mfdfa", help="multifractal fluctuation analysis")
    _add_input_arg(sp)
    sp.add_argument("--difference", action="store_true")
    sp.add_argument("--fit-lo", type=float, default=None)
    sp.add_argument("--fit-hi", type=float, default=None)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("cwt", help="Morlet scalogram summary")
    _add_input_arg(sp)
    sp.add_argument("--omega0", type=float, default=6.0)
    sp.add_argument("--norm", default="l2", choices=("l2", "eq4"))
    sp.add_argument("--pad", default="zero", choices=("zero", "periodic"))
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("globalpower", help="time-averaged wavelet power")
    _add_input_arg(sp)
    sp.add_argument("--background", default="white", choices=("white", "red"))
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("phase", help="phase difference of two series")
    sp.add_argument("--input-a", required=True)
    sp.add_argument("--input-b", required=True)
    sp.add_argument("--sample-rate", type=float, default=None)
    sp.add_argument("--period", type=float, required=True,
                    help="analysis period in seconds")
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    _add_input_arg(sp)
    sp.add_argument("--dim", type=int, default=5)
    sp.add_argument("--delay", default="auto")
    sp.add_argument("--theiler", type=int, default=None)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--divergence-csv", default=None)

    sp = sub.add_parser("run", help="execute a JSON pipeline config")
    sp.add_argument("--config", required=True)

    sp = sub.add_parser("figure-repro", help="rebuild a documentation figure")
    sp.add_argument("--name", required=True, choices=FIGURE_NAMES)
    sp.add_argument("--outdir", required=True)
    return ap


def _cmd_synth(args) -> int:
    spec: dict = {"kind": args.kind, "seed": args.seed}
    if args.kind == "fbm":
        spec.update(hurst=args.hurst, n=args.n, sample_rate=args.sample_rate)
        if args.increments:
            spec["increments"] = True
    elif args.kind == "powerlaw":
        spec.update(beta=args.beta, n=args.n, sample_rate=args.sample_rate)
    elif args.kind == "sines":
        if not args.component:
            raise ConfigError("sines: give at least one --component PERIOD,AMP,PHASE")
        comps = []
        for text in args.component:
            parts = text.split(",")
            if len(parts) != 3:
                raise ConfigError(f"bad --component {text!r}")
            comps.append(tuple(float(v) for v in parts))
        spec.update(components=comps, sample_rate=args.sample_rate, n=args.n)
    elif args.kind == "bounce":
        spec.update(
            amplitude=args.amplitude,
            drive_freq=args.drive_freq,
            restitution=args.restitution,
            n_impacts=args.n_impacts,
        )
        if args.sample_rate is not None:
            spec["sample_rate"] = args.sample_rate
    else:
        spec.update(a=args.a, levels=args.levels)
    missing = [k for k in _SYNTH_REQUIRED[args.kind] if spec.get(k) is None]
    if missing:
        raise ConfigError(f"synth {args.kind}: missing {', '.join(missing)}")
    cfg = RunConfig(
        input={"kind": "synth", "synth": spec},
        pipeline=[],
        output_dir=".",
        seed=args.seed,
    )
    ts = _build_input(cfg)
    write_csv(ts, args.out)
    print(f"wrote {args.out} ({ts.samples.size} samples at {ts.sample_rate:g} Hz)")
    return 0


def _cmd_simple_stage(args, name: str) -> int:
    ts = _load_input(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fmts = {"csv": True, "json": True, "svg": bool(getattr(args, "svg", False))}
    artifacts: list[Path] = []
    summary: dict = {}
    params = {
        "mfdfa": lambda: {
            k: v
            for k, v in (
                ("difference", args.difference),
                ("fit_lo", args.fit_lo),
                ("fit_hi", args.fit_hi),
            )
            if v not in (None, False)
        },
        "cwt": lambda: {"omega0": args.omega0, "norm": args.norm, "pad": args.pad},
        "globalpower": lambda: {"background": args.background},
    }[name]()
    _STAGE_FUNCS[name](ts, params, outdir, name, fmts, artifacts, summary)
    _write_json(outdir / f"{name}_summary.json", summary[name])
    print(f"{name}: " + json.dumps(_plain(summary[name]), sort_keys=True))
    return 0


def _cmd_phase(args) -> int:
    a = _load_csv_sniffed(args.input_a, sample_rate=args.sample_rate)
    b = _load_csv_sniffed(args.input_b, sample_rate=args.sample_rate)
    sga = cwtmod.cwt_morlet(a)
    sgb = cwtmod.cwt_morlet(b)
    idx = int(np.argmin(np.abs(sga.periods - args.period)))
    scale = float(sga.scales[idx])
    cmp_ = cwtmod.phase_difference(
        cwtmod.phase_at_scale(sga, scale), cwtmod.phase_at_scale(sgb, scale)
    )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_table(
        outdir / "phase_difference.csv",
        ["time_s", "delta_phi_rad"],
        [cmp_.times, cmp_.delta],
    )
    info = {
        "period_s": float(sga.periods[idx]),
        "median_rad": cmp_.median,
        "segments": cmp_.segments,
        "min_duration_s": cmp_.min_duration_s,
    }
    _write_json(outdir / "phase.json", info)
    if args.svg:
        bands = [
            (float(cmp_.times[s]), float(cmp_.times[e - 1])) for s, e in cmp_.segments
        ]
        svg.line_plot(
            outdir / "phase.svg",
            [(cmp_.times, cmp_.delta, "delta phi")],
            xlabel="time (s)",
            ylabel="delta phi (rad)",
            title="phase difference",
            bands=bands,
        )
    print(f"phase: median {cmp_.median:+.4f} rad, {len(cmp_.segments)} segment(s)")
    return 0


def _cmd_lyapunov(args) -> int:
    ts = _load_input(args)
    delay = args.delay
    if delay != "auto":
        delay = int(delay)
    else:
        delay = lyapunov.estimate_delay(ts)
    cfg = lyapunov.EmbeddingConfig(
        dim=args.dim, delay=delay, theiler=args.theiler, max_iter=args.max_iter
    )
    res = lyapunov.largest_lyapunov(ts, cfg)
    info = {
        "exponent_per_s": res.exponent,
        "fit_range": list(res.fit_range),
        "r_squared": res.r_squared,
        "n_pairs": res.n_pairs,
        "dim": cfg.dim,
        "delay": cfg.delay,
        "positive": res.positive,
    }
    _write_json(Path(args.out), info)
    if args.divergence_csv:
        k = np.arange(res.divergence.size, dtype=float)
        _write_table(
            Path(args.divergence_csv),
            ["iteration", "mean_log_distance"],
            [k, res.divergence],
        )
    print(f"lyapunov: {res.exponent:+.6g} 1/s (r2 {res.r_squared:.3f})")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "spectrum":
            ts = _load_input(args)
            ps = spectral.power_spectrum(ts, window=args.window)
            _write_table(Path(args.out), ["freq_hz", "power"], [ps.freqs, ps.power])
            print(f"wrote {args.out} ({ps.freqs.size} bins)")
            return 0
        if args.command == "fit":
            ts = _load_input(args)
            outdir = Path(args.out).parent
            outdir.mkdir(parents=True, exist_ok=True)
            artifacts: list[Path] = []
            summary: dict = {}
            _stage_fit(
                ts,
                {"f_lo": args.f_lo, "f_hi": args.f_hi},
                outdir,
                Path(args.out).stem.replace("_fit", "") or "fit",
                {"csv": False, "json": False, "svg": False},
                artifacts,
                summary,
            )
            _write_json(Path(args.out), summary["fit"])
            print(json.dumps(_plain(summary["fit"]), sort_keys=True))
            return 0
        if args.command == "heisenberg":
            ts = _load_input(args)
            regime = args.regime
            if regime not in ("neutral", "dissipation"):
                regime = float(regime)
            ps = spectral.power_spectrum(ts)
            res = spectral.heisenberg_fit(
                ps, args.f_lo, args.f_hi, regime=regime,
                rel_tolerance=args.rel_tolerance,
            )
            info = {
                "slope": res.fit.slope,
                "target": res.target,
                "matches": res.matches,
                "tolerance": res.tolerance,
                "r_squared": res.fit.r_squared,
            }
            _write_json(Path(args.out), info)
            if args.svg:
                nz = ps.freqs > 0
                gx, gy = _guide_line(res.fit, *res.fit.band, slope=res.target)
                svg.line_plot(
                    Path(args.svg),
                    [
                        (ps.freqs[nz], ps.power[nz], "power"),
                        (gx, gy, f"target {res.target:.3g}", True),
                    ],
                    xlabel="frequency (Hz)", ylabel="power",
                    title="spectral regime fit", xlog=True, ylog=True,
                )
            print(json.dumps(_plain(info), sort_keys=True))
            return 0
        if args.command == "denoise":
            ts = _load_input(args)
            spec = dwt.daubechies(args.vanishing_moments)
            cleaned = dwt.denoise(
                ts.samples, spec, levels=args.levels, rule=args.rule,
                kill_count=args.kill_count,
            )
            write_csv(TimeSeries(cleaned, ts.sample_rate, label=ts.label), args.out)
            print(f"wrote {args.out}")
            return 0
        if args.command in ("mfdfa", "cwt", "globalpower"):
            return _cmd_simple_stage(args, args.command)
        if args.command == "phase":
            return _cmd_phase(args)
        if args.command == "lyapunov":
            return _cmd_lyapunov(args)
        if args.command == "run":
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
            cfg = validate_config(raw)
            report = run(cfg)
            print(
                f"run complete: {len(report.artifacts)} artifact(s) in "
                f"{cfg.output_dir}"
            )
            return 0
        if args.command == "figure-repro":
            paths = figure_repro(args.name, args.outdir)
            for p in paths:
                print(p)
            return 0
        raise ConfigError(f"unhandled command {args.command!r}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except StageError as err:
        print(f"stage failed: {err}", file=sys.stderr)
        return 3
    except WavescopeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
