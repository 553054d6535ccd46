import json

import numpy as np
import pytest

from wavescope import ConfigError
from wavescope.cli import (
    _load_csv_sniffed,
    figure_repro,
    main,
    run,
    validate_config,
)
from wavescope.signal_core import TimeSeries, write_csv


def _good_raw(tmp_path, pipeline=None):
    return {
        "input": {
            "kind": "synth",
            "synth": {"kind": "fbm", "hurst": 0.5, "n": 4096, "sample_rate": 1.0},
        },
        "pipeline": pipeline
        if pipeline is not None
        else [{"stage": "mfdfa", "difference": True, "fit_lo": 16, "fit_hi": 512}],
        "output_dir": str(tmp_path / "out"),
    }


# --------------------------------------------------------------- validation


def test_validate_fills_defaults(tmp_path):
    cfg = validate_config(_good_raw(tmp_path))
    assert cfg.seed == 0
    assert cfg.formats == {"csv": True, "json": True, "svg": False}


@pytest.mark.parametrize(
    "mutate",
    [
        lambda r: r.pop("pipeline"),
        lambda r: r.update(extra=1),
        lambda r: r["pipeline"].append({"stage": "fourier"}),
        lambda r: r["pipeline"][0].update(bogus=True),
        lambda r: r.update(seed=-1),
        lambda r: r.update(seed="five"),
        lambda r: r.update(formats={"pdf": True}),
        lambda r: r.update(formats={"svg": "yes"}),
        lambda r: r["input"]["synth"].update(kind="brownian"),
        lambda r: r["input"]["synth"].pop("hurst"),
        lambda r: r.update(output_dir=""),
    ],
)
def test_validate_rejects_bad_configs(tmp_path, mutate):
    raw = _good_raw(tmp_path)
    mutate(raw)
    with pytest.raises(ConfigError):
        validate_config(raw)


def test_validation_happens_before_any_output(tmp_path):
    raw = _good_raw(tmp_path)
    raw["pipeline"].append({"stage": "nonsense"})
    with pytest.raises(ConfigError):
        validate_config(raw)
    assert not (tmp_path / "out").exists()


# ------------------------------------------------------------- csv sniffing


def test_sniffed_loader_promotes_time_header(tmp_path):
    ts = TimeSeries(np.sin(np.arange(64) / 5.0), 25.0)
    path = tmp_path / "two_col.csv"
    write_csv(ts, path)  # writes time_s,value
    back = _load_csv_sniffed(path)
    assert back.sample_rate == pytest.approx(25.0)
    np.testing.assert_allclose(back.samples, ts.samples, rtol=1e-12)


def test_sniffed_loader_bare_column_needs_rate(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("value\n" + "\n".join(str(v) for v in range(32)) + "\n")
    ts = _load_csv_sniffed(path, sample_rate=10.0)
    assert ts.sample_rate == 10.0
    assert ts.samples.size == 32


# -------------------------------------------------------------------- runs


def test_run_writes_report_and_summary(tmp_path):
    cfg = validate_config(_good_raw(tmp_path))
    report = run(cfg)
    assert report.exit_code == 0
    out = tmp_path / "out"
    assert (out / "input.csv").exists()
    assert (out / "report.json").exists()
    blob = json.loads((out / "report.json").read_text())
    assert blob["exit_code"] == 0
    names = {a["path"] for a in blob["artifacts"]}
    assert any(n.endswith("hq.csv") or "mfdfa" in n for n in names)
    h2 = report.summary["mfdfa"]["h2"]
    assert 0.3 < h2 < 0.75


def test_main_exit_codes(tmp_path):
    # 0: healthy run
    cfg_path = tmp_path / "ok.json"
    cfg_path.write_text(json.dumps(_good_raw(tmp_path)))
    assert main(["run", "--config", str(cfg_path)]) == 0

    # 2: config problem, caught before output exists
    bad = _good_raw(tmp_path / "never")
    bad["pipeline"][0]["stage"] = "bogus"
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    assert main(["run", "--config", str(bad_path)]) == 2
    assert not (tmp_path / "never").exists()

    # 2: unparseable JSON
    mangled = tmp_path / "mangled.json"
    mangled.write_text("{not json")
    assert main(["run", "--config", str(mangled)]) == 2

    # 4: filesystem error
    assert main(["run", "--config", str(tmp_path)]) == 4


def test_failed_stage_leaves_marker(tmp_path):
    raw = _good_raw(tmp_path)
    # band far above Nyquist: the fit stage cannot keep any bins
    raw["pipeline"] = [{"stage": "fit", "f_lo": 100.0, "f_hi": 200.0}]
    cfg_path = tmp_path / "doomed.json"
    cfg_path.write_text(json.dumps(raw))
    assert main(["run", "--config", str(cfg_path)]) == 3
    marker = tmp_path / "out" / "fit.failed"
    assert marker.exists()
    assert "band" in marker.read_text()


def test_figure_repro_rejects_unknown_name(tmp_path):
    with pytest.raises(ConfigError):
        figure_repro("fig99", tmp_path)


def test_synth_subcommand_round_trip(tmp_path):
    out = tmp_path / "wave.csv"
    rc = main(
        [
            "synth",
            "--kind",
            "sines",
            "--component",
            "0.5,1.0,0.0",
            "--sample-rate",
            "100",
            "--n",
            "1000",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    ts = _load_csv_sniffed(out)
    assert ts.sample_rate == pytest.approx(100.0)
    t = np.arange(1000) / 100.0
    np.testing.assert_allclose(ts.samples, np.sin(2 * np.pi * t / 0.5), atol=1e-9)
