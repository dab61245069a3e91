import csv

import numpy as np
import pytest

from pvswipt import __version__
from pvswipt.cli import (
    CDF_HEADER,
    EH_HEADER,
    RATE_HEADER,
    Table,
    cmd_cdf_table,
    cmd_eh_sweep,
    cmd_rate_sweep,
    cmd_waveform,
    main,
    rate_observations,
)
from pvswipt.config import ConfigError, RunConfig, apply_overrides, load_config, parse_config_text
from pvswipt.transient import CSV_COLUMNS


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def small(**kw):
    base = dict(p_points="5", a2="1e-3,1e-2", cdf_points="11")
    base.update(kw)
    return apply_overrides(RunConfig(), base).validate()


def test_defaults():
    cfg = RunConfig()
    assert cfg.lambda_nm == (400.0, 950.0)
    assert cfg.sigma2 == pytest.approx(1e-9)
    g = cfg.power_grid()
    assert len(g) == 50 and g[0] == pytest.approx(1e-6) and g[-1] == pytest.approx(0.1)
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))
    lin = apply_overrides(cfg, {"p_scale": "linear", "p_points": "3"}).power_grid()
    np.testing.assert_allclose(lin, [1e-6, 0.0500005, 0.1])


def test_config_file_roundtrip(tmp_path):
    cfg = apply_overrides(RunConfig(), {"RL": "5000", "pa": "0, 1e-4", "cold_start": "yes", "dt_min": "1e-7"})
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n" + "\n".join(cfg.echo()) + "\n")
    assert load_config(path) == cfg
    assert cfg.circuit.RL == 5000.0 and cfg.pa == (0.0, 1e-4) and cfg.cold_start


@pytest.mark.parametrize(
    "values",
    [{"nope": "1"}, {"RL": "-1"}, {"p_points": "x"}, {"cold_start": "maybe"}],
)
def test_config_errors(values):
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), values)


def test_config_syntax_and_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cfg:2"):
        parse_config_text("a = 1\nbroken line\n", "cfg")
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize(
    "values",
    [{"p_points": "0"}, {"a2": ""}, {"pa": ""}, {"lambda_nm": ""}, {"a2": "0"}, {"p_min": "0"}, {"jobs": "0"}],
)
def test_validation_rejects(values):
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), values).validate()


def test_eh_sweep_table():
    t = cmd_eh_sweep(small())
    assert t.header == EH_HEADER
    data = np.array(t.rows, dtype=float)
    assert data.shape == (10, 8)
    assert np.all(np.isfinite(data))
    assert np.max(np.abs(data[:, 7])) < 0.02
    # single-diode baseline coincides with the closed form at equal Is
    np.testing.assert_allclose(data[:, 6], data[:, 3], rtol=1e-10)


def test_eh_sweep_anchor_row():
    cfg = apply_overrides(RunConfig(), {"p_min": "0.01", "p_max": "0.01", "p_points": "1", "lambda_nm": "950"})
    (row,) = cmd_eh_sweep(cfg).rows
    assert row[3] == pytest.approx(1.571280e-5, rel=1e-6)
    assert row[5] == pytest.approx(row[3], rel=1e-12)


def test_cdf_table():
    t = cmd_cdf_table(small())
    assert t.header == CDF_HEADER
    data = np.array(t.rows)
    for A2 in (1e-3, 1e-2):
        g = data[data[:, 0] == A2]
        assert len(g) == 11
        np.testing.assert_array_equal(g[0, 2:], 0.0)
        np.testing.assert_array_equal(g[-1, 2:], 1.0)


def test_rate_sweep_and_observations():
    t, notes = cmd_rate_sweep(small(pa="0,1e-4"))
    assert t.header == RATE_HEADER
    data = np.array(t.rows)
    assert np.all(data[:, 2] >= data[:, 3])
    assert np.allclose(data[:, 2], data[:, 4], atol=1e-3)
    assert any("pa=0.000e+00" in n for n in notes)
    fake = Table(RATE_HEADER)
    fake.rows = [(1e-3, 0.0, 1.0, 1.0, 1.0), (1e-2, 0.0, 2.0, 2.0, 2.0)]
    assert rate_observations(fake) == []


def test_waveform_metrics_and_warning():
    cfg = small(T="0.5", symbols="2e-3,8e-3")
    wave, metrics, warnings = cmd_waveform(cfg)
    assert wave.header == CSV_COLUMNS
    assert not warnings
    assert all(row[7] < 1e-6 for row in metrics.rows)
    short = small(T="1e-5", dt="1e-8", symbols="2e-3,8e-3")
    _, _, warnings = cmd_waveform(short)
    assert warnings and "steady-state assumption fails" in warnings[0]


def test_table_rejects_nonfinite():
    t = Table(("a",))
    with pytest.raises(Exception):
        t.add((float("nan"),))


def test_main_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "eh.csv"
    assert main(["eh-sweep", "--set", "p_points=4", "--lambda-nm", "950", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert tuple(header) == EH_HEADER and data.shape == (4, 8)
    manifest = (tmp_path / "eh.csv.manifest.txt").read_text()
    assert f"version = {__version__}" in manifest
    assert "lambda_nm = 950.0" in manifest
    assert "eh.csv = " in manifest


def test_main_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eh-sweep", "--set", "p_points=0"])
    assert exc.value.code == 2
    assert "power grid is empty" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["rate-sweep", "--a2", "abc"])
    with pytest.raises(SystemExit):
        main(["sample", "--seed", "-1"])


def test_main_io_error(tmp_path, capsys):
    out = tmp_path / "missing_dir" / "x.csv"
    assert main(["cdf-table", "--a2", "1e-3", "--set", "cdf_points=3", "--out", str(out)]) == 2
    assert "cannot write" in capsys.readouterr().err


def test_main_sample_and_waveform(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sample", "--count", "20", "--seed", "5", "--variant", "uniform_s", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["k", "u", "s_W", "x_sqrtW", "n_sqrtW", "y_sqrtW"]
    np.testing.assert_allclose(data[:, 5], data[:, 3] + data[:, 4], rtol=1e-11)
    wf = tmp_path / "w.csv"
    assert main(["waveform", "--symbols", "1e-3,4e-3", "--T", "0.01", "--out", str(wf)]) == 0
    assert (tmp_path / "w.csv.metrics.csv").exists()


def test_main_stdout(capsys):
    assert main(["cdf-table", "--a2", "1e-3", "--set", "cdf_points=3"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(CDF_HEADER)
    assert len(out.splitlines()) == 4


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["eh-sweep", "--set", "p_points=6"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--jobs", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
