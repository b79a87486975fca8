import math
import subprocess
import sys

import numpy as np
import pytest

from oqsthermo.cli import main
from oqsthermo.experiments import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    ConfigError,
    ExperimentConfig,
    Scenario,
    config_from_dict,
    config_to_toml,
    default_config,
    format_float,
    load_config,
    run,
)
from oqsthermo.experiments import tomllib


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def body(path):
    return path.read_bytes()


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_default_config():
    cfg = default_config()
    assert cfg.params.cutoff_ratio == pytest.approx(1000.0)
    assert cfg.params.ratio == pytest.approx(2.0)
    assert cfg.params.lambda_coupling == 0.005
    assert cfg.params.unit_mode.value == "physical"
    assert cfg.initial_state == (1.0, 0.0, -0.894, -0.447)
    angular = config_from_dict({"params": {"convention": "angular"}})
    assert angular.params.beta == pytest.approx(10.2, abs=0.05)


def test_defaults_round_trip(capsys):
    assert main(["defaults"]) == 0
    text = capsys.readouterr().out
    cfg = config_from_dict(tomllib.loads(text))
    ref = default_config()
    assert cfg.params.beta == pytest.approx(ref.params.beta, rel=1e-14)
    assert cfg.params.ratio == pytest.approx(ref.params.ratio, rel=1e-14)
    assert cfg.scenario is Scenario.TIMESERIES
    assert cfg == config_from_dict(tomllib.loads(config_to_toml(cfg)))


@pytest.mark.parametrize("text,field", [
    ('scenario = "nope"', "scenario"),
    ('bogus = 1', "bogus"),
    ('[params]\nratio = "two"', "params.ratio"),
    ('[params]\ntemperature = -1.0', "params"),
    ('[params]\nconvention = "radians"', "params"),
    ('[grid]\nn_points = 2.5', "grid.n_points"),
    ('[grid]\ndt = -0.1', "grid.dt"),
    ('initial_state = [1.0, 0.9, 0.9, 0.9]', "initial_state"),
    ('initial_state = [1.0, 0.0]', "initial_state"),
    ('[sweep]\ntemperatures = []\n', "sweep"),
    ('scenario = "sweep"\n[sweep]\nratios = []\n', "sweep"),
    ('seed = \n', "line 1"),
])
def test_config_errors_name_field(tmp_path, text, field):
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, text))
    assert field in str(info.value)


def test_cli_config_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, 'scenario = "nope"')
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
    assert "scenario" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG


def test_numerical_error_exit(tmp_path, capsys):
    # no coupling: the stationary state is not unique
    cfg = config_from_dict({"scenario": "timeseries", "output_dir": str(tmp_path / "o"),
                            "params": {"lambda_coupling": 0.0}})
    assert run(cfg) == EXIT_NUMERICAL
    assert "generators" in capsys.readouterr().err
    manifest = (tmp_path / "o" / "run_manifest.txt").read_text()
    assert "exit_status = 3" in manifest


def test_fig1_scan(tmp_path):
    out = tmp_path / "fig1"
    assert main(["run", "--scenario", "fig1_scan", "--n-points", "31", "--out", str(out)]) == 0
    d = read_csv(out / "sigma_field.csv")
    assert d.size == 31 * 31
    inside = np.hypot(d["r1"], d["r2"]) <= 1 + 1e-12
    assert np.all(np.isfinite(d["sigma_redfield"][inside]))
    assert np.all(np.isnan(d["sigma_cp"][~inside]))
    assert np.nanmin(d["sigma_redfield"]) < 0 < np.nanmax(d["sigma_redfield"])
    assert np.nanmin(d["sigma_cp"]) >= -1e-10 * 0.005 ** 2
    compile((out / "plot_fig1_scan.py").read_text(), "plot", "exec")


def test_timeseries(tmp_path):
    out = tmp_path / "ts"
    assert main(["run", "--scenario", "timeseries", "--out", str(out)]) == 0
    d = read_csv(out / "timeseries.csv")
    assert list(d.dtype.names) == ["t", "sigma_redfield", "sigma_cp", "heat_flux_redfield", "heat_flux_cp"]
    assert d["sigma_cp"].min() >= -1e-9 * 0.005 ** 2
    assert d["sigma_redfield"].min() < 0 < d["sigma_redfield"].max()
    traj = read_csv(out / "trajectory_redfield.csv")
    assert list(traj.dtype.names) == ["t", "r1", "r2", "r3", "norm"]
    manifest = dict(line.split(" = ", 1) for line in (out / "run_manifest.txt").read_text().splitlines())
    for key in ("tool_version", "seed", "wall_time_s", "params.temperature", "params.beta_hbar_delta"):
        assert key in manifest
    assert int(manifest["result.redfield.negative_intervals"]) >= 3
    assert int(manifest["result.cp.negative_intervals"]) == 0


def test_overrides(tmp_path):
    cfg = write(tmp_path, 'scenario = "fig1_scan"\nseed = 3\n[grid]\nn_points = 5\n')
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--scenario", "timeseries", "--t-max", "2.0",
                 "--dt", "0.5", "--seed", "9", "--out", str(out)]) == 0
    d = read_csv(out / "timeseries.csv")
    assert np.allclose(d["t"], [0, 0.5, 1.0, 1.5, 2.0])
    assert "seed = 9" in (out / "run_manifest.txt").read_text()


def test_sweep_rows(tmp_path):
    cfg = write(tmp_path, f'''scenario = "sweep"
output_dir = "{tmp_path / 'sw'}"
[sweep]
temperatures = [0.006, 0.06]
ratios = [1.0, 10.0]
n_states = 200
search_states = 30
[grid]
periods = 4
''')
    assert main(["run", "--config", str(cfg)]) == 0
    d = read_csv(tmp_path / "sw" / "sweep.csv")
    assert list(d.dtype.names) == ["T_kelvin", "ratio", "frac_t0_redfield", "frac_t0_cp", "has_time_violation", "min_sigma"]
    assert d.size == 4
    assert np.all(d["frac_t0_cp"] == 0)
    assert np.all(d["frac_t0_redfield"] > 0)


def test_bath_and_snapshot(tmp_path):
    out = tmp_path / "bath"
    assert main(["run", "--scenario", "tabulate_bath", "--n-points", "11", "--out", str(out)]) == 0
    d = read_csv(out / "bath_correlation.csv")
    assert list(d.dtype.names) == ["u", "re_G", "im_G"] and d.size == 11
    assert d["im_G"][0] == 0.0
    snap = tmp_path / "snap"
    assert main(["snapshot-generators", "--out", str(snap)]) == 0
    lines = (snap / "generators.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].split(",")[1:] == [f"m{i}{j}" for i in range(4) for j in range(4)]
    red = np.array([float(x) for x in lines[1].split(",")[1:]])
    assert red.size == 16 and np.all(red[:4] == 0)
    from oqsthermo import build_redfield, footnote_params
    assert np.array_equal(red.reshape(4, 4), build_redfield(footnote_params()).matrix)


@pytest.mark.parametrize("scenario", [s.value for s in Scenario])
def test_determinism(tmp_path, scenario):
    args = ["--scenario", scenario, "--seed", "7"]
    if scenario in ("fig1_scan", "tabulate_bath"):
        args += ["--n-points", "21"]
    bodies = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        cfg = write(tmp_path, '[sweep]\ntemperatures = [0.006]\nratios = [2.0]\nn_states = 100\nsearch_states = 10\n[grid]\nperiods = 3\n', f"c{k}.toml")
        assert main(["run", "--config", str(cfg), *args, "--out", str(out)]) == 0
        bodies.append({p.name: body(p) for p in sorted(out.glob("*.csv"))})
    assert bodies[0] == bodies[1] and bodies[0]


def test_csv_format():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(math.pi)) == math.pi
    assert format_float(math.nan) == "nan" and format_float(-math.inf) == "-inf"


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "oqsthermo", "defaults", "--scenario", "sweep"],
                         capture_output=True, text=True, check=True)
    assert 'scenario = "sweep"' in res.stdout


def test_config_requires_initial_state_for_timeseries():
    with pytest.raises(ConfigError):
        ExperimentConfig(Scenario.TIMESERIES, default_config().params, initial_state=None)
