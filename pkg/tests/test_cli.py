import csv
import json
import math
from pathlib import Path

import pytest

from memwave.cli import RunConfig, config_from_dict, dump_config, main, parse_config
from memwave.core import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {}))
    assert cfg == RunConfig()
    assert cfg.L == math.pi and cfg.T == 3.65 and cfg.dx == 0.01 and cfg.dt == 0.005
    assert cfg.t0 == 2.0 and cfg.sigma_g == 0.05 and cfg.lam == 10.0 and cfg.x0 == -2.0
    (tmp_path / "blank.json").write_text("")
    assert parse_config(tmp_path / "blank.json") == RunConfig()


def test_cfl_rejected(tmp_path):
    with pytest.raises(ConfigError, match="CFL"):
        parse_config(write(tmp_path, {"grid": {"dx": 0.01}, "time": {"dt": 0.02}}))


def test_negative_width_rejected(tmp_path):
    with pytest.raises(ConfigError, match="sigma_g"):
        parse_config(write(tmp_path, {"packet": {"sigma_g": -0.05}}))


@pytest.mark.parametrize("bad, path", [
    ({"grid": {"Lx": 3}}, "grid.Lx"),
    ({"solver": {"tol": 1e-8, "tolerance": 1}}, "solver.tolerance"),
    ({"extra": 1}, "extra"),
])
def test_unknown_keys_report_their_path(tmp_path, bad, path):
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        parse_config(write(tmp_path, bad))


def test_type_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, {"solver": {"restart": 2.5}}))
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, {"grid": {"dx": "fine"}}))
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, {"model": {"values": [[1, 2, 3], 0, 0]}}))
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, {"model": {"values": ["a", 0, 0]}}))
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, {"line": {"regularize": 1}}))


def test_complex_values_and_round_trip(tmp_path):
    cfg = config_from_dict({"model": {"values": [[400, -1], -50, 300]}})
    assert cfg.values[0] == complex(400, -1)
    p = tmp_path / "out.json"
    dump_config(cfg, p)
    assert parse_config(p) == cfg
    assert json.loads(p.read_text()) == cfg.to_dict()


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_round_trip(path, tmp_path):
    cfg = parse_config(path)
    assert cfg.name == path.stem
    dump_config(cfg, tmp_path / "again.json")
    assert parse_config(tmp_path / "again.json") == cfg


def test_cone_violation_exits_nonzero_without_frames(tmp_path):
    cfg = write(tmp_path, {"name": "cone", "time": {"T": 20.0}})
    out = tmp_path / "runs"
    assert main(["frames", "--config", str(cfg), "--out", str(out)]) != 0
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) != 0
    assert not (out / "cone" / "frames").exists()


def test_frames_three_panels(tmp_path):
    out = tmp_path / "runs"
    rc = main(["frames", "--out", str(out), "--stride", "40", "--pairs", "0,0;3,2;4,10"])
    assert rc == 0
    sets = sorted(p.name for p in out.iterdir())
    assert sets == ["default_g0_a0", "default_g3_a2", "default_g4_a10"]
    n_t, n_x = 731, 629
    for name in sets:
        frames = sorted((out / name / "frames").glob("frame_*.csv"))
        assert len(frames) == math.ceil(n_t / 40)
        with open(frames[-1]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "re_u", "im_u", "abs_u", "V_norm"]
        assert len(rows) == n_x + 1
        vn = [float(r[4]) for r in rows[1:]]
        assert max(abs(v) for v in vn) == 1.0
        rep = json.loads((out / name / "reports" / "frames.json").read_text())
        assert rep["pass"]


def test_simulate_writes_trajectory(tmp_path):
    out = tmp_path / "runs"
    assert main(["simulate", "--out", str(out), "--stride", "100"]) == 0
    assert (out / "default" / "trajectory.npz").exists()
    rep = json.loads((out / "default" / "reports" / "simulate.json").read_text())
    assert rep["snapshots"] == math.ceil(731 / 100)


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MEMWAVE_OUT", str(tmp_path / "envroot"))
    assert main(["simulate", "--stride", "200"]) == 0
    assert (tmp_path / "envroot" / "default" / "trajectory.npz").exists()


def test_extract_and_smatrix(tmp_path):
    out = tmp_path / "runs"
    cfg = str(CONFIGS / "cross_validation.json")
    small = write(tmp_path, {**json.loads(Path(cfg).read_text()),
                             "grid": {"L": 12.5, "dx": 0.01}, "time": {"T": 11.0, "dt": 0.005}})
    assert main(["extract", "--config", str(small), "--out", str(out)]) == 0
    base = out / "cross_validation"
    for f in ("incident", "reflected_G", "transmitted_F"):
        assert (base / "series" / f"{f}.csv").exists()
    g = json.loads((base / "spectra" / "G_hat.json").read_text())
    assert set(g) == {"sigma", "omega", "values"} and g["sigma"] == 0.5
    assert main(["smatrix", "--config", str(small), "--out", str(out), "--sigma-line", "1.0"]) == 0
    rep = json.loads((base / "reports" / "smatrix.json").read_text())
    assert rep["residual"] < 1e-8 and rep["sigma"] == 1.0
    t = json.loads((base / "spectra" / "T_of_f.json").read_text())
    assert len(t["values"]) == len(t["omega"]) == 256


def test_convergence_command(tmp_path):
    out = tmp_path / "runs"
    assert main(["convergence", "--config", str(CONFIGS / "free_transport.json"), "--out", str(out)]) == 0
    rep = json.loads((out / "free_transport" / "reports" / "convergence.json").read_text())
    assert abs(rep["orders"][0] - 2.0) <= 0.2


def test_validate_subset_and_failure_status(tmp_path):
    out = tmp_path / "runs"
    assert main(["validate", "--out", str(out), "--campaigns", "memory_fixed_point,config_run"]) == 0
    summary = json.loads((out / "default" / "reports" / "summary.json").read_text())
    assert summary["pass"] and set(summary["campaigns"]) == {"memory_fixed_point", "config_run"}
    # an unknown campaign is a configuration error, not a silent pass
    assert main(["validate", "--out", str(out), "--campaigns", "nonsense"]) != 0


@pytest.mark.slow
def test_validate_defaults_end_to_end(tmp_path):
    out = tmp_path / "runs"
    assert main(["validate", "--out", str(out)]) == 0
    reports = out / "default" / "reports"
    for name in ("free_transport", "memoryless_reduction", "classical_oracle", "support",
                 "frequency_identities", "cross_pipeline", "memory_fixed_point", "fig1", "summary"):
        assert (reports / f"{name}.json").exists()
