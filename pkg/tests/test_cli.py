import csv
import json

import pytest

from zalcmanlab import __version__
from zalcmanlab.cli import (
    OUT_DIR_ENV,
    ExperimentConfig,
    canonical_json,
    load_config,
    main,
    run,
    trace_header,
)
from zalcmanlab.errors import ConfigError


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def _base(tmp_path, **over):
    cfg = {
        "family": {"kind": "catalogue", "name": "linear"},
        "alpha": 0.0,
        "j_schedule": [10, 20, 40, 80],
        "report": {"ball_radius": 1.0, "grid_per_dim": 16, "out_dir": str(tmp_path / "out")},
    }
    cfg.update(over)
    return cfg


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture(autouse=True)
def _no_env_override(monkeypatch):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)


def test_run_linear(tmp_path):
    code = run(_write(tmp_path, _base(tmp_path)))
    assert code == 0
    out = tmp_path / "out"
    trace = _rows(out / "rescaling_trace.csv")
    assert trace[0] == trace_header(1)
    assert [r[0] for r in trace[1:]] == ["10", "20", "40", "80"]
    for row in trace[1:]:
        j = int(row[0])
        assert row[1] == "ok"
        assert float(row[4]) == pytest.approx(1 / j, rel=1e-6)
    conv = _rows(out / "convergence.csv")
    assert conv[0] == ["j_low", "j_high", "sup_diff", "radius"]
    assert all(float(r[2]) <= 1e-9 for r in conv[1:])
    report = json.loads((out / "report.json").read_text())
    assert report["version"] == __version__
    assert report["marty"]["verdict"]["kind"] == "DIVERGING"
    assert report["convergence"]["cauchy_verdict"] == "CONVERGING"


def test_run_affine_normal_exit_2(tmp_path):
    code = run(_write(tmp_path, _base(tmp_path, family={"kind": "catalogue", "name": "affine_normal"})))
    assert code == 2
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert report["marty"]["verdict"]["kind"] == "BOUNDED"
    trace = _rows(out / "rescaling_trace.csv")
    assert [r[1] for r in trace[1:]] == ["precondition_unmet"] * 4
    assert len(_rows(out / "convergence.csv")) == 1


def test_malformed_json_exit_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(p) == 1
    assert not (tmp_path / "zalcman_out").exists()


def test_config_echo_is_canonical(tmp_path):
    p = _write(tmp_path, _base(tmp_path))
    run(p)
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    cfg = load_config(p)
    assert canonical_json(report["config"]) == canonical_json(cfg.to_dict())
    # the echo validates to itself
    assert ExperimentConfig.from_dict(report["config"]).to_dict() == report["config"]


def test_csv_deterministic(tmp_path):
    a = _base(tmp_path)
    b = _base(tmp_path)
    b["report"]["out_dir"] = str(tmp_path / "out2")
    run(_write(tmp_path, a, "a.json"))
    run(_write(tmp_path, b, "b.json"))
    for name in ("rescaling_trace.csv", "convergence.csv"):
        assert (tmp_path / "out" / name).read_bytes() == (tmp_path / "out2" / name).read_bytes()


def test_env_out_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env_out"))
    assert run(_write(tmp_path, _base(tmp_path))) == 0
    assert (tmp_path / "env_out" / "report.json").exists()
    assert not (tmp_path / "out").exists()


def test_expression_family_planar(tmp_path):
    cfg = _base(tmp_path, family={"kind": "expression", "template": "j*z1 + z2^2"},
                dimension=2, j_schedule=[10, 20])
    assert run(_write(tmp_path, cfg)) in (0, 3)
    trace = _rows(tmp_path / "out" / "rescaling_trace.csv")
    assert trace[0] == trace_header(2)
    assert len(trace) == 3


@pytest.mark.parametrize("patch", [
    {"alpha": -1.0},
    {"j_schedule": [20, 10]},
    {"j_schedule": [1, 10]},
    {"j_schedule": [10, 300]},
    {"j_schedule": []},
    {"family": {"kind": "catalogue", "name": "nope"}},
    {"family": {"kind": "expression", "template": "z3"}, "dimension": 1},
    {"family": {"kind": "catalogue", "name": "linear"}, "dimension": 2},
    {"family": {"kind": "catalogue", "name": "linear"}, "zero_free": True},
    {"optimizer": {"grid_per_dim": 4}},
    {"optimizer": {"bogus": 1}},
    {"bisect_tol": 0},
    {"probe_center": [[1.0, 0.0]]},
    {"extra": 1},
])
def test_invalid_configs(tmp_path, patch):
    cfg = _base(tmp_path, **patch)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(cfg)
    assert run(_write(tmp_path, cfg)) == 1


def test_ball_radius_limited_by_schedule(tmp_path):
    cfg = _base(tmp_path, j_schedule=[2, 4])
    cfg["report"]["ball_radius"] = 1.5
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(cfg)


def test_zero_free_exp_negative_alpha_accepted(tmp_path):
    cfg = _base(tmp_path, family={"kind": "catalogue", "name": "exp_neg_alpha"},
                alpha=-1.5, j_schedule=[10, 20])
    parsed = ExperimentConfig.from_dict(cfg)
    assert parsed.zero_free and parsed.alpha == -1.5


def test_catalogue_command(capsys):
    assert main(["catalogue"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6
    exp = next(l for l in lines if l.startswith("exp "))
    assert "zero_free" in exp
    assert "n=2" in next(l for l in lines if l.startswith("planar"))


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_main_run(tmp_path):
    assert main(["run", str(_write(tmp_path, _base(tmp_path)))]) == 0
