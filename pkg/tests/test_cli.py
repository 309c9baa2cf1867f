import json
import subprocess
import sys

import pytest

from halpern_lab.cli import main

HALF_X1 = {"kind": "halfspace_projection", "params": {"a": [1, 0], "b": 1}}
HALF_X2 = {"kind": "halfspace_projection", "params": {"a": [0, 1], "b": 1}}
HARMONIC = {"kind": "harmonic", "a": 1, "c": 1, "p": 1}


def experiment(**overrides):
    cfg = {
        "mode": "flmr",
        "regime": "regime3",
        "dimension": 2,
        "u": [3, 3],
        "x1": [0, 0],
        "T": HALF_X1,
        "S": HALF_X2,
        "alpha": HARMONIC,
        "beta": {"kind": "constant", "v": 0.5},
        "max_iter": 500000,
        "stop_tol": 0.01,
        "trace_stride": 1,
        "targets": {"PT": [1, 3], "PS": [3, 1], "PF": [1, 1]},
        "output_prefix": "out/run",
    }
    cfg.update(overrides)
    return {k: v for k, v in cfg.items() if v is not None}


@pytest.fixture
def write(tmp_path):
    (tmp_path / "out").mkdir()

    def _write(cfg, name="exp.json"):
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)

    return _write


def test_run_regime3(write, tmp_path, capsys):
    assert main(["run", write(experiment())]) == 0
    regime = json.loads((tmp_path / "out/run.regime.json").read_text())
    assert regime["verdict"] == "intersection"
    summary = json.loads((tmp_path / "out/run.summary.json").read_text())
    assert summary["status"] == "converged_target"
    header = (tmp_path / "out/run.trace.csv").read_text().splitlines()[0]
    assert header == "n,x_1,x_2,residual_T,residual_S,alpha,beta,dist_to_target"
    assert json.loads(capsys.readouterr().out)["verdict"] == "intersection"


def test_run_with_oracle_targets(write, tmp_path):
    path = write(experiment(targets="oracle", regime="regime2", beta={"kind": "inverse_square"}))
    assert main(["run", path]) == 0
    assert json.loads((tmp_path / "out/run.regime.json").read_text())["verdict"] == "fixS"


def test_run_is_deterministic(write, tmp_path):
    path = write(experiment(targets="oracle", stop_tol=1e-3))
    main(["run", path])
    first = (tmp_path / "out/run.trace.csv").read_bytes()
    main(["run", path])
    assert (tmp_path / "out/run.trace.csv").read_bytes() == first


def test_run_bad_alpha_table(write, capsys):
    path = write(experiment(alpha={"kind": "table", "values": [0.5, 1.5], "flags": []}))
    assert main(["run", path]) == 1
    assert "alpha" in capsys.readouterr().err


def test_run_max_iter_guard(write):
    assert main(["run", write(experiment(max_iter=1))]) == 2


def test_run_flag_overrides(write, tmp_path):
    path = write(experiment())
    assert main(["run", path, "--max-iter", "3"]) == 2
    assert json.loads((tmp_path / "out/run.summary.json").read_text())["iterations_run"] == 3
    assert main(["run", path, "--tol", "0.5"]) == 0


@pytest.mark.parametrize(
    "cfg, key",
    [
        (experiment(bogus=1), "bogus"),
        (experiment(u=[1, 2, 3]), "u"),
        (experiment(T={"kind": "ball_projection", "params": {"center": [0, 0], "radius": -1}}), "T"),
        (experiment(mode=None), "mode"),
        (experiment(max_iter="many"), "max_iter"),
    ],
)
def test_run_parse_errors_name_key(write, capsys, cfg, key):
    assert main(["run", write(cfg)]) == 1
    assert key in capsys.readouterr().err


def test_run_missing_or_broken_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["run", str(broken)]) == 1


@pytest.mark.parametrize(
    "regime, beta, code, message",
    [
        ("regime1", {"kind": "inverse_square"}, 3, "1−β not summable"),
        ("regime2", {"kind": "inverse_square"}, 0, None),
        ("regime3", {"kind": "inverse_square"}, 3, "liminf β(1−β) = 0"),
    ],
)
def test_validate(write, capsys, regime, beta, code, message):
    assert main(["validate", write(experiment(regime=regime, beta=beta))]) == code
    report = json.loads(capsys.readouterr().out)
    if message:
        assert message in report["violations"]
    else:
        assert report["valid"]


def test_validate_needs_regime(write):
    assert main(["validate", write(experiment(regime=None))]) == 1


def test_validate_halpern_defaults_regime(write):
    cfg = experiment(mode="halpern", regime=None, S=None, beta=None, targets=None)
    assert main(["validate", write(cfg)]) == 0


def test_oracle_separable(capsys):
    sets = json.dumps([{"kind": "halfspace", "a": [1, 0], "b": 1}, {"kind": "halfspace", "a": [0, 1], "b": 1}])
    assert main(["oracle", "--sets", sets, "--u", "3,3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["point"] == pytest.approx([1, 1], abs=1e-9)
    assert set(out) >= {"point", "iterations_used", "certificate_gap"}


def test_oracle_ball_inside(capsys):
    sets = json.dumps({"kind": "ball", "center": [0, 0], "radius": 1})
    assert main(["oracle", "--sets", sets, "--u", "0.25,-0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["point"] == [0.25, -0.5]


def test_oracle_ball_halfspace_from_file(tmp_path, capsys):
    path = tmp_path / "sets.json"
    path.write_text(json.dumps([{"kind": "ball", "center": [0, 0], "radius": 1}, {"kind": "halfspace", "a": [1, 0], "b": 0}]))
    assert main(["oracle", "--sets", str(path), "--u", "1,1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["point"] == pytest.approx([0, 1], abs=1e-9)
    assert out["certificate_gap"] <= 1e-6 * 3


def test_oracle_unconverged(capsys):
    sets = json.dumps([{"kind": "ball", "center": [0, 0], "radius": 1}, {"kind": "ball", "center": [1.5, 0], "radius": 1}])
    assert main(["oracle", "--sets", sets, "--u", "0.75,3", "--max-iter", "2", "--tol", "1e-15"]) == 2


@pytest.mark.parametrize(
    "sets",
    ['[{"kind": "ball", "center": [0, 0], "radius": 0}]', '{"kind": "cone"}', "not json"],
)
def test_oracle_invalid_sets(sets):
    assert main(["oracle", "--sets", sets, "--u", "1,1"]) == 1


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_module_entry_point(write):
    proc = subprocess.run([sys.executable, "-m", "halpern_lab", "run", write(experiment(max_iter=1))], capture_output=True)
    assert proc.returncode == 2
