import csv
import json

import numpy as np
import pytest

from qfnn import cli
from qfnn import network as qnet


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_no_arguments_is_usage_error(capsys):
    assert cli.main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_one():
    with pytest.raises(SystemExit) as info:
        cli.main(["landscape", "--bogus"])
    assert info.value.code == 1


def test_bad_type_exits_one():
    with pytest.raises(SystemExit) as info:
        cli.main(["train-teleport", "--eta", "fast"])
    assert info.value.code == 1


def test_momentum_out_of_range_rejected(tmp_path, capsys):
    code, out = run(["train-teleport", "--momentum", "1.5"], tmp_path)
    assert code == 1
    assert "momentum" in capsys.readouterr().err
    assert not (out / "trace.csv").exists()


def test_precedence_flag_over_file_over_default(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eta": 0.1, "momentum": 0.5, "max_iterations": 3}))
    code, out = run(["train-teleport", "--config", str(cfg), "--eta", "0.05", "--eval-states", "5"], tmp_path)
    assert code == 0
    echo = json.loads((out / "summary.json").read_text())["config"]
    assert echo["eta"] == 0.05
    assert echo["momentum"] == 0.5
    assert echo["epsilon"] == cli.DEFAULTS["epsilon"]


def test_config_file_rejects_unknown_and_mistyped_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"learning_rate": 0.1}))
    assert run(["landscape", "--config", str(cfg)], tmp_path)[0] == 1
    cfg.write_text(json.dumps({"grid_theta": "many"}))
    assert run(["landscape", "--config", str(cfg)], tmp_path)[0] == 1
    cfg.write_text("[1, 2]")
    assert run(["landscape", "--config", str(cfg)], tmp_path)[0] == 1
    assert run(["landscape", "--config", str(tmp_path / "missing.json")], tmp_path)[0] == 1


def test_integer_accepted_for_float_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"start_theta": 2, "path_steps": 3}))
    code, out = run(["landscape", "--config", str(cfg), "--grid", "3x3"], tmp_path)
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["config"]["start_theta"] == 2.0


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "envdir"))
    assert cli.main(["classical-check", "--random-sets", "3"]) == 0
    assert (tmp_path / "envdir" / "summary.json").exists()


def test_verify_oracle(tmp_path):
    code, out = run(["verify-oracle"], tmp_path)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["haar_cost"]["count"] == 1000
    assert summary["haar_cost"]["max"] <= 1e-9
    assert summary["status"] == "ok"
    assert set(summary["wire_labels"]) == {"q0", "q1", "q2"}
    net = qnet.loads((out / "network.json").read_text())
    assert qnet.count_params(net) == 64


def test_landscape_artifacts(tmp_path):
    code, out = run(["landscape", "--grid", "5x7", "--path-steps", "20"], tmp_path)
    assert code == 0
    grid = read_csv(out / "landscape_grid.csv")
    assert grid[0] == ["theta", "phi", "cost"]
    assert len(grid) == 1 + 35
    path = read_csv(out / "landscape_path.csv")
    assert path[0] == ["step", "theta", "phi", "cost"]
    assert path[1][:3] == ["0", "2.5", "2.5"]
    assert len(path) <= 1 + 21


def test_bad_grid_spec():
    with pytest.raises(SystemExit) as info:
        cli.main(["landscape", "--grid", "10by10"])
    assert info.value.code == 1


def test_train_teleport_artifacts(tmp_path):
    code, out = run(["train-teleport", "--max-iterations", "5", "--eval-states", "4"], tmp_path)
    assert code == 0
    rows = read_csv(out / "trace.csv")
    assert rows[0] == ["iteration", "cost"]
    assert [int(r[0]) for r in rows[1:]] == list(range(5))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["iterations"] == 5 and summary["seed"] == 0
    assert summary["haar_cost"]["count"] == 4
    assert summary["converged"] is False


def test_train_autoencoder_artifacts(tmp_path):
    args = ["train-autoencoder", "--inputs", "00,01", "--max-iterations", "4", "--diagonality-penalty"]
    code, out = run(args, tmp_path)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["input_cost"]) == {"00", "01"}
    assert set(summary["bottleneck"]["00"]) == {"sigma1", "sigma2", "sigma3"}
    assert summary["wire_labels"]["q4"].startswith("output 6")
    net = qnet.loads((out / "network.json").read_text())
    assert qnet.count_params(net) == 80


def test_train_autoencoder_bad_state(tmp_path):
    assert run(["train-autoencoder", "--inputs", "00,2x"], tmp_path)[0] == 1


@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
def test_divergence_exit_code_and_partial_trace(tmp_path):
    code, out = run(["train-teleport", "--eta", "inf", "--max-iterations", "10"], tmp_path)
    assert code == 2
    rows = read_csv(out / "trace.csv")
    assert 1 < len(rows) <= 11
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "diverged"


def test_classical_check_summary(tmp_path):
    code, out = run(["classical-check", "--random-sets", "10", "--seed", "4"], tmp_path)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rows_checked"] == 4 * 12
    assert summary["mismatches"] == []


@pytest.mark.parametrize(
    "args",
    [
        ["train-teleport", "--seed", "7", "--max-iterations", "15", "--eval-states", "10"],
        ["landscape", "--grid", "6x6", "--path-steps", "30"],
        ["train-autoencoder", "--seed", "3", "--max-iterations", "5", "--threads", "2"],
    ],
)
def test_reruns_are_byte_identical(tmp_path, args):
    _, a = run(args, tmp_path, "a")
    _, b = run(args, tmp_path, "b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threads_do_not_change_artifacts(tmp_path):
    base = ["train-teleport", "--seed", "1", "--max-iterations", "8", "--eval-states", "5"]
    _, a = run(base + ["--threads", "1"], tmp_path, "a")
    _, b = run(base + ["--threads", "3"], tmp_path, "b")
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    assert np.array_equal(
        qnet.flatten_params(qnet.loads((a / "network.json").read_text())),
        qnet.flatten_params(qnet.loads((b / "network.json").read_text())),
    )
