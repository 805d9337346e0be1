import json
import subprocess
import sys
import time

import pytest

from invsizer.cli import RunConfig, main


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path / "runs"


@pytest.fixture(scope="module")
def csva_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["gen-data", "--circuit", "csva", "--seed", "1", "--out", str(d)]) == 0
    return d / "csva_seed1.csv"


def test_gen_data_writes_csv_sidecar_and_log(csva_csv):
    lines = csva_csv.read_text().splitlines()
    assert len(lines[0].split(",")) == 7
    assert 1 < len(lines) <= 10192 + 1
    assert (csva_csv.parent / "csva_seed1.schema.json").exists()
    log = (csva_csv.parent / "csva_seed1.log").read_text()
    assert "grid points 10192" in log and "dropped non-physical rows" in log and "seed 1" in log


def test_gen_data_is_byte_identical_on_rerun(csva_csv, tmp_path):
    assert main(["gen-data", "--circuit", "CSVA", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "csva_seed1.csv").read_bytes() == csva_csv.read_bytes()


def test_unknown_circuit_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen-data", "--circuit", "opamp"])
    assert exc.value.code != 0
    assert "opamp" in capsys.readouterr().err


def test_train_knn_is_fast_and_deterministic(csva_csv, tmp_path):
    t = time.perf_counter()
    assert main(["train", "--data", str(csva_csv), "--model", "knn", "--out", str(tmp_path / "a")]) == 0
    assert time.perf_counter() - t < 1.0
    assert main(["train", "--data", str(csva_csv), "--model", "knn", "--out", str(tmp_path / "b")]) == 0
    a, b = tmp_path / "a" / "csva_knn_seed0.ckpt", tmp_path / "b" / "csva_knn_seed0.ckpt"
    assert a.read_bytes() == b.read_bytes()
    assert "train rows" in (tmp_path / "a" / "csva_knn_seed0_train.log").read_text()


def test_neural_training_logs_every_epoch(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"hyperparameters": {"hidden": [8]}}))
    assert main(["train", "--config", str(cfg), "--circuit", "cva", "--subsample", "0.1",
                 "--model", "mlp", "--epochs", "3", "--out", str(tmp_path)]) == 0
    log = (tmp_path / "cva_mlp_seed0_train.log").read_text()
    assert [line.split()[1] for line in log.splitlines() if line.startswith("epoch")] == ["1", "2", "3"]


def test_missing_dataset_is_an_error(tmp_path, capsys):
    assert main(["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1
    assert "does not exist" in capsys.readouterr().err


def test_memorising_checkpoint_scores_zero_on_training_rows(csva_csv, tmp_path):
    cfg = tmp_path / "k1.json"
    cfg.write_text(json.dumps({"model": "knn", "hyperparameters": {"k": 1}}))
    assert main(["train", "--config", str(cfg), "--data", str(csva_csv), "--out", str(tmp_path)]) == 0
    ckpt = tmp_path / "csva_knn_seed0.ckpt"
    assert main(["evaluate", "--data", str(csva_csv), "--checkpoint", str(ckpt), "--split", "train",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "csva_knn_seed0_report.json").read_text())
    # zero up to the last-bit round-off of denormalise(normalise(y))
    assert report["summary"]["mean"] < 1e-12 and report["summary"]["pct_below_2"] == 100.0
    assert set(report) == {"config", "summary", "counts", "histograms"}


def test_checkpoint_for_another_circuit_is_rejected(csva_csv, tmp_path):
    assert main(["train", "--circuit", "cva", "--subsample", "0.1", "--model", "knn",
                 "--out", str(tmp_path)]) == 0
    assert main(["evaluate", "--data", str(csva_csv), "--checkpoint",
                 str(tmp_path / "cva_knn_seed0.ckpt"), "--out", str(tmp_path)]) == 1


def test_multi_seed_report_structure(tmp_path):
    assert main(["evaluate", "--circuit", "cva", "--subsample", "0.2", "--model", "knn", "--seeds", "3",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "cva_knn_seed0_seeds3_report.json").read_text())
    assert [b["seed"] for b in report["per_seed"]] == [0, 1, 2]
    for block in report["per_seed"]:
        assert set(block) == {"seed", "summary", "counts", "histograms"}
    means = [b["summary"]["mean"] for b in report["per_seed"]]
    assert report["aggregate"]["mean"] == pytest.approx(sum(means) / 3, rel=1e-12)
    assert report["summary"] == report["aggregate"]


def test_report_is_byte_identical_on_rerun(tmp_path):
    args = ["evaluate", "--circuit", "cva", "--subsample", "0.2", "--model", "rf"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    name = "cva_rf_seed0_report.json"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_scaling_defaults_and_identity(tmp_path):
    assert main(["scaling", "--circuit", "cva", "--subsample", "0.3", "--model", "knn",
                 "--out", str(tmp_path)]) == 0
    trend = json.loads((tmp_path / "cva_knn_seed0_scaling_trend.json").read_text())["trend"]
    assert [t["fraction"] for t in trend] == [0.1, 0.25, 0.5, 1.0]
    assert (tmp_path / "cva_knn_seed0_scaling_trend.txt").exists()
    full = json.loads((tmp_path / "cva_knn_seed0_scaling_1.json").read_text())
    assert main(["evaluate", "--circuit", "cva", "--subsample", "0.3", "--model", "knn",
                 "--out", str(tmp_path)]) == 0
    plain = json.loads((tmp_path / "cva_knn_seed0_report.json").read_text())
    assert full["summary"] == plain["summary"]


def test_bad_fractions_are_rejected(capsys):
    assert main(["scaling", "--circuit", "cva", "--fractions", "0.5,0.1"]) == 1
    assert "ascending" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["scaling", "--circuit", "cva", "--fractions", "half"])


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("INVSIZER_OUT", str(tmp_path / "env"))
    assert main(["gen-data", "--circuit", "mixer", "--subsample", "0.05"]) == 0
    assert (tmp_path / "env" / "mixer_seed0.csv").exists()


def test_default_output_directory(out):
    assert main(["gen-data", "--circuit", "mixer", "--subsample", "0.05"]) == 0
    assert (out / "mixer_seed0.csv").exists()


def test_config_file_round_trip_and_flag_override(tmp_path, capsys):
    cfg = RunConfig(circuit="CVA", model="rf", seed=3, subsample=0.1)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert (cfg.epochs, cfg.batch_size, cfg.train_fraction) == (100, 64, 0.9)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert main(["gen-data", "--config", str(path), "--seed", "4", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "cva_seed4.csv").exists()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "invsizer.cli", "gen-data", "--circuit", "csva",
                           "--subsample", "0.01", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "invsizer.cli", "train"], capture_output=True, text=True)
    assert proc.returncode == 1 and "error" in proc.stderr
