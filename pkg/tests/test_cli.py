"""Command-line interface, exercised through main() in a temp directory."""

import json

import pytest

from advreg.cli import main


@pytest.fixture
def config_file(tmp_path):
    cfg = {
        "output_dir": str(tmp_path / "run"),
        "run_label": "cli-test",
        "k": 4, "d": 12, "per_class": 60, "flip_prob": 0.2,
        "split_sizes": {"train": 40, "reference": 40, "adversary_members": 10,
                        "adversary_nonmembers": 40, "eval_nonmembers": 40},
        "hidden_sizes": [16],
        "attacker_epochs": 2,
        "game": {"lam": 0.0, "outer_epochs": 2, "batch_size": 8, "seed": 0},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_gen_data(tmp_path, capsys):
    out = tmp_path / "data.csv"
    assert main(["gen-data", "--out", str(out), "--k", "3", "--d", "6",
                 "--per-class", "10", "--seed", "1"]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == ",".join([f"f{i}" for i in range(6)] + ["label"])
    assert len(lines) == 31


def test_split_with_overrides(tmp_path, config_file):
    out = tmp_path / "split.json"
    assert main(["split", "--config", str(config_file), "--out", str(out),
                 "--reference", "20"]) == 0
    split = json.loads(out.read_text())
    assert len(split["reference"]) == 20
    assert len(split["train"]) == 40


def test_train_attack_evaluate_report(tmp_path, config_file, capsys):
    run_dir = tmp_path / "run"
    assert main(["train", "--config", str(config_file)]) == 0
    assert (run_dir / "classifier.json").exists()
    assert (run_dir / "trace.csv").exists()

    assert main(["attack", "--config", str(config_file)]) == 0
    assert (run_dir / "attack_model.json").exists()
    assert (run_dir / "attack_report.json").exists()

    assert main(["evaluate", "--config", str(config_file)]) == 0
    report = json.loads((run_dir / "report.json").read_text())
    assert report["run_label"] == "cli-test"
    assert (run_dir / "gencdf.csv").exists()

    assert main(["report", str(run_dir)]) == 0
    stdout = capsys.readouterr().out
    assert "attack=" in stdout


def test_train_minmax_writes_game_attacker(tmp_path, config_file):
    assert main(["train", "--config", str(config_file), "--lambda", "1.0",
                 "--epochs", "2"]) == 0
    assert (tmp_path / "run" / "game_attack_model.json").exists()


def test_run_subcommand(tmp_path, config_file):
    assert main(["run", "--config", str(config_file),
                 "--output-dir", str(tmp_path / "full")]) == 0
    report = json.loads((tmp_path / "full" / "report.json").read_text())
    assert 0.0 <= report["attack_accuracy"] <= 1.0


def test_sweep_subcommand(tmp_path, config_file):
    sweep_dir = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_file),
                 "--output-dir", str(sweep_dir),
                 "--param", "lambda", "--values", "0", "1"]) == 0
    summary = json.loads((sweep_dir / "sweep_lambda.json").read_text())
    assert [row["value"] for row in summary["rows"]] == [0.0, 1.0]
    assert (sweep_dir / "lambda_0" / "report.json").exists()
    assert (sweep_dir / "lambda_1" / "report.json").exists()


def test_cli_reports_domain_errors(config_file, capsys):
    assert main(["train", "--config", str(config_file), "--lambda", "-3"]) == 1
    assert "error [train]" in capsys.readouterr().err


def test_cli_seed_override_changes_run(tmp_path, config_file):
    out = tmp_path / "a.json"
    main(["split", "--config", str(config_file), "--out", str(out)])
    out2 = tmp_path / "b.json"
    main(["split", "--config", str(config_file), "--out", str(out2), "--seed", "7"])
    assert json.loads(out.read_text()) != json.loads(out2.read_text())
