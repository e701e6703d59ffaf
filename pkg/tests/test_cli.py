import json

import pytest

from slicesim.cli import EXIT_CONFIG, EXIT_OK, main, parse_seeds


def run_cli(args):
    return main(args)


def test_help_exits_zero(capsys):
    assert run_cli(["--help"]) == EXIT_OK
    out = capsys.readouterr().out
    for sub in ("train", "evaluate", "compare", "sweep", "synth-gain"):
        assert sub in out


def test_subcommand_help_exits_zero(capsys):
    for sub in ("train", "evaluate", "compare", "sweep"):
        assert run_cli([sub, "--help"]) == EXIT_OK


def test_unknown_subcommand_config_exit():
    assert run_cli(["frobnicate"]) == EXIT_CONFIG


def test_bad_override_config_exit(capsys):
    code = run_cli(["--set", "num_prbs=0", "synth-gain"])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_synth_gain_prints_negative_margin(capsys):
    assert run_cli(["synth-gain"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["max_block_eigenvalue"] < 0
    assert payload["gamma"] == pytest.approx(1.45)


def test_train_writes_outputs(tmp_path):
    out = tmp_path / "run"
    code = run_cli(["--out-dir", str(out), "--seed", "3",
                    "--set", "episodes=2", "--set", "steps_per_episode=10",
                    "train"])
    assert code == EXIT_OK
    assert (out / "checkpoint.json").exists()
    assert (out / "learning_curve.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "train"
    assert manifest["runtime_s"] is not None
    assert manifest["seed"] == 3


def test_train_determinism_byte_identical(tmp_path):
    args = ["--seed", "7", "--set", "episodes=3",
            "--set", "steps_per_episode=10", "train"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["--out-dir", str(a)] + args) == EXIT_OK
    assert run_cli(["--out-dir", str(b)] + args) == EXIT_OK
    assert (a / "checkpoint.json").read_bytes() == (b / "checkpoint.json").read_bytes()
    assert (a / "learning_curve.csv").read_bytes() == (b / "learning_curve.csv").read_bytes()


def test_evaluate_pf_writes_trace(tmp_path):
    out = tmp_path / "eval"
    code = run_cli(["--out-dir", str(out), "--policy", "pf", "--seed", "5",
                    "evaluate", "--steps", "40"])
    assert code == EXIT_OK
    for name in ("rates_cdf.csv", "queue_trace.csv", "tracking.csv",
                 "violations.csv", "summary.json"):
        assert (out / name).exists(), name
    header = (out / "queue_trace.csv").read_text().splitlines()[0]
    assert header.startswith("slot,F,G")


def test_evaluate_determinism_byte_identical(tmp_path):
    args = ["--policy", "pf", "--seed", "5", "evaluate", "--steps", "30"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["--out-dir", str(a)] + args) == EXIT_OK
    assert run_cli(["--out-dir", str(b)] + args) == EXIT_OK
    for name in ("rates_cdf.csv", "queue_trace.csv", "tracking.csv",
                 "violations.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_evaluate_drl_needs_checkpoint(capsys):
    assert run_cli(["--policy", "drl", "evaluate"]) == EXIT_CONFIG


def test_evaluate_with_checkpoint_roundtrip(tmp_path):
    train_out = tmp_path / "t"
    assert run_cli(["--out-dir", str(train_out), "--seed", "2",
                    "--set", "episodes=2", "--set", "steps_per_episode=8",
                    "train"]) == EXIT_OK
    eval_out = tmp_path / "e"
    code = run_cli(["--out-dir", str(eval_out), "--policy", "drl", "--seed", "2",
                    "evaluate", "--steps", "20",
                    "--checkpoint", str(train_out / "checkpoint.json")])
    assert code == EXIT_OK
    assert (eval_out / "summary.json").exists()


def test_sweep_csv_row_per_value(tmp_path):
    out = tmp_path / "sweep"
    code = run_cli(["--out-dir", str(out), "sweep", "--kind", "rayleigh-scale",
                    "--values", "0.5,1.0,2.0", "--reps", "2", "--steps", "30"])
    assert code == EXIT_OK
    lines = (out / "sweep_rayleigh-scale.csv").read_text().splitlines()
    assert len(lines) == 4  # header + one row per value
    assert lines[0].startswith("kind,value,reps,policy")


def test_compare_writes_report(tmp_path):
    train_out = tmp_path / "t"
    assert run_cli(["--out-dir", str(train_out), "--seed", "2",
                    "--set", "episodes=2", "--set", "steps_per_episode=8",
                    "train"]) == EXIT_OK
    out = tmp_path / "c"
    code = run_cli(["--out-dir", str(out), "compare",
                    "--checkpoint", str(train_out / "checkpoint.json"),
                    "--seeds", "100:102", "--steps", "20"])
    assert code == EXIT_OK
    report = json.loads((out / "comparison.json").read_text())
    assert len(report["per_seed"]) == 3
    assert (out / "violations_compare.csv").exists()


def test_env_var_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SLICESIM_NUM_PRBS", "0")
    assert run_cli(["synth-gain"]) == EXIT_CONFIG


def test_parse_seeds_forms():
    assert parse_seeds("3:5") == [3, 4, 5]
    assert parse_seeds("1,9,4") == [1, 9, 4]


def test_manifest_records_invocation(tmp_path):
    out = tmp_path / "ev"
    assert run_cli(["--out-dir", str(out), "--policy", "pf", "--seed", "6",
                    "evaluate", "--steps", "25"]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["invocation"]["steps"] == 25
    assert manifest["invocation"]["policy"] == "pf"
