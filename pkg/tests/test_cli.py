import json

from pdbrw.cli import (EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK,
                       EXIT_WORK_LIMIT, main)


def test_cli_runs_census_check(tmp_path, capsys):
    code = main(["--seed", "5", "--replicates", "500",
                 "--out", str(tmp_path), "census-check"])
    assert code == EXIT_OK
    assert (tmp_path / "records.jsonl").exists()
    assert (tmp_path / "manifest.json").exists()
    out = capsys.readouterr().out
    assert "[PASS]" in out


def test_cli_model_flag(tmp_path):
    code = main(["--seed", "5", "--replicates", "300", "--model", "pwit",
                 "--out", str(tmp_path), "census-check"])
    assert code == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["spec"]["model"] == "pwit"


def test_cli_requires_a_command(capsys):
    assert main(["--seed", "1"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_missing_config_file(capsys):
    assert main(["--config", "/nonexistent.json", "census-check"]) == \
        EXIT_CONFIG


def test_cli_invalid_config_json(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["--config", str(cfg), "census-check"]) == EXIT_CONFIG


def test_cli_schema_violation(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"kind": "census-check", "master_seed": 1,
                               "replicates": 0}))
    assert main(["--config", str(cfg)]) == EXIT_CONFIG
    assert "replicates" in capsys.readouterr().err


def test_cli_config_file_drives_run(tmp_path):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({
        "kind": "walk-check", "master_seed": 9, "replicates": 300,
        "model": "pwit", "params": {"n_values": [3], "k_max": 2}}))
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["spec"]["master_seed"] == 9


def test_cli_work_limit_exit_code(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({
        "kind": "median-sweep", "master_seed": 1, "model": "pwit",
        "replicates": 50, "work_limit": 10,
        "params": {"n_values": [10, 12, 14]}}))
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == \
        EXIT_WORK_LIMIT
    assert "work limit" in capsys.readouterr().err


def test_cli_assert_mode_flags_failed_checks(tmp_path, capsys):
    # tiny replicate count: the sweep's slope interval cannot exclude zero
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({
        "kind": "median-sweep", "master_seed": 1, "model": "pwit",
        "replicates": 25, "params": {"n_values": [12, 14, 16]}}))
    args = ["--config", str(cfg), "--out", str(tmp_path / "o")]
    assert main(args) == EXIT_OK  # without --assert, failures only print
    assert main(args + ["--assert"]) == EXIT_CHECK_FAILED
    assert "[FAIL]" in capsys.readouterr().out


def test_cli_seed_changes_output(tmp_path):
    for seed, sub in (("5", "a"), ("6", "b")):
        main(["--seed", seed, "--replicates", "200", "--model", "pwit",
              "--out", str(tmp_path / sub), "census-check"])
    a = (tmp_path / "a" / "records.jsonl").read_bytes()
    b = (tmp_path / "b" / "records.jsonl").read_bytes()
    assert a != b
