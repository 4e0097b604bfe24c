import csv
import json

from intersection_game.cli import main


def test_unknown_verb_is_usage_error(capsys):
    assert main(["fly"]) == 2
    assert "usage" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_missing_config_no_output(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--config", str(tmp_path / "missing.yaml"), "--out", str(out)])
    assert code != 0
    assert not out.exists()
    assert "missing.yaml" in capsys.readouterr().err


def test_malformed_config_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("seed: 1\nparams:\n  T: 0.5\n  whatever: 1\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert f"{cfg}:4:" in capsys.readouterr().err


def test_run_writes_outputs(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario:\n  agents:\n"
                   "    - {id: A, arm: S, speed: 11.11, d0: 60, sigma: 0.6}\n"
                   "    - {id: B, arm: E, speed: 11.11, d0: 60, sigma: 0.5}\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["result"]["success"] is True
    assert summary["config"]["scenario"]["agents"][0]["id"] == "A"
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["agent"] for r in rows} == {"A", "B"}
    assert (out / "decisions.csv").read_text().startswith("t,host,opponent")


def test_table1_fourteen_rows(tmp_path):
    assert main(["table1", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "table1.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 14
    assert list(rows[0]) == ["setup", "d0", "v0_kmh", "T_f", "delta_d", "success", "ref_T_f",
                             "ref_delta_d"]


def test_four_av_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["four-av", "--mu", "0", "--count", "12", "--seed", "7"]
    assert main(args + ["--out", str(a)]) in (0, 1)
    assert main(args + ["--out", str(b), "--jobs", "2"]) in (0, 1)
    assert (a / "four_av_summary.json").read_bytes() == (b / "four_av_summary.json").read_bytes()
    assert (a / "table2.csv").read_bytes() == (b / "table2.csv").read_bytes()


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("INTERSECTION_GAME_OUT", str(tmp_path / "env"))
    monkeypatch.setenv("INTERSECTION_GAME_JOBS", "1")
    assert main(["four-av", "--mu", "0", "--count", "3"]) in (0, 1)
    assert (tmp_path / "env" / "four_av_summary.json").exists()


def test_seed_changes_output(tmp_path):
    for s in ("1", "2"):
        main(["four-av", "--mu", "4", "--count", "5", "--seed", s, "--out", str(tmp_path / s)])
    assert (tmp_path / "1" / "four_av.csv").read_text() != (tmp_path / "2" / "four_av.csv").read_text()


def test_validate_passes(tmp_path):
    assert main(["validate", "--out", str(tmp_path)]) == 0
    checks = json.loads((tmp_path / "validate.json").read_text())
    assert [c["passed"] for c in checks] == [True, True, True]
