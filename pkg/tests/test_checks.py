import csv
import json

import pytest

from lrcone import cli
from lrcone.checks import VerificationContext, VerificationPipeline, SeriesStep
from lrcone.config import parse_config
from lrcone.lightcone import default_epsilon
from lrcone.verify_pipe import verify_all


def _config(payload, **blocks):
    return parse_config(json.dumps({**payload, **blocks}))


def test_tiny_campaign_passes(tiny_run, tmp_path):
    report, code = verify_all(_config(tiny_run), workers=2, out_dir=str(tmp_path), progress=False)
    assert code == 0, report.failed_checks
    assert report.summary["failed"] == 0
    assert report.summary["checks"] == len(report.rows) > 0

    with open(tmp_path / "report.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0]) == ["check", "point", "measured", "bound", "margin", "pass"]
    checks = {row["check"] for row in rows}
    for name in ("growth_certificate", "assumption_a_oracle", "unitarity", "group_law", "conjugation_identity",
                 "finite_range_bound", "lemma31", "lemma_B1", "theorem_bound_domination",
                 "theorem_term1_domination", "series_a_n_bound", "series_a_n_vanishing", "series_worked_example",
                 "exponent_identity", "r_max_fit", "asymptotic_decay_rate", "determinism"):
        assert name in checks
    assert all(row["pass"] == "true" for row in rows)

    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["failed_checks"] == []
    assert (tmp_path / "violations.log").read_text() == ""


def test_zero_C2_is_caught(tiny_run, tmp_path, capsys):
    config = _config(tiny_run, bound={"C2_override": 0.0})
    report, code = verify_all(config, workers=2, out_dir=str(tmp_path), progress=False)
    assert code == 1
    assert "theorem_bound_domination" in report.failed_checks
    assert "theorem_bound_domination" in (tmp_path / "violations.log").read_text()
    out = capsys.readouterr().out
    worst = next(row for row in report.worst_failures() if row.check == "theorem_bound_domination")
    assert worst.margin < 0
    assert f"theorem_bound_domination at {worst.point}: measured=" in out
    assert f"margin={worst.margin:.6g}" in out
    assert all(row.margin >= worst.margin for row in report.rows if row.check == worst.check)


def test_series_step_alone(tiny_run):
    context = VerificationContext(_config(tiny_run))
    SeriesStep().process(context)
    worked = [row for row in context.rows if row.check == "series_worked_example"]
    assert len(worked) == 3
    assert all(row.passed for row in context.rows)


def test_default_pipeline_order():
    names = [step.name for step in VerificationPipeline.get_default_pipeline().steps]
    assert names[0] == "geometry"
    assert names[-1] == "determinism"
    assert len(names) == len(set(names))


def test_cli_malformed_config_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"lattice": ', encoding="utf-8")
    assert cli.main(["verify", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "❌ ERROR" in capsys.readouterr().out


def test_cli_invalid_config_exits_2(tmp_path, tiny_run):
    path = tmp_path / "invalid.json"
    path.write_text(json.dumps({**tiny_run, "unexpected": 1}), encoding="utf-8")
    assert cli.main(["bound", "--config", str(path)]) == 2


def test_cli_missing_config_and_bad_usage(tmp_path):
    assert cli.main(["model", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["teleport"]) == 2
    assert cli.main(["model", "--workers", "0"]) == 2


@pytest.fixture
def config_file(tmp_path, tiny_run):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(tiny_run), encoding="utf-8")
    return path


def test_cli_model(config_file, tmp_path, capsys):
    out = tmp_path / "model"
    assert cli.main(["model", "--config", str(config_file), "--out", str(out)]) == 0
    assert (out / "assumption_a.csv").exists()
    assert "C0 =" in capsys.readouterr().out


def test_cli_bound_with_mode_override(config_file, tmp_path):
    out = tmp_path / "bound"
    assert cli.main(["bound", "--config", str(config_file), "--out", str(out), "--mode", "both", "--refined"]) == 0
    with open(out / "bounds.csv", newline="", encoding="utf-8") as handle:
        modes = {row["mode"] for row in csv.DictReader(handle)}
    assert modes == {"numeric_tight", "paper_form"}


def test_cli_simulate(config_file, tmp_path):
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--config", str(config_file), "--out", str(out), "--workers", "2",
                     "--no-progress"]) == 0
    assert (out / "sweep.csv").exists()


def test_cli_lightcone(config_file, tmp_path):
    out = tmp_path / "cone"
    assert cli.main(["lightcone", "--config", str(config_file), "--out", str(out), "--no-progress"]) == 0
    for name in ("curve.csv", "asymptotic.csv", "front.csv", "fit.json"):
        assert (out / name).exists()
    fit = json.loads((out / "fit.json").read_text())
    assert fit["expected_exponent"] == pytest.approx(3.0)


def test_cli_lightcone_epsilon_uses_the_norm_of_B(tmp_path, tiny_run):
    payload = {**tiny_run, "observables": {
        "A": {"kind": "x", "site": 0},
        "B": {"kind": "explicit", "support": [3], "matrix": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-2.0, 0.0]]]},
    }}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    out = tmp_path / "cone"
    assert cli.main(["lightcone", "--config", str(path), "--out", str(out), "--no-progress"]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["epsilon"] == pytest.approx(default_epsilon(1.0, 2.0))
