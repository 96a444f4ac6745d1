from __future__ import annotations

import json
from pathlib import Path

import pytest

from stockflow.cli import main
from stockflow.scenario_io import default_document


@pytest.fixture()
def default_path(tmp_path) -> Path:
    path = tmp_path / "default.scenario.json"
    path.write_text(json.dumps(default_document()), encoding="utf-8")
    return path


def write_scenario(tmp_path, document, name="case.scenario.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def short_document(**scenario_overrides) -> dict:
    document = {"scenario": {"sim": {"horizon": 60.0}}}
    document["scenario"].update(scenario_overrides)
    return document


def test_run_writes_series_and_report(default_path, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--scenario", str(default_path), "--seed", "42", "--out", str(out)])
    assert code == 0
    lines = (out / "series.csv").read_text().splitlines()
    assert len(lines) == 722  # header + one row per recorded step
    header = lines[0].split(",")
    assert header[0] == "time"
    assert len(header) == 27
    assert all(len(line.split(",")) == len(header) for line in lines[1:])

    report = json.loads((out / "report.json").read_text())
    assert report["settings"]["seed"] == 42
    assert "spendthrift" in report["groups"]


def test_run_twice_is_byte_identical(default_path, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["run", "--scenario", str(default_path), "--seed", "7", "--out", str(out_a)])
    main(["run", "--scenario", str(default_path), "--seed", "7", "--out", str(out_b)])
    assert (out_a / "series.csv").read_bytes() == (out_b / "series.csv").read_bytes()


def test_run_zero_intensities_reports_zero_revenue(tmp_path):
    document = short_document(
        total_intensity=0.0,
        behaviors={name: {"session_intensity": 0.0}
                   for name in ("tightwad", "average_spender", "spendthrift")},
    )
    path = write_scenario(tmp_path, document)
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(path), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["groups"]["aggregate"]["totals"]["revenue"] == 0.0


def test_run_rejects_invalid_scenario_with_exit_1(tmp_path, capsys):
    path = write_scenario(tmp_path, {"scenario": {"total_intensity": 99.0}})
    code = main(["run", "--scenario", str(path), "--out", str(tmp_path / "out")])
    assert code == 1
    err = capsys.readouterr().err
    assert "total_intensity" in err
    assert not (tmp_path / "out" / "series.csv").exists()


def test_run_maps_nonfinite_state_to_exit_2(default_path, tmp_path, monkeypatch):
    import stockflow.cli as cli
    from stockflow.engine import NonFiniteStateError

    def explode(*args, **kwargs):
        raise NonFiniteStateError(3.0, "tightwad/browsing")

    monkeypatch.setattr(cli, "run_scenario", explode)
    code = main(["run", "--scenario", str(default_path), "--out", str(tmp_path / "out")])
    assert code == 2


def test_seed_precedence_flag_beats_env_beats_file(default_path, tmp_path, monkeypatch):
    out = tmp_path / "env"
    monkeypatch.setenv("STOCKFLOW_SEED", "5")
    main(["run", "--scenario", str(default_path), "--out", str(out)])
    assert json.loads((out / "report.json").read_text())["settings"]["seed"] == 5

    out_flag = tmp_path / "flag"
    main(["run", "--scenario", str(default_path), "--seed", "9", "--out", str(out_flag)])
    assert json.loads((out_flag / "report.json").read_text())["settings"]["seed"] == 9

    monkeypatch.delenv("STOCKFLOW_SEED")
    out_file = tmp_path / "file"
    main(["run", "--scenario", str(default_path), "--out", str(out_file)])
    assert json.loads((out_file / "report.json").read_text())["settings"]["seed"] == 42


def test_replicate_single_seed_collapses_spread(tmp_path):
    path = write_scenario(tmp_path, short_document())
    out = tmp_path / "out"
    code = main(["replicate", "--scenario", str(path), "--seeds", "1",
                 "--base-seed", "3", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_runs"] == 1
    for metrics in summary["metrics"].values():
        for stats in metrics.values():
            assert stats["min"] == stats["mean"] == stats["max"]


def test_replicate_disjoint_seed_ranges_are_independent_but_consistent(tmp_path):
    path = write_scenario(tmp_path, short_document())
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["replicate", "--scenario", str(path), "--seeds", "4", "--base-seed", "0", "--out", str(out_a)])
    main(["replicate", "--scenario", str(path), "--seeds", "4", "--base-seed", "100", "--out", str(out_b)])
    summary_a = json.loads((out_a / "summary.json").read_text())
    summary_b = json.loads((out_b / "summary.json").read_text())
    assert summary_a["metrics"] != summary_b["metrics"]
    mean_a = summary_a["metrics"]["spendthrift"]["buy_to_visit"]["mean"]
    mean_b = summary_b["metrics"]["spendthrift"]["buy_to_visit"]["mean"]
    assert mean_a == pytest.approx(mean_b, rel=0.25)


def test_replicate_checks_reference_bands_from_scenario_file(tmp_path):
    document = short_document()
    document["reference_bands"] = {"buy_to_visit": {"spendthrift": [0.0, 100.0]}}
    path = write_scenario(tmp_path, document)
    out = tmp_path / "out"
    main(["replicate", "--scenario", str(path), "--seeds", "2", "--base-seed", "1", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    check = summary["reference_checks"]["buy_to_visit.spendthrift"]
    assert check["pass"] is True


def test_replicate_rejects_zero_seeds(tmp_path, default_path):
    code = main(["replicate", "--scenario", str(default_path), "--seeds", "0",
                 "--out", str(tmp_path / "out")])
    assert code == 1


def make_report(tmp_path, band) -> Path:
    report = {"groups": {"spendthrift": {"bands": {"buy_to_visit": list(band)}}}}
    path = tmp_path / "report.json"
    path.write_text(json.dumps(report), encoding="utf-8")
    return path


def make_reference(tmp_path, band) -> Path:
    reference = {"buy_to_visit": {"spendthrift": list(band)}}
    path = tmp_path / "reference.json"
    path.write_text(json.dumps(reference), encoding="utf-8")
    return path


def test_check_passes_on_containment(tmp_path, capsys):
    report = make_report(tmp_path, (14.1, 14.4))
    reference = make_reference(tmp_path, (14.0, 14.5))
    assert main(["check", "--report", str(report), "--reference", str(reference),
                 "--tolerance", "0"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_check_fails_outside_widened_band(tmp_path, capsys):
    report = make_report(tmp_path, (20.0, 22.0))
    reference = make_reference(tmp_path, (14.0, 14.5))
    assert main(["check", "--report", str(report), "--reference", str(reference),
                 "--tolerance", "0.30"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_check_identical_bands_pass_at_zero_tolerance(tmp_path):
    report = make_report(tmp_path, (14.0, 14.5))
    reference = make_reference(tmp_path, (14.0, 14.5))
    assert main(["check", "--report", str(report), "--reference", str(reference),
                 "--tolerance", "0"]) == 0


def test_check_accepts_scenario_file_as_reference_source(tmp_path):
    report = make_report(tmp_path, (14.1, 14.4))
    document = {"reference_bands": {"buy_to_visit": {"spendthrift": [14.0, 14.5]}}}
    reference = write_scenario(tmp_path, document, name="ref.scenario.json")
    assert main(["check", "--report", str(report), "--reference", str(reference),
                 "--tolerance", "0"]) == 0


def test_defaults_prints_the_shipped_document(capsys):
    assert main(["defaults"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == default_document()
