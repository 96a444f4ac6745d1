from __future__ import annotations

import json

import pytest

from stockflow.commerce import CustomerClass
from stockflow.scenario_io import (
    ADJUSTABLE_RANGES,
    RANGE_VIOLATION,
    UNKNOWN_FIELD,
    ScenarioError,
    adjustable_ranges,
    default_document,
    default_scenario,
    load_scenario,
    load_scenario_file,
    parse_scenario_document,
    scenario_to_document,
)


def test_shipped_defaults_carry_published_settings():
    scenario = default_scenario()
    assert scenario.total_intensity == 1.1
    assert scenario.control1_pct == 24.000
    assert scenario.control2_pct == 80.263
    tightwad = scenario.behaviors[CustomerClass.TIGHTWAD]
    assert tightwad.session_intensity == 5.5
    assert tightwad.add_to_cart_rate == 5.0
    assert tightwad.buy_rate_mu == 0.25
    assert scenario.sim.horizon == 720.0
    assert scenario.sim.dt == 1.0


def test_empty_document_equals_shipped_defaults():
    assert parse_scenario_document({}) == default_scenario()


def test_partial_document_merges_over_defaults():
    scenario = parse_scenario_document(
        {"scenario": {"behaviors": {"spendthrift": {"add_to_cart_rate": 60.0}}}})
    assert scenario.behaviors[CustomerClass.SPENDTHRIFT].add_to_cart_rate == 60.0
    assert scenario.behaviors[CustomerClass.TIGHTWAD] == default_scenario().behaviors[CustomerClass.TIGHTWAD]
    assert scenario.total_intensity == 1.1


def test_unknown_fields_are_rejected_with_their_path():
    with pytest.raises(ScenarioError) as err:
        parse_scenario_document({"scenario": {"typo_field": 1.0}})
    assert err.value.code == UNKNOWN_FIELD
    assert err.value.field == "scenario.typo_field"

    with pytest.raises(ScenarioError):
        parse_scenario_document({"scenario": {"behaviors": {"tightwad": {"mystery": 1}}}})
    with pytest.raises(ScenarioError):
        parse_scenario_document({"extra_top": {}})


def test_range_violation_names_the_allowed_range():
    document = {"scenario": {"behaviors": {"spendthrift": {"add_to_cart_rate": 80.0}}}}
    with pytest.raises(ScenarioError) as err:
        parse_scenario_document(document)
    assert err.value.code == RANGE_VIOLATION
    assert "30.0" in str(err.value) and "70.0" in str(err.value)
    assert err.value.field.endswith("spendthrift.add_to_cart_rate")


def test_every_adjustable_bound_is_enforced():
    for path, bounds in ADJUSTABLE_RANGES.items():
        keys = path.split(".")[1:]
        for bad in (bounds.lo - bounds.step - 1e-6, bounds.hi + bounds.step + 1e-6):
            node: dict = {}
            leaf = node
            for key in keys[:-1]:
                leaf = leaf.setdefault(key, {})
            leaf[keys[-1]] = bad
            with pytest.raises(ScenarioError):
                parse_scenario_document({"scenario": node})


def test_sim_and_catalog_validation_surface_as_scenario_errors():
    with pytest.raises(ScenarioError):
        parse_scenario_document({"scenario": {"sim": {"dt": 0.0}}})
    with pytest.raises(ScenarioError):
        parse_scenario_document({"scenario": {"catalog": {"items": [
            {"buy_probability": 0.4, "price": 1.0}]}}})
    with pytest.raises(ScenarioError):
        parse_scenario_document({"schema_version": 99})


def test_round_trip_preserves_every_field():
    scenario = default_scenario()
    document = scenario_to_document(scenario)
    assert parse_scenario_document(document) == scenario
    # and the serialized form is stable too
    assert scenario_to_document(parse_scenario_document(document)) == document


def test_round_trip_keeps_reference_bands(tmp_path):
    bands = {"buy_to_visit": {"spendthrift": [14.0, 14.5]}}
    document = scenario_to_document(default_scenario(), reference_bands=bands)
    path = tmp_path / "with_bands.scenario.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    scenario, loaded_bands = load_scenario_file(path)
    assert scenario == default_scenario()
    assert loaded_bands == bands


def test_load_scenario_reports_json_position_on_parse_error(tmp_path):
    path = tmp_path / "broken.scenario.json"
    path.write_text('{"scenario": \n  oops}', encoding="utf-8")
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert err.value.code == "PARSE_ERROR"
    assert ":2:" in err.value.field


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.scenario.json")


def test_reference_bands_validation():
    with pytest.raises(ScenarioError):
        parse_scenario_document({"reference_bands": {"unknown_metric": {}}})
    with pytest.raises(ScenarioError):
        parse_scenario_document({"reference_bands": {"buy_to_visit": {"tightwad": [2.0, 1.0]}}})
    with pytest.raises(ScenarioError):
        parse_scenario_document({"reference_bands": {"buy_to_visit": {"tightwad": [1.0]}}})


def test_adjustable_ranges_expose_slider_metadata():
    ranges = adjustable_ranges()
    assert len(ranges) == 9
    lam = ranges["scenario.total_intensity"]
    assert (lam["min"], lam["max"], lam["step"], lam["default"]) == (0.0, 50.0, 0.1, 1.1)
    control1 = ranges["scenario.control1_pct"]
    assert control1["step"] == 0.001
    assert control1["default"] == 24.0
    spendthrift = ranges["scenario.behaviors.spendthrift.add_to_cart_rate"]
    assert (spendthrift["min"], spendthrift["max"]) == (30.0, 70.0)


def test_default_document_returns_fresh_copies():
    first = default_document()
    first["scenario"]["total_intensity"] = 99.0
    assert default_document()["scenario"]["total_intensity"] == 1.1
