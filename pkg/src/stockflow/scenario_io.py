"""Scenario documents: schema, slider ranges, defaults, parsing, round-trip.

A scenario file is JSON with an explicit ``schema_version``, the scenario
fields under ``scenario``, and an optional ``reference_bands`` block used by
the ``check``/``replicate`` commands. Unknown fields are rejected; missing
fields take their values from the shipped default scenario, which carries the
calibrated behavioral rates as data.

The slider bounds live here as metadata (:data:`ADJUSTABLE_RANGES`) so the
CLI, the HTTP service, and any UI built on them enforce identical limits.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .commerce import (
    CLASS_ORDER,
    Catalog,
    ClassBehavior,
    Item,
    Scenario,
)
from .engine import SimConfig
from .metrics import METRIC_NAMES

SCHEMA_VERSION = 1

PARSE_ERROR = "PARSE_ERROR"
RANGE_VIOLATION = "RANGE_VIOLATION"
UNKNOWN_FIELD = "UNKNOWN_FIELD"


class ScenarioError(ValueError):
    """A scenario document problem; ``code`` is one of the module constants."""

    def __init__(self, code: str, field: str, message: str):
        super().__init__(f"{code} at {field}: {message}")
        self.code = code
        self.field = field
        self.detail = message


@dataclass(frozen=True)
class FieldRange:
    lo: float
    hi: float
    step: float

    def check(self, field: str, value: float) -> None:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioError(RANGE_VIOLATION, field, f"expected a number, got {value!r}")
        if not self.lo <= value <= self.hi:
            raise ScenarioError(
                RANGE_VIOLATION, field,
                f"value {value!r} outside allowed range [{self.lo}, {self.hi}]",
            )


#: Slider bounds for every adjustable scenario field. The class-mix controls
#: move in steps of 0.001, intensities in steps of 0.1. The step is metadata
#: for UIs; the loader enforces only the bounds.
ADJUSTABLE_RANGES: dict[str, FieldRange] = {
    "scenario.control1_pct": FieldRange(0.0, 100.0, 0.001),
    "scenario.control2_pct": FieldRange(0.0, 100.0, 0.001),
    "scenario.total_intensity": FieldRange(0.0, 50.0, 0.1),
    "scenario.behaviors.tightwad.session_intensity": FieldRange(0.0, 50.0, 0.1),
    "scenario.behaviors.average_spender.session_intensity": FieldRange(0.0, 50.0, 0.1),
    "scenario.behaviors.spendthrift.session_intensity": FieldRange(0.0, 50.0, 0.1),
    "scenario.behaviors.tightwad.add_to_cart_rate": FieldRange(0.0, 10.0, 0.1),
    "scenario.behaviors.average_spender.add_to_cart_rate": FieldRange(10.0, 30.0, 0.1),
    "scenario.behaviors.spendthrift.add_to_cart_rate": FieldRange(30.0, 70.0, 0.1),
}

#: Non-slider fields still get sanity bounds at load time.
_BASIC_RANGES: dict[str, FieldRange] = {
    "buy_rate_mu": FieldRange(0.0, 100.0, 0.0),
    "buy_rate_sigma": FieldRange(0.0, 100.0, 0.0),
    "browse_exit_rate": FieldRange(0.0, 100.0, 0.0),
    "cart_abandon_split": FieldRange(0.0, 1.0, 0.0),
    "post_action_return_rate": FieldRange(0.0, 100.0, 0.0),
}

_BEHAVIOR_FIELDS = (
    "session_intensity",
    "add_to_cart_rate",
    "buy_rate_mu",
    "buy_rate_sigma",
    "browse_exit_rate",
    "cart_abandon_split",
    "post_action_return_rate",
)
_SIM_FIELDS = ("dt", "horizon", "seed", "record_every")


# ---------------------------------------------------------------------------
# defaults
# ---------------------------------------------------------------------------

def default_document() -> dict:
    """A deep copy of the shipped default scenario document."""
    text = resources.files("stockflow.data").joinpath("default.scenario.json").read_text("utf-8")
    return json.loads(text)


def default_scenario() -> Scenario:
    return parse_scenario_document(default_document())


def adjustable_ranges() -> dict[str, dict[str, float]]:
    """Slider metadata for UIs: per field path, min/max/step and the default."""
    defaults = default_document()
    out = {}
    for path, bounds in ADJUSTABLE_RANGES.items():
        node = defaults
        for key in path.split("."):
            node = node[key]
        out[path] = {"min": bounds.lo, "max": bounds.hi, "step": bounds.step, "default": node}
    return out


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _reject_unknown(mapping: dict, allowed: tuple[str, ...], where: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise ScenarioError(UNKNOWN_FIELD, f"{where}.{key}" if where else key,
                                "field is not part of the scenario schema")


def _merge(defaults: dict, overrides: dict) -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _validate_structure(document: dict) -> None:
    """Reject unknown fields anywhere in a user-supplied document."""
    if not isinstance(document, dict):
        raise ScenarioError(PARSE_ERROR, "", f"expected an object at the top level, got {type(document).__name__}")
    _reject_unknown(document, ("schema_version", "scenario", "reference_bands"), "")

    scenario = document.get("scenario", {})
    if not isinstance(scenario, dict):
        raise ScenarioError(PARSE_ERROR, "scenario", "expected an object")
    _reject_unknown(scenario, ("total_intensity", "control1_pct", "control2_pct",
                               "behaviors", "catalog", "sim"), "scenario")

    behaviors = scenario.get("behaviors", {})
    if not isinstance(behaviors, dict):
        raise ScenarioError(PARSE_ERROR, "scenario.behaviors", "expected an object")
    class_names = tuple(cls.value for cls in CLASS_ORDER)
    _reject_unknown(behaviors, class_names, "scenario.behaviors")
    for name, fields in behaviors.items():
        if not isinstance(fields, dict):
            raise ScenarioError(PARSE_ERROR, f"scenario.behaviors.{name}", "expected an object")
        _reject_unknown(fields, _BEHAVIOR_FIELDS, f"scenario.behaviors.{name}")

    catalog = scenario.get("catalog", {})
    if not isinstance(catalog, dict):
        raise ScenarioError(PARSE_ERROR, "scenario.catalog", "expected an object")
    _reject_unknown(catalog, ("items",), "scenario.catalog")
    for i, item in enumerate(catalog.get("items", [])):
        if not isinstance(item, dict):
            raise ScenarioError(PARSE_ERROR, f"scenario.catalog.items[{i}]", "expected an object")
        _reject_unknown(item, ("buy_probability", "price"), f"scenario.catalog.items[{i}]")

    sim = scenario.get("sim", {})
    if not isinstance(sim, dict):
        raise ScenarioError(PARSE_ERROR, "scenario.sim", "expected an object")
    _reject_unknown(sim, _SIM_FIELDS, "scenario.sim")

    bands = document.get("reference_bands")
    if bands is not None:
        if not isinstance(bands, dict):
            raise ScenarioError(PARSE_ERROR, "reference_bands", "expected an object")
        _reject_unknown(bands, METRIC_NAMES, "reference_bands")
        for metric, per_class in bands.items():
            if not isinstance(per_class, dict):
                raise ScenarioError(PARSE_ERROR, f"reference_bands.{metric}", "expected an object")
            _reject_unknown(per_class, class_names, f"reference_bands.{metric}")
            for name, pair in per_class.items():
                where = f"reference_bands.{metric}.{name}"
                if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                        or not all(isinstance(v, (int, float)) for v in pair)):
                    raise ScenarioError(PARSE_ERROR, where, "expected a [lo, hi] pair")
                if pair[0] > pair[1]:
                    raise ScenarioError(RANGE_VIOLATION, where, f"lo {pair[0]!r} > hi {pair[1]!r}")


def _check_ranges(document: dict) -> None:
    for path, bounds in ADJUSTABLE_RANGES.items():
        node = document
        for key in path.split("."):
            node = node[key]
        bounds.check(path, node)
    for cls in CLASS_ORDER:
        fields = document["scenario"]["behaviors"][cls.value]
        for name, bounds in _BASIC_RANGES.items():
            bounds.check(f"scenario.behaviors.{cls.value}.{name}", fields[name])


def parse_scenario_document(document: dict) -> Scenario:
    """Validate a scenario document and build a Scenario, filling defaults.

    Raises :class:`ScenarioError` with the offending field path on unknown
    fields, out-of-range values, or malformed structure.
    """
    _validate_structure(document)

    version = document.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(PARSE_ERROR, "schema_version",
                            f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")

    merged = _merge(default_document(), document)
    _check_ranges(merged)

    body = merged["scenario"]
    behaviors = {}
    for cls in CLASS_ORDER:
        fields = body["behaviors"][cls.value]
        try:
            behaviors[cls] = ClassBehavior(**{name: fields[name] for name in _BEHAVIOR_FIELDS})
        except ValueError as exc:
            raise ScenarioError(RANGE_VIOLATION, f"scenario.behaviors.{cls.value}", str(exc)) from exc

    try:
        catalog = Catalog(tuple(Item(item["buy_probability"], item["price"])
                                for item in body["catalog"]["items"]))
    except (ValueError, KeyError) as exc:
        raise ScenarioError(RANGE_VIOLATION, "scenario.catalog", str(exc)) from exc

    sim_fields = body["sim"]
    try:
        sim = SimConfig(dt=sim_fields["dt"], horizon=sim_fields["horizon"],
                        seed=sim_fields["seed"], record_every=sim_fields["record_every"])
    except ValueError as exc:
        raise ScenarioError(RANGE_VIOLATION, "scenario.sim", str(exc)) from exc

    try:
        return Scenario(
            total_intensity=body["total_intensity"],
            control1_pct=body["control1_pct"],
            control2_pct=body["control2_pct"],
            behaviors=behaviors,
            catalog=catalog,
            sim=sim,
        )
    except ValueError as exc:
        raise ScenarioError(RANGE_VIOLATION, "scenario", str(exc)) from exc


def scenario_to_document(scenario: Scenario, reference_bands: dict | None = None) -> dict:
    """Serialize a Scenario back into its file form (inverse of parsing)."""
    document = {
        "schema_version": SCHEMA_VERSION,
        "scenario": {
            "total_intensity": scenario.total_intensity,
            "control1_pct": scenario.control1_pct,
            "control2_pct": scenario.control2_pct,
            "behaviors": {
                cls.value: {name: getattr(scenario.behaviors[cls], name) for name in _BEHAVIOR_FIELDS}
                for cls in CLASS_ORDER
            },
            "catalog": {
                "items": [{"buy_probability": item.buy_probability, "price": item.price}
                          for item in scenario.catalog.items]
            },
            "sim": {
                "dt": scenario.sim.dt,
                "horizon": scenario.sim.horizon,
                "seed": scenario.sim.seed,
                "record_every": scenario.sim.record_every,
            },
        },
    }
    if reference_bands is not None:
        document["reference_bands"] = copy.deepcopy(reference_bands)
    return document


def load_scenario_file(path: str | Path) -> tuple[Scenario, dict | None]:
    """Parse a scenario file; returns the scenario and its reference bands, if any."""
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise ScenarioError(PARSE_ERROR, str(path), str(exc)) from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(PARSE_ERROR, f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    scenario = parse_scenario_document(document)
    bands = copy.deepcopy(document.get("reference_bands")) if isinstance(document, dict) else None
    return scenario, bands


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario file, ignoring any reference bands."""
    return load_scenario_file(path)[0]
