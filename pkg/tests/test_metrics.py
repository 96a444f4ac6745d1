from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stockflow.commerce import CLASS_ORDER, run_scenario
from stockflow.engine import SimConfig
from stockflow.metrics import (
    AGGREGATE,
    build_report,
    buy_to_visit,
    cumulative_revenue,
    linear_fit,
    potential_loss_throughput,
    revenue_throughput,
    steady_state_band,
    trailing_average,
)


# ---------------------------------------------------------------------------
# series operations
# ---------------------------------------------------------------------------

def test_cumulative_revenue_is_a_prefix_sum():
    assert list(cumulative_revenue(np.array([1.0, 2.0, 3.0]))) == [1.0, 3.0, 6.0]
    assert list(cumulative_revenue(np.zeros(5))) == [0.0] * 5


def test_cumulative_revenue_of_steady_per_step_income():
    series = np.full(720, 4.0)
    assert cumulative_revenue(series)[-1] == pytest.approx(2880.00)


def test_cumulative_revenue_rejects_negative_entries():
    with pytest.raises(ValueError):
        cumulative_revenue(np.array([1.0, -0.5]))


def test_buy_to_visit_ratio_and_zero_visit_convention():
    assert buy_to_visit(np.array([5.0]), np.array([100.0]))[0] == pytest.approx(5.0)
    assert list(buy_to_visit(np.zeros(4), np.arange(4.0))) == [0.0] * 4
    assert buy_to_visit(np.array([0.0, 1.0]), np.array([0.0, 10.0]))[0] == 0.0


def test_buy_to_visit_rejects_misaligned_series():
    with pytest.raises(ValueError, match="misaligned"):
        buy_to_visit(np.zeros(3), np.zeros(4))


def test_revenue_throughput_divides_by_dt():
    assert revenue_throughput(np.array([4.0]), 1.0)[0] == pytest.approx(4.0)
    assert revenue_throughput(np.array([4.0]), 2.0)[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        revenue_throughput(np.array([4.0]), 0.0)


def test_potential_loss_throughput_values_abandon_flow():
    assert potential_loss_throughput(np.array([5.0]), 4.00, 1.0)[0] == pytest.approx(20.0)
    assert list(potential_loss_throughput(np.zeros(3), 4.00, 1.0)) == [0.0] * 3
    with pytest.raises(ValueError):
        potential_loss_throughput(np.array([1.0]), -1.0, 1.0)


def test_trailing_average_window_semantics():
    constant = np.full(10, 3.3)
    assert np.allclose(trailing_average(constant, 4), constant)
    assert list(trailing_average(np.array([0.0, 10.0]), 2)) == [0.0, 5.0]
    ramp = np.arange(6.0)
    assert np.array_equal(trailing_average(ramp, 1), ramp)


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40),
       window=st.integers(1, 45))
def test_trailing_average_matches_bruteforce(values, window):
    series = np.array(values)
    fast = trailing_average(series, window)
    slow = [np.mean(series[max(0, i - window + 1):i + 1]) for i in range(len(series))]
    assert np.allclose(fast, slow, rtol=1e-9, atol=1e-6)


def test_linear_fit_recovers_exact_line():
    t = np.arange(20.0)
    fit = linear_fit(t, 2.0 * t + 1.0)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_linear_fit_constant_series_uses_degenerate_convention():
    fit = linear_fit(np.arange(5.0), np.full(5, 7.0))
    assert fit.slope == pytest.approx(0.0)
    assert fit.intercept == pytest.approx(7.0)
    assert fit.r_squared == 1.0


def test_linear_fit_needs_two_distinct_times():
    with pytest.raises(ValueError):
        linear_fit(np.array([3.0, 3.0]), np.array([1.0, 2.0]))


def test_linear_fit_r_squared_stays_in_unit_interval():
    rng = np.random.default_rng(0)
    t = np.arange(50.0)
    fit = linear_fit(t, rng.normal(size=50))
    assert 0.0 <= fit.r_squared <= 1.0


@settings(max_examples=40, deadline=None)
@given(shift=st.floats(-1e4, 1e4),
       slope=st.floats(-100, 100),
       noise_seed=st.integers(0, 1000))
def test_linear_fit_is_translation_equivariant_in_time(shift, slope, noise_seed):
    rng = np.random.default_rng(noise_seed)
    t = np.linspace(0.0, 100.0, 60)
    y = slope * t + 3.0 + rng.normal(scale=0.5, size=60)
    base = linear_fit(t, y)
    moved = linear_fit(t + shift, y)
    scale = max(1.0, abs(base.slope), abs(base.intercept))
    assert abs(moved.slope - base.slope) <= 1e-9 * scale
    assert abs(moved.r_squared - base.r_squared) <= 1e-9
    assert moved.intercept == pytest.approx(base.intercept - shift * base.slope, rel=1e-6, abs=1e-6 * scale)


def test_steady_state_band_constant_series():
    band = steady_state_band(np.full(8, 7.0), tail_fraction=0.5)
    assert (band.lo, band.hi) == (7.0, 7.0)


def test_steady_state_band_full_tail_spans_series():
    band = steady_state_band(np.array([1.0, 2.0, 3.0]), tail_fraction=1.0, window=1)
    assert (band.lo, band.hi) == (1.0, 3.0)


def test_steady_state_band_tail_excludes_early_ramp():
    ramp = np.arange(100.0)
    band = steady_state_band(ramp, tail_fraction=0.1, window=1)
    assert band.lo > ramp.min()
    assert band.hi == ramp.max()


def test_steady_state_band_rejects_empty_series():
    with pytest.raises(ValueError):
        steady_state_band(np.array([]), tail_fraction=0.5)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def default_run(defaults):
    return run_scenario(dataclasses.replace(defaults, sim=SimConfig(horizon=720.0, seed=8)))


def test_report_aggregate_cumulative_revenue_is_additive(default_run):
    report = build_report(default_run)
    summed = sum(report.groups[cls.value].cumulative_revenue for cls in CLASS_ORDER)
    assert np.allclose(report.aggregate.cumulative_revenue, summed, rtol=0.0, atol=1e-9)


def test_report_slope_tracks_mean_throughput(default_run):
    report = build_report(default_run)
    slope = report.aggregate.trend.slope
    mean_throughput = float(report.aggregate.revenue_throughput.mean())
    assert abs(slope - mean_throughput) <= 0.05 * abs(mean_throughput)


def test_report_buy_to_visit_stays_in_percent_range(default_run):
    report = build_report(default_run)
    for group in report.groups.values():
        assert np.all(group.buy_to_visit >= 0.0)
        assert np.all(group.buy_to_visit <= 100.0)


def test_report_summary_shape(default_run):
    summary = build_report(default_run).summary()
    assert set(summary["groups"]) == {cls.value for cls in CLASS_ORDER} | {AGGREGATE}
    aggregate = summary["groups"][AGGREGATE]
    assert set(aggregate["bands"]) == {"buy_to_visit", "revenue_throughput",
                                       "potential_loss_throughput"}
    assert aggregate["trend"]["r_squared"] >= 0.95
    assert summary["settings"]["window"] == 60


def test_report_class_ordering_at_defaults(default_run):
    report = build_report(default_run)
    for metric in ("buy_to_visit", "revenue_throughput", "potential_loss_throughput"):
        t, a, s = (report.groups[cls.value].steady_means[metric] for cls in CLASS_ORDER)
        assert t < a < s
