"""Business-oriented performance metrics over simulated runs.

All series functions are pure and operate on aligned numpy arrays; the report
builder wires them to a :class:`~stockflow.commerce.ScenarioRunResult` and
summarizes each metric with a steady-state band (min/max of the trailing-
averaged series over its tail) and a least-squares trend of cumulative
revenue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .commerce import (
    CLASS_ORDER,
    CustomerClass,
    ScenarioRunResult,
    expected_abandoned_cart_value,
)

AGGREGATE = "aggregate"
METRIC_NAMES = ("buy_to_visit", "revenue_throughput", "potential_loss_throughput")

DEFAULT_WINDOW = 60
DEFAULT_TAIL_FRACTION = 0.5


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class SteadyStateBand:
    lo: float
    hi: float
    window_fraction: float

    def contains(self, other: "SteadyStateBand", tolerance: float = 0.0) -> bool:
        """True if ``other`` lies inside this band widened by a relative tolerance."""
        lo = self.lo - tolerance * abs(self.lo)
        hi = self.hi + tolerance * abs(self.hi)
        return lo <= other.lo and other.hi <= hi


# ---------------------------------------------------------------------------
# series operations
# ---------------------------------------------------------------------------

def cumulative_revenue(revenue: np.ndarray) -> np.ndarray:
    """Running total of per-step revenue; input must be non-negative."""
    revenue = np.asarray(revenue, dtype=float)
    if revenue.size and revenue.min() < 0:
        raise ValueError("revenue series contains negative entries")
    return np.cumsum(revenue)


def buy_to_visit(cumulative_payers: np.ndarray, cumulative_visits: np.ndarray) -> np.ndarray:
    """Percent of visits that turned into a sale, defined as 0 before any visit."""
    payers = np.asarray(cumulative_payers, dtype=float)
    visits = np.asarray(cumulative_visits, dtype=float)
    if payers.shape != visits.shape:
        raise ValueError(f"misaligned series: {payers.shape} vs {visits.shape}")
    out = np.zeros_like(payers)
    np.divide(100.0 * payers, visits, out=out, where=visits > 0)
    return out


def revenue_throughput(revenue: np.ndarray, dt: float) -> np.ndarray:
    """Dollars earned per time unit."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    return np.asarray(revenue, dtype=float) / dt


def potential_loss_throughput(abandon_flow: np.ndarray, expected_cart_value: float,
                              dt: float) -> np.ndarray:
    """Dollar value per time unit walking out the door in abandoned carts."""
    if expected_cart_value < 0:
        raise ValueError(f"expected_cart_value must be >= 0, got {expected_cart_value!r}")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    return np.asarray(abandon_flow, dtype=float) * expected_cart_value / dt


def trailing_average(series: np.ndarray, window: int) -> np.ndarray:
    """Mean of the last ``window`` samples at each point (fewer at the start)."""
    if window < 1 or int(window) != window:
        raise ValueError(f"window must be an integer >= 1, got {window!r}")
    series = np.asarray(series, dtype=float)
    if window == 1 or series.size == 0:
        return series.copy()
    prefix = np.concatenate(([0.0], np.cumsum(series)))
    idx = np.arange(series.size)
    start = np.maximum(idx - window + 1, 0)
    return (prefix[idx + 1] - prefix[start]) / (idx + 1 - start)


def linear_fit(times: np.ndarray, values: np.ndarray) -> LinearFit:
    """Ordinary least squares line through (times, values) with its R^2.

    A constant target fitted exactly gets R^2 = 1 rather than 0/0.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ValueError(f"misaligned series: {t.shape} vs {y.shape}")
    if np.unique(t).size < 2:
        raise ValueError("need at least 2 distinct time points to fit a line")

    t_mean = t.mean()
    y_mean = y.mean()
    t_centered = t - t_mean
    slope = float(np.dot(t_centered, y - y_mean) / np.dot(t_centered, t_centered))
    intercept = float(y_mean - slope * t_mean)

    ss_res = float(np.sum((y - (intercept + slope * t)) ** 2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if math.isclose(ss_res, 0.0, abs_tol=1e-18) else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return LinearFit(slope=slope, intercept=intercept, r_squared=float(min(max(r_squared, 0.0), 1.0)))


def steady_state_band(series: np.ndarray, tail_fraction: float, window: int = 1) -> SteadyStateBand:
    """Min/max of the trailing-averaged series over its trailing samples."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("cannot band an empty series")
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction!r}")
    averaged = trailing_average(series, window)
    tail = averaged[-math.ceil(tail_fraction * averaged.size):]
    return SteadyStateBand(lo=float(tail.min()), hi=float(tail.max()), window_fraction=tail_fraction)


def steady_mean(series: np.ndarray, tail_fraction: float, window: int = 1) -> float:
    """Mean of the trailing-averaged series over its trailing samples."""
    series = np.asarray(series, dtype=float)
    averaged = trailing_average(series, window)
    return float(averaged[-math.ceil(tail_fraction * averaged.size):].mean())


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupMetrics:
    """All metric series and summaries for one class (or the aggregate)."""

    label: str
    cumulative_revenue: np.ndarray
    buy_to_visit: np.ndarray
    revenue_throughput: np.ndarray
    potential_loss_throughput: np.ndarray
    trend: LinearFit
    bands: dict[str, SteadyStateBand]
    steady_means: dict[str, float]
    totals: dict[str, float]

    def summary(self) -> dict:
        return {
            "trend": {
                "slope": self.trend.slope,
                "intercept": self.trend.intercept,
                "r_squared": self.trend.r_squared,
            },
            "bands": {name: [band.lo, band.hi] for name, band in self.bands.items()},
            "steady_means": dict(self.steady_means),
            "totals": dict(self.totals),
        }


@dataclass(frozen=True)
class MetricReport:
    """Per-class and aggregate metrics for one completed run."""

    groups: dict[str, GroupMetrics]
    window: int
    tail_fraction: float
    dt: float
    seed: int

    @property
    def aggregate(self) -> GroupMetrics:
        return self.groups[AGGREGATE]

    def for_class(self, cls: CustomerClass) -> GroupMetrics:
        return self.groups[cls.value]

    def summary(self) -> dict:
        return {
            "settings": {
                "window": self.window,
                "tail_fraction": self.tail_fraction,
                "dt": self.dt,
                "seed": self.seed,
            },
            "groups": {label: group.summary() for label, group in self.groups.items()},
        }


def _group_metrics(label: str, times: np.ndarray, arrivals: np.ndarray, payers: np.ndarray,
                   revenue: np.ndarray, loss_series: np.ndarray, dt: float,
                   window: int, tail_fraction: float) -> GroupMetrics:
    cum_revenue = cumulative_revenue(revenue)
    btv = buy_to_visit(np.cumsum(payers), np.cumsum(arrivals))
    throughput = revenue_throughput(revenue, dt)

    metric_series = {
        "buy_to_visit": btv,
        "revenue_throughput": throughput,
        "potential_loss_throughput": loss_series,
    }
    bands = {name: steady_state_band(series, tail_fraction, window)
             for name, series in metric_series.items()}
    means = {name: steady_mean(series, tail_fraction, window)
             for name, series in metric_series.items()}

    return GroupMetrics(
        label=label,
        cumulative_revenue=cum_revenue,
        buy_to_visit=btv,
        revenue_throughput=throughput,
        potential_loss_throughput=loss_series,
        trend=linear_fit(times, cum_revenue),
        bands=bands,
        steady_means=means,
        totals={
            "arrivals": float(arrivals.sum()),
            "payers": float(payers.sum()),
            "revenue": float(revenue.sum()),
            "abandoned_value": float(loss_series.sum() * dt),
        },
    )


def build_report(run: ScenarioRunResult, window: int = DEFAULT_WINDOW,
                 tail_fraction: float = DEFAULT_TAIL_FRACTION) -> MetricReport:
    """Compute every metric for each class and the aggregate of one run."""
    dt = run.dt
    groups: dict[str, GroupMetrics] = {}
    loss_total = np.zeros_like(run.times, dtype=float)

    for cls in CLASS_ORDER:
        series = run.classes[cls]
        cart_value = expected_abandoned_cart_value(run.scenario.behaviors[cls], run.scenario.catalog)
        loss = potential_loss_throughput(series.exit_abandoned_cart, cart_value, dt)
        loss_total = loss_total + loss
        groups[cls.value] = _group_metrics(
            cls.value, run.times, series.arrivals, series.payers, series.revenue,
            loss, dt, window, tail_fraction,
        )

    groups[AGGREGATE] = _group_metrics(
        AGGREGATE, run.times, run.arrivals, run.payers, run.revenue,
        loss_total, dt, window, tail_fraction,
    )
    return MetricReport(groups=groups, window=window, tail_fraction=tail_fraction,
                        dt=dt, seed=run.seed)
