"""E-commerce shopper behavior model on top of the stock-and-flow engine.

Shoppers belong to one of three behavioral classes (tightwads, average
spenders, spendthrifts). Each class runs its own shopping-session loop:
sessions start at a Poisson intensity, browsing shoppers either leave, keep
browsing, or put an item in the cart, and cart holders either pay, abandon
the site with a non-empty cart, or resume browsing. A separate
population-accounting chain splits one global arrival process into the three
classes by the operating-profile probabilities.

Revenue follows the catalog: every paying shopper contributes the
probability-weighted item price (the expected order value).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    BOUNDARY,
    Constant,
    Flow,
    FractionOfStock,
    Model,
    NormalFraction,
    PoissonRate,
    RunResult,
    SimConfig,
    Stock,
)

#: Upper slider bound shared by all arrival intensities.
MAX_INTENSITY = 50.0


class CustomerClass(enum.Enum):
    TIGHTWAD = "tightwad"
    AVERAGE_SPENDER = "average_spender"
    SPENDTHRIFT = "spendthrift"

    def __str__(self) -> str:
        return self.value


#: Fixed class order: (t1, t2, t3).
CLASS_ORDER = (CustomerClass.TIGHTWAD, CustomerClass.AVERAGE_SPENDER, CustomerClass.SPENDTHRIFT)


@dataclass(frozen=True)
class OperatingProfile:
    """Workload-mix probabilities (p1, p2, p3), one per class, summing to 1."""

    p: tuple[float, float, float]

    def __post_init__(self):
        if len(self.p) != 3:
            raise ValueError("an operating profile has exactly three probabilities")
        for value in self.p:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"class probability {value!r} outside [0, 1]")
        if abs(sum(self.p) - 1.0) > 1e-9:
            raise ValueError(f"class probabilities must sum to 1, got {sum(self.p)!r}")

    def for_class(self, cls: CustomerClass) -> float:
        return self.p[CLASS_ORDER.index(cls)]


def class_split(control1_pct: float, control2_pct: float) -> OperatingProfile:
    """Derive the operating profile from the two mix sliders.

    The first slider takes its share directly; the second splits whatever is
    left between the remaining two classes.
    """
    for name, value in (("control1_pct", control1_pct), ("control2_pct", control2_pct)):
        if not 0.0 <= value <= 100.0:
            raise ValueError(f"{name} must be in [0, 100], got {value!r}")
    p1 = control1_pct / 100.0
    rest = 1.0 - p1
    p2 = rest * (control2_pct / 100.0)
    p3 = rest - p2
    return OperatingProfile((p1, p2, max(p3, 0.0)))


def per_class_intensity(lambda_total: float, p_i: float) -> float:
    """Arrival intensity attributable to one class: the product of both."""
    if lambda_total < 0:
        raise ValueError(f"lambda_total must be >= 0, got {lambda_total!r}")
    if not 0.0 <= p_i <= 1.0:
        raise ValueError(f"p_i must be in [0, 1], got {p_i!r}")
    return lambda_total * p_i


# ---------------------------------------------------------------------------
# catalog and revenue
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Item:
    buy_probability: float
    price: float

    def __post_init__(self):
        if not 0.0 <= self.buy_probability <= 1.0:
            raise ValueError(f"buy_probability must be in [0, 1], got {self.buy_probability!r}")
        if not np.isfinite(self.price) or self.price < 0:
            raise ValueError(f"price must be finite and >= 0, got {self.price!r}")


@dataclass(frozen=True)
class Catalog:
    """The store's items; buying probabilities must sum to 1."""

    items: tuple[Item, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("catalog must contain at least one item")
        total = sum(item.buy_probability for item in self.items)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"catalog buy probabilities must sum to 1, got {total!r}")

    def scaled_prices(self, factor: float) -> "Catalog":
        return Catalog(tuple(Item(i.buy_probability, i.price * factor) for i in self.items))


def expected_order_value(catalog: Catalog) -> float:
    """Probability-weighted item price: the dollars one paying shopper brings."""
    return sum(item.buy_probability * item.price for item in catalog.items)


def revenue_at(payers: float, catalog: Catalog) -> float:
    """Dollars earned in one step given the number of payers during it."""
    if payers < 0:
        raise ValueError(f"payers must be >= 0, got {payers!r}")
    return payers * expected_order_value(catalog)


def naive_income(aov: float, cr: float, visitors: float) -> float:
    """Back-of-the-envelope income estimate: order value x conversion x visitors."""
    if aov < 0 or visitors < 0 or not 0.0 <= cr <= 1.0:
        raise ValueError("aov and visitors must be >= 0 and cr in [0, 1]")
    return aov * cr * visitors


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassBehavior:
    """Per-class session dynamics, all percentages per time unit.

    ``cart_abandon_split`` is the fraction of non-buying cart holders that
    terminates with a non-empty cart each step; ``post_action_return_rate``
    is the percentage of cart holders that resumes browsing instead.
    """

    session_intensity: float
    add_to_cart_rate: float
    buy_rate_mu: float
    buy_rate_sigma: float
    browse_exit_rate: float
    cart_abandon_split: float
    post_action_return_rate: float

    def __post_init__(self):
        if not 0.0 <= self.session_intensity <= MAX_INTENSITY:
            raise ValueError(f"session_intensity must be in [0, {MAX_INTENSITY}], got {self.session_intensity!r}")
        for name in ("add_to_cart_rate", "buy_rate_mu", "browse_exit_rate", "post_action_return_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} must be in [0, 100], got {value!r}")
        if self.buy_rate_sigma < 0:
            raise ValueError(f"buy_rate_sigma must be >= 0, got {self.buy_rate_sigma!r}")
        if not 0.0 <= self.cart_abandon_split <= 1.0:
            raise ValueError(f"cart_abandon_split must be in [0, 1], got {self.cart_abandon_split!r}")

    def abandon_rate_pct(self) -> float:
        """Cart-to-exit percentage per step implied by the abandon split.

        The split applies to non-buying cart holders, so the expected
        non-buying share (from the mean buy rate) scales it down.
        """
        return 100.0 * self.cart_abandon_split * (1.0 - self.buy_rate_mu / 100.0)


@dataclass(frozen=True)
class Scenario:
    """Everything adjustable about one run: mix, intensities, rates, catalog, clock."""

    total_intensity: float
    control1_pct: float
    control2_pct: float
    behaviors: dict[CustomerClass, ClassBehavior]
    catalog: Catalog
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        if not 0.0 <= self.total_intensity <= MAX_INTENSITY:
            raise ValueError(f"total_intensity must be in [0, {MAX_INTENSITY}], got {self.total_intensity!r}")
        for name in ("control1_pct", "control2_pct"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} must be in [0, 100], got {value!r}")
        missing = [cls.value for cls in CLASS_ORDER if cls not in self.behaviors]
        if missing:
            raise ValueError(f"behaviors missing for classes: {missing}")

    @property
    def profile(self) -> OperatingProfile:
        return class_split(self.control1_pct, self.control2_pct)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, sim=replace(self.sim, seed=seed))


def expected_abandoned_cart_value(behavior: ClassBehavior, catalog: Catalog) -> float:
    """Expected dollars sitting in a cart at the moment its owner walks away.

    Each move from browsing into the cart adds one item at the expected order
    value. Shoppers that resume browsing keep their cart and may add again,
    so a session that eventually abandons has accumulated a geometric number
    of items through the cart -> browsing -> cart loop; its mean is
    1 / (1 - return_prob * re_add_prob).
    """
    aov = expected_order_value(catalog)
    add = behavior.add_to_cart_rate / 100.0
    exit_ = behavior.browse_exit_rate / 100.0
    buy = behavior.buy_rate_mu / 100.0
    ret = behavior.post_action_return_rate / 100.0
    abandon = behavior.cart_abandon_split * (1.0 - buy)
    if abandon <= 0.0 or add <= 0.0:
        return aov
    re_add = add / (add + exit_) if add + exit_ > 0 else 0.0
    return_share = ret / (buy + ret + abandon)
    return aov / (1.0 - re_add * return_share)


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

def _class_flows(cls: CustomerClass, behavior: ClassBehavior,
                 deterministic_arrivals: bool) -> tuple[list[Stock], list[Flow]]:
    c = cls.value
    stocks = [
        Stock(f"{c}/browsing"),
        Stock(f"{c}/cart"),
        Stock(f"{c}/paid"),
        Stock(f"{c}/paid_total"),
        Stock(f"{c}/exit_no_purchase"),
        Stock(f"{c}/exit_abandoned"),
    ]
    arrival_rate = (Constant(behavior.session_intensity) if deterministic_arrivals
                    else PoissonRate(behavior.session_intensity))
    flows = [
        Flow(f"{c}/arrive", BOUNDARY, f"{c}/browsing", arrival_rate),
        Flow(f"{c}/add", f"{c}/browsing", f"{c}/cart",
             FractionOfStock(f"{c}/browsing", behavior.add_to_cart_rate)),
        Flow(f"{c}/leave", f"{c}/browsing", f"{c}/exit_no_purchase",
             FractionOfStock(f"{c}/browsing", behavior.browse_exit_rate)),
        Flow(f"{c}/buy", f"{c}/cart", f"{c}/paid",
             NormalFraction(f"{c}/cart", behavior.buy_rate_mu, behavior.buy_rate_sigma)),
        Flow(f"{c}/return", f"{c}/cart", f"{c}/browsing",
             FractionOfStock(f"{c}/cart", behavior.post_action_return_rate)),
        Flow(f"{c}/abandon", f"{c}/cart", f"{c}/exit_abandoned",
             FractionOfStock(f"{c}/cart", behavior.abandon_rate_pct())),
        # paid is a per-step holding stock; everything settles into the counter
        Flow(f"{c}/settle", f"{c}/paid", f"{c}/paid_total",
             FractionOfStock(f"{c}/paid", 100.0)),
    ]
    return stocks, flows


def build_model(scenario: Scenario, deterministic_arrivals: bool = False) -> Model:
    """Assemble the full validated model for a scenario.

    ``deterministic_arrivals`` swaps every Poisson arrival process for a
    constant flow at the same mean, which makes the whole run reproducible by
    a hand-written recurrence when the buy-rate sigmas are zero.
    """
    stocks: list[Stock] = []
    flows: list[Flow] = []

    profile = scenario.profile
    stocks.append(Stock("population/new_shoppers"))
    global_rate = (Constant(scenario.total_intensity) if deterministic_arrivals
                   else PoissonRate(scenario.total_intensity))
    flows.append(Flow("population/arrive", BOUNDARY, "population/new_shoppers", global_rate))
    for cls in CLASS_ORDER:
        stocks.append(Stock(f"population/{cls.value}"))
        flows.append(Flow(f"population/split_{cls.value}", "population/new_shoppers",
                          f"population/{cls.value}",
                          FractionOfStock("population/new_shoppers", 100.0 * profile.for_class(cls))))

    for cls in CLASS_ORDER:
        class_stocks, class_flows = _class_flows(cls, scenario.behaviors[cls], deterministic_arrivals)
        stocks.extend(class_stocks)
        flows.extend(class_flows)

    model = Model(stocks=stocks, flows=flows)
    report = model.validate()
    if not report.ok:
        raise ValueError(f"scenario produced an invalid model: {report}")
    return model


# ---------------------------------------------------------------------------
# running and result shaping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassRunResult:
    """Per-class trajectories; flows are amounts per recorded step."""

    customer_class: CustomerClass
    arrivals: np.ndarray
    browsing: np.ndarray
    in_cart: np.ndarray
    payers: np.ndarray
    exit_no_purchase: np.ndarray
    exit_abandoned_cart: np.ndarray
    revenue: np.ndarray


@dataclass(frozen=True)
class ScenarioRunResult:
    """One simulated scenario: per-class series plus aggregate totals."""

    scenario: Scenario
    seed: int
    times: np.ndarray
    classes: dict[CustomerClass, ClassRunResult]
    population: dict[str, np.ndarray]
    raw: RunResult

    @property
    def dt(self) -> float:
        return self.scenario.sim.dt

    @property
    def revenue(self) -> np.ndarray:
        """Aggregate revenue per step (sum over classes)."""
        return sum(c.revenue for c in self.classes.values())

    @property
    def arrivals(self) -> np.ndarray:
        return sum(c.arrivals for c in self.classes.values())

    @property
    def payers(self) -> np.ndarray:
        return sum(c.payers for c in self.classes.values())

    def totals(self) -> dict[str, float]:
        return {
            "arrivals": float(self.arrivals.sum()),
            "payers": float(self.payers.sum()),
            "revenue": float(self.revenue.sum()),
        }


def run_scenario(scenario: Scenario, seed: int | None = None,
                 deterministic_arrivals: bool = False) -> ScenarioRunResult:
    """Build the scenario's model, run it, and shape the per-class results."""
    config = scenario.sim if seed is None else replace(scenario.sim, seed=seed)
    model = build_model(scenario, deterministic_arrivals=deterministic_arrivals)
    raw = model.run(config)

    aov = expected_order_value(scenario.catalog)
    classes: dict[CustomerClass, ClassRunResult] = {}
    for cls in CLASS_ORDER:
        c = cls.value
        payers = raw.flow_series[f"{c}/buy"]
        classes[cls] = ClassRunResult(
            customer_class=cls,
            arrivals=raw.flow_series[f"{c}/arrive"],
            browsing=raw.stock_series[f"{c}/browsing"],
            in_cart=raw.stock_series[f"{c}/cart"],
            payers=payers,
            exit_no_purchase=raw.flow_series[f"{c}/leave"],
            exit_abandoned_cart=raw.flow_series[f"{c}/abandon"],
            revenue=payers * aov,
        )

    population = {"new_shoppers": raw.stock_series["population/new_shoppers"]}
    for cls in CLASS_ORDER:
        population[cls.value] = raw.stock_series[f"population/{cls.value}"]

    return ScenarioRunResult(
        scenario=scenario,
        seed=config.seed,
        times=raw.times,
        classes=classes,
        population=population,
        raw=raw,
    )
