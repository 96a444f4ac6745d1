"""Stochastic stock-and-flow simulation of e-commerce shopper behavior.

The package splits into a generic simulation engine (:mod:`stockflow.engine`),
the shopper-behavior model (:mod:`stockflow.commerce`), metric computation
(:mod:`stockflow.metrics`), scenario file handling (:mod:`stockflow.scenario_io`),
and two front doors: a batch CLI (:mod:`stockflow.cli`) and an HTTP service
(:mod:`stockflow.service`).
"""

from .engine import (
    BOUNDARY,
    Constant,
    Expression,
    Flow,
    FractionOfStock,
    Link,
    Model,
    NonFiniteStateError,
    NormalFraction,
    PoissonRate,
    RunResult,
    SimConfig,
    Stock,
    UnvalidatedModelError,
    ValidationReport,
    Variable,
    make_streams,
    step,
    validate_model,
)
from .sampling import sample_poisson, sample_truncated_normal, split_streams
from .commerce import (
    CLASS_ORDER,
    Catalog,
    ClassBehavior,
    ClassRunResult,
    CustomerClass,
    Item,
    OperatingProfile,
    Scenario,
    ScenarioRunResult,
    build_model,
    class_split,
    expected_abandoned_cart_value,
    expected_order_value,
    naive_income,
    per_class_intensity,
    revenue_at,
    run_scenario,
)
from .metrics import (
    AGGREGATE,
    LinearFit,
    MetricReport,
    SteadyStateBand,
    build_report,
    buy_to_visit,
    cumulative_revenue,
    linear_fit,
    potential_loss_throughput,
    revenue_throughput,
    steady_state_band,
    trailing_average,
)

__version__ = "0.1.0"
