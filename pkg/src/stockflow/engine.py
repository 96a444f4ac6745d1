"""Stock-and-flow simulation engine.

Models are graphs of four primitives: stocks hold quantity, flows move it
between stocks (or across the model boundary), variables compute values from
the current state, and links declare information dependencies. Integration is
explicit fixed-step: each step every flow is evaluated from the state at the
start of the step, converted to an amount over ``dt``, and applied
simultaneously. A stock whose requested outflow exceeds its level plus inflow
has all its outflows scaled proportionally so it lands exactly at zero, which
keeps every level non-negative and preserves the relative weights of
competing outflows.

Stochastic rates (Poisson inflows, normally distributed percentages) draw
from per-primitive generators derived from the run seed, so a run is a pure
function of (model, config).
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Callable, Mapping, Union

import numpy as np

from .sampling import sample_poisson, sample_truncated_normal, split_streams

#: Sentinel for a flow endpoint outside the model (a source or sink).
BOUNDARY = None

_CLAMP_ITERATIONS = 64


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stock:
    """An accumulated quantity (entities, dollars); never negative."""

    id: str
    initial_level: float = 0.0
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class Constant:
    """Fixed rate in entities per time unit."""

    value: float


@dataclass(frozen=True)
class FractionOfStock:
    """Rate proportional to a stock's level: ``level * percent/100`` per time unit."""

    stock: str
    percent: float


@dataclass(frozen=True)
class PoissonRate:
    """Integer count per step drawn from Poisson(intensity * dt)."""

    intensity: float


@dataclass(frozen=True)
class NormalFraction:
    """Like FractionOfStock but the percentage is redrawn each step.

    The draw comes from N(mu, sigma) clipped into [lo, hi] percent.
    """

    stock: str
    mu: float
    sigma: float
    lo: float = 0.0
    hi: float = 100.0


@dataclass(frozen=True)
class Expression:
    """Arbitrary rate callback ``fn(t, levels, variables) -> rate per time unit``.

    Negative results are floored at zero; non-finite results abort the run.
    """

    fn: Callable[[float, Mapping[str, float], Mapping[str, float]], float]


RateSpec = Union[Constant, FractionOfStock, PoissonRate, NormalFraction, Expression]


@dataclass(frozen=True)
class Flow:
    """Moves quantity from ``source`` to ``target`` (either may be BOUNDARY)."""

    id: str
    source: str | None
    target: str | None
    rate: RateSpec


@dataclass(frozen=True)
class VarContext:
    """Inputs available to a variable definition at evaluation time."""

    time: float
    levels: Mapping[str, float]
    variables: Mapping[str, float]  # values already computed this step
    previous: Mapping[str, float]  # all values from the previous step


@dataclass(frozen=True)
class Variable:
    """A computed value: a constant or a function of the current state.

    Dependencies between variables are declared with links and must be
    acyclic; the only permitted feedback is reading the previous step's
    values through ``VarContext.previous``.
    """

    id: str
    definition: float | Callable[[VarContext], float]
    name: str | None = None


@dataclass(frozen=True)
class Link:
    """Information dependency from one primitive to another."""

    source: str
    target: str


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

DANGLING_REFERENCE = "DANGLING_REFERENCE"
DEPENDENCY_CYCLE = "DEPENDENCY_CYCLE"
NEGATIVE_CONSTANT = "NEGATIVE_CONSTANT"
DUPLICATE_ID = "DUPLICATE_ID"
INVALID_RANGE = "INVALID_RANGE"
SELF_LOOP = "SELF_LOOP"


@dataclass(frozen=True)
class Defect:
    code: str
    primitive: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    defects: tuple[Defect, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.defects

    def __str__(self) -> str:
        if self.ok:
            return "model valid"
        return "; ".join(f"{d.code}[{d.primitive}]: {d.message}" for d in self.defects)


class UnvalidatedModelError(RuntimeError):
    """Raised when running a model whose validation reports defects."""

    def __init__(self, report: ValidationReport):
        super().__init__(f"model failed validation: {report}")
        self.report = report


class NonFiniteStateError(RuntimeError):
    """A stock level or rate became NaN/inf, typically from a bad expression."""

    def __init__(self, time: float, culprit: str):
        super().__init__(f"non-finite value at t={time} in {culprit!r}")
        self.time = time
        self.culprit = culprit


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """Fixed-step run settings; ``horizon`` must be a whole number of steps."""

    dt: float = 1.0
    horizon: float = 720.0
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if self.horizon < self.dt:
            raise ValueError(f"horizon must be >= dt, got {self.horizon!r}")
        n = round(self.horizon / self.dt)
        if abs(n * self.dt - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(f"horizon {self.horizon!r} is not a whole number of steps of dt={self.dt!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)


@dataclass(frozen=True)
class RunResult:
    """Recorded trajectories; every series has one entry per recorded time.

    Stock and variable series are instantaneous values. Flow series hold the
    realized amount moved since the previous recorded time (index 0 is 0.0).
    """

    times: np.ndarray
    stock_series: dict[str, np.ndarray]
    flow_series: dict[str, np.ndarray]
    variable_series: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.times)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

class Model:
    """An immutable stock-and-flow graph. Build once, validate, run many times."""

    def __init__(self, stocks=(), flows=(), variables=(), links=()):
        self.stocks: tuple[Stock, ...] = tuple(stocks)
        self.flows: tuple[Flow, ...] = tuple(flows)
        self.variables: tuple[Variable, ...] = tuple(variables)
        self.links: tuple[Link, ...] = tuple(links)
        self.stock_by_id = {s.id: s for s in self.stocks}
        self.variable_by_id = {v.id: v for v in self.variables}
        self._report: ValidationReport | None = None
        self._var_order: tuple[str, ...] | None = None

    # -- validation ---------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check the graph and return every defect found (an empty report is a pass)."""
        if self._report is not None:
            return self._report

        defects: list[Defect] = []
        seen: set[str] = set()
        for prim_id in [s.id for s in self.stocks] + [f.id for f in self.flows] + [v.id for v in self.variables]:
            if prim_id in seen:
                defects.append(Defect(DUPLICATE_ID, prim_id, "id used by more than one primitive"))
            seen.add(prim_id)

        for stock in self.stocks:
            if not np.isfinite(stock.initial_level) or stock.initial_level < 0:
                defects.append(Defect(NEGATIVE_CONSTANT, stock.id,
                                      f"initial_level must be finite and >= 0, got {stock.initial_level!r}"))

        for flow in self.flows:
            if flow.source == flow.target:
                defects.append(Defect(SELF_LOOP, flow.id, "flow source and target must differ"))
            for endpoint in (flow.source, flow.target):
                if endpoint is not BOUNDARY and endpoint not in self.stock_by_id:
                    defects.append(Defect(DANGLING_REFERENCE, flow.id, f"unknown stock {endpoint!r}"))
            defects.extend(self._rate_defects(flow))

        all_ids = seen
        for link in self.links:
            for endpoint in (link.source, link.target):
                if endpoint not in all_ids:
                    defects.append(Defect(DANGLING_REFERENCE, f"{link.source}->{link.target}",
                                          f"unknown primitive {endpoint!r}"))

        order, cycle_defects = self._sort_variables()
        defects.extend(cycle_defects)

        self._report = ValidationReport(tuple(defects))
        if self._report.ok:
            self._var_order = order
        return self._report

    def _rate_defects(self, flow: Flow) -> list[Defect]:
        rate = flow.rate
        out: list[Defect] = []
        if isinstance(rate, Constant):
            if not np.isfinite(rate.value) or rate.value < 0:
                out.append(Defect(NEGATIVE_CONSTANT, flow.id, f"constant rate must be >= 0, got {rate.value!r}"))
        elif isinstance(rate, FractionOfStock):
            if rate.stock not in self.stock_by_id:
                out.append(Defect(DANGLING_REFERENCE, flow.id, f"unknown stock {rate.stock!r}"))
            if not 0 <= rate.percent <= 100:
                out.append(Defect(INVALID_RANGE, flow.id, f"percent must be in [0, 100], got {rate.percent!r}"))
        elif isinstance(rate, PoissonRate):
            if not np.isfinite(rate.intensity) or rate.intensity < 0:
                out.append(Defect(NEGATIVE_CONSTANT, flow.id, f"intensity must be >= 0, got {rate.intensity!r}"))
        elif isinstance(rate, NormalFraction):
            if rate.stock not in self.stock_by_id:
                out.append(Defect(DANGLING_REFERENCE, flow.id, f"unknown stock {rate.stock!r}"))
            if rate.sigma < 0:
                out.append(Defect(NEGATIVE_CONSTANT, flow.id, f"sigma must be >= 0, got {rate.sigma!r}"))
            if rate.lo > rate.hi:
                out.append(Defect(INVALID_RANGE, flow.id, f"lo={rate.lo!r} > hi={rate.hi!r}"))
            if rate.lo < 0 or rate.hi > 100:
                out.append(Defect(INVALID_RANGE, flow.id, "bounds must lie within [0, 100] percent"))
        return out

    def _sort_variables(self) -> tuple[tuple[str, ...], list[Defect]]:
        """Topologically order variables by links; insertion order never matters."""
        deps: dict[str, set[str]] = {v.id: set() for v in self.variables}
        for link in self.links:
            if link.source in deps and link.target in deps:
                deps[link.target].add(link.source)

        ts = TopologicalSorter({vid: sorted(vdeps) for vid, vdeps in sorted(deps.items())})
        try:
            order = tuple(ts.static_order())
            return order, []
        except CycleError:
            cycles = self._cycle_groups(deps)
            defects = [Defect(DEPENDENCY_CYCLE, " -> ".join(group),
                              "variables depend on each other in a cycle")
                       for group in cycles]
            return (), defects

    @staticmethod
    def _cycle_groups(deps: dict[str, set[str]]) -> list[tuple[str, ...]]:
        # Kahn's algorithm; whatever cannot be peeled off participates in a cycle.
        remaining = {vid: set(vdeps) for vid, vdeps in deps.items()}
        progressed = True
        while progressed and remaining:
            progressed = False
            for vid in sorted(remaining):
                if not (remaining[vid] & remaining.keys()):
                    del remaining[vid]
                    progressed = True
        if not remaining:
            return []
        # group leftovers into connected components so one cycle = one defect
        leftover = set(remaining)
        neighbours: dict[str, set[str]] = {vid: set() for vid in leftover}
        for vid, vdeps in remaining.items():
            for dep in vdeps & leftover:
                neighbours[vid].add(dep)
                neighbours[dep].add(vid)
        groups: list[tuple[str, ...]] = []
        unvisited = set(leftover)
        while unvisited:
            start = min(unvisited)
            component = {start}
            frontier = [start]
            while frontier:
                node = frontier.pop()
                for nxt in neighbours[node]:
                    if nxt not in component:
                        component.add(nxt)
                        frontier.append(nxt)
            unvisited -= component
            groups.append(tuple(sorted(component)))
        return groups

    # -- execution ----------------------------------------------------------

    def initial_levels(self) -> dict[str, float]:
        return {s.id: float(s.initial_level) for s in self.stocks}

    def evaluate_variables(self, t: float, levels: Mapping[str, float],
                           previous: Mapping[str, float] | None = None) -> dict[str, float]:
        if self._var_order is None:
            report = self.validate()
            if not report.ok:
                raise UnvalidatedModelError(report)
        values: dict[str, float] = {}
        prev = previous if previous is not None else {}
        for vid in self._var_order:
            definition = self.variable_by_id[vid].definition
            if callable(definition):
                ctx = VarContext(time=t, levels=levels, variables=values, previous=prev)
                values[vid] = float(definition(ctx))
            else:
                values[vid] = float(definition)
        return values

    def run(self, config: SimConfig) -> RunResult:
        """Integrate over the whole horizon and record trajectories.

        Raises UnvalidatedModelError if validation reports defects and
        NonFiniteStateError if any level or rate leaves the reals.
        """
        report = self.validate()
        if not report.ok:
            raise UnvalidatedModelError(report)

        dt = config.dt
        n_steps = config.n_steps
        streams = make_streams(self, config.seed)
        levels = self.initial_levels()
        variables = self.evaluate_variables(0.0, levels)

        stock_ids = [s.id for s in self.stocks]
        flow_ids = [f.id for f in self.flows]
        var_ids = list(self._var_order or ())

        times = [0.0]
        stock_rows = {sid: [levels[sid]] for sid in stock_ids}
        flow_rows = {fid: [0.0] for fid in flow_ids}
        var_rows = {vid: [variables[vid]] for vid in var_ids}
        pending_flow = dict.fromkeys(flow_ids, 0.0)

        for i in range(n_steps):
            t = i * dt
            levels, amounts, variables = _advance(self, levels, t, dt, streams, variables)
            for fid, amount in amounts.items():
                pending_flow[fid] += amount
            for sid, level in levels.items():
                if not np.isfinite(level):
                    raise NonFiniteStateError((i + 1) * dt, sid)
            if (i + 1) % config.record_every == 0 or i + 1 == n_steps:
                times.append((i + 1) * dt)
                for sid in stock_ids:
                    stock_rows[sid].append(levels[sid])
                for fid in flow_ids:
                    flow_rows[fid].append(pending_flow[fid])
                    pending_flow[fid] = 0.0
                for vid in var_ids:
                    var_rows[vid].append(variables[vid])

        return RunResult(
            times=np.asarray(times),
            stock_series={sid: np.asarray(rows) for sid, rows in stock_rows.items()},
            flow_series={fid: np.asarray(rows) for fid, rows in flow_rows.items()},
            variable_series={vid: np.asarray(rows) for vid, rows in var_rows.items()},
        )


def make_streams(model: Model, seed: int) -> dict[str, np.random.Generator]:
    """One generator per stochastic flow, keyed by flow id."""
    keys = [f.id for f in model.flows if isinstance(f.rate, (PoissonRate, NormalFraction))]
    return split_streams(seed, keys)


def validate_model(model: Model) -> ValidationReport:
    """Functional alias for :meth:`Model.validate`."""
    return model.validate()


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def _requested_amount(flow: Flow, t: float, dt: float, levels: Mapping[str, float],
                      variables: Mapping[str, float],
                      streams: Mapping[str, np.random.Generator]) -> float:
    rate = flow.rate
    if isinstance(rate, Constant):
        return rate.value * dt
    if isinstance(rate, FractionOfStock):
        return levels[rate.stock] * (rate.percent / 100.0) * dt
    if isinstance(rate, PoissonRate):
        # integer arrivals per step; the draw happens every step regardless of
        # later clamping so streams stay aligned
        return float(sample_poisson(streams[flow.id], rate.intensity * dt))
    if isinstance(rate, NormalFraction):
        pct = sample_truncated_normal(streams[flow.id], rate.mu, rate.sigma, rate.lo, rate.hi)
        return levels[rate.stock] * (pct / 100.0) * dt
    if isinstance(rate, Expression):
        value = float(rate.fn(t, levels, variables))
        if not np.isfinite(value):
            raise NonFiniteStateError(t, flow.id)
        return max(value, 0.0) * dt
    raise TypeError(f"unknown rate spec {rate!r}")


def _advance(model: Model, levels: dict[str, float], t: float, dt: float,
             streams: Mapping[str, np.random.Generator],
             variables: Mapping[str, float]) -> tuple[dict[str, float], dict[str, float], dict[str, float]]:
    """One integration step. Returns (new levels, realized amounts, new variables)."""
    requested = {
        flow.id: _requested_amount(flow, t, dt, levels, variables, streams)
        for flow in model.flows
    }

    outflows: dict[str, list[Flow]] = {}
    inflows: dict[str, list[Flow]] = {}
    for flow in model.flows:
        if flow.source is not BOUNDARY:
            outflows.setdefault(flow.source, []).append(flow)
        if flow.target is not BOUNDARY:
            inflows.setdefault(flow.target, []).append(flow)

    # Proportional outflow clamping: iterate because a clamped upstream flow
    # shrinks a downstream stock's inflow, which may trigger its clamp too.
    scale = dict.fromkeys(levels, 1.0)
    for _ in range(_CLAMP_ITERATIONS):
        changed = False
        for sid, flows_out in outflows.items():
            out_req = sum(requested[f.id] for f in flows_out)
            if out_req <= 0.0:
                continue
            inflow = sum(
                requested[f.id] * (scale[f.source] if f.source is not BOUNDARY else 1.0)
                for f in inflows.get(sid, ())
            )
            available = levels[sid] + inflow
            new_scale = 1.0 if out_req <= available else max(available, 0.0) / out_req
            if new_scale < scale[sid] - 1e-15:
                scale[sid] = new_scale
                changed = True
        if not changed:
            break

    realized = {
        flow.id: requested[flow.id] * (scale[flow.source] if flow.source is not BOUNDARY else 1.0)
        for flow in model.flows
    }

    new_levels = dict(levels)
    for flow in model.flows:
        amount = realized[flow.id]
        if flow.source is not BOUNDARY:
            new_levels[flow.source] -= amount
        if flow.target is not BOUNDARY:
            new_levels[flow.target] += amount
    for sid, level in new_levels.items():
        if level < 0.0:
            # only float residue from an exact-zero clamp lands here
            new_levels[sid] = 0.0

    new_variables = model.evaluate_variables(t + dt, new_levels, previous=variables)
    return new_levels, realized, new_variables


def step(model: Model, levels: Mapping[str, float], t: float,
         streams: Mapping[str, np.random.Generator], dt: float = 1.0,
         variables: Mapping[str, float] | None = None) -> tuple[dict[str, float], dict[str, float]]:
    """Advance a validated model by one step from explicit state.

    Returns the new stock levels and the realized (post-clamp) per-flow
    amounts. ``streams`` should come from :func:`make_streams`.
    """
    report = model.validate()
    if not report.ok:
        raise UnvalidatedModelError(report)
    for sid, level in levels.items():
        if level < 0:
            raise ValueError(f"stock {sid!r} has negative level {level!r}")
    current_vars = variables if variables is not None else model.evaluate_variables(t, levels)
    new_levels, realized, _ = _advance(model, dict(levels), t, dt, streams, current_vars)
    for sid, level in new_levels.items():
        if not np.isfinite(level):
            raise NonFiniteStateError(t + dt, sid)
    return new_levels, realized
