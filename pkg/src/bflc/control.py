"""Daily HPA targets and the sequential year simulation.

Every day the controller sees only that day's 24 hourly values, sets a
delivery target ``M2_bar`` for the HPA, and the daily dispatch solves the
hourly flows with ``M2_bar`` as a minimum delivery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .bounding import BoundEnvelope, Trajectory, clamp_target
from .dispatch import DispatchProblem, DispatchSolution, solve, solve_annual_benchmark
from .errors import InfeasibleError, ValidationError
from .fuzzy import FuzzyModel, infer
from .plant import Flows, PlantSpec, max_daily_hydrogen
from .timeseries import DailyMeans, HourlySeries, daily_means

SHORTFALL_TOL = 1e-6


def contract_volume(annual_max_h2, fraction: float = 0.40) -> float:
    """HPA volume in kg: ``fraction`` of the mean annual maximum production
    (given in tonnes), rounded to 0.1 t."""
    values = [float(v) for v in annual_max_h2]
    if not values:
        raise ValidationError("need at least one annual maximum production value")
    if not 0 < fraction <= 1:
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction}")
    tonnes = round(fraction * sum(values) / len(values), 1)
    return tonnes * 1000.0


@dataclass
class ContractState:
    """Delivery history; ``day`` is the 1-based day about to be decided."""

    delivered: list = field(default_factory=list)

    @property
    def day(self) -> int:
        return len(self.delivered) + 1

    @property
    def cumulative(self) -> float:
        return float(sum(self.delivered))

    def record(self, kg: float) -> None:
        if kg < 0:
            raise ValidationError(f"delivered mass must be >= 0, got {kg}")
        self.delivered.append(float(kg))


def steady_target(state: ContractState, spec: PlantSpec, max_today: float, days: int | None = None) -> float:
    """Even pacing with drift correction: ``min(d * M2*/T - delivered, max_today)``."""
    T = spec.contract_days(days) if days is not None else spec.hpa_days
    if T is None:
        raise ValidationError("contract length unknown: set spec.hpa_days or pass days")
    d = state.day
    if not 1 <= d <= T:
        raise ValidationError(f"day {d} outside contract period 1..{T}")
    unrestricted = d * spec.hpa_total / T - state.cumulative
    return max(min(unrestricted, max_today), 0.0)


def bflc_target(
    model: FuzzyModel,
    means: DailyMeans,
    state: ContractState,
    env: BoundEnvelope,
    max_today: float,
    days: int | None = None,
) -> float:
    """Fuzzy target (kg/h scaled to a day), capped by production, clamped to the envelope.

    ``days`` is the contract length; when it differs from the envelope's
    horizon the day is mapped proportionally onto the envelope.
    """
    rate = infer(model, means.e_d, means.h_d, means.w_d)
    capped = min(24.0 * rate, max_today)
    d = state.day
    if days is not None and days != env.horizon:
        d = d * env.horizon / days
    return clamp_target(state.cumulative, capped, d, env, max_today)


class SteadyController:
    name = "steady"

    def __call__(self, means, state, spec, max_today, days):
        return steady_target(state, spec, max_today, days)


class BflcController:
    name = "bflc"

    def __init__(self, model: FuzzyModel, envelope: BoundEnvelope):
        self.model = model
        self.envelope = envelope

    def __call__(self, means, state, spec, max_today, days):
        if abs(self.envelope.total - spec.hpa_total) > 1e-6 * max(1.0, spec.hpa_total):
            raise ValidationError(
                f"envelope was built for {self.envelope.total} kg, contract is {spec.hpa_total} kg"
            )
        return bflc_target(self.model, means, state, self.envelope, max_today, days)


@dataclass(frozen=True)
class SimulationReport:
    controller_name: str
    year_label: str
    total_revenue: float
    hpa_delivered: float
    daily_targets: np.ndarray
    daily_delivered: np.ndarray
    daily_revenue: np.ndarray
    trajectory: Trajectory
    benchmark_revenue: float
    contract_total: float
    flows: Flows

    @property
    def normalized_revenue(self) -> float:
        if self.benchmark_revenue == 0:
            return float("nan")
        return self.total_revenue / self.benchmark_revenue

    @property
    def contract_shortfall_kg(self) -> float:
        return max(self.contract_total - self.hpa_delivered, 0.0)

    @property
    def contract_met(self) -> bool:
        return self.hpa_delivered >= self.contract_total - SHORTFALL_TOL

    def summary_row(self) -> dict:
        return {
            "controller": self.controller_name,
            "total_revenue_eur": repr(self.total_revenue),
            "hpa_kg": repr(self.hpa_delivered),
            "normalized": repr(self.normalized_revenue),
        }

    def write_summary(self, path) -> None:
        row = self.summary_row()
        row["contract_shortfall_kg"] = repr(self.contract_shortfall_kg)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
            writer.writeheader()
            writer.writerow(row)

    def write_daily(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("day", "target_kg", "delivered_kg", "cumulative_kg", "revenue_eur"))
            cum = self.trajectory.points[1:]
            for d, row in enumerate(zip(self.daily_targets, self.daily_delivered, cum, self.daily_revenue), start=1):
                writer.writerow((d, *(repr(float(v)) for v in row)))


def simulate_year(
    s: HourlySeries,
    spec: PlantSpec,
    controller,
    benchmark_revenue: float | None = None,
) -> SimulationReport:
    """Run ``controller`` day by day over ``s`` with daily dispatch.

    ``controller(means, state, spec, max_today, days)`` returns the day's
    HPA target in kg.  The benchmark revenue used for normalisation is
    computed on the same series unless supplied.
    """
    days = spec.contract_days(s.days)
    if days > s.days:
        raise ValidationError(f"contract spans {days} days but series has {s.days}")
    state = ContractState()
    targets, delivered, revenue, parts = [], [], [], []
    for means in daily_means(s)[:days]:
        hours = s.day(means.day_index)
        max_today = max_daily_hydrogen(s.w[hours], spec)
        target = float(controller(means, state, spec, max_today, days))
        target = min(max(target, 0.0), max_today)
        try:
            sol = solve(DispatchProblem(s.e[hours], s.h[hours], s.w[hours], target, spec))
        except InfeasibleError as exc:
            raise RuntimeError(f"day {means.day_index}: daily dispatch infeasible ({exc})") from exc
        state.record(sol.hpa_delivered)
        targets.append(target)
        delivered.append(sol.hpa_delivered)
        revenue.append(sol.revenue)
        parts.append(sol.flows)

    if benchmark_revenue is None:
        benchmark_revenue = benchmark_for(s, spec, days).revenue
    return SimulationReport(
        controller_name=getattr(controller, "name", type(controller).__name__),
        year_label=s.year_label,
        total_revenue=float(sum(revenue)),
        hpa_delivered=float(sum(delivered)),
        daily_targets=np.array(targets),
        daily_delivered=np.array(delivered),
        daily_revenue=np.array(revenue),
        trajectory=Trajectory.from_daily(delivered),
        benchmark_revenue=float(benchmark_revenue),
        contract_total=spec.hpa_total,
        flows=Flows.concatenate(parts),
    )


def benchmark_for(s: HourlySeries, spec: PlantSpec, days: int | None = None) -> DispatchSolution:
    days = spec.contract_days(s.days) if days is None else days
    if days == s.days:
        return solve_annual_benchmark(s, spec)
    n = 24 * days
    return solve(DispatchProblem(s.e[:n], s.h[:n], s.w[:n], spec.hpa_total, spec))

