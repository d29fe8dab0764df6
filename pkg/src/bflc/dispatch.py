"""Revenue-maximising hourly dispatch with a minimum HPA delivery.

For every hour the wind energy ``g1`` is fixed.  Each kilogram of hydrogen
capacity in hour ``t`` can earn ``e_t * specific_energy`` (leave the energy
on the grid), ``h_t`` (produce and sell on the spot market) or nothing
(produce and deliver to the HPA).  Delivering one kilogram to the HPA in
hour ``t`` therefore costs ``max(e_t * specific_energy, h_t)``, so the
problem is a fractional knapsack: fill the contract from the cheapest hours
first.  The cheapest price not fully used is the shadow price of the
contract constraint.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse

from .errors import InfeasibleError, ValidationError
from .plant import Flows, PlantSpec, hourly_h2_capacity, wind_energy
from .timeseries import HourlySeries

FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class DispatchProblem:
    e: np.ndarray
    h: np.ndarray
    w: np.ndarray
    hpa_min: float
    spec: PlantSpec

    def __post_init__(self):
        for name in ("e", "h", "w"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.e)
        if n == 0 or len(self.h) != n or len(self.w) != n:
            raise ValidationError("e, h and w must be non-empty and of equal length")
        if not self.hpa_min >= 0:
            raise ValidationError(f"hpa_min must be >= 0, got {self.hpa_min}")

    @property
    def horizon(self) -> int:
        return len(self.e)

    def attainable(self) -> float:
        return float(hourly_h2_capacity(self.w, self.spec).sum())


@dataclass(frozen=True)
class DispatchSolution:
    flows: Flows
    revenue: float
    hpa_delivered: float
    dual_price: float

    def daily_hpa(self) -> np.ndarray:
        return self.flows.m2.reshape(-1, 24).sum(axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("hour", "g1", "g2", "g3", "m1", "m2", "m3"))
            f = self.flows
            for t in range(len(f)):
                writer.writerow((t, *(repr(float(x[t])) for x in (f.g1, f.g2, f.g3, f.m1, f.m2, f.m3))))


def read_dispatch_csv(path) -> Flows:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return Flows(*(np.array([float(r[k]) for r in rows]) for k in ("g1", "g2", "g3", "m1", "m2", "m3")))


def _infeasible(p: DispatchProblem, cap: float):
    return InfeasibleError(
        f"HPA minimum {p.hpa_min:.6f} kg exceeds attainable production {cap:.6f} kg",
        max_attainable=cap,
    )


def solve(p: DispatchProblem) -> DispatchSolution:
    """Exact optimum of the dispatch problem by a breakpoint search on the dual price."""
    spec = p.spec
    s = spec.specific_energy
    g1 = wind_energy(p.w, spec) if p.horizon else np.zeros(0)
    g1 = np.asarray(g1, dtype=float)
    cap = np.minimum(g1, spec.electrolyser_capacity) / s
    total = cap.sum()
    if p.hpa_min > total + FEASIBILITY_TOL:
        raise _infeasible(p, float(total))
    target = min(p.hpa_min, total)

    grid_value = p.e * s
    cost = np.maximum(grid_value, p.h)
    produce_for_market = p.h > grid_value

    usable = cap > 0
    # hours where the HPA beats both markets are always delivered
    free = usable & (cost < 0)
    base = cap[free].sum()
    if base >= target:
        price = 0.0
        full = free
        marginal = usable & (cost == 0)
        frac = 0.0
    else:
        idx = np.flatnonzero(usable & (cost >= 0))
        order = idx[np.argsort(cost[idx], kind="stable")]
        levels = cost[order]
        reach = base + np.cumsum(cap[order])
        # include every hour tied at the marginal price so rationing is symmetric
        k = int(np.searchsorted(reach, target - 1e-12 * max(1.0, target), side="left"))
        k = min(k, len(order) - 1)
        price = float(levels[k])
        full = usable & (cost < price)
        marginal = usable & (cost == price)
        below = cap[full].sum()
        tied = cap[marginal].sum()
        frac = min(1.0, max(0.0, (target - below) / tied)) if tied > 0 else 0.0

    m2 = np.where(full, cap, 0.0)
    m2 = np.where(marginal, frac * cap, m2)
    rest = cap - m2
    m1 = m2 + np.where(produce_for_market, rest, 0.0)
    m1 = np.where(full, cap, m1)
    m3 = m1 - m2
    g3 = m1 * s
    g2 = g1 - g3
    flows = Flows(g1=g1, g2=g2, g3=g3, m1=m1, m2=m2, m3=m3)
    delivered = float(m2.sum())
    dual = 0.0 if delivered > p.hpa_min + FEASIBILITY_TOL else max(price, 0.0)
    return DispatchSolution(flows, flows.revenue(p.e, p.h), delivered, dual)


def solve_annual_benchmark(s: HourlySeries, spec: PlantSpec) -> DispatchSolution:
    """Perfect-foresight dispatch of a whole contract period against ``spec.hpa_total``."""
    return solve(DispatchProblem(s.e, s.h, s.w, spec.hpa_total, spec))


def lp_oracle(p: DispatchProblem) -> DispatchSolution:
    """Same problem as :func:`solve`, posed as a generic LP for the HiGHS solver.

    Variables per hour are ``(g2, g3, m1, m2, m3)``; balances are explicit
    equality rows.  Intended for verification only.
    """
    n = p.horizon
    if n > 8760 * 2:
        raise ValidationError("lp_oracle is meant for horizons up to one (leap) year")
    spec = p.spec
    g1 = np.asarray(wind_energy(p.w, spec), dtype=float)
    nv = 5 * n
    G2, G3, M1, M2, M3 = (np.arange(n) * 5 + k for k in range(5))

    c = np.zeros(nv)
    c[G2] = -p.e
    c[M3] = -p.h

    rows = np.arange(n)
    ones = np.ones(n)
    energy = sparse.coo_matrix((np.r_[ones, ones], (np.r_[rows, rows], np.r_[G2, G3])), shape=(n, nv))
    convert = sparse.coo_matrix(
        (np.r_[ones, -ones / spec.specific_energy], (np.r_[rows, rows], np.r_[M1, G3])), shape=(n, nv)
    )
    mass = sparse.coo_matrix(
        (np.r_[ones, -ones, -ones], (np.r_[rows, rows, rows], np.r_[M1, M2, M3])), shape=(n, nv)
    )
    A_eq = sparse.vstack([energy, convert, mass]).tocsr()
    b_eq = np.r_[g1, np.zeros(2 * n)]
    A_ub = sparse.csr_matrix((-np.ones(n), (np.zeros(n, dtype=int), M2)), shape=(1, nv))
    b_ub = np.array([-p.hpa_min])
    upper = np.full(nv, np.inf)
    upper[G3] = spec.electrolyser_capacity
    bounds = np.column_stack([np.zeros(nv), upper])

    res = optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        best = optimize.linprog(
            np.where(np.isin(np.arange(nv), M2), -1.0, 0.0),
            A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
        )
        raise _infeasible(p, float(-best.fun) if best.status == 0 else float("nan"))
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")

    x = res.x
    g3 = np.clip(x[G3], 0.0, spec.electrolyser_capacity)
    m2 = np.clip(x[M2], 0.0, None)
    m1 = g3 / spec.specific_energy
    m2 = np.minimum(m2, m1)
    flows = Flows(g1=g1, g2=g1 - g3, g3=g3, m1=m1, m2=m2, m3=m1 - m2)
    dual = float(-res.ineqlin.marginals[0])
    return DispatchSolution(flows, float(-res.fun), float(x[M2].sum()), max(dual, 0.0))
