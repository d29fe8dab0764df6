"""Envelope of acceptable cumulative HPA delivery and the daily clamp onto it.

The envelope is the convex hull of benchmark cumulative-delivery
trajectories: its upper chain caps how fast the contract may be filled and
its lower chain how slowly.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ValidationError
from .plant import PlantSpec, daily_max_hydrogen
from .timeseries import HourlySeries

ENDPOINT_TOL = 1e-6


@dataclass(frozen=True)
class Trajectory:
    """Cumulative kg delivered by the end of each day, index 0 is the start."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValidationError("a trajectory needs at least days 0 and 1")
        if pts[0] != 0:
            raise ValidationError(f"trajectory must start at 0, got {pts[0]}")
        if np.any(np.diff(pts) < -1e-9):
            raise ValidationError("trajectory must be non-decreasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def days(self) -> int:
        return len(self.points) - 1

    @property
    def total(self) -> float:
        return float(self.points[-1])

    @classmethod
    def from_daily(cls, delivered, cap: float | None = None) -> "Trajectory":
        """Cumulate daily deliveries, truncating at ``cap`` when given."""
        cum = np.concatenate([[0.0], np.cumsum(np.asarray(delivered, dtype=float))])
        if cap is not None:
            cum = np.minimum(cum, cap)
        return cls(cum)

    def rescaled(self, days: int) -> "Trajectory":
        """Linear resampling onto ``days`` days (e.g. a leap year onto 365)."""
        grid = np.linspace(0.0, self.days, days + 1)
        return Trajectory(np.interp(grid, np.arange(self.days + 1), self.points))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def monotone_chain(points):
    """Lower and upper hull chains, each ordered by increasing x."""
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts, pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower, upper[::-1]


def _chain_at_vertical_ends(chain, pts, top: bool):
    """Swap chain end vertices for the extreme-y point at that x, so the chain
    is a function of x even when several points share the first/last x."""
    xs = {}
    for x, y in pts:
        xs.setdefault(x, []).append(y)
    pick = max if top else min
    chain = list(chain)
    chain[0] = (chain[0][0], pick(xs[chain[0][0]]))
    chain[-1] = (chain[-1][0], pick(xs[chain[-1][0]]))
    return chain


@dataclass(frozen=True)
class BoundEnvelope:
    lower_x: np.ndarray
    lower_y: np.ndarray
    upper_x: np.ndarray
    upper_y: np.ndarray
    horizon: int
    total: float

    def lower(self, d):
        return np.interp(d, self.lower_x, self.lower_y)

    def upper(self, d):
        return np.interp(d, self.upper_x, self.upper_y)

    def to_csv(self, path) -> None:
        days = np.arange(self.horizon + 1)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("day", "lower_kg", "upper_kg"))
            for d, lo, up in zip(days, self.lower(days), self.upper(days)):
                writer.writerow((int(d), repr(float(lo)), repr(float(up))))

    @classmethod
    def from_csv(cls, path) -> "BoundEnvelope":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"day", "lower_kg", "upper_kg"} <= set(reader.fieldnames):
                raise ValidationError(f"{path}: expected columns day,lower_kg,upper_kg")
            rows = list(reader)
        d = np.array([float(r["day"]) for r in rows])
        lo = np.array([float(r["lower_kg"]) for r in rows])
        up = np.array([float(r["upper_kg"]) for r in rows])
        if len(d) < 2 or np.any(np.diff(d) <= 0) or d[0] != 0:
            raise ValidationError(f"{path}: days must start at 0 and increase")
        return cls(d, lo, d.copy(), up, int(d[-1]), float(up[-1]))


def hull_envelope(trajs, total: float | None = None) -> BoundEnvelope:
    """Convex hull of every ``(day, cumulative)`` point, split into lower and
    upper chains. ``(0, 0)`` and ``(T, total)`` are always included.

    ``total`` is the contract volume; it defaults to the largest trajectory
    end point. End points within tolerance of it are snapped onto it so that
    ``L(T) = U(T) = total`` holds exactly.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValidationError("at least one trajectory is required")
    if len(trajs) == 1:
        warnings.warn("envelope built from a single trajectory; bounds are its convex relaxation", stacklevel=2)
    days = trajs[0].days
    if total is None:
        total = max(t.total for t in trajs)
    total = float(total)
    for k, t in enumerate(trajs):
        if t.days != days:
            raise ValidationError(f"trajectory {k} spans {t.days} days, expected {days}")
        if abs(t.total - total) > ENDPOINT_TOL * max(1.0, abs(total)):
            raise ValidationError(f"trajectory {k} ends at {t.total}, expected {total}")
    x = np.arange(days + 1, dtype=float)
    pts = [(0.0, 0.0), (float(days), total)]
    for t in trajs:
        y = np.minimum(t.points, total)
        y[-1] = total
        pts.extend(zip(x, y))
    lower, upper = monotone_chain(pts)
    lower = _chain_at_vertical_ends(lower, pts, top=False)
    upper = _chain_at_vertical_ends(upper, pts, top=True)
    lx, ly = map(np.array, zip(*lower))
    ux, uy = map(np.array, zip(*upper))
    return BoundEnvelope(lx, ly, ux, uy, days, total)


@dataclass(frozen=True)
class ExtremePaths:
    """Earliest and latest delivery paths; ``*_wind`` ones use wind only, the
    others assume the electrolyser could always run at full capacity."""

    fast_wind: Trajectory
    slow_wind: Trajectory
    t_fw: int
    t_sw: int
    fast: Trajectory
    slow: Trajectory
    t_f: int
    t_s: int


def _fast(daily, total):
    cum = np.minimum(np.concatenate([[0.0], np.cumsum(daily)]), total)
    reached = np.flatnonzero(cum >= total - ENDPOINT_TOL)
    return Trajectory(cum), int(reached[0])


def _slow(daily, total):
    remaining = np.concatenate([np.cumsum(daily[::-1])[::-1], [0.0]])
    cum = np.maximum(total - remaining, 0.0)
    cum[0] = 0.0
    started = np.flatnonzero(cum > 0)
    return Trajectory(cum), int(started[0]) if len(started) else len(daily)


def extreme_paths(s: HourlySeries, spec: PlantSpec) -> ExtremePaths:
    daily = daily_max_hydrogen(s.w, spec)
    total = spec.hpa_total
    if daily.sum() < total - ENDPOINT_TOL:
        raise InfeasibleError(
            f"contract {total} kg exceeds wind-only production {daily.sum():.3f} kg",
            max_attainable=float(daily.sum()),
        )
    full = np.full(len(daily), 24 * spec.max_hourly_h2)
    fw, t_fw = _fast(daily, total)
    sw, t_sw = _slow(daily, total)
    f, t_f = _fast(full, total) if full.sum() >= total else (fw, t_fw)
    sl, t_s = _slow(full, total) if full.sum() >= total else (sw, t_sw)
    return ExtremePaths(fw, sw, t_fw, t_sw, f, sl, t_f, t_s)


def clamp_target(cumulative: float, target: float, day: float, env: BoundEnvelope, max_today: float) -> float:
    """Adjust a daily target so cumulative delivery stays inside the envelope.

    Production limits win over the lower bound: if wind cannot cover the
    gap, the full ``max_today`` is delivered and the shortfall carries over.
    """
    lo = float(env.lower(day)) - cumulative
    up = float(env.upper(day)) - cumulative
    out = min(max(target, lo), up, max_today)
    return max(out, 0.0)
