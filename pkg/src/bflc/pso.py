"""Particle swarm search over membership breakpoints.

The decision vector holds the free breakpoints ``p1..p5`` of the ``e``,
``h``, ``w`` and output variables (20 values).  Each candidate is sorted and
clamped per variable, the rule base is re-learned from the exemplars, and
the objective is the squared daily error plus the squared error of the
total delivered amount.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .fuzzy import FuzzyModel, MembershipParams, infer_batch, learn_rules

N_FREE = 5
N_VARS = 4


@dataclass(frozen=True)
class PsoConfig:
    particles: int = 30
    max_iters: int = 100
    inertia: float = 0.5
    cognitive: float = 1.5
    social: float = 1.5
    seed: int = 0
    bounds: np.ndarray | None = None
    tol: float = 1e-9
    patience: int = 10
    init: np.ndarray | None = None

    def __post_init__(self):
        if self.particles < 2:
            raise ValidationError("particles must be >= 2")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 0] > b[:, 1]):
                raise ValidationError("bounds must be an (n, 2) array with lo <= hi")


@dataclass(frozen=True)
class TrainingResult:
    model: FuzzyModel
    objective: float
    iterations_run: int
    objective_trace: list = field(default_factory=list)
    best_vector: np.ndarray | None = None


def pso_minimize(f, cfg: PsoConfig, bounds=None, return_trace: bool = False):
    """Global-best particle swarm minimisation of ``f`` over a box.

    Positions are clamped to the box and velocities to its width.  Rows of
    ``cfg.init`` replace the first random starting positions.  The search
    stops after ``cfg.max_iters`` iterations or once the best value has
    improved by less than ``cfg.tol`` over ``cfg.patience`` iterations.
    Returns ``(best_vector, best_value)``, plus the per-iteration best values
    when ``return_trace`` is set.
    """
    box = np.asarray(cfg.bounds if bounds is None else bounds, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 0] > box[:, 1]):
        raise ValidationError("bounds must be an (n, 2) array with lo <= hi")
    lo, hi = box[:, 0], box[:, 1]
    span = hi - lo
    rng = np.random.default_rng(cfg.seed)
    n, dim = cfg.particles, len(lo)

    x = lo + rng.random((n, dim)) * span
    if cfg.init is not None:
        start = np.atleast_2d(np.asarray(cfg.init, dtype=float))
        if start.shape[1] != dim or len(start) > n:
            raise ValidationError(f"init must have at most {n} rows of length {dim}")
        x[: len(start)] = np.clip(start, lo, hi)
    v = (rng.random((n, dim)) * 2 - 1) * span
    fx = np.array([f(xi) for xi in x], dtype=float)
    best_x, best_f = x.copy(), fx.copy()
    g = int(np.argmin(best_f))
    gx, gf = best_x[g].copy(), float(best_f[g])

    trace = []
    stale = 0
    for _ in range(cfg.max_iters):
        rp = rng.random((n, dim))
        rg = rng.random((n, dim))
        v = cfg.inertia * v + cfg.cognitive * rp * (best_x - x) + cfg.social * rg * (gx - x)
        v = np.clip(v, -span, span)
        x = np.clip(x + v, lo, hi)
        fx = np.array([f(xi) for xi in x], dtype=float)
        improved = fx < best_f
        best_x[improved] = x[improved]
        best_f[improved] = fx[improved]
        g = int(np.argmin(best_f))
        previous = gf
        if best_f[g] < gf:
            gx, gf = best_x[g].copy(), float(best_f[g])
        trace.append(gf)
        stale = stale + 1 if previous - gf < cfg.tol else 0
        if stale >= cfg.patience:
            break
    if return_trace:
        return gx, gf, trace
    return gx, gf


def decision_bounds(ranges) -> np.ndarray:
    """Box for the 20-dimensional decision vector from per-variable ``(p0, p6)``."""
    ranges = np.asarray(ranges, dtype=float)
    if ranges.shape != (N_VARS, 2) or not np.all(np.isfinite(ranges)):
        raise ValidationError("ranges must be four finite (p0, p6) pairs ordered e, h, w, output")
    if np.any(ranges[:, 0] > ranges[:, 1]):
        raise ValidationError("each range needs p0 <= p6")
    return np.repeat(ranges, N_FREE, axis=0)


def params_from_vector(vector, ranges) -> tuple[MembershipParams, ...]:
    """Sorted, clamped breakpoints for ``(e, h, w, output)``."""
    vector = np.asarray(vector, dtype=float).reshape(N_VARS, N_FREE)
    out = []
    for (p0, p6), free in zip(np.asarray(ranges, dtype=float), vector):
        inner = np.sort(np.clip(free, p0, p6))
        out.append(MembershipParams((p0, *inner, p6)))
    return tuple(out)


def vector_from_params(mfs) -> np.ndarray:
    return np.concatenate([mp.p[1:6] for mp in mfs])


def objective(pred, target) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    return float(np.sum((target - pred) ** 2) + (target.sum() - pred.sum()) ** 2)


def evaluate(vector, ranges, X, y):
    """Build the model for one candidate vector and score it on ``(X, y)``."""
    mfs = params_from_vector(vector, ranges)
    model = learn_rules(mfs, X, y)
    return model, objective(infer_batch(model, X), y)


def data_ranges(X, y_range) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.array([[X[:, 0].min(), X[:, 0].max()],
                     [X[:, 1].min(), X[:, 1].max()],
                     [X[:, 2].min(), X[:, 2].max()],
                     list(y_range)])


def train(X, y, ranges, cfg: PsoConfig = PsoConfig()) -> TrainingResult:
    """Fit breakpoints and rules to exemplars ``X`` (rows ``e_d, h_d, w_d``) and
    targets ``y`` (kg/h)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(X) == 0 or X.shape[1] != 3 or len(y) != len(X):
        raise ValidationError("need a non-empty (n, 3) exemplar matrix and n targets")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValidationError("targets must be finite and >= 0")
    box = decision_bounds(ranges) if cfg.bounds is None else np.asarray(cfg.bounds, dtype=float)

    def f(vec):
        return evaluate(vec, ranges, X, y)[1]

    best, _, trace = pso_minimize(f, cfg, bounds=box, return_trace=True)
    model, value = evaluate(best, ranges, X, y)
    return TrainingResult(model, value, len(trace), trace, best)
