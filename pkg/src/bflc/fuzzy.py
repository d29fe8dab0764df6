"""Mamdani inference over three triangular terms per variable.

Each variable has seven ordered breakpoints ``p0..p6``: "low" is the
triangle ``(p0, p0, p2)``, "medium" is ``(p1, p3, p5)`` and "high" is
``(p4, p6, p6)``.  Rules combine inputs with ``min``, clip the output term at
the rule strength, aggregate with ``max`` and defuzzify by the centroid of
the aggregate, integrated exactly.

Inputs are always ordered ``(e, h, w)``: daily mean electricity price,
hydrogen price and wind capacity factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

LABELS = ("low", "medium", "high")
INPUTS = ("e", "h", "w")
VARIABLES = ("w", "e", "h", "m2")  # file row order
_GAUSS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


@dataclass(frozen=True)
class MembershipParams:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) != 7:
            raise ValidationError(f"expected 7 breakpoints, got {len(p)}")
        if not all(np.isfinite(p)):
            raise ValidationError("breakpoints must be finite")
        if any(b < a for a, b in zip(p, p[1:])):
            raise ValidationError(f"breakpoints must be non-decreasing: {p}")
        object.__setattr__(self, "p", p)

    @property
    def triangles(self):
        p = self.p
        return ((p[0], p[0], p[2]), (p[1], p[3], p[5]), (p[4], p[6], p[6]))

    @property
    def peaks(self):
        return (self.p[0], self.p[3], self.p[6])

    def scaled(self, factor: float) -> "MembershipParams":
        return MembershipParams(tuple(factor * x for x in self.p))


def triangle(x, a: float, b: float, c: float):
    """Triangular membership; zero-width sides act as steps with value 1 at ``b``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rise = np.where(b > a, (x - a) / (b - a), np.where(x >= b, 1.0, 0.0))
        fall = np.where(c > b, (c - x) / (c - b), np.where(x <= b, 1.0, 0.0))
    return np.clip(np.where(x <= b, rise, fall), 0.0, 1.0)


def membership(x, mp: MembershipParams):
    """Degrees of ``(low, medium, high)``. Values outside ``[p0, p6]`` are clamped.

    A scalar ``x`` returns a tuple of floats; an array returns shape ``(..., 3)``.
    """
    arr = np.clip(np.asarray(x, dtype=float), mp.p[0], mp.p[6])
    out = np.stack([triangle(arr, *tri) for tri in mp.triangles], axis=-1)
    if out.ndim == 1:
        return tuple(float(v) for v in out)
    return out


@dataclass(frozen=True)
class FuzzyModel:
    """Membership parameters for the three inputs and the output plus 27 rules.

    ``rules[i, j, k]`` is the output label index for ``e`` label ``i``,
    ``h`` label ``j`` and ``w`` label ``k``.
    """

    mf_e: MembershipParams
    mf_h: MembershipParams
    mf_w: MembershipParams
    mf_out: MembershipParams
    rules: np.ndarray

    def __post_init__(self):
        rules = np.asarray(self.rules)
        if rules.shape != (3, 3, 3):
            raise ValidationError(f"rule table must have shape (3, 3, 3), got {rules.shape}")
        if not np.all(np.isin(rules, (0, 1, 2))):
            raise ValidationError("rule outputs must be label indices 0, 1 or 2")
        rules = rules.astype(np.int8)
        rules.setflags(write=False)
        object.__setattr__(self, "rules", rules)

    def rule_rows(self):
        """Rules in table order: ``w`` slowest, then ``e``, then ``h``."""
        for k, i, j in itertools.product(range(3), repeat=3):
            yield (LABELS[i], LABELS[j], LABELS[k], LABELS[self.rules[i, j, k]])

    def __eq__(self, other):
        if not isinstance(other, FuzzyModel):
            return NotImplemented
        return (
            (self.mf_e, self.mf_h, self.mf_w, self.mf_out) == (other.mf_e, other.mf_h, other.mf_w, other.mf_out)
            and np.array_equal(self.rules, other.rules)
        )

    __hash__ = None


def _fixed_breakpoints(p):
    """Breakpoints and pairwise crossings of the output triangles' sloped edges."""
    lines = []
    for a, b, c in ((p[0], p[0], p[2]), (p[1], p[3], p[5]), (p[4], p[6], p[6])):
        if b > a:
            lines.append((a, b, 0.0, 1.0))
        if c > b:
            lines.append((b, c, 1.0, 0.0))
    points = list(p)
    for (x0, x1, y0, y1), (u0, u1, v0, v1) in itertools.combinations(lines, 2):
        s1 = (y1 - y0) / (x1 - x0)
        s2 = (v1 - v0) / (u1 - u0)
        if s1 == s2:
            continue
        # y0 + s1 (x - x0) = v0 + s2 (x - u0)
        points.append((v0 - y0 + s1 * x0 - s2 * u0) / (s1 - s2))
    return np.array(points)


def aggregate(y, mp: MembershipParams, alphas):
    """Clipped-and-maxed output set evaluated at ``y`` for each row of ``alphas``.

    ``y`` has shape ``(n, m)``, ``alphas`` shape ``(n, 3)``.
    """
    out = np.zeros(np.shape(y))
    for k, tri in enumerate(mp.triangles):
        out = np.maximum(out, np.minimum(alphas[:, k : k + 1], triangle(y, *tri)))
    return out


def centroid(mp: MembershipParams, alphas) -> np.ndarray:
    """Exact centroid of the aggregated output for each row of strengths ``alphas``.

    Between consecutive breakpoints (triangle vertices, clip levels and edge
    crossings) the aggregate is linear, so two-point Gauss quadrature is exact
    for both area and first moment.  Rows with no activation yield ``p0``;
    rows whose active sets all have zero width yield the spike locations.
    """
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    p = mp.p
    lo, hi = p[0], p[6]
    n = alphas.shape[0]
    if hi <= lo:
        return np.full(n, lo)
    if lo != 0.0 or hi != 1.0:
        # work on [0, 1]; keeps areas representable for tiny or huge domains
        span = hi - lo
        unit = MembershipParams(tuple(min((v - lo) / span, 1.0) for v in p))
        return np.clip(lo + span * centroid(unit, alphas), lo, hi)
    fixed = _fixed_breakpoints(p)
    moving = []
    for a, b, c in mp.triangles:
        for j in range(3):
            lvl = alphas[:, j]
            moving.append(a + lvl * (b - a))
            moving.append(c - lvl * (c - b))
    pts = np.concatenate([np.broadcast_to(fixed, (n, fixed.size)), np.column_stack(moving)], axis=1)
    pts = np.sort(np.clip(pts, lo, hi), axis=1)
    left, right = pts[:, :-1], pts[:, 1:]
    width = right - left
    area = np.zeros(n)
    moment = np.zeros(n)
    for g in _GAUSS:
        y = left + g * width
        f = aggregate(y, mp, alphas)
        area += 0.5 * np.sum(width * f, axis=1)
        moment += 0.5 * np.sum(width * y * f, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(area > 0, moment / area, _spike_limit(mp, alphas, lo))
    return np.clip(out, lo, hi)


def _spike_limit(mp: MembershipParams, alphas, fallback) -> np.ndarray:
    # Zero area with non-zero strength means every active set is a zero-width
    # spike; use the limit of equally narrow triangles shrinking onto them.
    peaks = np.array([b for _, b, _ in mp.triangles])
    weight = alphas * (2.0 - alphas)
    total = weight.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(total > 0, weight @ peaks / total, fallback)


def firing_strengths(model: FuzzyModel, X) -> np.ndarray:
    """Per-output-label strength ``(n, 3)``: max over rules of min input degree."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    me = membership(X[:, 0], model.mf_e)
    mh = membership(X[:, 1], model.mf_h)
    mw = membership(X[:, 2], model.mf_w)
    strength = np.minimum(np.minimum(me[:, :, None, None], mh[:, None, :, None]), mw[:, None, None, :])
    strength = strength.reshape(len(X), 27)
    flat = model.rules.reshape(27)
    alphas = np.zeros((len(X), 3))
    for label in range(3):
        mask = flat == label
        if mask.any():
            alphas[:, label] = strength[:, mask].max(axis=1)
    return alphas


def infer_batch(model: FuzzyModel, X) -> np.ndarray:
    """Crisp output for each row ``(e_d, h_d, w_d)`` of ``X``."""
    return centroid(model.mf_out, firing_strengths(model, X))


def infer(model: FuzzyModel, e_d: float, h_d: float, w_d: float) -> float:
    return float(infer_batch(model, [[e_d, h_d, w_d]])[0])


def rule_degrees(mfs, X, y) -> np.ndarray:
    """Cumulative degree of each of the 81 candidate rules, shape ``(3, 3, 3, 3)``.

    The degree of a rule for one example is the product of the example's
    memberships in the rule's three input terms and its output term.
    """
    mf_e, mf_h, mf_w, mf_out = mfs
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    return np.einsum(
        "na,nb,nc,no->abco",
        membership(X[:, 0], mf_e),
        membership(X[:, 1], mf_h),
        membership(X[:, 2], mf_w),
        membership(y, mf_out),
    )


def learn_rules(mfs, X, y) -> FuzzyModel:
    """Keep, per input combination, the output term with the largest cumulative
    degree over the examples. Ties resolve to the lower term."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) == 0:
        raise ValidationError("at least one example is required")
    degrees = rule_degrees(mfs, X, y)
    return FuzzyModel(*mfs, rules=np.argmax(degrees, axis=-1))


# -- model file -------------------------------------------------------------

_HEADER = "# bflc fuzzy model v1"


def dumps(model: FuzzyModel) -> str:
    lines = [_HEADER, "[parameters]", "var p0 p1 p2 p3 p4 p5 p6"]
    params = {"w": model.mf_w, "e": model.mf_e, "h": model.mf_h, "m2": model.mf_out}
    for name in VARIABLES:
        lines.append(" ".join([name, *(repr(v) for v in params[name].p)]))
    lines += ["[rules]", "rule e h w m2"]
    for n, row in enumerate(model.rule_rows(), start=1):
        lines.append(" ".join([str(n), *row]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> FuzzyModel:
    section = None
    params = {}
    rules = np.full((3, 3, 3), -1)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("[parameters]", "[rules]"):
            section = line
            continue
        parts = line.split()
        if parts[0] in ("var", "rule"):
            continue
        try:
            if section == "[parameters]":
                if parts[0] not in VARIABLES or len(parts) != 8:
                    raise ValueError
                params[parts[0]] = MembershipParams(tuple(float(v) for v in parts[1:]))
            elif section == "[rules]":
                if len(parts) != 5:
                    raise ValueError
                i, j, k, o = (LABELS.index(v) for v in parts[1:])
                if rules[i, j, k] != -1:
                    raise ValidationError(f"line {lineno}: duplicate rule for {parts[1:4]}")
                rules[i, j, k] = o
            else:
                raise ValueError
        except ValidationError:
            raise
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}") from None
    missing = [v for v in VARIABLES if v not in params]
    if missing:
        raise ValidationError(f"missing parameter rows: {missing}")
    if (rules < 0).any():
        raise ValidationError(f"rule base incomplete: {int((rules < 0).sum())} combinations missing")
    return FuzzyModel(params["e"], params["h"], params["w"], params["m2"], rules)


def save_model(model: FuzzyModel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path) -> FuzzyModel:
    return loads(Path(path).read_text(encoding="utf-8"))


def table_model() -> FuzzyModel:
    """Membership parameters and rule base of the published trained controller."""
    rules = np.zeros((3, 3, 3), dtype=int)
    rules[0, 0, 1] = 2
    rules[0, 0, 2] = 2
    return FuzzyModel(
        mf_e=MembershipParams((-11.76, 118.85, 413.26, 417.15, 519.96, 569.89, 695.09)),
        mf_h=MembershipParams((1.04, 1.65, 3.04, 3.24, 3.71, 4.36, 5.0)),
        mf_w=MembershipParams((0.01, 0.22, 0.57, 0.60, 0.60, 0.87, 0.99)),
        mf_out=MembershipParams((0.0, 4.90, 4.90, 10.34, 11.52, 13.14, 17.36)),
        rules=rules,
    )
