"""Independent oracles and scenario builders shared by the test modules."""

import numpy as np

from bflc.plant import PlantSpec
from bflc.timeseries import synth_year

# Price statistics (mean, std in EUR/MWh) used to parameterise synthetic years.
PRICE_STATS = {
    2015: (22.9, 11.1),
    2016: (26.7, 9.8),
    2017: (30.1, 10.7),
    2018: (44.1, 15.1),
    2019: (38.5, 13.2),
    2020: (25.0, 17.4),
    2021: (88.1, 64.8),
    2022: (219.0, 145.5),
    2023: (86.8, 48.8),
}
TRAIN_YEARS = (2017, 2018, 2019, 2020, 2021, 2022)


def training_series():
    return [synth_year(y, year=y, price_mean=PRICE_STATS[y][0], price_std=PRICE_STATS[y][1]) for y in TRAIN_YEARS]


def scenario_series(n=30, base_seed=1000):
    years = sorted(PRICE_STATS)
    out = []
    for k in range(n):
        y = years[k % len(years)]
        out.append(synth_year(base_seed + k, year=y, price_mean=PRICE_STATS[y][0], price_std=PRICE_STATS[y][1]))
    return out


def random_dispatch_inputs(rng, hours):
    e = rng.uniform(-20.0, 300.0, hours)
    h = rng.uniform(1.0, 5.0, hours)
    w = rng.uniform(0.0, 1.0, hours)
    w[rng.random(hours) < 0.1] = 0.0
    return e, h, w


def per_hour_capacity(w, spec=PlantSpec()):
    """Hour-by-hour wind-limited hydrogen, computed with plain Python arithmetic."""
    out = []
    for x in w:
        g1 = x * spec.wind_capacity
        out.append(min(g1, spec.electrolyser_capacity) / spec.specific_energy)
    return out


def tri(x, a, b, c):
    """Triangle via np.interp; zero-width sides become vertical edges at the peak."""
    x = np.asarray(x, dtype=float)
    xs, ys = [a, b, c], [0.0, 1.0, 0.0]
    if b == a:
        xs, ys = [b, c], [1.0, 0.0]
    if c == b:
        xs, ys = ([a, b], [0.0, 1.0]) if b > a else ([b], [1.0])
    if len(xs) == 1:
        return np.where(x == b, 1.0, 0.0)
    y = np.interp(x, xs, ys, left=0.0, right=0.0)
    if b == a:
        y = np.where(x < a, 0.0, y)
    if c == b:
        y = np.where(x > c, 0.0, y)
    return y


def numeric_centroid(p, alphas, n=100_001):
    """Centroid of the clipped-and-max aggregate by the trapezoid rule on a dense grid."""
    lo, span = p[0], p[6] - p[0]
    if span <= 0:
        return lo
    # integrate on [0, 1] so tiny or huge domains keep full relative precision
    p = [(v - lo) / span for v in p]
    tris = ((p[0], p[0], p[2]), (p[1], p[3], p[5]), (p[4], p[6], p[6]))
    y = np.linspace(0.0, 1.0, n)
    agg = np.zeros_like(y)
    for (a, b, c), lvl in zip(tris, alphas):
        agg = np.maximum(agg, np.minimum(tri(y, a, b, c), lvl))
    area = np.trapezoid(agg, y) if hasattr(np, "trapezoid") else np.trapz(agg, y)
    if area <= 0:
        return lo
    moment = np.trapezoid(agg * y, y) if hasattr(np, "trapezoid") else np.trapz(agg * y, y)
    return lo + span * (moment / area)


def random_params(rng, lo=None, hi=None):
    lo = rng.uniform(-50, 50) if lo is None else lo
    hi = lo + rng.uniform(1, 100) if hi is None else hi
    inner = np.sort(rng.uniform(lo, hi, 5))
    return (lo, *inner, hi)


def reaccount_revenue(flows, e, h):
    total = 0.0
    for t in range(len(e)):
        total += e[t] * (flows.g1[t] - flows.g3[t]) + h[t] * flows.m3[t]
    return total
