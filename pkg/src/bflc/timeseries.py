"""Hourly input series: CSV ingestion, hydrogen-price synthesis, daily means.

CSV schema (UTF-8, decimal point, no thousands separator)::

    timestamp,e_eur_mwh,h_eur_kg,w
    2017-01-01T00:00:00,20.96,2.31,0.74
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import CsvFormatError, OrderingError, ValidationError

COLUMNS = ("timestamp", "e_eur_mwh", "h_eur_kg", "w")
H_FLOOR = 1.0
H_CEIL = 5.0
NOISE = 0.25


@dataclass(frozen=True)
class HourlySeries:
    """Aligned hourly electricity price (EUR/MWh), hydrogen price (EUR/kg) and wind
    capacity factor for one contract year."""

    year_label: str
    e: np.ndarray
    h: np.ndarray
    w: np.ndarray
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("e", "h", "w"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = len(self.e)
        if not (len(self.h) == len(self.w) == n):
            raise ValidationError(
                f"series lengths differ: e={n}, h={len(self.h)}, w={len(self.w)}"
            )
        if n == 0 or n % 24:
            raise ValidationError(f"series length must be a positive multiple of 24, got {n}")
        for name in ("e", "h", "w"):
            bad = ~np.isfinite(getattr(self, name))
            if bad.any():
                raise ValidationError(f"non-finite {name} at row {int(np.flatnonzero(bad)[0]) + 1}")
        bad = (self.w < 0) | (self.w > 1)
        if bad.any():
            row = int(np.flatnonzero(bad)[0]) + 1
            raise ValidationError(f"w={self.w[row - 1]!r} outside [0, 1] at row {row}")
        if self.timestamps is not None:
            stamps = tuple(self.timestamps)
            if len(stamps) != n:
                raise ValidationError("timestamp count does not match series length")
            object.__setattr__(self, "timestamps", stamps)

    @property
    def hours(self) -> int:
        return len(self.e)

    @property
    def days(self) -> int:
        return self.hours // 24

    def day(self, d: int) -> slice:
        """Hour slice of 1-based day ``d``."""
        return slice(24 * (d - 1), 24 * d)


@dataclass(frozen=True)
class DailyMeans:
    e_d: float
    h_d: float
    w_d: float
    day_index: int


def _parse_time(text: str, row: int) -> datetime:
    try:
        return datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        raise CsvFormatError(f"row {row}: bad timestamp {text!r}") from None


def _check_order(stamps, source) -> None:
    prev = None
    for row, text in enumerate(stamps, start=1):
        t = _parse_time(text, row)
        if prev is not None and t <= prev:
            raise OrderingError(f"{source}: timestamp at row {row} ({text}) not after row {row - 1}")
        prev = t


def _read_columns(path, required) -> dict[str, list[str]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise CsvFormatError(f"{path}: missing column(s) {missing}; header is {header}")
        cols = {c: [] for c in required}
        for row in reader:
            for c in required:
                cols[c].append(row[c])
    return cols


def _floats(values, name, source) -> np.ndarray:
    out = np.empty(len(values))
    for i, text in enumerate(values):
        try:
            out[i] = float(text)
        except (TypeError, ValueError):
            raise CsvFormatError(f"{source}: row {i + 1}: bad {name} value {text!r}") from None
    return out


def load_csv(path, year_label: str | None = None) -> HourlySeries:
    """Read and validate an hourly series file. Row numbers in errors are 1-based
    data rows (the header is row 0)."""
    cols = _read_columns(path, COLUMNS)
    stamps = cols["timestamp"]
    _check_order(stamps, path)
    e = _floats(cols["e_eur_mwh"], "e_eur_mwh", path)
    h = _floats(cols["h_eur_kg"], "h_eur_kg", path)
    w = _floats(cols["w"], "w", path)
    if year_label is None:
        year_label = str(_parse_time(stamps[0], 1).year) if stamps else Path(path).stem
    try:
        return HourlySeries(year_label, e, h, w, tuple(stamps))
    except ValidationError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def to_csv_text(s: HourlySeries) -> str:
    stamps = s.timestamps or default_timestamps(int(s.year_label) if s.year_label.isdigit() else 2001, s.hours)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for t, e, h, w in zip(stamps, s.e, s.h, s.w):
        writer.writerow((t, repr(float(e)), repr(float(h)), repr(float(w))))
    return buf.getvalue()


def save_csv(s: HourlySeries, path) -> None:
    Path(path).write_text(to_csv_text(s), encoding="utf-8")


def default_timestamps(year: int, hours: int) -> tuple[str, ...]:
    start = datetime(year, 1, 1)
    return tuple((start + timedelta(hours=k)).isoformat() for k in range(hours))


def load_column_csv(path, column: str) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a two-column ``timestamp,<column>`` file (raw price or wind input)."""
    cols = _read_columns(path, ("timestamp", column))
    _check_order(cols["timestamp"], path)
    return tuple(cols["timestamp"]), _floats(cols[column], column, path)


def synth_hydrogen_prices(e, target_mean: float = 3.0, seed: int | None = 0, noise: float = NOISE) -> np.ndarray:
    """Hydrogen prices derived from electricity prices.

    Prices are scaled so their mean equals ``target_mean``, multiplied by
    independent uniform hourly factors in ``[1 - noise, 1 + noise]`` and
    clipped to [1, 5] EUR/kg.  ``noise=0`` disables the random term.
    """
    e = np.asarray(e, dtype=float)
    if e.size == 0:
        raise ValidationError("electricity price series is empty")
    if not target_mean > 0:
        raise ValidationError(f"target_mean must be > 0, got {target_mean}")
    mean = e.mean()
    if mean == 0 or not np.isfinite(mean):
        raise ValidationError("cannot scale electricity prices with zero mean")
    scaled = e * (target_mean / mean)
    if noise:
        rng = np.random.default_rng(seed)
        scaled = scaled * (1.0 + rng.uniform(-noise, noise, size=e.size))
    return np.clip(scaled, H_FLOOR, H_CEIL)


def daily_means(s: HourlySeries) -> list[DailyMeans]:
    e, h, w = (x.reshape(-1, 24).mean(axis=1) for x in (s.e, s.h, s.w))
    return [DailyMeans(float(a), float(b), float(c), d) for d, (a, b, c) in enumerate(zip(e, h, w), start=1)]


def daily_feature_matrix(s: HourlySeries) -> np.ndarray:
    """Daily means as an ``(days, 3)`` array with columns ``(e_d, h_d, w_d)``."""
    return np.column_stack([x.reshape(-1, 24).mean(axis=1) for x in (s.e, s.h, s.w)])


def synth_inputs(
    seed: int,
    days: int = 365,
    price_mean: float = 40.0,
    price_std: float = 15.0,
    wind_mean: float = 0.46,
):
    """Random but plausible hourly electricity prices and wind capacity factors.

    Wind follows a seasonal cycle with persistent weather regimes (daily AR(1))
    and hourly AR(1) fluctuations.  Prices combine a seasonal level, a daily
    AR(1) component, a diurnal shape and a merit-order effect that pushes
    prices down in windy hours; the result is rescaled to ``price_mean`` and
    ``price_std``.  Only used for demos and tests, not a market model.
    """
    rng = np.random.default_rng(seed)
    hours = 24 * days
    day = np.arange(days)
    season = np.cos(2 * np.pi * (day - 15) / 365.0)

    regime = np.empty(days)
    regime[0] = rng.normal()
    for d in range(1, days):
        regime[d] = 0.75 * regime[d - 1] + np.sqrt(1 - 0.75**2) * rng.normal()
    jitter = np.empty(hours)
    jitter[0] = rng.normal()
    for t in range(1, hours):
        jitter[t] = 0.9 * jitter[t - 1] + np.sqrt(1 - 0.9**2) * rng.normal()
    w = wind_mean + 0.1 * np.repeat(season, 24) + 0.22 * np.repeat(regime, 24) + 0.1 * jitter
    w = np.clip(w, 0.0, 1.0)

    level = np.empty(days)
    level[0] = rng.normal()
    for d in range(1, days):
        level[d] = 0.8 * level[d - 1] + np.sqrt(1 - 0.8**2) * rng.normal()
    hod = np.arange(hours) % 24
    diurnal = 0.5 * np.sin(2 * np.pi * (hod - 6) / 24.0) + 0.3 * np.sin(4 * np.pi * (hod - 3) / 24.0)
    raw = (
        0.4 * np.repeat(season, 24)
        + 0.8 * np.repeat(level, 24)
        + 0.5 * diurnal
        - 1.6 * (w - w.mean())
        + 0.25 * rng.normal(size=hours)
    )
    e = price_mean + price_std * (raw - raw.mean()) / raw.std()
    return e, w


def synth_year(
    seed: int,
    year: int = 2017,
    days: int = 365,
    price_mean: float = 40.0,
    price_std: float = 15.0,
    wind_mean: float = 0.46,
    h_mean: float = 3.0,
) -> HourlySeries:
    e, w = synth_inputs(seed, days=days, price_mean=price_mean, price_std=price_std, wind_mean=wind_mean)
    h = synth_hydrogen_prices(e, h_mean, seed=seed + 1)
    return HourlySeries(str(year), e, h, w, default_timestamps(year, 24 * days))
