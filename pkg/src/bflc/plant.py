"""Plant constants and the hourly energy/mass balance shared by all solvers.

A wind farm feeds an electricity bus which splits its output between the
grid (``g2``) and the electrolyser (``g3``).  Hydrogen produced (``m1``) is
split between the HPA offtaker (``m2``) and the spot market (``m3``).  The
hour step is fixed at one hour, so MW capacities are also MWh limits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

ENERGY_TOL = 1e-9
MASS_TOL = 1e-9
CONVERSION_RTOL = 1e-9
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class PlantSpec:
    """Physical plant and contract parameters.

    Capacities in MW, ``specific_energy`` in MWh/kg, ``hpa_total`` in kg.
    ``hpa_days`` of ``None`` means the contract spans the simulated series.
    """

    wind_capacity: float = 2.0
    electrolyser_capacity: float = 1.0
    specific_energy: float = 0.0576
    hpa_total: float = 48000.0
    hpa_days: int | None = None

    def __post_init__(self):
        if not self.wind_capacity > 0:
            raise ValidationError(f"wind_capacity must be > 0, got {self.wind_capacity}")
        if not self.electrolyser_capacity > 0:
            raise ValidationError(
                f"electrolyser_capacity must be > 0, got {self.electrolyser_capacity}"
            )
        if not self.specific_energy > 0:
            raise ValidationError(f"specific_energy must be > 0, got {self.specific_energy}")
        if not self.hpa_total >= 0:
            raise ValidationError(f"hpa_total must be >= 0, got {self.hpa_total}")
        if self.hpa_days is not None and self.hpa_days < 1:
            raise ValidationError(f"hpa_days must be >= 1, got {self.hpa_days}")

    @property
    def max_hourly_h2(self) -> float:
        """Electrolyser-limited production in one hour (kg)."""
        return self.electrolyser_capacity / self.specific_energy

    def contract_days(self, series_days: int) -> int:
        return self.hpa_days if self.hpa_days is not None else series_days

    def with_contract(self, hpa_total: float) -> "PlantSpec":
        return replace(self, hpa_total=float(hpa_total))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_file(cls, path) -> "PlantSpec":
        """Read a JSON object or ``key = value`` lines; unknown keys are rejected."""
        text = Path(path).read_text(encoding="utf-8")
        stripped = text.lstrip()
        if stripped.startswith("{"):
            raw = json.loads(text)
        else:
            raw = {}
            for lineno, line in enumerate(text.splitlines(), start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                raw[key] = value
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict) -> "PlantSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown plant keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in raw.items():
            if key == "hpa_days":
                kwargs[key] = None if value in (None, "", "none", "None") else int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


def wind_energy(w, spec: PlantSpec):
    """Wind energy (MWh) delivered in one hour at capacity factor ``w``."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(~np.isfinite(arr)):
        raise ValidationError("capacity factor must lie in [0, 1]")
    out = arr * spec.wind_capacity
    return float(out) if out.ndim == 0 else out


def hourly_h2_capacity(w, spec: PlantSpec) -> np.ndarray:
    """Maximum hydrogen (kg) producible in each hour from wind alone."""
    g1 = np.asarray(wind_energy(w, spec), dtype=float)
    return np.minimum(g1, spec.electrolyser_capacity) / spec.specific_energy


def max_daily_hydrogen(day_w, spec: PlantSpec) -> float:
    """Largest hydrogen mass (kg) producible over one day of 24 capacity factors."""
    day_w = np.asarray(day_w, dtype=float)
    if day_w.shape != (24,):
        raise ValidationError(f"expected 24 hourly capacity factors, got shape {day_w.shape}")
    return float(hourly_h2_capacity(day_w, spec).sum())


def daily_max_hydrogen(w, spec: PlantSpec) -> np.ndarray:
    """``max_daily_hydrogen`` for every consecutive 24 h block of ``w``."""
    w = np.asarray(w, dtype=float)
    if w.size % 24:
        raise ValidationError("series length must be a multiple of 24")
    return hourly_h2_capacity(w, spec).reshape(-1, 24).sum(axis=1)


class HourFlows(NamedTuple):
    g1: float
    g2: float
    g3: float
    m1: float
    m2: float
    m3: float


@dataclass(frozen=True)
class Flows:
    """Hourly flow arrays (MWh for g*, kg for m*)."""

    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray

    def __len__(self):
        return len(self.g1)

    def hour(self, t: int) -> HourFlows:
        return HourFlows(*(float(getattr(self, name)[t]) for name in HourFlows._fields))

    def revenue(self, e, h) -> float:
        """Market revenue; HPA deliveries earn nothing here."""
        return float(np.dot(e, self.g2) + np.dot(h, self.m3))

    @classmethod
    def concatenate(cls, parts) -> "Flows":
        parts = list(parts)
        return cls(*(np.concatenate([getattr(p, n) for p in parts]) for n in HourFlows._fields))

    def violations(self, spec: PlantSpec) -> list[str]:
        """Describe every balance or bound violated by these flows."""
        problems = []
        checks = {
            "g1 = g2 + g3": np.abs(self.g1 - self.g2 - self.g3) > ENERGY_TOL,
            "m1 = g3 / specific_energy": np.abs(self.m1 - self.g3 / spec.specific_energy)
            > np.maximum(CONVERSION_RTOL * np.abs(self.m1), _TINY),  # subnormals carry no relative precision
            "m1 = m2 + m3": np.abs(self.m1 - self.m2 - self.m3) > MASS_TOL,
            "g3 <= electrolyser capacity": self.g3 > spec.electrolyser_capacity + ENERGY_TOL,
            "g1 <= wind capacity": self.g1 > spec.wind_capacity + ENERGY_TOL,
        }
        for name in HourFlows._fields:
            checks[f"{name} >= 0"] = getattr(self, name) < -ENERGY_TOL
        for label, bad in checks.items():
            if np.any(bad):
                first = int(np.flatnonzero(bad)[0])
                problems.append(f"{label} violated at hour {first} ({int(bad.sum())} hours)")
        return problems

    def check(self, spec: PlantSpec) -> None:
        problems = self.violations(spec)
        if problems:
            raise ValidationError("; ".join(problems))
