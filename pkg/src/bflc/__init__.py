"""Bounded fuzzy logic control for scheduling green-hydrogen deliveries under a
hydrogen purchase agreement (HPA)."""

from .bounding import BoundEnvelope, ExtremePaths, Trajectory, clamp_target, extreme_paths, hull_envelope
from .control import (
    BflcController,
    ContractState,
    SimulationReport,
    SteadyController,
    bflc_target,
    contract_volume,
    simulate_year,
    steady_target,
)
from .dispatch import DispatchProblem, DispatchSolution, lp_oracle, solve, solve_annual_benchmark
from .errors import CsvFormatError, InfeasibleError, OrderingError, ValidationError
from .estimator import FuzzyHpaRegressor
from .fuzzy import FuzzyModel, MembershipParams, infer, learn_rules, membership
from .plant import Flows, HourFlows, PlantSpec, max_daily_hydrogen, wind_energy
from .pso import PsoConfig, TrainingResult, pso_minimize, train
from .timeseries import DailyMeans, HourlySeries, daily_means, load_csv, save_csv, synth_hydrogen_prices

__version__ = "0.1.0"
