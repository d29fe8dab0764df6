import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import pytest

from bflc.bounding import Trajectory, hull_envelope
from bflc.control import BflcController, SteadyController, simulate_year
from bflc.dispatch import solve_annual_benchmark
from bflc.plant import PlantSpec
from bflc.pso import PsoConfig, data_ranges, train
from bflc.timeseries import daily_feature_matrix

import helpers

CRITERIA = {
    1: "contract volume from annual maxima",
    2: "daily dispatch matches LP oracle",
    3: "annual benchmark matches LP oracle",
    4: "benchmark dominance",
    5: "BFLC revenue >= steady on training years",
    6: "contract satisfaction",
    7: "fuzzy engine centroid and membership",
    8: "planted rule recovery",
    9: "steady controller closed form",
    10: "hourly conservation",
    11: "envelope correctness",
}

_outcomes = defaultdict(list)
_notes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[marker.args[0]].append(report.outcome == "passed")


@pytest.fixture
def note(request):
    """Attach a one-line detail to the test's acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")

    def _note(text):
        if marker is not None:
            _notes[marker.args[0]].append(text)

    return _note


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        tr.write_line(f"criterion {n:2d} {status:7s} {title} ({sum(results or [])}/{len(results or [])} tests)")
        for text in _notes.get(n, []):
            tr.write_line(f"              {text}")


@dataclass
class Suite:
    spec: PlantSpec
    train_series: list
    benchmarks: list
    envelope: object
    training: object
    train_seconds: float
    steady: list
    bflc: list
    scenarios: list
    scenario_benchmarks: list
    scenario_steady: list
    scenario_bflc: list


@pytest.fixture(scope="session")
def suite():
    """Six training years, a trained controller, and runs on training and scenario years."""
    spec = PlantSpec()
    start = time.perf_counter()
    series = helpers.training_series()
    benches = [solve_annual_benchmark(s, spec) for s in series]
    X = np.vstack([daily_feature_matrix(s) for s in series])
    y = np.concatenate([b.daily_hpa() / 24.0 for b in benches])
    trajs = [Trajectory.from_daily(b.daily_hpa(), spec.hpa_total) for b in benches]
    envelope = hull_envelope(trajs, spec.hpa_total)
    training = train(X, y, data_ranges(X, (0.0, spec.max_hourly_h2)), PsoConfig(seed=0))
    ctrl = BflcController(training.model, envelope)
    steady = [simulate_year(s, spec, SteadyController(), b.revenue) for s, b in zip(series, benches)]
    bflc = [simulate_year(s, spec, ctrl, b.revenue) for s, b in zip(series, benches)]
    seconds = time.perf_counter() - start

    scen = helpers.scenario_series()
    scen_b = [solve_annual_benchmark(s, spec) for s in scen]
    scen_s = [simulate_year(s, spec, SteadyController(), b.revenue) for s, b in zip(scen, scen_b)]
    scen_f = [simulate_year(s, spec, ctrl, b.revenue) for s, b in zip(scen, scen_b)]
    return Suite(spec, series, benches, envelope, training, seconds, steady, bflc, scen, scen_b, scen_s, scen_f)
