import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bflc.errors import ValidationError
from bflc.fuzzy import FuzzyModel, MembershipParams, infer, infer_batch
from bflc.pso import (
    PsoConfig,
    data_ranges,
    decision_bounds,
    evaluate,
    objective,
    params_from_vector,
    pso_minimize,
    train,
    vector_from_params,
)


def test_sphere_reaches_threshold():
    box = np.tile([-5.0, 5.0], (4, 1))
    _, best = pso_minimize(lambda x: float(np.sum(x**2)), PsoConfig(particles=30, max_iters=100, seed=1), box)
    assert best < 1e-3


def test_constant_function():
    box = np.tile([-1.0, 2.0], (3, 1))
    x, best = pso_minimize(lambda x: 7.5, PsoConfig(seed=2), box)
    assert best == 7.5
    assert np.all((x >= -1.0) & (x <= 2.0))


def test_pinned_dimension():
    box = np.array([[-5.0, 5.0], [1.25, 1.25], [-5.0, 5.0]])
    x, _ = pso_minimize(lambda x: float(np.sum((x - 3) ** 2)), PsoConfig(seed=3), box)
    assert x[1] == 1.25


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))


def test_trace_non_increasing_and_deterministic(seed):
    box = np.tile([-3.0, 3.0], (2, 1))

    def f(x):
        return float(np.sum(np.abs(x)) + np.sin(5 * x[0]))

    cfg = PsoConfig(particles=8, max_iters=30, seed=seed)
    x1, b1, t1 = pso_minimize(f, cfg, box, return_trace=True)
    x2, b2, t2 = pso_minimize(f, cfg, box, return_trace=True)
    assert np.array_equal(x1, x2) and b1 == b2 and t1 == t2
    assert all(b <= a for a, b in zip(t1, t1[1:]))
    assert t1[-1] == b1


def test_early_stop_on_flat_landscape():
    _, _, trace = pso_minimize(lambda x: 1.0, PsoConfig(seed=0, patience=5), np.tile([0.0, 1.0], (2, 1)), True)
    assert len(trace) == 5


def test_config_validation():
    with pytest.raises(ValidationError):
        PsoConfig(particles=1)
    with pytest.raises(ValidationError):
        PsoConfig(max_iters=0)
    with pytest.raises(ValidationError):
        pso_minimize(lambda x: 0.0, PsoConfig(), np.array([[1.0, 0.0]]))


def test_vector_round_trip_sorts_and_clamps():
    ranges = np.array([[0, 10], [1, 5], [0, 1], [0, 17]], dtype=float)
    vec = np.array([9, 2, 50, 3, 4, 1, 2, 3, 4, 0, 0.1, 0.2, 0.3, 0.4, 0.5, 1, 2, 3, 4, 5], dtype=float)
    mfs = params_from_vector(vec, ranges)
    assert mfs[0].p == (0.0, 2.0, 3.0, 4.0, 9.0, 10.0, 10.0)
    assert mfs[1].p == (1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    again = params_from_vector(vector_from_params(mfs), ranges)
    assert again == mfs
    assert decision_bounds(ranges).shape == (20, 2)


def test_objective_definition():
    assert objective([1.0, 2.0], [2.0, 4.0]) == (1 + 4) + 9


def _generating_model():
    e = MembershipParams((0, 10, 25, 40, 55, 70, 100))
    h = MembershipParams((1, 1.5, 2.5, 3, 3.5, 4.5, 5))
    w = MembershipParams((0, 0.2, 0.4, 0.5, 0.6, 0.8, 1))
    out = MembershipParams((0, 3, 6, 8, 10, 13, 17))
    rules = np.zeros((3, 3, 3), dtype=int)
    rules[0, 0, 2] = 2
    rules[0, 0, 1] = 2
    rules[1, 0, 2] = 1
    return FuzzyModel(e, h, w, out, rules)


def _peak_data(model):
    X = np.array([(a, b, c) for a in model.mf_e.peaks for b in model.mf_h.peaks for c in model.mf_w.peaks])
    return X, infer_batch(model, X)


def test_zero_residual_witness():
    model = _generating_model()
    X, y = _peak_data(model)
    ranges = data_ranges(X, (0.0, 17.0))
    witness = vector_from_params((model.mf_e, model.mf_h, model.mf_w, model.mf_out))
    rebuilt, value = evaluate(witness, ranges, X, y)
    assert value == 0.0
    assert np.array_equal(rebuilt.rules, model.rules)
    result = train(X, y, ranges, PsoConfig(particles=10, max_iters=5, seed=0, init=witness))
    assert result.objective <= value


def test_training_is_deterministic():
    model = _generating_model()
    X, y = _peak_data(model)
    ranges = data_ranges(X, (0.0, 17.0))
    cfg = PsoConfig(particles=6, max_iters=4, seed=11)
    a, b = train(X, y, ranges, cfg), train(X, y, ranges, cfg)
    assert a.model == b.model and a.objective == b.objective and a.objective_trace == b.objective_trace
    assert np.array_equal(a.best_vector, b.best_vector)
    assert a.objective >= 0 and a.iterations_run == len(a.objective_trace)


def test_two_clusters_are_ordered():
    rng = np.random.default_rng(0)
    low = np.column_stack([rng.uniform(0, 5, 40), rng.uniform(1, 1.3, 40), rng.uniform(0, 0.1, 40)])
    windy = np.column_stack([rng.uniform(0, 5, 40), rng.uniform(1, 1.3, 40), rng.uniform(0.9, 1.0, 40)])
    X = np.vstack([low, windy, [[100, 5, 0.5]]])
    y = np.concatenate([np.zeros(40), np.full(40, 17.0), [0.0]])
    result = train(X, y, data_ranges(X, (0.0, 17.36)), PsoConfig(particles=20, max_iters=30, seed=5))
    a = infer(result.model, 2.5, 1.15, 0.05)
    b = infer(result.model, 2.5, 1.15, 0.95)
    assert b > a


def test_train_rejects_bad_targets():
    with pytest.raises(ValidationError):
        train([[1, 2, 0.5]], [-1.0], data_ranges([[1, 2, 0.5]], (0, 17)))
    with pytest.raises(ValidationError):
        train(np.zeros((0, 3)), [], np.array([[0, 1]] * 4))


def test_random_models_score_nonnegative():
    rng = np.random.default_rng(9)
    X = np.column_stack([rng.uniform(0, 100, 50), rng.uniform(1, 5, 50), rng.uniform(0, 1, 50)])
    y = rng.uniform(0, 17, 50)
    ranges = data_ranges(X, (0, 17.36))
    box = decision_bounds(ranges)
    for _ in range(20):
        vec = box[:, 0] + rng.random(20) * (box[:, 1] - box[:, 0])
        assert evaluate(vec, ranges, X, y)[1] >= 0
