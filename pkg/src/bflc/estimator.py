"""scikit-learn compatible wrapper around the fuzzy controller training."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .fuzzy import FuzzyModel, infer_batch
from .pso import PsoConfig, data_ranges, train


class FuzzyHpaRegressor(RegressorMixin, BaseEstimator):
    """Learn daily HPA delivery rates (kg/h) from daily means ``(e_d, h_d, w_d)``.

    Input breakpoints ``p0``/``p6`` are taken from the training data; the
    output range defaults to ``[0, electrolyser_capacity / specific_energy]``
    of the default plant.

    Attributes set by ``fit``: ``model_``, ``objective_``, ``objective_trace_``,
    ``n_iter_``, ``ranges_``.
    """

    def __init__(
        self,
        particles=30,
        max_iters=100,
        inertia=0.5,
        cognitive=1.5,
        social=1.5,
        seed=0,
        output_range=(0.0, 1.0 / 0.0576),
        tol=1e-9,
        patience=10,
    ):
        self.particles = particles
        self.max_iters = max_iters
        self.inertia = inertia
        self.cognitive = cognitive
        self.social = social
        self.seed = seed
        self.output_range = output_range
        self.tol = tol
        self.patience = patience

    def _config(self) -> PsoConfig:
        return PsoConfig(
            particles=self.particles,
            max_iters=self.max_iters,
            inertia=self.inertia,
            cognitive=self.cognitive,
            social=self.social,
            seed=self.seed,
            tol=self.tol,
            patience=self.patience,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 features (e_d, h_d, w_d), got {X.shape[1]}")
        self.ranges_ = data_ranges(X, self.output_range)
        result = train(X, y, self.ranges_, self._config())
        self.model_ = result.model
        self.objective_ = result.objective
        self.objective_trace_ = list(result.objective_trace)
        self.n_iter_ = result.iterations_run
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 features (e_d, h_d, w_d), got {X.shape[1]}")
        return infer_batch(self.model_, X)

    @classmethod
    def from_model(cls, model: FuzzyModel, **params) -> "FuzzyHpaRegressor":
        """Wrap an already trained model so it can be used for prediction."""
        est = cls(**params)
        est.model_ = model
        est.ranges_ = np.array([[m.p[0], m.p[6]] for m in (model.mf_e, model.mf_h, model.mf_w, model.mf_out)])
        est.n_features_in_ = 3
        return est
