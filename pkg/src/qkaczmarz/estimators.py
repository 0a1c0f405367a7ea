"""Estimator-style wrappers around the row-action solvers.

These follow the usual fit/predict conventions so the solvers can sit in
pipelines and grid searches: constructor stores hyperparameters verbatim,
``fit(X, y)`` validates and solves, learned state lands in trailing-underscore
attributes.  Rows are normalized internally (projections need unit rows);
the right-hand side is rescaled by the same factors, which leaves the
solution unchanged, and ``predict`` applies the raw design matrix.

The quantile variant is the interesting one: with a sparse minority of
wildly wrong targets it still recovers the clean regression vector, where
the plain variant is dragged arbitrarily far off.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .errors import DegenerateRow, InvalidDimension
from .quantiles import FULL_SAMPLE, WITH_REPLACEMENT, WITHOUT_REPLACEMENT, QuantileSpec
from .solvers import SolverConfig, run_qrk, run_rk
from .systems import DEGENERATE_NORM, LinearSystem

DEFAULT_ITER_PER_COLUMN = 200


def _normalized_system(X: np.ndarray, y: np.ndarray) -> LinearSystem:
    m, n = X.shape
    if m < n:
        raise InvalidDimension(
            f"need at least as many samples as features, got {m} x {n}"
        )
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms <= DEGENERATE_NORM):
        bad = int(np.argmin(norms))
        raise DegenerateRow(f"sample {bad} has (near-)zero norm")
    A = X / norms[:, None]
    b = y / norms
    return LinearSystem(
        rows=A,
        rhs=b,
        truth=None,
        corrupted_set=np.array([], dtype=np.int64),
        corruption=np.zeros(m),
    )


class KaczmarzRegressor(RegressorMixin, BaseEstimator):
    """Plain randomized Kaczmarz for overdetermined linear systems.

    Parameters
    ----------
    iterations : int or None
        Projection steps; None means 200 per feature, chosen at fit time.
    seed : int
        Base seed for the update-row stream.
    record_trace : bool
        Keep per-step records on ``trace_`` (costs memory; off by default).
    """

    def __init__(self, iterations=None, seed=0, record_trace=False):
        self.iterations = iterations
        self.seed = seed
        self.record_trace = record_trace

    def _solver_config(self, n: int) -> SolverConfig:
        iters = self.iterations
        if iters is None:
            iters = DEFAULT_ITER_PER_COLUMN * n
        return SolverConfig(
            quantile=None,
            iterations=int(iters),
            seed=self.seed,
            record_trace=self.record_trace,
            oracle_flags=False,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        system = _normalized_system(X, y)
        config = self._solver_config(system.n)
        trace = run_rk(system, config)
        self.coef_ = trace.final_x
        self.n_iter_ = config.iterations
        self.trace_ = trace if self.record_trace else None
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef_


class QuantileKaczmarzRegressor(RegressorMixin, BaseEstimator):
    """Corruption-robust Kaczmarz: project only when the chosen row's
    residual is at or below a subsampled quantile of absolute residuals.

    Parameters
    ----------
    q : float
        Quantile level in (0, 1); 0.5 tolerates the most corruption.
    subsample_size : int
        Rows drawn per step to estimate the quantile (ignored when
        ``sampling='full_sample'``).
    sampling : str
        'with_replacement', 'without_replacement', or 'full_sample'.
    iterations : int or None
        Projection attempts; None means 200 per feature.
    seed : int
        Base seed; update and quantile streams are derived independently.
    record_trace : bool
        Keep per-step records on ``trace_``.
    """

    def __init__(
        self,
        q=0.5,
        subsample_size=40,
        sampling=WITH_REPLACEMENT,
        iterations=None,
        seed=0,
        record_trace=False,
    ):
        self.q = q
        self.subsample_size = subsample_size
        self.sampling = sampling
        self.iterations = iterations
        self.seed = seed
        self.record_trace = record_trace

    def _quantile_spec(self) -> QuantileSpec:
        if self.sampling == FULL_SAMPLE:
            return QuantileSpec(self.q, mode=FULL_SAMPLE)
        if self.sampling not in (WITH_REPLACEMENT, WITHOUT_REPLACEMENT):
            raise InvalidDimension(
                f"sampling must be one of {WITH_REPLACEMENT!r}, "
                f"{WITHOUT_REPLACEMENT!r}, {FULL_SAMPLE!r}"
            )
        return QuantileSpec(self.q, size=int(self.subsample_size), mode=self.sampling)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        system = _normalized_system(X, y)
        iters = self.iterations
        if iters is None:
            iters = DEFAULT_ITER_PER_COLUMN * system.n
        config = SolverConfig(
            quantile=self._quantile_spec(),
            iterations=int(iters),
            seed=self.seed,
            record_trace=self.record_trace,
            oracle_flags=False,
        )
        trace = run_qrk(system, config)
        self.coef_ = trace.final_x
        self.n_iter_ = config.iterations
        self.trace_ = trace if self.record_trace else None
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef_
