"""Scikit-learn style estimators wrapping the trainers and the projector.

These follow the usual conventions: constructor stores hyperparameters
untouched, `fit` validates inputs and sets trailing-underscore
attributes, labels may be any two classes (mapped internally onto
{-1, +1}), and `get_params`/`set_params` come from BaseEstimator.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import InvalidParameterError
from .optimizer import TrainConfig, train_bound_minimizer, train_erm_lowdim, train_lq_logistic
from .projection import ProjectionSpec, sample_matrix

__all__ = [
    "FlipLossClassifier",
    "LqLogisticClassifier",
    "LowDimERMClassifier",
    "RandomProjector",
]


class _BinaryLabelMixin:
    def _encode_labels(self, y):
        classes = np.unique(y)
        if classes.shape[0] != 2:
            raise InvalidParameterError(
                f"binary classifier needs exactly two classes, got {classes.tolist()}"
            )
        self.classes_ = classes
        return np.where(y == classes[1], 1.0, -1.0)

    def _decode_labels(self, signs):
        return np.where(signs > 0, self.classes_[1], self.classes_[0])

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return self._decode_labels(self.model_.predict(X))

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return self.model_.decision_function(X)


class FlipLossClassifier(_BinaryLabelMixin, ClassifierMixin, BaseEstimator):
    """Linear classifier trained by minimizing the mean flip probability
    of the shifted normalized margins at projection dimension k.

    A smaller k gives a flatter, more outlier-tolerant loss; larger k
    approaches the zero-one loss.  `k="cv"` selects k from `k_grid` by
    stratified cross-validation on the training data.
    """

    DEFAULT_K_GRID = (2, 3, 5, 8, 13, 21, 34)

    def __init__(self, k=5, k_grid=None, cv_folds=5, max_iters=300, grad_tol=1e-6,
                 restarts=3, r_shift=None, random_state=0):
        self.k = k
        self.k_grid = k_grid
        self.cv_folds = cv_folds
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.restarts = restarts
        self.r_shift = r_shift
        self.random_state = random_state

    def _config(self, k):
        return TrainConfig(k=int(k), max_iters=self.max_iters, grad_tol=self.grad_tol,
                           restarts=self.restarts, r_shift=self.r_shift,
                           seed=self.random_state)

    def _cv_select_k(self, X, y):
        from sklearn.model_selection import StratifiedKFold

        grid = tuple(self.k_grid) if self.k_grid is not None else self.DEFAULT_K_GRID
        splitter = StratifiedKFold(n_splits=self.cv_folds, shuffle=True,
                                   random_state=self.random_state)
        best = None
        for k in grid:
            errors = []
            for tr, te in splitter.split(X, y):
                if len(np.unique(y[tr])) < 2:
                    continue
                model = train_bound_minimizer(X[tr], y[tr], self._config(k))
                errors.append(float(np.mean(model.predict(X[te]) != y[te])))
            mean_err = float(np.mean(errors)) if errors else np.inf
            if best is None or mean_err < best[0]:
                best = (mean_err, k)
        return best[1]

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y_pm = self._encode_labels(y)
        k = self._cv_select_k(X, y_pm) if self.k == "cv" else self.k
        self.model_ = train_bound_minimizer(X, y_pm, self._config(k))
        self.k_ = self.model_.k
        self.h_ = self.model_.h
        self.z_ = self.model_.z
        self.objective_ = self.model_.meta["objective"]
        self.n_iter_ = self.model_.meta["iterations"]
        return self


class LqLogisticClassifier(_BinaryLabelMixin, ClassifierMixin, BaseEstimator):
    """Gradient-descent logistic regression with an L_q penalty,
    q in (0, 2]; q <= 1 uses a smoothed penalty."""

    def __init__(self, q=2.0, reg=0.0, iters=400, random_state=0):
        self.q = q
        self.reg = reg
        self.iters = iters
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y_pm = self._encode_labels(y)
        self.model_ = train_lq_logistic(X, y_pm, q=self.q, lam=self.reg,
                                        iters=self.iters, seed=self.random_state)
        self.coef_ = self.model_.h
        self.intercept_ = self.model_.b
        return self


class LowDimERMClassifier(_BinaryLabelMixin, ClassifierMixin, BaseEstimator):
    """Zero-one-loss empirical risk minimizer for low-dimensional data.

    mode="exact" enumerates hyperplanes through point subsets (true
    minimizer, capped at 3 features and 200 samples); mode="surrogate"
    optimizes the flip loss and then picks the error-optimal intercept.
    """

    def __init__(self, mode="exact", surrogate_k=5, random_state=0):
        self.mode = mode
        self.surrogate_k = surrogate_k
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y_pm = self._encode_labels(y)
        self.model_ = train_erm_lowdim(X, y_pm, mode=self.mode,
                                       surrogate_k=self.surrogate_k,
                                       seed=self.random_state)
        self.train_errors_ = self.model_.meta["train_errors"]
        return self


class RandomProjector(TransformerMixin, BaseEstimator):
    """Seeded random projection transformer (gaussian or rademacher).

    `fit` samples the k x n_features matrix; `transform` left-multiplies
    each observation by it.  The same random_state always yields the
    same matrix.
    """

    def __init__(self, k=10, distribution="gaussian", sigma=1.0, random_state=0):
        self.k = k
        self.distribution = distribution
        self.sigma = sigma
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        self.spec_ = ProjectionSpec(k=self.k, d=self.n_features_in_,
                                    distribution=self.distribution,
                                    sigma=self.sigma, seed=self.random_state)
        self.components_ = sample_matrix(self.spec_)
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidParameterError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X @ self.components_.T
