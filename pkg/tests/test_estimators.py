"""Scikit-learn API layer: fit/predict/transform, params, validation."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from flipbound import (
    FlipLossClassifier,
    LowDimERMClassifier,
    LqLogisticClassifier,
    RandomProjector,
)


def blobs(seed=0, n=30, d=4, gap=2.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.standard_normal((n, d)) + gap,
                   rng.standard_normal((n, d)) - gap])
    y = np.concatenate([np.ones(n), -np.ones(n)])
    return X, y


class TestFlipLossClassifier:
    def test_fit_predict_separable(self):
        X, y = blobs()
        clf = FlipLossClassifier(k=5, random_state=0).fit(X, y)
        assert clf.score(X, y) >= 0.98
        assert clf.k_ == 5
        assert np.linalg.norm(clf.h_) == pytest.approx(1.0, abs=1e-12)

    def test_arbitrary_label_pair(self):
        X, y = blobs()
        labels = np.where(y > 0, "spam", "ham")
        clf = FlipLossClassifier(k=4, random_state=0).fit(X, labels)
        assert set(clf.predict(X)) <= {"spam", "ham"}
        assert np.mean(clf.predict(X) == labels) >= 0.98

    def test_decision_function_sign_matches_predict(self):
        X, y = blobs(seed=1)
        clf = FlipLossClassifier(k=3, random_state=1).fit(X, y)
        scores = clf.decision_function(X)
        np.testing.assert_array_equal(clf.predict(X), np.where(scores >= 0, 1.0, -1.0))

    def test_clone_and_get_params(self):
        clf = FlipLossClassifier(k=8, restarts=2, random_state=5)
        params = clf.get_params()
        assert params["k"] == 8 and params["restarts"] == 2
        cloned = clone(clf)
        assert cloned.get_params() == params

    def test_not_fitted_raises(self):
        with pytest.raises(NotFittedError):
            FlipLossClassifier().predict(np.zeros((1, 2)))

    def test_cv_mode_selects_from_grid(self):
        X, y = blobs(n=20, d=3)
        clf = FlipLossClassifier(k="cv", k_grid=(2, 5), cv_folds=3,
                                 max_iters=60, random_state=0).fit(X, y)
        assert clf.k_ in (2, 5)


class TestLqLogisticClassifier:
    def test_fit_predict(self):
        X, y = blobs(seed=2)
        clf = LqLogisticClassifier(q=2.0, reg=0.01, iters=200, random_state=0).fit(X, y)
        assert clf.score(X, y) >= 0.95
        assert clf.coef_.shape == (4,)

    def test_regularization_shrinks(self):
        X, y = blobs(seed=3)
        loose = LqLogisticClassifier(q=1.0, reg=0.0, iters=200).fit(X, y)
        tight = LqLogisticClassifier(q=1.0, reg=0.5, iters=200).fit(X, y)
        assert np.sum(np.abs(tight.coef_)) < np.sum(np.abs(loose.coef_))


class TestLowDimERMClassifier:
    def test_exact_mode(self):
        X, y = blobs(n=15, d=2)
        clf = LowDimERMClassifier(mode="exact").fit(X, y)
        assert clf.train_errors_ == 0
        assert clf.score(X, y) == 1.0

    def test_surrogate_mode(self):
        X, y = blobs(n=15, d=2)
        clf = LowDimERMClassifier(mode="surrogate", surrogate_k=5).fit(X, y)
        assert clf.score(X, y) >= 0.95


class TestRandomProjector:
    def test_shapes_and_determinism(self):
        X, _ = blobs(n=10, d=6)
        tr = RandomProjector(k=3, random_state=7).fit(X)
        assert tr.components_.shape == (3, 6)
        out1 = tr.transform(X)
        out2 = RandomProjector(k=3, random_state=7).fit(X).transform(X)
        np.testing.assert_array_equal(out1, out2)
        assert out1.shape == (20, 3)

    def test_rademacher_entries(self):
        X, _ = blobs(n=5, d=8)
        tr = RandomProjector(k=4, distribution="rademacher", random_state=1).fit(X)
        assert set(np.unique(tr.components_)) == {-1.0, 1.0}

    def test_pipeline_compose(self):
        X, y = blobs(n=25, d=10, gap=2.5)
        pipe = make_pipeline(RandomProjector(k=3, random_state=0),
                             LowDimERMClassifier(mode="exact"))
        pipe.fit(X, y)
        assert pipe.score(X, y) >= 0.9

    def test_feature_count_checked(self):
        X, _ = blobs(n=5, d=6)
        tr = RandomProjector(k=2, random_state=0).fit(X)
        with pytest.raises(Exception):
            tr.transform(np.zeros((2, 7)))
