import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tddetect import gbm
from tddetect.errors import DataError
from tests.oracles import brute_force_best_split


def count_leaves(node):
    if "leaf_value" in node:
        return 1
    return count_leaves(node["left"]) + count_leaves(node["right"])


def min_leaf_count(node):
    if "leaf_value" in node:
        return node["count"]
    return min(min_leaf_count(node["left"]), min_leaf_count(node["right"]))


def make_data(n=120, d=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    logits = 2.0 * X[:, 0] - 1.5 * X[:, 1]
    y = (logits + rng.standard_normal(n) > 0).astype(float)
    return X, y


class TestConfig:
    def test_defaults(self):
        cfg = gbm.TrainConfig()
        assert (cfg.num_trees, cfg.max_leaves, cfg.min_data_in_leaf, cfg.learning_rate) == (
            60, 9, 10, 0.04,
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            gbm.TrainConfig(max_leaves=1)
        with pytest.raises(ValueError):
            gbm.TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            gbm.TrainConfig(min_data_in_leaf=0)


class TestObjective:
    def test_sigmoid_values(self):
        assert gbm.sigmoid(0.0) == pytest.approx(0.5)
        assert round(float(gbm.sigmoid(-0.76)), 3) == 0.319
        assert round(float(gbm.sigmoid(-0.6)), 3) == 0.354

    def test_logit_inverts_sigmoid(self):
        for p in (0.1, 0.5, 0.9):
            assert gbm.sigmoid(gbm.logit(p)) == pytest.approx(p)

    def test_loss_at_perfect_prediction(self):
        raw = np.array([50.0, -50.0])
        y = np.array([1.0, 0.0])
        assert gbm.xentropy_loss(raw, y) < 1e-6

    def test_soft_label_minimum_at_label(self):
        # for soft y the loss over raw is minimized where sigmoid(raw) = y
        y = np.array([0.3])
        best = gbm.xentropy_loss(np.array([gbm.logit(0.3)]), y)
        for raw in (-2.0, 0.0, 2.0):
            assert gbm.xentropy_loss(np.array([raw]), y) >= best


class TestBestSplit:
    def test_matches_brute_force_randomized(self):
        rng = np.random.default_rng(42)
        cfg = gbm.TrainConfig(min_data_in_leaf=2)
        for _ in range(30):
            n = int(rng.integers(4, 40))
            X = rng.standard_normal((n, 3))
            g = rng.standard_normal(n)
            h = rng.random(n) + 0.01
            rows = np.arange(n)
            fast = gbm.best_split(X, rows, g, h, cfg)
            slow = brute_force_best_split(X, rows, g, h, cfg)
            if slow is None:
                assert fast is None
            else:
                assert fast.feature == slow.feature
                assert fast.threshold == pytest.approx(slow.threshold, abs=1e-12)
                assert fast.gain == pytest.approx(slow.gain, abs=1e-10)

    def test_tie_breaks_lower_feature_and_threshold(self):
        # identical columns -> identical gains; the lower feature index wins
        col = np.array([0.0, 0.0, 1.0, 1.0])
        X = np.column_stack([col, col])
        g = np.array([-1.0, -1.0, 1.0, 1.0])
        h = np.ones(4)
        split = gbm.best_split(X, np.arange(4), g, h, gbm.TrainConfig(min_data_in_leaf=1))
        assert split.feature == 0
        assert split.threshold == 0.5

    def test_min_leaf_respected(self):
        X = np.arange(6, dtype=float).reshape(-1, 1)
        g = np.array([-1.0, -1, -1, 1, 1, 1])
        h = np.ones(6)
        split = gbm.best_split(X, np.arange(6), g, h, gbm.TrainConfig(min_data_in_leaf=3))
        assert split is not None
        assert split.threshold == pytest.approx(2.5)

    def test_constant_feature_no_split(self):
        X = np.ones((10, 1))
        g = np.linspace(-1, 1, 10)
        h = np.ones(10)
        assert gbm.best_split(X, np.arange(10), g, h, gbm.TrainConfig(min_data_in_leaf=1)) is None

    def test_routing_is_leq_left(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0.0, 1.0])
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=5, min_data_in_leaf=1))
        # a point exactly at the threshold routes left (toward the 0-label leaf)
        root = model.trees[0]
        thr = root["threshold"]
        at_thr = model.predict_raw(np.array([[thr]]))
        below = model.predict_raw(np.array([[thr - 1.0]]))
        assert at_thr == pytest.approx(below)


class TestTrain:
    def test_leaf_constraints(self):
        X, y = make_data(200)
        cfg = gbm.TrainConfig(num_trees=10)
        model = gbm.train(X, y, cfg)
        for tree in model.trees:
            assert count_leaves(tree) <= cfg.max_leaves
            assert min_leaf_count(tree) >= cfg.min_data_in_leaf

    def test_loss_decreases_over_boosting(self):
        X, y = make_data(200)
        losses = []
        for k in (0, 5, 30):
            model = gbm.train(X, y, gbm.TrainConfig(num_trees=k))
            losses.append(gbm.xentropy_loss(model.predict_raw(X), y))
        assert losses[2] < losses[1] < losses[0]

    def test_base_score_is_weighted_mean_logit(self):
        X = np.zeros((20, 1))
        y = np.array([1.0] * 5 + [0.0] * 15)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=0, min_data_in_leaf=1))
        assert model.base_score == pytest.approx(gbm.logit(0.25))

    def test_base_score_clamped_for_pure_labels(self):
        X = np.zeros((20, 1))
        model = gbm.train(X, np.ones(20), gbm.TrainConfig(num_trees=0, min_data_in_leaf=1))
        assert model.base_score == pytest.approx(gbm.logit(1 - 1e-6))

    def test_weights_shift_base(self):
        X = np.zeros((4, 1))
        y = np.array([1.0, 1.0, 0.0, 0.0])
        w = np.array([3.0, 3.0, 1.0, 1.0])
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=0, min_data_in_leaf=1), weights=w)
        assert model.base_score == pytest.approx(gbm.logit(0.75))

    def test_determinism(self):
        X, y = make_data(150)
        m1 = gbm.train(X, y, gbm.TrainConfig(num_trees=8))
        m2 = gbm.train(X, y, gbm.TrainConfig(num_trees=8))
        assert gbm.model_to_json(m1) == gbm.model_to_json(m2)

    def test_errors(self):
        with pytest.raises(DataError):
            gbm.train(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(DataError):
            gbm.train(np.zeros((5, 2)), np.array([0, 0, 1, 1, 2.0]))
        with pytest.raises(DataError):
            gbm.train(np.zeros((5, 2)), np.zeros(5))  # fewer than min_data_in_leaf
        with pytest.raises(DataError):
            gbm.train(np.zeros((20, 2)), np.zeros(20), weights=-np.ones(20))

    def test_soft_labels_accepted(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((60, 3))
        y = rng.random(60)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=5))
        p = model.predict_proba(X)
        assert np.all((p > 0) & (p < 1))


class TestModelIO:
    def test_round_trip_predictions_identical(self):
        X, y = make_data(150)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=6))
        loaded = gbm.model_from_json(gbm.model_to_json(model))
        assert np.array_equal(model.predict_raw(X), loaded.predict_raw(X))

    def test_feature_count_mismatch(self):
        X, y = make_data(100, d=4)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=2))
        with pytest.raises(DataError, match="mismatch"):
            model.predict_raw(np.zeros((3, 5)))

    def test_unsupported_version_rejected(self):
        X, y = make_data(100)
        obj = json.loads(gbm.model_to_json(gbm.train(X, y, gbm.TrainConfig(num_trees=1))))
        obj["format_version"] = 99
        with pytest.raises(DataError):
            gbm.model_from_json(json.dumps(obj))

    def test_importance_normalized(self):
        X, y = make_data(200)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=10))
        imp = gbm.feature_importance(model)
        assert sum(imp.values()) == pytest.approx(1.0)
        assert all(v >= 0 for v in imp.values())
        # the two informative features dominate
        top = max(imp, key=imp.get)
        assert top in ("f0", "f1")

    def test_dump_trees_mentions_features(self):
        X, y = make_data(100)
        model = gbm.train(X, y, gbm.TrainConfig(num_trees=2), feature_names=["alpha", "b", "c", "d", "e", "f"])
        text = gbm.dump_trees(model)
        assert "base_score" in text
        assert "tree 0:" in text and "tree 1:" in text


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_split_oracle_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 25))
    X = rng.integers(0, 4, size=(n, 2)).astype(float)  # discrete values force ties
    g = rng.standard_normal(n)
    h = rng.random(n) + 0.01
    cfg = gbm.TrainConfig(min_data_in_leaf=int(rng.integers(1, 3)))
    fast = gbm.best_split(X, np.arange(n), g, h, cfg)
    slow = brute_force_best_split(X, np.arange(n), g, h, cfg)
    if slow is None:
        assert fast is None
    else:
        # gains must agree always; the (feature, threshold) pair must agree
        # unless two different splits tie in gain to the last ulp (possible
        # with discrete columns), in which case either winner is acceptable
        assert fast.gain == pytest.approx(slow.gain, abs=1e-9)
        if abs(fast.gain - slow.gain) > 1e-12 or (fast.feature, fast.threshold) != (
            slow.feature, slow.threshold,
        ):
            assert fast.gain == pytest.approx(slow.gain, abs=1e-12)
