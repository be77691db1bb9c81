import numpy as np
import pytest

from weaknas.predictors import (ForestParams, ForestRegressor, GbrtParams,
                                GbrtRegressor, MlpParams, MlpRegressor,
                                PredictorConfig, RegressionTree, TrainingPair,
                                fit_predictor, load_model, save_model)


def _random_data(seed, n=40, d=8):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = 10.0 * np.sin(X.sum(axis=1)) + 50.0 + rng.normal(0, 0.5, n)
    return X, y


SMALL_CONFIGS = [
    PredictorConfig(kind="gbrt", gbrt=GbrtParams(num_trees=30), seed=3),
    PredictorConfig(kind="forest", forest=ForestParams(num_trees=20), seed=3),
    PredictorConfig(kind="mlp", mlp=MlpParams(hidden=(16,), epochs=30), seed=3),
]


@pytest.mark.parametrize("config", SMALL_CONFIGS, ids=lambda c: c.kind)
def test_constant_targets_fit_constant(config):
    X, _ = _random_data(0)
    pairs = [TrainingPair(tuple(row), 42.5) for row in X]
    model = fit_predictor(pairs, config)
    probe, _ = _random_data(1)
    assert np.max(np.abs(model.predict(probe) - 42.5)) < 1e-6


@pytest.mark.parametrize("config", SMALL_CONFIGS, ids=lambda c: c.kind)
def test_same_seed_same_predictions(config):
    X, y = _random_data(2)
    pairs = [TrainingPair(tuple(r), t) for r, t in zip(X, y)]
    probe, _ = _random_data(3)
    a = fit_predictor(pairs, config).predict(probe)
    b = fit_predictor(pairs, config).predict(probe)
    assert np.array_equal(a, b)


def test_fit_rejects_degenerate_inputs():
    config = SMALL_CONFIGS[0]
    with pytest.raises(ValueError):
        fit_predictor([TrainingPair((1.0,), 2.0)], config)
    X, y = _random_data(4)
    X[3, 2] = np.nan
    with pytest.raises(ValueError):
        fit_predictor([TrainingPair(tuple(r), t) for r, t in zip(X, y)], config)


def test_two_pairs_is_enough():
    for config in SMALL_CONFIGS:
        pairs = [TrainingPair((0.0, 1.0), 10.0), TrainingPair((1.0, 0.0), 20.0)]
        model = fit_predictor(pairs, config)
        assert np.isfinite(model.predict(np.array([[0.5, 0.5]]))).all()


def test_gbrt_shatters_eight_points():
    # depth-3 trees can isolate 8 distinct points; with shrinkage 1 the
    # residuals vanish and training MSE goes to zero
    rng = np.random.default_rng(7)
    X = np.eye(8) + 0.01 * rng.random((8, 8))
    y = rng.uniform(0, 100, 8)
    model = GbrtRegressor(num_trees=20, max_depth=3, shrinkage=1.0, seed=0).fit(X, y)
    assert np.mean((model.predict(X) - y) ** 2) < 1e-8


def test_gbrt_prediction_matches_manual_accumulation():
    X, y = _random_data(8)
    model = GbrtRegressor(num_trees=25, max_depth=4, shrinkage=0.3, seed=1).fit(X, y)
    probe, _ = _random_data(9)
    # independent oracle: base value plus shrinkage-weighted sum of trees
    manual = np.full(probe.shape[0], model.base_)
    for tree in model.trees_:
        manual = manual + model.shrinkage * tree.predict(probe)
    assert np.array_equal(model.predict(probe), manual)


def test_gbrt_loss_trace_non_increasing():
    for seed in range(10):
        X, y = _random_data(seed, n=30)
        model = GbrtRegressor(num_trees=40, max_depth=3, shrinkage=0.2,
                              seed=seed).fit(X, y)
        trace = model.loss_trace
        assert all(a >= b - 1e-12 for a, b in zip(trace, trace[1:]))


def test_forest_prediction_is_mean_of_trees():
    X, y = _random_data(10)
    model = ForestRegressor(num_trees=15, seed=2).fit(X, y)
    probe, _ = _random_data(11)
    manual = np.zeros(probe.shape[0])
    for tree in model.trees_:
        manual += tree.predict(probe)
    manual /= len(model.trees_)
    assert np.array_equal(model.predict(probe), manual)


def test_forest_without_randomness_equals_single_tree():
    X, y = _random_data(12)
    forest = ForestRegressor(num_trees=5, bootstrap=False,
                             feature_fraction=1.0, seed=0).fit(X, y)
    single = RegressionTree.fit(X, y)
    probe, _ = _random_data(13)
    assert np.allclose(forest.predict(probe), single.predict(probe))


@pytest.mark.parametrize("make", [
    lambda: GbrtRegressor(num_trees=10, max_depth=2, shrinkage=0.5, seed=4),
    lambda: ForestRegressor(num_trees=8, max_depth=3, seed=4),
], ids=["gbrt", "forest"])
def test_label_shift_equivariance(make):
    # shallow trees keep split gains well separated, so a constant label
    # shift cannot flip a near-tied split and only moves the leaf values
    X, y = _random_data(14, n=200, d=5)
    probe, _ = _random_data(15, d=5)
    base = make().fit(X, y).predict(probe)
    shifted = make().fit(X, y + 7.25).predict(probe)
    assert np.allclose(shifted, base + 7.25, atol=1e-9)


def test_duplicated_training_set_leaves_predictions_unchanged():
    X, y = _random_data(16, n=25)
    tree_a = RegressionTree.fit(X, y, max_depth=6)
    X2 = np.vstack([X, X])
    y2 = np.concatenate([y, y])
    tree_b = RegressionTree.fit(X2, y2, max_depth=6)
    assert np.array_equal(tree_a.predict(X), tree_b.predict(X))


def test_batch_prediction_equals_elementwise():
    X, y = _random_data(17)
    probe, _ = _random_data(18, n=6)
    for config in SMALL_CONFIGS:
        model = fit_predictor(
            [TrainingPair(tuple(r), t) for r, t in zip(X, y)], config)
        batch = model.predict(probe)
        single = np.array([model.predict(row[None, :])[0] for row in probe])
        assert np.array_equal(batch, single)


def test_param_validation():
    with pytest.raises(ValueError):
        GbrtParams(shrinkage=0.0)
    with pytest.raises(ValueError):
        GbrtParams(num_trees=0)
    with pytest.raises(ValueError):
        ForestParams(feature_fraction=1.5)
    with pytest.raises(ValueError):
        PredictorConfig(kind="lstm")


def test_model_dump_load_roundtrip(tmp_path):
    X, y = _random_data(19)
    probe, _ = _random_data(20)
    for config in SMALL_CONFIGS:
        model = fit_predictor(
            [TrainingPair(tuple(r), t) for r, t in zip(X, y)], config)
        path = tmp_path / f"{config.kind}.json"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert np.allclose(loaded.predict(probe), model.predict(probe))
