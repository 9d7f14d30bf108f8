import json

import numpy as np
import pytest

from mvocc.artifacts import load_model, model_from_dict, model_to_dict, save_model
from mvocc.config import RunConfig, load_config
from mvocc.errors import ConfigurationError, ParameterError, ShapeError
from mvocc.kernels import KernelSpec
from mvocc.models import METHODS, decision_values, fit_model, predict, predict_strategies
from mvocc.subspace import HyperParams, RegularizationSpec

HP = {
    "svdd": HyperParams(c=0.2),
    "ocsvm": HyperParams(c=0.2, kernel=KernelSpec("rbf", 3.0)),
    "s_svdd": HyperParams(c=0.2, eta=0.01, d=3, reg=RegularizationSpec("psi", 2, 0.1), max_iters=5),
    "es_svdd": HyperParams(c=0.2, eta=0.01, d=2, reg=RegularizationSpec("psi", 3, 0.1), max_iters=5),
    "ms_svdd": HyperParams(c=0.2, eta=0.01, d=2, reg=RegularizationSpec("omega", 5, 0.1), ds=1, max_iters=5),
}


@pytest.mark.parametrize("method", METHODS)
def test_fit_predict_every_method(synth_small, method):
    model = fit_model(method, synth_small, HP[method])
    pred = predict(model, synth_small)
    assert pred.dtype == bool and pred.shape == (synth_small.n_samples,)
    rows = 2 if method == "ms_svdd" else 1
    assert decision_values(model, synth_small).shape == (rows, synth_small.n_samples)


def test_training_ignores_outliers(synth_small):
    a = fit_model("svdd", synth_small, HyperParams(c=0.2))
    b = fit_model("svdd", synth_small.subset(np.flatnonzero(synth_small.is_target)), HyperParams(c=0.2))
    np.testing.assert_allclose(a.estimator.alphas, b.estimator.alphas)


def test_self_evaluation_matches_slacks(synth_small):
    targets = synth_small.subset(np.flatnonzero(synth_small.is_target))
    model = fit_model("svdd", targets, HyperParams(c=0.1))
    inside = predict(model, targets)
    # a training target is accepted exactly when its slack is (numerically) zero
    np.testing.assert_array_equal(inside, model.estimator.slacks <= 1e-9)


def test_predict_strategies_consistent(synth_small):
    model = fit_model("ms_svdd", synth_small, HP["ms_svdd"])
    out = predict_strategies(model, synth_small)
    np.testing.assert_array_equal(out[1], out[3] & out[4])
    np.testing.assert_array_equal(out[2], out[3] | out[4])
    np.testing.assert_array_equal(predict(model, synth_small, 2), out[2])


def test_ms_svdd_needs_two_views(synth_small):
    single = synth_small.subset(np.arange(10))
    from mvocc.dataset import concatenate_views
    with pytest.raises(ParameterError):
        fit_model("ms_svdd", concatenate_views(synth_small), HP["ms_svdd"])
    assert single.n_views == 2


def test_shape_mismatch(synth_small):
    from mvocc.dataset import concatenate_views
    model = fit_model("svdd", synth_small, HyperParams(c=0.2))
    with pytest.raises(ShapeError):
        decision_values(model, concatenate_views(synth_small))


def test_standardize_option(synth_small):
    model = fit_model("svdd", synth_small, HyperParams(c=0.2), standardize=True)
    assert model.standardizer is not None
    assert predict(model, synth_small).shape == (synth_small.n_samples,)


@pytest.mark.parametrize("method", METHODS)
def test_artifact_round_trip(tmp_path, synth_small, method):
    model = fit_model(method, synth_small, HP[method], standardize=(method == "svdd"))
    save_model(model, tmp_path / "m.json")
    back, doc = load_model(tmp_path / "m.json")
    assert doc["format"] == "mvocc-model" and back.method == method
    np.testing.assert_allclose(decision_values(back, synth_small), decision_values(model, synth_small), rtol=0, atol=1e-12)
    np.testing.assert_array_equal(predict(back, synth_small), predict(model, synth_small))
    inner = getattr(model.estimator, "inner", model.estimator)
    np.testing.assert_array_equal(getattr(back.estimator, "inner", back.estimator).alphas, inner.alphas)


def test_artifact_method_mismatch(synth_small):
    doc = model_to_dict(fit_model("svdd", synth_small, HyperParams(c=0.2)))
    doc["method"] = "ms_svdd"
    with pytest.raises(ConfigurationError):
        model_from_dict(doc)
    doc["format"] = "other"
    with pytest.raises(ConfigurationError):
        model_from_dict(doc)


# --- config


def test_config_toml(tmp_path):
    (tmp_path / "a.csv").write_text("x")
    (tmp_path / "c.toml").write_text('method = "svdd"\ninputs = ["a.csv"]\nseed = 3\n[grid]\nc = [0.1, 0.2]\n')
    cfg = load_config(tmp_path / "c.toml")
    assert cfg.seed == 3 and cfg.inputs == (str(tmp_path / "a.csv"),)
    assert len(cfg.hyperparams()) == 2


def test_config_defaults_to_full_grid():
    cfg = RunConfig(method="svdd", inputs=("a",), kernel="rbf")
    assert len(cfg.hyperparams()) == 48


def test_config_from_results_json(tmp_path):
    cfg = RunConfig(method="svdd", inputs=("/x/a.csv",), grid={"c": [0.3]})
    (tmp_path / "results.json").write_text(json.dumps({"format": "mvocc-results", "config": cfg.to_dict()}))
    assert load_config(tmp_path / "results.json") == cfg


@pytest.mark.parametrize("doc,match", [
    ({"method": "svm", "inputs": ["a"]}, "unknown method"),
    ({"method": "svdd", "inputs": []}, "input"),
    ({"method": "ms_svdd", "inputs": ["a"]}, "requires >= 2 views"),
    ({"method": "svdd", "inputs": ["a"], "colour": 1}, "unknown config keys"),
    ({"method": "svdd", "inputs": ["a"], "seed": -1}, "seed"),
    ({"method": "svdd", "inputs": ["a"], "grid": {"beta": [1.0]}}, "beta"),
])
def test_config_errors(doc, match):
    with pytest.raises(ConfigurationError, match=match):
        RunConfig.from_mapping(doc)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="nope.toml"):
        load_config(tmp_path / "nope.toml")
