import numpy as np
import pytest

from conftest import make_dataset
from mvocc.errors import ConfigurationError, ProtocolError
from mvocc.evaluation import (
    ConfusionMatrix,
    ReportRow,
    compute_metrics,
    confusion_from_predictions,
    cross_validate,
    cross_validate_strategies,
    grid_expand,
    render_report,
    resolve_grids,
    select_best,
)
from mvocc.kernels import KernelSpec
from mvocc.subspace import HyperParams
from mvocc.synthetic import SynthSpec, gen_two_view

COUNTS_A = ConfusionMatrix(76, 12, 28, 14)
COUNTS_B = ConfusionMatrix(75, 13, 24, 18)


def test_metrics_reference_counts_a():
    assert compute_metrics(COUNTS_A).rounded() == (86.36, 33.33, 73.08, 79.17, 69.23, 53.65)


def test_metrics_reference_counts_b():
    assert compute_metrics(COUNTS_B).rounded() == (85.23, 42.86, 75.76, 80.21, 71.54, 60.44)


def test_perfect_classifier():
    m = compute_metrics(ConfusionMatrix(10, 0, 0, 5))
    assert m.as_tuple() == (100.0,) * 6 and m.flags == ()


def test_undefined_precision_flag():
    m = compute_metrics(ConfusionMatrix(0, 5, 0, 5))
    assert m.pre == 0.0
    assert "undefined-precision" in m.flags


def test_confusion_from_predictions_and_sum():
    y = np.array([1, 1, 0, 0, 1], bool)
    p = np.array([1, 0, 1, 0, 1], bool)
    cm = confusion_from_predictions(y, p)
    assert (cm.tp, cm.fn, cm.fp, cm.tn) == (2, 1, 1, 1)
    total = cm + cm
    assert total.total == 10


def test_metrics_invariant_to_sample_order(rng):
    y = rng.random(50) < 0.6
    p = rng.random(50) < 0.5
    perm = rng.permutation(50)
    assert confusion_from_predictions(y, p) == confusion_from_predictions(y[perm], p[perm])


# --- grids


def test_grid_sizes():
    assert len(grid_expand("svdd", "linear")) == 8
    assert len(grid_expand("svdd", "rbf")) == 48
    assert len(grid_expand("ocsvm", "linear")) == 8


def test_ms_grid_counts_and_order():
    g = grid_expand("ms_svdd", "linear", {"eta": [0.1, 0.01], "beta": [1.0], "c": [0.5, 0.1], "d": [2], "reg": [0, 4], "ds": [1, 2]})
    assert len(g) == 2 * 2 * 2 * 2
    keys = [hp.sort_key() for hp in g]
    assert keys == sorted(keys)
    assert g[0].eta == 0.01 and g[0].c == 0.1


def test_empty_beta_rejected():
    with pytest.raises(ConfigurationError, match="beta"):
        resolve_grids("ms_svdd", "linear", {"beta": []})


@pytest.mark.parametrize("grid", [{"gamma": [1]}, {"sigma": [1.0]}, {"eta": [0.1]}, {"c": [-1.0]}, {"reg": [7]}, {"ds": [5]}])
def test_bad_axes(grid):
    method = "svdd" if "eta" in grid or "sigma" in grid else "ms_svdd"
    with pytest.raises(ConfigurationError):
        resolve_grids(method, "linear", grid)


def test_select_best_tie_goes_to_canonical_first():
    grid = [HyperParams(c=0.5), HyperParams(c=0.1), HyperParams(c=0.3)]
    assert select_best(np.array([70.0, 70.0, 60.0]), grid) == 1
    assert select_best(np.array([-np.inf, 10.0, 60.0]), grid) == 2
    with pytest.raises(ProtocolError):
        select_best(np.array([-np.inf] * 3), grid)


# --- cross-validation


@pytest.fixture(scope="module")
def synth():
    return gen_two_view(SynthSpec(n_target=40, n_outlier=15, dims=(3, 3), separation=6.0, seed=1))


def test_pooled_counts_cover_every_sample(synth):
    res = cross_validate(synth, "svdd", grid_expand("svdd", "linear", {"c": [0.1, 0.5]}), k_outer=5, k_inner=3)
    pooled = res.pooled
    assert pooled.tp + pooled.fn == 40
    assert pooled.fp + pooled.tn == 15
    assert sum(f.n_test for f in res.folds) == 55


def test_pooled_counts_on_88_42_data():
    ds = make_dataset(88, 42, dims=(2,))
    res = cross_validate(ds, "svdd", [HyperParams(c=0.2)], k_outer=5, k_inner=2)
    assert (res.pooled.tp + res.pooled.fn, res.pooled.fp + res.pooled.tn) == (88, 42)
    flipped = cross_validate(ds.with_target("non-MI"), "svdd", [HyperParams(c=0.2)], k_outer=5, k_inner=2)
    assert (flipped.pooled.tp + flipped.pooled.fn, flipped.pooled.fp + flipped.pooled.tn) == (42, 88)


def test_singleton_grid_is_plain_cv(synth):
    res = cross_validate(synth, "svdd", [HyperParams(c=0.2)], k_outer=5, k_inner=3)
    assert all(f.chosen == HyperParams(c=0.2) for f in res.folds)


def test_dominance_fixture(synth):
    # sigma=1e-3 makes every unseen point an outlier (GM 0 on every inner fold),
    # and it sorts first, so only a true argmax can pick the other point
    bad = HyperParams(c=0.2, kernel=KernelSpec("rbf", 1e-3))
    good = HyperParams(c=0.2, kernel=KernelSpec("rbf", 5.0))
    res = cross_validate(synth, "svdd", [good, bad], k_outer=5, k_inner=4)
    assert [f.chosen for f in res.folds] == [good] * 5
    assert all(f.inner_score > 0 for f in res.folds)


def test_infeasible_points_are_skipped(synth):
    # c=0.01 < 1/N on every inner fold
    res = cross_validate(synth, "svdd", [HyperParams(c=0.01), HyperParams(c=0.3)], k_outer=5, k_inner=3)
    assert all(f.chosen.c == 0.3 for f in res.folds)
    with pytest.raises(ProtocolError):
        cross_validate(synth, "svdd", [HyperParams(c=0.01)], k_outer=5, k_inner=3)


def test_cv_is_deterministic(synth):
    grid = grid_expand("svdd", "linear", {"c": [0.1, 0.3]})
    a = cross_validate(synth, "svdd", grid, k_inner=3, seed=9)
    b = cross_validate(synth, "svdd", grid, k_inner=3, seed=9)
    assert a.to_dict() == b.to_dict()


def test_strategy_split_rows(synth):
    grid = grid_expand("ms_svdd", "linear", {"eta": [0.0], "beta": [1.0], "c": [0.3], "d": [2], "reg": [0]})
    out = cross_validate_strategies(synth, grid, k_outer=5, k_inner=3)
    assert sorted(out) == [1, 2, 3, 4]
    assert [r.label for r in out.values()] == ["ms_svdd_ds1", "ms_svdd_ds2", "ms_svdd_ds3", "ms_svdd_ds4"]
    p = {s: r.pooled for s, r in out.items()}
    # AND accepts no more targets than either single view, OR no fewer
    assert p[1].tp <= min(p[3].tp, p[4].tp) and p[2].tp >= max(p[3].tp, p[4].tp)


# --- report


def test_report_prints_metric_values():
    text, doc = render_report([ReportRow("svdd", "MI", "linear", "-", COUNTS_A)])
    assert "86.36" in text and "53.65" in text
    assert doc["rows"][0]["confusion"]["tp"] == 76


def test_empty_report_is_header_only():
    text, doc = render_report([])
    assert len(text.strip().splitlines()) == 2 and doc["rows"] == []


def test_report_preserves_order():
    text, _ = render_report([ReportRow("zeta", "MI", "linear", "-", COUNTS_A),
                             ReportRow("alpha", "MI", "linear", "-", COUNTS_B)])
    lines = text.splitlines()
    assert lines[2].startswith("zeta") and lines[3].startswith("alpha")
