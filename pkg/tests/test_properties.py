import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvocc.evaluation import ConfusionMatrix, compute_metrics, confusion_from_predictions
from mvocc.kernels import KernelSpec, center_gram, gram_matrix, npt_embed
from mvocc.prng import Xorshift64Star
from mvocc.solvers import solve_svdd, svdd_decision
from mvocc.subspace import combine_decisions, orthonormalize_rows
from mvocc.synthetic import svdd_bruteforce

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
counts = st.integers(0, 200)


@given(counts, counts, counts, counts)
def test_metrics_bounded_and_consistent(tp, fn, fp, tn):
    m = compute_metrics(ConfusionMatrix(tp, fn, fp, tn))
    assert all(0.0 <= x <= 100.0 + 1e-9 for x in m.as_tuple())
    assert np.isclose(m.gm, np.sqrt(m.sen * m.spe))
    if tp + fp == 0:
        assert "undefined-precision" in m.flags


@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=60))
def test_confusion_counts_partition(pairs):
    y = np.array([p[0] for p in pairs])
    p = np.array([p[1] for p in pairs])
    cm = confusion_from_predictions(y, p)
    assert cm.total == len(pairs) and cm.tp + cm.fn == int(y.sum())


@given(arrays(bool, st.tuples(st.just(2), st.integers(1, 30))))
def test_strategy_algebra(accept):
    d1, d2, d3, d4 = (combine_decisions(accept, s) for s in (1, 2, 3, 4))
    assert np.array_equal(d1, d3 & d4) and np.array_equal(d2, d3 | d4)


@given(arrays(float, st.tuples(st.integers(1, 4), st.integers(2, 12)), elements=finite))
def test_svdd_alphas_feasible(X):
    n = X.shape[1]
    C = max(1.0 / n, 0.3)
    m = solve_svdd(X, C)
    assert abs(m.alphas.sum() - 1.0) < 1e-9
    assert np.all(m.alphas >= -1e-12) and np.all(m.alphas <= C + 1e-12)
    dec = svdd_decision(m, X)
    assert np.all(dec[m.alphas < 1e-8] >= -1e-6)


@settings(max_examples=25, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 3), st.integers(2, 5)), elements=finite), st.floats(0.4, 1.0))
def test_smo_never_worse_than_oracle(X, C):
    C = max(C, 1.0 / X.shape[1])
    _, ref = svdd_bruteforce(X, C)
    assert solve_svdd(X, C).dual_objective >= ref - 1e-7


@given(arrays(float, st.tuples(st.integers(1, 4), st.integers(3, 10)), elements=finite), st.floats(0.3, 5.0))
def test_npt_reconstruction(X, sigma):
    K = gram_matrix(X, X, KernelSpec("rbf", sigma))
    Kc = center_gram(K)
    if np.linalg.norm(Kc) < 1e-6:
        return
    emb = npt_embed(K)
    assert np.linalg.norm(emb.phi.T @ emb.phi - Kc) <= 1e-8 * np.linalg.norm(Kc) + 1e-12


@given(arrays(float, st.tuples(st.integers(1, 3), st.integers(3, 6)), elements=finite))
def test_orthonormalize_rows(Q):
    if np.linalg.matrix_rank(Q) < Q.shape[0] or np.linalg.cond(Q) > 1e8:
        return
    P = orthonormalize_rows(Q)
    assert np.allclose(P @ P.T, np.eye(Q.shape[0]), atol=1e-9)


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(), max_size=40))
def test_shuffle_is_deterministic_permutation(seed, items):
    a = Xorshift64Star(seed).shuffle(list(items))
    b = Xorshift64Star(seed).shuffle(list(items))
    assert a == b and sorted(a) == sorted(items)
