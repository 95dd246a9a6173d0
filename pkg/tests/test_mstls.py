import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import exhaustive_support, planted_system
from weakpde.mstls import (
    ThresholdGrid, bounds, default_lambda_grid, least_squares, loss, mstls_fixed, mstls_search,
    write_loss_curve,
)


def _orthonormal(rows, cols, seed=0):
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(rows, cols)))
    return q


# ---------------------------------------------------------- least squares

def test_ls_examples(rng):
    Q = _orthonormal(30, 5)
    c = rng.normal(size=5)
    assert np.allclose(least_squares(Q, Q @ c), c, atol=1e-12)
    b = rng.normal(size=30)
    b -= Q @ (Q.T @ b)
    assert np.allclose(least_squares(Q, b), 0, atol=1e-12)
    G, b = rng.normal(size=(50, 8)), rng.normal(size=50)
    ref = np.linalg.solve(G.T @ G, G.T @ b)
    assert np.linalg.norm(least_squares(G, b) - ref) <= 1e-8 * np.linalg.norm(ref)


def test_ls_rank_deficiency_flag(rng):
    G = rng.normal(size=(20, 3))
    G = np.column_stack([G, G[:, 0] + G[:, 1]])
    res = least_squares(G, rng.normal(size=20), return_info=True)
    assert res.rank == 3 and res.rank_deficient
    with pytest.raises(ValueError):
        least_squares(G, np.ones(19))


# ----------------------------------------------------------------- bounds

def test_bounds_shape_and_zero_columns(rng):
    G = rng.normal(size=(10, 3))
    G[:, 1] = 0
    lo, hi = bounds(G, rng.normal(size=10), 0.1)
    assert np.isinf(lo[1]) and hi[1] == 0
    assert np.all(lo[[0, 2]] >= 0.1) and np.all(hi <= 10)
    lo0, hi0 = bounds(G, np.ones(10), 0.0)
    assert np.all(np.isinf(hi0[[0, 2]])) and np.isinf(lo0[1])
    with pytest.raises(ValueError):
        bounds(G, np.ones(10), -1)


# ---------------------------------------------------------------- fixed

def test_fixed_extremes(rng):
    G, b = rng.normal(size=(40, 6)), rng.normal(size=40)
    w_ls = least_squares(G, b)
    assert np.array_equal(mstls_fixed(G, b, 0.0).w, w_ls)
    assert np.all(mstls_fixed(G, b, 1.5).w == 0)


def test_fixed_planted_example(rng):
    G = rng.normal(size=(100, 6))
    w_true = np.array([1.0, 0, -0.5, 0, 0, 0])
    res = mstls_fixed(G, G @ w_true, 0.1)
    assert tuple(np.flatnonzero(res.w)) == (0, 2)
    assert np.allclose(res.w, w_true, atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.floats(1e-4, 2.0))
def test_fixed_iterations_and_monotone_supports(seed, lam):
    r = np.random.default_rng(seed)
    G = r.normal(size=(30, 7))
    b = G @ (r.normal(size=7) * (r.random(7) < 0.5)) + 0.1 * r.normal(size=30)
    res = mstls_fixed(G, b, lam)
    assert res.iterations <= G.shape[1]
    for a, c in zip(res.supports, res.supports[1:]):
        assert set(c) <= set(a)
    assert set(np.flatnonzero(res.w)) <= set(res.supports[-1])


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 0.9))
def test_fixed_is_unit_invariant(seed, lam):
    # solving G diag(mu) w~ = b with bounds on mu*w~ is the same as solving G w = b
    r = np.random.default_rng(seed)
    G = r.normal(size=(40, 6))
    b = G @ np.array([1.0, 0, -0.5, 0, 0.2, 0]) + 0.05 * r.normal(size=40)
    mu = 10.0 ** r.uniform(-3, 3, size=6)
    plain = mstls_fixed(G, b, lam)
    scaled = mstls_fixed(G * mu, b, lam, mu=mu)
    assert np.array_equal(plain.w != 0, scaled.w != 0)
    assert np.allclose(mu * scaled.w, plain.w, rtol=1e-8, atol=1e-10)


# ----------------------------------------------------------------- loss

def test_loss_anchors(rng):
    G, b = rng.normal(size=(30, 6)), rng.normal(size=30)
    w_ls = least_squares(G, b)
    assert loss(G, b, w_ls, w_ls) == 1.0
    assert loss(G, b, np.zeros(6), w_ls) == 1.0
    with pytest.raises(ZeroDivisionError):
        loss(G, b, w_ls, np.zeros(6))


def test_loss_on_orthonormal_half_support(rng):
    Q = _orthonormal(30, 6, seed=3)
    w_ls = rng.normal(size=6)
    b = Q @ w_ls
    kept = w_ls.copy()
    kept[3:] = 0
    expected = np.linalg.norm(w_ls[3:]) / np.linalg.norm(w_ls) + 0.5
    assert loss(Q, b, kept, w_ls) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------- search

def test_grid_validation():
    g = default_lambda_grid()
    assert len(g) == 50 and g.values[0] == pytest.approx(1e-4) and g.values[-1] == pytest.approx(1.0)
    assert np.allclose(np.diff(np.log10(g.values)), 4 / 49)
    for bad in ([], [0.1, 0.1], [-1.0], [np.inf]):
        with pytest.raises(ValueError):
            ThresholdGrid(bad)


def test_singleton_grid_equals_fixed(rng):
    G, b = rng.normal(size=(30, 5)), rng.normal(size=30)
    sol = mstls_search(G, b, ThresholdGrid([0.2]))
    assert np.array_equal(sol.w_hat, mstls_fixed(G, b, 0.2).w)
    assert sol.lambda_hat == 0.2


def test_search_matches_brute_force_sweep(rng):
    G = rng.normal(size=(60, 8))
    b = G @ np.array([0, 1.5, 0, 0, -0.7, 0, 0, 0]) + 0.05 * rng.normal(size=60)
    grid = default_lambda_grid()
    sol = mstls_search(G, b, grid)
    w_ls = least_squares(G, b)
    values = [loss(G, b, mstls_fixed(G, b, lam).w, w_ls) for lam in grid.values]
    rounded = [float(f"{v:.11e}") for v in values]
    assert sol.lambda_hat == grid.values[rounded.index(min(rounded))]
    assert np.allclose(sol.loss_curve[:, 1], values)


def test_planted_two_sparse_recovery():
    hits = 0
    for seed in range(100):
        r = np.random.default_rng(seed)
        G = r.normal(size=(20, 6))
        w = np.zeros(6)
        idx = r.choice(6, 2, replace=False)
        w[idx] = r.uniform(0.5, 2, 2) * r.choice([-1, 1], 2)
        sol = mstls_search(G, G @ w)
        hits += set(sol.support) == set(idx)
    assert hits >= 99


def test_search_agrees_with_exhaustive_enumeration():
    agree = 0
    for seed in range(30):
        G, b, _ = planted_system(seed)
        agree += mstls_search(G, b).support == exhaustive_support(G, b)
    assert agree >= 29


def test_loss_curve_csv(tmp_path, rng):
    G, b = rng.normal(size=(20, 4)), rng.normal(size=20)
    sol = mstls_search(G, b, ThresholdGrid([0.01, 0.1]))
    write_loss_curve(sol.loss_curve, tmp_path / "l.csv")
    rows = (tmp_path / "l.csv").read_text().splitlines()
    assert rows[0] == "lambda,loss" and len(rows) == 3


@pytest.mark.parametrize("dataset,supports,strides", [("burgers", (60, 60), (5, 5)),
                                                      ("ks", (23, 22), (5, 6)),
                                                      ("kdv", (45, 80), (8, 12))])
def test_extremes_on_acceptance_datasets(dataset, supports, strides):
    from weakpde import pipeline
    cfg = pipeline.DiscoveryConfig(dataset=dataset, supports=supports, strides=strides)
    rep = pipeline.discover(cfg)
    G, b = rep.system.G, rep.system.b
    mu = np.array(rep.scales["mu"])
    w_ls = least_squares(G, b)
    assert np.array_equal(mstls_fixed(G, b, 0.0, mu=mu).w, w_ls)
    assert np.all(mstls_fixed(G, b, 1.01, mu=mu).w == 0)
    curve = np.array(rep.primary.loss_curve)
    assert curve[0, 1] >= curve[:, 1].min() and curve[-1, 1] >= curve[:, 1].min()
