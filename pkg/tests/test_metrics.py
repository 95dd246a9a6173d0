import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from weakpde.library import polynomial_library
from weakpde.metrics import TruthModel, all_metrics, e_2, e_inf, tpr


def test_tpr_examples():
    assert tpr([1, 0, 2], [3, 0, 1]) == 1.0
    # four true terms, two recovered, nothing extra
    assert tpr([1, 1, 0, 0, 0], [1, 1, 1, 1, 0]) == 0.5
    # TP = 1, FN = 1, FP = 2
    assert tpr([1, 0, 1, 1], [1, 1, 0, 0]) == 0.25


def test_e_inf_examples():
    assert e_inf([-0.5], [-0.5]) == 0.0
    assert e_inf([-0.55], [-0.5]) == pytest.approx(0.1)
    assert e_inf([1.01, -0.5], [1, -0.5]) == pytest.approx(0.01)


def test_e_2_examples():
    w = np.array([1.0, -0.5, 0.0])
    assert e_2(w, w) == 0.0
    assert e_2(2 * w, w) == pytest.approx(1.0)
    assert e_2([1, 1], [1, 0]) == pytest.approx(1.0)


def test_errors():
    for fn in (tpr, e_inf, e_2):
        with pytest.raises(ValueError):
            fn([1, 2], [0, 0])
        with pytest.raises(ValueError):
            fn([1, 2, 3], [1, 0])
    with pytest.raises(ValueError):
        TruthModel(np.zeros(3))


def test_truth_from_library_terms():
    lib = polynomial_library()
    t = TruthModel.from_terms(lib, {"(u^2)_x": -0.5})
    assert t.w_star[lib.index("(u^2)_x")] == -0.5
    assert np.count_nonzero(t.w_star) == 1


vectors = hnp.arrays(float, st.integers(2, 10), elements=st.sampled_from([0.0, 1.0, -0.5, 2.0, 0.3]))


@given(vectors, st.data())
def test_tpr_one_iff_same_support(w_star, data):
    if not np.any(w_star):
        w_star[0] = 1.0
    w_hat = data.draw(hnp.arrays(float, w_star.shape, elements=st.sampled_from([0.0, 1.5, -2.0])))
    same = np.array_equal(w_hat != 0, w_star != 0)
    assert (tpr(w_hat, w_star) == 1.0) == same


@given(vectors, st.data())
def test_e_inf_ignores_terms_outside_true_support(w_star, data):
    if not np.any(w_star):
        w_star[-1] = 1.0
    w_hat = w_star * 1.1
    junk = data.draw(hnp.arrays(float, w_star.shape, elements=st.sampled_from([0.0, 0.2, -3.0, 5.0])))
    extra = np.where(w_star == 0, junk, 0.0)
    assert e_inf(w_hat + extra, w_star) == pytest.approx(e_inf(w_hat, w_star))
    if np.any(extra):
        assert e_2(w_hat + extra, w_star) != pytest.approx(e_2(w_hat, w_star), abs=0, rel=1e-12)


@given(vectors, st.data())
def test_metrics_permutation_equivariant(w_star, data):
    if not np.any(w_star):
        w_star[0] = -1.0
    w_hat = w_star + data.draw(hnp.arrays(float, w_star.shape, elements=st.floats(-0.1, 0.1)))
    perm = np.array(data.draw(st.permutations(range(w_star.size))))
    a, b = all_metrics(w_hat, w_star), all_metrics(w_hat[perm], w_star[perm])
    for k in a:
        assert a[k] == pytest.approx(b[k], rel=1e-12, abs=1e-15)
