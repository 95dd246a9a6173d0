import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from weakpde.library import (
    DerivativeIndex, TrialFunction, derivative_indices, enumerate_columns, eval_trial, monomials,
    polynomial_library, trig_functions,
)


def count_formula(n_functions, n_operators, has_constant=True):
    return n_functions * n_operators - (n_operators - 1 if has_constant else 0)


def test_burgers_catalog_has_43_columns():
    lib = polynomial_library(1, 6, 6)
    assert len(lib) == 43 == count_formula(7, 7)
    assert lib.labels[:3] == ["1", "u", "u^2"]
    assert lib.labels[8] == "(u^2)_x"
    assert lib.lhs_label() == "u_t"
    assert lib.beta_bar == 6 and lib.max_orders() == (6, 1)


def test_sine_gordon_catalog_has_73_columns():
    funcs = monomials(1, 4) + trig_functions([1, 2])
    lib = enumerate_columns(funcs, derivative_indices(2, 4), DerivativeIndex((0, 0, 2)))
    assert len(funcs) == 9
    assert len(lib) == 73 == count_formula(9, 9)
    assert lib.has_trig
    assert "sin(2u)_yyyy" in lib.labels


def test_nls_catalog_has_190_columns():
    funcs = monomials(2, 6)
    assert len(funcs) == 28
    lib = enumerate_columns(funcs, derivative_indices(1, 6))
    assert len(lib) == 190 == count_formula(28, 7)
    assert funcs[3].label == "u^2" and funcs[4].label == "uv" and funcs[5].label == "v^2"


def test_navier_stokes_degree_restricted_catalog_has_50_columns():
    names = ("w", "u", "v")
    funcs = monomials(3, 3, names=names)

    def rule(d, f):
        if d.order == 0:
            return f.beta <= 2
        return f.exponents[0] > 0

    lib = enumerate_columns(funcs, derivative_indices(2, 2), rule=rule)
    assert len(lib) == 50


def test_columns_are_derivative_major():
    lib = polynomial_library(1, 2, 2)
    assert lib.labels == ["1", "u", "u^2", "u_x", "(u^2)_x", "u_xx", "(u^2)_xx"]


def test_validation():
    with pytest.raises(ValueError):
        TrialFunction("monomial", (-1,))
    with pytest.raises(ValueError):
        TrialFunction("sin", multiplier=0)
    with pytest.raises(ValueError):
        TrialFunction("tanh")
    with pytest.raises(ValueError):
        DerivativeIndex((1, 1, 0))
    with pytest.raises(ValueError):
        DerivativeIndex((-1, 0))
    with pytest.raises(ValueError):
        enumerate_columns(monomials(1, 2), [DerivativeIndex((1, 0))])
    f = monomials(1, 2)
    with pytest.raises(ValueError):
        enumerate_columns(f + f[:1], derivative_indices(1, 2))


def test_vector_and_render():
    lib = polynomial_library(1, 6, 6)
    w = lib.vector({"(u^2)_x": -0.5, "u_xx": 0.1})
    assert lib.render(w) == "u_t = -0.5 (u^2)_x + 0.1 u_xx"
    assert lib.render(np.zeros(43)) == "u_t = 0"
    with pytest.raises(KeyError):
        lib.vector({"u_q": 1.0})


def test_eval_trial_examples():
    ones = np.ones((3, 4))
    assert np.array_equal(eval_trial(TrialFunction("monomial", (0,)), [5 * ones]), ones)
    u2v = TrialFunction("monomial", (2, 1))
    assert np.allclose(eval_trial(u2v, [2 * ones, 3 * ones]), 12 * ones)
    s2 = TrialFunction("sin", multiplier=2)
    assert np.allclose(eval_trial(s2, [np.pi / 4 * ones]), ones)
    # trig acts on unscaled amplitude
    assert np.allclose(eval_trial(s2, [10 * np.pi / 4 * ones], gamma_u=10.0), ones)
    with pytest.raises(ValueError):
        eval_trial(u2v, [ones])


@given(hnp.arrays(float, (4, 3), elements=st.floats(-3, 3)))
def test_degree_one_monomial_is_identity(a):
    assert np.array_equal(eval_trial(TrialFunction("monomial", (1,)), [a]), a)


@given(st.integers(0, 6), st.integers(0, 3), st.floats(0.1, 10), st.integers(0, 1000))
def test_monomial_homogeneity(e1, e2, gamma, seed):
    r = np.random.default_rng(seed)
    u, v = r.normal(size=(2, 5, 4))
    f = TrialFunction("monomial", (e1, e2))
    lhs = eval_trial(f, [gamma * u, gamma * v])
    rhs = gamma ** f.beta * eval_trial(f, [u, v])
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-300)
