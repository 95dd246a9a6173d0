"""Acceptance criteria 1-9.

Each test records one pass/fail line; the lines are printed in the pytest
terminal summary, and also when this file is run directly with
``python3 tests/test_acceptance.py``.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from oracles import exhaustive_support, planted_system
from weakpde import pipeline
from weakpde.mstls import default_lambda_grid, least_squares, loss, mstls_fixed, mstls_search
from weakpde.testfn import changepoint, degree_from_support, support_equation, support_from_changepoint
from weakpde.weakform import separable_conv, separable_conv_direct, subsample_query_points

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def _cfg(dataset, supports, strides, **kw):
    return pipeline.DiscoveryConfig(dataset=dataset, supports=supports, strides=strides, **kw)


def _cold():
    # time data generation as part of the run
    pipeline._generate.cache_clear()


def test_criterion_1_burgers_noise_free():
    cfg = _cfg("burgers", (60, 60), (5, 5))
    _cold()
    t0 = time.perf_counter()
    rep = pipeline.discover(cfg)
    wall = time.perf_counter() - t0
    eq = rep.primary
    e = eq.metrics["e_inf"]
    ok = (eq.support == ["(u^2)_x"] and e <= 1e-4 and rep.G_shape == (784, 43) and wall <= 2.0)
    record(1, ok, f"support={eq.support} E_inf={e:.2e} G={rep.G_shape} time={wall:.2f}s")


def test_criterion_2_ks_noise_free():
    rep = pipeline.discover(_cfg("ks", (23, 22), (5, 6)))
    eq = rep.primary
    e = eq.metrics["e_inf"]
    ok = (sorted(eq.support) == sorted(["(u^2)_x", "u_xx", "u_xxxx"]) and e <= 1e-4
          and rep.G_shape == (1806, 43) and rep.grid["sizes"] == [256, 301])
    record(2, ok, f"support={eq.support} E_inf={e:.2e} G={rep.G_shape}")


def test_criterion_3_kdv_noise_free():
    rep = pipeline.discover(_cfg("kdv", (45, 80), (8, 12)))
    eq = rep.primary
    e = eq.metrics["e_inf"]
    gx, gt = rep.scales["gamma_x"], rep.scales["gamma_t"]
    ok = (sorted(eq.support) == sorted(["(u^2)_x", "u_xxx"]) and e <= 1e-3
          and abs(gx - 8.3) <= 0.02 * 8.3 and abs(gt - 1250) <= 1e-3 * 1250
          and rep.grid["sizes"] == [400, 601])
    record(3, ok, f"support={eq.support} E_inf={e:.2e} gamma_x={gx:.4g} gamma_t={gt:.6g}")


def test_criterion_4_burgers_noise_robustness():
    cfg = _cfg("burgers", (60, 60), (5, 5))
    _cold()
    t0 = time.perf_counter()
    rows = pipeline.sweep(cfg, [0.25, 0.5, 1.0], 20)
    wall = time.perf_counter() - t0
    tprs = [r["mean_tpr"] for r in rows]
    ok = all(t >= 0.95 for t in tprs) and wall <= 60
    record(4, ok, f"mean TPR at 0.25/0.5/1.0 = {tprs} time={wall:.1f}s")


def test_criterion_5_burgers_scales():
    rep = pipeline.discover(_cfg("burgers", (60, 60), (5, 5)))
    gx, gt = rep.scales["gamma_x"], rep.scales["gamma_t"]
    ok = abs(gx - 0.0029) <= 0.02 * 0.0029 and abs(gt - 1.1) <= 0.05 * 1.1
    record(5, ok, f"gamma_x={gx:.5g} gamma_t={gt:.5g}")


def test_criterion_6_degree_rule():
    got = {
        "burgers": (degree_from_support(60, 1e-10, 6), degree_from_support(60, 1e-10, 1)),
        "kdv": (degree_from_support(45, 1e-10, 6), degree_from_support(80, 1e-10, 1)),
        "ks": (degree_from_support(23, 1e-10, 6), degree_from_support(22, 1e-10, 1)),
    }
    want = {"burgers": (7, 7), "kdv": (8, 7), "ks": (10, 10)}
    record(6, got == want, f"{got}")


def test_criterion_7_fft_oracle():
    r = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        ndim = int(r.integers(1, 4))
        sizes = tuple(int(n) for n in r.integers(1, 33, size=ndim))
        ms = [int(r.integers(0, min(4, (n - 1) // 2) + 1)) for n in sizes]
        ks = [r.normal(size=2 * m + 1) for m in ms]
        q = subsample_query_points(sizes, ms, [int(r.integers(1, 4)) for _ in sizes])
        a = r.normal(size=sizes)
        ref = separable_conv_direct(ks, a, q)
        err = np.linalg.norm(separable_conv(ks, a, q) - ref) / max(np.linalg.norm(ref), 1e-300)
        worst = max(worst, err)
    wall = time.perf_counter() - t0
    record(7, worst <= 1e-10 and wall <= 10, f"worst relative error={worst:.1e} time={wall:.2f}s")


def test_criterion_8_mstls_oracle():
    agree, anchors = 0, True
    grid = default_lambda_grid()
    for seed in range(100):
        G, b, _ = planted_system(seed)
        agree += mstls_search(G, b, grid).support == exhaustive_support(G, b)
        w_ls = least_squares(G, b)
        anchors &= loss(G, b, mstls_fixed(G, b, 0.0, w_ls).w, w_ls) == 1.0
        anchors &= loss(G, b, mstls_fixed(G, b, 1.5, w_ls).w, w_ls) == 1.0
    record(8, agree >= 99 and anchors, f"agreement {agree}/100 anchors exact={anchors}")


def test_criterion_9_changepoint():
    hits = 0
    for seed in range(100):
        r = np.random.default_rng(seed)
        n = int(r.integers(40, 120))
        c = int(r.integers(10, n - 10))
        s1, s2 = r.uniform(2, 10), r.uniform(0.05, 0.5)
        inc = np.where(np.arange(n) < c, s1, s2) * (1 + 0.01 * r.normal(size=n))
        H = 1 + np.cumsum(inc) - inc[0]
        hits += abs(changepoint(H) - c) <= 1
    F = lambda m: support_equation(m, 24, 256, 3.0, 1e-10)  # noqa: E731
    sign_change = math.copysign(1, F(23)) != math.copysign(1, F(24))
    m, _ = support_from_changepoint(24, 256, 3.0, 1e-10)
    ok = hits >= 95 and sign_change and m in (23, 24)
    record(9, ok, f"split within +-1 in {hits}/100, F sign change in [23, 24]={sign_change}, m={m}")


def summary_lines():
    lines = []
    for n in range(1, 10):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            lines.append(f"criterion {n}: NOT RUN")
    return lines


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
