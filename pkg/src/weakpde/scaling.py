"""Scale-invariance preconditioning of the weak-form system.

Data and coordinates are rescaled as ``u~ = gu*u``, ``x~ = gx*x``,
``t~ = gt*t``. If ``u`` solves ``D^a0 u = sum_j w_j D^{a_j} f_j(u)`` then
``u~`` solves the same equation in the tilde variables with coefficients

    w~_j = w_j * gu^(1 - beta_j) * gx^(|a_j|_x - |a0|_x) * gt^(a_j,t - a0_t)

so original-scale coefficients are ``w = mu * w~`` with ``mu`` the reciprocal
of that factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .library import ModelLibrary
from .testfn import SeparableTestFunction, make_test_function
from .weakform import LinearSystem, QueryPoints, assemble


@dataclass(frozen=True)
class ScaleSet:
    gamma_u: float
    gamma_x: float
    gamma_t: float
    mu: np.ndarray
    beta_bar: int

    def as_dict(self) -> dict:
        return {
            "gamma_u": self.gamma_u,
            "gamma_x": self.gamma_x,
            "gamma_t": self.gamma_t,
            "beta_bar": self.beta_bar,
            "mu": [float(v) for v in self.mu],
        }


def axis_scale(m: int, spacing: float, p: int, alpha_bar: int) -> float:
    """Coordinate scale making the highest-order test-function derivative
    O(1) in sup norm.

    The closed form needs an even ``alpha_bar``; odd (or zero) orders fall back
    to ``1 / (m * spacing)``.
    """
    base = 1.0 / (m * spacing)
    if alpha_bar <= 0 or alpha_bar % 2:
        return base
    return base * (math.comb(p, alpha_bar // 2) * math.factorial(alpha_bar)) ** (1.0 / alpha_bar)


def amplitude_scale(fields, beta_bar: int, trig: bool = False) -> float:
    """Amplitude scale ``gu`` with ``||(gu U)^beta_bar||_F ~ ||U||_F``.

    Libraries containing trig functions use ``1 / max|U|`` instead.
    """
    arrays = [np.asarray(getattr(u, "values", u), dtype=float).ravel() for u in fields]
    U = np.concatenate(arrays)
    if trig:
        peak = float(np.max(np.abs(U)))
        if peak == 0.0:
            raise ValueError("cannot scale an identically zero field")
        return 1.0 / peak
    if beta_bar <= 1:
        return 1.0
    norm_u = float(np.linalg.norm(U))
    if norm_u == 0.0:
        raise ValueError("cannot compute amplitude scale of an identically zero field")
    # normalise before powering to avoid overflow for large amplitudes
    peak = float(np.max(np.abs(U)))
    ratio = np.linalg.norm((U / peak) ** beta_bar) * peak**beta_bar / norm_u
    return float(ratio ** (-1.0 / beta_bar))


def compute_scales(u_fields, m_x, m_t, p_x, p_t, dx, dt, alpha_bar_x, alpha_bar_t, beta_bar,
                   trig: bool = False) -> tuple[float, float, float]:
    """Return ``(gamma_u, gamma_x, gamma_t)``."""
    if beta_bar < 1:
        raise ValueError("beta_bar must be >= 1")
    return (
        amplitude_scale(u_fields, beta_bar, trig),
        axis_scale(m_x, dx, p_x, alpha_bar_x),
        axis_scale(m_t, dt, p_t, alpha_bar_t),
    )


def scale_vector(library: ModelLibrary, gamma_u: float, gamma_x: float, gamma_t: float) -> np.ndarray:
    """Per-column factors mapping scaled coefficients to original units."""
    a0 = library.lhs
    mu = np.empty(len(library))
    for i, c in enumerate(library.columns):
        ex = c.deriv.spatial_order - a0.spatial_order
        et = c.deriv.time_order - a0.time_order
        mu[i] = gamma_u ** (c.function.beta - 1) * gamma_x ** (-ex) * gamma_t ** (-et)
    return mu


def scales_for(fields, library: ModelLibrary, testfn: SeparableTestFunction,
               dx: float, dt: float) -> ScaleSet:
    """Scales for a library and test function built on a grid."""
    orders = library.max_orders()
    ax_x, ax_t = testfn.axes[0], testfn.axes[-1]
    beta_bar = library.beta_bar
    gu = amplitude_scale(fields, beta_bar, library.has_trig)
    gx = axis_scale(ax_x.m, dx, ax_x.p, max(orders[:-1]))
    gt = axis_scale(ax_t.m, dt, ax_t.p, orders[-1])
    return ScaleSet(gu, gx, gt, scale_vector(library, gu, gx, gt), beta_bar)


def with_gammas(scales: ScaleSet, library: ModelLibrary, gamma_u=None, gamma_x=None, gamma_t=None) -> ScaleSet:
    gu = scales.gamma_u if gamma_u is None else gamma_u
    gx = scales.gamma_x if gamma_x is None else gamma_x
    gt = scales.gamma_t if gamma_t is None else gamma_t
    return ScaleSet(gu, gx, gt, scale_vector(library, gu, gx, gt), scales.beta_bar)


def rescale_test_function(testfn: SeparableTestFunction, gamma_x: float, gamma_t: float) -> SeparableTestFunction:
    """Same supports and degrees on the rescaled grid spacings."""
    axes = []
    for d, ax in enumerate(testfn.axes):
        g = gamma_t if d == len(testfn.axes) - 1 else gamma_x
        axes.append(make_test_function(ax.m, ax.p, ax.orders, ax.spacing * g))
    return SeparableTestFunction(tuple(axes))


def scaled_system(fields, library: ModelLibrary, testfn: SeparableTestFunction,
                  query: QueryPoints, scales: ScaleSet) -> LinearSystem:
    """Assemble ``(G~, b~)`` in rescaled amplitude and coordinates."""
    arrays = [scales.gamma_u * np.asarray(getattr(u, "values", u), dtype=float) for u in fields]
    tf = rescale_test_function(testfn, scales.gamma_x, scales.gamma_t)
    return assemble(arrays, library, tf, query, gamma_u=scales.gamma_u, scaled=True)


def unscale(w_tilde, scales: ScaleSet) -> np.ndarray:
    w_tilde = np.asarray(w_tilde, dtype=float)
    if w_tilde.shape != scales.mu.shape:
        raise ValueError(f"coefficient length {w_tilde.size} does not match {scales.mu.size} scale factors")
    return scales.mu * w_tilde
