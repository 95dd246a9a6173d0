"""Piecewise-polynomial test functions and data-driven support selection.

The reference bump is ``(1 - v**2)**p`` on ``(-1, 1)``. A 1D test function
with discrete half-support ``m`` on a grid of spacing ``h`` is sampled at
``v = n / m`` for ``n = -m..m``; its order-``a`` derivative picks up the
factor ``1 / (m h)**a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import bisect

from .errors import InvalidSupportError


def _bump_coefficients(p: int) -> list[int]:
    """Integer power-series coefficients of (1 - v^2)^p, index = power of v."""
    coeffs = [0] * (2 * p + 1)
    for k in range(p + 1):
        coeffs[2 * k] = (-1) ** k * math.comb(p, k)
    return coeffs


def _derivative_coefficients(p: int, alpha: int) -> list[int]:
    coeffs = _bump_coefficients(p)
    # d^alpha/dv^alpha v^n = n!/(n-alpha)! v^(n-alpha)
    return [c * math.perm(n, alpha) for n, c in enumerate(coeffs)][alpha:]


def base_poly_derivative(p: int, alpha: int, v):
    """Order-``alpha`` derivative of ``(1 - v^2)^p``, zero outside ``[-1, 1]``.

    Coefficients are expanded exactly in integer arithmetic and evaluated with
    Horner's rule. Accepts scalars or arrays.
    """
    if alpha < 0:
        raise ValueError("derivative order must be >= 0")
    if alpha > p:
        raise ValueError(f"derivative order {alpha} exceeds degree {p}: insufficient smoothness")
    coeffs = _derivative_coefficients(p, alpha)
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for c in reversed(coeffs):
        out = out * v + float(c)
    out = np.where(np.abs(v) <= 1.0, out, 0.0)
    return out if out.ndim else float(out)


def degree_from_support(m: int, tau: float, alpha_bar: int) -> int:
    """Smallest ``p >= alpha_bar + 1`` whose bump has decayed to ``tau`` one
    grid point inside the support edge."""
    if m <= 1:
        raise InvalidSupportError(f"invalid support size m={m}")
    if not 0 < tau < 1:
        raise ValueError("decay tolerance must lie in (0, 1)")
    # 1 - (1 - 1/m)^2 written without cancellation
    base = (2 * m - 1) / m**2
    p = max(alpha_bar + 1, 1)
    if base < 1.0:
        p = max(p, math.ceil(math.log(tau) / math.log(base)) - 1)
    while base**p > tau:
        p += 1
    return p


@dataclass(frozen=True)
class TestFunction1D:
    """Sampled derivatives of one coordinate test function.

    ``sampled[a]`` holds the order-``a`` derivative on the centered reference
    grid (length ``2m+1``) including the ``1/(m*spacing)**a`` factor, but not
    the quadrature weight.
    """

    __test__ = False  # keep pytest from collecting this class

    m: int
    p: int
    spacing: float
    sampled: dict

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(sorted(self.sampled))

    @property
    def support_width(self) -> float:
        return 2 * self.m * self.spacing

    def kernel(self, order: int, weighted: bool = True) -> np.ndarray:
        """Derivative array of the given order; ``weighted`` multiplies by the
        grid spacing (the 1D quadrature weight)."""
        try:
            k = self.sampled[order]
        except KeyError:
            raise KeyError(f"test function was not built with derivative order {order}") from None
        return k * self.spacing if weighted else k

    def rescaled(self, spacing: float) -> "TestFunction1D":
        """Same ``(m, p)`` on a grid with a different spacing."""
        return make_test_function(self.m, self.p, self.orders, spacing)


def make_test_function(m: int, p: int, orders: Iterable[int], spacing: float) -> TestFunction1D:
    n = np.arange(-m, m + 1) / m
    sampled = {}
    for a in sorted(set(orders)):
        arr = base_poly_derivative(p, a, n) / (m * spacing) ** a
        arr.flags.writeable = False
        sampled[a] = arr
    return TestFunction1D(m, p, float(spacing), sampled)


def get_test_fcns(m: int, tau: float, orders: Iterable[int], spacing: float, n_axis: int,
                  p: int | None = None) -> TestFunction1D:
    """Build the sampled test function for one axis.

    The degree is chosen from ``m`` and ``tau`` unless ``p`` is given.
    """
    orders = sorted(set(int(a) for a in orders) | {0})
    if m <= 1 or m > (n_axis - 1) / 2:
        raise InvalidSupportError(
            f"invalid support size m={m} for an axis of {n_axis} points "
            f"(need 2 <= m <= {(n_axis - 1) // 2})"
        )
    if p is None:
        p = degree_from_support(m, tau, max(orders))
    elif p < max(orders) + 1:
        raise ValueError(f"degree p={p} too small for derivative order {max(orders)}")
    return make_test_function(m, p, orders, spacing)


@dataclass(frozen=True)
class SeparableTestFunction:
    """Tensor product of one :class:`TestFunction1D` per axis (time last)."""

    axes: tuple[TestFunction1D, ...]

    @property
    def quadrature_factor(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    @property
    def supports(self) -> tuple[int, ...]:
        return tuple(a.m for a in self.axes)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(a.p for a in self.axes)

    def kernels(self, alpha, weighted: bool = True) -> list[np.ndarray]:
        """Per-axis arrays whose outer product is ``D^alpha psi`` on the
        reference grid (times ``dx^D dt`` when weighted)."""
        if len(alpha) != len(self.axes):
            raise ValueError(f"multi-index {alpha} has wrong length for {len(self.axes)} axes")
        return [ax.kernel(a, weighted) for ax, a in zip(self.axes, alpha)]

    def dense(self, alpha, weighted: bool = True) -> np.ndarray:
        """Materialise the full kernel; for tests and small grids only."""
        out = np.ones(())
        for k in self.kernels(alpha, weighted):
            out = np.multiply.outer(out, k)
        return out


# ------------------------------------------------------------ changepoints


@dataclass(frozen=True)
class ChangepointResult:
    k_star: int
    split: int
    H: np.ndarray


def cumulative_spectrum(values, axis: int) -> np.ndarray:
    """Cumulative sum of the mean DFT modulus along ``axis``.

    The modulus is averaged over every other axis and ordered by centered
    frequency ``-N/2 .. N/2-1``.
    """
    a = np.asarray(values.values if hasattr(values, "values") else values, dtype=float)
    spec = np.abs(np.fft.fft(a, axis=axis))
    spec = np.moveaxis(spec, axis, 0).reshape(a.shape[axis], -1).mean(axis=1)
    return np.cumsum(np.fft.fftshift(spec))


def _segment_sse(x, y, w) -> float:
    sw = np.sqrt(w)
    A = np.column_stack([np.ones_like(x), x]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(A, y * sw, rcond=None)
    r = (A @ coef) - y * sw
    return float(r @ r)


def changepoint_costs(H, min_size: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Weighted two-piece linear fit error for every admissible split.

    Returns ``(splits, costs)``; a split ``c`` fits ``H[:c]`` and ``H[c:]``
    with separate lines, weighting residuals by ``1/|H|``.
    """
    H = np.asarray(H, dtype=float)
    n = H.size
    if n < 2 * min_size or n < 8:
        raise ValueError(f"need at least {max(8, 2 * min_size)} points, got {n}")
    if not np.all(np.isfinite(H)) or np.any(H == 0):
        raise ValueError("H must be finite and nonzero for 1/|H| weights")
    x = np.arange(n, dtype=float)
    w = 1.0 / np.abs(H)
    splits = np.arange(min_size, n - min_size + 1)
    costs = np.array([
        _segment_sse(x[:c], H[:c], w[:c]) + _segment_sse(x[c:], H[c:], w[c:])
        for c in splits
    ])
    return splits, costs


def _tie_tolerance(H) -> float:
    H = np.asarray(H, dtype=float)
    w = 1.0 / np.abs(H)
    return 1e-12 * float(np.sum(w * (H - np.average(H, weights=w)) ** 2)) + 1e-300


def changepoint(H, min_size: int = 3) -> int:
    """Split index of the best weighted two-piece linear fit to ``H``.

    Ties (within a relative 1e-12 of the data scale) go to the smallest index.
    """
    splits, costs = changepoint_costs(H, min_size)
    best = costs.min()
    return int(splits[np.nonzero(costs <= best + _tie_tolerance(H))[0][0]])


def critical_wavenumber(values, axis: int) -> ChangepointResult:
    """Estimate the wavenumber separating signal- and noise-dominated modes.

    The spectrum of real data is symmetric, so the two-piece fit is done on
    the non-positive frequencies ``-N/2 .. 0`` only; there ``H`` is linear
    over the noise floor and bends once at the corner. ``k_star`` is the
    distance of the split from the zero mode.
    """
    H = cumulative_spectrum(values, axis)
    n = H.size
    half = H[: n // 2 + 1]
    split = changepoint(half)
    k = n // 2 - split
    k = int(min(max(k, 1), n // 2 - 1))
    return ChangepointResult(k, split, half)


def support_equation(m, k_star, n_axis, tau_hat, tau) -> float:
    """Residual whose root couples the Fourier-space and real-space decay
    conditions on the support ``m``."""
    n2t2 = n_axis**2 * tau_hat**2
    return (math.log((2 * m - 1) / m**2) * (4 * math.pi**2 * k_star**2 * m**2 - 3 * n2t2)
            - 2 * n2t2 * math.log(tau))


def support_bracket(k_star, n_axis, tau_hat, tau) -> tuple[float, float]:
    lo = math.sqrt(3) / math.pi * (n_axis / 2 / k_star) * tau_hat
    return lo, lo * math.sqrt(1 - (8 / math.sqrt(3)) * math.log(tau))


def support_from_changepoint(k_star, n_axis, tau_hat=3.0, tau=1e-10, alpha_bar=0) -> tuple[int, int]:
    """Support ``m`` and degree ``p`` placing ``k_star`` about ``tau_hat``
    standard deviations into the tail of the test function spectrum."""
    if n_axis <= 4:
        raise ValueError("axis must have more than 4 points")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    if k_star <= 0:
        raise ValueError("k_star must be positive")
    lower = 2 * math.pi / math.sqrt(3) * (k_star / (n_axis / 2))
    upper = math.pi / math.sqrt(3) * k_star
    if tau_hat < lower:
        raise ValueError(f"tau_hat={tau_hat} below lower admissibility bound {lower:.4g}")
    if tau_hat > upper:
        raise ValueError(f"tau_hat={tau_hat} above upper admissibility bound {upper:.4g}")
    lo, hi = support_bracket(k_star, n_axis, tau_hat, tau)
    lo = max(lo, 1.0 + 1e-9)
    f = lambda m: support_equation(m, k_star, n_axis, tau_hat, tau)  # noqa: E731
    root = bisect(f, lo, hi, xtol=1e-10)
    m = max(int(round(root)), 2)
    return m, degree_from_support(m, tau, alpha_bar)


def gaussian_proxy_sigma(a: float, p: int) -> float:
    """Width of the Gaussian sharing the low moments of ``(1-(s/a)^2)_+^p``."""
    return a / math.sqrt(2 * p + 3)
