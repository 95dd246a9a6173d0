"""Assembly of the discretised weak-form system ``b = G w``.

Every entry is a discrete convolution of a test-function derivative with
(a nonlinear function of) the data, evaluated at a query point:

    b_k       = (Psi^0 * U)(x_k, t_k)
    G_{k,col} = (Psi^s * f_j(U))(x_k, t_k)

``Psi^s`` already carries the quadrature weight ``dx^D dt``. Because the
test function is separable, each convolution is done one axis at a time with
FFTs, subsampling to the query indices after each axis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .library import ModelLibrary, eval_trial
from .testfn import SeparableTestFunction


@dataclass(frozen=True)
class QueryPoints:
    """Per-axis grid indices of the query points (a tensor grid)."""

    indices: tuple[np.ndarray, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ix) for ix in self.indices)

    @property
    def K(self) -> int:
        return int(np.prod(self.shape))


def subsample_query_points(sizes: Sequence[int], supports: Sequence[int],
                           strides: Sequence[int]) -> QueryPoints:
    """Indices ``m, m+s, m+2s, ... <= N-1-m`` on every axis."""
    if not len(sizes) == len(supports) == len(strides):
        raise ValueError("sizes, supports and strides must have equal length")
    out = []
    for d, (n, m, s) in enumerate(zip(sizes, supports, strides)):
        if s < 1:
            raise ValueError(f"stride on axis {d} must be >= 1")
        if n - 2 * m < 1:
            raise ValueError(f"axis {d}: no query point fits (N={n}, m={m})")
        ix = np.arange(m, n - m, s)
        if ix.size == 0:
            raise ValueError(f"axis {d}: empty set of query points")
        ix.flags.writeable = False
        out.append(ix)
    return QueryPoints(tuple(out))


def query_count(n: int, m: int, s: int) -> int:
    """Number of query points on one axis, ``ceil((N - 2m) / s)``."""
    return -(-(n - 2 * m) // s)


# ------------------------------------------------------------- convolution


def _spectrum(kernel: np.ndarray, n: int) -> np.ndarray:
    return np.fft.rfft(kernel, n=n)


def conv1d_valid(kernel, signal) -> np.ndarray:
    """Valid-mode 1D convolution via the FFT.

    ``out[i] = sum_j kernel[j] * signal[i + len(kernel) - 1 - j]`` for
    ``i = 0 .. N - n``.
    """
    kernel = np.asarray(kernel, dtype=float)
    signal = np.asarray(signal, dtype=float)
    n, N = kernel.size, signal.size
    if n > N:
        raise ValueError(f"kernel length {n} exceeds signal length {N}")
    full = np.fft.irfft(_spectrum(kernel, N) * np.fft.rfft(signal), n=N)
    return full[n - 1:]


def conv1d_direct(kernel, signal) -> np.ndarray:
    """Reference O(nN) valid convolution by explicit summation."""
    kernel = np.asarray(kernel, dtype=float)
    signal = np.asarray(signal, dtype=float)
    n, N = kernel.size, signal.size
    if n > N:
        raise ValueError(f"kernel length {n} exceeds signal length {N}")
    out = np.zeros(N - n + 1)
    for i in range(N - n + 1):
        s = 0.0
        for j in range(n):
            s += kernel[j] * signal[i + n - 1 - j]
        out[i] = s
    return out


def _conv_axis_gather(arr, spectrum, n_kernel, axis, idx):
    """Circular FFT convolution along ``axis`` then keep valid outputs
    centred at grid indices ``idx``."""
    N = arr.shape[axis]
    shape = [1] * arr.ndim
    shape[axis] = spectrum.size
    full = np.fft.irfft(np.fft.rfft(arr, axis=axis) * spectrum.reshape(shape), n=N, axis=axis)
    half = (n_kernel - 1) // 2
    return np.take(full, np.asarray(idx) + half, axis=axis)


def separable_conv(kernels: Sequence[np.ndarray], values, query: QueryPoints,
                   spectra: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Convolve with the outer product of ``kernels`` and sample at ``query``.

    Kernels have odd length ``2m_d + 1``; query index ``k_d`` corresponds to
    valid-output position ``k_d - m_d``. Returns a flat length-``K`` vector
    in C order over the query grid.
    """
    arr = np.asarray(getattr(values, "values", values), dtype=float)
    if len(kernels) != arr.ndim or len(query.indices) != arr.ndim:
        raise ValueError("one kernel and one index set per axis required")
    for d, k in enumerate(kernels):
        if k.size % 2 != 1 or k.size > arr.shape[d]:
            raise ValueError(f"axis {d}: kernel length {k.size} invalid for size {arr.shape[d]}")
    for d in reversed(range(arr.ndim)):
        spec = spectra[d] if spectra is not None else _spectrum(kernels[d], arr.shape[d])
        arr = _conv_axis_gather(arr, spec, kernels[d].size, d, query.indices[d])
    return arr.reshape(-1)


def separable_conv_direct(kernels: Sequence[np.ndarray], values, query: QueryPoints) -> np.ndarray:
    """Full (D+1)-dimensional direct-summation oracle for :func:`separable_conv`."""
    arr = np.asarray(getattr(values, "values", values), dtype=float)
    dense = np.ones(())
    for k in kernels:
        dense = np.multiply.outer(dense, k)
    ms = [(k.size - 1) // 2 for k in kernels]
    flipped = dense[(slice(None, None, -1),) * dense.ndim]
    out = []
    for point in np.ndindex(*query.shape):
        centre = [query.indices[d][i] for d, i in enumerate(point)]
        window = arr[tuple(slice(c - m, c + m + 1) for c, m in zip(centre, ms))]
        out.append(float(np.sum(flipped * window)))
    return np.array(out)


# ---------------------------------------------------------------- assembly


@dataclass(frozen=True)
class LinearSystem:
    G: np.ndarray
    b: np.ndarray
    labels: tuple[str, ...]
    scaled: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.G.shape

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.G))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["b"] + list(self.labels))
            for bk, row in zip(self.b, self.G):
                w.writerow([repr(float(bk))] + [repr(float(v)) for v in row])


class _ColumnEngine:
    """Separable convolutions with cached kernel spectra and shared partial
    results. Axes are processed last to first, so two columns that agree on
    the trailing derivative orders share the intermediate array."""

    def __init__(self, testfn: SeparableTestFunction, sizes, query: QueryPoints):
        self.testfn = testfn
        self.sizes = tuple(sizes)
        self.query = query
        self._spectra = {}

    def spectrum(self, axis, order):
        key = (axis, order)
        if key not in self._spectra:
            k = self.testfn.axes[axis].kernel(order)
            self._spectra[key] = (_spectrum(k, self.sizes[axis]), k.size)
        return self._spectra[key]

    def column(self, arr, alpha, memo):
        ndim = arr.ndim
        # deepest cached suffix of alpha
        start = ndim
        current = arr
        for d in range(0, ndim):
            key = tuple(alpha[d:])
            if key in memo:
                start, current = d, memo[key]
                break
        for d in reversed(range(start)):
            spec, n = self.spectrum(d, alpha[d])
            current = _conv_axis_gather(current, spec, n, d, self.query.indices[d])
            memo[tuple(alpha[d:])] = current
        return current.reshape(-1)


def assemble(fields, library: ModelLibrary, testfn: SeparableTestFunction,
             query: QueryPoints, gamma_u: float = 1.0, scaled: bool = False) -> LinearSystem:
    """Build ``(G, b)`` for ``library`` over the query points.

    ``fields`` are component arrays (or :class:`~weakpde.data.Field`) already
    multiplied by ``gamma_u``; see :func:`weakpde.library.eval_trial`.
    """
    arrays = [np.asarray(getattr(u, "values", u), dtype=float) for u in fields]
    sizes = arrays[0].shape
    if any(a.shape != sizes for a in arrays):
        raise ValueError("all components must share one grid")
    if len(testfn.axes) != len(sizes):
        raise ValueError("test function dimension does not match data")
    for d, ax in enumerate(testfn.axes):
        if 2 * ax.m + 1 > sizes[d]:
            raise ValueError(f"axis {d}: support 2m+1={2 * ax.m + 1} exceeds {sizes[d]} points")
    engine = _ColumnEngine(testfn, sizes, query)

    b = engine.column(arrays[library.lhs_component], library.lhs.alpha, {})
    if not np.all(np.isfinite(b)):
        raise FloatingPointError("non-finite entries in left-hand side")

    G = np.empty((query.K, len(library)))
    by_function = {}
    for col, c in enumerate(library.columns):
        by_function.setdefault(c.function, []).append(col)
    for f, cols in by_function.items():
        fu = eval_trial(f, arrays, gamma_u)
        memo = {}
        for col in cols:
            G[:, col] = engine.column(fu, library.columns[col].deriv.alpha, memo)
            if not np.all(np.isfinite(G[:, col])):
                raise FloatingPointError(f"non-finite entries in column {library.columns[col].label}")
    return LinearSystem(G, b, tuple(library.labels), scaled)


def assemble_column(fields, column, testfn: SeparableTestFunction, query: QueryPoints,
                    gamma_u: float = 1.0) -> np.ndarray:
    """Single Gram column computed on its own (no shared intermediates)."""
    arrays = [np.asarray(getattr(u, "values", u), dtype=float) for u in fields]
    fu = eval_trial(column.function, arrays, gamma_u)
    return separable_conv(testfn.kernels(column.deriv.alpha), fu, query)


def estimate_cost(N: int, n: int, D: int) -> tuple[float, float]:
    """Operation counts per Gram column: separable FFT route and naive route."""
    if not 1 <= n <= N:
        raise ValueError("need 1 <= n <= N")
    t_fft = N * math.log(N) * sum(N ** (D + 1 - d) * (N - n + 1) ** (d - 1) for d in range(1, D + 2))
    t_naive = (2 * n ** (D + 1) - 1) * (N - n + 1) ** (D + 1)
    return float(t_fft), float(t_naive)
