"""Modified sequentially-thresholded least squares with automatic threshold
selection.

At a fixed threshold ``lam`` a coefficient ``w_j`` survives only if
``L_j <= |w_j| <= U_j`` where

    L_j = lam * max(1, ||b|| / ||G_j||),    U_j = (1/lam) * min(1, ||b|| / ||G_j||)

When ``G`` is a preconditioned system, passing the column scale factors
``mu`` applies the bounds to the coefficients in original units, ``mu * w``.

The threshold is picked on a grid by minimising

    loss(lam) = ||G (w_lam - w_LS)|| / ||G w_LS|| + nnz(w_lam) / J
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class LeastSquaresResult:
    w: np.ndarray
    rank: int
    rank_deficient: bool


def least_squares(G, b, return_info: bool = False):
    """Minimum-norm least-squares solution via complete orthogonal
    factorization (QR with column pivoting).

    With ``return_info`` a :class:`LeastSquaresResult` is returned whose
    ``rank_deficient`` flag is set when the numerical rank is below the
    column count.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    if G.ndim != 2 or b.shape != (G.shape[0],):
        raise ValueError(f"shape mismatch: G {G.shape}, b {b.shape}")
    if G.shape[1] == 0:
        w, rank = np.zeros(0), 0
    else:
        # relative rank cutoff as in numpy.linalg.lstsq
        cond = max(G.shape) * np.finfo(float).eps
        w, _, rank, _ = scipy.linalg.lstsq(G, b, cond=cond, lapack_driver="gelsy")
    if not return_info:
        return w
    return LeastSquaresResult(w, int(rank), int(rank) < G.shape[1])


def bounds(G, b, lam: float, mu=None) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper magnitude bounds per column.

    With column scale factors ``mu`` the bounds apply to ``mu * w`` (the
    coefficients in original units) and the balance ratio becomes
    ``mu_j ||b|| / ||G_j||``. Zero-norm columns get ``L = inf`` so they are
    never selected.
    """
    if lam < 0:
        raise ValueError("threshold must be >= 0")
    G = np.asarray(G, dtype=float)
    norms = np.linalg.norm(G, axis=0)
    nb = float(np.linalg.norm(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(norms > 0, nb / np.where(norms > 0, norms, 1.0), np.nan)
    if mu is not None:
        ratio = ratio * np.abs(np.asarray(mu, dtype=float))
    lower = lam * np.maximum(1.0, ratio)
    upper = np.inf * np.ones_like(ratio) if lam == 0 else np.minimum(1.0, ratio) / lam
    lower = np.where(norms > 0, lower, np.inf)
    upper = np.where(norms > 0, upper, 0.0)
    return lower, upper


@dataclass(frozen=True)
class FixedResult:
    w: np.ndarray
    iterations: int
    supports: tuple[tuple[int, ...], ...]  # support after each iteration, starting from w_LS


def mstls_fixed(G, b, lam: float, w_ls=None, mu=None) -> FixedResult:
    """Thresholded least squares at one ``lam``, started from ``w_LS``.

    ``mu`` (optional, positive) maps the solution to the units in which the
    magnitude bounds are applied; the returned ``w`` stays in the units of
    ``G``.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    J = G.shape[1]
    w = least_squares(G, b) if w_ls is None else np.asarray(w_ls, dtype=float).copy()
    lower, upper = bounds(G, b, lam, mu)
    scale = np.ones(J) if mu is None else np.abs(np.asarray(mu, dtype=float))
    support = np.ones(J, dtype=bool)
    history = [tuple(range(J))]
    iterations = 0
    while True:
        mag = np.abs(scale * w)
        keep = (lower <= mag) & (mag <= upper) & support
        if np.array_equal(keep, support):
            break
        iterations += 1
        support = keep
        history.append(tuple(int(i) for i in np.flatnonzero(keep)))
        w = np.zeros(J)
        if not keep.any():
            break
        w[keep] = least_squares(G[:, keep], b)
    return FixedResult(w, iterations, tuple(history))


def loss(G, b, w_lambda, w_ls, total_columns: int | None = None) -> float:
    G = np.asarray(G, dtype=float)
    w_lambda = np.asarray(w_lambda, dtype=float)
    w_ls = np.asarray(w_ls, dtype=float)
    if total_columns is None:
        total_columns = G.shape[1]
    denom = float(np.linalg.norm(G @ w_ls))
    if denom == 0.0:
        raise ZeroDivisionError("least-squares fit G w_LS is identically zero")
    return float(np.linalg.norm(G @ (w_lambda - w_ls))) / denom + np.count_nonzero(w_lambda) / total_columns


@dataclass(frozen=True)
class ThresholdGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("threshold grid is empty")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("threshold values must be finite and positive")
        if np.any(np.diff(v) <= 0):
            raise ValueError("threshold values must be strictly increasing")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def default_lambda_grid(lo: float = 1e-4, hi: float = 1.0, n: int = 50) -> ThresholdGrid:
    """``n`` thresholds equally spaced in ``log10`` from ``lo`` to ``hi``."""
    if n == 1:
        return ThresholdGrid(np.array([lo]))
    return ThresholdGrid(10.0 ** np.linspace(np.log10(lo), np.log10(hi), n))


@dataclass(frozen=True)
class SparseSolution:
    w_hat: np.ndarray
    lambda_hat: float
    support: tuple[int, ...]
    loss_curve: np.ndarray  # columns (lambda, loss)
    iterations: tuple[int, ...]
    w_ls: np.ndarray = field(repr=False, default=None)
    rank_deficient: bool = False


def _round_sig(x: float, digits: int = 12) -> float:
    return float(f"{x:.{digits - 1}e}")


def mstls_search(G, b, grid: ThresholdGrid | None = None, mu=None) -> SparseSolution:
    """Scan the grid, keep the smallest threshold attaining the least loss
    (compared after rounding to 12 significant digits).

    ``mu`` is passed to :func:`mstls_fixed`; the loss does not depend on it.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    grid = grid if grid is not None else default_lambda_grid()
    ls = least_squares(G, b, return_info=True)
    J = G.shape[1]
    results, losses = [], []
    for lam in grid.values:
        r = mstls_fixed(G, b, float(lam), ls.w, mu)
        results.append(r)
        losses.append(loss(G, b, r.w, ls.w, J))
    rounded = [_round_sig(v) for v in losses]
    best = rounded.index(min(rounded))
    w_hat = results[best].w
    return SparseSolution(
        w_hat=w_hat,
        lambda_hat=float(grid.values[best]),
        support=tuple(int(i) for i in np.flatnonzero(w_hat)),
        loss_curve=np.column_stack([grid.values, losses]),
        iterations=tuple(r.iterations for r in results),
        w_ls=ls.w,
        rank_deficient=ls.rank_deficient,
    )


def write_loss_curve(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "loss"])
        for lam, val in np.asarray(curve):
            w.writerow([repr(float(lam)), repr(float(val))])
