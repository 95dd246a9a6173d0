"""Support-identification and coefficient-error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TruthModel:
    """True coefficients aligned to a library's columns."""

    w_star: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=float).ravel()
        if not np.any(w != 0):
            raise ValueError("true model has no nonzero coefficients")
        object.__setattr__(self, "w_star", w)

    @classmethod
    def from_terms(cls, library, terms: dict) -> "TruthModel":
        return cls(library.vector(terms))


def _pair(w_hat, w_star):
    a = np.asarray(w_hat, dtype=float).ravel()
    b = np.asarray(getattr(w_star, "w_star", w_star), dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def _require_support(w_star):
    if not np.any(w_star != 0):
        raise ValueError("true model has no nonzero coefficients")


def tpr(w_hat, w_star) -> float:
    """``TP / (TP + FN + FP)`` over nonzero patterns."""
    a, b = _pair(w_hat, w_star)
    _require_support(b)
    est, true = a != 0, b != 0
    tp = np.sum(est & true)
    fn = np.sum(~est & true)
    fp = np.sum(est & ~true)
    return float(tp / (tp + fn + fp))


def e_inf(w_hat, w_star) -> float:
    """Largest relative error over the true nonzero coefficients."""
    a, b = _pair(w_hat, w_star)
    _require_support(b)
    s = b != 0
    return float(np.max(np.abs(a[s] - b[s]) / np.abs(b[s])))


def e_2(w_hat, w_star) -> float:
    """Relative error ``||w_hat - w*|| / ||w*||`` (RMS normalisation cancels)."""
    a, b = _pair(w_hat, w_star)
    _require_support(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def all_metrics(w_hat, w_star) -> dict:
    return {"tpr": tpr(w_hat, w_star), "e_inf": e_inf(w_hat, w_star), "e_2": e_2(w_hat, w_star)}
