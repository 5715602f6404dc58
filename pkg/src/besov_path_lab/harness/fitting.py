"""Small least-squares helpers used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TailFit:
    intercept: float
    c: float
    r2: float
    n_points: int
    eps: np.ndarray
    freq: np.ndarray
    window: np.ndarray


def exceedance(samples: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Empirical P(X > eps) for each eps."""
    s = np.sort(np.asarray(samples, dtype=float))
    return 1.0 - np.searchsorted(s, eps, side="right") / s.size


def fit_gaussian_tail(samples, eps=None, lo: float = 1e-3, hi: float = 0.5, n_eps: int = 24) -> TailFit:
    """Least-squares fit of log q(eps) = b - c eps^2 over the frequency window [lo, hi].

    Without an explicit grid, eps runs over the sample quantiles from 1 - hi to
    1 - lo.  If fewer than three grid points fall in the window the grid is
    widened downwards.
    """
    x = np.asarray(samples, dtype=float)
    if eps is None or len(eps) == 0:
        eps = np.linspace(np.quantile(x, 1 - hi), np.quantile(x, 1 - lo), n_eps)
    eps = np.asarray(eps, dtype=float)
    for _ in range(30):
        q = exceedance(x, eps)
        win = (q >= lo) & (q <= hi)
        if win.sum() >= 3 or eps.min() <= 0:
            break
        eps = np.concatenate([np.linspace(eps.min() / 2, eps.min(), 6, endpoint=False), eps])
    q = exceedance(x, eps)
    win = (q >= lo) & (q <= hi)
    if win.sum() < 3:
        return TailFit(np.nan, np.nan, np.nan, int(win.sum()), eps, q, win)
    e2 = eps[win] ** 2
    y = np.log(q[win])
    A = np.column_stack([np.ones_like(e2), -e2])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else np.nan
    return TailFit(float(coef[0]), float(coef[1]), float(r2), int(win.sum()), eps, q, win)


def count_inversions(values) -> int:
    """Number of consecutive increases in a sequence expected to decrease."""
    v = np.asarray(values, dtype=float)
    return int(np.sum(v[1:] > v[:-1]))


def relative_drift(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min() - 1.0)
