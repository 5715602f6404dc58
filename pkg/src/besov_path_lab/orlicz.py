"""Young functions and Luxemburg norms over finite (discrete) measure spaces.

Three families are supported:

* ``Power(p)``      N(x) = x**p
* ``ExpPower(beta)`` N(x) = exp(x**beta) - 1
* ``PLog(p)``       N(x) = x**p * log(1 + x)**(p / 2)

The Luxemburg norm of non-negative values ``v`` against weights ``w`` is
``inf{lam > 0 : sum_i N(v_i / lam) * w_i <= 1}``.  Three routes are provided:

``luxemburg_norm_bisect``
    reference implementation, plain bisection on ``lam`` with a log-domain
    modular so that ``ExpPower`` never overflows.
``luxemburg_norms``
    batched production kernel (one norm per row), closed form for ``Power``
    and a safeguarded Newton iteration in ``log(1/lam)`` otherwise.
``luxemburg_norm``
    scalar convenience wrapper around ``luxemburg_norms``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "YoungFunction",
    "Power",
    "ExpPower",
    "PLog",
    "DiscreteMeasure",
    "young_eval",
    "young_inverse",
    "luxemburg_norm",
    "luxemburg_norms",
    "luxemburg_norm_bisect",
    "lux_equivalence_mid",
    "parse_young",
]

_EXP_SPLIT = 30.0  # above this log(expm1(a)) is evaluated as a + log1p(-exp(-a))


class YoungFunction:
    """Base class; subclasses implement the formulas."""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._eval(x)

    def _eval(self, x):
        raise NotImplementedError

    def log_eval(self, x):
        """log N(x), finite for every x > 0 (no overflow), -inf at 0."""
        raise NotImplementedError

    def x_derivative(self, x):
        """x * N'(x)."""
        raise NotImplementedError

    def inverse(self, y):
        raise NotImplementedError

    @property
    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Power(YoungFunction):
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"Power(p) needs p >= 1, got {self.p}")

    def _eval(self, x):
        return x**self.p

    def log_eval(self, x):
        with np.errstate(divide="ignore"):
            return self.p * np.log(x)

    def x_derivative(self, x):
        return self.p * x**self.p

    def inverse(self, y):
        return np.asarray(y, dtype=float) ** (1.0 / self.p)

    @property
    def label(self) -> str:
        return f"power:{self.p:g}"


@dataclass(frozen=True)
class ExpPower(YoungFunction):
    beta: float

    def __post_init__(self):
        if not self.beta >= 1:
            raise ValueError(f"ExpPower(beta) needs beta >= 1, got {self.beta}")

    def _eval(self, x):
        with np.errstate(over="ignore"):
            return np.expm1(x**self.beta)

    def log_eval(self, x):
        a = np.asarray(x, dtype=float) ** self.beta
        out = np.empty_like(a)
        big = a > _EXP_SPLIT
        out[big] = a[big] + np.log1p(-np.exp(-a[big]))
        with np.errstate(divide="ignore"):
            out[~big] = np.log(np.expm1(a[~big]))
        return out

    def x_derivative(self, x):
        a = np.asarray(x, dtype=float) ** self.beta
        return self.beta * a * np.exp(a)

    def inverse(self, y):
        return np.log1p(np.asarray(y, dtype=float)) ** (1.0 / self.beta)

    @property
    def label(self) -> str:
        return f"exp:{self.beta:g}"


@dataclass(frozen=True)
class PLog(YoungFunction):
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"PLog(p) needs p >= 1, got {self.p}")

    def _eval(self, x):
        return x**self.p * np.log1p(x) ** (self.p / 2)

    def log_eval(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return self.p * np.log(x) + 0.5 * self.p * np.log(np.log1p(x))

    def x_derivative(self, x):
        x = np.asarray(x, dtype=float)
        p = self.p
        L = np.log1p(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(x > 0, 0.5 * p * x**p * L ** (p / 2 - 1) * x / (1 + x), 0.0)
        return p * x**p * L ** (p / 2) + tail

    def inverse(self, y):
        return _plog_inverse(self.p, np.asarray(y, dtype=float))

    @property
    def label(self) -> str:
        return f"plog:{self.p:g}"


def _plog_inverse(p: float, y: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    # No closed form: vectorised bisection on the monotone map x -> N(x).
    y = np.atleast_1d(y).astype(float)
    if np.any(y < 0):
        raise ValueError("young_inverse needs y >= 0")
    N = PLog(p)
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    while True:
        short = N(hi) < y
        if not short.any():
            break
        hi[short] *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = N(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= rtol * hi):
            break
    out = 0.5 * (lo + hi)
    out[y == 0] = 0.0
    return out


def parse_young(spec: str) -> YoungFunction:
    """Parse ``power:2``, ``exp:2``, ``phi2``, ``plog:4`` style labels."""
    s = spec.strip().lower()
    if s in ("phi2", "exp2"):
        return ExpPower(2.0)
    kind, _, arg = s.partition(":")
    if not arg:
        raise ValueError(f"cannot parse Young function {spec!r}")
    value = float(arg)
    if kind in ("power", "p", "lp"):
        return Power(value)
    if kind in ("exp", "phi", "exppower"):
        return ExpPower(value)
    if kind in ("plog", "np"):
        return PLog(value)
    raise ValueError(f"unknown Young function family {kind!r}")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite measure on {0, ..., n-1} given by non-negative weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int, mass: float = 1.0) -> "DiscreteMeasure":
        return cls(np.full(n, mass / n))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)


def young_eval(N: YoungFunction, x: float) -> float:
    if x < 0:
        raise ValueError(f"Young functions are defined on [0, inf), got x={x}")
    return float(N(x))


def young_inverse(N: YoungFunction, y: float) -> float:
    if y < 0:
        raise ValueError(f"young_inverse needs y >= 0, got {y}")
    return float(np.asarray(N.inverse(y)).reshape(-1)[0])


def _prepare(values, mu) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(values, dtype=float)
    w = mu.weights if isinstance(mu, DiscreteMeasure) else np.asarray(mu, dtype=float)
    if v.shape != w.shape:
        raise ValueError(f"values and weights differ in length: {v.shape} vs {w.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if np.any(v < 0):
        raise ValueError("values must be non-negative")
    keep = w > 0
    return v[keep], w[keep]


def _logsumexp(x: np.ndarray) -> float:
    # scipy.special.logsumexp carries ~50 us of call overhead, too much for the golden-section loop
    m = x.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


def _log_modular(v: np.ndarray, w: np.ndarray, lam: float, N: YoungFunction) -> float:
    """log sum_i w_i N(v_i / lam), overflow free."""
    return _logsumexp(N.log_eval(v / lam) + np.log(w))


def luxemburg_norm_bisect(values, mu, N: YoungFunction, rtol: float = 1e-12) -> float:
    """Reference Luxemburg norm by bisection on lambda."""
    v, w = _prepare(values, mu)
    if v.size == 0 or not np.any(v > 0):
        return 0.0
    vmax = float(v.max())
    mass = float(w.sum())
    hi = vmax * (mass + 1.0) * 10.0
    lo = vmax / (10.0 * (1.0 + young_inverse(N, 1.0 / mass)))
    while _log_modular(v, w, hi, N) > 0:
        hi *= 2.0
    while _log_modular(v, w, lo, N) <= 0:
        lo *= 0.5
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _log_modular(v, w, mid, N) <= 0:
            hi = mid
        else:
            lo = mid
    return hi


def luxemburg_norms(values, weights, N: YoungFunction, rtol: float = 1e-13) -> np.ndarray:
    """Row-wise Luxemburg norms.

    ``values`` has shape (R, n) (or (n,)), ``weights`` has shape (n,) or (R, n).
    Atoms with zero weight are ignored; rows without positive mass give 0.
    """
    V = np.asarray(values, dtype=float)
    squeeze = V.ndim == 1
    V = np.atleast_2d(V)
    W = np.broadcast_to(np.asarray(weights, dtype=float), V.shape)
    if not np.all(np.isfinite(V)):
        raise ValueError("values must be finite")
    if np.any(V < 0) or np.any(W < 0):
        raise ValueError("values and weights must be non-negative")
    active = W > 0
    Vm = np.where(active, V, 0.0)
    vmax = Vm.max(axis=1)
    out = np.zeros(V.shape[0])
    rows = vmax > 0
    if rows.any():
        out[rows] = vmax[rows] * _unit_norms(Vm[rows] / vmax[rows, None], np.where(active, W, 0.0)[rows], N, rtol)
    return out[0] if squeeze else out


def _unit_norms(X: np.ndarray, W: np.ndarray, N: YoungFunction, rtol: float) -> np.ndarray:
    # Rows of X lie in [0, 1] with max exactly 1.
    if isinstance(N, Power):
        return (W * X**N.p).sum(axis=1) ** (1.0 / N.p)
    mass = W.sum(axis=1)
    wmin = np.where(W > 0, W, np.inf).min(axis=1)
    # bracket in u = log(1 / lam): the max atom alone forces u <= u_hi,
    # the whole mass at the max value gives u_lo.
    u_lo = np.log(np.asarray(N.inverse(1.0 / mass), dtype=float))
    u_hi = np.log(np.asarray(N.inverse(1.0 / wmin), dtype=float))
    lo, hi = u_lo.copy(), u_hi.copy()
    u = u_hi.copy()
    done = hi - lo <= rtol
    u[done] = hi[done]
    tol = rtol
    for _ in range(200):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        x = X[idx] * np.exp(u[idx])[:, None]
        Wi = W[idx]
        G = (Wi * N(x)).sum(axis=1)
        D = (Wi * N.x_derivative(x)).sum(axis=1)
        H = np.log(G)
        pos = H > 0
        hi[idx[pos]] = u[idx[pos]]
        lo[idx[~pos]] = u[idx[~pos]]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = -H * G / D
        new = u[idx] + step
        bad = ~np.isfinite(new) | (new <= lo[idx]) | (new >= hi[idx])
        new[bad] = 0.5 * (lo[idx][bad] + hi[idx][bad])
        conv = (np.abs(new - u[idx]) <= tol) | (hi[idx] - lo[idx] <= tol) | (H == 0)
        u[idx] = np.where(H == 0, u[idx], new)
        done[idx[conv]] = True
    return np.exp(-u)


def luxemburg_norm(values, mu, N: YoungFunction) -> float:
    """inf{lam > 0 : sum_i N(values_i / lam) w_i <= 1}."""
    v, w = _prepare(values, mu)
    if v.size == 0:
        return 0.0
    return float(luxemburg_norms(v, w, N))


def lux_equivalence_mid(values, mu, N: YoungFunction, tol: float = 1e-12) -> float:
    """inf over lam > 0 of (1 + sum_i N(lam v_i) w_i) / lam.

    Lies between the Luxemburg norm and twice the Luxemburg norm.  Returns 0
    for an all-zero input (the infimum is then not attained; by convention).
    """
    v, w = _prepare(values, mu)
    if v.size == 0 or not np.any(v > 0):
        return 0.0
    logw = np.log(w)

    def phi(s: float) -> float:
        # log of (1 + G(e^s)) / e^s
        with np.errstate(over="ignore", invalid="ignore"):
            logG = _logsumexp(N.log_eval(np.exp(s) * v) + logw)
        if math.isnan(logG):
            return math.inf
        return float(np.logaddexp(0.0, logG)) - s

    lux = luxemburg_norm(v, w, N)
    c = -math.log(lux)
    fc = phi(c)
    # For Power(1) the infimum is only approached as lam -> inf, hence the cap.
    a, b = c - 1.0, c + 1.0
    while phi(a) < fc and c - a < 80:
        a -= 1.0
    while phi(b) < fc and b - c < 80:
        b += 1.0
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = phi(x1), phi(x2)
    best = min(fc, f1, f2)
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = phi(x2)
        best = min(best, f1, f2)
    return math.exp(best)


