"""Besov-Orlicz norms, moduli of continuity and Hoelder-type functionals of sampled paths.

Shifts are always grid multiples ``h = k * dt``.  The dyadic levels of a path
on I = [t0, T] are the shifts ``h_j = 2**-j * |I|`` for ``j = 0..J`` where
``2**J`` divides the number of cells; level ``j`` contributes the term
``h_j**-alpha * w_j``.  On the unit interval this is the usual
``2**(j alpha) * ||Delta_{2^-j} f||``.

Increment norms ``||Delta_h f||_{L^N(I(h))}`` use left-endpoint weights ``dt``
on the nodes ``t0, ..., T - h - dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .orlicz import ExpPower, Power, YoungFunction, luxemburg_norms
from .paths import SampledPath

__all__ = [
    "BesovParams",
    "ModulusProfile",
    "EXHAUSTIVE_MAX_CELLS",
    "increment_norm",
    "increment_norms",
    "modulus",
    "lebesgue_norm",
    "dyadic_besov_norm",
    "dyadic_besov_norms",
    "full_besov_norm",
    "full_seminorm",
    "seminorm_sandwich",
    "gagliardo_seminorm",
    "steklov_k_estimate",
    "steklov_k_profile",
    "holder_seminorm",
    "levy_ratio",
    "grr_zeta",
    "grr_zeta_table",
]

EXHAUSTIVE_MAX_CELLS = 2**12
_BLOCK = 1 << 22  # floats per temporary block


@dataclass(frozen=True)
class BesovParams:
    alpha: float
    q: float
    N: YoungFunction

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.q >= 1:
            raise ValueError(f"q must be >= 1 (math.inf allowed), got {self.q}")


@dataclass
class ModulusProfile:
    """Per-level diagnostics of a dyadic norm evaluation."""

    mode: str
    j: np.ndarray
    shift: np.ndarray
    increment: np.ndarray
    omega: np.ndarray
    term: np.ndarray
    lebesgue: float
    seminorm: float

    @property
    def levels(self) -> list[tuple[int, float, float]]:
        return [(int(a), float(b), float(c)) for a, b, c in zip(self.j, self.omega, self.term)]


def _row_norms(diff: np.ndarray) -> np.ndarray:
    if diff.shape[-1] == 1:
        return np.abs(diff[..., 0])
    return np.sqrt(np.einsum("...i,...i->...", diff, diff))


def _block_rows(R: int, per_row: int) -> int:
    return max(1, min(R, _BLOCK // max(per_row, 1)))


def _ell_q(terms: np.ndarray, q: float) -> np.ndarray:
    if math.isinf(q):
        return terms.max(axis=-1)
    return (terms**q).sum(axis=-1) ** (1.0 / q)


def lebesgue_norm(path: SampledPath, N: YoungFunction) -> float:
    """||f||_{L^N(I)} with the path's quadrature weights."""
    return float(luxemburg_norms(path.norms(), path.quadrature_weights(), N))


def increment_norm(path: SampledPath, h_steps: int, N: YoungFunction) -> float:
    if h_steps < 1:
        raise ValueError("h_steps must be >= 1")
    if h_steps >= path.cells:
        return 0.0
    v = path.values
    inc = _row_norms(v[h_steps:-1] - v[: -h_steps - 1])
    return float(luxemburg_norms(inc, np.full(inc.size, path.dt), N))


def increment_norms(path: SampledPath, N: YoungFunction, shifts=None) -> np.ndarray:
    """Increment norms for every shift in ``shifts`` (default 1..cells)."""
    cells, v, dt = path.cells, path.values, path.dt
    shifts = np.arange(1, cells + 1) if shifts is None else np.asarray(shifts, dtype=int)
    out = np.zeros(len(shifts))
    if isinstance(N, Power):
        # closed form, no padding needed; scaled by the max to avoid under/overflow
        for r, h in enumerate(shifts):
            if h < cells:
                inc = _row_norms(v[h:-1] - v[: -h - 1])
                top = inc.max()
                if top > 0:
                    out[r] = top * (dt * np.sum((inc / top) ** N.p)) ** (1.0 / N.p)
        return out
    chunk = _block_rows(len(shifts), cells * max(path.d, 4))
    for start in range(0, len(shifts), chunk):
        hs = shifts[start : start + chunk]
        V = np.zeros((len(hs), cells))
        W = np.zeros((len(hs), cells))
        for r, h in enumerate(hs):
            if h < cells:
                V[r, : cells - h] = _row_norms(v[h:-1] - v[: -h - 1])
                W[r, : cells - h] = dt
        out[start : start + len(hs)] = luxemburg_norms(V, W, N)
    return out


def _level_steps(path_cells: int, J: int) -> np.ndarray:
    return np.array([path_cells >> j for j in range(J + 1)], dtype=int)


def modulus(path: SampledPath, j: int, N: YoungFunction, mode: str = "exhaustive") -> float:
    """omega_N(f, 2**-j |I|): sup over grid shifts (exhaustive) or the single shift (fast)."""
    if not 0 <= j <= path.J:
        raise ValueError(f"level j={j} is not resolved by a grid with J={path.J}")
    k = path.cells >> j
    if mode == "fast":
        return increment_norm(path, k, N)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    return float(increment_norms(path, N, np.arange(1, k + 1)).max())


def dyadic_besov_norm(path: SampledPath, params: BesovParams, mode: str = "fast") -> tuple[float, ModulusProfile]:
    """||f||_{L^N} + || (h_j^-alpha w_j)_j ||_{l^q} with w_j single-shift (fast) or sup (exhaustive)."""
    J = path.J
    steps = _level_steps(path.cells, J)
    if mode == "fast":
        inc = increment_norms(path, params.N, steps)
        omega = inc
    elif mode == "exhaustive":
        if path.cells > EXHAUSTIVE_MAX_CELLS:
            raise ValueError(f"exhaustive mode is limited to {EXHAUSTIVE_MAX_CELLS} cells")
        every = increment_norms(path, params.N)
        running = np.maximum.accumulate(every)
        inc = every[steps - 1]
        omega = running[steps - 1]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    shift = steps * path.dt
    terms = shift ** (-params.alpha) * omega
    semi = float(_ell_q(terms, params.q))
    leb = lebesgue_norm(path, params.N)
    profile = ModulusProfile(mode, np.arange(J + 1), shift, inc, omega, terms, leb, semi)
    return leb + semi, profile


def full_seminorm(path: SampledPath, params: BesovParams) -> float:
    if not math.isinf(params.q):
        raise ValueError("the continuous-t norm is implemented for q = inf only; use dyadic_besov_norm")
    if path.cells > EXHAUSTIVE_MAX_CELLS:
        raise ValueError(f"full_besov_norm is limited to {EXHAUSTIVE_MAX_CELLS} cells")
    omega = np.maximum.accumulate(increment_norms(path, params.N))
    t = np.arange(1, path.cells + 1) * path.dt
    return float(np.max(t ** (-params.alpha) * omega))


def seminorm_sandwich(path: SampledPath, params: BesovParams) -> tuple[float, float, float]:
    """(fast dyadic, full grid sup, exhaustive dyadic) seminorms from one pass over all shifts.

    For q = inf these satisfy fast <= full <= 2**alpha * exhaustive.
    """
    if not math.isinf(params.q):
        raise ValueError("the sandwich is stated for q = inf")
    every = increment_norms(path, params.N)
    omega = np.maximum.accumulate(every)
    t = np.arange(1, path.cells + 1) * path.dt
    steps = _level_steps(path.cells, path.J)
    h = steps * path.dt
    fast = np.max(h ** (-params.alpha) * every[steps - 1])
    exh = np.max(h ** (-params.alpha) * omega[steps - 1])
    full = np.max(t ** (-params.alpha) * omega)
    return float(fast), float(full), float(exh)


def full_besov_norm(path: SampledPath, params: BesovParams) -> float:
    """||f||_{L^N} + sup over grid t of t^-alpha omega(f, t)."""
    semi = full_seminorm(path, params)
    return lebesgue_norm(path, params.N) + semi


def dyadic_besov_norms(values, t0: float, T: float, params: BesovParams, kind: str = "linear"):
    """Fast-mode dyadic norms of a batch of paths sharing one grid.

    ``values`` has shape (R, n) or (R, n, d).  Returns ``(norm, seminorm,
    terms)`` with ``terms`` of shape (R, J + 1).
    """
    V = np.asarray(values, dtype=float)
    if V.ndim == 2:
        V = V[:, :, None]
    R, n, d = V.shape
    probe = SampledPath(t0, T, np.zeros((n, 1)), kind=kind)
    steps = _level_steps(probe.cells, probe.J)
    dt = probe.dt
    qw = probe.quadrature_weights()
    terms = np.zeros((R, len(steps)))
    leb = np.zeros(R)
    cells = n - 1
    rows = _block_rows(R, n * d)
    for a in range(0, R, rows):
        blk = V[a : a + rows]
        leb[a : a + rows] = luxemburg_norms(_row_norms(blk), qw, params.N)
        for col, h in enumerate(steps):
            if h >= cells:
                continue
            inc = _row_norms(blk[:, h:-1] - blk[:, : -h - 1])
            terms[a : a + rows, col] = (h * dt) ** (-params.alpha) * luxemburg_norms(inc, np.full(cells - h, dt), params.N)
    semi = _ell_q(terms, params.q)
    return leb + semi, semi, terms


def gagliardo_seminorm(path: SampledPath, s: float, p: float) -> float:
    """Double-sum quadrature of the W^{s,p} Gagliardo seminorm (product trapezoid weights)."""
    if not 0 < s < 1 or p < 1:
        raise ValueError("need s in (0, 1) and p >= 1")
    v, dt = path.values, path.dt
    w = np.full(path.n, dt)
    w[0] = w[-1] = 0.5 * dt
    total = 0.0
    for h in range(1, path.cells + 1):
        inc = _row_norms(v[h:] - v[:-h])
        total += np.sum(w[h:] * w[:-h] * inc**p) / (h * dt) ** (s * p + 1)
    return float((2.0 * total) ** (1.0 / p))


def steklov_k_estimate(path: SampledPath, t: float, N: YoungFunction) -> float:
    """||f - g_t|| + t ||g_t'|| for the Steklov mean g_t(x) = t^-1 int_x^{x+t} f.

    ``g_t`` uses trapezoid quadrature over the grid, ``g_t' = (f(x+t) - f(x)) / t``;
    both norms are taken over I(t) with the increment weights.  Upper bound
    for the K-functional K_N(f, t).
    """
    k = int(math.floor(t / path.dt + 1e-9))
    if k < 1:
        raise ValueError(f"t={t} is below the grid resolution dt={path.dt}")
    if k >= path.cells:
        return 0.0
    v = path.values
    csum = np.vstack([np.zeros((1, path.d)), np.cumsum(v, axis=0)])
    m = path.cells - k  # nodes of I(t) with positive weight
    window = csum[k + 1 : k + 1 + m] - csum[:m] - 0.5 * (v[:m] + v[k : k + m])
    g = window / k
    w = np.full(m, path.dt)
    dev = luxemburg_norms(_row_norms(v[:m] - g), w, N)
    slope = luxemburg_norms(_row_norms(v[k : k + m] - v[:m]), w, N)
    return float(dev + slope)


def steklov_k_profile(path: SampledPath, N: YoungFunction) -> np.ndarray:
    """steklov_k_estimate at every resolved t = k dt, k = 1..cells-1, in one batch."""
    cells, dt, v = path.cells, path.dt, path.values
    ks = np.arange(1, cells)
    csum = np.vstack([np.zeros((1, path.d)), np.cumsum(v, axis=0)])
    out = np.zeros(ks.size)
    chunk = _block_rows(ks.size, cells * max(path.d, 4))
    for start in range(0, ks.size, chunk):
        kk = ks[start : start + chunk]
        dev = np.zeros((kk.size, cells))
        slope = np.zeros((kk.size, cells))
        w = np.zeros((kk.size, cells))
        for r, k in enumerate(kk):
            m = cells - k
            g = (csum[k + 1 : k + 1 + m] - csum[:m] - 0.5 * (v[:m] + v[k : k + m])) / k
            dev[r, :m] = _row_norms(v[:m] - g)
            slope[r, :m] = _row_norms(v[k : k + m] - v[:m])
            w[r, :m] = dt
        out[start : start + kk.size] = luxemburg_norms(dev, w, N) + luxemburg_norms(slope, w, N)
    return out


def _max_increments(path: SampledPath, shifts) -> np.ndarray:
    v = path.values
    return np.array([_row_norms(v[h:] - v[:-h]).max() for h in shifts])


def holder_seminorm(path: SampledPath, alpha: float, mode: str = "exact") -> float:
    """max over node pairs of ||f(t) - f(s)|| / |t - s|^alpha.

    ``mode="dyadic"`` restricts to pairs at distance 2^k dt (O(n log n)).
    """
    if mode == "exact":
        shifts = np.arange(1, path.cells + 1)
    elif mode == "dyadic":
        shifts = 2 ** np.arange(int(math.log2(path.cells)) + 1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(np.max(_max_increments(path, shifts) / (shifts * path.dt) ** alpha))


def levy_ratio(path: SampledPath, finest: int = 0, coarsest: int | None = None) -> float:
    """max over dyadic shifts h = 2^k dt of sup_s ||Delta_h f(s)|| / sqrt(2 h log(1/h)).

    Levy's modulus is a statement about h -> 0, so by default only the finest
    scales enter: k runs from 0 to floor(J / 4), i.e. dt <= h <= dt**(3/4).
    Coarser shifts have a small log(1/h) and bias the ratio upwards.
    """
    J = path.J
    if J < 4:
        raise ValueError("levy_ratio needs J >= 4")
    coarsest = J // 4 if coarsest is None else coarsest
    ks = np.arange(finest, coarsest + 1)
    h = (2.0**ks) * path.dt
    keep = h < 1
    ks, h = ks[keep], h[keep]
    sup = _max_increments(path, 2**ks)
    return float(np.max(sup / np.sqrt(2 * h * np.log(1 / h))))


def _grr_integrand(v: float, c: float, alpha: float, beta: float) -> float:
    if v <= 0:
        return math.inf
    return math.log1p(c * v ** (-2.0 / alpha)) ** (1.0 / beta)


@lru_cache(maxsize=1 << 16)
def grr_zeta(r: float, alpha: float, beta: float, interval_length: float) -> float:
    """8 alpha int_0^r u^(alpha-1) Phi_beta^-1(2 |I| u^-2) du.

    Evaluated after u = r v^(1/alpha), which turns it into
    8 r^alpha int_0^1 Phi_beta^-1(2 |I| r^-2 v^(-2/alpha)) dv.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return 0.0
    c = 2.0 * interval_length / r**2
    val, _ = integrate.quad(_grr_integrand, 0.0, 1.0, args=(c, alpha, beta), limit=200, epsabs=0, epsrel=1e-11)
    return 8.0 * r**alpha * val


def grr_zeta_table(path: SampledPath, alpha: float, beta: float) -> np.ndarray:
    """zeta(h dt) for h = 1..cells (index h-1)."""
    return np.array([grr_zeta(h * path.dt, alpha, beta, path.length) for h in range(1, path.cells + 1)])


def phi2_params(alpha: float = 0.5) -> BesovParams:
    return BesovParams(alpha, math.inf, ExpPower(2.0))
