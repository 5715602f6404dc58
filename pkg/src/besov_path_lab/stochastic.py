"""Exact-in-law simulation of Brownian motion, Ito integrals of step integrands and
stochastic / deterministic convolutions against diagonal semigroups.

Noise model.  On each grid cell of length ``dt`` and for each Brownian
component ``j`` we sample, jointly Gaussian, the Wiener integrals of the kernels
``1`` (the increment), ``exp(-lam tau)`` for every rate ``lam > 0`` that the
integrand couples to component ``j`` and, when some coupled rate is 0, the ramp
``tau`` (``tau`` is the time left until the cell end).  Their covariance is the
L^2(0, dt) Gram matrix of the kernels; a deterministic pivoted Cholesky factor
with the increment forced as first pivot maps standard normals to the vector.
Hence the Brownian increments of a stream do not depend on the model, and

    M(t_{i+1}) = M(t_i) + f_i dW_i
    u(t_{i+1}) = e^{-lam dt} u(t_i) + f_i I_i
    v(t_{i+1}) = e^{-lam dt} v(t_i) + Q(dt) M(t_i) + (f_i dW_i - f_i I_i) / lam

are exact in law jointly at the nodes (the last line uses the ramp kernel when
``lam = 0``).  ``u = -lam v + M`` then holds up to rounding.

Random streams.  ``RngSpec(seed, stream)`` seeds ``PCG64`` from
``SeedSequence(seed, spawn_key=(stream,))``.  Standard normals are produced by
inverse CDF, ``ndtri(U + 2**-54)`` with ``U = Generator.random()``, which is
bitwise reproducible across platforms.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import signal, special

from .paths import SampledPath

__all__ = [
    "RngSpec",
    "standard_normals",
    "StepIntegrand",
    "DiagonalModel",
    "WienerNoise",
    "PathBundle",
    "sample_brownian",
    "ito_integral",
    "stochastic_convolution",
    "q_convolution",
    "deterministic_convolution",
    "simulate",
    "simulate_batch",
    "representation_check",
    "conditional_increment_check",
    "simulate_adapted",
    "kernel_gram",
    "pivoted_cholesky",
]


# ----------------------------------------------------------------------------- RNG

@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def standard_normals(gen: np.random.Generator, shape) -> np.ndarray:
    u = gen.random(shape)
    return special.ndtri(u + 2.0**-54)


# ----------------------------------------------------------------------------- models

@dataclass(frozen=True, eq=False)
class StepIntegrand:
    """Piecewise constant f(t) = blocks[i] on [t_i, t_{i+1}); blocks has shape (cells, d, m)."""

    blocks: np.ndarray
    T: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=float)
        if b.ndim == 1:
            b = b[:, None, None]
        if b.ndim != 3:
            raise ValueError(f"blocks must have shape (cells, d, m), got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("integrand blocks must be finite")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def cells(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[1]

    @property
    def m(self) -> int:
        return self.blocks.shape[2]

    @property
    def dt(self) -> float:
        return self.T / self.cells

    def hs_norms(self) -> np.ndarray:
        """Hilbert-Schmidt (Frobenius) norm per cell."""
        return np.sqrt(np.einsum("ckj,ckj->c", self.blocks, self.blocks))

    def lq_norm(self, q: float) -> float:
        """||f||_{L^q(0,T; gamma(H,X))}."""
        h = self.hs_norms()
        if math.isinf(q):
            return float(h.max())
        return float((self.dt * np.sum(h**q)) ** (1.0 / q))

    def coupling(self) -> np.ndarray:
        """Boolean (d, m) pattern of entries that are non-zero on some cell."""
        return np.any(self.blocks != 0, axis=0)

    def __add__(self, other: "StepIntegrand") -> "StepIntegrand":
        return StepIntegrand(self.blocks + other.blocks, self.T, f"{self.name}+{other.name}")

    def __sub__(self, other: "StepIntegrand") -> "StepIntegrand":
        return StepIntegrand(self.blocks - other.blocks, self.T, f"{self.name}-{other.name}")

    def __mul__(self, c: float) -> "StepIntegrand":
        return StepIntegrand(c * self.blocks, self.T, self.name)

    __rmul__ = __mul__

    @classmethod
    def constant(cls, J: int, value=1.0, d: int = 1, m: int = 1, T: float = 1.0):
        block = np.broadcast_to(np.asarray(value, dtype=float), (d, m))
        return cls(np.broadcast_to(block, (2**J, d, m)).copy(), T, "const")

    @classmethod
    def indicator(cls, J: int, a: float, b: float, T: float = 1.0):
        """Scalar 1_{[a, b)} (cells whose left node lies in [a, b))."""
        t = np.arange(2**J) * (T / 2**J)
        return cls(((t >= a) & (t < b)).astype(float), T, f"indicator[{a},{b})")

    @classmethod
    def diagonal(cls, J: int, d: int, scale=1.0, T: float = 1.0):
        """f(t) = diag(scale) on every cell: mode k driven by noise component k."""
        s = np.broadcast_to(np.asarray(scale, dtype=float), (d,))
        return cls(np.broadcast_to(np.diag(s), (2**J, d, d)).copy(), T, "diagonal")

    @classmethod
    def from_function(cls, fn: Callable, J: int, T: float = 1.0, name: str = "fn"):
        """Blocks fn(t_i) evaluated at left cell nodes; fn returns scalars or (d, m) arrays."""
        t = np.arange(2**J) * (T / 2**J)
        vals = [np.asarray(fn(x), dtype=float) for x in t]
        return cls(np.array([np.atleast_2d(v) for v in vals]), T, name)


@dataclass(frozen=True, eq=False)
class DiagonalModel:
    """S(t) = diag(exp(-lam_k t)).

    ``shift`` is the exponential-stabilisation parameter: the shifted family
    U(t) = exp(-shift t) S(t) has rates ``lam_k + shift``.  It is applied as the
    pathwise multiplier exp(-shift t) by :meth:`shifted_convolution`.
    """

    eigenvalues: np.ndarray
    shift: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.eigenvalues, dtype=float))
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a non-empty 1-d array")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite and >= 0 (A = -diag(lam))")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @classmethod
    def heat(cls, d: int = 32, shift: float = 0.0):
        """Dirichlet Laplacian on (0, 1): lam_k = (pi k)^2."""
        return cls((np.pi * np.arange(1, d + 1)) ** 2, shift, f"heat{d}")

    @classmethod
    def scalar(cls, lam: float):
        return cls(np.array([lam]), 0.0, f"scalar{lam:g}")

    @property
    def d(self) -> int:
        return self.eigenvalues.size

    def decay(self, dt: float) -> np.ndarray:
        return np.exp(-self.eigenvalues * dt)

    def q_factor(self, dt: float) -> np.ndarray:
        """Q(dt) = int_0^dt S(r) dr per mode."""
        lam = self.eigenvalues
        out = np.full(lam.shape, dt)
        pos = lam > 0
        out[pos] = -np.expm1(-lam[pos] * dt) / lam[pos]
        return out

    def apply_A(self, values: np.ndarray) -> np.ndarray:
        return -values * self.eigenvalues

    def fingerprint(self) -> str:
        return hashlib.sha256(self.eigenvalues.tobytes()).hexdigest()[:16]

    def shifted_convolution(self, g: SampledPath) -> SampledPath:
        """int_0^t U(t-s) g(s) ds with U(t) = exp(-shift t) S(t), via the multiplier identity
        exp(-shift t) int_0^t S(t-s) exp(shift s) g(s) ds."""
        t = g.times[:, None] - g.t0
        inner = deterministic_convolution(g.with_values(g.values * np.exp(self.shift * t)), self)
        return inner.with_values(inner.values * np.exp(-self.shift * t))


# ----------------------------------------------------------------------------- kernels

def _exp_exp(a: float, b: float, dt: float) -> float:
    s = a + b
    return dt if s == 0 else -math.expm1(-s * dt) / s


def _ramp_exp(a: float, dt: float) -> float:
    x = a * dt
    if x < 0.1:
        # dt^2 sum_n (-x)^n / (n! (n + 2))
        total, term = 0.0, 1.0
        for n in range(25):
            total += term / (n + 2)
            term *= -x / (n + 1)
        return dt * dt * total
    return (1.0 - math.exp(-x) * (1.0 + x)) / (a * a)


def kernel_gram(rates: Sequence[float], ramp: bool, dt: float) -> np.ndarray:
    """Gram matrix in L^2(0, dt) of the kernels exp(-r tau) (r in ``rates``) and optionally tau."""
    k = len(rates) + int(ramp)
    G = np.empty((k, k))
    for a, ra in enumerate(rates):
        for b, rb in enumerate(rates):
            G[a, b] = _exp_exp(ra, rb, dt)
        if ramp:
            G[a, -1] = G[-1, a] = _ramp_exp(ra, dt)
    if ramp:
        G[-1, -1] = dt**3 / 3.0
    return G


def pivoted_cholesky(G: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """L (k, r) with L L^T = G up to truncated residual variance, first pivot forced to 0.

    Pivoting works on the correlation matrix so that kernels of very different
    scale (dt vs dt^3) are resolved equally well.
    """
    D = np.sqrt(np.diag(G))
    C = G / np.outer(D, D)
    k = C.shape[0]
    L = np.zeros((k, k))
    resid = np.ones(k)
    used = np.zeros(k, dtype=bool)
    r = 0
    for r in range(k):
        p = 0 if r == 0 else int(np.argmax(np.where(used, -np.inf, resid)))
        if r > 0 and resid[p] <= rtol:
            break
        col = (C[:, p] - L[:, :r] @ L[p, :r]) / math.sqrt(resid[p])
        L[:, r] = col
        resid = resid - col**2
        resid[p] = 0.0
        used[p] = True
    else:
        r = k
    return D[:, None] * L[:, :r]


@dataclass(frozen=True)
class _Plan:
    """Which kernels are sampled for which Brownian component."""

    m: int
    dt: float
    rates: tuple  # per component: tuple of positive rates
    ramp: tuple  # per component: bool
    factors: tuple  # per component: (k_j, r_j) Cholesky factors
    extra: tuple  # per component: offset into the extra-normals block
    n_extra: int
    pair_k: np.ndarray
    pair_j: np.ndarray
    pair_col: np.ndarray  # column in the component's kernel vector, -1 for lam = 0

    @staticmethod
    def build(coupling: np.ndarray, eigenvalues: np.ndarray, dt: float) -> "_Plan":
        d, m = coupling.shape
        rates, ramps, factors, extra = [], [], [], []
        pk, pj, pc = [], [], []
        offset = 0
        for j in range(m):
            ks = np.flatnonzero(coupling[:, j])
            lam = eigenvalues[ks]
            pos = tuple(sorted(set(float(x) for x in lam if x > 0)))
            ramp = bool(np.any(lam == 0))
            G = kernel_gram((0.0,) + pos, ramp, dt)
            L = pivoted_cholesky(G)
            rates.append(pos)
            ramps.append(ramp)
            factors.append(L)
            extra.append(offset)
            offset += L.shape[1] - 1
            for k, lk in zip(ks, lam):
                pk.append(k)
                pj.append(j)
                pc.append(1 + pos.index(float(lk)) if lk > 0 else -1)
        return _Plan(m, dt, tuple(rates), tuple(ramps), tuple(factors), tuple(extra), offset,
                     np.array(pk, dtype=int), np.array(pj, dtype=int), np.array(pc, dtype=int))


# ----------------------------------------------------------------------------- noise

@dataclass(frozen=True, eq=False)
class WienerNoise:
    """Brownian increments plus the kernel integrals needed by one (integrand, model) pair.

    Arrays carry a leading replica axis: ``dW`` is (R, cells, m); ``kernels[j]``
    is (R, cells, k_j) with column 0 equal to ``dW[..., j]``.
    """

    dW: np.ndarray
    kernels: tuple
    plan: _Plan
    T: float
    seeds: tuple
    model_fingerprint: str

    @property
    def cells(self) -> int:
        return self.dW.shape[1]

    @property
    def provenance(self) -> str:
        return hashlib.sha256(self.dW.tobytes()).hexdigest()[:16]

    @classmethod
    def sample(cls, f: StepIntegrand, model: DiagonalModel, rngs: RngSpec | Sequence[RngSpec]) -> "WienerNoise":
        if f.d != model.d:
            raise ValueError(f"integrand has d={f.d} but model has d={model.d}")
        specs = [rngs] if isinstance(rngs, RngSpec) else list(rngs)
        plan = _Plan.build(f.coupling(), model.eigenvalues, f.dt)
        cells, m = f.cells, f.m
        z0 = np.empty((len(specs), cells, m))
        ze = np.empty((len(specs), cells, plan.n_extra))
        for r, spec in enumerate(specs):
            gen = spec.generator()
            z0[r] = standard_normals(gen, (cells, m))
            if plan.n_extra:
                ze[r] = standard_normals(gen, (cells, plan.n_extra))
        dW = math.sqrt(f.dt) * z0
        kernels = []
        for j in range(m):
            L = plan.factors[j]
            X = z0[..., j : j + 1] * L[:, 0]
            rj = L.shape[1]
            if rj > 1:
                o = plan.extra[j]
                X = X + ze[..., o : o + rj - 1] @ L[:, 1:].T
            X[..., 0] = dW[..., j]
            kernels.append(X)
        seeds = tuple((s.master_seed, s.stream_id) for s in specs)
        return cls(dW, tuple(kernels), plan, f.T, seeds, model.fingerprint())


# ----------------------------------------------------------------------------- recursions

def _scan(a: float, drive: np.ndarray) -> np.ndarray:
    """x_0 = 0, x_{i+1} = a x_i + drive_i along axis 1; returns (R, cells + 1, ...)."""
    out = np.zeros((drive.shape[0], drive.shape[1] + 1) + drive.shape[2:])
    if a == 1.0:
        np.cumsum(drive, axis=1, out=out[:, 1:])
    else:
        out[:, 1:] = signal.lfilter([1.0], [1.0, -a], drive, axis=1)
    return out


def _check_grid(f: StepIntegrand, noise: WienerNoise) -> None:
    if noise.cells != f.cells or noise.dW.shape[2] != f.m or not math.isclose(noise.T, f.T):
        raise ValueError("integrand and increments live on different grids")


def _ito_values(f: StepIntegrand, dW: np.ndarray) -> np.ndarray:
    if dW.shape[1] != f.cells or dW.shape[2] != f.m:
        raise ValueError("integrand and increments live on different grids")
    return _scan(1.0, np.einsum("ckj,rcj->rck", f.blocks, dW))


def _coupled_drive(f: StepIntegrand, noise: WienerNoise, ramp: bool = False) -> np.ndarray:
    """sum_j f_{kj} * (kernel integral of component j at the rate of mode k), shape (R, cells, d)."""
    plan = noise.plan
    R = noise.dW.shape[0]
    out = np.zeros((R, f.cells, f.d))
    sel = plan.pair_col == -1 if ramp else plan.pair_col >= 0
    for k, j, c in zip(plan.pair_k[sel], plan.pair_j[sel], plan.pair_col[sel]):
        col = noise.kernels[j][..., -1 if ramp else c]
        out[..., k] += f.blocks[:, k, j] * col
    return out


def _conv_values(f: StepIntegrand, model: DiagonalModel, noise: WienerNoise, M: np.ndarray | None = None):
    if noise.model_fingerprint != model.fingerprint():
        raise ValueError("noise was sampled for a different model")
    _check_grid(f, noise)
    if M is None:
        M = _ito_values(f, noise.dW)
    g = _coupled_drive(f, noise)
    u = np.empty_like(M)
    a = model.decay(f.dt)
    for k, lam in enumerate(model.eigenvalues):
        u[..., k] = M[..., k] if lam == 0 else _scan(float(a[k]), g[..., k])
    return M, u, g


def _v_values(f, model, noise, M, g) -> np.ndarray:
    dM = np.diff(M, axis=1)
    ramp = _coupled_drive(f, noise, ramp=True)
    a = model.decay(f.dt)
    qf = model.q_factor(f.dt)
    v = np.empty_like(M)
    for k, lam in enumerate(model.eigenvalues):
        K = ramp[..., k] if lam == 0 else (dM[..., k] - g[..., k]) / lam
        v[..., k] = _scan(float(a[k]), qf[k] * M[:, :-1, k] + K)
    return v


def _as_path(values: np.ndarray, T: float, meta: dict) -> SampledPath:
    return SampledPath(0.0, T, values, meta=meta)


def sample_brownian(J: int, d: int, rng: RngSpec, T: float = 1.0) -> SampledPath:
    """W on [0, T] at 2**J + 1 nodes; the increments are the first normals of the stream."""
    if J < 1:
        raise ValueError("J must be >= 1")
    gen = rng.generator()
    dW = math.sqrt(T / 2**J) * standard_normals(gen, (2**J, d))
    W = np.vstack([np.zeros((1, d)), np.cumsum(dW, axis=0)])
    return _as_path(W, T, {"seed": rng.master_seed, "stream": rng.stream_id})


def ito_integral(f: StepIntegrand, increments) -> SampledPath:
    """Left-point sums M(t_{i+1}) = M(t_i) + f_i dW_i; ``increments`` is (cells, m) or a WienerNoise."""
    dW = increments.dW if isinstance(increments, WienerNoise) else np.asarray(increments, dtype=float)[None]
    if dW.ndim == 2:
        dW = dW[:, :, None]
    if dW.shape[0] != 1:
        raise ValueError("ito_integral takes a single increment array")
    return _as_path(_ito_values(f, dW)[0], f.T, {})


def stochastic_convolution(f: StepIntegrand, model: DiagonalModel, noise: WienerNoise) -> SampledPath:
    """S<>f at the nodes, exact in law; equals ito_integral where lam_k = 0."""
    _, u, _ = _conv_values(f, model, noise)
    return _as_path(u[0], f.T, {})


def q_convolution(f: StepIntegrand, model: DiagonalModel, noise: WienerNoise) -> SampledPath:
    """v(t) = int_0^t Q(t - s) f(s) dW(s) with Q(r) = int_0^r S."""
    M, _, g = _conv_values(f, model, noise)
    return _as_path(_v_values(f, model, noise, M, g)[0], f.T, {})


def deterministic_convolution(g: SampledPath, model: DiagonalModel) -> SampledPath:
    """u(t) = int_0^t S(t - s) g(s) ds with g linear between nodes approximated by the cell mean.

    u_{i+1} = e^{-lam dt} u_i + (g_i + g_{i+1}) / 2 * Q(dt); cumulative trapezoid when lam = 0.
    """
    if g.d != model.d:
        raise ValueError(f"path has d={g.d} but model has d={model.d}")
    gbar = 0.5 * (g.values[1:] + g.values[:-1])
    a = model.decay(g.dt)
    qf = model.q_factor(g.dt)
    out = np.empty_like(g.values)
    for k in range(model.d):
        out[:, k] = _scan(float(a[k]), (qf[k] * gbar[:, k])[None])[0]
    return g.with_values(out)


# ----------------------------------------------------------------------------- bundles

@dataclass(frozen=True, eq=False)
class PathBundle:
    increments: np.ndarray
    W: SampledPath
    M: SampledPath
    u: SampledPath
    v: SampledPath
    provenance: str
    model_fingerprint: str
    meta: dict = field(default_factory=dict)


def simulate(f: StepIntegrand, model: DiagonalModel, rng: RngSpec, preset: str | None = None) -> PathBundle:
    """One replica: W, M = f.W, u = S<>f and v, all from the same normals."""
    noise = WienerNoise.sample(f, model, rng)
    M, u, g = _conv_values(f, model, noise)
    v = _v_values(f, model, noise, M, g)
    W = np.vstack([np.zeros((1, f.m)), np.cumsum(noise.dW[0], axis=0)])
    meta = {
        "seed": int(rng.master_seed),
        "stream": int(rng.stream_id),
        "J": int(round(math.log2(f.cells))),
        "d": f.d,
        "m": f.m,
        "T": f.T,
        "eigenvalues": model.eigenvalues.tolist(),
        "shift": model.shift,
        "integrand_preset": preset or f.name,
    }
    return PathBundle(noise.dW[0], _as_path(W, f.T, meta), _as_path(M[0], f.T, meta), _as_path(u[0], f.T, meta),
                      _as_path(v[0], f.T, meta), noise.provenance, model.fingerprint(), meta)


def simulate_batch(f: StepIntegrand, model: DiagonalModel, master_seed: int, streams: Sequence[int],
                   want: Sequence[str] = ("M", "u")) -> dict:
    """Node values of the requested paths for many streams, each of shape (R, cells + 1, d)."""
    specs = [RngSpec(master_seed, int(s)) for s in streams]
    out = {}
    if set(want) <= {"W", "M"}:
        dW = np.empty((len(specs), f.cells, f.m))
        for r, spec in enumerate(specs):
            dW[r] = math.sqrt(f.dt) * standard_normals(spec.generator(), (f.cells, f.m))
        if "W" in want:
            out["W"] = _scan(1.0, dW)
        if "M" in want:
            out["M"] = _ito_values(f, dW)
        return out
    noise = WienerNoise.sample(f, model, specs)
    M, u, g = _conv_values(f, model, noise)
    if "W" in want:
        out["W"] = _scan(1.0, noise.dW)
    if "M" in want:
        out["M"] = M
    if "u" in want:
        out["u"] = u
    if "v" in want:
        out["v"] = _v_values(f, model, noise, M, g)
    return out


def representation_check(bundle: PathBundle, model: DiagonalModel) -> float:
    """max_i ||u(t_i) - (A v(t_i) + M(t_i))|| / (1 + max ||u||)."""
    if bundle.provenance != hashlib.sha256(bundle.increments[None].tobytes()).hexdigest()[:16]:
        raise ValueError("bundle paths were not built from its increment array")
    if bundle.model_fingerprint != model.fingerprint():
        raise ValueError("bundle was simulated with a different model")
    u, v, M = bundle.u.values, bundle.v.values, bundle.M.values
    defect = np.linalg.norm(u - (model.apply_A(v) + M), axis=1).max()
    return float(defect / (1.0 + bundle.u.norms().max()))


# ----------------------------------------------------------------------------- statistics

def conditional_increment_check(f: StepIntegrand, pairs: Sequence[tuple[float, float]], ps: Sequence[float],
                                master_seed: int, replicas: int) -> list[dict]:
    """Monte Carlo (E||M_t - M_a||^p)^{1/p} for scalar f over the (a, t) grid and p grid."""
    if f.d != 1 or f.m != 1:
        raise ValueError("conditional_increment_check takes a scalar integrand")
    M = simulate_batch(f, DiagonalModel(np.zeros(1)), master_seed, range(replicas), want=("M",))["M"][..., 0]
    rows = []
    for a, t in pairs:
        ia, it = int(round(a / f.dt)), int(round(t / f.dt))
        inc = np.abs(M[:, it] - M[:, ia])
        for p in ps:
            mom = np.mean(inc**p)
            se = np.std(inc**p, ddof=1) / math.sqrt(replicas)
            rows.append({"a": a, "t": t, "p": p, "estimate": mom ** (1 / p), "moment": mom, "moment_se": se})
    return rows


def simulate_adapted(sigma: Callable[[np.ndarray], np.ndarray], J: int, master_seed: int, streams: Sequence[int],
                     T: float = 1.0):
    """Scalar M with on-line integrand f_i = sigma(|M(t_i)|) (adapted by construction).

    Returns ``(M, blocks, dW)`` with shapes (R, cells + 1), (R, cells), (R, cells).
    """
    cells = 2**J
    dt = T / cells
    dW = np.empty((len(streams), cells))
    for r, s in enumerate(streams):
        dW[r] = math.sqrt(dt) * standard_normals(RngSpec(master_seed, int(s)).generator(), cells)
    M = np.zeros((len(streams), cells + 1))
    blocks = np.empty_like(dW)
    for i in range(cells):
        blocks[:, i] = sigma(np.abs(M[:, i]))
        M[:, i + 1] = M[:, i] + blocks[:, i] * dW[:, i]
    return M, blocks, dW
