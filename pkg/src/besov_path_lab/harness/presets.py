"""Named integrand and eigenvalue presets used by configs and the CLI."""

from __future__ import annotations

import math

import numpy as np

from ..stochastic import DiagonalModel, StepIntegrand

INTEGRAND_PRESETS = ("zero", "const:<c>", "indicator:<a>:<b>", "sin:<k>", "diag:<s>", "heat-diag[:<s>]")
EIGEN_PRESETS = ("zero", "heat", "scalar:<lam>")


def make_integrand(spec: str, J: int, d: int = 1, m: int = 1, T: float = 1.0) -> StepIntegrand:
    """Build a step integrand from a preset string.

    ``const:c`` puts c on the diagonal of a (d, m) block, ``diag:s`` is s times
    the identity, ``heat-diag:s`` is (s / sqrt(d)) times the identity so that
    its Hilbert-Schmidt norm is s.
    """
    kind, *args = spec.split(":")
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise ValueError(f"bad integrand preset {spec!r}") from None
    if kind == "zero":
        return StepIntegrand(np.zeros((2**J, d, m)), T, "zero")
    if kind == "const":
        block = (vals[0] if vals else 1.0) * np.eye(d, m)
        return StepIntegrand(np.broadcast_to(block, (2**J, d, m)).copy(), T, spec)
    if kind == "indicator":
        if d != 1 or m != 1 or len(vals) != 2:
            raise ValueError("indicator:<a>:<b> is a scalar preset")
        return StepIntegrand.indicator(J, vals[0], vals[1], T)
    if kind == "sin":
        if d != 1 or m != 1:
            raise ValueError("sin:<k> is a scalar preset")
        k = vals[0] if vals else 1.0
        t = np.arange(2**J) * (T / 2**J)
        return StepIntegrand(np.sin(2 * np.pi * k * t), T, spec)
    if kind in ("diag", "heat-diag"):
        if d != m:
            raise ValueError(f"{kind} needs d == m")
        s = vals[0] if vals else 1.0
        if kind == "heat-diag":
            s /= math.sqrt(d)
        return StepIntegrand(np.broadcast_to(s * np.eye(d), (2**J, d, d)).copy(), T, spec)
    raise ValueError(f"unknown integrand preset {spec!r}; known: {', '.join(INTEGRAND_PRESETS)}")


def make_model(spec: str, d: int, shift: float = 0.0) -> DiagonalModel:
    kind, *args = spec.split(":")
    if kind == "zero":
        return DiagonalModel(np.zeros(d), shift, "zero")
    if kind == "heat":
        return DiagonalModel.heat(d, shift)
    if kind == "scalar":
        lam = float(args[0]) if args else 1.0
        return DiagonalModel(np.full(d, lam), shift, spec)
    raise ValueError(f"unknown eigenvalue preset {spec!r}; known: {', '.join(EIGEN_PRESETS)}")


def mode_direction(J: int, d: int, T: float = 1.0) -> StepIntegrand:
    """Deterministic diagonal perturbation direction with sup_t ||g(t)||_HS = 1."""
    t = np.arange(2**J) * (T / 2**J)
    k = np.arange(1, d + 1)
    diag = np.cos(np.pi * np.outer(t, k) / T) / k
    blocks = np.zeros((2**J, d, d))
    idx = np.arange(d)
    blocks[:, idx, idx] = diag
    g = StepIntegrand(blocks, T, "mode-cosine")
    return g * (1.0 / g.hs_norms().max())
