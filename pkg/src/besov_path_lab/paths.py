"""Uniformly sampled vector-valued paths, CSV interchange and path operators."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "SampledPath",
    "CsvFormatError",
    "read_csv",
    "write_csv",
    "extend_reflect",
    "extend_zero",
    "scale_affine",
]

KINDS = ("linear", "step")


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Path on [t0, T] sampled at ``cells + 1`` equispaced nodes.

    ``values`` has shape (n, d).  ``kind`` says how the samples are read
    between nodes: ``"linear"`` (continuous paths; L^N norms use trapezoid
    weights) or ``"step"`` (right-continuous step functions; left-endpoint
    weights, exact for indicators).  Increment norms use left-endpoint
    weights for both kinds.
    """

    t0: float
    T: float
    values: np.ndarray
    kind: str = "linear"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 2:
            raise ValueError(f"values must be (n, d) with n >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        if not self.T > self.t0:
            raise ValueError(f"need T > t0, got [{self.t0}, {self.T}]")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn: Callable, J: int, t0: float = 0.0, T: float = 1.0, kind: str = "linear"):
        t = np.linspace(t0, T, 2**J + 1)
        return cls(t0, T, np.asarray(fn(t), dtype=float), kind=kind)

    @classmethod
    def constant(cls, c, J: int, t0: float = 0.0, T: float = 1.0):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls(t0, T, np.tile(c, (2**J + 1, 1)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def cells(self) -> int:
        return self.n - 1

    @property
    def length(self) -> float:
        return self.T - self.t0

    @property
    def dt(self) -> float:
        return self.length / self.cells

    @property
    def J(self) -> int:
        """Number of dyadic halvings of the interval resolved by the grid."""
        c, j = self.cells, 0
        while c % 2 == 0:
            c //= 2
            j += 1
        return j

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def norms(self) -> np.ndarray:
        """Pointwise Euclidean norms ||f(t_i)||."""
        if self.d == 1:
            return np.abs(self.values[:, 0])
        return np.sqrt(np.einsum("ij,ij->i", self.values, self.values))

    def quadrature_weights(self) -> np.ndarray:
        w = np.full(self.n, self.dt)
        if self.kind == "step":
            w[-1] = 0.0
        else:
            w[0] = w[-1] = 0.5 * self.dt
        return w

    def with_values(self, values, **changes) -> "SampledPath":
        kw = dict(t0=self.t0, T=self.T, kind=self.kind)
        kw.update(changes)
        return SampledPath(values=values, **kw)

    def __add__(self, other: "SampledPath") -> "SampledPath":
        self._check_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledPath") -> "SampledPath":
        self._check_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "SampledPath":
        return self.with_values(c * self.values)

    __rmul__ = __mul__

    def _check_grid(self, other: "SampledPath") -> None:
        if (self.t0, self.T, self.n) != (other.t0, other.T, other.n):
            raise ValueError("paths live on different grids")


class CsvFormatError(ValueError):
    pass


def write_csv(path: SampledPath, target) -> None:
    """Write ``t,x0,...,x{d-1}`` with 17 significant digits."""
    header = ["t"] + [f"x{k}" for k in range(path.d)]
    table = np.column_stack([path.times, path.values])
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in table:
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    if hasattr(target, "write"):
        target.write(buf.getvalue())
    else:
        Path(target).write_text(buf.getvalue())


def read_csv(source, kind: str = "linear") -> SampledPath:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CsvFormatError("line 1: empty file, expected header 't,x0,...'")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise CsvFormatError(f"line 1: missing column 't' (got header {','.join(header)!r})")
    if len(header) < 2:
        raise CsvFormatError("line 1: missing column 'x0'")
    for k, name in enumerate(header[1:]):
        if name != f"x{k}":
            raise CsvFormatError(f"line 1: missing column 'x{k}' (found {name!r})")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise CsvFormatError(f"line {lineno}: missing column {header[len(row)]!r}")
        if len(row) > len(header):
            raise CsvFormatError(f"line {lineno}: {len(row)} fields but header has {len(header)}")
        try:
            data.append([float(c) for c in row])
        except ValueError as exc:
            raise CsvFormatError(f"line {lineno}: {exc}") from None
    if len(data) < 2:
        raise CsvFormatError("need at least two data rows")
    table = np.asarray(data)
    t = table[:, 0]
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, abs(t[-1]), abs(t[0])):
        bad = int(np.argmax(np.abs(steps - dt))) + 3
        raise CsvFormatError(f"line {bad}: time grid is not equispaced and increasing")
    return SampledPath(float(t[0]), float(t[-1]), table[:, 1:], kind=kind)


def extend_reflect(path: SampledPath) -> SampledPath:
    """Even reflection at both endpoints onto [2 t0 - T, 2 T - t0]."""
    v = path.values
    left = v[:0:-1]
    right = v[-2::-1]
    values = np.concatenate([left, v, right])
    return path.with_values(values, t0=2 * path.t0 - path.T, T=2 * path.T - path.t0)


def extend_zero(path: SampledPath, atol: float = 0.0) -> SampledPath:
    """Zero on [t0 - (T - t0), t0], the original path on [t0, T]."""
    if np.max(np.abs(path.values[0])) > atol:
        raise ValueError("extend_zero needs a path that starts at 0")
    zeros = np.zeros((path.cells, path.d))
    return path.with_values(np.concatenate([zeros, path.values]), t0=path.t0 - path.length)


def scale_affine(path: SampledPath, t0: float, T: float) -> SampledPath:
    """Same samples, reparametrised affinely onto [t0, T]."""
    if not (math.isfinite(t0) and math.isfinite(T)) or not T > t0:
        raise ValueError(f"degenerate target interval [{t0}, {T}]")
    return path.with_values(path.values, t0=t0, T=T)
