"""Flat typed key=value experiment configuration.

File format: one ``key = value`` per line, ``#`` starts a comment.  Lists are
comma separated.  Tolerances are ``tol.<name> = <float>`` and must be names the
experiment declares.  Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


def _float(s: str) -> float:
    s = s.strip().lower()
    if s in ("inf", "+inf", "infinity"):
        return math.inf
    return float(s)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv):
    def parse(s):
        s = s.strip()
        return tuple(conv(x) for x in s.split(",") if x.strip()) if s else ()
    return parse


_PARSERS = {
    "experiment": str.strip,
    "J": int,
    "J_grid": _list(int),
    "d": int,
    "m": int,
    "replicas": int,
    "p_grid": _list(_float),
    "q": _float,
    "alpha": _float,
    "alpha_grid": _list(_float),
    "young": str.strip,
    "young_grid": _list(str.strip),
    "integrand": str.strip,
    "eigen": str.strip,
    "seed": int,
    "out": str.strip,
    "threads": int,
    "delta": _float,
    "eps_grid": _list(_float),
    "kappa_grid": _list(_float),
    "b": _float,
    "ladder": int,
    "ensemble": int,
    "shift": _float,
    "plots": _bool,
}

MIN_REPLICAS = 100


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = ""
    J: int = 10
    J_grid: tuple = ()
    d: int = 1
    m: int = 1
    replicas: int = 10_000
    p_grid: tuple = (1.0, 2.0, 4.0, 8.0)
    q: float = math.inf
    alpha: float = 0.5
    alpha_grid: tuple = ()
    young: str = "phi2"
    young_grid: tuple = ()
    integrand: str = "const:1"
    eigen: str = "zero"
    seed: int = 20240601
    out: str = ""
    threads: int = 1
    delta: float = 1.0
    eps_grid: tuple = ()
    kappa_grid: tuple = ()
    b: float = 1.0
    ladder: int = 6
    ensemble: int = 10
    shift: float = 0.0
    plots: bool = False
    tol: dict = field(default_factory=dict)

    @property
    def smoke(self) -> bool:
        """Fewer than MIN_REPLICAS replicas: assertions are downgraded to warnings."""
        return self.replicas < MIN_REPLICAS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tol"] = dict(sorted(self.tol.items()))
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
            elif isinstance(v, float) and math.isinf(v):
                d[k] = "inf"
        return d

    def to_text(self) -> str:
        """Serialise in the key=value format (round-trips through :func:`parse_config_text`)."""
        lines = []
        for f in fields(self):
            if f.name == "tol":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(_fmt(x) for x in v)
            lines.append(f"{f.name} = {_fmt(v)}")
        for k, v in sorted(self.tol.items()):
            lines.append(f"tol.{k} = {_fmt(v)}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse key=value text into a dict of typed overrides (tolerances under 'tol')."""
    out: dict = {}
    tol: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key.startswith("tol."):
                tol[key[4:]] = _float(value)
            elif key in _PARSERS:
                out[key] = _PARSERS[key](value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    if tol:
        out["tol"] = tol
    return out


def parse_overrides(items) -> dict:
    """``["key=value", ...]`` from the command line."""
    return parse_config_text("\n".join(items), "<override>") if items else {}


def resolve_config(experiment: str, defaults: dict, tol_defaults: dict, *layers: dict) -> ExperimentConfig:
    """Merge base defaults, experiment defaults and user layers (later wins) and validate."""
    merged = dict(defaults)
    tol = dict(tol_defaults)
    for layer in layers:
        if not layer:
            continue
        for k, v in layer.items():
            if k == "tol":
                unknown = set(v) - set(tol_defaults)
                if unknown:
                    raise ConfigError(
                        f"unknown tolerance(s) {sorted(unknown)} for experiment {experiment!r}; "
                        f"known: {sorted(tol_defaults)}"
                    )
                tol.update(v)
            else:
                merged[k] = v
    if merged.get("experiment", experiment) not in ("", experiment):
        raise ConfigError(f"config is for experiment {merged['experiment']!r}, not {experiment!r}")
    merged["experiment"] = experiment
    cfg = replace(ExperimentConfig(), tol=tol, **merged)
    _validate(cfg)
    return cfg


def load_config_file(path) -> dict:
    p = Path(path)
    return parse_config_text(p.read_text(), str(p))


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.J < 1:
        raise ConfigError("J must be >= 1")
    if any(j < 1 for j in cfg.J_grid):
        raise ConfigError("J_grid entries must be >= 1")
    if cfg.replicas < 1:
        raise ConfigError("replicas must be >= 1")
    if cfg.d < 1 or cfg.m < 1:
        raise ConfigError("d and m must be >= 1")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if not 0 < cfg.alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    if not cfg.q >= 1:
        raise ConfigError("q must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
