"""ExperimentReport: tables, fitted constants and checks, with JSON/CSV/SVG output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    smoke: bool = False
    tables: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    wall_clock: float = 0.0
    plots: list = field(default_factory=list)
    invocation: list = field(default_factory=list)

    def check(self, name: str, invariant: str, ok: bool, observed=None, bound=None, detail: str = "") -> bool:
        """Record an assertion; in smoke mode a failure becomes a warning."""
        ok = bool(ok)
        status = "pass" if ok else ("warn" if self.smoke else "fail")
        self.checks.append(
            {"name": name, "invariant": invariant, "status": status, "observed": observed, "bound": bound, "detail": detail}
        )
        if status == "warn":
            self.warnings.append(f"{name}: {detail or 'failed'} (smoke run, not asserted)")
        return ok

    def table(self, name: str, rows: list[dict]) -> None:
        self.tables[name] = rows

    def constant(self, name: str, value: float, **diagnostics) -> None:
        self.constants[name] = {"value": value, **diagnostics}

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)

    def failures(self) -> list[dict]:
        return [c for c in self.checks if c["status"] == "fail"]

    def to_dict(self, include_clock: bool = True) -> dict:
        d = {
            "experiment": self.experiment,
            "passed": self.passed,
            "smoke": self.smoke,
            "config": self.config,
            "seeds": self.seeds,
            "checks": self.checks,
            "constants": self.constants,
            "tables": self.tables,
            "warnings": self.warnings,
            "plots": self.plots,
            "invocation": self.invocation,
        }
        if include_clock:
            d["wall_clock_seconds"] = self.wall_clock
        return _clean(d)

    def to_json(self, include_clock: bool = True) -> str:
        return json.dumps(self.to_dict(include_clock), indent=2, sort_keys=False)

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.experiment} ({self.wall_clock:.1f}s)"]
        for c in self.checks:
            lines.append(f"  {c['status']:4s} {c['name']}: observed={_short(c['observed'])} bound={_short(c['bound'])}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)

    def write(self, out_dir, plots: bool = False) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in self.tables.items():
            if rows:
                _write_table(out / f"{name}.csv", rows)
        if plots:
            self.plots = _write_plots(self, out)
        path = out / "report.json"
        path.write_text(self.to_json())
        return path


def _short(x):
    if isinstance(x, float):
        return f"{x:.4g}"
    if isinstance(x, (list, tuple)) and len(x) > 6:
        return f"[{len(x)} values]"
    return x


def _write_table(path: Path, rows: list[dict]) -> None:
    keys: list = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow(_clean(r))


def _write_plots(report: ExperimentReport, out: Path) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    made = []
    specs = {
        "moments": ("p", "ratio", "p", "m_p / (sqrt(p) ||f||)"),
        "tail": ("eps_sq", "log_q", "eps^2", "log exceedance"),
        "refinement": ("J", "median_phi2", "J", "median norm"),
        "ladder": ("rung", "median", "rung", "median norm"),
    }
    for name, (x, y, xl, yl) in specs.items():
        rows = report.tables.get(name)
        if not rows or x not in rows[0] or y not in rows[0]:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.5))
        groups: dict = {}
        for r in rows:
            if isinstance(r.get(y), (int, float)) and np.isfinite(r[y]):
                groups.setdefault(r.get("target", ""), []).append((r[x], r[y]))
        for label, pts in groups.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=str(label) or None)
        if len(groups) > 1:
            ax.legend()
        if name == "ladder":
            ax.set_yscale("log")
        ax.set_xlabel(xl)
        ax.set_ylabel(yl)
        ax.set_title(f"{report.experiment}: {name}")
        fig.tight_layout()
        target = out / f"{name}.svg"
        fig.savefig(target, format="svg")
        plt.close(fig)
        made.append(target.name)
    return made
