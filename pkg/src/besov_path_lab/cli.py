"""``bpl`` command line: norm, simulate, verify, report."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path


from . import __version__
from .besov import (
    EXHAUSTIVE_MAX_CELLS,
    BesovParams,
    dyadic_besov_norm,
    full_besov_norm,
    gagliardo_seminorm,
    holder_seminorm,
    lebesgue_norm,
)
from .harness.config import ConfigError, load_config_file, parse_overrides, resolve_config
from .harness.experiments import EXPERIMENTS, make_config
from .harness.presets import make_integrand, make_model
from .orlicz import Power, parse_young
from .paths import CsvFormatError, read_csv, write_csv
from .stochastic import RngSpec, simulate

NORM_KINDS = ("dyadic", "exhaustive", "full", "holder", "gagliardo")


def _out_dir(args, fallback: str) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get("BPL_OUT_DIR"):
        return Path(os.environ["BPL_OUT_DIR"]) / fallback
    return Path("bpl_out") / fallback


def _layers(args) -> list[dict]:
    layers = []
    if args.config:
        layers.append(load_config_file(args.config))
    layers.append(parse_overrides(args.overrides))
    flags = {}
    for key in ("seed", "threads", "replicas", "J"):
        val = getattr(args, key, None)
        if val is not None:
            flags[key] = val
    if args.out:
        flags["out"] = str(args.out)
    layers.append(flags)
    return layers


def _write_manifest(out: Path, argv: list[str], subcommand: str, cfg_dict: dict, cfg_text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "bpl",
        "version": __version__,
        "subcommand": subcommand,
        "argv": argv,
        "resolved_config": cfg_dict,
        "config_text": cfg_text,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


# ----------------------------------------------------------------------------- norm

def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def cmd_norm(args) -> int:
    try:
        path = read_csv(args.path, kind=args.kind)
    except (CsvFormatError, OSError) as exc:
        print(f"error: {args.path}: {exc}", file=sys.stderr)
        return 2
    N = parse_young(args.young)
    q = math.inf if args.q in ("inf", "infinity") else float(args.q)
    params = BesovParams(args.alpha, q, N)
    rows, profiles = [], []
    for name in args.norms.split(","):
        name = name.strip()
        if name not in NORM_KINDS:
            print(f"error: unknown norm {name!r}; choose from {', '.join(NORM_KINDS)}", file=sys.stderr)
            return 2
        if name in ("dyadic", "exhaustive"):
            if name == "exhaustive" and path.cells > EXHAUSTIVE_MAX_CELLS:
                rows.append({"norm": name, "mode": "exhaustive", "value": "skipped (grid too fine)"})
                continue
            mode = "fast" if name == "dyadic" else "exhaustive"
            val, prof = dyadic_besov_norm(path, params, mode)
            rows.append({"norm": "dyadic", "mode": mode, "value": val, "seminorm": prof.seminorm,
                         "lebesgue": prof.lebesgue})
            profiles.append((mode, prof))
        elif name == "full":
            if not math.isinf(q) or path.cells > EXHAUSTIVE_MAX_CELLS:
                rows.append({"norm": "full", "mode": "grid-sup", "value": "skipped (needs q=inf, <= 2^12 cells)"})
                continue
            val = full_besov_norm(path, params)
            leb = lebesgue_norm(path, N)
            rows.append({"norm": "full", "mode": "grid-sup", "value": val, "seminorm": val - leb, "lebesgue": leb})
        elif name == "holder":
            mode = args.holder_mode
            rows.append({"norm": f"holder({args.alpha:g})", "mode": mode,
                         "value": holder_seminorm(path, args.alpha, mode)})
        else:
            p = N.p if isinstance(N, Power) else 2.0
            rows.append({"norm": f"gagliardo(s={args.alpha:g},p={p:g})", "mode": "double-sum",
                         "value": gagliardo_seminorm(path, args.alpha, p)})
    if args.json:
        payload = {
            "path": str(args.path),
            "params": {"alpha": args.alpha, "q": args.q, "young": N.label, "kind": args.kind},
            "rows": rows,
            "profiles": {m: [{"j": j, "omega": o, "term": t} for j, o, t in p.levels] for m, p in profiles},
        }
        print(json.dumps(payload, indent=2, default=float))
        return 0
    print(f"# {args.path}: d={path.d} cells={path.cells} J={path.J} N={N.label} alpha={args.alpha:g} q={args.q}")
    print(f"{'norm':28s} {'mode':12s} {'value':>20s} {'seminorm':>20s} {'lebesgue':>20s}")
    for r in rows:
        print(f"{r['norm']:28s} {r['mode']:12s} {_fmt(r['value']):>20s} {_fmt(r.get('seminorm', '')):>20s} "
              f"{_fmt(r.get('lebesgue', '')):>20s}")
    for mode, prof in profiles:
        print(f"# level profile ({mode})")
        print(f"{'j':>4s} {'shift':>14s} {'omega':>20s} {'term':>20s}")
        for j, h, o, t in zip(prof.j, prof.shift, prof.omega, prof.term):
            print(f"{j:4d} {h:14.8g} {o:20.12g} {t:20.12g}")
    return 0


# ----------------------------------------------------------------------------- simulate

SIM_DEFAULTS = {"J": 10, "d": 1, "m": 1, "integrand": "const:1", "eigen": "zero", "replicas": 1}


def cmd_simulate(args, argv) -> int:
    cfg = resolve_config("simulate", SIM_DEFAULTS, {}, *_layers(args))
    out = _out_dir(args, "simulate")
    f = make_integrand(cfg.integrand, cfg.J, cfg.d, cfg.m)
    model = make_model(cfg.eigen, cfg.d, cfg.shift)
    out.mkdir(parents=True, exist_ok=True)
    bundles = []
    for r in range(cfg.replicas):
        stream = args.stream + r
        b = simulate(f, model, RngSpec(cfg.seed, stream), preset=cfg.integrand)
        tag = "" if cfg.replicas == 1 else f"_{stream}"
        for name in ("W", "M", "u", "v"):
            write_csv(getattr(b, name), out / f"{name}{tag}.csv")
        sidecar = dict(b.meta, eigen_preset=cfg.eigen, provenance=b.provenance)
        (out / f"bundle{tag}.json").write_text(json.dumps(sidecar, indent=2))
        bundles.append(sidecar)
    _write_manifest(out, argv, "simulate", cfg.to_dict(), cfg.to_text())
    print(f"wrote {cfg.replicas} bundle(s) to {out}")
    return 0


# ----------------------------------------------------------------------------- verify / report

def cmd_verify(args, argv) -> int:
    exp = args.experiment or args.experiment_flag
    if not exp:
        print("error: verify needs an experiment id", file=sys.stderr)
        return 2
    if exp not in EXPERIMENTS:
        print(f"error: unknown experiment {exp!r}; known: {', '.join(sorted(EXPERIMENTS))}", file=sys.stderr)
        return 2
    cfg = make_config(exp, *_layers(args))
    out = _out_dir(args, exp)
    report = EXPERIMENTS[exp].run(cfg)
    report.invocation = argv
    report.write(out, plots=cfg.plots)
    _write_manifest(out, argv, "verify", cfg.to_dict(), cfg.to_text())
    print(report.summary())
    print(f"report: {out / 'report.json'}")
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read report {args.report}: {exc}", file=sys.stderr)
        return 2
    status = "PASS" if data.get("passed") else "FAIL"
    print(f"[{status}] {data.get('experiment')} smoke={data.get('smoke')} "
          f"wall_clock={data.get('wall_clock_seconds', float('nan')):.1f}s")
    for c in data.get("checks", []):
        print(f"  {c['status']:4s} {c['name']}: {c['invariant']}  observed={c['observed']} bound={c['bound']}")
    for name, c in data.get("constants", {}).items():
        print(f"  constant {name} = {c.get('value')}")
    for w in data.get("warnings", []):
        print(f"  warning: {w}")
    return 0 if data.get("passed") else 1


# ----------------------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output directory (default $BPL_OUT_DIR/<name> or ./bpl_out/<name>)")
    p.add_argument("--replicas", type=int)
    p.add_argument("--J", type=int)
    p.add_argument("overrides", nargs="*", metavar="key=value", help="config overrides")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bpl", description="Besov-Orlicz path norms and stochastic path experiments")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    pn = sub.add_parser("norm", help="norms of a path stored as CSV")
    pn.add_argument("path")
    pn.add_argument("--young", default="power:2", help="power:<p>, exp:<beta>, phi2 or plog:<p>")
    pn.add_argument("--alpha", type=float, default=0.5)
    pn.add_argument("--q", default="inf")
    pn.add_argument("--kind", choices=("linear", "step"), default="linear")
    pn.add_argument("--norms", default="dyadic,full,holder", help=f"comma list from {','.join(NORM_KINDS)}")
    pn.add_argument("--holder-mode", choices=("exact", "dyadic"), default="exact")
    pn.add_argument("--json", action="store_true")

    ps = sub.add_parser("simulate", help="simulate a path bundle and write CSVs plus a JSON sidecar")
    _common(ps)
    ps.add_argument("--stream", type=int, default=0)

    pv = sub.add_parser("verify", help="run a verification experiment")
    pv.add_argument("experiment", nargs="?", help=f"one of: {', '.join(sorted(EXPERIMENTS))}")
    pv.add_argument("--experiment", dest="experiment_flag")
    _common(pv)

    pr = sub.add_parser("report", help="summarise an existing report.json")
    pr.add_argument("report")
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    # key=value overrides may follow option flags
    stray = [a for a in extra if a.startswith("-") or "=" not in a]
    if stray or (extra and not hasattr(args, "overrides")):
        parser.error(f"unrecognized arguments: {' '.join(stray or extra)}")
    if extra:
        args.overrides.extend(extra)
    if args.command == "verify" and args.experiment and "=" in args.experiment:
        args.overrides.insert(0, args.experiment)
        args.experiment = None
    try:
        if args.command == "norm":
            return cmd_norm(args)
        if args.command == "simulate":
            return cmd_simulate(args, ["bpl"] + argv)
        if args.command == "verify":
            return cmd_verify(args, ["bpl"] + argv)
        return cmd_report(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
