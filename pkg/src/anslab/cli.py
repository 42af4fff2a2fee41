"""Command-line entry point: ``anslab <subcommand> [flags]``.

Every subcommand accepts ``--config`` (JSON, validated, unknown keys
rejected); explicit flags override config values.  Outputs and a
``manifest.json`` (resolved config, argv, seed, library versions) go to
``--out``.  Exit codes: 0 success, 1 verification failure, 2 configuration
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import psutil
import scipy
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .bounds import BoundInputError, BoundQuery, ThresholdReport, evaluate
from .checkpoint import write_checkpoint
from .dynamics import (BlowupProxyConfig, CFLViolation, SimState, ViscosityTriple, cfl_limit,
                       run_proxy, step, write_diagnostics_csv)
from .experiments import SweepSpec, fit_scaling_exponent, InsufficientDataError, linf_envelope, run_sweep
from .fields import ConfigurationError, Grid3
from .inequalities import SuiteConfig, l42_worked_example, run_suite
from .initial import make_initial
from .littlewood_paley import lp_check

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SimulateConfig(_Strict):
    initial: str = "taylor_green"
    amplitude: float = 1.0
    normalize: Literal["none", "linf", "b0half"] = "none"
    grid: list[int] = Field(default_factory=lambda: [32, 32, 32])
    nu1: float = 0.05
    nu2: float = 0.05
    nu3: float = 0.05
    horizon: float = 1.0
    dt: float = 0.05
    cfl: float = 0.5
    nonlinear: bool = True
    proxy: Optional[Literal["linf_doubling", "spectral_tail", "horizon"]] = None
    tail_fraction: float = 0.01
    seed: int = 0


class SweepConfig(_Strict):
    nu1: list[float]
    nu2: list[float]
    nu3: list[float]
    initial: str = "taylor_green"
    amplitude: float = 1.0
    normalize: Literal["none", "linf", "b0half"] = "none"
    grid: list[int] = Field(default_factory=lambda: [32, 32, 32])
    proxy: Literal["linf_doubling", "spectral_tail", "horizon"] = "linf_doubling"
    horizon: float = 10.0
    seed: int = 0
    bound: Literal["thm1_inf", "thm1", "leray"] = "thm1_inf"
    p: Optional[float] = None
    C: float = 1.0
    dt_max: float = 0.05
    cfl: float = 0.5
    nonlinear: bool = True
    tail_fraction: float = 0.01


class BoundsConfig(_Strict):
    formula: Literal["leray", "thm1", "thm1_inf", "thm3", "thm4", "thm4_euler", "cor11", "cor12"]
    nu1: float = 0.0
    nu2: float = 0.0
    nu3: float = 0.0
    norms: dict[str, float] = Field(default_factory=dict)
    p: Optional[float] = None
    alpha: Optional[float] = None
    C: float = 1.0
    margin_factor: float = 100.0


class VerifyConfig(_Strict):
    samples: int = 100
    seed: int = 0
    grid2: int = 64
    grid3: int = 48
    tolerance: float = 0.2
    include: list[str] = Field(default_factory=lambda: list(SuiteConfig().include))


class LPCheckConfig(_Strict):
    n: int = 32
    pairs: int = 100
    seed: int = 0


NORM_FLAGS = {"linf": "Linf", "lp": "Lp", "l2": "L2", "b0half": "B0half",
              "gradb0half": "GradB0half", "hs10": "Hs10", "hs2": "Hs2"}


# ------------------------------------------------------------------ plumbing

def default_jobs() -> int:
    env = os.environ.get("ANSLAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"ANSLAB_JOBS must be an integer, got {env!r}")
    return psutil.cpu_count(logical=False) or 1


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return data


def _merge(base: dict, overrides: dict) -> dict:
    out = dict(base)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory {out} is not writable: {exc.strerror}")
    return out


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    import pydantic
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "pydantic": pydantic.__version__, "anslab": own}


def write_manifest(out: Path, args, config: dict, outputs: list[str]) -> None:
    manifest = {"subcommand": args.command, "argv": args.argv, "config": config,
                "seed": config.get("seed"), "versions": _versions(), "outputs": outputs}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


# --------------------------------------------------------------- subcommands

def cmd_simulate(args) -> int:
    overrides = {"grid": args.grid, "nu1": args.nu1, "nu2": args.nu2, "nu3": args.nu3,
                 "horizon": args.horizon, "proxy": args.proxy, "seed": args.seed,
                 "initial": args.initial, "amplitude": args.amplitude, "dt": args.dt}
    if args.nu is not None:
        overrides.update(nu1=args.nu, nu2=args.nu, nu3=args.nu)
    cfg = SimulateConfig(**_merge(load_config(args.config), overrides))
    out = _out_dir(args)
    grid = Grid3(*cfg.grid)
    nu = ViscosityTriple(cfg.nu1, cfg.nu2, cfg.nu3)
    u0 = make_initial(cfg.initial, grid, seed=cfg.seed, amplitude=cfg.amplitude, normalize=cfg.normalize)
    summary: dict = {}
    if cfg.proxy is not None:
        res, state = run_proxy(u0, nu, BlowupProxyConfig(cfg.proxy, fraction=cfg.tail_fraction,
                                                         horizon=cfg.horizon),
                               dt_max=cfg.dt, cfl=cfg.cfl, nonlinear=cfg.nonlinear)
        summary = {"T_proxy": res.t_proxy, "trigger": res.trigger, "tail_flag": res.tail_flag}
    else:
        state = SimState.initial(u0, nu, nonlinear=cfg.nonlinear)
        while state.t < cfg.horizon * (1 - 1e-12):
            dt = min(cfg.dt, cfg.horizon - state.t)
            if cfg.nonlinear:
                dt = min(dt, cfl_limit(state.u, cfg.cfl))
            state = step(state, dt, cfl=cfg.cfl, check_cfl=False)
    summary.update(t=state.t, budget_residual=state.budget_residual, steps=len(state.diagnostics) - 1)
    write_diagnostics_csv(state.diagnostics, out / "diagnostics.csv")
    write_checkpoint(state.u, state.t, nu, out / "final.ans")
    (out / "summary.json").write_text(json.dumps(_json_safe(summary), indent=2) + "\n")
    write_manifest(out, args, cfg.model_dump(), ["diagnostics.csv", "final.ans", "summary.json"])
    print(json.dumps(_json_safe(summary)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    overrides = {"grid": args.grid, "horizon": args.horizon, "proxy": args.proxy, "seed": args.seed,
                 "initial": args.initial, "amplitude": args.amplitude, "p": args.p, "C": args.C}
    for axis in ("nu1", "nu2", "nu3"):
        text = getattr(args, axis)
        if text is not None:
            overrides[axis] = _floats(text)
    cfg = SweepConfig(**_merge(load_config(args.config), overrides))
    out = _out_dir(args)
    spec = SweepSpec(**{**cfg.model_dump(), "nu1": tuple(cfg.nu1), "nu2": tuple(cfg.nu2),
                        "nu3": tuple(cfg.nu3), "grid": tuple(cfg.grid)})
    jobs = args.jobs if args.jobs is not None else default_jobs()
    result = run_sweep(spec, jobs=jobs)
    result.write_csv(out / "sweep.csv")
    fits = {}
    for axis in ("nu1", "nu2", "nu3"):
        if len(getattr(spec, axis)) > 1:
            try:
                fits[axis] = fit_scaling_exponent(result, axis).to_dict()
            except InsufficientDataError as exc:
                fits[axis] = {"error": str(exc)}
    env = linf_envelope(result)
    report = {"rows": len(result.rows), "censored": sum(r.censored for r in result.rows),
              "fits": fits, "envelope": {"c": env.c, "spread": env.spread, "rows_used": env.rows_used}}
    (out / "fits.json").write_text(json.dumps(_json_safe(report), indent=2) + "\n")
    write_manifest(out, args, {**cfg.model_dump(), "jobs": jobs}, ["sweep.csv", "fits.json"])
    print(json.dumps(_json_safe(report)))
    return EXIT_OK


def _bounds_query(cfg: BoundsConfig) -> BoundQuery:
    return BoundQuery(cfg.formula, ViscosityTriple(cfg.nu1, cfg.nu2, cfg.nu3), dict(cfg.norms),
                      C=cfg.C, p=cfg.p, alpha=cfg.alpha, margin_factor=cfg.margin_factor)


def _format_bound(value) -> str:
    if isinstance(value, ThresholdReport):
        return json.dumps(_json_safe(value.to_dict()))
    return f"{value.t_lower:.17g}"


def _batch_row(row: dict) -> BoundsConfig:
    data: dict = {"norms": {}}
    for key, text in row.items():
        if text is None or text.strip() == "":
            continue
        if key.startswith("norm_"):
            name = NORM_FLAGS.get(key[5:].lower(), key[5:])
            data["norms"][name] = float(text)
        elif key == "formula":
            data[key] = text.strip()
        else:
            data[key] = float(text)
    return BoundsConfig(**data)


def cmd_bounds(args) -> int:
    out = _out_dir(args)
    if args.batch:
        try:
            with open(args.batch, newline="") as fh:
                rows = list(csv.DictReader(fh))
        except OSError as exc:
            raise ConfigurationError(f"cannot read batch file {args.batch}: {exc.strerror}")
        results = []
        for i, row in enumerate(rows, start=2):
            try:
                cfg = _batch_row(row)
                value = evaluate(_bounds_query(cfg))
            except (ValidationError, ValueError) as exc:
                raise ConfigurationError(f"{args.batch}, line {i}: {exc}")
            results.append({**row, "result": _format_bound(value)})
            print(_format_bound(value))
        with open(out / "bounds.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) + ["result"] if rows else ["result"],
                               lineterminator="\n")
            w.writeheader()
            w.writerows(results)
        write_manifest(out, args, {"batch": str(args.batch)}, ["bounds.csv"])
        return EXIT_OK
    overrides = {"formula": args.formula, "nu1": args.nu1, "nu2": args.nu2, "nu3": args.nu3,
                 "p": args.p, "alpha": args.alpha, "C": args.C}
    if args.nu is not None:
        overrides.update(nu1=args.nu, nu2=args.nu, nu3=args.nu)
    base = load_config(args.config)
    norms = dict(base.get("norms", {}))
    for flag, key in NORM_FLAGS.items():
        v = getattr(args, f"norm_{flag}")
        if v is not None:
            norms[key] = v
    if norms:
        overrides["norms"] = norms
    if "formula" not in base and args.formula is None:
        raise ConfigurationError("bounds needs --formula (or a config with 'formula')")
    cfg = BoundsConfig(**_merge(base, overrides))
    value = evaluate(_bounds_query(cfg))
    (out / "bounds.json").write_text(json.dumps(_json_safe(value.to_dict()), indent=2) + "\n")
    write_manifest(out, args, cfg.model_dump(), ["bounds.json"])
    print(_format_bound(value))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = VerifyConfig(**_merge(load_config(args.config), {"seed": args.seed, "samples": args.samples}))
    out = _out_dir(args)
    suite = SuiteConfig(samples=cfg.samples, seed=cfg.seed, grid2=cfg.grid2, grid3=cfg.grid3,
                        tolerance=cfg.tolerance, include=tuple(cfg.include))
    ratio, exact = l42_worked_example(cfg.grid2)
    entries = run_suite(suite)
    worked_ok = abs(ratio - exact) < 1e-6
    names = ["l42_worked_example.json"]
    (out / names[0]).write_text(json.dumps({"ratio": ratio, "closed_form": exact, "passed": worked_ok},
                                           indent=2) + "\n")
    for e in entries:
        name = f"{e.name.replace('(', '_').replace(')', '').replace('=', '')}.json"
        (out / name).write_text(json.dumps(_json_safe(e.to_dict()), indent=2) + "\n")
        names.append(name)
        status = "PASS" if e.passed else "FAIL"
        print(f"{status} {e.name}: max ratios {[round(r.max_ratio, 6) for r in e.reports]}, "
              f"spread {e.spread:.3f}" + (f" ({e.note})" if e.note and not e.passed else ""))
    print(f"{'PASS' if worked_ok else 'FAIL'} l42_worked_example: {ratio:.12f} vs {exact:.12f}")
    write_manifest(out, args, cfg.model_dump(), names)
    return EXIT_OK if worked_ok and all(e.passed for e in entries) else EXIT_FAIL


def cmd_lp_check(args) -> int:
    cfg = LPCheckConfig(**_merge(load_config(args.config), {"seed": args.seed}))
    if args.grid is not None:
        if len(set(args.grid)) != 1:
            raise ConfigurationError("lp-check runs on a cubic grid")
        cfg = cfg.model_copy(update={"n": args.grid[0]})
    out = _out_dir(args)
    report = lp_check(cfg.n, cfg.pairs, cfg.seed)
    (out / "lp_check.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    write_manifest(out, args, cfg.model_dump(), ["lp_check.json"])
    print(json.dumps(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_FAIL


# -------------------------------------------------------------------- parser

def _grid(text: str) -> list[int]:
    parts = [int(v) for v in text.lower().replace("x", ",").split(",") if v.strip()]
    if len(parts) == 1:
        parts *= 3
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid is N or N1,N2,N3")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anslab", description="Anisotropic Navier-Stokes lifespan lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, jobs=False):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", default="anslab-out", help="output directory (default: anslab-out)")
        p.add_argument("--seed", type=int, help="random seed")
        if jobs:
            p.add_argument("--jobs", type=int,
                           help="worker processes (default: $ANSLAB_JOBS, else physical cores)")

    sim = sub.add_parser("simulate", help="evolve one initial condition")
    common(sim)
    sim.add_argument("--initial", help="taylor_green | random_divfree | shear_perturbation | shear")
    sim.add_argument("--amplitude", type=float, help="initial amplitude")
    sim.add_argument("--grid", type=_grid, help="N or N1,N2,N3")
    sim.add_argument("--nu", type=float, help="isotropic viscosity (sets nu1 = nu2 = nu3)")
    for axis in ("nu1", "nu2", "nu3"):
        sim.add_argument(f"--{axis}", type=float, help=f"viscosity {axis}")
    sim.add_argument("--horizon", type=float, help="final time")
    sim.add_argument("--dt", type=float, help="maximum time step")
    sim.add_argument("--proxy", choices=["linf_doubling", "spectral_tail", "horizon"],
                     help="stop at this lifespan proxy")

    sw = sub.add_parser("sweep", help="viscosity sweep of the lifespan proxy")
    common(sw, jobs=True)
    for axis in ("nu1", "nu2", "nu3"):
        sw.add_argument(f"--{axis}", help=f"comma-separated {axis} values")
    sw.add_argument("--initial", help="named initial data")
    sw.add_argument("--amplitude", type=float, help="initial amplitude")
    sw.add_argument("--grid", type=_grid, help="N or N1,N2,N3")
    sw.add_argument("--horizon", type=float, help="proxy horizon (censoring time)")
    sw.add_argument("--proxy", choices=["linf_doubling", "spectral_tail", "horizon"], help="proxy trigger")
    sw.add_argument("--p", type=float, help="Lebesgue exponent for thm1/leray bounds")
    sw.add_argument("--C", type=float, help="bound constant")

    bd = sub.add_parser("bounds", help="evaluate a lifespan bound or threshold")
    common(bd)
    bd.add_argument("--formula", choices=list(BoundsConfig.model_fields["formula"].annotation.__args__),
                    help="bound formula")
    bd.add_argument("--nu", type=float, help="isotropic viscosity")
    for axis in ("nu1", "nu2", "nu3"):
        bd.add_argument(f"--{axis}", type=float, help=f"viscosity {axis}")
    for flag, key in NORM_FLAGS.items():
        bd.add_argument(f"--norm-{flag}", type=float, help=f"{key} norm of u0")
    bd.add_argument("--p", type=float, help="Lebesgue exponent")
    bd.add_argument("--alpha", type=float, help="interpolation parameter")
    bd.add_argument("--C", type=float, help="bound constant (default 1)")
    bd.add_argument("--batch", help="CSV with a formula column and nu1,nu2,nu3,p,alpha,C,norm_* columns")

    vi = sub.add_parser("verify-inequalities", help="ratio checks of the functional inequalities")
    common(vi)
    vi.add_argument("--samples", type=int, help="samples per check (default 100)")

    lp = sub.add_parser("lp-check", help="partition-of-unity and reconstruction suite")
    common(lp)
    lp.add_argument("--grid", type=_grid, help="cubic grid size N")
    return parser


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "bounds": cmd_bounds,
            "verify-inequalities": cmd_verify, "lp-check": cmd_lp_check}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    args.argv = argv
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"anslab: invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, BoundInputError, CFLViolation) as exc:
        print(f"anslab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
