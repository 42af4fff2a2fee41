"""Viscosity sweeps, scaling covariance and the eventual-smallness probe.

A sweep runs the lifespan proxy at every point of a per-axis viscosity grid,
evaluates the matching lower bound on the same initial norms and records the
ratio T_proxy / bound.  Horizon-censored rows keep the horizon as T_proxy and
are treated as +inf by the monotonicity helpers; slope fits drop them.
"""
from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import BoundQuery, apply_scaling, evaluate
from .dynamics import (BlowupProxyConfig, SimState, ViscosityTriple, cfl_limit, run_proxy,
                       step)
from .fields import ConfigurationError, Grid3, VectorField3
from .initial import make_initial
from .norms import besov_b0half, l2_norm, lp_norm

CSV_COLUMNS = ("nu1", "nu2", "nu3", "norm_Linf0", "norm_L20", "norm_B0half0", "T_proxy", "trigger",
               "bound_id", "bound_value", "ratio", "tail_flag", "seed")
SWEEP_BOUNDS = ("thm1_inf", "thm1", "leray")


class InsufficientDataError(ValueError):
    pass


def log_spaced(lo: float, hi: float, n: int) -> tuple[float, ...]:
    if not (0 < lo <= hi) or n < 1:
        raise ConfigurationError(f"bad log range [{lo}, {hi}] x {n}")
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep.  Points are the Cartesian product nu1 x nu2 x nu3 in that
    order.  A row is tail-flagged when the outer-third energy fraction ever
    exceeded ``tail_fraction`` before the proxy fired (under-resolution)."""

    nu1: tuple[float, ...]
    nu2: tuple[float, ...]
    nu3: tuple[float, ...]
    initial: str = "taylor_green"
    amplitude: float = 1.0
    normalize: str = "none"
    grid: tuple[int, int, int] = (32, 32, 32)
    proxy: str = "linf_doubling"
    horizon: float = 10.0
    seed: int = 0
    bound: str = "thm1_inf"
    p: float | None = None
    C: float = 1.0
    dt_max: float = 0.05
    cfl: float = 0.5
    nonlinear: bool = True
    tail_fraction: float = 0.01

    def __post_init__(self):
        for name in ("nu1", "nu2", "nu3"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ConfigurationError(f"{name} list is empty")
            if any(v < 0 or not math.isfinite(v) for v in vals):
                raise ConfigurationError(f"{name} values must be finite and nonnegative")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "grid", tuple(int(n) for n in self.grid))
        if not self.horizon > 0 or math.isinf(self.horizon):
            raise ConfigurationError("horizon must be positive and finite")
        if self.bound not in SWEEP_BOUNDS:
            raise ConfigurationError(f"sweep bound must be one of {SWEEP_BOUNDS}, got {self.bound!r}")
        if self.bound in ("thm1", "leray") and self.p is None:
            raise ConfigurationError(f"bound {self.bound} needs p")
        Grid3(*self.grid)
        self.proxy_config()

    def points(self) -> list[ViscosityTriple]:
        return [ViscosityTriple(*t) for t in itertools.product(self.nu1, self.nu2, self.nu3)]

    def proxy_config(self) -> BlowupProxyConfig:
        return BlowupProxyConfig(trigger=self.proxy, fraction=self.tail_fraction, horizon=self.horizon)

    def initial_field(self) -> VectorField3:
        return make_initial(self.initial, Grid3(*self.grid), seed=self.seed, amplitude=self.amplitude,
                            normalize=self.normalize)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepRow:
    nu1: float
    nu2: float
    nu3: float
    norm_Linf0: float
    norm_L20: float
    norm_B0half0: float
    T_proxy: float
    trigger: str
    bound_id: str
    bound_value: float
    ratio: float
    tail_flag: bool
    seed: int

    @property
    def nu(self) -> ViscosityTriple:
        return ViscosityTriple(self.nu1, self.nu2, self.nu3)

    @property
    def censored(self) -> bool:
        return self.trigger in ("horizon", "nan")

    @property
    def effective_T(self) -> float:
        """T_proxy with horizon censoring read as +inf (NaN stays NaN)."""
        if self.trigger == "horizon":
            return math.inf
        if self.trigger == "nan":
            return math.nan
        return self.T_proxy


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                vals = [getattr(r, c) for c in CSV_COLUMNS]
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in vals])

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def initial_norms(u0: VectorField3, p: float | None = None) -> dict:
    norms = {"Linf": float(lp_norm(u0, math.inf)), "L2": float(l2_norm(u0)),
             "B0half": float(besov_b0half(u0, warn=False))}
    if p is not None and math.isfinite(p):
        norms["Lp"] = float(lp_norm(u0, p))
    return norms


def bound_query(spec: SweepSpec, nu: ViscosityTriple, norms: dict) -> BoundQuery:
    keep = {k: v for k, v in norms.items() if k in ("Linf", "Lp")}
    p = math.inf if spec.bound == "thm1_inf" else spec.p
    return BoundQuery(spec.bound, nu, keep, C=spec.C, p=p)


def _run_point(spec: SweepSpec, nu: ViscosityTriple, u0: VectorField3, norms: dict) -> SweepRow:
    try:
        bound = evaluate(bound_query(spec, nu, norms)).t_lower
    except ValueError:
        bound = math.nan  # bound not applicable at this point (e.g. unordered viscosities)
    with np.errstate(all="ignore"):
        try:
            res, _ = run_proxy(u0, nu, spec.proxy_config(), dt_max=spec.dt_max, cfl=spec.cfl,
                               nonlinear=spec.nonlinear)
            t_proxy, trigger, tail = res.t_proxy, res.trigger, res.tail_flag
        except FloatingPointError:
            t_proxy, trigger, tail = math.nan, "nan", True
    ratio = t_proxy / bound if bound and math.isfinite(bound) else math.nan
    return SweepRow(nu.nu1, nu.nu2, nu.nu3, norms["Linf"], norms["L2"], norms["B0half"],
                    float(t_proxy), trigger, spec.bound, float(bound), float(ratio), bool(tail), spec.seed)


def _worker(args) -> SweepRow:
    spec, nu = args
    u0 = spec.initial_field()
    return _run_point(spec, nu, u0, initial_norms(u0, spec.p))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Rows come back in spec order whatever the worker count."""
    points = spec.points()
    if jobs <= 1 or len(points) == 1:
        u0 = spec.initial_field()
        norms = initial_norms(u0, spec.p)
        rows = [_run_point(spec, nu, u0, norms) for nu in points]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(points))) as pool:
            rows = list(pool.map(_worker, [(spec, nu) for nu in points]))
    return SweepResult(spec, rows)


def nondecreasing(values: list[float]) -> bool:
    """Monotonicity with +inf allowed (censored); NaN breaks it."""
    if any(math.isnan(v) for v in values):
        return False
    return all(b >= a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class ScalingFit:
    axis: str
    slope: float
    intercept: float
    r2: float
    censored_count: int
    theoretical: float

    def to_dict(self) -> dict:
        return asdict(self)


def theoretical_exponent(spec: SweepSpec, axis: str, nu: ViscosityTriple) -> float:
    """d log(bound) / d log(nu_axis) at ``nu``, read off the bounds module by a
    factor-2 step (exact for power laws).  NaN when no step keeps the bound's
    viscosity assumptions."""
    unit = {"Linf": 1.0, "Lp": 1.0}
    idx = ("nu1", "nu2", "nu3").index(axis)
    for factor in (0.5, 2.0):
        moved = list(nu.as_tuple())
        moved[idx] *= factor
        try:
            b0 = evaluate(bound_query(spec, nu, unit)).t_lower
            b1 = evaluate(bound_query(spec, ViscosityTriple(*moved), unit)).t_lower
        except ValueError:
            continue
        return math.log(b1 / b0) / math.log(factor)
    return math.nan


def fit_scaling_exponent(result: SweepResult, axis: str) -> ScalingFit:
    """Least squares of log T_proxy against log nu_axis over uncensored rows."""
    if axis not in ("nu1", "nu2", "nu3"):
        raise ConfigurationError(f"axis must be nu1, nu2 or nu3, got {axis!r}")
    use = [r for r in result.rows if not r.censored and math.isfinite(r.T_proxy) and r.T_proxy > 0]
    censored = len(result.rows) - len(use)
    if len(use) < 4:
        raise InsufficientDataError(
            f"need at least 4 uncensored rows to fit a slope, have {len(use)} ({censored} censored)")
    x = np.log([getattr(r, axis) for r in use])
    y = np.log([r.T_proxy for r in use])
    if np.ptp(x) == 0:
        raise InsufficientDataError(f"{axis} does not vary over the uncensored rows")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return ScalingFit(axis, float(slope), float(intercept), r2, censored,
                      theoretical_exponent(result.spec, axis, use[0].nu))


@dataclass(frozen=True)
class EnvelopeReport:
    """T_proxy >= c nu3 ||u0||_inf^-2 with c the minimum over firing rows."""
    c: float
    spread: float
    rows_used: int


def linf_envelope(result: SweepResult) -> EnvelopeReport:
    vals = [r.T_proxy * r.norm_Linf0**2 / r.nu3 for r in result.rows
            if not r.censored and r.nu3 > 0 and math.isfinite(r.T_proxy)]
    if not vals:
        return EnvelopeReport(math.nan, math.nan, 0)
    return EnvelopeReport(min(vals), max(vals) / min(vals), len(vals))


# ---------------------------------------------------------- scaling covariance

@dataclass(frozen=True)
class CovarianceReport:
    lam: int
    t: float
    steps: int
    max_rel_error: float


def _fixed_steps(u0: VectorField3, nu, t: float, steps: int, nonlinear: bool) -> VectorField3:
    state = SimState.initial(u0, nu, nonlinear=nonlinear)
    h = t / steps
    for _ in range(steps):
        state = step(state, h, check_cfl=False)
    return state.u


def scaling_covariance_test(u0: VectorField3, nu, t: float, lam: int = 2, *, steps: int = 20,
                            nonlinear: bool = True, cfl: float = 1.0) -> CovarianceReport:
    """Evolve u0 to t and u0_lam = lam u0(lam x) to t / lam^2 (same viscosities,
    same step count), then compare lam u(t, lam x) with u_lam(t / lam^2).

    The refined grid carries the same effective resolution, so with equal step
    counts the two runs are conjugate step by step; the error measures
    arithmetic, not discretisation.
    """
    if not t > 0:
        raise ConfigurationError("t must be positive")
    if nonlinear and t / steps > cfl_limit(u0, cfl):
        raise ConfigurationError(f"{steps} steps violate the CFL limit for t={t}")
    u0_lam = apply_scaling(u0, lam)
    ref = apply_scaling(_fixed_steps(u0, nu, t, steps, nonlinear), lam)
    got = _fixed_steps(u0_lam, nu, t / lam**2, steps, nonlinear)
    a, b = ref.to_real(), got.to_real()
    scale = float(np.max(np.abs(a)))
    err = float(np.max(np.abs(a - b))) / scale if scale > 0 else float(np.max(np.abs(b)))
    return CovarianceReport(int(lam), float(t), steps, err)


# -------------------------------------------------------- eventual smallness

@dataclass
class SmallnessReport:
    times: list[float]
    products: list[float]
    threshold: float
    t0: float | None
    budget_excess: float
    slack: float

    @property
    def budget_holds(self) -> bool:
        return self.budget_excess <= self.slack


def _grad_l2(u: VectorField3) -> float:
    return math.sqrt(sum(u.derivative(i).energy() for i in range(3)))


def eventual_smallness_probe(u0: VectorField3, nu, horizon: float, threshold: float, *,
                             dt: float = 0.05, cfl: float = 0.5, nonlinear: bool = True,
                             slack: float = 1e-6) -> SmallnessReport:
    """Track ||u||_2 ||grad u||_2; t0 is the first node where it is below
    ``threshold``.  The energy inequality ||u(t)||^2 + 2 sum nu_i int ||d_i u||^2
    <= ||u0||^2 is checked at every node, with ``slack`` relative to ||u0||^2."""
    nu = nu if isinstance(nu, ViscosityTriple) else ViscosityTriple(*nu)
    if not nu.nu3 > 0:
        raise ConfigurationError("the probe needs nu3 > 0")
    state = SimState.initial(u0, nu, nonlinear=nonlinear)
    times, products = [state.t], [math.sqrt(state.u.energy()) * _grad_l2(state.u)]
    excess = 0.0
    t0 = 0.0 if products[0] < threshold else None
    while state.t < horizon * (1 - 1e-12) and t0 is None:
        h = min(dt, horizon - state.t)
        if nonlinear:
            h = min(h, cfl_limit(state.u, cfl))
        state = step(state, h, cfl=cfl, check_cfl=False)
        excess = max(excess, state.budget() / state.energy0)
        times.append(state.t)
        products.append(math.sqrt(state.u.energy()) * _grad_l2(state.u))
        if products[-1] < threshold:
            t0 = state.t
    return SmallnessReport(times, products, threshold, t0, excess, slack)
