"""Anisotropic Navier-Stokes dynamics on the periodic box.

    d_t u - (nu1 d1^2 + nu2 d2^2 + nu3 d3^2) u + u.grad u = -grad P,  div u = 0

Time stepping is integrating-factor RK4 (Lawson): the anisotropic heat
semigroup is applied exactly, the projected nonlinearity explicitly.  Any
viscosity may be zero.  The mean flow (xi = 0) is held at zero.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, NamedTuple

import numpy as np

from .fields import ConfigurationError, Grid3, SpectralField3, VectorField3, fft3, ifft3
from .littlewood_paley import DyadicSystem
from .norms import XtTracker, besov_b0half


@dataclass(frozen=True)
class ViscosityTriple:
    nu1: float
    nu2: float
    nu3: float

    def __post_init__(self):
        for name in ("nu1", "nu2", "nu3"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigurationError(f"{name}={v}: viscosities must be finite and >= 0")

    @classmethod
    def isotropic(cls, nu: float) -> "ViscosityTriple":
        return cls(nu, nu, nu)

    def ordered(self) -> bool:
        """The standing assumption nu3 <= nu2 <= nu1."""
        return self.nu3 <= self.nu2 <= self.nu1

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.nu1, self.nu2, self.nu3)

    def __iter__(self):
        return iter(self.as_tuple())


def _as_nu(nu) -> ViscosityTriple:
    return nu if isinstance(nu, ViscosityTriple) else ViscosityTriple(*nu)


# ---------------------------------------------------------------- linear part

def leray_project(v: VectorField3) -> VectorField3:
    """v_hat - xi (xi . v_hat) / |xi|^2 per mode; the xi = 0 mode is untouched."""
    kd = v.grid.kd
    c = v.coeffs
    kk = kd[0] ** 2 + kd[1] ** 2 + kd[2] ** 2
    kdotv = kd[0] * c[0] + kd[1] * c[1] + kd[2] * c[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(kk > 0, kdotv / kk, 0.0)
    return VectorField3(v.grid, np.stack([c[i] - kd[i] * q for i in range(3)]))


def dissipation_symbol(grid: Grid3, nu) -> np.ndarray:
    """nu1 k1^2 + nu2 k2^2 + nu3 k3^2."""
    nu = _as_nu(nu)
    k1, k2, k3 = grid.k
    return nu.nu1 * k1**2 + nu.nu2 * k2**2 + nu.nu3 * k3**2


def semigroup_factor(grid: Grid3, nu, dt: float) -> np.ndarray:
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    return np.exp(-dt * dissipation_symbol(grid, nu))


def semigroup_apply(f, nu, dt: float):
    """exp(dt (nu1 d1^2 + nu2 d2^2 + nu3 d3^2)) f, exact per mode."""
    return type(f)(f.grid, f.coeffs * semigroup_factor(f.grid, nu, dt))


# ------------------------------------------------------------- nonlinear part

_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def product_tensor(u: VectorField3, v: VectorField3 | None = None) -> dict[tuple[int, int], np.ndarray]:
    """Dealiased spectral coefficients of the products u_i v_j.

    For v = None only the six independent entries of u (x) u are formed."""
    grid = u.grid
    mask = grid.dealias_mask
    ur = ifft3(np.where(mask, u.coeffs, 0.0)).real
    if v is None:
        return {(i, j): np.where(mask, fft3(ur[i] * ur[j]), 0.0) for i, j in _PAIRS}
    vr = ifft3(np.where(mask, v.coeffs, 0.0)).real
    return {(i, j): np.where(mask, fft3(ur[i] * vr[j]), 0.0) for i in range(3) for j in range(3)}


def _tensor_entry(T, i, j):
    return T[(i, j)] if (i, j) in T else T[(j, i)]


def divergence_of_product(u: VectorField3, v: VectorField3 | None = None) -> VectorField3:
    """div(u (x) v)_i = sum_j d_j (u_j v_i), dealiased, not projected."""
    T = product_tensor(u, v)
    kd = u.grid.kd
    out = np.stack([
        1j * sum(kd[j] * _tensor_entry(T, j, i) for j in range(3)) for i in range(3)
    ])
    return VectorField3(u.grid, out)


def nonlinear_term(u: VectorField3, v: VectorField3 | None = None) -> VectorField3:
    """-P div(u (x) v) (v defaults to u), pseudo-spectral with the 2/3 rule."""
    out = -leray_project(divergence_of_product(u, v))
    out.coeffs[:, 0, 0, 0] = 0.0
    return out


class PressureSplit(NamedTuple):
    total: SpectralField3
    p1: SpectralField3
    p2: SpectralField3


def recover_pressure(u: VectorField3, split: bool = False):
    """Solve -Lap P = div(u . grad u) = d_i d_j (u_i u_j) spectrally.

    P_hat = -sum_ij k_i k_j T_ij / |k|^2, zero mean.  With ``split=True``
    also returns P2 (the d3^2 (u3 u3) contribution) and P1 = P - P2.
    """
    grid = u.grid
    T = product_tensor(u)
    kd = grid.kd
    kk = kd[0] ** 2 + kd[1] ** 2 + kd[2] ** 2
    inv = np.divide(1.0, kk, out=np.zeros(grid.shape), where=kk > 0)
    p2 = -(kd[2] * kd[2] * T[(2, 2)]) * inv
    p1 = np.zeros(grid.shape, dtype=complex)
    for i, j in _PAIRS:
        if (i, j) == (2, 2):
            continue
        mult = 1.0 if i == j else 2.0
        p1 -= mult * kd[i] * kd[j] * T[(i, j)] * inv
    total = SpectralField3(grid, p1 + p2)
    if not split:
        return total
    return PressureSplit(total, SpectralField3(grid, p1), SpectralField3(grid, p2))


# ---------------------------------------------------------------- diagnostics

class DiagnosticRow(NamedTuple):
    t: float
    E: float
    diss1: float
    diss2: float
    diss3: float
    Linf: float
    B0half: float
    tail_fraction: float


CSV_COLUMNS = DiagnosticRow._fields


def axis_dissipation(u: VectorField3, nu) -> tuple[float, float, float]:
    """2 nu_i ||d_i u||^2_{L^2}: the per-axis energy drain rate."""
    nu = _as_nu(nu)
    power = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    vol = u.grid.volume
    return tuple(
        float(2 * n * vol * np.sum(k**2 * power)) for n, k in zip(nu, u.grid.k)
    )


def tail_mask(grid: Grid3) -> np.ndarray:
    """Outer third of the retained (dealiased) modes."""
    keep = grid.dealias_mask
    outer = [np.abs(xi) > (2.0 / 3.0) * (n // 3) for xi, n in zip(grid.freqs, grid.shape)]
    any_outer = outer[0][:, None, None] | outer[1][None, :, None] | outer[2][None, None, :]
    return keep & any_outer


def tail_fraction(u: VectorField3) -> float:
    power = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    total = power.sum()
    if total == 0:
        return 0.0
    return float(power[tail_mask(u.grid)].sum() / total)


def linf(u: VectorField3, real: np.ndarray | None = None) -> float:
    r = u.to_real() if real is None else real
    return float(np.sqrt(np.max(np.sum(r * r, axis=0))))


def diagnostics_row(u: VectorField3, t: float, nu, sys: DyadicSystem | None = None,
                    real: np.ndarray | None = None) -> DiagnosticRow:
    d1, d2, d3 = axis_dissipation(u, nu)
    return DiagnosticRow(
        t=float(t), E=u.energy(), diss1=d1, diss2=d2, diss3=d3,
        Linf=linf(u, real), B0half=float(besov_b0half(u, sys, warn=False)),
        tail_fraction=tail_fraction(u),
    )


def write_diagnostics_csv(rows: Iterable[DiagnosticRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


# ----------------------------------------------------------------- time step

class CFLViolation(ValueError):
    def __init__(self, dt: float, suggested_dt: float):
        super().__init__(f"dt={dt:.6g} exceeds the advective CFL limit; use dt <= {suggested_dt:.6g}")
        self.dt = dt
        self.suggested_dt = suggested_dt


def cfl_limit(u: VectorField3, cfl: float = 1.0, real: np.ndarray | None = None) -> float:
    """Largest dt with dt * sum_i max|u_i| / dx_i <= cfl (inf for u = 0)."""
    r = u.to_real() if real is None else real
    rate = sum(float(np.max(np.abs(r[i]))) / h for i, h in enumerate(u.grid.spacing))
    return math.inf if rate == 0 else cfl / rate


@dataclass
class SimState:
    u: VectorField3
    t: float
    nu: ViscosityTriple
    diagnostics: list[DiagnosticRow] = field(default_factory=list)
    energy0: float = 0.0
    dissipated: float = 0.0
    budget_residual: float = 0.0
    nonlinear: bool = True
    xt: XtTracker | None = None
    sys: DyadicSystem | None = None

    @classmethod
    def initial(cls, u0: VectorField3, nu, t0: float = 0.0, *, nonlinear: bool = True,
                track_xt: bool = False) -> "SimState":
        nu = _as_nu(nu)
        u = u0.copy()
        u.coeffs[:, 0, 0, 0] = 0.0
        sys = DyadicSystem.for_grid(u.grid, "vertical")
        xt = None
        if track_xt:
            xt = XtTracker(sys)
            xt.update(t0, u)
        row = diagnostics_row(u, t0, nu, sys)
        return cls(u, float(t0), nu, [row], energy0=row.E, nonlinear=nonlinear, xt=xt, sys=sys)

    def budget(self) -> float:
        """E(t) + 2 sum_i nu_i int ||d_i u||^2 - E(0)."""
        return self.u.energy() + self.dissipated - self.energy0


def _rhs(u_coeffs: np.ndarray, grid: Grid3, nonlinear: bool) -> np.ndarray:
    if not nonlinear:
        return np.zeros_like(u_coeffs)
    return nonlinear_term(VectorField3(grid, u_coeffs)).coeffs


def _diss_rate(c: np.ndarray, grid: Grid3, sym: np.ndarray) -> float:
    return float(2 * grid.volume * np.sum(sym * np.sum(np.abs(c) ** 2, axis=0)))


def step(state: SimState, dt: float, *, cfl: float = 1.0, check_cfl: bool = True) -> SimState:
    """Advance one integrating-factor RK4 step of size dt.

    The energy drained by each viscosity is integrated alongside with the
    same RK4 weights, so the budget residual is fourth order in dt.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = state.u.grid
    u = state.u.coeffs
    if check_cfl and state.nonlinear:
        limit = cfl_limit(state.u, cfl)
        if dt > limit * (1 + 1e-12):
            raise CFLViolation(dt, limit)
    sym = dissipation_symbol(grid, state.nu)
    E = np.exp(-dt * sym)
    Eh = np.exp(-0.5 * dt * sym)
    nl = state.nonlinear

    k1 = _rhs(u, grid, nl)
    s2 = Eh * (u + 0.5 * dt * k1)
    k2 = _rhs(s2, grid, nl)
    s3 = Eh * u + 0.5 * dt * k2
    k3 = _rhs(s3, grid, nl)
    s4 = E * u + dt * Eh * k3
    k4 = _rhs(s4, grid, nl)
    new = E * u + (dt / 6.0) * (E * k1 + 2.0 * Eh * (k2 + k3) + k4)

    drained = (dt / 6.0) * (
        _diss_rate(u, grid, sym) + 2 * _diss_rate(s2, grid, sym)
        + 2 * _diss_rate(s3, grid, sym) + _diss_rate(s4, grid, sym)
    )
    unew = leray_project(VectorField3(grid, new))
    unew.coeffs[:, 0, 0, 0] = 0.0
    t = state.t + dt
    row = diagnostics_row(unew, t, state.nu, state.sys)
    xt = None
    if state.xt is not None:
        xt = state.xt.copy()
        xt.update(t, unew)
    dissipated = state.dissipated + drained
    return replace(
        state, u=unew, t=t, diagnostics=state.diagnostics + [row], dissipated=dissipated,
        budget_residual=row.E + dissipated - state.energy0, xt=xt,
    )


def evolve(state: SimState, t_end: float, dt: float, **kw) -> SimState:
    """Fixed steps of (at most) dt up to t_end; the last step lands on t_end."""
    n = max(1, math.ceil((t_end - state.t) / dt - 1e-9))
    h = (t_end - state.t) / n
    for _ in range(n):
        state = step(state, h, **kw)
    return state


# ------------------------------------------------------------ lifespan proxy

Trigger = Literal["linf_doubling", "spectral_tail", "horizon"]


@dataclass(frozen=True)
class BlowupProxyConfig:
    trigger: Trigger = "linf_doubling"
    factor: float = 2.0
    fraction: float = 0.01
    horizon: float = math.inf
    reference_linf: float | None = None

    def __post_init__(self):
        if self.trigger not in ("linf_doubling", "spectral_tail", "horizon"):
            raise ConfigurationError(f"unknown trigger {self.trigger!r}")
        if not self.factor > 1:
            raise ConfigurationError("doubling factor must exceed 1")
        if not 0 < self.fraction < 1:
            raise ConfigurationError("tail fraction must lie in (0, 1)")
        if not self.horizon > 0:
            raise ConfigurationError("horizon must be positive")
        if self.trigger == "horizon" and math.isinf(self.horizon):
            raise ConfigurationError("the horizon trigger needs a finite horizon")


@dataclass
class LifespanProxyResult:
    t_proxy: float
    trigger: str
    tail_flag: bool
    linf0: float
    diagnostics: list[DiagnosticRow] = field(repr=False, default_factory=list)

    @property
    def censored(self) -> bool:
        return self.trigger in ("horizon", "nan")


def monitor_blowup_proxy(state: SimState, config: BlowupProxyConfig) -> LifespanProxyResult | None:
    rows = state.diagnostics
    if not rows:
        raise ValueError("no diagnostics recorded")
    ref = config.reference_linf if config.reference_linf is not None else rows[0].Linf
    tail_seen = False
    for row in rows:
        tail_seen = tail_seen or row.tail_fraction > config.fraction
        if not all(math.isfinite(x) for x in row):
            return LifespanProxyResult(row.t, "nan", tail_seen, ref, list(rows))
        if config.trigger == "linf_doubling" and row.Linf >= config.factor * ref:
            return LifespanProxyResult(row.t, "linf_doubling", tail_seen, ref, list(rows))
        if config.trigger == "spectral_tail" and row.tail_fraction > config.fraction:
            return LifespanProxyResult(row.t, "spectral_tail", True, ref, list(rows))
    if state.t >= config.horizon * (1 - 1e-12):
        return LifespanProxyResult(state.t, "horizon", tail_seen, ref, list(rows))
    return None


def run_proxy(u0: VectorField3, nu, config: BlowupProxyConfig, *, dt_max: float = 0.05,
              cfl: float = 0.5, nonlinear: bool = True) -> tuple[LifespanProxyResult, SimState]:
    """Evolve until the configured proxy fires or the horizon is reached.

    The step is min(dt_max, CFL limit, time to horizon), so runs are
    deterministic for a given configuration.
    """
    if math.isinf(config.horizon):
        raise ConfigurationError("run_proxy needs a finite horizon")
    state = SimState.initial(u0, nu, nonlinear=nonlinear)
    while True:
        res = monitor_blowup_proxy(state, config)
        if res is not None:
            return res, state
        dt = min(dt_max, config.horizon - state.t)
        if nonlinear:
            dt = min(dt, cfl_limit(state.u, cfl))
        if config.horizon - state.t - dt < 1e-12 * config.horizon:
            dt = config.horizon - state.t
        state = step(state, dt, cfl=cfl, check_cfl=False)
