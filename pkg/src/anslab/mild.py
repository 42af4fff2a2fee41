"""Mild solutions: the Duhamel map and its Picard fixed point.

    u(t) = e^{tL} u0 + int_0^t e^{(t-s)L} N(u(s)) ds,   N(u) = -P div(u (x) u),

with L = nu1 d1^2 + nu2 d2^2 + nu3 d3^2.  Trajectories live on uniform time
nodes; the integral at each node uses composite Simpson (3/8 rule on the last
three intervals for odd node indices, trapezoid on the first interval).  On
band-limited fields the integrand is bounded as s -> t, so no singular
quadrature is needed.  The space E = L^inf_t(L^inf) is discretised as the max
over nodes of the grid sup norm.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ViscosityTriple, dissipation_symbol, nonlinear_term
from .fields import ConfigurationError, Grid3, VectorField3, ifft3


@dataclass
class Trajectory:
    grid: Grid3
    times: np.ndarray
    coeffs: np.ndarray  # (nodes, 3, n1, n2, n3)

    def __post_init__(self):
        if self.coeffs.shape != (len(self.times), 3) + self.grid.shape:
            raise ConfigurationError("trajectory coefficients do not match times and grid")

    @classmethod
    def constant(cls, u: VectorField3, times) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        return cls(u.grid, times, np.broadcast_to(u.coeffs, (len(times),) + u.coeffs.shape).copy())

    def __len__(self):
        return len(self.times)

    def at(self, m: int) -> VectorField3:
        return VectorField3(self.grid, self.coeffs[m])

    def sup_norm(self) -> float:
        """max over nodes of the grid sup of |u|."""
        best = 0.0
        for m in range(len(self)):
            r = ifft3(self.coeffs[m]).real
            best = max(best, float(np.sqrt(np.max(np.sum(r * r, axis=0)))))
        return best

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.grid, self.times, self.coeffs - other.coeffs)


def uniform_nodes(horizon: float, nodes: int) -> np.ndarray:
    return np.linspace(0.0, horizon, nodes)


def quadrature_weights(m: int) -> np.ndarray:
    """Weights (in units of the node spacing h) for int_0^{t_m} using nodes 0..m."""
    if m == 0:
        return np.zeros(1)
    if m == 1:
        return np.array([0.5, 0.5])
    w = np.zeros(m + 1)
    simpson_end = m if m % 2 == 0 else m - 3
    for a in range(0, simpson_end, 2):
        w[a:a + 3] += np.array([1.0, 4.0, 1.0]) / 3.0
    if m % 2 == 1:
        w[m - 3:m + 1] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


def _bilinear_integrand(traj_u: Trajectory, traj_v: Trajectory | None) -> np.ndarray:
    out = np.empty_like(traj_u.coeffs)
    for m in range(len(traj_u)):
        v = None if traj_v is None else traj_v.at(m)
        out[m] = nonlinear_term(traj_u.at(m), v).coeffs
    return out


def duhamel_integral(integrand: np.ndarray, times: np.ndarray, grid: Grid3, nu) -> np.ndarray:
    """int_0^{t_m} e^{(t_m - s) L} g(s) ds at every node m."""
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-12, atol=0):
        raise ConfigurationError("Duhamel quadrature needs uniform nodes")
    sym = dissipation_symbol(grid, nu)
    out = np.zeros_like(integrand)
    for m in range(1, len(times)):
        w = quadrature_weights(m)
        acc = np.zeros(integrand.shape[1:], dtype=complex)
        for k in range(m + 1):
            if w[k]:
                acc += w[k] * np.exp(-(times[m] - times[k]) * sym) * integrand[k]
        out[m] = h * acc
    return out


def bilinear(u: Trajectory, v: Trajectory, nu) -> Trajectory:
    """B(u, v)(t) = int_0^t e^{(t-s)L} (-P div(u (x) v))(s) ds."""
    if len(u) != len(v) or not np.array_equal(u.times, v.times):
        raise ConfigurationError("trajectories must share their nodes")
    g = _bilinear_integrand(u, v)
    return Trajectory(u.grid, u.times, duhamel_integral(g, u.times, u.grid, nu))


def free_evolution(u0: VectorField3, nu, times: np.ndarray) -> Trajectory:
    sym = dissipation_symbol(u0.grid, nu)
    coeffs = np.stack([np.exp(-t * sym) * u0.coeffs for t in times])
    return Trajectory(u0.grid, np.asarray(times, dtype=float), coeffs)


def duhamel_map(u_traj: Trajectory, u0: VectorField3, nu, t: float | None = None) -> Trajectory:
    """e^{tL} u0 + B(u, u) evaluated at every node of ``u_traj``."""
    if u_traj.grid != u0.grid:
        raise ConfigurationError("trajectory and u0 live on different grids")
    if t is not None and not math.isclose(u_traj.times[-1], t, rel_tol=1e-12):
        raise ConfigurationError(f"trajectory ends at {u_traj.times[-1]}, expected {t}")
    if len(u_traj) < 2:
        raise ConfigurationError("need at least two nodes")
    lin = free_evolution(u0, nu, u_traj.times)
    g = _bilinear_integrand(u_traj, None)
    return Trajectory(u0.grid, u_traj.times, lin.coeffs + duhamel_integral(g, u_traj.times, u0.grid, nu))


@dataclass(frozen=True)
class PicardConfig:
    horizon: float
    nodes: int = 17
    max_iter: int = 50
    tol: float = 1e-12

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigurationError("horizon must be positive")
        if self.nodes < 4:
            raise ConfigurationError("need at least 4 quadrature nodes")
        if not self.tol > 0:
            raise ConfigurationError("tolerance must be positive")


@dataclass
class PicardReport:
    sup_diffs: list[float] = field(default_factory=list)
    converged: bool = False
    status: str = "running"
    contraction_ratio: float = math.nan
    residual: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.sup_diffs)

    @property
    def ratios(self) -> list[float]:
        d = self.sup_diffs
        return [d[i] / d[i - 1] if d[i - 1] > 0 else math.nan for i in range(1, len(d))]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "sup_diff", "ratio"])
            ratios = [math.nan] + self.ratios
            for i, (d, r) in enumerate(zip(self.sup_diffs, ratios), start=1):
                w.writerow([i, repr(d), repr(r)])


def picard_solve(u0: VectorField3, nu, cfg: PicardConfig) -> tuple[Trajectory, PicardReport]:
    """Iterate x_{k+1} = a + B(x_k, x_k) from x_0 = a = e^{tL} u0.

    Stops when the sup-norm update drops below ``cfg.tol``.  Reports
    non-contraction when the update grows three iterations in a row or stops
    being finite; the measured ratio is the last update quotient.
    """
    times = uniform_nodes(cfg.horizon, cfg.nodes)
    a = free_evolution(u0, nu, times)
    x = a
    report = PicardReport()
    growth = 0
    for _ in range(cfg.max_iter):
        nxt = duhamel_map(x, u0, nu)
        d = (nxt - x).sup_norm()
        report.sup_diffs.append(d)
        if not math.isfinite(d):
            report.status = "non-contraction"
            break
        x = nxt
        if len(report.sup_diffs) > 1:
            prev = report.sup_diffs[-2]
            report.contraction_ratio = d / prev if prev > 0 else 0.0
            growth = growth + 1 if d > prev else 0
            if growth >= 3:
                report.status = "non-contraction"
                break
        if d < cfg.tol:
            report.converged = True
            report.status = "converged"
            break
    else:
        report.status = "max-iterations"
    if report.converged:
        report.residual = (duhamel_map(x, u0, nu) - x).sup_norm()
    return x, report


@dataclass(frozen=True)
class BilinearNormEstimate:
    estimate: float
    envelope: float
    fitted_constant: float
    samples: int
    horizon: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def estimate_bilinear_norm(nu, grid: Grid3, samples: int = 10, *, horizon: float = 0.1,
                           nodes: int = 9, seed: int = 0, band: tuple[float, float] = (1.0, 4.0)
                           ) -> BilinearNormEstimate:
    """Empirical lower estimate of ||B|| on E = L^inf_t(L^inf).

    Samples pairs of random divergence-free fields (constant in time),
    normalised to unit E norm, and maximises ||B(u, v)||_E.  The theoretical
    envelope is nu3^(-1/2) t^(1/2); ``fitted_constant`` = estimate / envelope.
    """
    from .initial import random_divfree

    if samples < 10:
        raise ConfigurationError("need at least 10 samples")
    nu = nu if isinstance(nu, ViscosityTriple) else ViscosityTriple(*nu)
    if not nu.nu3 > 0:
        raise ConfigurationError("the envelope needs nu3 > 0")
    times = uniform_nodes(horizon, nodes)
    best = 0.0
    for i in range(samples):
        u = random_divfree(grid, seed=(seed, 2 * i), band=band)
        v = random_divfree(grid, seed=(seed, 2 * i + 1), band=band)
        tu, tv = Trajectory.constant(u, times), Trajectory.constant(v, times)
        nu_, nv_ = tu.sup_norm(), tv.sup_norm()
        if nu_ == 0 or nv_ == 0:
            continue
        b = bilinear(tu, tv, nu).sup_norm()
        best = max(best, b / (nu_ * nv_))
    envelope = nu.nu3**-0.5 * horizon**0.5
    return BilinearNormEstimate(best, envelope, best / envelope, samples, horizon)
