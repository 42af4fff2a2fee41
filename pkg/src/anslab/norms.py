"""Norms and functionals used by the lifespan bounds.

All integrals are midpoint sums on the uniform periodic grid (exact for
trigonometric polynomials of low enough degree).  Vector fields are measured
through their pointwise Euclidean magnitude for L^p, and through the sum of
component squares for the Hilbert norms.
"""
from __future__ import annotations

import copy
import math
import warnings
from typing import Literal

import numpy as np

from .fields import ConfigurationError, Grid3, SpectralField3, VectorField3
from .littlewood_paley import DyadicSystem


class NormValue(float):
    """A float that remembers which norm produced it."""

    def __new__(cls, value: float, kind: str):
        obj = super().__new__(cls, value)
        obj.kind = kind
        return obj

    def __repr__(self):
        return f"NormValue({float(self)!r}, kind={self.kind!r})"


def _samples(f, grid: Grid3 | None) -> tuple[np.ndarray, Grid3]:
    """Real samples with a leading component axis (length 1 for scalars)."""
    if isinstance(f, VectorField3):
        return f.to_real(), f.grid
    if isinstance(f, SpectralField3):
        return f.to_real()[None], f.grid
    if grid is None:
        raise ConfigurationError("a grid is required for real-space samples")
    a = np.asarray(f, dtype=float)
    if a.shape == grid.shape:
        return a[None], grid
    if a.ndim == 4 and a.shape[1:] == grid.shape:
        return a, grid
    raise ConfigurationError(f"samples shape {a.shape} does not match grid {grid.shape}")


def _check_exponent(p: float, name: str = "p"):
    if not p >= 1:
        raise ConfigurationError(f"{name} must be >= 1, got {p}")


def lp_norm(f, p: float, grid: Grid3 | None = None, period: int = 1) -> NormValue:
    """L^p norm over the box, or over the fundamental cell [0, L_i/period) when
    ``period > 1`` (the natural domain of a field that is L/period periodic)."""
    _check_exponent(p)
    a, grid = _samples(f, grid)
    if period != 1:
        if period < 1 or any(n % period for n in grid.shape):
            raise ConfigurationError(f"period {period} must divide every grid size")
        a = a[:, : grid.n1 // period, : grid.n2 // period, : grid.n3 // period]
    mag = np.abs(a[0]) if a.shape[0] == 1 else np.sqrt(np.sum(a * a, axis=0))
    if math.isinf(p):
        return NormValue(float(np.max(mag)), "Linf")
    return NormValue(float((np.sum(mag**p) * grid.cell_volume) ** (1.0 / p)), f"L{p:g}")


def _axis_norm(a: np.ndarray, p: float, axes: tuple[int, ...], measure: float) -> np.ndarray:
    if math.isinf(p):
        return np.max(a, axis=axes)
    return (np.sum(a**p, axis=axes) * measure) ** (1.0 / p)


def mixed_norm(f, q_vertical: float, p_horizontal: float, *,
               inner: Literal["vertical", "horizontal"], grid: Grid3 | None = None) -> NormValue:
    """Anisotropic Lebesgue norm.

    ``inner="vertical"`` gives L^p_h(L^q_v): the x3 norm is taken first.
    ``inner="horizontal"`` gives L^q_v(L^p_h).
    """
    _check_exponent(q_vertical, "q_vertical")
    _check_exponent(p_horizontal, "p_horizontal")
    a, grid = _samples(f, grid)
    mag = np.abs(a[0]) if a.shape[0] == 1 else np.sqrt(np.sum(a * a, axis=0))
    dh = grid.spacing[0] * grid.spacing[1]
    dv = grid.spacing[2]
    if inner == "vertical":
        v = _axis_norm(mag, q_vertical, (2,), dv)
        val = _axis_norm(v, p_horizontal, (0, 1), dh)
        kind = f"L{p_horizontal:g}_h L{q_vertical:g}_v"
    elif inner == "horizontal":
        h = _axis_norm(mag, p_horizontal, (0, 1), dh)
        val = _axis_norm(h, q_vertical, (0,), dv)
        kind = f"L{q_vertical:g}_v L{p_horizontal:g}_h"
    else:
        raise ConfigurationError(f"inner must be 'vertical' or 'horizontal', got {inner!r}")
    return NormValue(float(val), kind)


def _weighted_l2(f, weight: np.ndarray) -> float:
    c = f.coeffs
    power = np.abs(c) ** 2
    if c.ndim == 4:
        power = power.sum(axis=0)
    return float(np.sqrt(f.grid.volume * np.sum(weight * power)))


def l2_norm(f) -> NormValue:
    return NormValue(f.l2_norm(), "L2")


def hsdot_norm(f, s: float) -> NormValue:
    """Homogeneous Sobolev norm with multiplier |xi|^s; the zero mode is dropped."""
    k2 = f.grid.k2
    with np.errstate(divide="ignore"):
        w = np.where(k2 > 0, k2**s, 0.0)
    return NormValue(_weighted_l2(f, w), f"Hdot{s:g}")


def hs_norm(f, s: float) -> NormValue:
    return NormValue(_weighted_l2(f, (1.0 + f.grid.k2) ** s), f"H{s:g}")


def hs10_norm(f, s1: float) -> NormValue:
    """Mixed Sobolev norm with weight (1 + |xi_h|)^(2 s1): horizontal
    regularity only, plain L^2 in x3."""
    if not s1 > 0:
        raise ConfigurationError("s1 must be positive")
    k1, k2, _ = f.grid.k
    w = (1.0 + np.sqrt(k1**2 + k2**2)) ** (2 * s1)
    return NormValue(_weighted_l2(f, np.broadcast_to(w, f.grid.shape)), f"H{s1:g},0")


def lambda_h(f, s: float):
    """Fractional horizontal derivative: multiplier |xi_h|^s."""
    k1, k2, _ = f.grid.k
    return type(f)(f.grid, f.coeffs * np.sqrt(k1**2 + k2**2) ** s)


def vertical_block_norms(f, sys: DyadicSystem | None = None) -> dict[int, float]:
    """||Delta^v_j f||_{L^2} for every block j of the system."""
    sys = sys or DyadicSystem.for_grid(f.grid, "vertical")
    c = f.coeffs
    power = np.abs(c) ** 2
    if c.ndim == 4:
        power = power.sum(axis=0)
    # collapse the horizontal directions first: blocks only see xi_3
    profile = power.sum(axis=(0, 1))
    vol = f.grid.volume
    out = {}
    for j in sys.indices:
        w = sys.block_weight(f.grid, j).reshape(-1)
        out[j] = float(np.sqrt(vol * np.sum(w * w * profile)))
    return out


def vertical_mean_norm(f) -> float:
    c = f.coeffs
    sl = c[..., 0]
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(sl) ** 2)))


def besov_b0half(f, sys: DyadicSystem | None = None, warn: bool = True) -> NormValue:
    """sum_j 2^(j/2) ||Delta^v_j f||_{L^2}.

    On the torus the decay condition of the space means zero vertical mean;
    any xi_3 = 0 content is excluded from the sum (it is invisible to every
    block) and reported through a warning.
    """
    if warn:
        mean = vertical_mean_norm(f)
        if mean > 1e-12 * max(f.l2_norm(), 1e-300):
            warnings.warn(
                f"field has vertical-mean content (L2 {mean:.3e}) excluded from B^(0,1/2)",
                stacklevel=2,
            )
    blocks = vertical_block_norms(f, sys)
    return NormValue(sum(2.0 ** (j / 2) * v for j, v in blocks.items()), "B0half")


class CheminLernerAccumulator:
    """Running Chemin-Lerner time norm sum_j 2^(j/2) ||Delta^v_j u||_{L^p_t(L^2)}.

    Time integrals use the trapezoidal rule over the supplied sample times; for
    p = inf a running max is kept.  Single writer: call ``update`` in time order.
    """

    def __init__(self, p: float, sys: DyadicSystem | None = None):
        _check_exponent(p)
        self.p = p
        self.sys = sys
        self.t0: float | None = None
        self.t: float | None = None
        self._last: dict[int, float] = {}
        self.accum: dict[int, float] = {}

    def update(self, t: float, f) -> None:
        if self.sys is None:
            self.sys = DyadicSystem.for_grid(f.grid, "vertical")
        norms = vertical_block_norms(f, self.sys)
        if self.t is None:
            self.t0 = self.t = float(t)
            self._last = norms
            self.accum = {j: (v if math.isinf(self.p) else 0.0) for j, v in norms.items()}
            return
        dt = float(t) - self.t
        if dt <= 0:
            raise ValueError(f"non-increasing time {t} after {self.t}")
        for j, v in norms.items():
            if math.isinf(self.p):
                self.accum[j] = max(self.accum.get(j, 0.0), v)
            else:
                prev = self._last.get(j, 0.0)
                self.accum[j] = self.accum.get(j, 0.0) + 0.5 * dt * (prev**self.p + v**self.p)
        self._last = norms
        self.t = float(t)

    @property
    def window(self) -> tuple[float | None, float | None]:
        return (self.t0, self.t)

    def block_values(self) -> dict[int, float]:
        if math.isinf(self.p):
            return dict(self.accum)
        return {j: a ** (1.0 / self.p) for j, a in self.accum.items()}

    def finalize(self) -> NormValue:
        total = sum(2.0 ** (j / 2) * v for j, v in self.block_values().items())
        return NormValue(total, f"Ltilde{self.p:g}_t B0half")

    def copy(self) -> "CheminLernerAccumulator":
        return copy.deepcopy(self)


def xt_functional(acc_u: CheminLernerAccumulator, acc_d1: CheminLernerAccumulator,
                  acc_d2: CheminLernerAccumulator) -> NormValue:
    """||f||_{L~inf_t B}^(1/2) ||d1 f||_{L~2_t B}^(1/4) ||d2 f||_{L~2_t B}^(1/4)."""
    if not (acc_u.window == acc_d1.window == acc_d2.window):
        raise ValueError(
            f"accumulator windows differ: {acc_u.window}, {acc_d1.window}, {acc_d2.window}"
        )
    if not (math.isinf(acc_u.p) and acc_d1.p == 2 and acc_d2.p == 2):
        raise ValueError("X(t) needs an L~inf accumulator for f and L~2 accumulators for d1 f, d2 f")
    if acc_u.t is None:
        return NormValue(0.0, "Xt")
    val = acc_u.finalize() ** 0.5 * acc_d1.finalize() ** 0.25 * acc_d2.finalize() ** 0.25
    return NormValue(val, "Xt")


class XtTracker:
    """Keeps the three accumulators behind X(t) for one evolving field."""

    def __init__(self, sys: DyadicSystem | None = None):
        self.u = CheminLernerAccumulator(math.inf, sys)
        self.d1 = CheminLernerAccumulator(2, sys)
        self.d2 = CheminLernerAccumulator(2, sys)

    def update(self, t: float, f) -> None:
        self.u.update(t, f)
        self.d1.update(t, f.derivative(0))
        self.d2.update(t, f.derivative(1))

    def value(self) -> NormValue:
        return xt_functional(self.u, self.d1, self.d2)

    def copy(self) -> "XtTracker":
        return copy.deepcopy(self)
