"""Closed-form lifespan lower bounds and global-existence thresholds.

Every bound carries a user constant C (default 1); nothing here claims the
true, non-effective constants.  Bounds are pure arithmetic on the viscosities
and on norms of the initial data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .dynamics import ViscosityTriple
from .fields import ConfigurationError, Grid3, VectorField3


class BoundInputError(ValueError):
    pass


FormulaId = Literal["leray", "thm1", "thm1_inf", "thm3", "thm4", "thm4_euler", "cor11", "cor12"]

# Norm keys understood by BoundQuery.norms
NORM_KEYS = ("Lp", "Linf", "L2", "B0half", "GradB0half", "Hs10", "Hs2")


@dataclass(frozen=True)
class BoundValue:
    t_lower: float
    formula_id: str
    inputs: dict = field(default_factory=dict)
    branch: str | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {"t_lower": self.t_lower, "formula_id": self.formula_id, "inputs": self.inputs}
        if self.branch is not None:
            out["branch"] = self.branch
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _positive(name: str, value: float):
    if not (value > 0 and math.isfinite(value)):
        raise BoundInputError(f"{name} must be positive and finite, got {value}")


def _check_p(p: float):
    if not p > 3:
        raise BoundInputError(f"p must lie in (3, inf], got {p}")


def _check_ordered(nu: ViscosityTriple):
    if not (0 < nu.nu3 <= nu.nu2 <= nu.nu1):
        raise BoundInputError(
            f"requires the standing assumption 0 < nu3 <= nu2 <= nu1, got {nu.as_tuple()}"
        )


def leray_bound(p: float, nu_iso: float, M_p: float, C: float = 1.0) -> BoundValue:
    """C nu^((p+3)/(p-3)) M^(-2p/(p-3)); C nu M^-2 for p = inf."""
    _check_p(p)
    _positive("nu", nu_iso)
    _positive("M_p", M_p)
    _positive("C", C)
    inputs = {"p": p, "nu": nu_iso, "M_p": M_p, "C": C}
    if math.isinf(p):
        return BoundValue(C * nu_iso / M_p**2, "leray", inputs)
    t = C * nu_iso ** ((p + 3) / (p - 3)) * M_p ** (-2 * p / (p - 3))
    return BoundValue(t, "leray", inputs)


def thm1_bound(p: float, nu: ViscosityTriple, M_p: float, C: float = 1.0) -> BoundValue:
    """C nu2^(p/(p-3)) (nu1 nu2 nu3)^(1/(p-3)) M^(-2p/(p-3)); C nu3 M^-2 for p = inf."""
    _check_p(p)
    _check_ordered(nu)
    _positive("M_p", M_p)
    _positive("C", C)
    inputs = {"p": p, "nu": list(nu.as_tuple()), "M_p": M_p, "C": C}
    if math.isinf(p):
        return BoundValue(C * nu.nu3 / M_p**2, "thm1_inf", inputs)
    prod = nu.nu1 * nu.nu2 * nu.nu3
    t = C * nu.nu2 ** (p / (p - 3)) * prod ** (1 / (p - 3)) * M_p ** (-2 * p / (p - 3))
    return BoundValue(t, "thm1", inputs)


def thm3_constant(alpha: float, nu1: float, nu2: float) -> tuple[float, str]:
    """The three-branch viscosity factor; returns (value, branch label)."""
    if not 0 < alpha < 0.5:
        raise BoundInputError(f"alpha must lie in (0, 1/2), got {alpha}")
    if alpha <= 0.125:
        return nu1**0.25 * nu2 ** (0.75 - alpha), "(0,1/8]"
    if alpha <= 0.25:
        return nu1 ** (0.375 - alpha) * nu2**0.625, "(1/8,1/4]"
    return nu1 ** (0.25 - alpha / 2) * nu2 ** (0.75 - alpha / 2), "(1/4,1/2)"


def thm3_bound(alpha: float, nu1: float, nu2: float, M0: float, M1: float,
               C: float = 1.0) -> BoundValue:
    """T >= (C G(alpha) / (M0^(1-2 alpha) M1^(2 alpha)))^(1/alpha), with
    M0, M1 the B^(0,1/2) norms of u0 and grad u0 (case nu3 = 0)."""
    if not 0 < nu2 <= nu1:
        raise BoundInputError(f"requires 0 < nu2 <= nu1, got nu1={nu1}, nu2={nu2}")
    for name, v in (("M0", M0), ("M1", M1), ("C", C)):
        _positive(name, v)
    g, branch = thm3_constant(alpha, nu1, nu2)
    t = (C * g / (M0 ** (1 - 2 * alpha) * M1 ** (2 * alpha))) ** (1 / alpha)
    return BoundValue(t, "thm3", {"alpha": alpha, "nu1": nu1, "nu2": nu2, "M0": M0, "M1": M1, "C": C},
                      branch=branch)


def thm4_bound(nu3: float, M: float, C: float = 1.0) -> BoundValue:
    """C min(nu3^(1/3) M^(-4/3), nu3^3 M^(-4)) for the nu1 = nu2 = 0 case,
    M = ||u0||_{H^(s1,0)}.  The branches cross at nu3 = M."""
    _positive("nu3", nu3)
    _positive("M", M)
    _positive("C", C)
    a = nu3 ** (1 / 3) / M ** (4 / 3)
    b = nu3**3 / M**4
    branch = "nu3^(1/3)/M^(4/3)" if a < b else ("nu3^3/M^4" if b < a else "crossover")
    return BoundValue(C * min(a, b), "thm4", {"nu3": nu3, "M": M, "C": C, "crossover_nu3": M},
                      branch=branch)


def thm4_euler_bound(nu3: float, M1: float, M2: float, alpha: float, C: float = 1.0) -> BoundValue:
    """Interpolated bound C nu3^a M1^(-4a) M2^(-(1-3a)), a in [0, 1/3], where
    M2 is an H^(s2) norm (s2 > 5/2) supplied from outside this package."""
    if not 0 <= alpha <= 1 / 3:
        raise BoundInputError(f"alpha must lie in [0, 1/3], got {alpha}")
    for name, v in (("nu3", nu3), ("M1", M1), ("M2", M2), ("C", C)):
        _positive(name, v)
    t = C * nu3**alpha * M1 ** (-4 * alpha) * M2 ** (-(1 - 3 * alpha))
    return BoundValue(t, "thm4_euler", {"nu3": nu3, "M1": M1, "M2": M2, "alpha": alpha, "C": C},
                      notes=("depends on an externally supplied H^s2 norm",))


@dataclass(frozen=True)
class ThresholdReport:
    which: str
    threshold: float
    margin: float
    factor: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {"which": self.which, "threshold": self.threshold, "margin": self.margin,
                "factor": self.factor, "satisfied": self.satisfied}


def cor_thresholds(which: Literal["cor11", "cor12"], nu: ViscosityTriple, norms: dict,
                   p: float | None = None, factor: float = 100.0) -> ThresholdReport:
    """Right-hand side of the 'nu1 >> ...' global-existence conditions.

    cor11: nu2^(-p-1) nu3^(-5(p-3)-1) ||u0||_2^(4(p-3)) ||u0||_p^(2p)
    cor12: nu2^(-3) ||u0||_{B^(0,1/2)}^4
    margin = nu1 / threshold; satisfied iff margin > factor.
    """
    if which == "cor11":
        if p is None or not 3 < p < math.inf:
            raise BoundInputError("cor11 needs a finite p > 3")
        _need(norms, "L2", "Lp")
        _positive("nu2", nu.nu2)
        _positive("nu3", nu.nu3)
        thr = (nu.nu2 ** (-p - 1) * nu.nu3 ** (-5 * (p - 3) - 1)
               * norms["L2"] ** (4 * (p - 3)) * norms["Lp"] ** (2 * p))
    elif which == "cor12":
        _need(norms, "B0half")
        _positive("nu2", nu.nu2)
        thr = nu.nu2**-3 * norms["B0half"] ** 4
    else:
        raise BoundInputError(f"unknown corollary {which!r}")
    margin = nu.nu1 / thr if thr > 0 else math.inf
    return ThresholdReport(which, thr, margin, factor, margin > factor)


def _need(norms: dict, *keys: str):
    missing = [k for k in keys if k not in norms]
    if missing:
        raise BoundInputError(f"missing norm(s): {', '.join(missing)}")


@dataclass(frozen=True)
class BoundQuery:
    which: FormulaId
    nu: ViscosityTriple
    norms: dict = field(default_factory=dict)
    C: float = 1.0
    p: float | None = None
    alpha: float | None = None
    margin_factor: float = 100.0

    def __post_init__(self):
        unknown = set(self.norms) - set(NORM_KEYS)
        if unknown:
            raise BoundInputError(f"unknown norm key(s) {sorted(unknown)}; known: {NORM_KEYS}")


def evaluate(query: BoundQuery):
    """Dispatch a query; returns a BoundValue, or a ThresholdReport for the corollaries."""
    q, n = query, query.norms
    if q.which == "leray":
        if not (q.nu.nu1 == q.nu.nu2 == q.nu.nu3):
            raise BoundInputError("the Leray bound needs isotropic viscosity")
        p = math.inf if q.p is None else q.p
        _need(n, "Linf" if math.isinf(p) else "Lp")
        return leray_bound(p, q.nu.nu1, n["Linf" if math.isinf(p) else "Lp"], q.C)
    if q.which in ("thm1", "thm1_inf"):
        p = math.inf if q.which == "thm1_inf" or q.p is None else q.p
        key = "Linf" if math.isinf(p) else "Lp"
        _need(n, key)
        return thm1_bound(p, q.nu, n[key], q.C)
    if q.which == "thm3":
        if q.alpha is None:
            raise BoundInputError("thm3 needs alpha")
        _need(n, "B0half", "GradB0half")
        return thm3_bound(q.alpha, q.nu.nu1, q.nu.nu2, n["B0half"], n["GradB0half"], q.C)
    if q.which == "thm4":
        _need(n, "Hs10")
        return thm4_bound(q.nu.nu3, n["Hs10"], q.C)
    if q.which == "thm4_euler":
        if q.alpha is None:
            raise BoundInputError("thm4_euler needs alpha")
        _need(n, "Hs10", "Hs2")
        return thm4_euler_bound(q.nu.nu3, n["Hs10"], n["Hs2"], q.alpha, q.C)
    if q.which in ("cor11", "cor12"):
        return cor_thresholds(q.which, q.nu, n, q.p, q.margin_factor)
    raise BoundInputError(f"unknown formula {q.which!r}")


def norm_homogeneity(key: str, p: float | None = None) -> float:
    """Exponent e with ||u_{0,lam}|| = lam^e ||u0|| for u_{0,lam}(x) = lam u0(lam x) on R^3."""
    if key == "Lp":
        if p is None:
            raise BoundInputError("Lp homogeneity needs p")
        return 1.0 if math.isinf(p) else 1.0 - 3.0 / p
    table = {"Linf": 1.0, "L2": -0.5, "B0half": 0.0, "GradB0half": 1.0}
    if key not in table:
        raise BoundInputError(f"norm {key!r} has no exact scaling homogeneity")
    return table[key]


def scale_bound_inputs(query: BoundQuery, lam: float) -> BoundQuery:
    """The query describing u_{0,lam} when ``query`` describes u0 (viscosities fixed)."""
    if not lam > 0:
        raise BoundInputError("lambda must be positive")
    norms = {k: v * lam ** norm_homogeneity(k, query.p) for k, v in query.norms.items()}
    return replace(query, norms=norms)


def apply_scaling(u0: VectorField3, lam: int, grid: Grid3 | None = None) -> VectorField3:
    """u_{0,lam}(x) = lam u0(lam x) on the same box.

    Mode xi of u0 moves to lam*xi.  The target grid defaults to the one refined
    by lam (matched effective resolution); any grid with the same box whose
    Nyquist range holds the mapped modes is accepted.
    """
    if int(lam) != lam or lam < 1:
        raise ConfigurationError(f"lambda must be an integer >= 1, got {lam}")
    lam = int(lam)
    src = u0.grid
    dst = grid or src.refined(lam)
    if dst.lengths != src.lengths:
        raise ConfigurationError("apply_scaling keeps the box; grid lengths must match")
    c = u0.coeffs
    amp = np.max(np.abs(c), axis=0)
    keep = np.ones(src.shape, dtype=bool)
    targets = []
    for axis, n_dst in enumerate(dst.shape):
        t = lam * src.freqs[axis].astype(int)
        fits = (t >= -(n_dst // 2)) & (t < n_dst // 2)
        shape = [1, 1, 1]
        shape[axis] = -1
        keep &= fits.reshape(shape)
        targets.append(t % n_dst)
    lost = amp[~keep]
    if lost.size and np.max(lost) > 1e-13 * max(np.max(amp), 1e-300):
        raise ConfigurationError("resolution insufficient: mapped modes fall outside the target grid")
    i1, i2, i3 = np.nonzero(keep)
    out = np.zeros((3,) + dst.shape, dtype=complex)
    out[:, targets[0][i1], targets[1][i2], targets[2][i3]] = lam * c[:, i1, i2, i3]
    return VectorField3(dst, out)
