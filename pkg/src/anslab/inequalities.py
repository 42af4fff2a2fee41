"""Ratio checks for the functional inequalities behind the lifespan estimates.

Each check draws seeded band-limited real fields on a periodic box (d = 2 or
3), evaluates LHS / RHS with constant 1, and reports max/min/mean over the
accepted samples.  Degenerate samples are rejected and counted, never
silently skipped.

Inequalities stated on R^d are probed on the torus.  Torus-filling random
fields see the box volume rather than the frequency scale, so the default
amplitude law draws spatially localised wave packets (a few Gaussian-enveloped
plane waves, width proportional to the inverse band centre, projected onto
the band).  Band robustness of the max ratio measures how well this stands in
for R^d.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.fft

from .fields import ConfigurationError


# ------------------------------------------------------------------ d-dim box

@dataclass(frozen=True)
class Box:
    shape: tuple[int, ...]
    lengths: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.lengths is None:
            object.__setattr__(self, "lengths", tuple(2 * np.pi for _ in self.shape))
        if len(self.lengths) != len(self.shape):
            raise ConfigurationError("shape and lengths disagree")

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def k(self) -> list[np.ndarray]:
        out = []
        for axis, (n, L) in enumerate(zip(self.shape, self.lengths)):
            shape = [1] * self.d
            shape[axis] = -1
            out.append((2 * np.pi / L * np.fft.fftfreq(n, 1.0 / n)).reshape(shape))
        return out

    def kmag(self, axes: Sequence[int] | None = None) -> np.ndarray:
        ks = self.k()
        axes = range(self.d) if axes is None else axes
        return np.sqrt(sum(ks[a] ** 2 for a in axes) + np.zeros(self.shape))

    def coordinates(self) -> list[np.ndarray]:
        out = []
        for axis, (n, L) in enumerate(zip(self.shape, self.lengths)):
            shape = [1] * self.d
            shape[axis] = -1
            out.append((np.arange(n) * (L / n)).reshape(shape))
        return out

    def fft(self, a):
        return scipy.fft.fftn(a, axes=tuple(range(-self.d, 0)), norm="forward")

    def ifft(self, c):
        return scipy.fft.ifftn(c, axes=tuple(range(-self.d, 0)), norm="forward").real

    def resized(self, shape: tuple[int, ...]) -> "Box":
        return Box(tuple(shape), self.lengths)


def pad_spectrum(c: np.ndarray, box: Box, shape: tuple[int, ...]) -> np.ndarray:
    """Embed coefficients into a larger grid (same box); exact interpolation
    for fields without Nyquist content."""
    out = np.zeros(c.shape[: c.ndim - box.d] + tuple(shape), dtype=complex)
    idx_src, idx_dst = [], []
    for n, m in zip(box.shape, shape):
        xi = np.fft.fftfreq(n, 1.0 / n).astype(int)
        keep = np.abs(xi) < n // 2
        idx_src.append(np.nonzero(keep)[0])
        idx_dst.append(xi[keep] % m)
    src = np.ix_(*idx_src)
    dst = np.ix_(*idx_dst)
    lead = (slice(None),) * (c.ndim - box.d)
    out[lead + dst] = c[lead + src]
    return out


def _even_at_least(m: float, n: int) -> int:
    m = max(int(math.ceil(m)), n)
    return m + (m % 2)


def spectral_lp(c: np.ndarray, box: Box, p: float, extent: np.ndarray | None = None) -> float:
    """L^p norm of a scalar band-limited field, evaluated on a grid fine
    enough that the midpoint rule integrates |f|^p exactly for even integer p."""
    big = box.resized(padded_shape(box, axis_extent(c, box) if extent is None else extent, p))
    f = big.ifft(pad_spectrum(c, box, big.shape))
    if math.isinf(p):
        return float(np.max(np.abs(f)))
    cell = big.volume / f.size
    return float((np.sum(np.abs(f) ** p) * cell) ** (1.0 / p))


def spectral_l2(c: np.ndarray, box: Box, weight: np.ndarray | float = 1.0) -> float:
    power = np.abs(c) ** 2
    if power.ndim > box.d:
        power = power.sum(axis=tuple(range(power.ndim - box.d)))
    return float(np.sqrt(box.volume * np.sum(weight * power)))


def hdot_weight(box: Box, s: float) -> np.ndarray:
    k = box.kmag()
    with np.errstate(divide="ignore"):
        return np.where(k > 0, k ** (2 * s), 0.0)


def h_weight(box: Box, s: float) -> np.ndarray:
    return (1.0 + box.kmag() ** 2) ** s


def axis_extent(c: np.ndarray, box: Box) -> np.ndarray:
    """Largest populated integer mode index along each axis."""
    power = np.abs(c)
    if power.ndim > box.d:
        power = power.max(axis=tuple(range(power.ndim - box.d)))
    live = power > 1e-14 * max(power.max(), 1e-300)
    out = np.zeros(box.d, dtype=int)
    for a, n in enumerate(box.shape):
        other = tuple(b for b in range(box.d) if b != a)
        hit = live.any(axis=other)
        xi = np.abs(np.fft.fftfreq(n, 1.0 / n).astype(int))
        out[a] = xi[hit].max() if hit.any() else 0
    return out


def padded_shape(box: Box, extent: np.ndarray, power: float) -> tuple[int, ...]:
    """Per-axis grid sizes on which a degree-``power`` polynomial in the field
    is integrated exactly (``power`` = inf falls back to 4x oversampling)."""
    factor = power if math.isfinite(power) else 4.0
    return tuple(_even_at_least(factor * e + 2, n) for e, n in zip(extent, box.shape))


# ------------------------------------------------------------------- sampler

AmplitudeLaw = Literal["packet", "gaussian"]


@dataclass(frozen=True)
class FieldSampler:
    """Seeded generator of real band-limited fields.

    The band [lo, hi] restricts |xi| over ``band_axes`` (all axes by default);
    remaining axes are kept inside the 2/3 range.  ``law="gaussian"`` uses a
    unit-variance complex Gaussian per mode (Hermitian by construction, via the
    transform of real white noise); ``law="packet"`` uses localised wave
    packets: envelope width ``width``/k0 and centres within ``spread``/k0 of the
    box centre, k0 the geometric band centre (hi/2 for a ball), so that moving the band by a
    factor 4 is an exact dilation of the sample law.  Sample i is drawn from default_rng([seed, i]).
    """

    box: Box
    band: tuple[float, float]
    seed: int = 0
    law: AmplitudeLaw = "packet"
    mean_zero: bool = True
    band_axes: tuple[int, ...] | None = None
    packets: int = 3
    width: float = 1.5
    spread: float = 1.5

    def __post_init__(self):
        lo, hi = self.band
        if not 0 <= lo < hi:
            raise ConfigurationError(f"bad band {self.band}")
        if self.law not in ("packet", "gaussian"):
            raise ConfigurationError(f"unknown amplitude law {self.law!r}")
        nyq = min(self.box.shape[a] // 2 for a in self.axes)
        if hi >= nyq:
            raise ConfigurationError(f"band top {hi} reaches the grid Nyquist {nyq}")

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(self.box.d)) if self.band_axes is None else self.band_axes

    def support_mask(self) -> np.ndarray:
        box = self.box
        kb = box.kmag(self.axes)
        mask = (kb >= self.band[0]) & (kb <= self.band[1])
        ks = box.k()
        for a in range(box.d):
            if a not in self.axes:
                mask &= np.abs(ks[a]) * box.lengths[a] / (2 * np.pi) <= box.shape[a] // 3
        if self.mean_zero:
            mask &= box.kmag() > 0
        return mask

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, index])

    def sample(self, index: int) -> np.ndarray:
        """Spectral coefficients of sample ``index``."""
        rng = self.rng(index)
        box = self.box
        if self.law == "gaussian":
            c = box.fft(rng.standard_normal(box.shape)) * math.sqrt(np.prod(box.shape))
        else:
            c = box.fft(self._packets(rng))
        return np.where(self.support_mask(), c, 0.0)

    def _packets(self, rng: np.random.Generator) -> np.ndarray:
        box = self.box
        lo, hi = self.band
        k0 = math.sqrt(lo * hi) if lo > 0 else hi / 2
        x = box.coordinates()
        f = np.zeros(box.shape)
        for _ in range(self.packets):
            centre = np.array(box.lengths) / 2 + rng.uniform(-1, 1, box.d) * self.spread / k0
            direction = rng.standard_normal(len(self.axes))
            direction /= np.linalg.norm(direction)
            kmag = rng.uniform(max(lo, 0.0), hi)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.standard_normal()
            env = np.zeros(box.shape)
            arg = np.zeros(box.shape)
            for a in range(box.d):
                L = box.lengths[a]
                dx = (x[a] - centre[a] + L / 2) % L - L / 2
                w = self.width / k0 if a in self.axes else 1.0
                env = env + dx**2 / (2 * w * w)
                if a in self.axes:
                    arg = arg + kmag * direction[self.axes.index(a)] * dx
            f += amp * np.exp(-env) * np.cos(arg + phase)
        return f


# -------------------------------------------------------------------- report

@dataclass
class RatioReport:
    inequality_id: str
    samples: int
    rejected: int
    max_ratio: float
    min_ratio: float
    mean_ratio: float
    worst: dict
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def finite(self) -> bool:
        return self.samples > 0 and math.isfinite(self.max_ratio)


def _collect(inequality_id: str, ratios: list[tuple[int, float]], rejected: int, seed: int,
             params: dict) -> RatioReport:
    if not ratios:
        return RatioReport(inequality_id, 0, rejected, math.nan, math.nan, math.nan, {}, seed, params)
    vals = np.array([r for _, r in ratios])
    worst = int(np.argmax(vals))
    return RatioReport(
        inequality_id, len(vals), rejected, float(vals.max()), float(vals.min()), float(vals.mean()),
        {"index": ratios[worst][0], "seed": [seed, ratios[worst][0]], "ratio": float(vals[worst])},
        seed, params,
    )


def band_spread(a: RatioReport, b: RatioReport) -> float:
    """max/min - 1 of the two max ratios (0 means identical)."""
    lo, hi = sorted((a.max_ratio, b.max_ratio))
    return hi / lo - 1.0 if lo > 0 else math.inf


# ------------------------------------------------------------------ Bernstein

def _mixed(c: np.ndarray, box: Box, p_h: float, q_v: float) -> float:
    """L^p_h(L^q_v) of a 3-D scalar field (vertical norm taken first)."""
    finite = [q for q in (p_h, q_v) if math.isfinite(q)]
    power = max(finite + [2.0]) if len(finite) == 2 else math.inf
    big = box.resized(padded_shape(box, axis_extent(c, box), power))
    f = np.abs(big.ifft(pad_spectrum(c, box, big.shape)))
    dv = big.lengths[2] / big.shape[2]
    dh = big.lengths[0] / big.shape[0] * big.lengths[1] / big.shape[1]
    v = np.max(f, axis=2) if math.isinf(q_v) else (np.sum(f**q_v, axis=2) * dv) ** (1 / q_v)
    return float(np.max(v)) if math.isinf(p_h) else float((np.sum(v**p_h) * dh) ** (1 / p_h))


def bernstein_ratio(c: np.ndarray, box: Box, ell: int, *, kind: Literal["ball", "ring"] = "ball",
                    alpha: int = 0, N: int = 1, p_h: float = 2.0, q1: float = 2.0,
                    q2: float = 2.0) -> float:
    """Ball: ||d3^alpha a||_{L^p_h L^q1_v} / (2^(ell(alpha + 1/q2 - 1/q1)) ||a||_{L^p_h L^q2_v}).
    Ring: ||a||_{L^p_h L^q1_v} / (2^(-ell N) ||d3^N a||_{L^p_h L^q1_v})."""
    k3 = box.k()[2]
    if kind == "ball":
        if not 1 <= q2 <= q1:
            raise ConfigurationError("need 1 <= q2 <= q1")
        num = _mixed((1j * k3) ** alpha * c, box, p_h, q1)
        den = 2.0 ** (ell * (alpha + 1 / q2 - (0 if math.isinf(q1) else 1 / q1))) * _mixed(c, box, p_h, q2)
    else:
        num = _mixed(c, box, p_h, q1)
        den = 2.0 ** (-ell * N) * _mixed((1j * k3) ** N * c, box, p_h, q1)
    return num / den


def check_bernstein(sampler: FieldSampler, ell: int, *, kind: Literal["ball", "ring"] = "ball",
                    alpha: int = 0, N: int = 1, p_h: float = 2.0, q1: float = 2.0, q2: float = 2.0,
                    samples: int = 100, radius: float = 1.0) -> RatioReport:
    """Vertical Bernstein ratios.  Samples must sit in the ball |xi3| <= radius 2^ell
    or the ring 2^ell [3/4, 8/3]; violators and zero fields are rejected."""
    box = sampler.box
    k3 = np.abs(box.k()[2]) + np.zeros(box.shape)
    if kind == "ball":
        allowed = k3 <= radius * 2.0**ell
    else:
        allowed = (k3 >= 0.75 * 2.0**ell) & (k3 <= 8 / 3 * 2.0**ell)
    ratios, rejected = [], 0
    for i in range(samples):
        c = sampler.sample(i)
        live = np.abs(c) > 1e-14 * max(np.abs(c).max(), 1e-300)
        if not live.any() or np.any(live & ~allowed):
            rejected += 1
            continue
        ratios.append((i, bernstein_ratio(c, box, ell, kind=kind, alpha=alpha, N=N, p_h=p_h, q1=q1, q2=q2)))
    params = {"ell": ell, "kind": kind, "alpha": alpha, "N": N, "p_h": p_h, "q1": q1, "q2": q2,
              "band": list(sampler.band), "law": sampler.law}
    return _collect(f"bernstein_{kind}", ratios, rejected, sampler.seed, params)


# ----------------------------------------------------- Gagliardo-Nirenberg type

def gn_ratio(c: np.ndarray, box: Box, variant: str, p: float | None = None) -> float:
    """Anisotropic Sobolev ratios; NaN when a derivative norm vanishes."""
    ks = box.k()
    l2 = spectral_l2(c, box)
    derivs = [spectral_l2(1j * ks[a] * c, box) for a in range(box.d)]
    if min(derivs) == 0 or l2 == 0:
        return math.nan
    if variant == "L42":
        if box.d != 2:
            raise ConfigurationError("L42 is two-dimensional")
        return spectral_lp(c, box, 4) / (l2**0.5 * derivs[0] ** 0.25 * derivs[1] ** 0.25)
    if variant == "Lp2":
        if box.d != 2 or p is None or not 2 <= p < math.inf:
            raise ConfigurationError("Lp2 needs d = 2 and 2 <= p < inf")
        e = 0.5 - 1.0 / p
        return spectral_lp(c, box, p) / (l2 ** (2 / p) * derivs[0] ** e * derivs[1] ** e)
    if variant == "L43":
        if box.d != 3:
            raise ConfigurationError("L43 is three-dimensional")
        return spectral_lp(c, box, 4) / (l2 * derivs[0] * derivs[1] * derivs[2]) ** 0.25
    raise ConfigurationError(f"unknown variant {variant!r}")


def check_aniso_gn(sampler: FieldSampler, variant: Literal["L42", "Lp2", "L43"], p: float | None = None,
                   samples: int = 100) -> RatioReport:
    if not sampler.mean_zero:
        raise ConfigurationError("anisotropic Sobolev checks need mean-zero samples")
    ratios, rejected = [], 0
    for i in range(samples):
        r = gn_ratio(sampler.sample(i), sampler.box, variant, p)
        if math.isnan(r):
            rejected += 1
        else:
            ratios.append((i, r))
    name = variant if variant != "Lp2" else f"Lp2(p={p:g})"
    return _collect(name, ratios, rejected, sampler.seed,
                    {"variant": variant, "p": p, "band": list(sampler.band), "law": sampler.law})


# --------------------------------------------------------------- product law

def _product(cf: np.ndarray, cg: np.ndarray, box: Box) -> tuple[np.ndarray, Box]:
    """Exact spectral coefficients of f*g on a grid large enough to hold them."""
    big = box.resized(padded_shape(box, axis_extent(cf, box) + axis_extent(cg, box), 2))
    f = big.ifft(pad_spectrum(cf, box, big.shape))
    g = big.ifft(pad_spectrum(cg, box, big.shape))
    return big.fft(f * g), big


def product_ratio(cf: np.ndarray, cg: np.ndarray, box: Box, s1: float, s2: float,
                  endpoint_eps: float | None = None) -> float:
    """||fg||_{Hdot^(s1+s2-d/2)} / (||f||_{Hdot^s1} ||g||_{Hdot^s2}); with
    ``endpoint_eps`` the s1 = d/2 form with the interpolated f norm."""
    d = box.d
    fg, big = _product(cf, cg, box)
    if endpoint_eps is None:
        num = spectral_l2(fg, big, hdot_weight(big, s1 + s2 - d / 2))
        den = spectral_l2(cf, box, hdot_weight(box, s1)) * spectral_l2(cg, box, hdot_weight(box, s2))
    else:
        e = endpoint_eps
        num = spectral_l2(fg, big, hdot_weight(big, s2))
        den = (spectral_l2(cf, box, hdot_weight(box, d / 2 - e)) ** 0.5
               * spectral_l2(cf, box, hdot_weight(box, d / 2 + e)) ** 0.5
               * spectral_l2(cg, box, hdot_weight(box, s2)))
    return num / den if den > 0 else math.nan


def check_product_law(sampler: FieldSampler, s1: float, s2: float, samples: int = 100,
                      endpoint_eps: float | None = None) -> RatioReport:
    d = sampler.box.d
    if d not in (2, 3):
        raise ConfigurationError("product law checks support d in {2, 3}")
    if endpoint_eps is None:
        if not (-d / 2 < s1 < d / 2 and -d / 2 < s2 < d / 2 and s1 + s2 > 0):
            raise ConfigurationError(f"inadmissible exponents s1={s1}, s2={s2} for d={d}")
    elif not (endpoint_eps > 0 and -d / 2 < s2 < d / 2 and d / 2 + s2 > 0):
        raise ConfigurationError("inadmissible endpoint parameters")
    ratios, rejected = [], 0
    for i in range(samples):
        r = product_ratio(sampler.sample(2 * i), sampler.sample(2 * i + 1), sampler.box, s1, s2,
                          endpoint_eps)
        if math.isnan(r):
            rejected += 1
        else:
            ratios.append((i, r))
    return _collect("product_law", ratios, rejected, sampler.seed,
                    {"d": d, "s1": s1, "s2": s2, "endpoint_eps": endpoint_eps,
                     "band": list(sampler.band), "law": sampler.law})


# ---------------------------------------------------------------- commutator

def commutator_ratio(cu: np.ndarray, cB: np.ndarray, box: Box, s: float) -> float:
    """||Lambda^s[(u.grad)B] - (u.grad)(Lambda^s B)||_2 / (||grad u||_{H^s} ||B||_{H^s}).

    cu, cB have shape (d,) + box.shape; Lambda^s has symbol |xi|^s."""
    d = box.d
    ks = box.k()
    big = box.resized(padded_shape(box, axis_extent(cu, box) + axis_extent(cB, box), 2))
    kb = big.k()
    lam_big = big.kmag() ** s
    u = big.ifft(pad_spectrum(cu, box, big.shape))
    B = pad_spectrum(cB, box, big.shape)
    LB = lam_big * B
    comm = np.zeros((d,) + big.shape, dtype=complex)
    for i in range(d):
        adv = np.zeros(big.shape)
        adv_l = np.zeros(big.shape)
        for j in range(d):
            adv += u[j] * big.ifft(1j * kb[j] * B[i])
            adv_l += u[j] * big.ifft(1j * kb[j] * LB[i])
        comm[i] = lam_big * big.fft(adv) - big.fft(adv_l)
    num = spectral_l2(comm, big)
    grad_u = sum(spectral_l2(1j * ks[i] * cu[j], box, h_weight(box, s)) ** 2
                 for i in range(d) for j in range(d)) ** 0.5
    den = grad_u * spectral_l2(cB, box, h_weight(box, s))
    if den > 0:
        return num / den
    # constant u: transport commutes with Lambda^s, so the commutator is
    # rounding noise and the ratio is read as 0
    scale = spectral_l2(cu, box) * spectral_l2(LB, big) * max(1.0, float(big.kmag().max()))
    return 0.0 if num <= 1e-12 * scale else math.nan


def check_commutator(sampler_u: FieldSampler, sampler_B: FieldSampler, s: float,
                     samples: int = 100) -> RatioReport:
    """u and B are d-component fields built from consecutive scalar samples of
    their own samplers (u from ``sampler_u``, B from ``sampler_B``).  Pairs
    whose ratio is undefined are rejected."""
    box = sampler_B.box
    if sampler_u.box != box:
        raise ConfigurationError("u and B samplers must share a box")
    d = box.d
    if not s > d / 2:
        raise ConfigurationError(f"need s > d/2, got s={s}, d={d}")
    ratios, rejected = [], 0
    for i in range(samples):
        cu = np.stack([sampler_u.sample(d * i + a) for a in range(d)])
        cB = np.stack([sampler_B.sample(d * i + a) for a in range(d)])
        r = commutator_ratio(cu, cB, box, s)
        if math.isnan(r):
            rejected += 1
        else:
            ratios.append((i, r))
    return _collect("commutator", ratios, rejected, sampler_B.seed,
                    {"d": d, "s": s, "band_u": list(sampler_u.band), "band_B": list(sampler_B.band),
                     "law": sampler_B.law})


# --------------------------------------------------------------------- suite

def l42_worked_example(n: int = 64) -> tuple[float, float]:
    """(quadrature ratio, closed form) for f = sin x1 sin x2 on the 2-torus."""
    box = Box((n, n))
    x = box.coordinates()
    c = box.fft(np.sin(x[0]) * np.sin(x[1]))
    return gn_ratio(c, box, "L42"), math.sqrt(3 * math.pi / 4) / math.pi


@dataclass(frozen=True)
class SuiteConfig:
    samples: int = 100
    seed: int = 0
    bands: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 4.0), (4.0, 16.0))
    grid2: int = 64
    grid3: int = 48
    tolerance: float = 0.2
    lp2_p: float = 8.0
    product_s: tuple[float, float] = (0.5, 0.5)
    commutator_s: float = 2.0
    bernstein_ells: tuple[int, ...] = (2, 3, 4, 5)
    bernstein_grid: tuple[int, int, int] = (16, 16, 192)
    include: tuple[str, ...] = ("L42", "Lp2", "L43", "product", "commutator", "bernstein")


@dataclass
class SuiteEntry:
    name: str
    reports: list[RatioReport]
    spread: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "spread": self.spread, "passed": self.passed, "note": self.note,
                "reports": [r.to_dict() for r in self.reports]}


def _entry(name: str, reports: list[RatioReport], tol: float, note: str = "") -> SuiteEntry:
    finite = all(r.finite for r in reports)
    vals = [r.max_ratio for r in reports]
    spread = max(vals) / min(vals) - 1.0 if finite and min(vals) > 0 else math.inf
    return SuiteEntry(name, reports, spread, finite and spread < tol, note)


def run_suite(cfg: SuiteConfig = SuiteConfig()) -> list[SuiteEntry]:
    """Every requested check at both bands (Bernstein: across ell), judged by
    finiteness and a max-ratio spread below ``cfg.tolerance``."""
    out = []
    box2, box3 = Box((cfg.grid2,) * 2), Box((cfg.grid3,) * 3)
    n, seed = cfg.samples, cfg.seed
    if "L42" in cfg.include:
        out.append(_entry("L42", [check_aniso_gn(FieldSampler(box2, b, seed), "L42", samples=n)
                                  for b in cfg.bands], cfg.tolerance))
    if "Lp2" in cfg.include:
        out.append(_entry(f"Lp2(p={cfg.lp2_p:g})",
                          [check_aniso_gn(FieldSampler(box2, b, seed), "Lp2", p=cfg.lp2_p, samples=n)
                           for b in cfg.bands], cfg.tolerance))
    if "L43" in cfg.include:
        out.append(_entry("L43", [check_aniso_gn(FieldSampler(box3, b, seed), "L43", samples=n)
                                  for b in cfg.bands], cfg.tolerance))
    if "product" in cfg.include:
        s1, s2 = cfg.product_s
        out.append(_entry("product_law", [check_product_law(FieldSampler(box2, b, seed), s1, s2, samples=n)
                                          for b in cfg.bands], cfg.tolerance))
    if "commutator" in cfg.include:
        reps = [check_commutator(FieldSampler(box3, b, seed + 1), FieldSampler(box3, b, seed),
                                 cfg.commutator_s, samples=n) for b in cfg.bands]
        out.append(_entry("commutator", reps, cfg.tolerance,
                          "inhomogeneous H^s: no dilation symmetry, band drift expected"))
    if "bernstein" in cfg.include:
        box = Box(cfg.bernstein_grid)
        for kind, kw in (("ball", {"alpha": 1, "q1": 4.0, "q2": 2.0, "p_h": 2.0}),
                         ("ring", {"N": 1, "q1": 2.0, "p_h": 4.0})):
            reps = []
            for ell in cfg.bernstein_ells:
                band = (0.0, 2.0**ell) if kind == "ball" else (0.75 * 2.0**ell, 8 / 3 * 2.0**ell)
                s = FieldSampler(box, band, seed, band_axes=(2,), mean_zero=kind == "ring")
                reps.append(check_bernstein(s, ell, kind=kind, samples=n, **kw))
            out.append(_entry(f"bernstein_{kind}", reps, cfg.tolerance))
    return out
