"""Dyadic (Littlewood-Paley) operators, full and vertical-only.

Profiles: chi is a C-infinity cutoff equal to 1 on [0, 3/4] and 0 on
[4/3, inf), built from the transition function exp(-1/x); phi is
phi(tau) = chi(tau/2) - chi(tau), supported in [3/4, 8/3].  Sums of phi over
dyadic scales telescope, so both partition-of-unity identities hold to
rounding error.  Blocks are always evaluated as chi(2^-(j+1) tau) -
chi(2^-j tau) to keep that telescoping exact in floating point.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .fields import ConfigurationError, Grid3, SpectralField3, VectorField3, fft3, ifft3

PROFILE_VERSION = "exp-transition/1"

_CHI_FLAT = 0.75
_CHI_ZERO = 4.0 / 3.0


def _transition(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(tau) -> np.ndarray:
    tau = np.abs(np.asarray(tau, dtype=float))
    a = _transition(_CHI_ZERO - tau)
    b = _transition(tau - _CHI_FLAT)
    with np.errstate(invalid="ignore"):
        out = a / (a + b)
    out = np.where(tau <= _CHI_FLAT, 1.0, out)
    return np.where(tau >= _CHI_ZERO, 0.0, out)


def phi(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    return chi(tau / 2.0) - chi(tau)


Direction = Literal["vertical", "full"]


@dataclass(frozen=True)
class DyadicSystem:
    """Block range for one grid and one direction.

    ``j_min`` is chosen so that S_{j_min} keeps only zero frequency (in the
    measured direction) and ``j_max`` so that S_{j_max} is the identity.
    """

    j_min: int
    j_max: int
    direction: Direction = "vertical"
    version: str = PROFILE_VERSION

    @classmethod
    def for_grid(cls, grid: Grid3, direction: Direction = "vertical") -> "DyadicSystem":
        if direction == "vertical":
            kmin = 2 * math.pi / grid.L3
            kmax = kmin * (grid.n3 // 2)
        elif direction == "full":
            kmin = 2 * math.pi / max(grid.lengths)
            kmax = math.sqrt(sum((2 * math.pi / L * (n // 2)) ** 2 for L, n in zip(grid.lengths, grid.shape)))
        else:
            raise ConfigurationError(f"unknown direction {direction!r}")
        return cls(math.floor(math.log2(kmin)) - 2, math.ceil(math.log2(kmax)) + 2, direction)

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def magnitude(self, grid: Grid3) -> np.ndarray:
        if self.direction == "vertical":
            return np.abs(grid.k[2])
        return np.sqrt(grid.k2)

    def block_weight(self, grid: Grid3, j: int) -> np.ndarray:
        tau = self.magnitude(grid)
        return chi(tau * 2.0 ** (-(j + 1))) - chi(tau * 2.0 ** (-j))

    def lowpass_weight(self, grid: Grid3, j: int) -> np.ndarray:
        return chi(self.magnitude(grid) * 2.0 ** (-j))

    def annulus(self, j: int) -> tuple[float, float]:
        return (0.75 * 2.0**j, 8.0 / 3.0 * 2.0**j)


def _system(f, sys: DyadicSystem | None, direction: Direction) -> DyadicSystem:
    if sys is None:
        return DyadicSystem.for_grid(f.grid, direction)
    if sys.direction != direction:
        raise ConfigurationError(f"expected a {direction} dyadic system, got {sys.direction}")
    return sys


def _apply(f, weight: np.ndarray):
    return type(f)(f.grid, f.coeffs * weight)


def vertical_block(f, j: int, sys: DyadicSystem | None = None):
    """Delta^v_j: multiply by phi(2^-j |xi_3|)."""
    sys = _system(f, sys, "vertical")
    return _apply(f, sys.block_weight(f.grid, j))


def vertical_lowpass(f, j: int, sys: DyadicSystem | None = None):
    """S^v_j: multiply by chi(2^-j |xi_3|)."""
    sys = _system(f, sys, "vertical")
    return _apply(f, sys.lowpass_weight(f.grid, j))


def full_block(f, j: int, sys: DyadicSystem | None = None):
    sys = _system(f, sys, "full")
    return _apply(f, sys.block_weight(f.grid, j))


def full_lowpass(f, j: int, sys: DyadicSystem | None = None):
    sys = _system(f, sys, "full")
    return _apply(f, sys.lowpass_weight(f.grid, j))


def vertical_mean(f):
    """Part of f with xi_3 = 0 (invisible to every vertical block)."""
    return _apply(f, (f.grid.freqs[2] == 0)[None, None, :])


@dataclass
class BlockDecomposition:
    blocks: dict[int, SpectralField3 | VectorField3]
    direction: Direction
    remainder: SpectralField3 | VectorField3

    def reconstruct(self):
        total = self.remainder.coeffs.copy()
        for block in self.blocks.values():
            total += block.coeffs
        return type(self.remainder)(self.remainder.grid, total)


def decompose(f, direction: Direction = "vertical", sys: DyadicSystem | None = None,
              inhomogeneous: bool = False) -> BlockDecomposition:
    """Split f into dyadic blocks.

    Homogeneous: blocks j_min..j_max plus the zero-frequency remainder.
    Inhomogeneous: blocks 0..j_max plus remainder S_0 f.
    """
    sys = _system(f, sys, direction)
    j_lo = 0 if inhomogeneous else sys.j_min
    blocks = {}
    for j in range(j_lo, sys.j_max + 1):
        w = sys.block_weight(f.grid, j)
        if np.any(w):
            blocks[j] = _apply(f, w)
    if inhomogeneous:
        remainder = _apply(f, sys.lowpass_weight(f.grid, 0))
    else:
        remainder = _apply(f, sys.lowpass_weight(f.grid, sys.j_min))
    return BlockDecomposition(blocks, direction, remainder)


@dataclass
class BonySplit:
    """fg = low_high + high_low + remainder, vertical direction.

    low_high  = sum_k Delta^v_k f * S^v_k g
    high_low  = sum_k S^v_{k+1} f * Delta^v_k g
    remainder = (vertical mean of f) * (vertical mean of g)
    """

    low_high: SpectralField3
    high_low: SpectralField3
    remainder: SpectralField3 = field(repr=False)

    def total(self) -> SpectralField3:
        return self.low_high + self.high_low + self.remainder


def bony_vertical_split(f: SpectralField3, g: SpectralField3,
                        sys: DyadicSystem | None = None, dealiased: bool = True) -> BonySplit:
    if f.grid != g.grid:
        raise ConfigurationError("bony_vertical_split: fields live on different grids")
    sys = _system(f, sys, "vertical")
    grid = f.grid
    fc, gc = f.coeffs, g.coeffs
    low_high = np.zeros(grid.shape)
    high_low = np.zeros(grid.shape)
    for k in sys.indices:
        w = sys.block_weight(grid, k)
        if not np.any(w):
            continue
        df = ifft3(fc * w).real
        dg = ifft3(gc * w).real
        low_high += df * ifft3(gc * sys.lowpass_weight(grid, k)).real
        high_low += ifft3(fc * sys.lowpass_weight(grid, k + 1)).real * dg
    mean = sys.lowpass_weight(grid, sys.j_min)
    rem = ifft3(fc * mean).real * ifft3(gc * mean).real
    parts = [SpectralField3(grid, fft3(a)) for a in (low_high, high_low, rem)]
    if dealiased:
        mask = grid.dealias_mask
        parts = [SpectralField3(grid, np.where(mask, p.coeffs, 0.0)) for p in parts]
    return BonySplit(*parts)


def partition_defects(grid: Grid3, sys: DyadicSystem | None = None) -> dict[str, float]:
    """Max deviation from 1 of the two partition-of-unity identities, evaluated
    on every frequency magnitude the grid carries (vertical and full)."""
    out = {}
    for direction in ("vertical", "full"):
        s = sys if sys is not None and sys.direction == direction else DyadicSystem.for_grid(grid, direction)
        tau = np.unique(s.magnitude(grid))
        homog = sum(chi(tau * 2.0 ** (-(j + 1))) - chi(tau * 2.0 ** (-j)) for j in s.indices)
        inhom = chi(tau) + sum(chi(tau * 2.0 ** (-(j + 1))) - chi(tau * 2.0 ** (-j))
                               for j in range(0, s.j_max + 1))
        pos = tau > 0
        out[f"{direction}_homogeneous"] = float(np.max(np.abs(homog[pos] - 1.0)))
        out[f"{direction}_inhomogeneous"] = float(np.max(np.abs(inhom - 1.0)))
    return out


@dataclass
class LPCheckReport:
    """Outcome of the partition / reconstruction / product suite."""

    grid: tuple[int, int, int]
    pairs: int
    partition: dict[str, float]
    max_reconstruction_error: float
    max_bony_error: float
    partition_tol: float = 1e-12
    reconstruction_tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return (max(self.partition.values()) < self.partition_tol
                and self.max_reconstruction_error < self.reconstruction_tol
                and self.max_bony_error < self.reconstruction_tol)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def random_scalar(grid: Grid3, rng: np.random.Generator) -> SpectralField3:
    """Real Gaussian field restricted to the dealiased modes."""
    c = fft3(rng.standard_normal(grid.shape))
    return SpectralField3(grid, np.where(grid.dealias_mask, c, 0.0))


def lp_check(n: int = 32, pairs: int = 100, seed: int = 0) -> LPCheckReport:
    """Partition of unity on every grid frequency, vertical reconstruction of
    random fields and Bony reconstruction of their products (dealiased)."""
    grid = Grid3(n, n, n)
    sys = DyadicSystem.for_grid(grid, "vertical")
    rec_err = bony_err = 0.0
    for i in range(pairs):
        rng = np.random.default_rng([seed, i])
        f, g = random_scalar(grid, rng), random_scalar(grid, rng)
        back = decompose(f, "vertical", sys).reconstruct()
        rec_err = max(rec_err, float(np.linalg.norm(back.coeffs - f.coeffs) / np.linalg.norm(f.coeffs)))
        split = bony_vertical_split(f, g, sys).total().coeffs
        prod = np.where(grid.dealias_mask, fft3(ifft3(f.coeffs).real * ifft3(g.coeffs).real), 0.0)
        bony_err = max(bony_err, float(np.linalg.norm(split - prod) / np.linalg.norm(prod)))
    return LPCheckReport((n, n, n), pairs, partition_defects(grid, sys), rec_err, bony_err)
