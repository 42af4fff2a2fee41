"""Periodic-box grids and Fourier-side scalar/vector fields.

The whole package works on the periodic box [0, L1) x [0, L2) x [0, L3)
(default 2*pi per side) instead of R^3: every Fourier integral becomes a sum
over integer frequencies xi, with physical wavenumber k_i = 2*pi*xi_i / L_i.

Coefficients use the forward-normalised DFT,

    c(xi) = (1/N) sum_x f(x) exp(-i k.x),

so the constant 1 has c(0) = 1 and sin(x1) has c(+-1, 0, 0) = -+ i/2.  With
this convention Parseval reads ||f||_{L^2}^2 = |box| * sum |c|^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft


class ConfigurationError(ValueError):
    """Invalid grid, shape or parameter combination."""


@dataclass(frozen=True)
class Grid3:
    n1: int
    n2: int
    n3: int
    L1: float = 2 * np.pi
    L2: float = 2 * np.pi
    L3: float = 2 * np.pi

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ConfigurationError(f"{name}={n}: need an even integer >= 8")
        for name in ("L1", "L2", "L3"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")

    @classmethod
    def cube(cls, n: int, length: float = 2 * np.pi) -> "Grid3":
        return cls(n, n, n, length, length, length)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.L1, self.L2, self.L3)

    @property
    def volume(self) -> float:
        return self.L1 * self.L2 * self.L3

    @property
    def size(self) -> int:
        return self.n1 * self.n2 * self.n3

    @property
    def cell_volume(self) -> float:
        return self.volume / self.size

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @cached_property
    def freqs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Signed integer frequencies per axis, in FFT index order."""
        return tuple(np.fft.fftfreq(n, 1.0 / n) for n in self.shape)

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable physical wavenumbers (k1, k2, k3)."""
        out = []
        for axis, (xi, L) in enumerate(zip(self.freqs, self.lengths)):
            shape = [1, 1, 1]
            shape[axis] = -1
            out.append((2 * np.pi / L * xi).reshape(shape))
        return tuple(out)

    @cached_property
    def kd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavenumbers for first derivatives: Nyquist entries zeroed so that
        odd-order derivatives of real data stay real."""
        out = []
        for axis, (ki, n) in enumerate(zip(self.k, self.shape)):
            ki = ki.copy()
            ki.reshape(-1)[n // 2] = 0.0
            out.append(ki)
        return tuple(out)

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2, k3 = self.k
        return k1**2 + k2**2 + k3**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        masks = [np.abs(xi) <= n // 3 for xi, n in zip(self.freqs, self.shape)]
        return masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable sample coordinates x_i = L_i * m / n_i."""
        out = []
        for axis, (n, L) in enumerate(zip(self.shape, self.lengths)):
            shape = [1, 1, 1]
            shape[axis] = -1
            out.append((np.arange(n) * (L / n)).reshape(shape))
        return tuple(out)

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.broadcast_to(x, self.shape) for x in self.coordinates())

    def refined(self, factor: int) -> "Grid3":
        return Grid3(self.n1 * factor, self.n2 * factor, self.n3 * factor, *self.lengths)


def fft3(a: np.ndarray, axes=(-3, -2, -1)) -> np.ndarray:
    return scipy.fft.fftn(a, axes=axes, norm="forward")


def ifft3(c: np.ndarray, axes=(-3, -2, -1)) -> np.ndarray:
    return scipy.fft.ifftn(c, axes=axes, norm="forward")


@dataclass(eq=False)
class SpectralField3:
    grid: Grid3
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.grid.shape:
            raise ConfigurationError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid3) -> "SpectralField3":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def to_real(self) -> np.ndarray:
        return ifft3(self.coeffs).real

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def derivative(self, axis: int) -> "SpectralField3":
        return SpectralField3(self.grid, 1j * self.grid.kd[axis] * self.coeffs)

    def hermitian_defect(self) -> float:
        """max |c(-xi) - conj c(xi)|; zero for fields representing real data."""
        flipped = np.roll(np.flip(self.coeffs), 1, axis=(0, 1, 2))
        return float(np.max(np.abs(flipped - np.conj(self.coeffs))))

    def copy(self) -> "SpectralField3":
        return SpectralField3(self.grid, self.coeffs.copy())

    def _check(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpectralField3(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralField3(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField3(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField3(self.grid, -self.coeffs)


@dataclass(eq=False)
class VectorField3:
    """Three spectral components on one grid, stored as a (3, n1, n2, n3) array."""

    grid: Grid3
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (3,) + self.grid.shape:
            raise ConfigurationError(
                f"coefficient shape {self.coeffs.shape} does not match (3,)+{self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid3) -> "VectorField3":
        return cls(grid, np.zeros((3,) + grid.shape, dtype=np.complex128))

    @classmethod
    def from_components(cls, u1: SpectralField3, u2: SpectralField3, u3: SpectralField3):
        if not (u1.grid == u2.grid == u3.grid):
            raise ConfigurationError("components must share a grid")
        return cls(u1.grid, np.stack([u1.coeffs, u2.coeffs, u3.coeffs]))

    @classmethod
    def from_real(cls, samples: np.ndarray, grid: Grid3) -> "VectorField3":
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (3,) + grid.shape:
            raise ConfigurationError(f"samples shape {samples.shape} does not match grid")
        return cls(grid, fft3(samples))

    def component(self, i: int) -> SpectralField3:
        return SpectralField3(self.grid, self.coeffs[i])

    u1 = property(lambda self: self.component(0))
    u2 = property(lambda self: self.component(1))
    u3 = property(lambda self: self.component(2))

    def to_real(self) -> np.ndarray:
        return ifft3(self.coeffs).real

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def energy(self) -> float:
        """||u||_{L^2}^2 (no factor 1/2)."""
        return float(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2))

    def derivative(self, axis: int) -> "VectorField3":
        return VectorField3(self.grid, 1j * self.grid.kd[axis] * self.coeffs)

    def divergence(self) -> SpectralField3:
        kd = self.grid.kd
        return SpectralField3(self.grid, 1j * sum(kd[i] * self.coeffs[i] for i in range(3)))

    def is_divergence_free(self, rtol: float = 1e-10) -> bool:
        scale = np.max(np.abs(self.coeffs))
        if scale == 0:
            return True
        return bool(np.max(np.abs(self.divergence().coeffs)) <= rtol * scale)

    def hermitian_defect(self) -> float:
        return max(self.component(i).hermitian_defect() for i in range(3))

    def copy(self) -> "VectorField3":
        return VectorField3(self.grid, self.coeffs.copy())

    def _check(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return VectorField3(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return VectorField3(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return VectorField3(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField3(self.grid, -self.coeffs)


def forward_transform(real_samples: np.ndarray, grid: Grid3) -> SpectralField3:
    real_samples = np.asarray(real_samples)
    if real_samples.shape != grid.shape:
        raise ConfigurationError(
            f"sample shape {real_samples.shape} does not match grid {grid.shape}"
        )
    return SpectralField3(grid, fft3(real_samples.astype(float)))


def inverse_transform(f: SpectralField3) -> np.ndarray:
    return f.to_real()


def dealias(f):
    """2/3 rule: zero every coefficient with some |xi_i| > floor(n_i / 3)."""
    mask = f.grid.dealias_mask
    return type(f)(f.grid, np.where(mask, f.coeffs, 0.0))


def spectral_inner(f, g) -> float:
    """Real L^2 inner product computed on the Fourier side."""
    return float(f.grid.volume * np.real(np.sum(np.conj(f.coeffs) * g.coeffs)))

