"""Named initial-data generators.

All generators return divergence-free, real, mean-free velocity fields.
"""
from __future__ import annotations

import numpy as np

from .dynamics import leray_project
from .fields import ConfigurationError, Grid3, VectorField3, dealias
from .norms import besov_b0half, lp_norm


def taylor_green(grid: Grid3, amplitude: float = 1.0) -> VectorField3:
    """(sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0) scaled by amplitude."""
    x1, x2, x3 = grid.mesh()
    k = [2 * np.pi / L for L in grid.lengths]
    a, b, c = k[0] * x1, k[1] * x2, k[2] * x3
    u = np.stack([
        np.sin(a) * np.cos(b) * np.cos(c),
        -(k[0] / k[1]) * np.cos(a) * np.sin(b) * np.cos(c),
        np.zeros(grid.shape),
    ])
    return VectorField3.from_real(amplitude * u, grid)


def shear(grid: Grid3, amplitude: float = 1.0) -> VectorField3:
    """Unidirectional shear (sin x2, 0, 0): u . grad u = 0 exactly."""
    _, x2, _ = grid.mesh()
    z = np.zeros(grid.shape)
    return VectorField3.from_real(np.stack([amplitude * np.sin(2 * np.pi / grid.L2 * x2), z, z]), grid)


def random_divfree(grid: Grid3, seed: int, band: tuple[float, float] = (1.0, 4.0),
                   amplitude: float = 1.0) -> VectorField3:
    """Gaussian band-limited field, Leray-projected, scaled to sup norm ``amplitude``."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.shape)
    u = VectorField3.from_real(noise, grid)
    kmag = np.sqrt(grid.k2)
    mask = (kmag >= band[0]) & (kmag <= band[1])
    u = dealias(leray_project(VectorField3(grid, np.where(mask, u.coeffs, 0.0))))
    m = lp_norm(u, np.inf)
    if m == 0:
        raise ConfigurationError(f"band {band} holds no modes on this grid")
    return u * (amplitude / m)


def shear_perturbation(grid: Grid3, seed: int, amplitude: float = 1.0,
                       epsilon: float = 0.1) -> VectorField3:
    """Shear flow plus a small random divergence-free perturbation."""
    return shear(grid, amplitude) + random_divfree(grid, seed, amplitude=epsilon * amplitude)


GENERATORS = {
    "taylor_green": lambda grid, seed, amplitude: taylor_green(grid, amplitude),
    "random_divfree": lambda grid, seed, amplitude: random_divfree(grid, seed, amplitude=amplitude),
    "shear_perturbation": lambda grid, seed, amplitude: shear_perturbation(grid, seed, amplitude),
    "shear": lambda grid, seed, amplitude: shear(grid, amplitude),
}


def make_initial(name: str, grid: Grid3, *, seed: int = 0, amplitude: float = 1.0,
                 normalize: str = "none") -> VectorField3:
    """Build named data; ``normalize`` in {"none", "linf", "b0half"} rescales so
    that the chosen norm equals ``amplitude``."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ConfigurationError(f"unknown initial data {name!r}; choose from {sorted(GENERATORS)}")
    u = gen(grid, seed, 1.0 if normalize != "none" else amplitude)
    if normalize == "none":
        return u
    if normalize == "linf":
        m = lp_norm(u, np.inf)
    elif normalize == "b0half":
        m = besov_b0half(u, warn=False)
    else:
        raise ConfigurationError(f"unknown normalization {normalize!r}")
    return u * (amplitude / m)
