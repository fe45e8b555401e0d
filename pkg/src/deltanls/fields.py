"""Test fields: Gaussians, bumps, a randomized smooth family, and the small-data preset."""
from __future__ import annotations

import numpy as np

from .core import ComplexField, Grid, norm_weighted, reflect
from .scattering_transform import DistortedSpectrum, inverse_dft

# grid used by the final-state experiments: holds the t = 640 wave, xi_max ~ 20
PRESET_GRID = (65536, 5120.0)


def gaussian(grid: Grid, center: float = 0.0, width: float = 1.0, k: float = 0.0, amp: complex = 1.0) -> ComplexField:
    x = grid.x
    return ComplexField(grid, amp * np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * k * x))


def bump(grid: Grid, center: float = 0.0, radius: float = 1.0, k: float = 0.0) -> ComplexField:
    """C-infinity bump exp(-1/(1-u^2)), u = (x - center)/radius, compactly supported."""
    u = (grid.x - center) / radius
    out = np.zeros(grid.n, complex)
    m = np.abs(u) < 1
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2) + 1j * k * grid.x[m])
    return ComplexField(grid, out)


def notch(x: np.ndarray) -> np.ndarray:
    """1 - exp(-x^8): entire, flat to order 8 at the origin, 1 away from it."""
    return -np.expm1(-(x**8))


def notched(f: ComplexField) -> ComplexField:
    """Keep the odd part, damp the even part near x = 0.

    The result vanishes to high order at the origin together with its even
    derivatives, so it is compatible with every jump condition u'(0+) - u'(0-) = 2q u(0).
    """
    v = f.values
    e = 0.5 * (v + reflect(v))
    return f.with_values(v - e + notch(f.grid.x) * e)


def smooth_family(grid: Grid, count: int, seed: int = 0, packets: int = 3) -> list[ComplexField]:
    """Random sums of Gaussian packets (centers in [-2,2], widths in [0.5,1], momenta in [-2,2]), notched."""
    rng = np.random.default_rng(seed)
    x = grid.x
    out = []
    for _ in range(count):
        v = np.zeros(grid.n, complex)
        for _ in range(packets):
            c, s, k = rng.uniform(-2, 2), rng.uniform(0.5, 1.0), rng.uniform(-2, 2)
            a = rng.normal() + 1j * rng.normal()
            v += a * np.exp(-((x - c) ** 2) / (2 * s * s) + 1j * k * x)
        out.append(notched(ComplexField(grid, v)))
    return out


def preset_spectrum(grid: Grid, q: float, eps: float = 0.05) -> DistortedSpectrum:
    """Small-data final state, prescribed through its distorted transform.

    h(xi) = c (xi^2 + xi^3) e^{-xi^2/2}: smooth, h(0) = 0, with both parities so
    both half-lines carry mass; c is set so that ||(1+|x|) phi_+||_2 = eps.
    """
    xi = grid.xi
    h = (xi**2 + xi**3) * np.exp(-(xi**2) / 2)
    spec = DistortedSpectrum(grid, h, q)
    scale = eps / norm_weighted(inverse_dft(spec, q))
    return spec.with_values(scale * h)


def preset_grid() -> Grid:
    return Grid(*PRESET_GRID)


def gaussian_derivative_spectrum(grid: Grid, q: float) -> DistortedSpectrum:
    """h(xi) = xi e^{-xi^2}, the test datum for the leading-order remainder."""
    xi = grid.xi
    return DistortedSpectrum(grid, xi * np.exp(-(xi**2)), q)

