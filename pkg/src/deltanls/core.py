"""Grids, complex fields, norms and power-law fits.

Conventions
-----------
Position samples are ``x_j = -L + j*dx`` with ``dx = 2L/n``; frequency samples
are ``xi_k = (k - n/2)*pi/L`` so that ``xi = 0`` sits at index ``n//2`` (as does
``x = 0``).  The transform pair is unitary with kernels ``exp(-+ i x xi)/sqrt(2 pi)``.
"""
from __future__ import annotations

import enum
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import czt

SQRT_2PI = np.sqrt(2.0 * np.pi)
LEAK_THRESHOLD = 1e-8
WORKERS_ENV = "DELTANLS_WORKERS"


class BoundaryLeakWarning(UserWarning):
    """Field mass has reached the edge of the periodic box."""


class Side(enum.Enum):
    POSITION = 0
    FREQUENCY = 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L, L) and its dual frequency lattice."""

    n: int
    L: float

    def __post_init__(self):
        n = int(self.n)
        if n < 4 or n & (n - 1):
            raise ValueError(f"grid size n must be a power of two >= 4, got {self.n}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"half width L must be positive, got {self.L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def j0(self) -> int:
        """Index of x = 0 (and of xi = 0)."""
        return self.n // 2

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        xi = (np.arange(self.n) - self.n // 2) * self.dxi
        xi.flags.writeable = False
        return xi

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a grid, either in position or in frequency."""

    grid: Grid
    values: np.ndarray
    side: Side = Side.POSITION
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def step(self) -> float:
        return self.grid.dx if self.side is Side.POSITION else self.grid.dxi

    @property
    def abscissa(self) -> np.ndarray:
        return self.grid.x if self.side is Side.POSITION else self.grid.xi

    def with_values(self, values, t: float | None = None) -> "ComplexField":
        return ComplexField(self.grid, values, self.side, self.t if t is None else t)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable, side: Side = Side.POSITION, t: float = 0.0):
        s = grid.x if side is Side.POSITION else grid.xi
        return cls(grid, fn(s), side, t)


@dataclass(frozen=True)
class ModelParams:
    q: float
    lam: float = 1.0
    allow_linear: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.q >= 0:
            raise ValueError(f"coupling q must be >= 0 (repulsive case only), got {self.q}")
        if self.lam == 0 and not self.allow_linear:
            raise ValueError("nonlinearity lambda must be nonzero")


@dataclass(frozen=True)
class DecayFit:
    times: np.ndarray
    norms: np.ndarray
    slope: float
    intercept: float
    rms_residual: float

    def predict(self, t):
        return np.exp(self.intercept) * np.asarray(t, float) ** self.slope


# -- plain FFT on the centered lattice -------------------------------------

def ft(f: np.ndarray, dx: float) -> np.ndarray:
    """Unitary Fourier transform of centered samples (Riemann sum)."""
    return dx / SQRT_2PI * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(f, axes=-1), axis=-1), axes=-1)


def ift(F: np.ndarray, dx: float) -> np.ndarray:
    """Inverse of :func:`ft`, returning position samples."""
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(F, axes=-1), axis=-1), axes=-1) * (SQRT_2PI / dx)


def reflect(f: np.ndarray) -> np.ndarray:
    """Sample array of f(-x) (or F(-xi)); the -L / Nyquist sample maps to itself."""
    n = f.shape[-1]
    return f[..., (-np.arange(n)) % n]


def fourier(f: ComplexField) -> ComplexField:
    if f.side is not Side.POSITION:
        raise ValueError("fourier expects a position-side field")
    return ComplexField(f.grid, ft(f.values, f.grid.dx), Side.FREQUENCY, f.t)


def inverse_fourier(F: ComplexField) -> ComplexField:
    if F.side is not Side.FREQUENCY:
        raise ValueError("inverse_fourier expects a frequency-side field")
    return ComplexField(F.grid, ift(F.values, F.grid.dx), Side.POSITION, F.t)


# -- boundary diagnostics ---------------------------------------------------

def boundary_leak(values: np.ndarray) -> float:
    """Ratio of the largest modulus on the outer 1% of samples to the global max."""
    a = np.abs(values)
    peak = a.max()
    if peak == 0:
        return 0.0
    m = max(1, len(a) // 200)
    return float(max(a[:m].max(), a[-m:].max()) / peak)


def check_leak(f: ComplexField, what: str = "field", threshold: float = LEAK_THRESHOLD) -> float:
    ratio = boundary_leak(f.values)
    if ratio > threshold:
        warnings.warn(f"boundary leak in {what}: edge/peak = {ratio:.2e}", BoundaryLeakWarning, stacklevel=3)
    return ratio


# -- norms -------------------------------------------------------------------

def norm_L2(f: ComplexField) -> float:
    """Trapezoid value of (int |f|^2)^{1/2} (periodic, so all weights are equal)."""
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.step))


# Gregory end corrections: trapezoid + sum_k GREG[k-1] * (difference of order k)
GREG = (1 / 12, 1 / 24, 19 / 720, 3 / 160, 863 / 60480, 275 / 24192, 33953 / 3628800)


def mass_split(values: np.ndarray, grid: Grid, order: int = 7) -> float:
    """int |f|^2 with Gregory corrections on both sides of x = 0.

    Fields in the domain of H_q have a derivative jump at the origin, which costs
    the plain trapezoid rule O(dx^2); treating [-L,0] and [0,L] as separate panels
    with end corrections at 0 restores high order.
    """
    g = np.abs(values) ** 2
    j0 = grid.j0
    left = g[: j0 + 1][::-1]
    right = g[j0:]
    corr = 0.0
    for k in range(1, order + 1):
        dl = np.diff(left[: k + 1], k)[0]
        dr = np.diff(right[: k + 1], k)[0]
        nb = (-1) ** k * dl
        corr += GREG[k - 1] * ((nb - dr) if k % 2 else (nb + dr))
    return float(g.sum() * grid.dx - grid.dx * corr)


def norm_L2_split(f: ComplexField) -> float:
    """L2 norm with the kink at the origin handled by split Gregory quadrature."""
    if f.side is not Side.POSITION:
        raise ValueError("norm_L2_split expects a position-side field")
    return float(np.sqrt(max(mass_split(f.values, f.grid), 0.0)))


def norm_Lp(f: ComplexField, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * f.step) ** (1.0 / p))


def norm_weighted(f: ComplexField) -> float:
    """||(1+|x|) f||_2."""
    if f.side is not Side.POSITION:
        raise ValueError("norm_weighted expects a position-side field")
    w = (1.0 + np.abs(f.grid.x)) * np.abs(f.values)
    return float(np.sqrt(np.sum(w**2) * f.grid.dx))


def norm_spacetime(samples: Sequence[tuple[float, ComplexField]], q_exp: float, r_exp: float) -> float:
    """(int ||f(tau)||_{L^r}^q dtau)^{1/q} by composite trapezoid in time."""
    if not q_exp >= 1:
        raise ValueError(f"time exponent must be >= 1, got {q_exp}")
    if len(samples) == 0:
        raise ValueError("no samples")
    times = np.array([s[0] for s in samples], float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    inner = np.array([norm_Lp(f, r_exp) for _, f in samples])
    if np.isinf(q_exp):
        return float(inner.max())
    if len(samples) < 2:
        raise ValueError("need at least 2 time samples for a finite time exponent")
    return float(trapezoid(inner**q_exp, times) ** (1.0 / q_exp))


def fit_decay(times, norms) -> DecayFit:
    t = np.asarray(times, float)
    y = np.asarray(norms, float)
    if t.shape != y.shape or t.size < 3:
        raise ValueError("need at least 3 matching (time, norm) points")
    if np.any(t <= 0) or np.any(y <= 0):
        raise ValueError("times and norms must be positive")
    lt, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lt, ly, 1)
    res = ly - (slope * lt + intercept)
    return DecayFit(t, y, float(slope), float(intercept), float(np.sqrt(np.mean(res**2))))


# -- band-limited evaluation -----------------------------------------------

def _trig_coeffs(values: np.ndarray):
    """Coefficients c_k, k = -n/2..n/2, of the symmetric trigonometric interpolant."""
    n = len(values)
    c = np.fft.fftshift(np.fft.fft(values)) / n  # k = -n/2 .. n/2-1
    c = np.concatenate([c, [0.5 * c[0]]])
    c[0] *= 0.5
    return c, np.arange(-(n // 2), n // 2 + 1)


def bandlimited_eval(values: np.ndarray, step: float, start: float, points: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of periodic samples ``values[j] = f(start + j*step)``.

    Evaluated at ``points``. Uniformly spaced point sets go through one chirp-z
    transform; anything else falls back to a blocked direct sum.
    """
    n = len(values)
    c, k = _trig_coeffs(np.asarray(values, complex))
    pts = np.asarray(points, float)
    s = (pts - start) / step
    w = 2j * np.pi / n
    if pts.ndim == 1 and pts.size > 2:
        ds = np.diff(s)
        if np.allclose(ds, ds[0], rtol=1e-12, atol=1e-12 * max(1.0, abs(s).max())):
            ds0 = (s[-1] - s[0]) / (s.size - 1)
            x = c * np.exp(w * k * s[0])
            out = czt(x, s.size, np.exp(w * ds0), 1.0)
            return out * np.exp(w * k[0] * ds0 * np.arange(s.size))
    out = np.empty(s.shape, complex)
    flat = s.ravel()
    res = out.reshape(-1)
    for i0 in range(0, flat.size, 256):
        blk = flat[i0 : i0 + 256]
        res[i0 : i0 + 256] = np.exp(w * np.outer(blk, k)) @ c
    return out


# -- worker pool --------------------------------------------------------------

def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Map over independent work items with a bounded thread pool (numpy FFTs drop the GIL)."""
    items = list(items)
    nw = min(worker_count(), len(items))
    if nw <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))
