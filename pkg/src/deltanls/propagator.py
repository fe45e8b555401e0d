"""Three routes to exp(-i t H_q) and the diagnostics that compare them.

Spectral      conj F_q^{-1}[ e^{i t xi^2/2} F_q[conj phi] ]
ReflectedFree free propagator applied to the reflection-form bracket, per half-line
FresnelKernel Fresnel integral of L_+ phi (x >= 0) or L_- phi (x < 0), by chirp-z
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

from .core import (
    BoundaryLeakWarning,
    ComplexField,
    DecayFit,
    LEAK_THRESHOLD,
    Side,
    boundary_leak,
    check_leak,
    fit_decay,
    ift,
    norm_L2,
    norm_L2_split,
    norm_Lp,
    norm_spacetime,
    parallel_map,
    reflect,
)
from .scattering_transform import (
    _check_q,
    _lplus,
    forward_dft,
    inverse_dft,
    reflection_brackets,
)


class BoundaryLeakError(RuntimeError):
    """The dispersed wave reached the edge of the box."""


class PropagatorRoute(enum.Enum):
    SPECTRAL = "spectral"
    REFLECTED_FREE = "reflected_free"
    FRESNEL_KERNEL = "fresnel_kernel"


@dataclass(frozen=True, eq=False)
class PropagationResult:
    t: float
    field: ComplexField
    route: PropagatorRoute
    l2_drift: float
    info: dict = field(default_factory=dict)


def _position(phi: ComplexField) -> np.ndarray:
    if phi.side is not Side.POSITION:
        raise ValueError("expected a position-side field")
    return phi.values


def _result(phi: ComplexField, out: np.ndarray, t: float, q: float, route: PropagatorRoute, **info) -> PropagationResult:
    f = ComplexField(phi.grid, out, Side.POSITION, phi.t + t)
    # the split rule only pays off when the flow puts a kink at the origin
    norm = norm_L2_split if q > 0 else norm_L2
    n_in = norm(phi)
    drift = abs(norm(f) - n_in) / n_in if n_in > 0 else 0.0
    info["boundary_leak"] = check_leak(f, f"{route.value} output")
    return PropagationResult(float(t), f, route, float(drift), info)


def propagate_spectral(phi: ComplexField, t: float, q: float, sharp: bool = False) -> PropagationResult:
    """exp(-itH_q) phi through the conjugated spectral sandwich, any real t."""
    q = _check_q(q)
    v = _position(phi)
    g = phi.grid
    s = forward_dft(ComplexField(g, np.conj(v)), q, sharp=sharp).values
    out = np.conj(inverse_dft(ComplexField(g, np.exp(0.5j * t * g.xi**2) * s, Side.FREQUENCY), q).values)
    return _result(phi, out, t, q, PropagatorRoute.SPECTRAL)


def propagate_reflected_free(phi: ComplexField, t: float, q: float, sharp: bool = False) -> PropagationResult:
    """Free flow of the reflection-form bracket; x >= 0 and x < 0 halves assembled separately."""
    q = _check_q(q)
    v = _position(phi)
    g = phi.grid
    up, down = reflection_brackets(v, q, g, sharp)
    phase = np.exp(-0.5j * t * g.xi**2)
    a, b = ift(np.stack([phase * up, phase * down]), g.dx)
    return _result(phi, np.where(g.x >= 0, a, b), t, q, PropagatorRoute.REFLECTED_FREE)


def fresnel_integral(h: np.ndarray, t: float, grid) -> np.ndarray:
    """e^{-i pi/4} (2 pi t)^{-1/2} int e^{i(x-y)^2/2t} h(y) dy at every grid point x.

    The chirp factorization e^{ix^2/2t} e^{-ixy/t} e^{iy^2/2t} turns the Riemann
    sum over y into a chirp-z transform evaluated directly at the abscissae x_j/t
    in frequency.  Output points with |x/t| >= pi/dx would sample the aliased
    part of the sum and are set to zero (the wave has not reached them at
    resolvable frequencies).
    """
    n, L, dx, x = grid.n, grid.L, grid.dx, grid.x
    gch = np.exp(0.5j * x**2 / t) * h
    W = np.exp(-1j * dx * dx / t)
    A = np.exp(-1j * L * dx / t)
    X = czt(gch, n, W, A)
    m = np.arange(n)
    integral = dx * X * np.exp(-1j * L * L / t) * np.exp(1j * L * m * dx / t)
    out = np.exp(-0.25j * np.pi) / np.sqrt(2 * np.pi * t) * np.exp(0.5j * x**2 / t) * integral
    out[np.abs(x / t) >= np.pi / dx] = 0
    return out


def propagate_fresnel(phi: ComplexField, t: float, q: float) -> PropagationResult:
    """Kernel route, t > 0 only."""
    q = _check_q(q)
    if not t > 0:
        raise ValueError(f"the Fresnel kernel route needs t > 0, got {t}")
    v = _position(phi)
    g = phi.grid
    lp = _lplus(v, q, g)
    lm = reflect(_lplus(reflect(v), q, g))
    out = np.where(g.x >= 0, fresnel_integral(lp, t, g), fresnel_integral(lm, t, g))
    cut = float(np.mean(np.abs(g.x / t) >= np.pi / g.dx))
    return _result(phi, out, t, q, PropagatorRoute.FRESNEL_KERNEL, cutoff_fraction=cut)


_ROUTES = {
    PropagatorRoute.SPECTRAL: propagate_spectral,
    PropagatorRoute.REFLECTED_FREE: propagate_reflected_free,
    PropagatorRoute.FRESNEL_KERNEL: propagate_fresnel,
}


def propagate(phi: ComplexField, t: float, q: float, route: PropagatorRoute = PropagatorRoute.SPECTRAL) -> PropagationResult:
    return _ROUTES[PropagatorRoute(route)](phi, t, q)


def dispersive_decay_scan(phi: ComplexField, q: float, times, route=PropagatorRoute.SPECTRAL) -> DecayFit:
    """Fit the slope of log ||exp(-itH_q) phi||_inf against log t."""
    times = np.asarray(times, float)
    if times.size < 3 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ValueError("times must be positive, increasing, at least 3 points")
    if times[-1] < 10 * times[0] * (1 - 1e-12):
        raise ValueError("times must span at least one decade")

    def one(t):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryLeakWarning)
            res = propagate(phi, t, q, route)
        leak = boundary_leak(res.field.values)
        if leak > LEAK_THRESHOLD:
            raise BoundaryLeakError(f"grid too small at t={t:g}: edge/peak = {leak:.2e}")
        return norm_Lp(res.field, np.inf)

    return fit_decay(times, parallel_map(one, times))


def strichartz_norm_probe(phi: ComplexField, q: float, pair: tuple[float, float], window: tuple[float, float],
                          n_times: int = 64) -> float:
    """||exp(-i.H_q) phi||_{L^q(window; L^r)} on log-spaced samples of the window."""
    qe, re = map(float, pair)
    if not (4 <= qe <= np.inf and abs(2 / qe + 1 / re - 0.5) < 1e-12):
        raise ValueError(f"pair {pair} is not admissible (2/q + 1/r = 1/2, 4 <= q <= inf)")
    t0, t1 = map(float, window)
    if not 0 < t0 < t1:
        raise ValueError("window must satisfy 0 < t0 < t1")
    times = np.geomspace(t0, t1, n_times)
    samples = parallel_map(lambda t: (t, propagate_spectral(phi, t, q).field), times)
    return norm_spacetime(samples, qe, re)
