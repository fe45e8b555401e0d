"""Modified asymptotic profile and the remainders that measure how good it is.

u_ap(t, x) = t^{-1/2} h(x/t) exp(i x^2/2t - i lam |h(x/t)|^2 log t - i pi/4),  h = F_q[phi_+]
w(t, xi)   = h(xi) exp(-i lam |h(xi)|^2 log t)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kink
from .core import (
    ComplexField,
    DecayFit,
    ModelParams,
    Side,
    bandlimited_eval,
    fit_decay,
    fourier,
    norm_L2,
    norm_weighted,
    parallel_map,
)
from .propagator import propagate_spectral
from .scattering_transform import DistortedSpectrum, forward_dft, inverse_dft


@dataclass(frozen=True, eq=False)
class AsymptoticProfile:
    phi_plus: ComplexField
    hat_phi: DistortedSpectrum
    params: ModelParams
    epsilon_check: float

    @classmethod
    def from_field(cls, phi_plus: ComplexField, params: ModelParams, sharp: bool = True) -> "AsymptoticProfile":
        hat = forward_dft(phi_plus, params.q, sharp=sharp)
        return cls(phi_plus, hat, params, norm_weighted(phi_plus))

    @classmethod
    def from_spectrum(cls, spec: DistortedSpectrum, params: ModelParams) -> "AsymptoticProfile":
        """Profile whose distorted transform is prescribed; phi_+ comes from the inverse."""
        if spec.q != params.q:
            raise ValueError(f"spectrum built for q={spec.q}, params have q={params.q}")
        phi = inverse_dft(spec, params.q)
        return cls(phi, spec, params, norm_weighted(phi))

    @property
    def grid(self):
        return self.phi_plus.grid


@dataclass(frozen=True)
class PhaseS:
    """S(t, xi) = -lam |F_q[phi_+](xi)|^2 log t."""

    profile: AsymptoticProfile

    def __call__(self, t: float, xi=None) -> np.ndarray:
        h = self.profile.hat_phi.values if xi is None else spectrum_eval(self.profile.hat_phi, xi)
        return -self.profile.params.lam * np.abs(h) ** 2 * np.log(t)


@dataclass(frozen=True, eq=False)
class Remainders:
    times: np.ndarray
    R1_norms: np.ndarray
    R2_norms: np.ndarray
    R1_fit: DecayFit
    tR2_fit: DecayFit | None


def _check_t(t: float):
    if not t >= 1:
        raise ValueError(f"the profile is defined for t >= 1, got {t}")


def spectrum_eval(spec: DistortedSpectrum | np.ndarray, points, grid=None) -> np.ndarray:
    """Evaluate a frequency-side sample set at arbitrary frequencies.

    The branch jump at xi = 0 (and its derivative jumps) goes into an analytic
    carrier so that each half-line is interpolated without Gibbs ringing across
    the origin; the smooth remainder uses the band-limited interpolant.
    Frequencies outside the lattice range evaluate to 0.
    """
    if isinstance(spec, DistortedSpectrum):
        values, grid = spec.values, spec.grid
    else:
        values = np.asarray(spec, complex)
    pts = np.asarray(points, float)
    xi = grid.xi
    split = _kink.KinkSplit(values, xi, grid.dxi, M=5)
    out = np.zeros(pts.shape, complex)
    inside = (pts >= xi[0]) & (pts < -xi[0])
    sel = pts[inside]
    out[inside] = bandlimited_eval(split.remainder, grid.dxi, xi[0], sel) + _kink.carrier_eval(sel, split.c, split.sigma)
    return out


def _phase_profile(h_at: np.ndarray, x: np.ndarray, t: float, lam: float) -> np.ndarray:
    return t**-0.5 * h_at * np.exp(0.5j * x**2 / t - 1j * lam * np.abs(h_at) ** 2 * np.log(t) - 0.25j * np.pi)


def build_u_ap(profile: AsymptoticProfile, t: float) -> ComplexField:
    _check_t(t)
    x = profile.grid.x
    h = spectrum_eval(profile.hat_phi, x / t)
    return ComplexField(profile.grid, _phase_profile(h, x, t, profile.params.lam), Side.POSITION, t)


def free_profile(phi_plus: ComplexField, lam: float, t: float) -> ComplexField:
    """The q = 0 modified profile built from the ordinary Fourier transform."""
    _check_t(t)
    g = phi_plus.grid
    F = fourier(phi_plus).values
    h = spectrum_eval(F, g.x / t, grid=g)
    return ComplexField(g, _phase_profile(h, g.x, t, lam), Side.POSITION, t)


def build_w(profile: AsymptoticProfile, t: float) -> DistortedSpectrum:
    _check_t(t)
    h = profile.hat_phi.values
    return profile.hat_phi.with_values(h * np.exp(-1j * profile.params.lam * np.abs(h) ** 2 * np.log(t)))


def leading_order(spec: DistortedSpectrum, t: float, q: float) -> tuple[ComplexField, ComplexField]:
    """(t^{-1/2} h(x/t) e^{ix^2/2t - i pi/4}, remainder) for exp(-itH_q) F_q^{-1} h."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    g = spec.grid
    x = g.x
    lead = _phase_profile(spectrum_eval(spec, x / t), x, t, 0.0)
    full = propagate_spectral(inverse_dft(spec, q), t, q).field.values
    return ComplexField(g, lead, Side.POSITION, t), ComplexField(g, full - lead, Side.POSITION, t)


def remainder_R1(profile: AsymptoticProfile, t: float) -> ComplexField:
    """exp(-itH_q) F_q^{-1}[w(t)] - u_ap(t)."""
    _check_t(t)
    q = profile.params.q
    lin = propagate_spectral(inverse_dft(build_w(profile, t), q), t, q).field.values
    return ComplexField(profile.grid, lin - build_u_ap(profile, t).values, Side.POSITION, t)


def remainder_R2(profile: AsymptoticProfile, t: float) -> ComplexField:
    """exp(-itH_q) F_q^{-1}[lam t^{-1} |w|^2 w] - lam |u_ap|^2 u_ap."""
    _check_t(t)
    q, lam = profile.params.q, profile.params.lam
    g = profile.grid
    if lam == 0:
        return ComplexField(g, np.zeros(g.n), Side.POSITION, t)
    w = build_w(profile, t).values
    src = profile.hat_phi.with_values(lam / t * np.abs(w) ** 2 * w)
    lin = propagate_spectral(inverse_dft(src, q), t, q).field.values
    u = build_u_ap(profile, t).values
    return ComplexField(g, lin - lam * np.abs(u) ** 2 * u, Side.POSITION, t)


def remainder_scan(profile: AsymptoticProfile, times) -> Remainders:
    """Norms of R1 and t*R2 over the given times with their power-law fits."""
    times = np.asarray(times, float)
    r1 = np.array(parallel_map(lambda t: norm_L2(remainder_R1(profile, t)), times))
    r2 = np.array(parallel_map(lambda t: norm_L2(remainder_R2(profile, t)), times))
    tr2_fit = fit_decay(times, times * r2) if np.all(r2 > 0) else None
    return Remainders(times, r1, r2, fit_decay(times, r1), tr2_fit)
