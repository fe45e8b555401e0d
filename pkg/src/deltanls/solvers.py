"""Time stepping for i u_t + 1/2 u_xx - q delta u = lam |u|^2 u, and final-state solvers.

Two independent constructions of the solution that behaves like u_ap as t -> oo:

* Picard iteration on the backward Duhamel equation, written in the
  interaction picture s(t) = F_q[exp(itH_q) u(t)]:

      s(t) = w(t) + i int_t^Tmax [ lam e^{i tau xi^2/2} F_q[|u|^2 u](tau) - lam tau^{-1} |w|^2 w(tau) ] dtau

  (the u_ap terms of the equation cancel identically, which leaves this form);
* Strang splitting run backwards from u_ap(Tmax).
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .asymptotics import AsymptoticProfile, build_u_ap, build_w
from .core import (
    BoundaryLeakWarning,
    ComplexField,
    DecayFit,
    ModelParams,
    Side,
    check_leak,
    fit_decay,
    norm_L2,
    norm_L2_split,
    norm_Lp,
    norm_spacetime,
    parallel_map,
)
from .propagator import PropagationResult, PropagatorRoute, propagate_spectral
from .scattering_transform import forward_dft, inverse_dft


class DivergenceError(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class TimeGrid:
    steps: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.steps, float)
        if s.ndim != 1 or s.size < 2 or np.any(np.diff(s) <= 0):
            raise ValueError("time steps must be a strictly increasing list of at least 2 times")
        object.__setattr__(self, "steps", s)

    @property
    def t_start(self) -> float:
        return float(self.steps[0])

    @property
    def t_end(self) -> float:
        return float(self.steps[-1])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.steps)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0))

    @classmethod
    def uniform(cls, t_start: float, t_end: float, n_steps: int) -> "TimeGrid":
        return cls(np.linspace(t_start, t_end, n_steps + 1))

    @classmethod
    def log2(cls, t_start: float, t_end: float, per_octave: int = 8) -> "TimeGrid":
        """t_k = t_start 2^{k/per_octave}; t_end must sit on the lattice."""
        k = per_octave * np.log2(t_end / t_start)
        if abs(k - round(k)) > 1e-9:
            raise ValueError("t_end/t_start must be a power of 2^(1/per_octave)")
        return cls(t_start * 2.0 ** (np.arange(round(k) + 1) / per_octave))


@dataclass(frozen=True)
class FinalStateConfig:
    T: float = 10.0
    T_max: float = 640.0
    alpha: float = 0.4
    picard_tol: float = 1e-10
    max_iters: int = 40
    per_octave: int = 8
    backward_dt: float = 1.0

    def __post_init__(self):
        if not 1 <= self.T < self.T_max:
            raise ValueError(f"need 1 <= T < T_max, got T={self.T}, T_max={self.T_max}")
        if not 0.25 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (1/4, 1/2), got {self.alpha}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if not self.max_iters >= 1:
            raise ValueError("max_iters must be >= 1")

    def time_grid(self) -> TimeGrid:
        return TimeGrid.log2(self.T, self.T_max, self.per_octave)


@dataclass
class SolveReport:
    route: str
    residuals: list = field(default_factory=list)
    iterations: int = 0
    status: str = "ok"
    sup_weighted_l2: float = float("nan")
    xnorm: float = float("nan")
    decay_fit: DecayFit | None = None
    mass_drift: float = float("nan")
    cross_route_error: float | None = None
    tail_bound: float = float("nan")
    epsilon: float = float("nan")
    wall_time: float = 0.0

    def residual_ratios(self) -> np.ndarray:
        r = np.asarray(self.residuals, float)
        return r[1:] / r[:-1] if r.size > 1 else np.array([])

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "decay_fit"}
        d["residuals"] = [float(r) for r in self.residuals]
        if self.decay_fit is not None:
            d["decay_slope"] = self.decay_fit.slope
            d["decay_rms_residual"] = self.decay_fit.rms_residual
        return d


# -- forward evolution -------------------------------------------------------

def forward_step(u: ComplexField, dt: float, params: ModelParams) -> ComplexField:
    """One Strang step: half nonlinear phase, linear flow, half nonlinear phase."""
    lam, q = params.lam, params.q
    v = u.values * np.exp(-0.5j * lam * np.abs(u.values) ** 2 * dt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        v = propagate_spectral(u.with_values(v), dt, q).field.values
    v = v * np.exp(-0.5j * lam * np.abs(v) ** 2 * dt)
    out = ComplexField(u.grid, v, Side.POSITION, u.t + dt)
    check_leak(out, "forward_step output")
    return out


def _run(u0: ComplexField, t0: float, t1: float, n: int, params: ModelParams) -> ComplexField:
    dt = (t1 - t0) / n
    u = ComplexField(u0.grid, u0.values, Side.POSITION, t0)
    for _ in range(n):
        u = forward_step(u, dt, params)
    return ComplexField(u.grid, u.values, Side.POSITION, t1)


def evolve(u0: ComplexField, tgrid: TimeGrid, params: ModelParams, direction: int = 1) -> list[PropagationResult]:
    """Repeated Strang steps over a uniform grid (``direction=-1`` runs from t_end back to t_start)."""
    if not tgrid.is_uniform:
        raise ValueError("forward evolution needs a uniform time grid")
    ts = tgrid.steps if direction > 0 else tgrid.steps[::-1]
    dt = ts[1] - ts[0]
    n0 = norm_L2_split(u0)
    u = ComplexField(u0.grid, u0.values, Side.POSITION, ts[0])
    out = [PropagationResult(float(ts[0]), u, PropagatorRoute.SPECTRAL, 0.0)]
    for t in ts[1:]:
        u = forward_step(u, dt, params)
        u = ComplexField(u.grid, u.values, Side.POSITION, float(t))
        drift = abs(norm_L2_split(u) - n0) / n0 if n0 > 0 else 0.0
        out.append(PropagationResult(float(t), u, PropagatorRoute.SPECTRAL, drift))
    return out


def richardson_check(u0: ComplexField, t_end: float, n_steps: int, params: ModelParams) -> dict:
    """Endpoint differences at dt, dt/2, dt/4; a second-order scheme gives ratio ~ 4."""
    a, b, c = (_run(u0, u0.t, u0.t + t_end, k * n_steps, params) for k in (1, 2, 4))
    d1 = norm_L2(a.with_values(a.values - b.values))
    d2 = norm_L2(b.with_values(b.values - c.values))
    return {"diff_dt": d1, "diff_half": d2, "ratio": d1 / d2 if d2 > 0 else float("inf")}


# -- norms on sampled solutions ----------------------------------------------

def _aligned(a, b):
    if len(a) != len(b) or any(abs(x.t - y.t) > 1e-9 * max(1.0, abs(x.t)) for x, y in zip(a, b)):
        raise ValueError("sample lists are not aligned in time")


def xnorm(samples: list[ComplexField], u_ap_samples: list[ComplexField], alpha: float) -> float:
    """sup_k t_k^alpha ( max_{j>=k} ||v_j||_2 + (int_{t_k}^{T_max} ||v||_inf^4)^{1/4} ), v = u - u_ap."""
    _aligned(samples, u_ap_samples)
    t = np.array([s.t for s in samples])
    v = [s.with_values(s.values - a.values) for s, a in zip(samples, u_ap_samples)]
    l2 = np.array([norm_L2(f) for f in v])
    linf = np.array([norm_Lp(f, np.inf) for f in v])
    sup_tail = np.maximum.accumulate(l2[::-1])[::-1]
    # backward cumulative integral of ||v||_inf^4
    c = cumulative_trapezoid(linf[::-1] ** 4, -t[::-1], initial=0.0)[::-1]
    return float(np.max(t**alpha * (sup_tail + c ** 0.25)))


def uniqueness_probe(u: list[ComplexField], v: list[ComplexField], window: tuple[float, float] | None = None) -> float:
    """||u - v||_{L^4(window; L^inf)} on shared samples."""
    _aligned(u, v)
    pairs = [(a.t, a.with_values(a.values - b.values)) for a, b in zip(u, v)]
    if window is not None:
        pairs = [p for p in pairs if window[0] - 1e-12 <= p[0] <= window[1] + 1e-12]
    return norm_spacetime(pairs, 4, np.inf)


# -- final-state solvers -------------------------------------------------------

def _profile_samples(profile: AsymptoticProfile, times) -> list[ComplexField]:
    return parallel_map(lambda t: build_u_ap(profile, t), times)


def _finish_report(rep: SolveReport, samples, uap, cfg: FinalStateConfig, profile) -> SolveReport:
    t = np.array([s.t for s in samples])
    diff = np.array([norm_L2(s.with_values(s.values - a.values)) for s, a in zip(samples, uap)])
    rep.sup_weighted_l2 = float(np.max(t**cfg.alpha * diff))
    rep.xnorm = xnorm(samples, uap, cfg.alpha)
    fit_sel = t <= cfg.T_max / 2 * (1 + 1e-12)
    if np.all(diff[fit_sel] > 0) and fit_sel.sum() >= 3:
        rep.decay_fit = fit_decay(t[fit_sel], diff[fit_sel])
    masses = np.array([norm_L2_split(s) for s in samples])
    rep.mass_drift = float(np.max(np.abs(masses - masses[-1])) / masses[-1])
    rep.tail_bound = float(cfg.T_max ** (-2 * cfg.alpha + 0.5))
    rep.epsilon = profile.epsilon_check
    return rep


def solve_final_state_picard(profile: AsymptoticProfile, cfg: FinalStateConfig,
                             raise_on_divergence: bool = False) -> tuple[list[ComplexField], SolveReport]:
    """Fixed point of the backward Duhamel map on the log-spaced window [T, T_max].

    The iteration starts at u^0 = u_ap and stops once ||u^{k+1} - u^k||_X < picard_tol;
    ``report.iterations`` counts the map applications needed to reach the fixed
    point (the last residual entry certifies it).
    """
    t0 = time.perf_counter()
    q, lam = profile.params.q, profile.params.lam
    g = profile.grid
    xi = g.xi
    times = cfg.time_grid().steps
    w = [build_w(profile, t).values for t in times]
    uap = _profile_samples(profile, times)
    rep = SolveReport(route="picard")

    def to_position(s, t):
        return ComplexField(g, inverse_dft(ComplexField(g, np.exp(-0.5j * t * xi**2) * s, Side.FREQUENCY), q).values,
                            Side.POSITION, t)

    def phi_map(u_list):
        def integrand(k):
            u = u_list[k].values
            N = forward_dft(ComplexField(g, np.abs(u) ** 2 * u), q).values
            return lam * np.exp(0.5j * times[k] * xi**2) * N - lam / times[k] * np.abs(w[k]) ** 2 * w[k]

        I = np.array(parallel_map(integrand, range(len(times))))
        # int_t^Tmax, trapezoid on the log grid
        tail = -cumulative_trapezoid(I[::-1], times[::-1], axis=0, initial=0.0)[::-1]
        s = [w[k] + 1j * tail[k] for k in range(len(times))]
        return parallel_map(lambda k: to_position(s[k], times[k]), range(len(times)))

    u = uap
    rising = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        for it in range(cfg.max_iters):
            new = phi_map(u)
            res = xnorm(new, u, cfg.alpha)
            rep.residuals.append(res)
            u = new
            if len(rep.residuals) > 1 and res > rep.residuals[-2]:
                rising += 1
            else:
                rising = 0
            if rising >= 3:
                rep.status = "diverged"
                break
            if res < cfg.picard_tol:
                break
        else:
            rep.status = "max_iters"
    rep.iterations = max(len(rep.residuals) - 1, 1) if rep.status == "ok" else len(rep.residuals)
    for f in u:
        check_leak(f, "picard solution")
    rep = _finish_report(rep, u, uap, cfg, profile)
    rep.wall_time = time.perf_counter() - t0
    if rep.status == "diverged" and raise_on_divergence:
        raise DivergenceError("Picard residuals increased three times in a row", rep)
    return u, rep


def solve_final_state_backward(profile: AsymptoticProfile, cfg: FinalStateConfig) -> tuple[list[ComplexField], SolveReport]:
    """Strang splitting from u(T_max) = u_ap(T_max) down to T, sampled on the same log grid.

    Each gap between consecutive sample times is covered by uniform steps no
    longer than ``cfg.backward_dt``.
    """
    t0 = time.perf_counter()
    times = cfg.time_grid().steps
    uap = _profile_samples(profile, times)
    u = uap[-1]
    out = [u]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        for k in range(len(times) - 1, 0, -1):
            gap = times[k] - times[k - 1]
            n = max(1, int(np.ceil(gap / cfg.backward_dt)))
            u = _run(u, times[k], times[k - 1], n, profile.params)
            out.append(u)
    out = out[::-1]
    for f in out:
        check_leak(f, "backward solution")
    rep = _finish_report(SolveReport(route="backward"), out, uap, cfg, profile)
    rep.wall_time = time.perf_counter() - t0
    return out, rep


def duhamel_consistency(samples: list[ComplexField], params: ModelParams, t_from: float, t_to: float,
                        dt: float = 0.05) -> float:
    """||evolve(u(t_from)) - u(t_to)||_2 for a sampled solution."""
    ts = np.array([s.t for s in samples])
    i = int(np.argmin(abs(ts - t_from)))
    j = int(np.argmin(abs(ts - t_to)))
    n = max(1, int(np.ceil((ts[j] - ts[i]) / dt)))
    u = _run(samples[i], ts[i], ts[j], n, params)
    return norm_L2(u.with_values(u.values - samples[j].values))
