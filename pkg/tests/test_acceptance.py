"""Acceptance run: one PASS/FAIL line per criterion, thresholds and runtime limits as stated.

    pytest tests/test_acceptance.py -v        (lines printed in the terminal summary)
    python tests/test_acceptance.py            (lines printed as they finish)
"""
from __future__ import annotations

import time
import warnings

import numpy as np
import pytest

from deltanls.asymptotics import AsymptoticProfile, build_u_ap, free_profile, leading_order, remainder_scan
from deltanls.core import BoundaryLeakWarning, ComplexField, Grid, ModelParams, norm_L2, reflect
from deltanls.fields import bump, gaussian, gaussian_derivative_spectrum, notched, preset_grid, preset_spectrum, smooth_family
from deltanls.propagator import PropagatorRoute, dispersive_decay_scan, propagate
from deltanls.scattering_transform import (
    DistortedSpectrum,
    ScatteringCoeffs,
    adjoint_check,
    apply_L_minus,
    apply_L_plus,
    forward_dft,
    inverse_dft,
    inverse_dft_minus,
    inverse_dft_plus,
)
from deltanls.solvers import (
    FinalStateConfig,
    TimeGrid,
    duhamel_consistency,
    evolve,
    richardson_check,
    solve_final_state_backward,
    solve_final_state_picard,
)

LINES: list[str] = []


def record(label: str, ok: bool, detail: str, elapsed: float, limit: float | None):
    timing = f"{elapsed:.1f}s" + (f" / {limit:g}s" if limit else "")
    passed = ok and (limit is None or elapsed <= limit)
    line = f"CRITERION {label}: {'PASS' if passed else 'FAIL'}  {detail}  [{timing}]"
    LINES.append(line)
    print(line, flush=True)
    return passed


def rel(a: ComplexField, b: np.ndarray) -> float:
    return norm_L2(a.with_values(a.values - b)) / norm_L2(a)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        yield


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1():
    t0 = time.perf_counter()
    xi = np.random.default_rng(0).uniform(-50, 50, 100_000)
    worst = 0.0
    for q in (1e-3, 0.5, 1.0, 4.0):
        c = ScatteringCoeffs(q)
        t, r = c.t(xi), c.r(xi)
        worst = max(worst, np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1).max(), np.abs(t - 1 - r).max(),
                    np.abs((t * np.conj(r)).real).max())
    assert record("1", worst < 1e-13, f"max identity residual {worst:.1e} (< 1e-13)", time.perf_counter() - t0, 1)


# -- 2 and 3 -------------------------------------------------------------------

def transform_errors(grid: Grid, q: float, count: int, seed: int = 0) -> dict:
    fam = smooth_family(grid, count, seed)
    e = dict.fromkeys(["round_trip", "isometry", "F_vs_I", "G_vs_J", "duality", "e1", "e2"], 0.0)
    for k, f in enumerate(fam):
        n = norm_L2(f)
        S = forward_dft(f, q)
        b = inverse_dft(S, q)
        e["round_trip"] = max(e["round_trip"], rel(f, b.values))
        e["isometry"] = max(e["isometry"], abs(S.l2 - n) / n)
        SF = forward_dft(f, q, "F")
        e["F_vs_I"] = max(e["F_vs_I"], np.sqrt(np.sum(np.abs(S.values - SF.values) ** 2) * grid.dxi) / n)
        e["G_vs_J"] = max(e["G_vs_J"], rel(b, inverse_dft(S, q, "G").values))
        lhs, rhs = adjoint_check(f, fam[(k + 1) % count], q)
        e["duality"] = max(e["duality"], abs(lhs - rhs) / abs(lhs))
        e["e1"] = max(e["e1"], np.abs(apply_L_plus(b, q).values - inverse_dft_plus(S, q).values).max())
        e["e2"] = max(e["e2"], np.abs(apply_L_minus(b, q).values - inverse_dft_minus(S, q).values).max())
    return e


def ft_detail(e):
    return ", ".join(f"{k} {e[k]:.1e}" for k in ("round_trip", "isometry", "F_vs_I", "G_vs_J", "duality"))


def ft_ok(e):
    return all(e[k] < 1e-8 for k in ("round_trip", "isometry", "F_vs_I", "G_vs_J", "duality"))


def test_criterion_2():
    t0 = time.perf_counter()
    g = Grid(4096, 40.0)
    worst = {}
    for q in (0.0, 0.5, 1.0, 4.0):
        for k, v in transform_errors(g, q, 20).items():
            worst[k] = max(worst.get(k, 0.0), v)
    assert record("2 [q in {0,0.5,1,4}, n=4096, L=40]", ft_ok(worst), ft_detail(worst) + " (each < 1e-8)",
                  time.perf_counter() - t0, 10)


def test_criterion_2_small_q():
    # q = 1e-3 on the stated box: qL = 0.04, the |xi| ~ q structure is below the lattice spacing
    t0 = time.perf_counter()
    e = transform_errors(Grid(4096, 40.0), 1e-3, 20)
    assert record("2 [q=1e-3, n=4096, L=40]", ft_ok(e), ft_detail(e) + " (each < 1e-8)", time.perf_counter() - t0, 10)


def test_criterion_2_small_q_long_box():
    # supplementary: the same family on a box with qL ~ 41
    t0 = time.perf_counter()
    e = transform_errors(Grid(2**21, 40960.0), 1e-3, 3)
    assert record("2 [q=1e-3, n=2^21, L=40960, 3 fields, supplementary]", ft_ok(e), ft_detail(e) + " (each < 1e-8)",
                  time.perf_counter() - t0, None)


def test_criterion_3():
    t0 = time.perf_counter()
    g = Grid(4096, 40.0)
    worst = 0.0
    for q in (1e-3, 0.5, 1.0, 4.0):
        e = transform_errors(g, q, 20)
        worst = max(worst, e["e1"], e["e2"])
    assert record("3", worst < 1e-7, f"max pointwise (e1)/(e2) error {worst:.1e} (< 1e-7)", time.perf_counter() - t0, 10)


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4():
    t0 = time.perf_counter()
    g = Grid(32768, 320.0)
    # data kept away from the origin so all three routes see smooth input
    data = [gaussian(g, 6.0, k=0.5), bump(g, -7.0, 3.0)]
    disc = drift = parity = 0.0
    for phi in data:
        mirrored = phi.with_values(reflect(phi.values))
        for q in (0.0, 1.0, 4.0):
            for t in (0.5, 1.0, 5.0):
                out = {r: propagate(phi, t, q, r) for r in PropagatorRoute}
                fs = [o.field.values for o in out.values()]
                for i in range(3):
                    for j in range(i + 1, 3):
                        disc = max(disc, norm_L2(phi.with_values(fs[i] - fs[j])))
                drift = max(drift, out[PropagatorRoute.SPECTRAL].l2_drift, out[PropagatorRoute.REFLECTED_FREE].l2_drift)
                pm = propagate(mirrored, t, q).field.values
                parity = max(parity, np.abs(reflect(fs[0]) - pm).max())
    ok = disc < 1e-5 and drift < 1e-10 and parity < 1e-12
    assert record("4", ok, f"route discrepancy {disc:.1e} (< 1e-5), drift {drift:.1e} (< 1e-10), "
                  f"parity {parity:.1e} (roundoff, < 1e-12)", time.perf_counter() - t0, 30)


# -- 5 ---------------------------------------------------------------------------

def test_criterion_5():
    t0 = time.perf_counter()
    g = Grid(16384, 1024.0)
    xi = g.xi
    times = np.geomspace(10, 100, 10)
    slopes = {}
    slopes["q=0 gaussian"] = dispersive_decay_scan(gaussian(g), 0.0, times).slope
    for q in (0.0, 1.0):
        # a datum given through a smooth distorted spectrum satisfies the jump condition exactly
        phi = inverse_dft(DistortedSpectrum(g, (xi**2 + xi**3) * np.exp(-(xi**2) / 2), q), q)
        slopes[f"q={q:g} spectral datum"] = dispersive_decay_scan(phi, q, times).slope
    ok = all(abs(s + 0.5) <= 0.05 for s in slopes.values())
    detail = ", ".join(f"{k} {v:.4f}" for k, v in slopes.items()) + " (-0.5 +- 0.05)"
    assert record("5", ok, detail, time.perf_counter() - t0, 60)


# -- 6 ---------------------------------------------------------------------------

def test_criterion_6():
    t0 = time.perf_counter()
    g = preset_grid()
    times = np.geomspace(10, 200, 10)
    slopes = {}
    for q in (0.0, 1.0):
        spec = gaussian_derivative_spectrum(g, q)
        R = [norm_L2(leading_order(spec, t, q)[1]) for t in times]
        slopes[q] = float(np.polyfit(np.log(times), np.log(R), 1)[0])
    ok = all(-0.6 <= s <= -0.4 for s in slopes.values())
    detail = ", ".join(f"q={q:g} slope {s:.3f}" for q, s in slopes.items()) + " (in [-0.6, -0.4])"
    assert record("6", ok, detail, time.perf_counter() - t0, 60)


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7():
    t0 = time.perf_counter()
    g = preset_grid()
    parts = []
    ok = True
    for q in (0.0, 1.0):
        prof = AsymptoticProfile.from_spectrum(preset_spectrum(g, q), ModelParams(q, 1.0))
        rem = remainder_scan(prof, np.geomspace(10, 200, 10))
        s1, s2 = rem.R1_fit.slope, rem.tR2_fit.slope
        ok &= s1 <= -0.4 and s2 <= -0.4
        parts.append(f"q={q:g} R1 slope {s1:.3f}, t*R2 slope {s2:.3f}")
    assert record("7", ok, "; ".join(parts) + " (each <= -0.4)", time.perf_counter() - t0, 120)


# -- 8 ---------------------------------------------------------------------------

def test_criterion_8():
    t0 = time.perf_counter()
    g = Grid(4096, 40.0)
    u0 = notched(gaussian(g, amp=0.5))
    res = evolve(u0, TimeGrid.uniform(0.0, 1.0, 10_000), ModelParams(1.0, 1.0))
    drift = max(r.l2_drift for r in res)
    g2 = Grid(4096, 64.0)
    ratios = [richardson_check(notched(gaussian(g2, amp=0.5)), 1.0, 20, ModelParams(q, 1.0))["ratio"] for q in (0.0, 1.0)]
    gc = Grid(64, 10.0)
    c = 0.7 + 0.2j
    end = evolve(ComplexField(gc, np.full(gc.n, c)), TimeGrid.uniform(0, 1, 100), ModelParams(0.0, 1.0))[-1]
    closed = float(np.abs(end.field.values - c * np.exp(-1j * abs(c) ** 2)).max())
    ok = drift < 1e-7 and all(3.5 <= r <= 4.5 for r in ratios) and closed < 1e-8
    detail = (f"mass drift {drift:.1e} over 1e4 steps (< 1e-7), splitting ratios q=0 {ratios[0]:.2f}, "
              f"q=1 {ratios[1]:.2f} (in [3.5, 4.5]), constant-data error {closed:.1e} (< 1e-8)")
    assert record("8", ok, detail, time.perf_counter() - t0, 60)


# -- 9 ---------------------------------------------------------------------------

def test_criterion_9():
    t0 = time.perf_counter()
    g = preset_grid()
    cfg = FinalStateConfig(T=10.0, T_max=640.0)
    parts = []
    ok = True
    for q in (0.0, 1.0):
        prof = AsymptoticProfile.from_spectrum(preset_spectrum(g, q, 0.05), ModelParams(q, 1.0))
        up, rp = solve_final_state_picard(prof, cfg)
        ub, _ = solve_final_state_backward(prof, cfg)
        ratio = float(rp.residual_ratios().max())
        slope = rp.decay_fit.slope
        cross = norm_L2(up[0].with_values(up[0].values - ub[0].values))
        duh = duhamel_consistency(up, prof.params, 10.0, 20.0)
        ok &= rp.status == "ok" and ratio < 0.9 and slope <= -0.35 and cross < 1e-3 and duh < 1e-4
        parts.append(f"q={q:g}: eps {prof.epsilon_check:.3f}, max residual ratio {ratio:.1e} (< 0.9), "
                     f"slope {slope:.3f} (<= -0.35), cross-route {cross:.1e} (< 1e-3), Duhamel {duh:.1e} (< 1e-4)")
    assert record("9", ok, "; ".join(parts), time.perf_counter() - t0, 600)


# -- 10 ----------------------------------------------------------------------------

def test_criterion_10():
    t0 = time.perf_counter()
    g = preset_grid()
    prof0 = AsymptoticProfile.from_spectrum(preset_spectrum(g, 0.0), ModelParams(0.0, 1.0))
    pointwise = 0.0
    for t in (1.0, 10.0, 100.0, 640.0):
        a = build_u_ap(prof0, t).values
        b = free_profile(prof0.phi_plus, 1.0, t).values
        pointwise = max(pointwise, np.abs(a - b).max() / np.abs(a).max())
    iters = []
    cfg = FinalStateConfig(T=10.0, T_max=640.0)
    for q in (0.0, 1.0):
        prof = AsymptoticProfile.from_spectrum(preset_spectrum(g, q), ModelParams(q, 0.0))
        _, rep = solve_final_state_picard(prof, cfg)
        iters.append((rep.iterations, rep.residuals[-1]))
    ok = pointwise < 1e-12 and all(i == 1 and r < 1e-8 for i, r in iters)
    detail = (f"q=0 profile vs free construction {pointwise:.1e} relative (roundoff); lambda=0 iterations "
              + ", ".join(f"q={q:g}: {i} (residual {r:.1e})" for q, (i, r) in zip((0, 1), iters)))
    assert record("10", ok, detail, time.perf_counter() - t0, None)


if __name__ == "__main__":
    import sys

    fns = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryLeakWarning)
        for fn in fns:
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
