"""Command-line runner.

    deltanls <experiment> [--config run.yaml] [--out DIR] [--seed N]
             [--grid-n N] [--grid-L L] [--q Q] [--lambda LAM] [--dump-fields]

Flags override the config file.  Each run writes ``manifest.json``, a JSON
report and, where there is a time series, a CSV file into the output
directory.  Exit codes: 0 success, 2 invalid config, 3 solver divergence,
4 boundary leak.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .asymptotics import AsymptoticProfile, leading_order, remainder_scan
from .core import BoundaryLeakWarning, ComplexField, Grid, ModelParams, norm_L2, norm_L2_split, norm_Lp
from .fieldio import dump_field, load_field  # noqa: F401  (re-exported)
from .fields import bump, gaussian, notched, preset_spectrum, smooth_family
from .propagator import BoundaryLeakError, PropagatorRoute, dispersive_decay_scan, propagate
from .scattering_transform import (
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
from .solvers import (
    FinalStateConfig,
    TimeGrid,
    evolve,
    solve_final_state_backward,
    solve_final_state_picard,
)

EXPERIMENTS = ("verify-identities", "propagate", "decay-scan", "asymptotic-remainders", "final-state", "forward-evolve")

CSV_COLUMNS = {
    "propagate": ["t", "route", "l2_norm", "sup_norm", "l2_drift"],
    "decay-scan": ["t", "sup_norm"],
    "asymptotic-remainders": ["t", "R1_l2", "R2_l2", "t_R2_l2", "leading_remainder_l2"],
    "final-state": ["t", "picard_diff_l2", "backward_diff_l2"],
    "forward-evolve": ["t", "l2_norm", "l2_drift"],
}

DEFAULT_PARAMS = {
    "verify-identities": {"family_size": 20},
    "propagate": {"datum": "gaussian", "center": 6.0, "times": [0.5, 1.0, 5.0], "routes": ["spectral", "reflected_free", "fresnel_kernel"]},
    "decay-scan": {"datum": "gaussian", "center": 0.0, "t_min": 10.0, "t_max": 100.0, "samples": 12},
    "asymptotic-remainders": {"t_min": 10.0, "t_max": 200.0, "samples": 12, "eps": 0.05},
    "final-state": {"T": 10.0, "T_max": 640.0, "alpha": 0.4, "picard_tol": 1e-10, "max_iters": 40, "eps": 0.05, "backward_dt": 1.0},
    "forward-evolve": {"datum": "notched-gaussian", "amplitude": 0.5, "dt": 1e-3, "steps": 1000},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    q: float = 1.0
    lam: float = 1.0
    n: int = 4096
    L: float = 40.0
    out: str = "runs/latest"
    seed: int = 0
    dump_fields: bool = False
    params: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {self.experiment!r}")
        if not (isinstance(self.q, (int, float)) and self.q >= 0):
            raise ConfigError(f"model.q: repulsive case only, q must be >= 0 (got {self.q})")
        if not isinstance(self.lam, (int, float)):
            raise ConfigError(f"model.lambda: must be a real number (got {self.lam!r})")
        if not (isinstance(self.n, int) and self.n >= 4 and self.n & (self.n - 1) == 0):
            raise ConfigError(f"grid.n: must be a power of two >= 4 (got {self.n})")
        if not (isinstance(self.L, (int, float)) and self.L > 0):
            raise ConfigError(f"grid.L: must be positive (got {self.L})")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed: must be a non-negative integer (got {self.seed})")
        merged = dict(DEFAULT_PARAMS[self.experiment])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigError(f"params: unknown keys for {self.experiment}: {sorted(unknown)}")
        merged.update(self.params)
        self.params = merged
        if self.experiment == "final-state":
            try:
                FinalStateConfig(T=merged["T"], T_max=merged["T_max"], alpha=merged["alpha"],
                                 picard_tol=merged["picard_tol"], max_iters=merged["max_iters"])
            except ValueError as e:
                raise ConfigError(f"params: {e}") from None
        if self.experiment == "propagate":
            bad = [r for r in merged["routes"] if r not in {p.value for p in PropagatorRoute}]
            if bad:
                raise ConfigError(f"params.routes: unknown routes {bad}")
        return self


def load_config(path: str | None, overrides: dict) -> RunConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
    model = data.get("model", {}) or {}
    grid = data.get("grid", {}) or {}
    kw = {
        "experiment": data.get("experiment"),
        "q": model.get("q", 1.0),
        "lam": model.get("lambda", 1.0),
        "n": grid.get("n", 4096),
        "L": grid.get("L", 40.0),
        "out": data.get("out", "runs/latest"),
        "seed": data.get("seed", 0),
        "dump_fields": data.get("dump_fields", False),
        "params": data.get("params", {}) or {},
    }
    kw.update({k: v for k, v in overrides.items() if v is not None})
    if kw["experiment"] is None:
        raise ConfigError("experiment: not given (subcommand or config key)")
    return RunConfig(**kw).validate()


# -- experiments ------------------------------------------------------------------

def _datum(cfg: RunConfig, grid: Grid) -> ComplexField:
    p = cfg.params
    kind = p.get("datum", "gaussian")
    c = float(p.get("center", 0.0))
    if kind == "gaussian":
        return gaussian(grid, c)
    if kind == "bump":
        return bump(grid, c, float(p.get("radius", 4.0)))
    if kind == "notched-gaussian":
        return notched(gaussian(grid, c, amp=float(p.get("amplitude", 1.0))))
    if kind == "spectral":
        # (xi^2 + xi^3) e^{-xi^2/2} through the distorted inverse: meets the jump condition
        xi = grid.xi
        return inverse_dft(DistortedSpectrum(grid, (xi**2 + xi**3) * np.exp(-(xi**2) / 2), cfg.q), cfg.q)
    raise ConfigError(f"params.datum: unknown datum {kind!r}")


def _verify(cfg: RunConfig, grid: Grid, out: Path) -> dict:
    q = cfg.q
    xi = np.random.default_rng(cfg.seed).uniform(-50, 50, 100_000)
    sc = ScatteringCoeffs(q)
    t, r = sc.t(xi), sc.r(xi)
    checks = {
        "coeff_unitarity": (float(np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1).max()), 1e-13),
        "coeff_t_eq_1_plus_r": (float(np.abs(t - 1 - r).max()), 1e-13),
        "coeff_re_t_conj_r": (float(np.abs((t * np.conj(r)).real).max()), 1e-13),
    }
    fam = smooth_family(grid, int(cfg.params["family_size"]), cfg.seed)
    worst = dict.fromkeys(["round_trip", "isometry", "rep_F_vs_I", "rep_G_vs_J", "duality", "e1", "e2", "xi0_value"], 0.0)
    for k, f in enumerate(fam):
        nf = norm_L2(f)
        S = forward_dft(f, q)
        b = inverse_dft(S, q)
        SF = forward_dft(f, q, "F")
        worst["round_trip"] = max(worst["round_trip"], norm_L2(b.with_values(b.values - f.values)) / nf)
        worst["isometry"] = max(worst["isometry"], abs(S.l2 - nf) / nf)
        worst["rep_F_vs_I"] = max(worst["rep_F_vs_I"], np.sqrt(np.sum(np.abs(S.values - SF.values) ** 2) * grid.dxi) / nf)
        bG = inverse_dft(S, q, "G")
        worst["rep_G_vs_J"] = max(worst["rep_G_vs_J"], norm_L2(b.with_values(b.values - bG.values)) / nf)
        lhs, rhs = adjoint_check(f, fam[(k + 1) % len(fam)], q)
        worst["duality"] = max(worst["duality"], abs(lhs - rhs) / max(abs(lhs), 1e-300))
        worst["e1"] = max(worst["e1"], float(np.abs(apply_L_plus(b, q).values - inverse_dft_plus(S, q).values).max()))
        worst["e2"] = max(worst["e2"], float(np.abs(apply_L_minus(b, q).values - inverse_dft_minus(S, q).values).max()))
        if q > 0:
            worst["xi0_value"] = max(worst["xi0_value"], abs(S.values[grid.j0]) / nf)
    thr = {"round_trip": 1e-8, "isometry": 1e-8, "rep_F_vs_I": 1e-8, "rep_G_vs_J": 1e-8, "duality": 1e-8,
           "e1": 1e-7, "e2": 1e-7, "xi0_value": 1e-6}
    for k, v in worst.items():
        checks[k] = (float(v), thr[k])
    return {"checks": {k: {"value": v, "threshold": th, "pass": bool(v < th)} for k, (v, th) in checks.items()},
            "all_pass": all(v < th for v, th in checks.values())}


def _propagate(cfg: RunConfig, grid: Grid, out: Path, rows: list) -> dict:
    phi = _datum(cfg, grid)
    fields = {}
    for t in cfg.params["times"]:
        for route in cfg.params["routes"]:
            res = propagate(phi, float(t), cfg.q, PropagatorRoute(route))
            rows.append([t, route, norm_L2(res.field), norm_Lp(res.field, np.inf), res.l2_drift])
            fields[(t, route)] = res.field
            if cfg.dump_fields:
                dump_field(res.field, out / f"field_{route}_t{t:g}.dqf")
    disc = {}
    for t in cfg.params["times"]:
        rs = cfg.params["routes"]
        for i in range(len(rs)):
            for j in range(i + 1, len(rs)):
                a, b = fields[(t, rs[i])], fields[(t, rs[j])]
                disc[f"t={t:g}:{rs[i]}-{rs[j]}"] = norm_L2(a.with_values(a.values - b.values))
    return {"route_discrepancy_l2": disc}


def _decay(cfg: RunConfig, grid: Grid, out: Path, rows: list) -> dict:
    p = cfg.params
    times = np.geomspace(p["t_min"], p["t_max"], int(p["samples"]))
    fit = dispersive_decay_scan(_datum(cfg, grid), cfg.q, times)
    rows.extend([[t, v] for t, v in zip(fit.times, fit.norms)])
    return {"slope": fit.slope, "intercept": fit.intercept, "rms_residual": fit.rms_residual}


def _remainders(cfg: RunConfig, grid: Grid, out: Path, rows: list) -> dict:
    p = cfg.params
    prof = AsymptoticProfile.from_spectrum(preset_spectrum(grid, cfg.q, p["eps"]), ModelParams(cfg.q, cfg.lam))
    times = np.geomspace(p["t_min"], p["t_max"], int(p["samples"]))
    rem = remainder_scan(prof, times)
    lead = [norm_L2(leading_order(prof.hat_phi, t, cfg.q)[1]) for t in times]
    for t, a, b, c in zip(times, rem.R1_norms, rem.R2_norms, lead):
        rows.append([t, a, b, t * b, c])
    return {"R1_slope": rem.R1_fit.slope, "tR2_slope": None if rem.tR2_fit is None else rem.tR2_fit.slope,
            "leading_remainder_slope": float(np.polyfit(np.log(times), np.log(lead), 1)[0]),
            "epsilon": prof.epsilon_check}


def _final_state(cfg: RunConfig, grid: Grid, out: Path, rows: list) -> dict:
    p = cfg.params
    fs = FinalStateConfig(T=p["T"], T_max=p["T_max"], alpha=p["alpha"], picard_tol=p["picard_tol"],
                          max_iters=int(p["max_iters"]), backward_dt=p["backward_dt"])
    prof = AsymptoticProfile.from_spectrum(preset_spectrum(grid, cfg.q, p["eps"]), ModelParams(cfg.q, cfg.lam))
    up, rp = solve_final_state_picard(prof, fs)
    if rp.status == "diverged":
        return {"picard": rp.as_dict(), "status": "diverged"}
    ub, rb = solve_final_state_backward(prof, fs)
    from .asymptotics import build_u_ap

    cross = norm_L2(up[0].with_values(up[0].values - ub[0].values))
    rp.cross_route_error = rb.cross_route_error = cross
    for a, b in zip(up, ub):
        ua = build_u_ap(prof, a.t)
        rows.append([a.t, norm_L2(a.with_values(a.values - ua.values)), norm_L2(b.with_values(b.values - ua.values))])
    if cfg.dump_fields:
        dump_field(up[0], out / "picard_T.dqf")
        dump_field(ub[0], out / "backward_T.dqf")
    return {"picard": rp.as_dict(), "backward": rb.as_dict(), "cross_route_error": cross, "status": rp.status}


def _forward(cfg: RunConfig, grid: Grid, out: Path, rows: list) -> dict:
    p = cfg.params
    u0 = _datum(cfg, grid)
    tg = TimeGrid.uniform(0.0, p["dt"] * p["steps"], int(p["steps"]))
    res = evolve(u0, tg, ModelParams(cfg.q, cfg.lam))
    for r in res:
        rows.append([r.t, norm_L2_split(r.field), r.l2_drift])
    if cfg.dump_fields:
        dump_field(res[-1].field, out / "forward_end.dqf")
    return {"final_drift": res[-1].l2_drift, "max_drift": max(r.l2_drift for r in res)}


RUNNERS = {
    "verify-identities": lambda c, g, o, rows: _verify(c, g, o),
    "propagate": _propagate,
    "decay-scan": _decay,
    "asymptotic-remainders": _remainders,
    "final-state": _final_state,
    "forward-evolve": _forward,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows: list = []
    status = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryLeakWarning)
        try:
            report = RUNNERS[cfg.experiment](cfg, Grid(cfg.n, cfg.L), out, rows)
        except BoundaryLeakError as e:
            report, status = {"error": str(e)}, 4
    if status == 0 and report.get("status") == "diverged":
        status = 3
    report["boundary_warnings"] = [str(w.message) for w in caught if issubclass(w.category, BoundaryLeakWarning)]
    (out / "report.json").write_text(json.dumps(report, indent=2, default=_jsonable))
    if cfg.experiment in CSV_COLUMNS:
        with open(out / f"{cfg.experiment}.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(CSV_COLUMNS[cfg.experiment])
            wr.writerows(rows)
    manifest = {
        "config": asdict(cfg),
        "versions": {"deltanls": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "wall_time_s": time.perf_counter() - t0,
        "exit_code": status,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_jsonable))
    return status


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deltanls", description=__doc__.split("\n")[0])
    ap.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    ap.add_argument("--config")
    ap.add_argument("--out")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--grid-n", dest="n", type=int)
    ap.add_argument("--grid-L", dest="L", type=float)
    ap.add_argument("--q", type=float)
    ap.add_argument("--lambda", dest="lam", type=float)
    ap.add_argument("--dump-fields", action="store_true", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("experiment", "out", "seed", "n", "L", "q", "lam", "dump_fields")}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError, yaml.YAMLError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return 2
    code = run(cfg)
    print(f"{cfg.experiment}: exit {code}, outputs in {cfg.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
