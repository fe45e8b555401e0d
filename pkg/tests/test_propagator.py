import warnings

import numpy as np
import pytest

from deltanls.core import BoundaryLeakWarning, ComplexField, Grid, norm_L2, reflect
from deltanls.fields import bump, gaussian, notched
from deltanls.propagator import (
    BoundaryLeakError,
    PropagatorRoute,
    dispersive_decay_scan,
    fresnel_integral,
    propagate,
    propagate_fresnel,
    propagate_reflected_free,
    propagate_spectral,
    strichartz_norm_probe,
)


@pytest.fixture(scope="module")
def box():
    return Grid(32768, 320.0)


def diff(a, b):
    return norm_L2(a.field.with_values(a.field.values - b.field.values))


@pytest.mark.parametrize("q", [0.0, 1.0, 4.0])
def test_routes_agree_off_origin(box, q):
    phi = gaussian(box, 6.0, k=0.5)
    a, b, c = (propagate(phi, 1.0, q, r) for r in PropagatorRoute)
    assert diff(a, b) < 1e-8 and diff(a, c) < 1e-5 and diff(b, c) < 1e-5
    assert a.l2_drift < 1e-10 and b.l2_drift < 1e-10


def test_identity_at_t0(grid):
    phi = notched(gaussian(grid, 2.0, k=1.0))
    res = propagate_spectral(phi, 0.0, 1.0)
    assert np.abs(res.field.values - phi.values).max() < 1e-8
    assert res.route is PropagatorRoute.SPECTRAL and res.t == 0.0


def test_identity_at_t0_kinked_datum():
    # phi(0) != 0 violates the jump condition: the lattice transform is then second order
    errs = []
    for n in (4096, 16384):
        g = Grid(n, 40.0)
        phi = gaussian(g, 2.0, k=1.0)
        e = propagate_spectral(phi, 0.0, 1.0).field.values - phi.values
        assert int(np.argmax(np.abs(e))) == g.j0
        errs.append(norm_L2(phi.with_values(e)))
    assert errs[0] < 1e-5
    assert 12 < errs[0] / errs[1] < 20


def test_reflected_free_is_free_at_q0(grid):
    phi = gaussian(grid, 1.0, k=2.0)
    res = propagate_reflected_free(phi, 0.7, 0.0).field.values
    from deltanls.core import ft, ift

    free = ift(np.exp(-0.35j * grid.xi**2) * ft(phi.values, grid.dx), grid.dx)
    assert np.abs(res - free).max() < 1e-15


@pytest.mark.parametrize("q", [0.0, 1.0])
def test_parity(box, q):
    phi = gaussian(box, 5.0, k=-0.3)
    mirrored = phi.with_values(reflect(phi.values))
    u = propagate_spectral(phi, 2.0, q).field.values
    v = propagate_spectral(mirrored, 2.0, q).field.values
    assert np.abs(reflect(u) - v).max() < 1e-13


def test_group_property(box):
    phi = gaussian(box, -5.0, k=1.0)
    one = propagate_spectral(phi, 1.5, 1.0)
    two = propagate_spectral(propagate_spectral(phi, 0.5, 1.0).field, 1.0, 1.0)
    assert diff(one, two) < 1e-10
    back = propagate_spectral(one.field, -1.5, 1.0).field
    assert norm_L2(back.with_values(back.values - phi.values)) < 1e-9


def test_fresnel_needs_positive_time(grid):
    with pytest.raises(ValueError):
        propagate_fresnel(gaussian(grid), 0.0, 1.0)
    with pytest.raises(ValueError):
        propagate(gaussian(grid), 1.0, -1.0)


def test_fresnel_cutoff_reported():
    g = Grid(1024, 40.0)
    res = propagate_fresnel(gaussian(g, 3.0), 0.2, 0.0)
    # |x/t| >= pi/dx is the aliased zone
    assert res.info["cutoff_fraction"] > 0
    assert np.all(res.field.values[np.abs(g.x / 0.2) >= np.pi / g.dx] == 0)


def test_fresnel_integral_of_zero(grid):
    assert np.all(fresnel_integral(np.zeros(grid.n), 1.0, grid) == 0)


def test_decay_scan_free_gaussian():
    g = Grid(16384, 1024.0)
    fit = dispersive_decay_scan(gaussian(g), 0.0, np.geomspace(10, 100, 8))
    assert fit.slope == pytest.approx(-0.5, abs=0.02)
    # exact sup norm (1 + t^2)^{-1/4}
    assert np.allclose(fit.norms, (1 + fit.times**2) ** -0.25, rtol=1e-10)


def test_decay_scan_validation(grid):
    with pytest.raises(ValueError):
        dispersive_decay_scan(gaussian(grid), 0.0, [1, 2])
    with pytest.raises(ValueError):
        dispersive_decay_scan(gaussian(grid), 0.0, [1, 2, 5])
    with pytest.raises(BoundaryLeakError):
        dispersive_decay_scan(gaussian(grid), 0.0, [10, 30, 100])


def test_leak_warning_from_route(grid):
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryLeakWarning)
        with pytest.raises(BoundaryLeakWarning):
            propagate_spectral(gaussian(grid), 50.0, 0.0)


def test_strichartz_probe():
    g = Grid(8192, 640.0)
    phi = gaussian(g)
    early = strichartz_norm_probe(phi, 0.0, (4, np.inf), (1, 100), n_times=48)
    late = strichartz_norm_probe(phi, 0.0, (4, np.inf), (10, 100), n_times=48)
    assert np.isfinite(early) and late < early
    # ||u||_inf = (1+t^2)^{-1/4}, so the L^4 norm is (int (1+t^2)^{-1} dt)^{1/4}
    exact = (np.arctan(100) - np.arctan(1)) ** 0.25
    assert early == pytest.approx(exact, rel=1e-2)
    zero = phi.with_values(np.zeros(g.n))
    assert strichartz_norm_probe(zero, 1.0, (4, np.inf), (1, 2)) == 0
    with pytest.raises(ValueError):
        strichartz_norm_probe(phi, 0.0, (3, 6), (1, 2))
    with pytest.raises(ValueError):
        strichartz_norm_probe(phi, 0.0, (4, np.inf), (2, 1))


def test_bump_on_wide_box(box):
    phi = bump(box, -7.0, 3.0)
    a = propagate_spectral(phi, 5.0, 1.0)
    c = propagate_fresnel(phi, 5.0, 1.0)
    assert diff(a, c) < 1e-5
