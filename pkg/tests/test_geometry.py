import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maupertuis import geometry as g
from maupertuis.potentials import Potential, free, gaussian_well, harmonic, quartic


def test_conformal_factor_examples():
    geom = g.conformal_factor(free(2, v0=1.0), 0.0, [0.3, 0.4])
    assert geom.omega2 == 2.0
    geom = g.conformal_factor(harmonic(1), -1.0, [1.0])
    assert geom.omega2 == 3.0
    assert geom.d_omega[0] == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    h = 1e-6
    fd = (math.sqrt(2 * ((1 + h) ** 2 / 2 + 1)) - math.sqrt(2 * ((1 - h) ** 2 / 2 + 1))) / (2 * h)
    assert geom.d_omega[0] == pytest.approx(fd, rel=1e-9)


def test_turning_surface_refused():
    with pytest.raises(g.ForbiddenRegionError) as exc:
        g.conformal_factor(harmonic(1), 0.5, [1.0])
    assert exc.value.omega2 == pytest.approx(0.0)
    with pytest.raises(g.ForbiddenRegionError):
        g.ricci_scalar_analytic(harmonic(2), 2.0, [0.1, 0.1])


def test_christoffels_constant_potential_vanish():
    assert not g.christoffels(g.conformal_factor(free(3, v0=2.0), 0.0, [0.1, 0.2, 0.3])).any()


def test_christoffel_1d():
    geom = g.conformal_factor(harmonic(1), -1.0, [0.7])
    assert g.christoffels(geom)[0, 0, 0] == pytest.approx(geom.d_omega[0] / geom.omega, rel=1e-15)


def test_christoffels_match_fd_metric(rng):
    pot = harmonic(3)
    x = rng.uniform(-1, 1, 3)
    geom = g.conformal_factor(pot, -1.0, x)
    src = g.MaupertuisFactor(pot, -1.0)
    fd = g.christoffels_from_metric_fd(lambda y: src.omega2(y) * np.eye(3), x, 1e-4)
    gam = g.christoffels(geom)
    assert np.max(np.abs(gam - fd)) < 1e-6
    assert np.array_equal(gam, gam.transpose(1, 0, 2))


def test_ricci_constant_and_1d():
    assert g.ricci_scalar_analytic(free(3, v0=1.0), 0.0, [0.2, 0.1, 0.0]) == 0.0
    assert g.ricci_scalar_analytic(quartic(1), -1.0, [0.4]) == 0.0
    flat = g.conformal_factor(free(4, v0=1.0), 0.0, np.zeros(4))
    assert abs(g.ricci_scalar_fd(flat)) < 1e-10


def test_ricci_harmonic_3d_point():
    pot = harmonic(3)
    ra = g.ricci_scalar_analytic(pot, -1.0, [1.0, 0.0, 0.0])
    rf = g.ricci_scalar_fd(g.conformal_factor(pot, -1.0, [1.0, 0.0, 0.0]))
    assert abs(ra - rf) <= 1e-4 * (1 + abs(ra))


def test_gradient_term_sign():
    # the |grad V|^2 term enters with -(D-6); flipping it breaks agreement with the FD contraction
    pot, E, x = harmonic(3), -1.0, np.array([1.2, -0.4, 0.3])
    rf = g.ricci_scalar_fd(g.conformal_factor(pot, E, x))
    gap, lap, g2 = E - 0.5 * x @ x, 3.0, x @ x
    flipped = (1 - 3) / 4 * (2 * lap / gap**2 + (3 - 6) * g2 / (2 * gap**3))
    assert abs(flipped - rf) > 1e-2
    assert g.ricci_scalar_analytic(pot, E, x) == pytest.approx(rf, abs=1e-6)


def test_hydrogen_sphere_curvature():
    src = g.HydrogenMomentumFactor(3, 1.0)
    assert src.scalar_curvature() == 12.0
    assert g.ricci_scalar_fd(g.geometry_at(src, [0.2, -0.4, 0.1])) == pytest.approx(12.0, rel=1e-6)


@given(x=arrays(np.float64, 2, elements=st.floats(-1.4, 1.4)))
def test_quartic_2d_conformal_vs_analytic(x):
    pot = quartic(2)
    geom = g.conformal_factor(pot, -1.0, x)
    ra = g.ricci_scalar_analytic(pot, -1.0, x)
    assert g.ricci_scalar_conformal(geom) == pytest.approx(ra, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("pot,E", [(harmonic(2), -1.0), (quartic(3), -0.5), (gaussian_well(4), -2.0)])
def test_two_path_random_points(pot, E, rng):
    for x in rng.uniform(-1.5, 1.5, size=(10, pot.dim)):
        ra = g.ricci_scalar_analytic(pot, E, x)
        rf = g.ricci_scalar_fd(g.conformal_factor(pot, E, x))
        assert abs(ra - rf) <= 1e-4 * (1 + abs(ra))


def test_turning_surface_warning():
    with pytest.warns(g.TurningSurfaceWarning):
        g.ricci_scalar_analytic(harmonic(2), 0.0, [0.01, 0.0], turning_threshold=0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        g.ricci_scalar_analytic(harmonic(2), 0.0, [1.0, 0.0], turning_threshold=0.01)


def test_invariants_flat_and_hydrogen():
    flat = g.curvature_invariants(g.conformal_factor(free(3, v0=1.0), 0.0, np.zeros(3)))
    assert max(abs(v) for v in (flat.R, flat.boxR, flat.ricciSq, flat.riemannSq)) < 1e-8
    pack = g.curvature_invariants(g.geometry_at(g.HydrogenMomentumFactor(3, 1.0), [0.2, 0.1, -0.3]))
    ref = g.maximally_symmetric_pack(12.0, 3)
    assert (ref.R, ref.ricciSq, ref.riemannSq, ref.boxR) == (12.0, 48.0, 48.0, 0.0)
    assert pack.R == pytest.approx(12, rel=1e-6)
    assert pack.ricciSq == pytest.approx(48, rel=1e-5)
    assert pack.riemannSq == pytest.approx(48, rel=1e-5)
    assert abs(pack.boxR) < 1e-4


def test_boxR_matches_nested_fd():
    pot, E, x = harmonic(3), -1.0, np.array([0.4, -0.2, 0.6])
    geom = g.conformal_factor(pot, E, x)
    pack = g.curvature_invariants(geom)
    nested = g.laplace_beltrami_fd(geom, lambda y: g.ricci_scalar_analytic(pot, E, y), 1e-3)
    assert pack.boxR == pytest.approx(nested, abs=1e-3 * (1 + abs(nested)))


def test_riemann_symmetries():
    geom = g.conformal_factor(harmonic(3), -1.0, [0.3, 0.5, -0.1])
    c = g.endpoint_curvature(geom)
    Rm = c.riemann
    assert np.allclose(Rm, -Rm.transpose(1, 0, 2, 3), atol=1e-7)
    assert np.allclose(Rm, -Rm.transpose(0, 1, 3, 2), atol=1e-7)
    assert np.allclose(Rm, Rm.transpose(2, 3, 0, 1), atol=1e-7)
    assert np.trace(c.metric_inv @ c.ricci) == pytest.approx(g.ricci_scalar_analytic(harmonic(3), -1.0, geom.point),
                                                             rel=1e-6)


def test_yamabe_2d_identity_and_flat():
    f = lambda y: np.exp(-y @ y)  # noqa: E731
    geom = g.conformal_factor(harmonic(2), -1.0, [0.4, 0.3])
    assert abs(g.yamabe_covariance_residual(geom, f)) < 1e-5
    poly = lambda y: 1 + y[0] ** 2 - 3 * y[0] * y[1] ** 2  # noqa: E731
    # 3-point stencils are exact on cubics; h = 1e-2 keeps roundoff (~eps/h^2) below the bound
    for D in (2, 3, 4):
        flat = g.conformal_factor(free(D, v0=1.0), 0.0, np.full(D, 0.3))
        assert abs(g.yamabe_covariance_residual(flat, poly, h=1e-2)) < 1e-10


def test_yamabe_convergence_3d(rng):
    pot = harmonic(3)
    f = lambda y: np.exp(-y @ y)  # noqa: E731
    x = rng.uniform(-1, 1, 3)
    geom = g.conformal_factor(pot, -1.0, x)
    res = [abs(g.yamabe_covariance_residual(geom, f, h)) for h in (4e-3, 2e-3, 1e-3)]
    assert res[-1] <= 1e-4
    slope = np.polyfit(np.log([4e-3, 2e-3, 1e-3]), np.log(res), 1)[0]
    assert abs(slope - 2) < 0.15


def test_yamabe_1d_uses_finite_limit():
    # xi_c R has a finite D -> 1 limit; with it the 1D weight-1/2 map is exact up to O(h^2)
    geom = g.conformal_factor(harmonic(1), -1.0, [0.7])
    f = lambda y: np.cos(2 * y[0])  # noqa: E731
    res = [abs(g.yamabe_covariance_residual(geom, f, h)) for h in (2e-3, 1e-3)]
    assert res[1] < 1e-5 and res[0] / res[1] == pytest.approx(4, rel=0.05)
    assert g.ricci_scalar_analytic(harmonic(1), -1.0, [0.7]) == 0.0


def test_conformal_coupling_matches_xi_R():
    for D in (2, 3, 5):
        geom = g.conformal_factor(harmonic(D), -1.0, np.linspace(0.1, 0.5, D))
        assert g.conformal_coupling(geom) == pytest.approx(g.weyl_xi(D) * g.ricci_scalar_conformal(geom), rel=1e-13)
    with pytest.raises(ValueError):
        g.weyl_xi(1)


def test_transfer_1d_ground_state():
    xs = np.linspace(-6, 6, 1201)
    t = g.schrodinger_solution_transfer(harmonic(1), 0.5, [xs], np.exp(-xs**2 / 2))
    assert t.mask.any() and t.unresolved > 0
    assert np.all(np.abs(xs[t.mask]) > 1.0)
    assert np.nanmax(np.abs(t.curved_residual)) <= 1e-4
    assert np.all(np.isnan(t.curved_residual[~t.mask]))


def test_transfer_2d_weight_zero():
    axes = [np.linspace(-1, 1, 11)] * 2
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    psi = np.exp(-np.sum(mesh**2, -1))
    t = g.schrodinger_solution_transfer(harmonic(2), -1.0, axes, psi)
    assert np.array_equal(t.phi, psi)


def test_transfer_3d_free_exponential():
    E, c = 0.5, 0.505
    k = np.array([0.6, -0.8, 0.5])
    k *= math.sqrt(2 * (c - E)) / np.linalg.norm(k)
    axes = [np.linspace(-0.05, 0.05, 11)] * 3
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    t = g.schrodinger_solution_transfer(free(3, v0=c), E, axes, np.exp(mesh @ k))
    assert np.nanmax(np.abs(t.curved_residual)) <= 1e-6
    assert t.mask[1:-1, 1:-1, 1:-1].all()
