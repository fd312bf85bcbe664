import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maupertuis import density as dens
from maupertuis.dewitt import RegionError
from maupertuis.potentials import Potential, coulomb, evaluate, free, gaussian_well, harmonic, quartic


def test_free_gas_3d():
    rho = dens.semiclassical_density(free(3), 1.0, [0.0, 0.0, 0.0])
    assert rho.total == pytest.approx(2**1.5 / (4 * math.pi**2), rel=1e-12)
    assert rho.total == pytest.approx((1 / (2 * math.pi)) ** 1.5 / math.gamma(1.5), rel=1e-14)
    assert rho.total == pytest.approx(0.07166, abs=5e-5)
    assert rho.term(1) == 0.0 and rho.term(2) == 0.0


@pytest.mark.parametrize("dim", [1, 2, 3, 4, 5])
def test_free_gas_closed_form_any_dim(dim):
    E, M, hb = 0.8, 1.7, 0.6
    rho = dens.semiclassical_density(free(dim, mass=M, hbar=hb), E, np.zeros(dim)).total
    assert rho == pytest.approx(dens.free_gas_density(dim, E, M, hb), rel=1e-12)


@pytest.mark.parametrize("dim", [2, 4])
def test_pole_terms_vanish_exactly(dim):
    pot = harmonic(dim)
    x = np.full(dim, 0.3)
    for rho in (dens.semiclassical_density(pot, 3.0, x), dens.density_from_resolvent(pot, 3.0, x)):
        assert rho.term(1) == 0.0 and rho.term(2) == 0.0
        assert rho.term(0) > 0


families = st.sampled_from(["harmonic", "quartic", "gaussian-well", "coulomb-regularized"])


@given(family=families, dim=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_pipeline_identity(family, dim, seed):
    rng = np.random.default_rng(seed)
    pot = Potential(family, dim, params={"eps": 0.3} if family == "coulomb-regularized" else {})
    x = rng.uniform(-1, 1, dim)
    E = evaluate(pot, x).V + rng.uniform(0.1, 4.0)
    a = dens.semiclassical_density(pot, E, x)
    b = dens.density_from_resolvent(pot, E, x)
    for (ka, va), (kb, vb) in zip(a.terms, b.terms):
        assert ka == kb
        assert va == pytest.approx(vb, rel=1e-12, abs=0.0) if va else vb == 0.0


def test_resolvent_route_free_gas():
    rho = dens.density_from_resolvent(free(3), 1.0, np.zeros(3), order=0)
    assert rho.total == pytest.approx(dens.free_gas_density(3, 1.0), rel=1e-12)


def test_forbidden_region_raises():
    with pytest.raises(RegionError):
        dens.semiclassical_density(harmonic(1), 0.5, [2.0])
    with pytest.raises(RegionError):
        dens.density_from_resolvent(harmonic(1), 0.5, [2.0])


def test_regime_labels():
    pot = harmonic(1)
    assert dens.semiclassical_density(pot, 10.0, [0.0]).regime == "allowed"
    assert dens.semiclassical_density(pot, 10.0, [4.46]).regime == "near-turning"
    rows = dens.density_sweep(pot, 10.0, [[0.0], [5.0]])
    assert rows[1].regime == "forbidden" and math.isnan(rows[1].total)


def test_correction_terms_1d_harmonic():
    # D = 1: term1 ~ lap V (E-V)^(-5/2)/Gamma(-3/2), term2 ~ |grad V|^2 (E-V)^(-7/2)/Gamma(-5/2)
    rho = dens.semiclassical_density(harmonic(1), 5.0, [1.0])
    gap = 4.5
    pref = 1 / math.sqrt(2 * math.pi)
    assert rho.term(1) == pytest.approx(pref * (-1 / 12) * gap**-2.5 / math.gamma(-1.5), rel=1e-13)
    assert rho.term(2) == pytest.approx(pref * (1 / 24) * gap**-3.5 / math.gamma(-2.5), rel=1e-13)


@pytest.mark.parametrize("E", [5.5, 10.5, 20.5])
def test_integrated_dos_harmonic(E):
    r0 = dens.integrated_dos(harmonic(1), E, order=0)
    assert r0.total == pytest.approx(1.0, abs=1e-6)
    r2 = dens.integrated_dos(harmonic(1), E, order=2)
    # the finite-part corrections are E-derivatives of a constant here
    assert abs(r2.terms[1][1]) < 1e-6 and abs(r2.terms[2][1]) < 1e-6
    assert r2.truncation_estimate == abs(r2.terms[2][1])


def test_integrated_dos_free_box():
    E, L = 2.0, 1.5
    r = dens.integrated_dos(free(3), E, order=0, box=[(0, L)] * 3)
    assert r.total == pytest.approx(L**3 * dens.free_gas_density(3, E), rel=1e-12)
    with pytest.raises(ValueError):
        dens.integrated_dos(free(3), E)


def test_integrated_dos_quartic_matches_period():
    # order 0 integral is T(E) / (2 pi hbar); for V = x^4 at mass 1 compare with direct quadrature
    from scipy.integrate import quad

    E = 3.0
    a = E**0.25
    T = 2 * quad(lambda x: 1 / math.sqrt(2 * (E - x**4)), -a, a, limit=200)[0]
    assert dens.integrated_dos(quartic(1), E).total == pytest.approx(T / (2 * math.pi), rel=1e-7)


def test_smeared_large_energy_limit():
    pot = free(3)
    s = dens.smeared_density(pot, 50.0, np.zeros(3), eta=0.5, order=0)
    assert s.total == pytest.approx(dens.free_gas_density(3, 50.0), rel=1e-4)
    assert s.regime == "smeared"


@pytest.mark.parametrize("eta", [0.1, 0.3, 1.0])
def test_smeared_2d_step(eta):
    # D = 2: order-0 density is M/(2 pi hbar^2) Theta(E - V); Gaussian smearing gives a normal CDF
    pot = gaussian_well(2)
    x = [0.2, 0.1]
    gap = 0.4 - evaluate(pot, x).V
    smooth = dens.smeared_density(pot, 0.4, x, eta=eta, order=0)
    exact = 0.5 * (1 + math.erf(gap / (math.sqrt(2) * eta))) / (2 * math.pi)
    assert smooth.term(0) == pytest.approx(exact, rel=1e-10)


def test_hydrogen_case():
    rep = dens.hydrogen_momentum_case(3, 1.0)
    assert rep.R == 12.0
    assert rep.xi_paper == Fraction(1, 12) and rep.xi_weyl == Fraction(1, 8)
    assert rep.weyl_subtraction == Fraction(1, 16)
    assert "R/16" in rep.statement and "= 12;" in rep.statement
    assert rep.max_rel_error < 1e-5
    assert max(abs(v - 12) for v in rep.R_fd) < 12e-5
    assert dens.hydrogen_momentum_case(2, 1.0).xi_weyl == 0


def test_density_csv(tmp_path):
    rows = dens.density_sweep(free(3), 1.0, [[0, 0, 0], [1, 2, 3]])
    path = tmp_path / "d.csv"
    dens.write_density_csv(rows, path)
    table = list(csv.reader(path.open(newline="")))
    assert table[0] == ["x0", "x1", "x2", "E", "term0", "term1", "term2", "total", "regime"]
    assert table[1][5:7] == ["0", "0"]
    assert path.read_bytes().count(b"\r\n") == 3


def test_coulomb_density_finite_near_origin():
    rho = dens.semiclassical_density(coulomb(3, eps=0.1), -1.0, [0.05, 0.0, 0.0])
    assert np.isfinite(rho.total)
