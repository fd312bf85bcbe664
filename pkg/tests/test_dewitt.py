import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maupertuis import dewitt as dw
from maupertuis import geometry as g
from maupertuis.gamma import GammaPoleError
from maupertuis.potentials import Potential, free, harmonic
from maupertuis.validation import _fraction_extraction_mismatches

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=60)


def test_a1_examples():
    assert dw.coefficient_a1(123.4, 1 / 6) == 0.0
    assert g.weyl_xi(4) == 1 / 6
    assert dw.coefficient_a1(-7.0, g.weyl_xi(4)) == 0.0
    assert dw.coefficient_a1(Fraction(12), Fraction(0)) == 2


def test_a2_examples():
    assert dw.coefficient_a2(g.CurvaturePack(0.0, 0.0, 0.0, 0.0), 0.3) == 0.0
    F = Fraction
    pack = g.CurvaturePack(F(12), F(0), F(48), F(48))
    assert dw.coefficient_a2(pack, F(1, 6)) == 0
    assert dw.coefficient_a2(pack, F(0)) == 2


def test_a2_hydrogen_fd_pack():
    pack = g.curvature_invariants(g.geometry_at(g.HydrogenMomentumFactor(3, 1.0), [0.2, 0.1, -0.3]))
    assert abs(dw.coefficient_a2(pack, 1 / 6)) <= 1e-6
    assert dw.coefficient_a2(pack, 0.0) == pytest.approx(2.0, abs=1e-4)


@given(R=fractions, box=fractions, ric=fractions, riem=fractions, xi=fractions)
def test_a2_polynomial_structure_in_xi(R, box, ric, riem, xi):
    pack = g.CurvaturePack(R, box, ric, riem)
    a = [dw.coefficient_a2(pack, xi + k) for k in range(3)]
    assert a[2] - 2 * a[1] + a[0] == R * R
    assert a[1] - a[0] == -box / 6 - R * R * (Fraction(1, 6) - xi) + R * R / 2
    a1 = [dw.coefficient_a1(R, xi + k) for k in range(2)]
    assert a1[1] - a1[0] == -R


def test_rational_constants_recovered():
    assert _fraction_extraction_mismatches() == 0


def test_proper_time_sum():
    assert dw.proper_time_sum([1.0], 3) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)
    assert dw.proper_time_sum([1.0, 0.5], 3, m2=4.0) == pytest.approx(
        math.gamma(-0.5) * 4**0.5 + 0.5 * math.gamma(0.5) * 4**-0.5, rel=1e-14)


def test_mv_trivial_cases():
    flat = g.EndpointCurvature.flat(3)
    assert dw.mv_sqrt_expansion(np.zeros(3), flat) == 1.0
    assert dw.mv_sqrt_expansion(np.array([0.4, -2.0, 1.0]), flat) == 1.0
    curv = g.maximally_symmetric_curvature(np.eye(3) * 2.0, 12.0)
    assert dw.mv_sqrt_expansion(np.zeros(3), curv) == 1.0


@given(r=st.floats(0.01, 0.2), D=st.integers(2, 5))
def test_mv_matches_sphere_closed_form(r, D):
    # maximally symmetric: Delta^(1/2) = (y / sin y)^((D-1)/2), y = geodesic distance / radius
    R, w = 6.0, 1.5
    curv = g.maximally_symmetric_curvature(np.eye(D) * w, R)
    sigma = np.zeros(D)
    sigma[0] = r / math.sqrt(w)
    y = r / math.sqrt(D * (D - 1) / R)
    exact = (y / math.sin(y)) ** ((D - 1) / 2)
    assert dw.mv_sqrt_expansion(sigma, curv) == pytest.approx(exact, abs=2 * y**6)


def test_mv_numeric_oracle_hydrogen():
    src = g.HydrogenMomentumFactor(3, 1.0)
    x = np.array([0.3, -0.2, 0.1])
    curv = g.endpoint_curvature(g.geometry_at(src, x))
    sig = np.array([0.006, 0.0048, -0.0064])
    num = dw.van_vleck_sqrt_numeric(src, x, sig)
    e4 = dw.mv_sqrt_expansion(sig, curv, 4)
    e2 = dw.mv_sqrt_expansion(sig, curv, 2)
    assert abs(num - e4) < abs(num - e2)
    assert abs(num - e2) < 1e-7


def test_resolvent_flat_single_term():
    b = dw.resolvent_diagonal(free(3, v0=2.0), 1.0, [0.1, 0.2, 0.3])
    assert [v for _, v in b.terms[1:]] == [0.0, 0.0]
    assert b.terms[0][1] == pytest.approx((1 / (2 * math.pi)) ** 1.5 * math.gamma(-0.5), rel=1e-14)


def test_resolvent_example_term():
    # D=3, M=hbar=1, V-E=1, lap V=1, grad V=0 at the origin of a harmonic well with omega^2 = 1/3
    pot = Potential("harmonic", 3, params={"omega": 1 / math.sqrt(3)})
    b = dw.resolvent_diagonal(pot, -1.0, np.zeros(3))
    assert b.terms[1][1] == pytest.approx(-math.sqrt(math.pi) / 24 * (1 / (2 * math.pi)) ** 1.5, rel=1e-14)
    assert b.terms[2][1] == 0.0


def test_resolvent_region_and_poles():
    with pytest.raises(dw.RegionError):
        dw.resolvent_diagonal(harmonic(3), 1.0, np.zeros(3))
    with pytest.raises(GammaPoleError):
        dw.resolvent_diagonal(harmonic(2), -1.0, np.zeros(2))
