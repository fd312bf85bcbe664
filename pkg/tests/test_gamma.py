import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maupertuis.gamma import GammaPoleError, gamma, gamma_sin_over_pi, rgamma, sin_pi


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_reciprocal_gamma_zero_at_poles(n):
    assert rgamma(n) == 0.0
    with pytest.raises(GammaPoleError):
        gamma(n)


def test_known_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)
    assert rgamma(-1.5) == pytest.approx(3 / (4 * math.sqrt(math.pi)), rel=1e-14)


@given(z=st.floats(-8.9, 8.9).filter(lambda z: abs(z - round(z)) > 1e-3))
def test_reflection(z):
    assert gamma(z) * gamma(1 - z) * sin_pi(z) == pytest.approx(math.pi, rel=1e-11)


def test_sin_pi_exact_at_integers():
    assert sin_pi(3.0) == 0.0 and sin_pi(-2.0) == 0.0 and sin_pi(0.5) == 1.0


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_gamma_sin_limit_at_poles(n):
    # Gamma(g) sin(pi g)/pi -> 1/Gamma(1-g) = 1/n! at g = -n
    g = -n
    eps = 1e-7
    approx = gamma(g + eps) * sin_pi(g + eps) / math.pi
    assert gamma_sin_over_pi(g) == pytest.approx(approx, rel=1e-6)
    assert gamma_sin_over_pi(g) == pytest.approx(1 / math.factorial(n), rel=1e-15)


def test_gamma_sin_zero_at_positive_integers():
    assert gamma_sin_over_pi(3) == 0.0
