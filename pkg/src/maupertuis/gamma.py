"""Gamma function on the whole real line via reflection.

``math.gamma`` is used for positive arguments only; negative arguments go
through Gamma(1-z) Gamma(z) = pi / sin(pi z).  :func:`rgamma` is the
primitive: it is entire, so poles of Gamma become exact zeros.
"""
from __future__ import annotations

import math


class GammaPoleError(ArithmeticError):
    def __init__(self, arg):
        super().__init__(f"Gamma has a pole at argument {arg!r}")
        self.arg = arg


def _is_nonpositive_integer(z: float) -> bool:
    return z <= 0 and z == math.floor(z)


def sin_pi(z: float) -> float:
    """sin(pi z), exact zero at integers and no loss of accuracy for large |z|."""
    n = round(z)
    r = z - n
    s = math.sin(math.pi * r)
    return -s if n % 2 else s


def rgamma(z: float) -> float:
    """1 / Gamma(z)."""
    if _is_nonpositive_integer(z):
        return 0.0
    if z > 0:
        return 1.0 / math.gamma(z)
    # 1/Gamma(z) = Gamma(1-z) sin(pi z) / pi,  1 - z > 1
    return math.gamma(1.0 - z) * sin_pi(z) / math.pi


def gamma(z: float) -> float:
    if _is_nonpositive_integer(z):
        raise GammaPoleError(z)
    if z > 0:
        return math.gamma(z)
    return math.pi / (sin_pi(z) * math.gamma(1.0 - z))


def gamma_sin_over_pi(g: float) -> float:
    """Gamma(g) sin(pi g) / pi, continued through the poles of Gamma.

    For non-integer g the product is formed literally; at integers it takes
    the limiting value (nonzero only for g <= 0).
    """
    if g == math.floor(g):
        if g > 0:
            return 0.0
        # Gamma(g+e) sin(pi(g+e)) -> (-1)^g/( (-g)! e) * (-1)^g pi e
        return 1.0 / math.factorial(int(-g))
    return gamma(g) * sin_pi(g) / math.pi
