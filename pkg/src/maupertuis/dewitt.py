"""Heat-kernel (DeWitt) layer: a1, a2, the van Vleck endpoint expansion and
the diagonal resolvent of the Maupertuis problem.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import geodesic_rhs
from .gamma import GammaPoleError, gamma
from .geometry import CurvaturePack, EndpointCurvature, weyl_xi
from .potentials import Potential, evaluate


def coefficient_a1(R, xi):
    return (Fraction(1, 6) - xi) * R if isinstance(xi, Fraction) else (1 / 6 - xi) * R


def coefficient_a2(pack: CurvaturePack, xi):
    """a2 from the coincidence limit; exact if pack entries and xi are Fractions."""
    F = Fraction if isinstance(xi, Fraction) else float
    sixth = F(1) / 6
    return (
        sixth * (F(1) / 5 - xi) * pack.boxR
        + F(1) / 2 * (sixth - xi) ** 2 * pack.R**2
        - F(1) / 180 * pack.ricciSq
        + F(1) / 180 * pack.riemannSq
    )


@dataclass(frozen=True)
class DeWittCoefficients:
    xi: float
    a0: float
    a1: float
    a2: float
    pack: CurvaturePack


def dewitt_coefficients(pack: CurvaturePack, xi) -> DeWittCoefficients:
    return DeWittCoefficients(xi, 1, coefficient_a1(pack.R, xi), coefficient_a2(pack, xi), pack)


def proper_time_sum(a, dim: int, m2: float = 1.0) -> float:
    """sum_n a_n Gamma(n + 1 - D/2) (m^2)^(D/2 - n - 1): the proper-time integral of the series."""
    total = 0.0
    for n, an in enumerate(a):
        total += an * gamma(n + 1 - dim / 2) * m2 ** (dim / 2 - n - 1)
    return total


# ---------------------------------------------------------------------------
# van Vleck-Morette determinant


def mv_sqrt_expansion(sigma, curv: EndpointCurvature, order: int = 4):
    """Endpoint expansion of Delta^(1/2) through ``order`` (2, 3 or 4) in sigma^mu.

    ``sigma`` holds the contravariant components sigma^mu at the endpoint.
    """
    s = np.asarray(sigma)
    one = s.dtype.type(1) if s.dtype != object else Fraction(1)
    ric_ss = np.einsum("mn,m,n->", curv.ricci, s, s)
    out = one + ric_ss / 12
    if order >= 3:
        out = out - np.einsum("mnr,m,n,r->", curv.ricci_grad, s, s, s) / 24
    if order >= 4:
        A = np.einsum("ambn,m,n->ab", curv.riemann, s, s)
        gi = curv.metric_inv
        riem_term = np.einsum("ac,bd,cd,ab->", gi, gi, A, A)
        hess_term = np.einsum("mnrt,m,n,r,t->", curv.ricci_hess, s, s, s, s)
        out = out + ric_ss * ric_ss / 288 + riem_term / 360 + hess_term / 80
    return out


def _shoot(source, x_start, x_target, v_guess, rtol, atol, max_iter=12):
    """Boundary-value geodesic x_start -> x_target on l in [0, 1] by Newton shooting.

    Returns (initial velocity, final velocity).
    """
    D = len(x_start)
    rhs = geodesic_rhs(source)

    def fly(v):
        sol = solve_ivp(rhs, (0.0, 1.0), np.concatenate([x_start, v]), method="DOP853", rtol=rtol, atol=atol)
        return sol.y[:D, -1], sol.y[D:, -1]

    v = np.array(v_guess, dtype=float)
    scale = max(float(np.linalg.norm(x_target - x_start)), 1e-300)
    for _ in range(max_iter):
        xe, ue = fly(v)
        res = xe - x_target
        if np.linalg.norm(res) <= 1e-15 * max(1.0, float(np.linalg.norm(x_target))):
            return v, ue
        J = np.empty((D, D))
        dv = 1e-7 * max(float(np.linalg.norm(v)), scale)
        for j in range(D):
            e = np.zeros(D)
            e[j] = dv
            J[:, j] = (fly(v + e)[0] - xe) / dv
        step = np.linalg.solve(J, res)
        v = v - step
        if np.linalg.norm(step) <= 1e-15 * np.linalg.norm(v):
            return v, fly(v)[1]
    raise RuntimeError("geodesic shooting did not converge")


def van_vleck_sqrt_numeric(source, x, sigma, h: float = 2e-3, rtol: float = 1e-13, atol: float = 1e-16) -> float:
    """Delta^(1/2)(x, x') computed directly, x' the geodesic partner of sigma^mu.

    x' = exp_x(-sigma).  The mixed Hessian d_mu d'_nu sigma(x, x') is assembled
    from the exact endpoint gradient d'_nu sigma = g_{nu rho}(x') dx^rho/dl
    (from boundary-value solves) differenced in x with two-level Richardson
    extrapolation.  Delta = det(-d d' sigma) / sqrt(g(x) g(x')).
    """
    x = np.asarray(x, dtype=float)
    v0 = -np.asarray(sigma, dtype=float)
    D = len(x)
    rhs = geodesic_rhs(source)
    sol = solve_ivp(rhs, (0.0, 1.0), np.concatenate([x, v0]), method="DOP853", rtol=rtol, atol=atol)
    xp = sol.y[:D, -1]
    wp = source.omega2(xp)

    def grad_prime(xs):
        _, ue = _shoot(source, xs, xp, v0, rtol, atol)
        return wp * ue

    def mixed(hh):
        Mx = np.empty((D, D))
        for m in range(D):
            e = np.zeros(D)
            e[m] = hh
            Mx[m] = (grad_prime(x + e) - grad_prime(x - e)) / (2 * hh)
        return Mx

    Mx = (4 * mixed(h / 2) - mixed(h)) / 3
    det = np.linalg.det(-Mx)
    w = source.omega2(x)
    return float(np.sqrt(det / (w * wp) ** (D / 2)))


# ---------------------------------------------------------------------------
# diagonal resolvent


class GammaTerm(NamedTuple):
    """coef * Gamma(gamma_arg) * (V - E)^power."""

    order: int
    coef: float
    gamma_arg: float
    power: float


class RegionError(ValueError):
    pass


def resolvent_terms(pot: Potential, x, order: int = 2) -> list[GammaTerm]:
    """Per-order structure of the Maupertuis resolvent diagonal (V > E side).

    The curvature of 2M(V-E) delta at conformal coupling (D-2)/(4(D-1)) and
    m^2 = 1 collapses into lap V and |grad V|^2:

        Gamma(1-D/2) (V-E)^(D/2)
        - hbar^2/(12M) Gamma(3-D/2) lap V (V-E)^(D/2-2)
        + hbar^2/(24M) Gamma(4-D/2) |grad V|^2 (V-E)^(D/2-3)
    """
    if not 0 <= order <= 2:
        raise ValueError("order must be 0, 1 or 2")
    ev = evaluate(pot, x)
    D, M, hb = pot.dim, pot.mass, pot.hbar
    terms = [
        GammaTerm(0, 1.0, 1 - D / 2, D / 2),
        GammaTerm(1, -(hb**2) / (12 * M) * float(np.trace(ev.hess)), 3 - D / 2, D / 2 - 2),
        GammaTerm(2, hb**2 / (24 * M) * float(ev.grad @ ev.grad), 4 - D / 2, D / 2 - 3),
    ]
    return terms[: order + 1]


def density_prefactor(pot: Potential) -> float:
    return (pot.mass / (2 * np.pi * pot.hbar**2)) ** (pot.dim / 2)


@dataclass(frozen=True)
class ResolventBreakdown:
    x: np.ndarray
    E: float
    terms: tuple
    total: float
    xi: float


def resolvent_diagonal(pot: Potential, E: float, x, order: int = 2) -> ResolventBreakdown:
    """Diagonal of the curved-space resolvent where V(x) > E."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = evaluate(pot, x).V
    if not V > E:
        raise RegionError(
            f"resolvent series needs V(x) > E (got V - E = {V - E:.6g}); "
            "use density.density_from_resolvent for the allowed region"
        )
    pref = density_prefactor(pot)
    values = []
    for t in resolvent_terms(pot, x, order):
        try:
            g = gamma(t.gamma_arg)
        except GammaPoleError as exc:
            raise GammaPoleError(t.gamma_arg) from exc
        values.append((t.order, pref * t.coef * g * (V - E) ** t.power))
    xi = weyl_xi(pot.dim) if pot.dim >= 2 else float("nan")
    return ResolventBreakdown(x, E, tuple(values), float(sum(v for _, v in values)), xi)
