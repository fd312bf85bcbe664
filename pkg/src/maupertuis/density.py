"""Semiclassical local density of states rho(x; E) in the classically allowed region.

Two independent routes produce the same three-term series:

* :func:`semiclassical_density` evaluates the closed form with reciprocal
  Gamma functions directly;
* :func:`density_from_resolvent` starts from the diagonal resolvent on the
  V > E side (:func:`maupertuis.dewitt.resolvent_terms`), divides by V - E,
  continues V - E = exp(-/+ i pi)(E - V) and takes the discontinuity across
  the cut, then removes the sin factor with the reflection formula.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from scipy.optimize import brentq

from ._io import write_csv
from .dewitt import RegionError, density_prefactor, resolvent_terms
from .gamma import gamma, gamma_sin_over_pi, rgamma
from .geometry import HydrogenMomentumFactor, geometry_at, ricci_scalar_fd, weyl_xi
from .potentials import Potential, evaluate

NEAR_TURNING_FRACTION = 0.05


@dataclass(frozen=True)
class DensityBreakdown:
    x: np.ndarray
    E: float
    terms: tuple  # ((order, value), ...)
    total: float
    regime: str  # "allowed" | "near-turning" | "forbidden"
    truncation_estimate: float

    def term(self, k: int) -> float:
        for order, value in self.terms:
            if order == k:
                return value
        return 0.0


def near_turning_threshold(pot: Potential, E: float, fraction: float = NEAR_TURNING_FRACTION) -> float:
    vmin = pot.minimum()
    scale = E - vmin if np.isfinite(vmin) else abs(E)
    return fraction * scale


def _regime(gap, threshold):
    if gap <= 0:
        return "forbidden"
    return "near-turning" if gap < threshold else "allowed"


def _correction_coefficients(pot, ev):
    M, hb = pot.mass, pot.hbar
    return (1.0, -(hb**2) / (12 * M) * float(np.trace(ev.hess)), hb**2 / (24 * M) * float(ev.grad @ ev.grad))


# number of E-derivatives relating term k to the leading power (E-V)^(D/2-1)/Gamma(D/2)
_E_DERIVATIVES = (0, 2, 3)


def _check_order(order):
    if not 0 <= order <= 2:
        raise ValueError("order must be 0, 1 or 2")


def _breakdown(x, E, values, threshold, gap):
    total = float(sum(v for _, v in values))
    return DensityBreakdown(x, E, tuple(values), total, _regime(gap, threshold), abs(values[-1][1]))


def semiclassical_density(
    pot: Potential,
    E: float,
    x,
    order: int = 2,
    threshold: Optional[float] = None,
) -> DensityBreakdown:
    """rho(x;E) = (M/2 pi hbar^2)^(D/2) [ (E-V)^(D/2-1) / Gamma(D/2)
                  - hbar^2/(12M) lap V (E-V)^(D/2-3) / Gamma(D/2-2)
                  + hbar^2/(24M) |grad V|^2 (E-V)^(D/2-4) / Gamma(D/2-3) ]
    """
    _check_order(order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ev = evaluate(pot, x)
    gap = E - ev.V
    if not gap > 0:
        raise RegionError(
            f"E - V = {gap:.6g} <= 0 at x={x.tolist()}: forbidden region, use dewitt.resolvent_diagonal"
        )
    if threshold is None:
        threshold = near_turning_threshold(pot, E)
    D = pot.dim
    pref = density_prefactor(pot)
    coefs = _correction_coefficients(pot, ev)
    values = []
    for k in range(order + 1):
        j = _E_DERIVATIVES[k]
        values.append((k, pref * coefs[k] * rgamma(D / 2 - j) * gap ** (D / 2 - 1 - j)))
    return _breakdown(x, E, values, threshold, gap)


def _discontinuity_weight(alpha: float) -> float:
    """[f(e^{-i pi}) - f(e^{+i pi})] / (2 pi i) for f(z) = z^alpha, i.e. -sin(pi alpha)/pi."""
    below = cmath.exp(-1j * math.pi * alpha)
    above = cmath.exp(1j * math.pi * alpha)
    return ((below - above) / (2j * math.pi)).real


def density_from_resolvent(
    pot: Potential,
    E: float,
    x,
    order: int = 2,
    threshold: Optional[float] = None,
) -> DensityBreakdown:
    """Allowed-region density obtained by continuing the resolvent diagonal.

    Each resolvent term c Gamma(g) (V-E)^p is divided by (V-E) and continued
    across the cut; the discontinuity of (V-E)^(p-1) contributes
    -sin(pi (p-1))/pi (E-V)^(p-1).  Where Gamma(g) has a pole (even D) the
    product Gamma(g) sin(pi g)/pi is replaced by its finite limit.
    """
    _check_order(order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ev = evaluate(pot, x)
    gap = E - ev.V
    if not gap > 0:
        raise RegionError(
            f"E - V = {gap:.6g} <= 0 at x={x.tolist()}: forbidden region, use dewitt.resolvent_diagonal"
        )
    if threshold is None:
        threshold = near_turning_threshold(pot, E)
    pref = density_prefactor(pot)
    values = []
    for t in resolvent_terms(pot, x, order):
        alpha = t.power - 1
        g = t.gamma_arg
        if g == math.floor(g):
            # Gamma pole (g <= 0) against a zero of sin, or sin zero alone
            weight = gamma_sin_over_pi(g)
            # gamma_sin_over_pi carries sin(pi g); the cut carries -sin(pi alpha)
            weight *= _sign_ratio(alpha, g)
        else:
            weight = gamma(g) * _discontinuity_weight(alpha)
        values.append((t.order, pref * t.coef * weight * gap**alpha))
    return _breakdown(x, E, values, threshold, gap)


def _sign_ratio(alpha: float, g: float) -> float:
    # -sin(pi alpha) / sin(pi g) with alpha = n - g, n integer: (-1)^n
    n = alpha + g
    if n != math.floor(n):
        raise ValueError("cut exponent and Gamma argument must differ by an integer")
    return 1.0 if int(n) % 2 == 0 else -1.0


# ---------------------------------------------------------------------------
# energy smearing and integrated density of states


def _gaussian_derivative(z, eta, j):
    c = np.zeros(j + 1)
    c[j] = 1.0
    return (-1.0 / eta) ** j * hermeval(z / eta, c) * np.exp(-0.5 * (z / eta) ** 2) / (np.sqrt(2 * np.pi) * eta)


def smeared_density(
    pot: Potential,
    E: float,
    x,
    eta: float,
    order: int = 2,
    n_nodes: int = 200,
    cutoff: float = 12.0,
) -> DensityBreakdown:
    """Semiclassical rho(x; E') convolved with a unit Gaussian of width eta in E'.

    Term k equals d^j/dE^j of the leading power (j = 0, 2, 3), so its smeared
    value is the leading power integrated against the j-th derivative of the
    Gaussian.  With E' = V + u^2 the integrand is smooth.
    """
    _check_order(order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ev = evaluate(pot, x)
    D = pot.dim
    gap = E - ev.V
    pref = density_prefactor(pot)
    coefs = _correction_coefficients(pot, ev)
    u_max2 = gap + cutoff * eta
    values = []
    if u_max2 <= 0:
        values = [(k, 0.0) for k in range(order + 1)]
    else:
        nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
        u_max = np.sqrt(u_max2)
        u = 0.5 * u_max * (nodes + 1)
        wq = 0.5 * u_max * weights
        for k in range(order + 1):
            j = _E_DERIVATIVES[k]
            kern = _gaussian_derivative(gap - u * u, eta, j)
            integral = 2.0 * rgamma(D / 2) * float(np.sum(wq * kern * u ** (D - 1)))
            values.append((k, pref * coefs[k] * integral))
    total = float(sum(v for _, v in values))
    return DensityBreakdown(x, E, tuple(values), total, "smeared", abs(values[-1][1]))


def _fd_weights(j: int, half_width: int) -> np.ndarray:
    k = np.arange(-half_width, half_width + 1, dtype=float)
    A = np.vander(k, increasing=True).T
    b = np.zeros(len(k))
    b[j] = math.factorial(j)
    return np.linalg.solve(A, b)


@dataclass(frozen=True)
class IntegratedDOS:
    E: float
    terms: tuple
    total: float
    truncation_estimate: float


def _allowed_intervals_1d(pot, E, box, n_scan=4001):
    lo, hi = box
    xs = np.linspace(lo, hi, n_scan)
    gap = np.array([E - evaluate(pot, [v]).V for v in xs])
    inside = gap > 0
    intervals = []
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            if i == 0:
                start = lo
            else:
                start = brentq(lambda v: E - evaluate(pot, [v]).V, xs[i - 1], xs[i], xtol=1e-14, rtol=1e-15)
        if not flag and start is not None:
            end = brentq(lambda v: E - evaluate(pot, [v]).V, xs[i - 1], xs[i], xtol=1e-14, rtol=1e-15)
            intervals.append((start, end))
            start = None
    if start is not None:
        intervals.append((start, hi))
    return intervals


def _find_box_1d(pot, E):
    r = 1.0
    while E - evaluate(pot, [-r]).V > 0 or E - evaluate(pot, [r]).V > 0:
        r *= 2
        if r > 1e6:
            raise ValueError("allowed region is unbounded; pass an explicit integration box")
    return (-r, r)


def _leading_power_integral(pot, E, k, box, n_nodes):
    """int c_k(x) (E-V)_+^(D/2-1) / Gamma(D/2) dx over the box."""
    D = pot.dim
    p = D / 2 - 1
    rg = rgamma(D / 2)
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)

    def integrand(x):
        ev = evaluate(pot, x)
        gap = E - ev.V
        if gap <= 0:
            return 0.0
        return _correction_coefficients(pot, ev)[k] * gap**p * rg

    if D == 1:
        total = 0.0
        for a, b in _allowed_intervals_1d(pot, E, box):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            theta = 0.5 * np.pi * nodes
            for th, wt in zip(theta, weights):
                total += 0.5 * np.pi * wt * half * np.cos(th) * integrand([mid + half * np.sin(th)])
        return total

    lows = np.array([b[0] for b in box], dtype=float)
    highs = np.array([b[1] for b in box], dtype=float)
    half = 0.5 * (highs - lows)
    mid = 0.5 * (highs + lows)
    total = 0.0
    for idx in np.ndindex(*(n_nodes,) * D):
        pt = mid + half * nodes[list(idx)]
        total += float(np.prod(weights[list(idx)])) * integrand(pt)
    return total * float(np.prod(half))


def integrated_dos(
    pot: Potential,
    E: float,
    order: int = 0,
    box=None,
    n_nodes: int = 64,
    dE: Optional[float] = None,
) -> IntegratedDOS:
    """Spatial integral of the semiclassical density over the allowed region.

    D = 1: allowed intervals are located by bracketing turning points and
    integrated with x = mid + half sin(theta), which removes the inverse
    square-root endpoint singularity.  D > 1 needs an explicit box
    [(lo, hi), ...] and uses tensor Gauss-Legendre on (E-V)_+^(D/2-1).

    Correction terms are non-integrable at turning points; they are defined
    by analytic continuation in the exponent (Hadamard finite part), which is
    computed as d^j/dE^j of the leading-power integral with a 9-point stencil.
    """
    _check_order(order)
    D = pot.dim
    if D == 1:
        box = _find_box_1d(pot, E) if box is None else tuple(box)
    elif box is None:
        raise ValueError("D > 1 integrated DOS needs an explicit integration box")
    pref = density_prefactor(pot)
    if dE is None:
        dE = 0.02 * max(E - pot.minimum(), 1e-12) if np.isfinite(pot.minimum()) else 0.02 * max(abs(E), 1.0)
    values = []
    for k in range(order + 1):
        j = _E_DERIVATIVES[k]
        if j == 0:
            val = _leading_power_integral(pot, E, k, box, n_nodes)
        else:
            w = _fd_weights(j, 4)
            samples = [_leading_power_integral(pot, E + s * dE, k, box, n_nodes) for s in range(-4, 5)]
            val = float(np.dot(w, samples)) / dE**j
        values.append((k, pref * val))
    total = float(sum(v for _, v in values))
    return IntegratedDOS(E, tuple(values), total, abs(values[-1][1]))


def free_gas_density(dim: int, E: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """Free-particle density of states per unit volume (closed form, D = 3 formula for D == 3)."""
    if dim == 3:
        return (2 * mass) ** 1.5 * np.sqrt(E) / (4 * np.pi**2 * hbar**3)
    # general D: surface of unit sphere times k^(D-1) dk/dE / (2 pi)^D
    k = np.sqrt(2 * mass * E) / hbar
    area = 2 * np.pi ** (dim / 2) / math.gamma(dim / 2)
    return area * k ** (dim - 1) * (mass / (hbar**2 * k)) / (2 * np.pi) ** dim


# ---------------------------------------------------------------------------
# hydrogen in momentum space


@dataclass(frozen=True)
class HydrogenReport:
    dim: int
    p_e: float
    R: float
    R_fd: tuple
    max_rel_error: float
    xi_paper: Fraction  # coefficient of R next to (1/2) Lap_p
    xi_weyl: Fraction  # conformal coupling next to Lap
    weyl_subtraction: Fraction  # xi_weyl / 2: what (1/2)(Lap - xi_weyl R) would subtract
    statement: str
    metric: HydrogenMomentumFactor

    def metric_factor(self, p) -> float:
        return self.metric.omega2(p)


def hydrogen_momentum_case(dim: int = 3, p_e: float = 1.0, n_points: int = 20, seed: int = 0, h: float = 1e-4) -> HydrogenReport:
    """Momentum-space hydrogen metric 2 delta / (p^2 + p_E^2)^2 and its R-coupling."""
    metric = HydrogenMomentumFactor(dim, p_e)
    R = metric.scalar_curvature()
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n_points, dim)) * max(p_e, 1.0)
    fd = tuple(ricci_scalar_fd(geometry_at(metric, p), h * min(p_e, 1.0)) for p in pts)
    err = max(abs(v - R) / abs(R) for v in fd)
    xi_paper = Fraction(1, 2 * dim * (dim - 1))
    xi_weyl = Fraction(dim - 2, 4 * (dim - 1))
    sub = xi_weyl / 2
    statement = (
        f"D={dim}, p_E={p_e:g}: R = 2D(D-1)p_E^2 = {R:.17g}; momentum-space equation subtracts "
        f"R/{1 / xi_paper} = R/(2D(D-1)), the Weyl-invariant form would subtract "
        f"(D-2)R/(8(D-1)) = {_frac_R(sub)}"
    )
    return HydrogenReport(dim, p_e, R, fd, err, xi_paper, xi_weyl, sub, statement, metric)


def _frac_R(f: Fraction) -> str:
    if f == 0:
        return "0"
    if f.numerator == 1:
        return f"R/{f.denominator}"
    return f"{f.numerator}R/{f.denominator}"


# ---------------------------------------------------------------------------
# sweeps


def density_sweep(pot: Potential, E: float, points: Sequence, order: int = 2, threshold=None) -> list:
    rows = []
    for x in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        try:
            rows.append(semiclassical_density(pot, E, x, order, threshold))
        except RegionError:
            rows.append(DensityBreakdown(x, E, tuple((k, float("nan")) for k in range(order + 1)),
                                         float("nan"), "forbidden", float("nan")))
    return rows


def write_density_csv(rows: Sequence[DensityBreakdown], path) -> None:
    if not rows:
        raise ValueError("nothing to write")
    D = len(rows[0].x)
    header = [f"x{i}" for i in range(D)] + ["E", "term0", "term1", "term2", "total", "regime"]
    write_csv(path, header, ([*r.x, r.E, r.term(0), r.term(1), r.term(2), r.total, r.regime] for r in rows))
