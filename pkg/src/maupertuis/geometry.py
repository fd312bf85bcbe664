"""Differential geometry of conformally flat metrics g = Omega^2(x) delta.

The conformal factor comes either from a potential at fixed energy,
Omega^2 = 2M (V - E), or from the hydrogen momentum-space metric
Omega^2 = 2 / (p^2 + p_E^2)^2.  Everything downstream only needs Omega^2 and
its first two derivatives at a point, supplied by a *factor source*.

Index conventions
-----------------
``christoffels`` returns ``G[mu, nu, lam] = Gamma_{mu nu}^lam``.
``riemann_fd`` returns ``R[mu, nu, lam, sig] = R_{mu nu lam}^sig`` built as

    d_mu G[nu,lam,sig] - d_nu G[mu,lam,sig]
        - G[mu,lam,tau] G[nu,tau,sig] + G[nu,lam,tau] G[mu,tau,sig]

so that the Ricci tensor is ``Ric[nu, lam] = sum_mu R[mu, nu, lam, mu]`` and
the unit sphere has positive scalar curvature.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .potentials import Potential, evaluate

DELTA_MIN = 1e-6


class ForbiddenRegionError(ValueError):
    """Geometry requested where Omega^2 <= delta_min (metric not positive)."""

    def __init__(self, message, point, omega2, e_minus_v=None):
        super().__init__(message)
        self.point = np.asarray(point, dtype=float)
        self.omega2 = omega2
        self.e_minus_v = e_minus_v


class TurningSurfaceWarning(UserWarning):
    pass


class FactorDerivs(NamedTuple):
    w: float
    dw: np.ndarray
    ddw: np.ndarray


class MaupertuisFactor:
    """Omega^2 = 2M (V - E).  With ``absolute=True`` uses 2M|V - E|.

    The absolute form is what the dynamics module integrates in the
    classically allowed region; geodesics do not care about the overall sign
    of the metric.
    """

    def __init__(self, pot: Potential, energy: float, absolute: bool = False):
        self.pot = pot
        self.energy = float(energy)
        self.absolute = absolute
        self.dim = pot.dim

    def derivatives(self, x) -> FactorDerivs:
        ev = evaluate(self.pot, x)
        c = 2 * self.pot.mass
        gap = ev.V - self.energy
        if self.absolute and gap < 0:
            c = -c
        return FactorDerivs(c * gap, c * ev.grad, c * ev.hess)

    def omega2(self, x) -> float:
        ev = evaluate(self.pot, x)
        w = 2 * self.pot.mass * (ev.V - self.energy)
        return abs(w) if self.absolute else w

    def e_minus_v(self, x) -> float:
        return self.energy - evaluate(self.pot, x).V


class HydrogenMomentumFactor:
    """Omega^2 = 2 / (p^2 + p_E^2)^2: a round sphere of radius 1/(sqrt(2) p_E)."""

    def __init__(self, dim: int, p_e: float):
        if dim < 2:
            raise ValueError("hydrogen momentum metric needs dim >= 2")
        if not p_e > 0:
            raise ValueError("p_E must be positive")
        self.dim = dim
        self.p_e = float(p_e)

    def derivatives(self, p) -> FactorDerivs:
        p = np.asarray(p, dtype=float)
        s = float(p @ p) + self.p_e**2
        w = 2.0 / s**2
        dw = -8.0 * p / s**3
        ddw = -8.0 * np.eye(self.dim) / s**3 + 48.0 * np.outer(p, p) / s**4
        return FactorDerivs(w, dw, ddw)

    def omega2(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return 2.0 / (float(p @ p) + self.p_e**2) ** 2

    def scalar_curvature(self) -> float:
        return 2.0 * self.dim * (self.dim - 1) * self.p_e**2


@dataclass(frozen=True)
class ConformalGeometry:
    source: object
    point: np.ndarray
    omega2: float
    d_omega: np.ndarray
    dd_omega: np.ndarray
    delta_min: float = DELTA_MIN

    @property
    def dim(self) -> int:
        return len(self.point)

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.omega2))

    @property
    def energy(self):
        return getattr(self.source, "energy", None)

    def at(self, x) -> "ConformalGeometry":
        return geometry_at(self.source, x, self.delta_min)


def _forbidden(source, x, w, delta_min):
    gap = source.e_minus_v(x) if hasattr(source, "e_minus_v") else None
    msg = f"Omega^2 = {w:.6g} <= {delta_min:g} at x={np.asarray(x).tolist()}"
    if gap is not None:
        msg += f" (E - V = {gap:.6g})"
    return ForbiddenRegionError(msg, x, w, gap)


def geometry_at(source, x, delta_min: float = DELTA_MIN) -> ConformalGeometry:
    """Omega^2 and the derivatives of Omega at ``x`` (chain rule from Omega^2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w, dw, ddw = source.derivatives(x)
    if not w > delta_min:
        raise _forbidden(source, x, w, delta_min)
    om = np.sqrt(w)
    d_om = dw / (2 * om)
    dd_om = ddw / (2 * om) - np.outer(dw, dw) / (4 * om**3)
    return ConformalGeometry(source, x, float(w), d_om, dd_om, delta_min)


def conformal_factor(pot: Potential, E: float, x, delta_min: float = DELTA_MIN) -> ConformalGeometry:
    return geometry_at(MaupertuisFactor(pot, E), x, delta_min)


def weyl_xi(dim: int) -> float:
    """Conformal coupling (D-2)/(4(D-1)); undefined in one dimension."""
    if dim < 2:
        raise ValueError("conformal coupling is undefined for D = 1 (R vanishes identically there)")
    return (dim - 2) / (4 * (dim - 1))


def christoffels(geom: ConformalGeometry) -> np.ndarray:
    D = geom.dim
    d = geom.d_omega / geom.omega
    eye = np.eye(D)
    # G[mu, nu, lam]
    return (
        np.einsum("ln,m->mnl", eye, d)
        + np.einsum("lm,n->mnl", eye, d)
        - np.einsum("mn,l->mnl", eye, d)
    )


def christoffels_from_metric_fd(metric: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Christoffel symbols of an arbitrary metric field by central differences.

    ``metric(x)`` must return the D x D lower-index metric.  Independent of the
    conformal shortcut used in :func:`christoffels`.
    """
    x = np.asarray(x, dtype=float)
    D = len(x)
    dg = np.empty((D, D, D))  # dg[s, m, n] = d_s g_mn
    for s in range(D):
        e = np.zeros(D)
        e[s] = h
        dg[s] = (metric(x + e) - metric(x - e)) / (2 * h)
    ginv = np.linalg.inv(metric(x))
    # Gamma^l_{mn} = 1/2 g^{ls} (d_m g_sn + d_n g_ms - d_s g_mn)
    t = np.einsum("msn->msn", dg) + np.einsum("nms->msn", dg) - np.einsum("smn->msn", dg)
    return 0.5 * np.einsum("ls,msn->mnl", ginv, t)


def ricci_scalar_conformal(geom: ConformalGeometry) -> float:
    """Scalar curvature of Omega^2 delta from Omega and its derivatives (flat background)."""
    D = geom.dim
    om = geom.omega
    lap = float(np.trace(geom.dd_omega))
    grad2 = float(geom.d_omega @ geom.d_omega)
    return -2 * (D - 1) * lap / om**3 - (D - 1) * (D - 4) * grad2 / om**4


def conformal_coupling(geom: ConformalGeometry) -> float:
    """xi_c R for the conformally flat metric, written so that D = 1 is included.

    For D >= 2 this is weyl_xi(D) * ricci_scalar_conformal(geom).  At D = 1
    xi_c diverges while R vanishes; the product keeps the finite limit
    Omega''/(2 Omega^3) - 3 Omega'^2/(4 Omega^4), which is the term that makes
    the weight-1/2 transformation of the 1D Laplacian exact.
    """
    D = geom.dim
    om = geom.omega
    lap = float(np.trace(geom.dd_omega))
    grad2 = float(geom.d_omega @ geom.d_omega)
    return (D - 2) / 4 * (-2 * lap / om**3 - (D - 4) * grad2 / om**4)


def ricci_scalar_analytic(
    pot: Potential,
    E: float,
    x,
    turning_threshold: float = 0.0,
    delta_min: float = DELTA_MIN,
) -> float:
    """Scalar curvature of the Maupertuis metric from V, grad V and lap V.

    R = (1-D)/4 [ 2 lap V / (M (E-V)^2) - (D-6) |grad V|^2 / (2M (E-V)^3) ]

    Note the minus sign on the gradient term; this is what the generic
    Riemann contraction (``ricci_scalar_fd``) produces.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    D, M = pot.dim, pot.mass
    ev = evaluate(pot, x)
    w = 2 * M * (ev.V - E)
    if not w > delta_min:
        raise ForbiddenRegionError(
            f"Omega^2 = {w:.6g} <= {delta_min:g} at x={x.tolist()} (E - V = {E - ev.V:.6g})",
            x,
            w,
            E - ev.V,
        )
    gap = E - ev.V
    if abs(gap) < turning_threshold:
        warnings.warn(f"|E - V| = {abs(gap):.3g} is close to the turning surface", TurningSurfaceWarning)
    lap = float(np.trace(ev.hess))
    g2 = float(ev.grad @ ev.grad)
    return (1 - D) / 4 * (2 * lap / (M * gap**2) - (D - 6) * g2 / (2 * M * gap**3))


def _unit(D, i, h):
    e = np.zeros(D)
    e[i] = h
    return e


def riemann_fd(geom: ConformalGeometry, h: float = 1e-4) -> np.ndarray:
    """R_{mu nu lam}^sig from central differences of the Christoffel symbols."""
    D = geom.dim
    x = geom.point
    G = christoffels(geom)
    dG = np.empty((D, D, D, D))
    for m in range(D):
        e = _unit(D, m, h)
        dG[m] = (christoffels(geom.at(x + e)) - christoffels(geom.at(x - e))) / (2 * h)
    return (
        dG
        - np.transpose(dG, (1, 0, 2, 3))
        - np.einsum("mlt,nts->mnls", G, G)
        + np.einsum("nlt,mts->mnls", G, G)
    )


def ricci_from_riemann(riem: np.ndarray) -> np.ndarray:
    return np.einsum("mnlm->nl", riem)


def ricci_scalar_fd(geom: ConformalGeometry, h: float = 1e-4) -> float:
    return float(np.trace(ricci_from_riemann(riemann_fd(geom, h)))) / geom.omega2


@dataclass(frozen=True)
class CurvaturePack:
    R: float
    boxR: float
    ricciSq: float
    riemannSq: float


def laplace_beltrami_fd(geom: ConformalGeometry, u: Callable, h: float = 1e-3) -> float:
    """Omega^-D d_mu (Omega^(D-2) d_mu u), flux-form central differences."""
    D = geom.dim
    x = geom.point
    src = geom.source
    p = (D - 2) / 2
    u0 = u(x)
    total = 0.0
    for m in range(D):
        e = _unit(D, m, h)
        ap = src.omega2(x + e / 2) ** p
        am = src.omega2(x - e / 2) ** p
        total += ap * (u(x + e) - u0) - am * (u0 - u(x - e))
    return total / h**2 / geom.omega2 ** (D / 2)


def curvature_invariants(geom: ConformalGeometry, h: float = 1e-4, h_outer: float = 1e-3) -> CurvaturePack:
    """R, box R, Ric.Ric and Riem.Riem by finite-difference Riemann assembly.

    box R uses a second stencil of width ``h_outer`` around the point, with R at
    each outer node again from the inner Riemann assembly.
    """
    w = geom.omega2
    riem = riemann_fd(geom, h)
    ric = ricci_from_riemann(riem)
    R = float(np.trace(ric)) / w
    ricci_sq = float(np.sum(ric * ric)) / w**2
    riemann_sq = float(np.sum(riem * riem)) / w**2
    boxR = laplace_beltrami_fd(geom, lambda y: ricci_scalar_fd(geom.at(y), h), h_outer)
    return CurvaturePack(R, boxR, ricci_sq, riemann_sq)


def maximally_symmetric_pack(R: float, dim: int) -> CurvaturePack:
    """Invariants of a constant-curvature space with scalar curvature R."""
    return CurvaturePack(R, 0.0, R * R / dim, 2 * R * R / (dim * (dim - 1)))


def yamabe_covariance_residual(geom: ConformalGeometry, f: Callable, h: float = 1e-3) -> float:
    """(Lap_g - xi_c R)[Omega^((2-D)/2) f] - Omega^(-(D+2)/2) lap f at geom.point.

    Vanishes (up to O(h^2)) for any smooth f: the conformal Laplacian maps
    weight (2-D)/2 densities covariantly.  Both Laplacians share the stencil.
    """
    D = geom.dim
    x = geom.point
    src = geom.source
    k = (2 - D) / 4  # exponent on Omega^2

    def u(y):
        return src.omega2(y) ** k * f(y)

    lhs = laplace_beltrami_fd(geom, u, h) - conformal_coupling(geom) * u(x)
    f0 = f(x)
    flat = sum(f(x + _unit(D, m, h)) - 2 * f0 + f(x - _unit(D, m, h)) for m in range(D)) / h**2
    return lhs - geom.omega2 ** (-(D + 2) / 4) * flat


@dataclass
class TransferResult:
    phi: np.ndarray
    curved_residual: np.ndarray
    flat_residual: np.ndarray
    mask: np.ndarray  # True where the curved residual is evaluated
    omega2: np.ndarray
    unresolved: int = 0  # admissible points dropped because the stencil straddles a turning surface

    @property
    def masked_points(self) -> int:
        return int(np.count_nonzero(~self.mask))


def schrodinger_solution_transfer(
    pot: Potential,
    E: float,
    axes,
    psi,
    delta_min: float = DELTA_MIN,
    resolution: float = 0.01,
) -> TransferResult:
    """Map a flat-space solution psi onto phi = Omega^((2-D)/2) psi.

    Returns the residual of [hbar^2 (Lap_g - xi_c R) - 1] phi on the interior
    of the uniform grid ``axes``, with NaN wherever the point or any stencil
    neighbour has Omega^2 <= delta_min (turning surface or allowed region).
    Close to a turning surface the Omega^-2 factor amplifies the stencil
    error; points with hbar h |grad Omega^2|^2 / Omega^5 > ``resolution`` are
    also masked and counted in ``unresolved``.  The flat residual (H - E) psi is
    returned alongside for scale.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    D = len(axes)
    if D != pot.dim:
        raise ValueError("grid dimension does not match potential")
    psi = np.asarray(psi, dtype=float)
    steps = [a[1] - a[0] for a in axes]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    src = MaupertuisFactor(pot, E)
    M, hbar = pot.mass, pot.hbar

    shape = psi.shape
    w = np.empty(shape)
    dw = np.zeros(shape)
    Vg = np.empty(shape)
    coupling = np.zeros(shape)
    for idx in np.ndindex(shape):
        ev = evaluate(pot, mesh[idx])
        Vg[idx] = ev.V
        w[idx] = 2 * M * (ev.V - E)
        dw[idx] = 2 * M * float(np.linalg.norm(ev.grad))

    ok = w > delta_min
    mask = ok.copy()
    for ax in range(D):
        sl_lo = [slice(None)] * D
        sl_hi = [slice(None)] * D
        sl_lo[ax] = 0
        sl_hi[ax] = -1
        mask[tuple(sl_lo)] = False
        mask[tuple(sl_hi)] = False
        mask &= np.roll(ok, 1, axis=ax) & np.roll(ok, -1, axis=ax)
    with np.errstate(divide="ignore", invalid="ignore"):
        # stencil error relative to phi ~ (hbar h / (Omega l^2))^2, l = Omega^2 / |grad Omega^2|
        kappa = hbar * max(steps) * dw**2 / np.abs(w) ** 2.5
        resolved = kappa <= resolution
    unresolved = mask & ~resolved
    mask &= resolved

    with np.errstate(invalid="ignore", divide="ignore"):
        phi = np.where(ok, np.abs(w) ** ((2 - D) / 4) * psi, np.nan)
        lap_g = np.zeros(shape)
        flat_lap = np.zeros(shape)
        p = (D - 2) / 2
        for ax, hs in enumerate(steps):
            fwd = np.roll(phi, -1, axis=ax)
            bwd = np.roll(phi, 1, axis=ax)
            # Omega^(D-2) at half points from exact midpoint evaluation
            a_fwd = np.empty(shape)
            a_bwd = np.empty(shape)
            shift = np.zeros(D)
            shift[ax] = hs / 2
            for idx in np.ndindex(shape):
                if mask[idx]:
                    a_fwd[idx] = src.omega2(mesh[idx] + shift) ** p
                    a_bwd[idx] = src.omega2(mesh[idx] - shift) ** p
                else:
                    a_fwd[idx] = a_bwd[idx] = np.nan
            lap_g += (a_fwd * (fwd - phi) - a_bwd * (phi - bwd)) / hs**2
            flat_lap += (np.roll(psi, -1, axis=ax) - 2 * psi + np.roll(psi, 1, axis=ax)) / hs**2
        lap_g /= np.abs(w) ** (D / 2)

        for idx in np.ndindex(shape):
            if mask[idx]:
                coupling[idx] = conformal_coupling(geometry_at(src, mesh[idx], delta_min))
        curved = hbar**2 * (lap_g - coupling * phi) - phi
        flat = -(hbar**2) / (2 * M) * flat_lap + (Vg - E) * psi

    curved = np.where(mask, curved, np.nan)
    flat_full = np.full(shape, np.nan)
    interior = np.ones(shape, dtype=bool)
    for ax in range(D):
        sl = [slice(None)] * D
        sl[ax] = 0
        interior[tuple(sl)] = False
        sl[ax] = -1
        interior[tuple(sl)] = False
    flat_full[interior] = flat[interior]
    return TransferResult(phi, curved, flat_full, mask, w, int(np.count_nonzero(unresolved)))


@dataclass(frozen=True)
class EndpointCurvature:
    """Curvature tensors at one point, all indices down.

    riemann[a, b, c, d] = R_{abcd} with R_{abcd} = g_{ae} R^e_{bcd};
    ricci_grad[m, n, r] = R_{mn;r}; ricci_hess[m, n, r, t] = R_{mn;rt}.
    """

    metric: np.ndarray
    metric_inv: np.ndarray
    ricci: np.ndarray
    riemann: np.ndarray
    ricci_grad: np.ndarray
    ricci_hess: np.ndarray

    @classmethod
    def flat(cls, dim: int) -> "EndpointCurvature":
        z2 = np.zeros((dim, dim))
        return cls(np.eye(dim), np.eye(dim), z2, np.zeros((dim,) * 4), np.zeros((dim,) * 3), np.zeros((dim,) * 4))


def maximally_symmetric_curvature(metric, R: float) -> EndpointCurvature:
    """Constant-curvature tensors R_{abcd} = K (g_ac g_bd - g_ad g_bc), K = R/(D(D-1))."""
    g = np.asarray(metric, dtype=float)
    D = len(g)
    K = R / (D * (D - 1))
    riem = K * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))
    return EndpointCurvature(
        g, np.linalg.inv(g), (D - 1) * K * g, riem, np.zeros((D,) * 3), np.zeros((D,) * 4)
    )


def _lower_ricci(geom, h):
    return ricci_from_riemann(riemann_fd(geom, h))


def _ricci_grad(geom, h, h1):
    D = geom.dim
    x = geom.point
    ric = _lower_ricci(geom, h)
    d = np.empty((D, D, D))  # d[r, m, n] = d_r R_mn
    for r in range(D):
        e = _unit(D, r, h1)
        d[r] = (_lower_ricci(geom.at(x + e), h) - _lower_ricci(geom.at(x - e), h)) / (2 * h1)
    G = christoffels(geom)  # G[r, m, l] = Gamma^l_{rm}
    return (
        np.transpose(d, (1, 2, 0))
        - np.einsum("rml,ln->mnr", G, ric)
        - np.einsum("rnl,ml->mnr", G, ric)
    )


def endpoint_curvature(geom: ConformalGeometry, h: float = 1e-4, h1: float = 1e-3, h2: float = 1e-2) -> EndpointCurvature:
    """All tensors entering the van Vleck endpoint expansion, by nested differences.

    Accuracy degrades with each derivative level (roughly 1e-8, 1e-6, 1e-4 for
    the Riemann tensor, its first and second covariant derivatives).
    """
    D = geom.dim
    x = geom.point
    w = geom.omega2
    g = w * np.eye(D)
    riem = riemann_fd(geom, h)
    ric = ricci_from_riemann(riem)
    riem_low = w * np.transpose(riem, (3, 2, 0, 1))
    T = _ricci_grad(geom, h, h1)
    dT = np.empty((D,) * 4)  # dT[t, m, n, r]
    for t in range(D):
        e = _unit(D, t, h2)
        dT[t] = (_ricci_grad(geom.at(x + e), h, h1) - _ricci_grad(geom.at(x - e), h, h1)) / (2 * h2)
    G = christoffels(geom)
    hess = (
        np.transpose(dT, (1, 2, 3, 0))
        - np.einsum("tml,lnr->mnrt", G, T)
        - np.einsum("tnl,mlr->mnrt", G, T)
        - np.einsum("trl,mnl->mnrt", G, T)
    )
    return EndpointCurvature(g, np.eye(D) / w, ric, riem_low, T, hess)
