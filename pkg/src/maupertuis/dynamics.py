"""Newtonian trajectories, Maupertuis geodesics and the eikonal.

Both integrators use the Dormand-Prince 5(4) pair with dense output
(``scipy.integrate.solve_ivp(method="RK45")``) with rtol = atol = tol.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from ._io import write_csv
from .geometry import DELTA_MIN, MaupertuisFactor
from .potentials import Potential, evaluate


class IntegrationError(RuntimeError):
    def __init__(self, message, last_state):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class Trajectory:
    params: np.ndarray  # (n,)
    positions: np.ndarray  # (n, D)
    velocities: np.ndarray  # (n, D)
    parameterization: str  # "newtonian-time" | "invariant-length"
    energy: float
    drift: np.ndarray  # conserved-quantity deviation at each sample
    stopped_early: bool = False
    dense: Optional[Callable] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def position(self, s) -> np.ndarray:
        """Dense-output position at parameter value(s) ``s``."""
        return self.dense(s)[: self.dim]

    def max_drift(self) -> float:
        return float(np.max(np.abs(self.drift)))


def _samples(t0, t1, n):
    return np.linspace(t0, t1, n)


def newton_integrate(pot: Potential, x0, v0, t_end: float, tol: float = 1e-9, n_samples: int = 401) -> Trajectory:
    """Integrate M x'' = -grad V from (x0, v0) over [0, t_end]."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    D, M = pot.dim, pot.mass
    E = 0.5 * M * float(v0 @ v0) + evaluate(pot, x0).V

    def rhs(t, y):
        return np.concatenate([y[D:], -evaluate(pot, y[:D]).grad / M])

    sol = solve_ivp(rhs, (0.0, t_end), np.concatenate([x0, v0]), method="RK45",
                    rtol=tol, atol=tol, dense_output=True)
    if sol.status != 0:
        raise IntegrationError(f"Newton integration failed: {sol.message}", sol.y[:, -1])
    t = _samples(0.0, t_end, n_samples)
    y = sol.sol(t)
    xs, vs = y[:D].T, y[D:].T
    energies = 0.5 * M * np.sum(vs * vs, axis=1) + np.array([evaluate(pot, p).V for p in xs])
    return Trajectory(t, xs, vs, "newtonian-time", E, energies - E, dense=sol.sol)


def geodesic_rhs(source) -> Callable:
    """Geodesic equation of Omega^2(x) delta for state (x, u), u = dx/dl.

    -Gamma^l_{mn} u^m u^n = -(u.dw / w) u + |u|^2 dw / (2w)
    """
    def rhs(_, y):
        D = len(y) // 2
        x, u = y[:D], y[D:]
        w, dw, _dd = source.derivatives(x)
        return np.concatenate([u, -(u @ dw) / w * u + (u @ u) / (2 * w) * dw])

    return rhs


def geodesic_integrate(
    source,
    x0,
    u0,
    l_end: float,
    tol: float = 1e-9,
    n_samples: int = 401,
    delta_min: float = DELTA_MIN,
    normalize: bool = False,
) -> Trajectory:
    """Integrate the geodesic equation in the invariant length l.

    ``u0`` must satisfy Omega^2 |u0|^2 = 1 (pass ``normalize=True`` to rescale
    it).  Integration stops early, with ``stopped_early`` set, if Omega^2 drops
    below ``delta_min``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    D = len(x0)
    w0 = source.omega2(x0)
    if not w0 > delta_min:
        raise ValueError(f"Omega^2(x0) = {w0:.6g} is not positive")
    norm = w0 * float(u0 @ u0)
    if normalize:
        u0 = u0 / np.sqrt(norm)
    elif abs(norm - 1) > 1e-10:
        raise ValueError(f"u0 is not unit length in the metric (g(u0,u0) = {norm:.12g})")

    def turning(_, y):
        return source.omega2(y[:D]) - delta_min

    turning.terminal = True
    turning.direction = -1

    sol = solve_ivp(geodesic_rhs(source), (0.0, l_end), np.concatenate([x0, u0]), method="RK45",
                    rtol=tol, atol=tol, dense_output=True, events=turning)
    if sol.status == -1:
        raise IntegrationError(f"geodesic integration failed: {sol.message}", sol.y[:, -1])
    stopped = sol.status == 1
    l_stop = sol.t[-1]
    ls = _samples(0.0, l_stop, n_samples)
    y = sol.sol(ls)
    xs, us = y[:D].T, y[D:].T
    norms = np.array([source.omega2(p) for p in xs]) * np.sum(us * us, axis=1)
    energy = getattr(source, "energy", np.nan)
    return Trajectory(ls, xs, us, "invariant-length", energy, norms - 1.0, stopped, sol.sol)


def eikonal(traj: Trajectory, source, delta_min: float = DELTA_MIN) -> float:
    """S = integral sqrt(g(dx, dx)) over the sampled path (composite Simpson)."""
    from scipy.integrate import simpson

    w = np.array([source.omega2(p) for p in traj.positions])
    bad = np.flatnonzero(~(w > delta_min))
    if bad.size:
        raise ValueError(f"sample {bad[0]} lies outside the positive-metric region (Omega^2 = {w[bad[0]]:.6g})")
    speed = np.sqrt(w * np.sum(traj.velocities**2, axis=1))
    return float(simpson(speed, x=traj.params))


def path_from_function(fn: Callable, dfn: Callable, s_end: float, n_samples: int = 401, energy=np.nan) -> Trajectory:
    """Wrap an explicit path x(s) with derivative dx/ds as a Trajectory."""
    s = _samples(0.0, s_end, n_samples)
    xs = np.array([fn(v) for v in s])
    vs = np.array([dfn(v) for v in s])
    return Trajectory(s, xs, vs, "invariant-length", energy, np.zeros(len(s)))


@dataclass
class DeviationReport:
    energy: float
    span: float
    l_end: float
    max_deviation: float
    max_rate_mismatch: float  # |dl/dt from metric - 2|E-V|| along the Newton path
    geodesic_norm_drift: float
    newton_energy_drift: float
    truncated: bool


def compare_geodesic_newton(
    pot: Potential,
    x0,
    v0,
    span: float,
    tol: float = 1e-9,
    E: Optional[float] = None,
    n_compare: int = 201,
    delta_min: float = DELTA_MIN,
) -> DeviationReport:
    """Classical Maupertuis check: Newton orbit vs geodesic of 2M|V - E| delta.

    The Newton solution is carried along with l(t) = int 2|E - V| dt and with
    the metric arc length int sqrt(2M|V - E|) |v| dt; the first reparameterizes,
    the second is reported against it.  The geodesic starts at x0 in the
    direction of v0 and is compared pointwise at matched l.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    D, M = pot.dim, pot.mass
    E_orbit = 0.5 * M * float(v0 @ v0) + evaluate(pot, x0).V
    if E is not None and abs(E - E_orbit) > 1e-12 * max(1.0, abs(E)):
        raise ValueError(f"E = {E} inconsistent with initial data (E = {E_orbit})")
    E = E_orbit
    source = MaupertuisFactor(pot, E, absolute=True)

    def rhs(t, y):
        ev = evaluate(pot, y[:D])
        v = y[D : 2 * D]
        gap = abs(E - ev.V)
        return np.concatenate([v, -ev.grad / M, [2 * gap, np.sqrt(2 * M * gap) * np.sqrt(v @ v)]])

    def turning(_, y):
        return source.omega2(y[:D]) - delta_min

    turning.terminal = True
    turning.direction = -1

    y0 = np.concatenate([x0, v0, [0.0, 0.0]])
    newton = solve_ivp(rhs, (0.0, span), y0, method="RK45", rtol=tol, atol=tol,
                       dense_output=True, events=turning)
    if newton.status == -1:
        raise IntegrationError(f"Newton integration failed: {newton.message}", newton.y[:, -1])
    truncated = newton.status == 1
    t_stop = newton.t[-1]
    t = np.linspace(0.0, t_stop, n_compare)
    y = newton.sol(t)
    xs, vs, ls, arcs = y[:D].T, y[D : 2 * D].T, y[2 * D], y[2 * D + 1]
    l_end = float(ls[-1])

    u0 = v0 / np.sqrt(source.omega2(x0) * float(v0 @ v0))
    geo = geodesic_integrate(source, x0, u0, l_end, tol=tol, delta_min=delta_min)
    truncated = truncated or geo.stopped_early
    ok = ls <= geo.params[-1]
    gx = geo.position(ls[ok]).T
    dev = float(np.max(np.linalg.norm(gx - xs[ok], axis=1)))
    energies = 0.5 * M * np.sum(vs * vs, axis=1) + np.array([evaluate(pot, p).V for p in xs])
    return DeviationReport(
        energy=E,
        span=float(t_stop),
        l_end=l_end,
        max_deviation=dev,
        max_rate_mismatch=float(np.max(np.abs(arcs - ls))),
        geodesic_norm_drift=geo.max_drift(),
        newton_energy_drift=float(np.max(np.abs(energies - E))),
        truncated=bool(truncated),
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    D = traj.dim
    pname = "t" if traj.parameterization == "newtonian-time" else "l"
    header = [pname] + [f"x{i}" for i in range(D)] + [f"v{i}" for i in range(D)] + ["drift"]
    write_csv(path, header, ([s, *x, *v, d] for s, x, v, d in zip(traj.params, traj.positions, traj.velocities, traj.drift)))
