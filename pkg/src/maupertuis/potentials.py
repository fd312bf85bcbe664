"""Scalar potentials V(x) with analytic gradients and Hessians.

A :class:`Potential` is an immutable description (family + parameters + the
system constants M and hbar).  :func:`evaluate` returns V, grad V and the
Hessian at a point.  Units default to M = hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

FAMILIES = (
    "free",
    "harmonic",
    "quartic",
    "gaussian-well",
    "coulomb-regularized",
    "user-tabulated",
)

_DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "free": {"v0": 0.0},
    "harmonic": {"omega": 1.0},
    "quartic": {"lam": 1.0},
    "gaussian-well": {"depth": 1.0, "width": 1.0},
    "coulomb-regularized": {"charge": 1.0, "eps": 1e-3},
    "user-tabulated": {},
}


class EvaluationError(ValueError):
    """Raised when a potential evaluates to a non-finite value."""

    def __init__(self, message: str, point):
        super().__init__(message)
        self.point = np.asarray(point, dtype=float)


class Evaluation(NamedTuple):
    V: float
    grad: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True)
class Potential:
    family: str
    dim: int = 1
    mass: float = 1.0
    hbar: float = 1.0
    params: Mapping[str, Any] = field(default_factory=dict)
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}; expected one of {FAMILIES}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        merged = dict(_DEFAULT_PARAMS[self.family])
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        if self.family == "user-tabulated" and self._spline is None:
            object.__setattr__(self, "_spline", _TabulatedSpline(merged["axes"], merged["values"], self.dim))

    def __call__(self, x) -> float:
        return evaluate(self, x).V

    def minimum(self) -> float:
        """Global minimum of V, used to scale turning-point thresholds."""
        p = self.params
        if self.family == "free":
            return float(p["v0"])
        if self.family in ("harmonic", "quartic"):
            return 0.0
        if self.family == "gaussian-well":
            return -float(p["depth"])
        if self.family == "coulomb-regularized":
            eps = float(p["eps"])
            return -np.inf if eps == 0 else -float(p["charge"]) / eps
        return float(np.min(self._spline.values))


def free(dim=1, v0=0.0, mass=1.0, hbar=1.0) -> Potential:
    return Potential("free", dim, mass, hbar, {"v0": v0})


def harmonic(dim=1, omega=1.0, mass=1.0, hbar=1.0) -> Potential:
    """V = M/2 sum_i omega_i^2 x_i^2; ``omega`` may be a scalar or per-axis list."""
    return Potential("harmonic", dim, mass, hbar, {"omega": omega})


def quartic(dim=1, lam=1.0, mass=1.0, hbar=1.0) -> Potential:
    """V = lam |x|^4."""
    return Potential("quartic", dim, mass, hbar, {"lam": lam})


def gaussian_well(dim=1, depth=1.0, width=1.0, mass=1.0, hbar=1.0) -> Potential:
    """V = -depth exp(-|x|^2 / (2 width^2))."""
    return Potential("gaussian-well", dim, mass, hbar, {"depth": depth, "width": width})


def coulomb(dim=3, charge=1.0, eps=1e-3, mass=1.0, hbar=1.0) -> Potential:
    """V = -charge / sqrt(|x|^2 + eps^2)."""
    return Potential("coulomb-regularized", dim, mass, hbar, {"charge": charge, "eps": eps})


def tabulated(axes: Sequence[Sequence[float]], values, mass=1.0, hbar=1.0) -> Potential:
    """Cubic tensor-product spline through ``values`` on the rectilinear grid ``axes``."""
    axes = [list(map(float, a)) for a in axes]
    values = np.asarray(values, dtype=float)
    return Potential("user-tabulated", len(axes), mass, hbar, {"axes": axes, "values": values})


def from_spec(spec: Mapping[str, Any], dim: int | None = None) -> Potential:
    """Build a potential from a scenario-file mapping."""
    spec = dict(spec)
    family = spec.pop("family")
    d = spec.pop("dim", dim)
    mass = spec.pop("mass", 1.0)
    hbar = spec.pop("hbar", 1.0)
    params = dict(spec.pop("params", {}))
    params.update(spec)
    if family == "user-tabulated":
        axes = params["axes"]
        return tabulated(axes, params["values"], mass, hbar)
    if d is None:
        raise ValueError("potential spec needs a dimension")
    return Potential(family, int(d), float(mass), float(hbar), params)


def evaluate(pot: Potential, x) -> Evaluation:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (pot.dim,):
        raise ValueError(f"point has shape {x.shape}, potential expects ({pot.dim},)")
    p = pot.params
    D = pot.dim
    fam = pot.family

    if fam == "free":
        out = Evaluation(float(p["v0"]), np.zeros(D), np.zeros((D, D)))
    elif fam == "harmonic":
        k = pot.mass * np.broadcast_to(np.asarray(p["omega"], dtype=float), (D,)) ** 2
        out = Evaluation(0.5 * float(k @ (x * x)), k * x, np.diag(k))
    elif fam == "quartic":
        lam = float(p["lam"])
        r2 = float(x @ x)
        out = Evaluation(lam * r2 * r2, 4 * lam * r2 * x, 4 * lam * (r2 * np.eye(D) + 2 * np.outer(x, x)))
    elif fam == "gaussian-well":
        a, s = float(p["depth"]), float(p["width"])
        e = a * np.exp(-float(x @ x) / (2 * s * s))
        out = Evaluation(-e, e * x / s**2, e * (np.eye(D) / s**2 - np.outer(x, x) / s**4))
    elif fam == "coulomb-regularized":
        z, eps = float(p["charge"]), float(p["eps"])
        s = float(x @ x) + eps * eps
        with np.errstate(divide="ignore", invalid="ignore"):
            out = Evaluation(
                -z / np.sqrt(s),
                z * x / s**1.5,
                z * (np.eye(D) / s**1.5 - 3 * np.outer(x, x) / s**2.5),
            )
    else:
        out = pot._spline.evaluate(x)

    if not (np.isfinite(out.V) and np.all(np.isfinite(out.grad)) and np.all(np.isfinite(out.hess))):
        raise EvaluationError(f"{fam} potential is not finite at x={x.tolist()}", x)
    return out


class _TabulatedSpline:
    """Tensor-product cubic B-spline (not-a-knot ends) with derivative access."""

    def __init__(self, axes, values, dim):
        from scipy.interpolate import NdBSpline, make_interp_spline

        axes = [np.asarray(a, dtype=float) for a in axes]
        values = np.asarray(values, dtype=float)
        if len(axes) != dim or values.shape != tuple(len(a) for a in axes):
            raise ValueError("tabulated values must have shape (len(axis_0), ..., len(axis_{D-1}))")
        for a in axes:
            if len(a) < 4 or np.any(np.diff(a) <= 0):
                raise ValueError("each axis needs >= 4 strictly increasing nodes")
        coef = values
        knots = []
        for i, a in enumerate(axes):
            b = make_interp_spline(a, coef, k=3, axis=i)
            coef = b.c if i == 0 else np.moveaxis(b.c, 0, i)
            knots.append(b.t)
        self.axes = axes
        self.values = values
        self._spl = NdBSpline(tuple(knots), coef, 3, extrapolate=False)
        self.dim = dim

    def evaluate(self, x) -> Evaluation:
        D = self.dim
        for i, a in enumerate(self.axes):
            if not a[0] <= x[i] <= a[-1]:
                raise EvaluationError(f"x[{i}]={x[i]} outside tabulated range [{a[0]}, {a[-1]}]", x)
        V = float(self._spl(x))
        grad = np.empty(D)
        hess = np.empty((D, D))
        for i in range(D):
            nu = [0] * D
            nu[i] = 1
            grad[i] = float(self._spl(x, nu=nu))
            for j in range(i, D):
                nu = [0] * D
                nu[i] += 1
                nu[j] += 1
                hess[i, j] = hess[j, i] = float(self._spl(x, nu=nu))
        return Evaluation(V, grad, hess)


def fd_gradient(pot: Potential, x, h=1e-5) -> np.ndarray:
    """Central-difference gradient, for self-checks."""
    x = np.asarray(x, dtype=float)
    g = np.empty(pot.dim)
    for i in range(pot.dim):
        e = np.zeros(pot.dim)
        e[i] = h
        g[i] = (evaluate(pot, x + e).V - evaluate(pot, x - e).V) / (2 * h)
    return g


def fd_laplacian(pot: Potential, x, h=1e-4) -> float:
    x = np.asarray(x, dtype=float)
    v0 = evaluate(pot, x).V
    total = 0.0
    for i in range(pot.dim):
        e = np.zeros(pot.dim)
        e[i] = h
        total += (evaluate(pot, x + e).V - 2 * v0 + evaluate(pot, x - e).V) / h**2
    return total
