"""Exact reference for one-dimensional problems: finite-difference diagonalization.

The Hamiltonian -hbar^2/(2M) d^2/dx^2 + V is discretized with the 3-point
Laplacian on a uniform interior grid with Dirichlet walls and solved as a
symmetric tridiagonal eigenproblem.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._io import write_csv
from .potentials import Potential, evaluate


class BoxLeakageError(ValueError):
    def __init__(self, message, leakage):
        super().__init__(message)
        self.leakage = leakage


class SpectralRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralData:
    x: np.ndarray  # interior nodes
    dx: float
    x_min: float
    x_max: float
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # (N, n_states), sum |psi|^2 dx = 1
    extrapolated: Optional[np.ndarray] = None  # Richardson (N, 2N+1) eigenvalues

    @property
    def n_states(self) -> int:
        return len(self.eigenvalues)

    @property
    def best_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues if self.extrapolated is None else self.extrapolated


def _tridiagonal(pot, x_min, x_max, n_grid):
    if pot.dim != 1:
        raise ValueError("spectral oracle is one-dimensional")
    dx = (x_max - x_min) / (n_grid + 1)
    x = x_min + dx * np.arange(1, n_grid + 1)
    V = np.array([evaluate(pot, [v]).V for v in x])
    t = pot.hbar**2 / (2 * pot.mass * dx * dx)
    return x, dx, 2 * t + V, np.full(n_grid - 1, -t)


def sign_changes(psi: np.ndarray, rel_floor: float = 1e-8) -> int:
    """Interior nodes of psi, ignoring the exponentially small tails."""
    keep = psi[np.abs(psi) > rel_floor * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.diff(np.sign(keep)) != 0))


def solve_1d(
    pot: Potential,
    x_min: float,
    x_max: float,
    n_grid: int,
    n_states: int,
    richardson: bool = False,
    leak_tol: float = 1e-8,
) -> SpectralData:
    """Lowest ``n_states`` eigenpairs on [x_min, x_max] with N = n_grid interior nodes.

    With ``richardson=True`` the problem is also solved on 2N+1 nodes (half the
    spacing) and the O(dx^2) error is extrapolated out of the eigenvalues.
    Raises BoxLeakageError if a retained state is not below ``leak_tol``
    (relative to its maximum) at the first/last interior node.
    """
    x, dx, d, e = _tridiagonal(pot, x_min, x_max, n_grid)
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_states - 1))
    v = v / np.sqrt(dx)
    # fix the sign convention so runs are reproducible: first significant lobe positive
    for n in range(v.shape[1]):
        col = v[:, n]
        i = int(np.argmax(np.abs(col) > 1e-3 * np.max(np.abs(col))))
        if col[i] < 0:
            v[:, n] = -col
    edge = np.maximum(np.abs(v[0]), np.abs(v[-1])) / np.max(np.abs(v), axis=0)
    worst = int(np.argmax(edge))
    if edge[worst] > leak_tol:
        raise BoxLeakageError(
            f"state {worst} has relative amplitude {edge[worst]:.3g} at the walls; enlarge the box",
            float(edge[worst]),
        )
    extrap = None
    if richardson:
        _, _, d2, e2 = _tridiagonal(pot, x_min, x_max, 2 * n_grid + 1)
        w2 = eigh_tridiagonal(d2, e2, eigvals_only=True, select="i", select_range=(0, n_states - 1))
        extrap = (4 * w2 - w) / 3
    return SpectralData(x, dx, x_min, x_max, w, v, extrap)


def _check_range(spec: SpectralData, E: float, eta: float, width: float = 6.0):
    top = spec.eigenvalues[-1]
    if E + width * eta > top:
        raise SpectralRangeError(
            f"E + {width:g} eta = {E + width * eta:.6g} exceeds the highest retained level {top:.6g}"
        )


def _gauss(z, eta):
    return np.exp(-0.5 * (z / eta) ** 2) / (np.sqrt(2 * np.pi) * eta)


def local_density_smeared(spec: SpectralData, x, E: float, eta: float) -> np.ndarray:
    """sum_n |psi_n(x)|^2 G(E - E_n; eta); x may be an array (linear interpolation)."""
    _check_range(spec, E, eta)
    weights = _gauss(E - spec.eigenvalues, eta)
    dens = (spec.eigenfunctions**2) @ weights
    return np.interp(x, spec.x, dens)


def dos_smeared(spec: SpectralData, E: float, eta: float) -> float:
    _check_range(spec, E, eta)
    return float(np.sum(_gauss(E - spec.eigenvalues, eta)))


def is_resolved(spec: SpectralData, E: float, eta: float) -> bool:
    """True when eta exceeds the local level spacing (smearing gives a smooth DOS)."""
    i = int(np.clip(np.searchsorted(spec.eigenvalues, E), 1, spec.n_states - 1))
    return eta > spec.eigenvalues[i] - spec.eigenvalues[i - 1]


def write_eigenvalues_csv(spec: SpectralData, path) -> None:
    write_csv(path, ["n", "E_n"], ([str(n), e] for n, e in enumerate(spec.best_eigenvalues)))
