import csv
import math

import numpy as np
import pytest

from maupertuis import spectral as sp
from maupertuis.potentials import free, harmonic


@pytest.fixture(scope="module")
def osc():
    return sp.solve_1d(harmonic(1), -12, 12, 4000, 40, richardson=True)


def test_harmonic_levels(osc):
    n = np.arange(21)
    assert np.max(np.abs(osc.extrapolated[:21] - (n + 0.5))) <= 1e-6
    # the bare 3-point levels carry the O(dx^2) error that extrapolation removes
    assert 1e-6 < np.max(np.abs(osc.eigenvalues[:21] - (n + 0.5))) < 1e-3


def test_particle_in_box():
    L = 1.0
    spec = sp.solve_1d(free(1), 0.0, L, 4000, 5, leak_tol=np.inf, richardson=True)
    n = np.arange(1, 6)
    exact = (math.pi * n / L) ** 2 / 2
    rel = np.abs(spec.eigenvalues - exact) / exact  # ~ (pi n dx)^2 / 12
    assert np.max(rel[:4]) <= 1e-6
    assert np.max(np.abs(spec.extrapolated - exact) / exact) <= 1e-9


def test_parity_and_nodes(osc):
    for n in range(10):
        psi = osc.eigenfunctions[:, n]
        assert sp.sign_changes(psi) == n
        assert np.allclose(psi[::-1], (-1) ** n * psi, atol=1e-8)
        assert np.sum(psi**2) * osc.dx == pytest.approx(1.0, abs=1e-12)


def test_dos_equal_spacing(osc):
    assert sp.dos_smeared(osc, 20.0, 2.0) == pytest.approx(1.0, abs=0.01)
    assert sp.is_resolved(osc, 20.0, 2.0)
    assert not sp.is_resolved(osc, 20.0, 0.2)


def test_local_density_integrates_to_dos(osc):
    rho = sp.local_density_smeared(osc, osc.x, 20.5, 2.0)
    assert np.sum(rho) * osc.dx == pytest.approx(sp.dos_smeared(osc, 20.5, 2.0), rel=1e-12)


def test_flattening_with_eta(osc):
    Es = np.linspace(10, 15, 51)
    spread = [np.ptp([sp.dos_smeared(osc, E, eta) for E in Es]) for eta in (0.2, 0.4, 0.8)]
    assert spread[0] > spread[1] > spread[2]


def test_box_dos():
    L, E, eta = 20.0, 20.0, 2.0
    spec = sp.solve_1d(free(1), 0.0, L, 4000, 60, leak_tol=np.inf)
    assert sp.dos_smeared(spec, E, eta) == pytest.approx(L * math.sqrt(1 / (2 * E)) / math.pi, rel=0.02)


def test_range_and_leakage_errors(osc):
    with pytest.raises(sp.SpectralRangeError):
        sp.dos_smeared(osc, 35.0, 2.0)
    with pytest.raises(sp.BoxLeakageError):
        sp.solve_1d(harmonic(1), -3, 3, 400, 10)


def test_eigenvalue_csv(osc, tmp_path):
    path = tmp_path / "e.csv"
    sp.write_eigenvalues_csv(osc, path)
    rows = list(csv.reader(path.open(newline="")))
    assert rows[0] == ["n", "E_n"] and len(rows) == 41
    assert float(rows[1][1]) == osc.extrapolated[0]
