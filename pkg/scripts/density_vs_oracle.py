"""Smeared semiclassical density of the 1D oscillator against exact diagonalization.

Writes x, exact, order-0 and corrected smeared densities for each energy.

    python3 scripts/density_vs_oracle.py --energies 10.5 20.5 --eta 2
"""
import argparse

import numpy as np

from maupertuis import density as dens
from maupertuis import spectral
from maupertuis._io import write_csv
from maupertuis.potentials import harmonic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--energies", type=float, nargs="+", default=[10.5, 20.5])
    ap.add_argument("--eta", type=float, default=2.0)
    ap.add_argument("--fraction", type=float, default=0.7)
    ap.add_argument("--n-grid", type=int, default=4000)
    ap.add_argument("--out", default="density_vs_oracle.csv")
    args = ap.parse_args()
    pot = harmonic(1)
    top = max(args.energies) + 6 * args.eta
    n_states = int(top) + 5
    box = np.sqrt(2 * (n_states + 10)) + 4
    spec = spectral.solve_1d(pot, -box, box, args.n_grid, n_states)
    rows = []
    for E in args.energies:
        xt = np.sqrt(2 * E)
        xs = spec.x[np.abs(spec.x) <= args.fraction * xt]
        exact = spectral.local_density_smeared(spec, xs, E, args.eta)
        sc = [dens.smeared_density(pot, E, [x], args.eta, order=2) for x in xs]
        s0 = np.array([r.term(0) for r in sc])
        s2 = np.array([r.total for r in sc])
        rows += [[E, x, a, b, c] for x, a, b, c in zip(xs, exact, s0, s2)]
        l2 = lambda s: np.sqrt(np.sum((s - exact) ** 2) * spec.dx)  # noqa: E731
        print(f"E={E:g}  max rel dev (order 0) = {np.max(np.abs(s0 - exact) / exact):.4f}  "
              f"L2 order 0 = {l2(s0):.3e}  L2 corrected = {l2(s2):.3e}")
    write_csv(args.out, ["E", "x", "rho_exact", "rho_order0", "rho_corrected"], rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
