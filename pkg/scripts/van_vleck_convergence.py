"""Numeric van Vleck determinant on the hydrogen momentum sphere vs its endpoint expansion.

    python3 scripts/van_vleck_convergence.py
"""
import argparse

import numpy as np

from maupertuis import dewitt as dw
from maupertuis import geometry as g
from maupertuis._io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="van_vleck_convergence.csv")
    ap.add_argument("--p-e", type=float, default=1.0)
    args = ap.parse_args()
    src = g.HydrogenMomentumFactor(3, args.p_e)
    x = np.array([0.3, -0.2, 0.1])
    geom = g.geometry_at(src, x)
    curv = g.endpoint_curvature(geom)
    direction = np.array([0.6, 0.48, -0.64])
    direction /= np.linalg.norm(direction)
    R = src.scalar_curvature()
    radius = np.sqrt(6 / R)
    rows = []
    seps = [0.04, 0.02, 0.01, 0.005]
    dev2 = []
    for r in seps:
        sig = r * direction
        num = dw.van_vleck_sqrt_numeric(src, x, sig)
        y = geom.omega * r / radius
        closed = (y / np.sin(y)) ** 1.0
        e2, e4 = (float(dw.mv_sqrt_expansion(sig, curv, k)) for k in (2, 4))
        dev2.append(abs(num - e2))
        rows.append([r, num, closed, e2, e4])
        print(f"|sigma|={r:<6g} numeric={num:.14f}  closed={closed:.14f}  num-e2={num - e2:+.3e}  num-e4={num - e4:+.3e}")
    print(f"slope of |num - e2|: {np.polyfit(np.log(seps), np.log(dev2), 1)[0]:.3f}")
    write_csv(args.out, ["sigma", "numeric", "closed_form", "expansion2", "expansion4"], rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
