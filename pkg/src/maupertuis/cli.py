"""Command-line scenario runner.

    maupertuis <subcommand> --scenario FILE [--out DIR] [--threads N]

Every run writes CSV tables and ``<subcommand>_summary.json`` into the
output directory (``--out``, else ``$MAUPERTUIS_OUT``, else the scenario's
``output`` key, else ``./maupertuis-out``).  Exit status: 0 when every
criterion passes, 1 on a tolerance failure (failure list as JSON on stderr),
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, density as dens, dewitt, dynamics, geometry, spectral, validation
from ._io import fmt, write_csv
from .potentials import evaluate
from .scenario import CompareBlock, ConfigError, HydrogenBlock, Scenario, default_path, load
from .validation import Criterion

SUBCOMMANDS = ("geometry", "geodesic", "dewitt", "density", "oracle", "compare", "hydrogen", "validate")
EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG = 0, 1, 2


class Run:
    """Collects tables, text files and criteria for one subcommand."""

    def __init__(self, scenario: Scenario, threads: int = 1):
        self.sc = scenario
        self.threads = max(1, threads)
        self.tables: dict[str, tuple[list, list]] = {}
        self.texts: dict[str, str] = {}
        self.criteria: list[Criterion] = []

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))  # order preserved: deterministic merge

    def check(self, cid, description, value, tolerance, passed=None):
        value = float(value)
        if passed is None:
            passed = value <= tolerance
        self.criteria.append(Criterion(cid, description, value, float(tolerance), bool(passed)))


def _require(sc: Scenario, block: str):
    if getattr(sc, block) is None:
        raise ConfigError(block, f"scenario has no '{block}' block")
    return getattr(sc, block)


# ---------------------------------------------------------------------------
# subcommands


def cmd_geometry(run: Run):
    sc, blk = run.sc, _require(run.sc, "geometry")
    D = sc.dimension
    plan = []
    for k, E in enumerate(sc.energies_for(blk)):
        pts = (np.asarray(blk.points, dtype=float) if blk.points is not None
               else sc.sample_admissible(E, blk.n_points, blk.box, 100 + k, "geometry"))
        plan.extend((E, x) for x in pts)

    def row(item):
        E, x = item
        geom = geometry.conformal_factor(sc.potential, E, x)
        ra = geometry.ricci_scalar_analytic(sc.potential, E, x)
        rc = geometry.ricci_scalar_conformal(geom)
        rf = geometry.ricci_scalar_fd(geom, blk.h)
        return [E, *x, ra, rc, rf, abs(ra - rf) / (1 + abs(ra))]

    rows = run.map(row, plan)
    run.tables["geometry"] = (["E"] + [f"x{i}" for i in range(D)] + ["R_analytic", "R_conformal", "R_fd", "rel_diff"],
                              rows)
    run.check("geometry.two_path", "max |R_analytic - R_fd| / (1 + |R|)", max(r[-1] for r in rows), blk.tolerance)
    if D == 1:
        worst = max(abs(r[D + 1]) for r in rows)
        run.check("geometry.d1_identity", "D=1 analytic curvature vanishes", worst, 0.0, worst == 0.0)


def cmd_geodesic(run: Run):
    sc, blk = run.sc, _require(run.sc, "geodesic")
    pot = sc.potential
    rep = dynamics.compare_geodesic_newton(pot, blk.x0, blk.v0, blk.span, tol=blk.tol, n_compare=blk.n_samples)
    newton = dynamics.newton_integrate(pot, blk.x0, blk.v0, rep.span, blk.tol, blk.n_samples)
    src = geometry.MaupertuisFactor(pot, rep.energy, absolute=True)
    geo = dynamics.geodesic_integrate(src, blk.x0, blk.v0, rep.l_end, blk.tol, blk.n_samples, normalize=True)
    D = sc.dimension
    for name, traj in (("geodesic_newton", newton), ("geodesic_geodesic", geo)):
        p = "t" if traj.parameterization == "newtonian-time" else "l"
        run.tables[name] = ([p] + [f"x{i}" for i in range(D)] + [f"v{i}" for i in range(D)] + ["drift"],
                            [[s, *x, *v, d] for s, x, v, d in
                             zip(traj.params, traj.positions, traj.velocities, traj.drift)])
    run.tables["geodesic_report"] = (["quantity", "value"], [
        ["energy", rep.energy], ["span", rep.span], ["l_end", rep.l_end], ["max_deviation", rep.max_deviation],
        ["max_rate_mismatch", rep.max_rate_mismatch], ["geodesic_norm_drift", rep.geodesic_norm_drift],
        ["newton_energy_drift", rep.newton_energy_drift], ["truncated", "true" if rep.truncated else "false"],
    ])
    run.check("geodesic.deviation", "max |x_geodesic(l(t)) - x_newton(t)|", rep.max_deviation, blk.tolerance)
    run.check("geodesic.span", "Newton time reached before any turning surface", rep.span, blk.span,
              not rep.truncated)


def cmd_dewitt(run: Run):
    sc, blk = run.sc, _require(run.sc, "dewitt")
    D = sc.dimension
    xis = blk.xi if blk.xi is not None else [geometry.weyl_xi(D), 1 / 6]
    plan = []
    for k, E in enumerate(sc.energies_for(blk)):
        pts = (np.asarray(blk.points, dtype=float) if blk.points is not None
               else sc.sample_admissible(E, blk.n_points, blk.box, 200 + k, "dewitt"))
        plan.extend((E, x) for x in pts)

    def rows_for(item):
        E, x = item
        pack = geometry.curvature_invariants(geometry.conformal_factor(sc.potential, E, x), blk.h)
        return [[E, *x, xi, pack.R, pack.boxR, pack.ricciSq, pack.riemannSq,
                 dewitt.coefficient_a1(pack.R, xi), dewitt.coefficient_a2(pack, xi)] for xi in xis]

    rows = [r for group in run.map(rows_for, plan) for r in group]
    run.tables["dewitt"] = (["E"] + [f"x{i}" for i in range(D)] +
                            ["xi", "R", "boxR", "ricciSq", "riemannSq", "a1", "a2"], rows)
    sixth = [r for r in rows if r[D + 1] == 1 / 6]
    if sixth:
        worst = max(abs(r[-2]) for r in sixth)
        run.check("dewitt.a1_sixth", "a1 vanishes at xi = 1/6", worst, 0.0, worst == 0.0)


def _density_points(sc: Scenario, blk):
    if blk.points is not None:
        return np.asarray(blk.points, dtype=float)
    g = blk.grid
    axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(g["lo"], g["hi"], g["n"])]
    return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)


def cmd_density(run: Run):
    sc, blk = run.sc, _require(run.sc, "density")
    pts = _density_points(sc, blk)
    rows = []
    for E in sc.energies_for(blk):
        rows.extend(run.map(lambda x, E=E: dens.density_sweep(sc.potential, E, [x], blk.order)[0], pts))
    header = [f"x{i}" for i in range(sc.dimension)] + ["E", "term0", "term1", "term2", "total", "regime"]
    run.tables["density"] = (header, [[*r.x, r.E, r.term(0), r.term(1), r.term(2), r.total, r.regime]
                                      for r in rows])
    worst = 0.0
    for r in rows:
        if r.regime == "forbidden":
            continue
        other = dens.density_from_resolvent(sc.potential, r.E, r.x, blk.order)
        for (_, a), (_, b) in zip(r.terms, other.terms):
            if a != b:
                worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    run.check("density.pipeline_identity", "resolvent route vs direct density, per-term relative", worst,
              blk.tolerance)


def _solve_oracle(sc: Scenario):
    o = sc.oracle
    try:
        return spectral.solve_1d(sc.potential, o.x_min, o.x_max, o.n_grid, o.n_states, o.richardson)
    except spectral.BoxLeakageError as exc:
        raise ConfigError("oracle.x_min", str(exc)) from None


def _smeared_exact(spec, x, E, eta):
    try:
        return spectral.local_density_smeared(spec, x, E, eta)
    except spectral.SpectralRangeError as exc:
        raise ConfigError("oracle.n_states", str(exc)) from None


def cmd_oracle(run: Run):
    sc = run.sc
    o = _require(sc, "oracle")
    spec = _solve_oracle(sc)
    best = spec.best_eigenvalues
    run.tables["oracle_eigenvalues"] = (["n", "E_n"], [[str(n), e] for n, e in enumerate(best)])
    idx = np.unique(np.linspace(0, len(spec.x) - 1, o.n_out).round().astype(int))
    xs = spec.x[idx]
    drows, srows = [], []
    for E in sc.energies_for(o):
        rho = _smeared_exact(spec, xs, E, o.eta)
        drows.extend([E, x, r] for x, r in zip(xs, rho))
        srows.append([E, o.eta, spectral.dos_smeared(spec, E, o.eta),
                      "true" if spectral.is_resolved(spec, E, o.eta) else "false"])
    run.tables["oracle_density"] = (["E", "x", "rho_exact"], drows)
    run.tables["oracle_dos"] = (["E", "eta", "dos", "smooth"], srows)
    if o.tolerance is not None:
        p = sc.potential
        w = float(np.atleast_1d(p.params["omega"])[0])
        exact = (np.arange(len(best)) + 0.5) * p.hbar * w
        err = float(np.max(np.abs(best - exact)))
        run.check("oracle.harmonic_levels", "max |E_n - (n + 1/2) hbar omega|", err, o.tolerance)


def cmd_compare(run: Run):
    sc = run.sc
    o = _require(sc, "oracle")
    c = sc.compare if sc.compare is not None else CompareBlock()
    eta = c.eta if c.eta is not None else o.eta
    spec = _solve_oracle(sc)
    V = np.array([evaluate(sc.potential, [x]).V for x in spec.x])
    vmin = float(V.min())
    rows = []
    for k, E in enumerate(sc.energies_for(c)):
        # harmonic case: |x| <= fraction * x_turn; in general E - V >= (1 - fraction^2)(E - Vmin)
        mask = (E - V) >= (1 - c.fraction**2) * (E - vmin)
        xs = spec.x[mask]
        if xs.size == 0:
            raise ConfigError(f"compare.energies[{k}]", "no grid points in the comparison region")
        exact = _smeared_exact(spec, xs, E, eta)
        sc_rows = run.map(lambda x, E=E: dens.smeared_density(sc.potential, E, [x], eta, order=c.order), xs)
        s0 = np.array([r.term(0) for r in sc_rows])
        st = np.array([r.total for r in sc_rows])
        rel = np.abs(s0 - exact) / np.abs(exact)
        rows.extend([E, x, ex, a, b, r] for x, ex, a, b, r in zip(xs, exact, s0, st, rel))
        l2_0 = float(np.sqrt(np.sum((s0 - exact) ** 2) * spec.dx))
        l2_t = float(np.sqrt(np.sum((st - exact) ** 2) * spec.dx))
        run.check(f"compare.E{fmt(E)}.order0", "max relative deviation of order-0 smeared density", rel.max(),
                  c.tolerance)
        run.check(f"compare.E{fmt(E)}.l2_ratio", "L2 residual with corrections / order 0 (<= 1)",
                  l2_t / l2_0 if l2_0 > 0 else 0.0, 1.0, l2_t <= l2_0)
    run.tables["compare"] = (["E", "x", "rho_exact", "rho_order0", "rho_corrected", "rel_order0"], rows)


def cmd_hydrogen(run: Run):
    blk = run.sc.hydrogen if run.sc.hydrogen is not None else HydrogenBlock()
    rows, lines = [], []
    for D in blk.dims:
        for pe in blk.p_e:
            rep = dens.hydrogen_momentum_case(D, pe, blk.n_points, seed=run.sc.seed)
            rows.extend([str(D), pe, str(i), rep.R, r, abs(r - rep.R) / abs(rep.R)] for i, r in enumerate(rep.R_fd))
            lines.append(f"{rep.statement}; xi in equation = {rep.xi_paper}, Weyl xi = {rep.xi_weyl}")
            run.check(f"hydrogen.D{D}.pE{fmt(pe)}", "FD curvature vs 2D(D-1)p_E^2 (relative)", rep.max_rel_error,
                      blk.tolerance)
    run.tables["hydrogen"] = (["D", "p_E", "point", "R_closed", "R_fd", "rel_err"], rows)
    run.texts["hydrogen_report.txt"] = "\n".join(lines) + "\n"


def _serialize(criteria) -> str:
    return json.dumps([_criterion_json(c) for c in criteria], sort_keys=True)


def cmd_validate(run: Run):
    crits = validation.run_all()
    run.criteria.extend(crits)
    # in-process reproducibility probe on a cheap deterministic subset
    subset = (validation.criterion_one_dimension, validation.criterion_pipeline, validation.criterion_free_gas)
    first = _serialize(validation.run_all(subset))
    second = _serialize(validation.run_all(subset))
    same = first == second
    run.check("13", "repeated evaluation reproduces byte-identical criterion records", 0.0 if same else 1.0, 0.0,
              same)
    run.tables["validate"] = (["id", "description", "value", "tolerance", "pass"],
                              [[c.id, c.description, c.value, c.tolerance, "true" if c.passed else "false"]
                               for c in run.criteria])


COMMANDS = {
    "geometry": cmd_geometry,
    "geodesic": cmd_geodesic,
    "dewitt": cmd_dewitt,
    "density": cmd_density,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "hydrogen": cmd_hydrogen,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------------------
# reporting


def _json_number(v: float):
    return None if math.isnan(v) else v


def _criterion_json(c: Criterion) -> dict:
    return {"id": c.id, "value": _json_number(c.value), "tolerance": c.tolerance, "pass": c.passed}


def version_string() -> str:
    return f"v{__version__}"


def output_dir(args_out, sc: Scenario) -> Path:
    out = args_out or os.environ.get("MAUPERTUIS_OUT") or sc.output or "maupertuis-out"
    return Path(out)


def write_reports(run: Run, subcommand: str, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in run.tables.items():
        write_csv(out / f"{name}.csv", header, rows)
    for name, text in run.texts.items():
        (out / name).write_text(text)
    summary = {
        "scenario": run.sc.name,
        "version": version_string(),
        "subcommand": subcommand,
        "criteria": [_criterion_json(c) for c in run.criteria],
    }
    path = out / f"{subcommand}_summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maupertuis", description="Maupertuis-metric geometry and semiclassical density")
    ap.add_argument("--version", action="version", version=version_string())
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", default=str(default_path()),
                       help="scenario JSON file (default: the shipped default scenario)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for per-point work")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        sc = load(args.scenario)
        run = Run(sc, args.threads)
        COMMANDS[args.subcommand](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = write_reports(run, args.subcommand, output_dir(args.out, sc))
    failures = [_criterion_json(c) for c in run.criteria if not c.passed]
    for c in run.criteria:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.id:<26s} value={c.value:.6g} tol={c.tolerance:.6g}")
    print(f"summary: {summary}")
    if failures:
        print(json.dumps({"failures": failures}), file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
