"""Acceptance criteria 1-13, one test each.

Every test appends a PASS/FAIL line (value, tolerance, runtime) that is
printed in the terminal summary.  Tolerances live in maupertuis.validation;
runtime limits are checked here.
"""
import time

import pytest

from maupertuis import cli
from maupertuis import validation as v

CASES = [
    ("1", v.criterion_curvature_two_path, 10.0),
    ("2", v.criterion_one_dimension, None),
    ("3", v.criterion_hydrogen, 5.0),
    ("4", v.criterion_yamabe, None),
    ("5", v.criterion_geodesic_newton, 5.0),
    ("6", v.criterion_eikonal, None),
    ("7", v.criterion_dewitt, None),
    ("8", v.criterion_mv, None),
    ("9", v.criterion_pipeline, None),
    ("10", v.criterion_free_gas, None),
    ("11", v.criterion_integrated_dos, None),
    ("12", v.criterion_semiclassical_vs_exact, 30.0),
]


def _line(c, elapsed):
    return (f"criterion {c.id:<4s} {'PASS' if c.passed else 'FAIL'}  value={c.value:.6g}  "
            f"tolerance={c.tolerance:.6g}  ({elapsed:.2f} s)  {c.description}")


@pytest.mark.parametrize("number,check,limit", CASES, ids=[f"criterion_{n}" for n, _, _ in CASES])
def test_criterion(number, check, limit, acceptance_log):
    t0 = time.perf_counter()
    results = check()
    elapsed = time.perf_counter() - t0
    for c in results:
        acceptance_log.append(_line(c, elapsed))
    if limit is not None:
        acceptance_log.append(f"criterion {number:<4s} {'PASS' if elapsed < limit else 'FAIL'}  "
                              f"runtime {elapsed:.2f} s < {limit:g} s")
    failed = [c for c in results if not c.passed]
    assert not failed, failed
    if limit is not None:
        assert elapsed < limit


def test_criterion_13_validate_is_byte_reproducible(tmp_path, acceptance_log):
    codes = [cli.main(["validate", "--out", str(tmp_path / d)]) for d in ("a", "b")]
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = files == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    acceptance_log.append(f"criterion 13   {'PASS' if same else 'FAIL'}  two validate runs byte-identical "
                          f"({', '.join(files)}); exit codes {codes}")
    assert same
    assert codes == [0, 0]
