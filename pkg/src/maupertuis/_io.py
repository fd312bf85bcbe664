"""Shared number formatting for CSV/JSON reports."""
from __future__ import annotations

import csv
import math


def fmt(v) -> str:
    """17 significant digits, '.' decimal, no negative zero."""
    v = float(v)
    if v == 0.0:
        return "0"
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\r\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([c if isinstance(c, str) else fmt(c) for c in row])
