#!/usr/bin/env python3
"""Solve exported fair-independent-set LP files with SciPy's MILP solver.

Usage: check_lp.py FILE.lp [FILE.lp ...]

Prints one line per file, "<path> yes" or "<path> no", where "yes" means the
optimum reaches k (read from the `card` row). Only the subset of the LP
format written by `fairdiv::lp` is understood.
"""

import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

ROW = re.compile(r"^\s*(\w+):(.*?)(<=|>=|=)\s*(-?\d+)\s*$")


def logical_lines(text):
    lines = []
    for raw in text.splitlines():
        if raw.startswith("\\"):
            continue
        if raw.startswith("   +") and lines:
            lines[-1] += " +" + raw[4:]
        else:
            lines.append(raw)
    return lines


def terms(expr):
    out = []
    for term in expr.split("+"):
        parts = term.split()
        if not parts:
            continue
        coef, name = (float(parts[0]), parts[1]) if len(parts) == 2 else (1.0, parts[0])
        out.append((coef, name))
    return out


def parse(text):
    section = None
    objective, rows, binaries = [], [], []
    for line in logical_lines(text):
        head = line.strip()
        if head in ("Maximize", "Subject To", "Binary", "End"):
            section = head
            continue
        if section == "Maximize":
            objective = terms(head.split(":", 1)[1])
        elif section == "Subject To":
            m = ROW.match(line)
            if not m:
                raise ValueError(f"cannot parse row: {line!r}")
            rows.append((m.group(1), terms(m.group(2)), m.group(3), float(m.group(4))))
        elif section == "Binary":
            binaries.extend(head.split())
    return objective, rows, binaries


def solve(text):
    objective, rows, binaries = parse(text)
    index = {name: i for i, name in enumerate(binaries)}
    c = np.zeros(len(binaries))
    for coef, name in objective:
        c[index[name]] -= coef
    a = np.zeros((len(rows), len(binaries)))
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    k = None
    for r, (label, row_terms, sense, rhs) in enumerate(rows):
        for coef, name in row_terms:
            a[r, index[name]] += coef
        if sense in ("<=", "="):
            hi[r] = rhs
        if sense in (">=", "="):
            lo[r] = rhs
        if label == "card":
            k = rhs
    result = milp(
        c,
        constraints=LinearConstraint(a, lo, hi),
        integrality=np.ones(len(binaries)),
        bounds=Bounds(0, 1),
    )
    if result.status == 2:
        return False
    if result.status != 0:
        raise RuntimeError(result.message)
    return round(-result.fun) >= k


def main(paths):
    for path in paths:
        with open(path) as f:
            print(path, "yes" if solve(f.read()) else "no")


if __name__ == "__main__":
    main(sys.argv[1:])
