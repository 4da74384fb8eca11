#!/usr/bin/env python3
"""Recompute summary.csv from records.csv and compare field by field.

Usage: verify_summary.py RECORDS_CSV SUMMARY_CSV

Exit status 0 if every field matches exactly, 1 otherwise.
"""

import csv
import math
import sys


def fmt(x):
    return "%.17g" % x


def quantile(sorted_values, p):
    h = (len(sorted_values) - 1) * p
    lo = math.floor(h)
    if lo + 1 >= len(sorted_values):
        return sorted_values[-1]
    a, b = sorted_values[lo], sorted_values[lo + 1]
    return a + (h - lo) * (b - a)


def summarize(records, methods):
    rows = []
    for m in methods:
        errors, failures, non_min = [], 0, 0
        for r in records:
            if r["method"] != m:
                continue
            if r["status"] != "ok":
                failures += 1
                continue
            errors.append(float(r["reconstruction_error"]))
            if r["min_phase"] != "true":
                non_min += 1
        errors.sort()
        row = {"method": m, "count": str(len(errors)), "failures": str(failures)}
        if errors:
            q1, q3 = quantile(errors, 0.25), quantile(errors, 0.75)
            iqr = q3 - q1
            lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
            row.update(min=fmt(errors[0]), q1=fmt(q1), median=fmt(quantile(errors, 0.5)), q3=fmt(q3),
                       max=fmt(errors[-1]), outliers=str(sum(1 for e in errors if e < lo or e > hi)))
        else:
            row.update(min="", q1="", median="", q3="", max="", outliers="0")
        row["non_min_phase"] = str(non_min)
        rows.append(row)
    return rows


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    with open(argv[1], newline="") as f:
        records = list(csv.DictReader(f))
    with open(argv[2], newline="") as f:
        emitted = list(csv.DictReader(f))
    methods = [row["method"] for row in emitted]
    ok = True
    for want, got in zip(summarize(records, methods), emitted):
        for key, value in want.items():
            if got.get(key) != value:
                print(f"{want['method']}.{key}: emitted {got.get(key)!r}, recomputed {value!r}")
                ok = False
    if len(emitted) != len(set(methods)):
        print("duplicate methods in summary")
        ok = False
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
