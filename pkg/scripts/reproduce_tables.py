"""Sup-norm boundary map errors for the ellipse and Cassini families.

Prints both tables in the published layout and, with --out, writes one CSV
per family (rows n, columns curve parameter).
"""
import argparse
import csv
import sys
from pathlib import Path

from extmap.curve import make_cassini, make_ellipse
from extmap.verify import TABLE_N, convergence_study, tables_layout

FAMILIES = {
    "ellipse": (make_ellipse, (1.2, 1.5, 2, 3, 5, 10, 20)),
    "cassini": (make_cassini, (5, 2, 1.25, 1.11, 1.0101, 1.001001)),
}


def cell(x):
    return "---" if x is None else f"{x:.1e}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=sorted(FAMILIES), action="append")
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--out", type=Path, help="directory for CSV output")
    args = ap.parse_args(argv)
    for fam in args.family or list(FAMILIES):
        make, params = FAMILIES[fam]
        reports = [convergence_study(make(a), n_list=TABLE_N, jobs=args.jobs) for a in params]
        table = tables_layout(reports)
        cols = list(table["columns"])
        print(f"\n{fam}")
        print("   n  " + "".join(f"{'a=' + c:>12}" for c in cols))
        for i, n in enumerate(table["n"]):
            print(f"{n:4d}  " + "".join(f"{cell(table['columns'][c][i]):>12}" for c in cols))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            with open(args.out / f"{fam}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["n"] + cols)
                for i, n in enumerate(table["n"]):
                    w.writerow([n] + ["" if table["columns"][c][i] is None
                                      else format(table["columns"][c][i], ".17g") for c in cols])
    return 0


if __name__ == "__main__":
    sys.exit(main())
