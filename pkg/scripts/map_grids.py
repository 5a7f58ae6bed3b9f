"""Plot data for the exterior map: offset curves and normal rays and their images.

Writes one CSV per curve through the ``grid`` subcommand.  Rendering is left
to any plotting tool (columns group, re_z, im_z, re_psi, im_psi, flag).
"""
import argparse
import json
import sys
from pathlib import Path

from extmap.cli import main as cli_main

CURVES = {
    "square": ({"family": "polygon",
                "vertices": [[0.5, -0.5], [0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5]]},
               ["--panels", "16", "--refine", "20"]),
    "ellipse2": ({"family": "ellipse", "a": 2}, ["--n", "128"]),
    "cassini1.25": ({"family": "cassini", "a": 1.25}, ["--n", "128"]),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("grids"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, (desc, opts) in CURVES.items():
        path = args.out / f"{name}.csv"
        code = cli_main(["grid", "--curve", json.dumps(desc), *opts, "--out", str(path)])
        print(f"{name}: {path} (exit {code})")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
