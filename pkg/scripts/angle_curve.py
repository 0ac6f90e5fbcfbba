"""Grid refinement study of the Friedrichs cosine for the bundled two-subspace example.

Prints, for each grid size, the grid maximum of the cosine next to
cos(pi/M) and the closedness verdict, and writes the table as CSV.

    python scripts/angle_curve.py --grids 16 64 256 512 2048 --out angle_refinement.csv
"""

import argparse
import csv
import math
import time

from fsis.config import Tolerances
from fsis.fibers import midpoint_grid
from fsis.report import format_number
from fsis.scenario import load_scenario
from fsis.subspaces import SubspacePair, friedrichs_angle


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grids", type=int, nargs="+", default=[16, 64, 256, 512, 1024])
    parser.add_argument("--close-eps", type=float, default=1e-4)
    parser.add_argument("--out", default=None, help="CSV output path")
    args = parser.parse_args()

    sc = load_scenario("example6")
    pair = SubspacePair(sc.subspace("U"), sc.subspace("V"))
    tol = Tolerances(close_eps=args.close_eps)
    rows = []
    print(f"{'M':>6} {'grid max c':>20} {'cos(pi/M)':>20} {'verdict':>10} {'sec':>6}")
    for M in args.grids:
        t0 = time.perf_counter()
        rep = friedrichs_angle(pair, midpoint_grid(1, M), tol)
        dt = time.perf_counter() - t0
        ref = math.cos(math.pi / M)
        rows.append((M, rep.c, ref, str(rep.verdict)))
        print(f"{M:>6} {rep.c:>20.16f} {ref:>20.16f} {str(rep.verdict):>10} {dt:>6.2f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["M", "grid_max_cosine", "cos_pi_over_M", "verdict"])
            for M, c, ref, v in rows:
                w.writerow([M, format_number(c), format_number(ref), v])


if __name__ == "__main__":
    main()
