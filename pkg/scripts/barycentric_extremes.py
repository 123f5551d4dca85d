"""Extreme points of the TO, ETO and MTO sets of a qutrit, in barycentric coordinates."""

import argparse
import csv
import sys

import numpy as np

from thermocat.core import ThermalContext, barycentric
from thermocat.reach import eto_extreme_points, mto_extreme_candidates, to_extreme_points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--energies", type=float, nargs=3, default=[0.0, 0.2, 0.5])
    ap.add_argument("--state", type=float, nargs=3, default=[0.35, 0.55, 0.1])
    args = ap.parse_args()

    ctx = ThermalContext(np.array(args.energies))
    p = ctx.check(args.state)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["class", "x", "y", "p1", "p2", "p3", "sequence"])
    out.writerow(["source", *barycentric(p), *p, ""])
    out.writerow(["gibbs", *barycentric(ctx.gibbs), *ctx.gibbs, ""])
    for rset in (to_extreme_points(p, ctx), eto_extreme_points(p, ctx), mto_extreme_candidates(p, ctx)):
        for i, v in enumerate(rset.vertices):
            out.writerow([rset.kind, *np.round(barycentric(v), 6), *np.round(v, 6), rset.describe(i)])


if __name__ == "__main__":
    main()
