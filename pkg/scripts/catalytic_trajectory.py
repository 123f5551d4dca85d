"""Free energies along a catalytic swap sequence that lowers the ground population.

The optimum for the given catalyst is decomposed into swap sequences and
merged into a single sequence with partial swaps; every step and the
within-swap samples are written as CSV.
"""

import argparse
import csv
import sys

import numpy as np

from thermocat.catalysis import (
    ALPHAS,
    CompositeContext,
    ceto_set_fixed_catalyst,
    composite_beta_order,
    optimal_qubit_catalyst_c1,
    recombine,
    tensor,
    trajectory_report,
)
from thermocat.core import ThermalContext


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--energies", type=float, nargs=3, default=[0.0, 0.2, 0.5])
    ap.add_argument("--state", type=float, nargs=3, default=[0.35, 0.55, 0.1])
    ap.add_argument("--c1", type=float, default=None, help="catalyst ground population (default: closed form)")
    ap.add_argument("--samples", action="store_true", help="also write the within-swap samples")
    args = ap.parse_args()

    ctx = ThermalContext(np.array(args.energies))
    p = ctx.check(args.state)
    c1 = optimal_qubit_catalyst_c1(p, ctx) if args.c1 is None else args.c1
    c = np.array([c1, 1 - c1])
    cc = CompositeContext.degenerate(ctx, 2)
    x = tensor(p, c, cc)
    cset = ceto_set_fixed_catalyst(p, c, cc)
    opt = cset.min_level(0)
    seqs = [cset.composite.sequence(i) for i in opt.certificate.indices]
    rec = recombine(seqs, x, tensor(opt.state, c, cc), cc.ctx, tol=1e-8)
    if rec is None:
        sys.exit("could not merge the supporting sequences")
    print(f"# catalyst {c.round(6).tolist()}, composite order {composite_beta_order(x, cc)[1]}")
    print(f"# sequence {rec.sequence.notation(cc.labels)}")
    record = trajectory_report(x, rec.sequence, cc)
    out = csv.writer(sys.stdout, lineterminator="\n")
    parts = ("system", "catalyst", "total")
    out.writerow(["kind", "position", "process"] + [f"dF{a:g}_{s}" for s in parts for a in ALPHAS] + ["mutual_information"])
    rows = [("step", s) for s in record.steps]
    if args.samples:
        rows += [("sample", s) for s in record.samples]
    for kind, s in rows:
        fe = [round(s.free_energy[part][a], 10) for part in parts for a in ALPHAS]
        out.writerow([kind, round(s.position, 6), s.label, *fe, round(s.mutual_information, 12)])


if __name__ == "__main__":
    main()
