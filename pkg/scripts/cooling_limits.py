"""Coldest Gibbs state reachable from a hot qutrit with and without catalysts."""

import argparse
import time

from thermocat.catalysis import cooling_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta-h", type=float, default=0.5)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--energies", type=float, nargs="+", default=[0.0, 0.4, 0.5])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--resolution", type=int, default=2)
    ap.add_argument("--mode", choices=("auto", "exact", "heuristic"), default="auto")
    args = ap.parse_args()

    t0 = time.perf_counter()
    res = cooling_scan(args.beta_h, args.beta, args.energies, args.dims, mode=args.mode, resolution=args.resolution)
    print(f"TO limit      {res.beta_to:.4f}")
    print(f"ETO limit     {res.beta_eto:.4f}")
    for d, dim in sorted(res.dims.items()):
        if d == 1:
            continue
        tag = "" if dim.exact else " (lower bound)"
        print(f"dim {d} best    {dim.best.beta:.4f}  c = {dim.best.catalyst.round(4).tolist()}{tag}")
        print(f"dim {d} worst   {dim.worst.beta:.4f}  c = {dim.worst.catalyst.round(4).tolist()}{tag}")
    print(f"# {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
