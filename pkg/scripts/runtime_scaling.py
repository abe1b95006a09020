"""Wall time of both solvers on synthetic composites over a ladder of sizes.

    python scripts/runtime_scaling.py --sizes 0.0625 0.25 1 --csv runtime.csv
"""

import argparse
import sys

from fgest import bench
from fgest.synthetic import random_composite


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=float, nargs="+", default=list(bench.DEFAULT_SIZES))
    ap.add_argument("--methods", nargs="+", default=list(bench.METHODS), choices=bench.METHODS)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--cf-max-megapixels", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args()

    # generate once at the largest size; the harness resizes down
    side = int((max(args.sizes) * 1e6) ** 0.5) + 1
    scene = random_composite(side, side, seed=args.seed)
    records = bench.run_bench(scene.image, scene.alpha, args.methods, args.sizes, args.reps,
                              cf_max_megapixels=args.cf_max_megapixels,
                              log=lambda m: print(m, file=sys.stderr))
    bench.write_csv(args.csv if args.csv else sys.stdout, records)


if __name__ == "__main__":
    main()
