"""Compare the multi-level and closed-form solvers (and the raw image) on synthetic composites.

    python scripts/compare_solvers.py --size 128 --seeds 0 1 2 --noise 0.01
"""

import argparse
import time

import numpy as np

from fgest.closedform import CfParams, cf_cost, cf_foreground_background
from fgest.metrics import evaluate
from fgest.multilevel import ml_foreground_background
from fgest.synthetic import random_composite


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--noise", type=float, default=0.0)
    args = ap.parse_args()

    eps = CfParams().eps_cf
    print("seed,method,sad,mse,grad,cost,time_s")
    totals = {}
    for seed in args.seeds:
        c = random_composite(args.size, args.size, seed=seed, noise=args.noise)
        for name, solve in (("raw", lambda i, a: (i, i)),
                            ("multilevel", ml_foreground_background),
                            ("closedform", cf_foreground_background)):
            t0 = time.perf_counter()
            fg, bg = solve(c.image, c.alpha)
            elapsed = time.perf_counter() - t0
            r = evaluate(fg, c.fg, c.alpha)
            cost = cf_cost(c.image, c.alpha, fg, bg, eps)
            totals.setdefault(name, []).append((r.sad, r.mse, r.grad))
            print(f"{seed},{name},{r.sad:.4f},{r.mse:.4f},{r.grad:.4f},{cost:.4f},{elapsed:.3f}")
    print("# mean over seeds (sad, mse, grad)")
    for name, vals in totals.items():
        print(f"# {name:>11}: " + ", ".join(f"{v:.4f}" for v in np.mean(vals, axis=0)))


if __name__ == "__main__":
    main()
