"""Foreground MSE of the multi-level solver over eps_r for several omega values.

    python scripts/regularization_sweep.py --size 96 --seeds 0 1 2 3
"""

import argparse

import numpy as np

from fgest.sweep import EPS_R_GRID, OMEGA_GRID, SweepConfig, regularization_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=96)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args()

    config = SweepConfig(size=args.size, seeds=tuple(args.seeds), noise=args.noise,
                         eps_r=EPS_R_GRID, omega=OMEGA_GRID)
    curves = regularization_sweep(config)
    header = "eps_r," + ",".join(f"omega={w:g}" for w in config.omega)
    rows = [f"{e:g}," + ",".join(f"{curves[w][k]:.6f}" for w in config.omega)
            for k, e in enumerate(config.eps_r)]
    print(header)
    print("\n".join(rows))
    best = config.eps_r[int(np.argmin(curves[0.1]))] if 0.1 in curves else None
    if best is not None:
        print(f"# omega=0.1 minimum at eps_r={best:g}")
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(header + "\n" + "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
