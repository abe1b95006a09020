"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 solver failure.
"""

import argparse
import sys
import time

import numpy as np
import png

from . import bench, pngio
from .closedform import CfParams, ConvergenceError, assemble_system, solve_pcg
from .colorspace import GammaParams, prepare_ground_truth
from .imagecore import compose, compose_naive, solid_color
from .metrics import GradParams, evaluate
from .multilevel import MlParams, ml_foreground_background

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _nonneg(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _float_list(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _color(text):
    values = _float_list(text)
    if len(values) != 3 or not all(0 <= v <= 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected R,G,B in [0, 1], got {text!r}")
    return values


def _read_inputs(image_path, alpha_path, alpha_source):
    image = pngio.read_image(image_path)
    alpha = pngio.read_alpha(alpha_path, alpha_source)
    if image.shape[:2] != alpha.shape:
        raise UsageError(
            f"image {image_path} is {image.shape[1]}x{image.shape[0]} but alpha "
            f"{alpha_path} is {alpha.shape[1]}x{alpha.shape[0]}"
        )
    return image, alpha


def cmd_estimate(args):
    image, alpha = _read_inputs(args.image, args.alpha, args.alpha_source)
    h, w = alpha.shape
    t0 = time.perf_counter()
    if args.method == "multilevel":
        params = MlParams(omega=args.omega, eps_r=args.eps_r)
        fg, bg = ml_foreground_background(image, alpha, params)
        elapsed = time.perf_counter() - t0
        print(f"method=multilevel size={w}x{h} omega={params.omega:g} eps_r={params.eps_r:g}")
    else:
        params = CfParams(eps_cf=args.eps_cf, residual_tol=args.residual_tol)
        sol = solve_pcg(assemble_system(image, alpha, params), params)
        elapsed = time.perf_counter() - t0
        fg, bg = sol.fg, sol.bg
        print(f"method=closedform size={w}x{h} eps_cf={params.eps_cf:g} "
              f"residual_tol={params.residual_tol:g} preconditioner={sol.preconditioner}")
        print("iterations=" + ",".join(str(i) for i in sol.iterations))
        print("final_residual=" + ",".join(f"{r:.3e}" for r in sol.residuals))
    print(f"wall_time_s={elapsed:.4f}")
    pngio.write_png(args.out_fg, fg, args.bitdepth)
    if args.out_bg:
        pngio.write_png(args.out_bg, bg, args.bitdepth)
    return EXIT_OK


def cmd_compose(args):
    src = args.image if args.image is not None else args.fg
    fg = pngio.read_image(src)
    alpha = pngio.read_alpha(args.alpha, args.alpha_source)
    if fg.shape[:2] != alpha.shape:
        raise UsageError(f"{src} is {fg.shape[1]}x{fg.shape[0]} but alpha is "
                         f"{alpha.shape[1]}x{alpha.shape[0]}")
    h, w = alpha.shape
    if args.bg_color is not None:
        bg = solid_color(w, h, args.bg_color)
    else:
        bg = pngio.read_image(args.bg)
        if bg.shape[:2] != alpha.shape:
            raise UsageError(f"background {args.bg} is {bg.shape[1]}x{bg.shape[0]} "
                             f"but alpha is {w}x{h}")
    out = compose_naive(fg, bg, alpha) if args.naive else compose(fg, bg, alpha)
    pngio.write_png(args.out, out, args.bitdepth)
    return EXIT_OK


def cmd_metrics(args):
    est = pngio.read_image(args.est)
    gt = pngio.read_image(args.gt)
    alpha = pngio.read_alpha(args.alpha, args.alpha_source)
    for name, img in (("est", est), ("gt", gt)):
        if img.shape[:2] != alpha.shape:
            raise UsageError(f"{name} is {img.shape[1]}x{img.shape[0]} but alpha is "
                             f"{alpha.shape[1]}x{alpha.shape[0]}")
    report = evaluate(est, gt, alpha, GradParams(sigma=args.sigma))
    print(report)
    print(report.csv_header())
    print(report.csv_row())
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(report.csv_header() + "\n" + report.csv_row() + "\n")
    return EXIT_OK


def cmd_prep_dataset(args):
    fg_lin = pngio.read_image(args.fg_linear)
    img_lin = pngio.read_image(args.img_linear)
    img_srgb = pngio.read_image(args.img_srgb)
    fg_gt, img_input, fit = prepare_ground_truth(fg_lin, img_lin, img_srgb,
                                                 GammaParams(args.gamma))
    pngio.write_png(args.out_fg, fg_gt, 16)
    pngio.write_png(args.out_img, img_input, 16)
    with np.printoptions(precision=6, suppress=True):
        print("white point matrix M =")
        print(fit.M)
    print(f"residual={fit.residual:.6e}")
    return EXIT_OK


def cmd_bench(args):
    image, alpha = _read_inputs(args.image, args.alpha, args.alpha_source)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in bench.METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(bench.METHODS)}")
    records = bench.run_bench(
        image, alpha, methods, args.sizes, args.reps,
        cf_max_megapixels=args.cf_max_megapixels,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    if args.csv:
        bench.write_csv(args.csv, records)
    else:
        bench.write_csv(sys.stdout, records)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="fgest", description="Foreground/background color estimation for alpha matting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def alpha_source(p):
        p.add_argument("--alpha-source", choices=("gray-png", "alpha-channel"),
                       default="gray-png", help="where to read alpha from")

    def bitdepth(p):
        p.add_argument("--bitdepth", type=int, choices=(8, 16), default=16)

    p = sub.add_parser("estimate", help="estimate foreground (and background) colors")
    p.add_argument("--image", required=True)
    p.add_argument("--alpha", required=True)
    alpha_source(p)
    p.add_argument("--out-fg", required=True)
    p.add_argument("--out-bg")
    p.add_argument("--method", choices=("multilevel", "closedform"), default="multilevel")
    p.add_argument("--omega", type=_nonneg, default=MlParams.omega)
    p.add_argument("--eps-r", type=_positive, default=MlParams.eps_r)
    p.add_argument("--eps-cf", type=_positive, default=CfParams.eps_cf)
    p.add_argument("--residual-tol", type=_positive, default=CfParams.residual_tol)
    bitdepth(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compose", help="composite a foreground onto a new background")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fg")
    src.add_argument("--image", help="raw input image (use with --naive)")
    p.add_argument("--alpha", required=True)
    alpha_source(p)
    bg = p.add_mutually_exclusive_group(required=True)
    bg.add_argument("--bg")
    bg.add_argument("--bg-color", type=_color, help="solid background R,G,B in [0, 1]")
    p.add_argument("--out", required=True)
    p.add_argument("--naive", action="store_true",
                   help="composite the raw image instead of an estimated foreground")
    bitdepth(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("metrics", help="SAD, MSE and GRAD over the translucent region")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--alpha", required=True)
    alpha_source(p)
    p.add_argument("--sigma", type=_positive, default=GradParams.sigma)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("prep-dataset", help="white-balance and gamma-correct linear ground truth")
    p.add_argument("--fg-linear", required=True)
    p.add_argument("--img-linear", required=True)
    p.add_argument("--img-srgb", required=True)
    p.add_argument("--out-fg", required=True)
    p.add_argument("--out-img", required=True)
    p.add_argument("--gamma", type=_positive, default=GammaParams.gamma)
    p.set_defaults(func=cmd_prep_dataset)

    p = sub.add_parser("bench", help="runtime over a ladder of image sizes")
    p.add_argument("--image", required=True)
    p.add_argument("--alpha", required=True)
    alpha_source(p)
    p.add_argument("--methods", default="multilevel,closedform")
    p.add_argument("--sizes", type=_float_list, default=list(bench.DEFAULT_SIZES),
                   help="megapixels, comma separated")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--csv")
    p.add_argument("--cf-max-megapixels", type=_positive, default=1.0,
                   help="skip closedform above this size")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "reps", 1) < 1:
        parser.error("--reps must be >= 1")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"fgest: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, png.Error) as e:
        print(f"fgest: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"fgest: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as e:
        print(f"fgest: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
