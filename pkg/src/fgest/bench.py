"""Runtime scaling harness: time both solvers over a ladder of image sizes."""

import csv
import math
import resource
import statistics
import sys
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .closedform import CfParams, cf_foreground_background
from .imagecore import resize
from .multilevel import MlParams, ml_foreground_background

DEFAULT_SIZES = (0.0625, 0.25, 1.0, 4.0)
METHODS = ("multilevel", "closedform")


@dataclass
class BenchRecord:
    width: int
    height: int
    megapixels: float
    method: str
    wall_time_s: Optional[float]
    repetitions: int
    time_stddev_s: Optional[float]
    peak_rss_bytes: Optional[int]
    status: str = "ok"
    note: str = ""


def _opt(cast, text):
    return None if text == "" else cast(text)


def write_csv(path_or_file, records):
    names = [f.name for f in fields(BenchRecord)]
    own = isinstance(path_or_file, str)
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.DictWriter(f, fieldnames=names)
        writer.writeheader()
        for rec in records:
            row = {k: ("" if v is None else (repr(v) if isinstance(v, float) else v))
                   for k, v in asdict(rec).items()}
            writer.writerow(row)
    finally:
        if own:
            f.close()


def read_csv(path):
    with open(path, newline="") as f:
        return [
            BenchRecord(
                width=int(row["width"]),
                height=int(row["height"]),
                megapixels=float(row["megapixels"]),
                method=row["method"],
                wall_time_s=_opt(float, row["wall_time_s"]),
                repetitions=int(row["repetitions"]),
                time_stddev_s=_opt(float, row["time_stddev_s"]),
                peak_rss_bytes=_opt(int, row["peak_rss_bytes"]),
                status=row["status"],
                note=row["note"],
            )
            for row in csv.DictReader(f)
        ]


def peak_rss_bytes():
    """Peak resident set size of this process, or None when unknown."""
    try:
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    except (OSError, ValueError):
        return None
    # kilobytes on Linux, bytes on macOS
    return int(peak) if sys.platform == "darwin" else int(peak) * 1024


def scaled_size(width, height, megapixels):
    scale = math.sqrt(megapixels * 1e6 / (width * height))
    return max(1, round(width * scale)), max(1, round(height * scale))


def _solver(method, ml_params, cf_params):
    if method == "multilevel":
        return lambda img, a: ml_foreground_background(img, a, ml_params)
    if method == "closedform":
        return lambda img, a: cf_foreground_background(img, a, cf_params)
    raise ValueError(f"unknown method {method!r}")


def time_call(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return times


def warm_up(methods, ml_params=MlParams(), cf_params=CfParams()):
    """Trigger JIT compilation so it is not billed to the first timed run."""
    img = np.full((8, 8, 3), 0.5)
    alpha = np.linspace(0, 1, 64).reshape(8, 8)
    for m in methods:
        _solver(m, ml_params, cf_params)(img, alpha)


def run_bench(image, alpha, methods=METHODS, sizes=DEFAULT_SIZES, reps=3,
              ml_params=MlParams(), cf_params=CfParams(), cf_max_megapixels=1.0,
              log=None):
    """Time each method at each size; one aggregated record per (size, method)."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    h, w = alpha.shape
    warm_up(methods, ml_params, cf_params)
    records = []
    for mp in sizes:
        sw, sh = scaled_size(w, h, mp)
        img_s = resize(image, sw, sh)
        alpha_s = resize(alpha, sw, sh)
        for method in methods:
            actual_mp = sw * sh / 1e6
            if method == "closedform" and actual_mp > cf_max_megapixels:
                records.append(BenchRecord(
                    sw, sh, actual_mp, method, None, reps, None, None,
                    status="skipped",
                    note=f"memory guard: {actual_mp:.3g} MP > {cf_max_megapixels:g} MP",
                ))
                continue
            solve = _solver(method, ml_params, cf_params)
            times = time_call(lambda: solve(img_s, alpha_s), reps)
            rec = BenchRecord(
                sw, sh, actual_mp, method,
                wall_time_s=statistics.fmean(times),
                repetitions=reps,
                time_stddev_s=statistics.stdev(times) if reps > 1 else 0.0,
                peak_rss_bytes=peak_rss_bytes(),
            )
            records.append(rec)
            if log is not None:
                log(f"{method:>11} {sw}x{sh} ({actual_mp:.3f} MP): "
                    f"{rec.wall_time_s:.3f} s +- {rec.time_stddev_s:.3f}")
    return records
