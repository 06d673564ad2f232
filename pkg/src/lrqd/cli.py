"""Command-line front end: ``lrqd inpaint | factor | check``.

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 solver
numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import BACKEND, __version__
from .errors import NumericalError, RankError
from .imaging import (
    ImageFormatError,
    decode,
    encode,
    make_mask,
    psnr,
    read_png,
    real_plane_leakage,
    write_png,
    ColorImage,
)
from .qmatrix import frob_norm, low_rank_factor, matmul, truncated_factor
from .solver import NUMERIC_FAILURE, SolverConfig, run

log = logging.getLogger("lrqd")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

DEFAULT_MAX_SIZE = 1024


@dataclass
class InpaintJob:
    input: Path
    output: Path
    rank: int
    mask_ratio: float | None = None
    mask_file: Path | None = None
    seed: int = 0
    lam: float | None = None
    tol: float = 1e-8
    max_iters: int = 500
    report: Path | None = None
    ground_truth: Path | None = None
    max_size: int = DEFAULT_MAX_SIZE

    def validate(self):
        if (self.mask_ratio is None) == (self.mask_file is None):
            raise ValueError("exactly one of --mask-ratio and --mask-file is required")
        if self.mask_ratio is not None and not 0.0 <= self.mask_ratio < 1.0:
            raise ValueError(f"--mask-ratio must lie in [0, 1), got {self.mask_ratio}")

    @property
    def report_path(self) -> Path:
        if self.report is not None:
            return Path(self.report)
        out = Path(self.output)
        return out.with_name(out.stem + ".report.json")


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def build_summary(job, report, image, mask, leakage, quality):
    rate = report.rate
    return {
        "config": {
            "rank": job.rank,
            "lambda": _num(report.lam),
            "lambda0": _num(report.lam0),
            "tol": job.tol,
            "max_iters": job.max_iters,
            "seed": job.seed,
            "mask_ratio": job.mask_ratio,
            "mask_file": None if job.mask_file is None else str(job.mask_file),
        },
        "input": str(job.input),
        "output": str(job.output),
        "width": image.width,
        "height": image.height,
        "observed_pixels": mask.observed_count,
        "missing_pixels": mask.complement_count,
        "status": report.status,
        "message": report.message,
        "iterations": report.iterations,
        "initial_objective": _num(report.initial_objective),
        "final_objective": _num(report.final_objective),
        "stationarity_residual": _num(report.final_residual),
        "squared_step_sum": _num(report.squared_step_sum()),
        "min_descent_slack": _num(min((r.descent_slack for r in report.records), default=0.0)),
        "rate": None if rate is None else {
            "sigma": _num(rate.sigma),
            "beta": _num(rate.beta),
            "r2": _num(rate.r2),
            "n_points": rate.n_points,
            "degenerate": rate.degenerate,
        },
        "real_plane_leakage": {"count": leakage[0], "mass": _num(leakage[1])},
        "psnr": _num(quality),
    }


def write_report(path: Path, summary: dict, trace_csv: str) -> Path:
    path = Path(path)
    trace = path.with_name(path.stem + ".trace.csv")
    summary = dict(summary, trace=trace.name)
    path.write_text(json.dumps(summary, indent=2) + "\n")
    trace.write_text(trace_csv)
    return trace


def run_job(job: InpaintJob, out=print) -> int:
    """Inpaint one image; returns the process exit code."""
    try:
        job.validate()
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE

    try:
        img = read_png(job.input, job.max_size)
        mask = make_mask((img.height, img.width), ratio=job.mask_ratio, seed=job.seed,
                         path=job.mask_file)
        truth = read_png(job.ground_truth, job.max_size) if job.ground_truth else None
    except (OSError, ImageFormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE

    d = encode(img)
    cfg = SolverConfig(rank=job.rank, lam=job.lam, max_iterations=job.max_iters,
                       tol=job.tol, seed=job.seed, track_rate=True)
    try:
        cfg.validate(*d.shape)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE

    state, report = run(d, mask, cfg)

    observed = mask.observed[..., None]
    filled = decode(state.X).to_uint8()
    result = np.where(observed, img.to_uint8(), filled)
    leakage = real_plane_leakage(state.X, mask.complement)
    quality = psnr(truth, ColorImage.from_uint8(result)) if truth is not None else None
    summary = build_summary(job, report, img, mask, leakage, quality)

    try:
        if report.status != NUMERIC_FAILURE:
            write_png(job.output, result)
        write_report(job.report_path, summary, report.trace_csv())
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO

    line = (f"{report.status}: iterations={report.iterations} "
            f"objective={report.final_objective:.6g} "
            f"residual={report.final_residual:.3g}")
    if quality is not None:
        line += f" psnr={'inf' if math.isinf(quality) else f'{quality:.2f}'}dB"
    out(line)
    if report.status == NUMERIC_FAILURE:
        log.error("solver failed: %s", report.message)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_inpaint(args) -> int:
    job = InpaintJob(
        input=args.input,
        output=args.output,
        rank=args.rank,
        mask_ratio=args.mask_ratio,
        mask_file=args.mask_file,
        seed=args.seed,
        lam=args.lam,
        tol=args.tol,
        max_iters=args.max_iters,
        report=args.report,
        ground_truth=args.ground_truth,
        max_size=args.max_size,
    )
    return run_job(job)


def _cmd_factor(args) -> int:
    try:
        img = read_png(args.input, args.max_size)
    except (OSError, ImageFormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    x = encode(img)
    if not 1 <= args.rank <= min(x.shape):
        log.error("--rank must lie in [1, %d]", min(x.shape))
        return EXIT_USAGE
    try:
        a, b = truncated_factor(x, args.rank) if args.truncate else low_rank_factor(x, args.rank)
    except RankError as exc:
        log.error("%s (use --truncate for a best rank-%d approximation)", exc, args.rank)
        return EXIT_USAGE
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    err = frob_norm(matmul(a, b) - x) / max(frob_norm(x), 1e-300)
    print(f"A: {a.rows}x{a.cols}  B: {b.rows}x{b.cols}  relative_error={err:.3e}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .checks import run_checks

    print(f"backend: {BACKEND}")
    return EXIT_OK if run_checks(seed=args.seed, scale=args.scale) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrqd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inpaint", help="fill missing pixels of an RGB PNG")
    p.add_argument("input", type=Path)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--rank", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--mask-ratio", type=float, help="fraction of pixels to drop at random")
    g.add_argument("--mask-file", type=Path, help="grayscale PNG, zero marks a missing pixel")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="proximal weight (default scales with the observed data)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ground-truth", type=Path)
    p.add_argument("--report", type=Path)
    p.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
    p.set_defaults(func=_cmd_inpaint)

    p = sub.add_parser("factor", help="low-rank factorization of a fully observed image")
    p.add_argument("input", type=Path)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--truncate", action="store_true",
                   help="keep the leading singular triplets instead of requiring exact rank")
    p.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
    p.set_defaults(func=_cmd_factor)

    p = sub.add_parser("check", help="run invariant checks on random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="multiplier on trial counts")
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="lrqd: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
