"""Compare the compiled and pure-Python kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each row reports the best-of-``repeat`` wall time per call for both
backends and the speedup. The last block swaps the backend under the
high-level QSVD and solver entry points.
"""
import argparse
import contextlib
import timeit

import numpy as np

from lrqd import _backend, _fallback
from lrqd.qmatrix import JACOBI_MAX_SWEEPS, JACOBI_TOL, QMatrix, complex_adjoint, qsvd
from lrqd.solver import ObservationMask, SolverConfig, run

try:
    from lrqd import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    number = 1
    # grow the loop count until one measurement takes ~50 ms
    while True:
        t = timeit.timeit(fn, number=number)
        if t > 0.05 or number >= 1000:
            break
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def jacobi_case(mod, n, rng):
    ac = complex_adjoint(QMatrix.random(n, n, rng))
    floor = (JACOBI_TOL * np.linalg.norm(ac)) ** 2

    def call():
        wt = np.ascontiguousarray(ac.T)
        vt = np.eye(ac.shape[1], dtype=np.complex128)
        mod.one_sided_jacobi(wt, vt, JACOBI_TOL, floor, JACOBI_MAX_SWEEPS)
    return call


def cholesky_case(mod, r, rng):
    b = QMatrix.random(r, 2 * r, rng)
    h = np.array((b @ b.H).planes)
    h[0] += np.eye(r)
    rhs = rng.standard_normal((4, r, 64))

    def call():
        lower = np.zeros_like(h)
        mod.qcholesky(np.array(h), lower)
        mod.qcholesky_solve(lower, np.array(rhs))
    return call


@contextlib.contextmanager
def using(mod):
    saved = {k: getattr(_backend, k) for k in ("one_sided_jacobi", "qcholesky", "qcholesky_solve")}
    for k in saved:
        setattr(_backend, k, getattr(mod, k))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(_backend, k, v)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller sizes only")
    args = parser.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    jac_sizes = (4, 8, 16) if args.quick else (4, 8, 16, 32)
    chol_sizes = (3, 5, 10) if args.quick else (3, 5, 10, 20)

    print(f"{'kernel':<28}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")

    def row(label, py, cy):
        print(f"{label:<28}{py * 1e3:>14.3f}{cy * 1e3:>14.3f}{py / cy:>9.1f}x")

    for n in jac_sizes:
        seed = int(rng.integers(1 << 31))
        py = _best(jacobi_case(_fallback, n, np.random.default_rng(seed)), args.repeat)
        cy = _best(jacobi_case(_kernels, n, np.random.default_rng(seed)), args.repeat)
        row(f"jacobi adjoint {2 * n}x{2 * n}", py, cy)
    for r in chol_sizes:
        seed = int(rng.integers(1 << 31))
        py = _best(cholesky_case(_fallback, r, np.random.default_rng(seed)), args.repeat)
        cy = _best(cholesky_case(_kernels, r, np.random.default_rng(seed)), args.repeat)
        row(f"cholesky+solve r={r}", py, cy)

    a = QMatrix.random(20, 15, rng)
    d = QMatrix.random(48, 3, rng) @ QMatrix.random(3, 48, rng)
    mask = ObservationMask.random(48, 48, 0.3, seed=0)
    cfg = SolverConfig(rank=3, max_iterations=20, track_rate=False)
    for label, fn in (("qsvd 20x15", lambda: qsvd(a)),
                      ("solver 48x48 r=3, 20 steps", lambda: run(d, mask, cfg))):
        times = []
        for mod in (_fallback, _kernels):
            with using(mod):
                times.append(_best(fn, args.repeat))
        row(label, *times)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
