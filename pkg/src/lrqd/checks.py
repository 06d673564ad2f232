"""Quick invariant checks on random instances, run by ``lrqd check``."""
from __future__ import annotations

import numpy as np

from . import quaternion as qt
from .gradient import finite_difference_gradient, grad_left_quadratic, grad_right_quadratic
from .qmatrix import (
    QMatrix,
    complex_adjoint,
    conj_transpose,
    frob_norm,
    from_complex_adjoint,
    hpd_solve,
    low_rank_factor,
    matmul,
    qsvd,
    rank,
)
from .solver import ObservationMask, SolverConfig, run


def _rand_q(rng):
    return qt.Quaternion(*rng.standard_normal(4))


def check_algebra(rng, trials):
    worst = 0.0
    for _ in range(trials):
        a, b, c = _rand_q(rng), _rand_q(rng), _rand_q(rng)
        lhs, rhs = (a * b) * c, a * (b * c)
        worst = max(worst, qt.modulus(lhs - rhs) / qt.modulus(lhs))
        worst = max(worst, abs(qt.modulus(a * b) - qt.modulus(a) * qt.modulus(b))
                    / qt.modulus(a * b))
        worst = max(worst, qt.modulus(qt.conj(a * b) - qt.conj(b) * qt.conj(a))
                    / qt.modulus(a * b))
    return worst <= 1e-12, f"max relative defect {worst:.2e}"


def check_qsvd(rng, trials):
    worst = 0.0
    for _ in range(trials):
        m, n = rng.integers(1, 12, size=2)
        a = QMatrix.random(int(m), int(n), rng)
        u, s, v = qsvd(a)
        sig = np.zeros((4, m, n))
        k = len(s)
        sig[0, :k, :k] = np.diag(s)
        rec = frob_norm(matmul(matmul(u, QMatrix(sig)), conj_transpose(v)) - a) / frob_norm(a)
        un = frob_norm(matmul(conj_transpose(u), u) - QMatrix.eye(int(m)))
        vn = frob_norm(matmul(conj_transpose(v), v) - QMatrix.eye(int(n)))
        worst = max(worst, rec, un, vn)
    return worst <= 1e-10, f"max reconstruction/unitarity defect {worst:.2e}"


def check_adjoint(rng, trials):
    worst = 0.0
    for _ in range(trials):
        m, r, n = (int(x) for x in rng.integers(1, 8, size=3))
        a, b = QMatrix.random(m, r, rng), QMatrix.random(r, n, rng)
        lhs = complex_adjoint(matmul(a, b))
        rhs = complex_adjoint(a) @ complex_adjoint(b)
        worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
        if from_complex_adjoint(complex_adjoint(a)) != a:
            return False, "adjoint round trip is not exact"
    return worst <= 1e-12, f"max homomorphism defect {worst:.2e}"


def check_rank(rng, trials):
    for _ in range(trials):
        m, n = (int(x) for x in rng.integers(4, 12, size=2))
        r = int(rng.integers(1, min(m, n)))
        a, b = QMatrix.random(m, r, rng), QMatrix.random(r, n, rng)
        x = matmul(a, b)
        if rank(x) > min(rank(a), rank(b), r):
            return False, "rank(AB) exceeded the factor ranks"
        fa, fb = low_rank_factor(x, r)
        err = frob_norm(matmul(fa, fb) - x) / frob_norm(x)
        if err > 1e-8:
            return False, f"low-rank factor round trip {err:.2e}"
    return True, "rank laws and factor round trip hold"


def check_gradients(rng, trials):
    worst = 0.0
    for _ in range(trials):
        m, r, n = (int(x) for x in rng.integers(1, 5, size=3))
        x, b, c = QMatrix.random(m, r, rng), QMatrix.random(r, n, rng), QMatrix.random(m, n, rng)
        g = grad_left_quadratic(x, b, c)
        fd = finite_difference_gradient(lambda y: 0.5 * frob_norm(matmul(y, b) + c) ** 2, x)
        worst = max(worst, frob_norm(g - fd) / max(frob_norm(g), 1e-300))
        a, y, c2 = QMatrix.random(n, m, rng), QMatrix.random(m, r, rng), QMatrix.random(n, r, rng)
        g = grad_right_quadratic(a, y, c2)
        fd = finite_difference_gradient(lambda z: 0.5 * frob_norm(matmul(a, z) + c2) ** 2, y)
        worst = max(worst, frob_norm(g - fd) / max(frob_norm(g), 1e-300))
    return worst <= 1e-6, f"max finite-difference mismatch {worst:.2e}"


def check_hpd(rng, trials):
    worst = 0.0
    for _ in range(trials):
        r, n = int(rng.integers(1, 6)), int(rng.integers(1, 9))
        b = QMatrix.random(r, n, rng)
        m = matmul(b, conj_transpose(b))
        m = 0.5 * (m + conj_transpose(m))
        rhs = QMatrix.random(3, r, rng)
        y = hpd_solve(m, rhs, 0.5, side="right")
        res = frob_norm(matmul(y, m + 0.5 * QMatrix.eye(r)) - rhs) / frob_norm(rhs)
        worst = max(worst, res)
    return worst <= 1e-10, f"max solve residual {worst:.2e}"


def check_descent(rng, trials):
    for t in range(trials):
        m, n = (int(x) for x in rng.integers(6, 24, size=2))
        r = int(rng.integers(1, min(m, n)))
        d = QMatrix.random(m, n, rng)
        mask = ObservationMask.random(m, n, 0.3, seed=t)
        _, rep = run(d, mask, SolverConfig(rank=r, max_iterations=60, seed=t, track_rate=False))
        tol = 1e-10 * (1.0 + rep.initial_objective)
        if any(rec.descent_slack < -tol for rec in rep.records):
            return False, "descent inequality violated"
        if rep.squared_step_sum() > 2.0 / rep.lam0 * rep.initial_objective + 1e-8:
            return False, "step summability bound violated"
    return True, "descent and summability hold"


SUITES = [
    ("algebra", check_algebra, 200),
    ("adjoint", check_adjoint, 20),
    ("qsvd", check_qsvd, 10),
    ("rank", check_rank, 10),
    ("gradient", check_gradients, 5),
    ("hpd_solve", check_hpd, 20),
    ("descent", check_descent, 3),
]


def run_checks(seed=0, scale=1.0, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn, trials in SUITES:
        passed, detail = fn(rng, max(1, int(trials * scale)))
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name:<10} {detail}")
    return ok
