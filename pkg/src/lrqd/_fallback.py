"""Pure-Python kernels, used when the compiled extension is unavailable.

Each function mirrors the signature of its counterpart in ``_kernels.pyx``
and mutates its array arguments in place.
"""
import math

import numpy as np

name = "python"


def one_sided_jacobi(wt, vt, tol, floor, max_sweeps):
    """Orthogonalize the rows of ``wt`` with complex plane rotations.

    ``wt`` holds the columns of the matrix as rows; ``vt`` accumulates the
    same rotations. Returns the number of sweeps used, or -1 when the sweep
    limit was reached before convergence.
    """
    ncol = wt.shape[0]
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        for p in range(ncol - 1):
            wp = wt[p]
            for q in range(p + 1, ncol):
                wq = wt[q]
                a = np.vdot(wp, wp).real
                b = np.vdot(wq, wq).real
                c = np.vdot(wp, wq)
                ac = abs(c)
                if ac <= floor or ac <= tol * math.sqrt(a * b):
                    continue
                rotated += 1
                phase = c / ac
                zeta = (b - a) / (2.0 * ac)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                e_m = sn * phase.conjugate()
                e_p = sn * phase
                new_p = cs * wp - e_m * wq
                wt[q] = e_p * wp + cs * wq
                wt[p] = new_p
                vp = vt[p]
                vq = vt[q]
                new_vp = cs * vp - e_m * vq
                vt[q] = e_p * vp + cs * vq
                vt[p] = new_vp
                wp = wt[p]
        if rotated == 0:
            return sweep
    return -1


def _qmul_rows(q, rows):
    """Left-multiply quaternion ``q`` (length-4) into a (4, n) block of rows."""
    w, x, y, z = q
    r0, r1, r2, r3 = rows
    return np.stack((
        w * r0 - x * r1 - y * r2 - z * r3,
        w * r1 + x * r0 + y * r3 - z * r2,
        w * r2 - x * r3 + y * r0 + z * r1,
        w * r3 + x * r2 - y * r1 + z * r0,
    ))


def qcholesky(h, lower):
    """Quaternion Cholesky ``H = L L*`` of planes ``h`` (4, r, r) into ``lower``.

    Returns the index of the first nonpositive pivot, or -1 on success.
    """
    r = h.shape[1]
    lower[...] = 0.0
    for j in range(r):
        d = h[0, j, j] - np.sum(lower[:, j, :j] ** 2)
        if not d > 0.0:
            return j
        ljj = math.sqrt(d)
        lower[0, j, j] = ljj
        for i in range(j + 1, r):
            # sum_k L_ik conj(L_jk)
            acc = h[:, i, j].copy()
            for k in range(j):
                a = lower[:, i, k]
                b = lower[:, j, k] * np.array([1.0, -1.0, -1.0, -1.0])
                acc -= _qmul_rows(a, b[:, None])[:, 0]
            lower[:, i, j] = acc / ljj
    return -1


def qcholesky_solve(lower, rhs):
    """Solve ``(L L*) Y = rhs`` in place; ``rhs`` has planes (4, r, n)."""
    r = lower.shape[1]
    for i in range(r):
        acc = rhs[:, i, :]
        for k in range(i):
            acc -= _qmul_rows(lower[:, i, k], rhs[:, k, :])
        acc /= lower[0, i, i]
    sign = np.array([1.0, -1.0, -1.0, -1.0])
    for i in range(r - 1, -1, -1):
        acc = rhs[:, i, :]
        for k in range(i + 1, r):
            acc -= _qmul_rows(lower[:, k, i] * sign, rhs[:, k, :])
        acc /= lower[0, i, i]
