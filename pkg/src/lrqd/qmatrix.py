"""Quaternion matrices stored as four real component planes.

A quaternion matrix ``A = A0 + A1 i + A2 j + A3 k`` is held as a read-only
``(4, m, n)`` float64 array. Products expand through a real block matrix so
that each matmul is a single BLAS call.

The complex adjoint of ``A = B1 + B2 j`` with ``B1 = A0 + A1 i`` and
``B2 = A2 + A3 i`` is the ``2m x 2n`` matrix ``[[B1, B2], [-conj(B2), conj(B1)]]``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DefinitenessError, NumericalError, RankError
from .quaternion import Quaternion

__all__ = [
    "QMatrix",
    "QSVDResult",
    "matmul",
    "conj_transpose",
    "frob_norm",
    "complex_adjoint",
    "from_complex_adjoint",
    "qsvd",
    "rank",
    "low_rank_factor",
    "hpd_solve",
    "JACOBI_MAX_SWEEPS",
    "JACOBI_TOL",
    "PAIR_TOL",
    "RANK_TOL",
]

JACOBI_MAX_SWEEPS = 60
JACOBI_TOL = 1e-12
PAIR_TOL = 1e-8
RANK_TOL = 1e-10

_CONJ_SIGN = np.array([1.0, -1.0, -1.0, -1.0]).reshape(4, 1, 1)


class QMatrix:
    """Immutable ``m x n`` quaternion matrix.

    Parameters
    ----------
    planes : array_like, shape (4, m, n)
        Real, i, j and k component planes.
    """

    __slots__ = ("_planes",)
    __array_priority__ = 100

    def __init__(self, planes):
        arr = np.array(planes, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 3 or arr.shape[0] != 4:
            raise ValueError(f"expected planes of shape (4, m, n), got {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError("quaternion matrices need at least one row and column")
        arr.flags.writeable = False
        self._planes = arr

    @classmethod
    def _wrap(cls, arr):
        # trusted internal constructor, no copy
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        arr.flags.writeable = False
        obj._planes = arr
        return obj

    @classmethod
    def from_planes(cls, a0, a1=None, a2=None, a3=None):
        a0 = np.asarray(a0, dtype=np.float64)
        zero = np.zeros_like(a0)
        parts = [a0] + [zero if a is None else np.asarray(a, dtype=np.float64)
                        for a in (a1, a2, a3)]
        shapes = {p.shape for p in parts}
        if len(shapes) != 1:
            raise ValueError(f"component planes disagree in shape: {sorted(shapes)}")
        if a0.ndim != 2:
            raise ValueError("component planes must be 2-D")
        return cls(np.stack(parts))

    @classmethod
    def zeros(cls, m, n):
        return cls._wrap(np.zeros((4, m, n)))

    @classmethod
    def eye(cls, m):
        p = np.zeros((4, m, m))
        p[0] = np.eye(m)
        return cls._wrap(p)

    @classmethod
    def random(cls, m, n, rng=None, scale=1.0):
        """Entries with i.i.d. standard normal components."""
        rng = np.random.default_rng(rng)
        return cls._wrap(scale * rng.standard_normal((4, m, n)))

    @classmethod
    def from_rows(cls, rows):
        """Build from a nested list of :class:`Quaternion` (or real) entries."""
        m = len(rows)
        n = len(rows[0])
        p = np.zeros((4, m, n))
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("ragged rows")
            for j, q in enumerate(row):
                if not isinstance(q, Quaternion):
                    q = Quaternion(float(q))
                p[:, i, j] = q.components
        return cls._wrap(p)

    @property
    def planes(self) -> np.ndarray:
        return self._planes

    @property
    def shape(self) -> tuple[int, int]:
        return self._planes.shape[1], self._planes.shape[2]

    @property
    def rows(self) -> int:
        return self._planes.shape[1]

    @property
    def cols(self) -> int:
        return self._planes.shape[2]

    def __getitem__(self, index):
        i, j = index
        return Quaternion(*self._planes[:, i, j])

    def __repr__(self):
        return f"QMatrix(shape={self.shape})"

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._planes, other._planes)

    __hash__ = None

    def __add__(self, other):
        _same_shape(self, other)
        return QMatrix._wrap(self._planes + other._planes)

    def __sub__(self, other):
        _same_shape(self, other)
        return QMatrix._wrap(self._planes - other._planes)

    def __neg__(self):
        return QMatrix._wrap(-self._planes)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return QMatrix._wrap(float(scalar) * self._planes)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return QMatrix._wrap(self._planes / float(scalar))
        return NotImplemented

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def H(self) -> QMatrix:
        return conj_transpose(self)

    def transpose(self) -> QMatrix:
        return QMatrix._wrap(self._planes.transpose(0, 2, 1))

    def conj(self) -> QMatrix:
        return QMatrix._wrap(self._planes * _CONJ_SIGN)

    def norm(self) -> float:
        return frob_norm(self)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self._planes).all())

    def masked(self, mask) -> QMatrix:
        """Copy with entries outside ``mask`` set to zero."""
        return QMatrix._wrap(np.where(mask, self._planes, 0.0))

    def where(self, mask, other: QMatrix) -> QMatrix:
        """Entries of ``self`` where ``mask`` holds, of ``other`` elsewhere."""
        _same_shape(self, other)
        return QMatrix._wrap(np.where(mask, self._planes, other._planes))

    def allclose(self, other, rtol=1e-12, atol=0.0) -> bool:
        _same_shape(self, other)
        return frob_norm(self - other) <= atol + rtol * max(frob_norm(self), frob_norm(other))


def _same_shape(a, b):
    if not isinstance(b, QMatrix):
        raise TypeError(f"expected QMatrix, got {type(b).__name__}")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _left_block(p):
    """Real ``4m x 4r`` matrix acting as left multiplication by ``p``."""
    a0, a1, a2, a3 = p
    return np.block([
        [a0, -a1, -a2, -a3],
        [a1, a0, -a3, a2],
        [a2, a3, a0, -a1],
        [a3, -a2, a1, a0],
    ])


def _planes_matmul(pa, pb):
    m, r = pa.shape[1], pa.shape[2]
    n = pb.shape[2]
    out = _left_block(pa) @ pb.reshape(4 * r, n)
    return out.reshape(4, m, n)


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Quaternion matrix product, preserving left-to-right factor order."""
    if a.cols != b.rows:
        raise ValueError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return QMatrix._wrap(_planes_matmul(a.planes, b.planes))


def conj_transpose(a: QMatrix) -> QMatrix:
    return QMatrix._wrap((a.planes * _CONJ_SIGN).transpose(0, 2, 1))


def frob_norm(a: QMatrix) -> float:
    return float(np.linalg.norm(a.planes.ravel()))


def complex_adjoint(a: QMatrix) -> np.ndarray:
    """The ``2m x 2n`` complex representation of ``a``."""
    a0, a1, a2, a3 = a.planes
    b1 = a0 + 1j * a1
    b2 = a2 + 1j * a3
    return np.block([[b1, b2], [-b2.conj(), b1.conj()]])


def from_complex_adjoint(m: np.ndarray, tol: float = 1e-10) -> QMatrix:
    """Inverse of :func:`complex_adjoint`.

    Raises ``ValueError`` when the block symmetry is violated by more than
    ``tol`` relative to the norm of ``m``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] % 2 or m.shape[1] % 2:
        raise ValueError(f"adjoint must have even dimensions, got {m.shape}")
    r, c = m.shape[0] // 2, m.shape[1] // 2
    b1, b2 = m[:r, :c], m[:r, c:]
    b3, b4 = m[r:, :c], m[r:, c:]
    err = np.sqrt(np.linalg.norm(b4 - b1.conj()) ** 2 + np.linalg.norm(b3 + b2.conj()) ** 2)
    if err > tol * max(1.0, np.linalg.norm(m)):
        raise ValueError(f"matrix is not a quaternion adjoint (symmetry defect {err:.3g})")
    return QMatrix._wrap(np.stack((b1.real, b1.imag, b2.real, b2.imag)))


class QSVDResult(NamedTuple):
    U: QMatrix
    singular_values: np.ndarray
    V: QMatrix


# Conversions between a quaternion vector x = x1 + x2 j and the first column
# [x1; -conj(x2)] of its complex adjoint. The partner column is [x2; conj(x1)].

def _vec_from_column(col, n):
    x1 = col[:n]
    x2 = -col[n:].conj()
    return np.stack((x1.real, x1.imag, x2.real, x2.imag))


def _column_from_vec(v):
    x1 = v[0] + 1j * v[1]
    x2 = v[2] + 1j * v[3]
    return np.concatenate((x1, -x2.conj()))


def _partner(col, n):
    p, q = col[:n], col[n:]
    return np.concatenate((-q.conj(), p.conj()))


class _QuaternionBasis:
    """Orthonormal quaternion vectors grown by Gram-Schmidt in adjoint form."""

    def __init__(self, n):
        self.n = n
        self.cols = []  # complex columns incl. partners, each of length 2n
        self.vectors = []  # accepted quaternion vectors, planes (4, n)

    def residual(self, col):
        if self.cols:
            q = np.array(self.cols).T
            for _ in range(2):
                col = col - q @ (q.conj().T @ col)
        return col

    def offer(self, col, accept=0.5):
        """Orthogonalize a unit column; keep it if enough of it survives."""
        res = self.residual(col)
        nrm = np.linalg.norm(res)
        if nrm <= accept:
            return False
        res = res / nrm
        self.cols.append(res)
        self.cols.append(_partner(res, self.n))
        self.vectors.append(_vec_from_column(res, self.n))
        return True

    def complete(self, target):
        """Fill up to ``target`` vectors from the best remaining directions."""
        while len(self.vectors) < target:
            eye = np.eye(2 * self.n, dtype=complex)[:, : self.n]
            if self.cols:
                q = np.array(self.cols).T
                res = eye - q @ (q.conj().T @ eye)
            else:
                res = eye
            k = int(np.argmax(np.linalg.norm(res, axis=0)))
            self.offer(res[:, k] / np.linalg.norm(res[:, k]), accept=1e-8)

    def matrix(self):
        return np.stack(self.vectors, axis=2)


def _jacobi_adjoint(a: QMatrix):
    """Right singular vectors and values of the adjoint of a tall ``a``."""
    ac = complex_adjoint(a)
    scale = np.linalg.norm(ac)
    wt = np.ascontiguousarray(ac.T)
    vt = np.eye(ac.shape[1], dtype=np.complex128)
    floor = (JACOBI_TOL * scale) ** 2
    sweeps = _backend.one_sided_jacobi(wt, vt, JACOBI_TOL, floor, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NumericalError(
            f"one-sided Jacobi did not converge within {JACOBI_MAX_SWEEPS} sweeps")
    sig = np.linalg.norm(wt, axis=1)
    order = np.argsort(-sig, kind="stable")
    return sig[order], vt[order].T, scale


def qsvd(a: QMatrix) -> QSVDResult:
    """Quaternion SVD ``a = U diag(s) V*`` via the complex adjoint.

    Raises
    ------
    NumericalError
        If the Jacobi kernel does not converge, or the adjoint singular
        values fail to pair up within ``PAIR_TOL`` relative to the largest.
    """
    m, n = a.shape
    if m < n:
        u, s, v = qsvd(conj_transpose(a))
        return QSVDResult(v, s, u)

    sig, vcols, scale = _jacobi_adjoint(a)
    smax = sig[0] if sig.size else 0.0
    if smax > 0.0:
        gaps = np.abs(sig[0::2] - sig[1::2])
        bad = np.flatnonzero(gaps > PAIR_TOL * smax)
        if bad.size:
            i = int(bad[0])
            raise NumericalError(
                f"adjoint singular values {sig[2 * i]:.17g}, {sig[2 * i + 1]:.17g} do not pair")

    vbasis = _QuaternionBasis(n)
    for col in vcols.T:
        if len(vbasis.vectors) == n:
            break
        vbasis.offer(col)
    vbasis.complete(n)
    vplanes = vbasis.matrix()  # (4, n, n)

    av = _planes_matmul(a.planes, vplanes)  # (4, m, n)
    s = np.sqrt(np.sum(av ** 2, axis=(0, 1)))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    vplanes = vplanes[:, :, order]
    av = av[:, :, order]

    ubasis = _QuaternionBasis(m)
    cutoff = 1e-14 * max(m, n) * (s[0] if s.size else 0.0)
    for k in range(n):
        if s[k] <= cutoff or s[k] == 0.0:
            break
        col = _column_from_vec(av[:, :, k] / s[k])
        if not ubasis.offer(col / np.linalg.norm(col), accept=1e-3):
            raise NumericalError("left singular vectors lost orthogonality")
    ubasis.complete(m)
    return QSVDResult(QMatrix._wrap(ubasis.matrix()), s, QMatrix._wrap(vplanes))


def rank(a: QMatrix, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol`` times the largest."""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    s = qsvd(a).singular_values
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def low_rank_factor(x: QMatrix, r: int, tol: float = RANK_TOL):
    """Split ``x`` into ``A`` (m x r) and ``B`` (r x n) with ``A @ B == x``.

    Uses ``A = U1 S`` and ``B = S V1*`` where ``S`` holds the square roots of
    the leading ``r`` singular values.

    Raises
    ------
    RankError
        If the numerical rank of ``x`` exceeds ``r``.
    """
    m, n = x.shape
    if r < 1 or r > min(m, n):
        raise ValueError(f"rank {r} outside [1, {min(m, n)}]")
    u, s, v = qsvd(x)
    k = 0 if s[0] == 0.0 else int(np.count_nonzero(s > tol * s[0]))
    if k > r:
        raise RankError(f"matrix has numerical rank {k} > {r}")
    return _factor_from_svd(u, s, v, r)


def truncated_factor(x: QMatrix, r: int):
    """Best rank-``r`` factor pair of ``x`` from its leading singular triplets."""
    return _factor_from_svd(*qsvd(x), r)


def _factor_from_svd(u, s, v, r):
    root = np.sqrt(s[:r])
    a = u.planes[:, :, :r] * root
    b = (v.planes[:, :, :r] * _CONJ_SIGN).transpose(0, 2, 1) * root[:, None]
    return QMatrix._wrap(a), QMatrix._wrap(b)


def hpd_solve(m: QMatrix, rhs: QMatrix, shift: float = 0.0, side: str = "left",
              herm_tol: float = 1e-10) -> QMatrix:
    """Solve with the Hermitian positive definite matrix ``m + shift*I``.

    ``side="left"`` returns ``Y`` with ``(m + shift I) Y = rhs``;
    ``side="right"`` returns ``Y`` with ``Y (m + shift I) = rhs``.

    Raises
    ------
    DefinitenessError
        On a nonpositive Cholesky pivot.
    """
    r = m.rows
    if m.cols != r:
        raise ValueError(f"system matrix must be square, got {m.shape}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    defect = frob_norm(m - conj_transpose(m))
    if defect > herm_tol * max(1.0, frob_norm(m)):
        raise ValueError(f"system matrix is not Hermitian (defect {defect:.3g})")

    h = np.array(m.planes)
    h[0] += shift * np.eye(r)
    lower = np.zeros_like(h)
    pivot = _backend.qcholesky(h, lower)
    if pivot >= 0:
        raise DefinitenessError(f"nonpositive Cholesky pivot at index {pivot}")

    if side == "left":
        if rhs.rows != r:
            raise ValueError(f"rhs has {rhs.rows} rows, system is {r} x {r}")
        y = np.array(rhs.planes)
        _backend.qcholesky_solve(lower, y)
        return QMatrix._wrap(y)
    # Y H = R  <=>  H Y* = R*
    if rhs.cols != r:
        raise ValueError(f"rhs has {rhs.cols} columns, system is {r} x {r}")
    y = np.ascontiguousarray((rhs.planes * _CONJ_SIGN).transpose(0, 2, 1))
    _backend.qcholesky_solve(lower, y)
    return QMatrix._wrap((y * _CONJ_SIGN).transpose(0, 2, 1))
