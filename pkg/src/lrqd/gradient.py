"""Gradients of real functions of quaternion matrix arguments.

The gradient of ``f`` at ``X = X0 + X1 i + X2 j + X3 k`` is the quaternion
matrix whose component planes are the real partials ``df/dX0 .. df/dX3``.
Under that convention the least-squares terms used by the solver have
closed forms, e.g. ``grad 1/2||XB + C||^2 = (XB + C) B*``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qmatrix import QMatrix, conj_transpose, frob_norm, matmul

__all__ = [
    "GradientTriple",
    "grad_left_quadratic",
    "grad_right_quadratic",
    "finite_difference_gradient",
    "objective_gradient",
    "projected_gradient",
    "FD_STEP",
]

FD_STEP = 1e-6


@dataclass(frozen=True)
class GradientTriple:
    """Partials of ``f(A, B, X) = 1/2 ||AB - X||^2`` with respect to each block."""

    dA: QMatrix
    dB: QMatrix
    dX: QMatrix

    def norm(self) -> float:
        """Stacked Frobenius norm of the three blocks."""
        return math.sqrt(frob_norm(self.dA) ** 2 + frob_norm(self.dB) ** 2
                         + frob_norm(self.dX) ** 2)


def grad_left_quadratic(x: QMatrix, b: QMatrix, c: QMatrix) -> QMatrix:
    """Gradient of ``1/2 ||X B + C||_F^2`` in ``X``: ``(XB + C) B*``."""
    return matmul(matmul(x, b) + c, conj_transpose(b))


def grad_right_quadratic(a: QMatrix, x: QMatrix, c: QMatrix) -> QMatrix:
    """Gradient of ``1/2 ||A X + C||_F^2`` in ``X``: ``A* (AX + C)``."""
    return matmul(conj_transpose(a), matmul(a, x) + c)


def finite_difference_gradient(f, x: QMatrix, step: float = FD_STEP) -> QMatrix:
    """Central-difference gradient of a real function, one real component at a time.

    Parameters
    ----------
    f : callable
        Maps a :class:`QMatrix` shaped like ``x`` to a real number.
    x : QMatrix
        Evaluation point.
    step : float
        Perturbation applied to each of the ``4mn`` real components.
    """
    if not step > 0:
        raise ValueError("finite-difference step must be positive")
    base = np.array(x.planes)
    grad = np.empty_like(base)
    for idx in np.ndindex(base.shape):
        orig = base[idx]
        base[idx] = orig + step
        fp = float(f(QMatrix(base)))
        base[idx] = orig - step
        fm = float(f(QMatrix(base)))
        base[idx] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError(f"objective is not finite near component {idx}")
        grad[idx] = (fp - fm) / (2.0 * step)
    return QMatrix(grad)


def objective_gradient(state) -> GradientTriple:
    """Unconstrained partials ``((AB-X)B*, A*(AB-X), X-AB)`` at ``state``."""
    resid = matmul(state.A, state.B) - state.X
    return GradientTriple(
        dA=matmul(resid, conj_transpose(state.B)),
        dB=matmul(conj_transpose(state.A), resid),
        dX=-resid,
    )


def projected_gradient(state, mask) -> GradientTriple:
    """Gradient with the ``X`` block restricted to the unobserved entries.

    Entries of ``X`` on the observed set are pinned to the data, so their
    partials are zeroed.
    """
    observed = getattr(mask, "observed", mask)
    if observed.shape != state.X.shape:
        raise ValueError(f"mask shape {observed.shape} does not match X {state.X.shape}")
    g = objective_gradient(state)
    return GradientTriple(g.dA, g.dB, g.dX.masked(~observed))
