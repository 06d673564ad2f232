"""Scalar Hamilton quaternions.

The product follows ``i^2 = j^2 = k^2 = ijk = -1``. Values are immutable and
always finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SingularQuaternionError

__all__ = [
    "Quaternion",
    "hamilton_mul",
    "conj",
    "modulus",
    "inverse",
    "from_real",
]


@dataclass(frozen=True)
class Quaternion:
    """``w + x i + y j + z k`` in double precision."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"quaternion component {name}={v!r} is not finite")
            object.__setattr__(self, name, v)

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return hamilton_mul(self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return hamilton_mul(other, self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                raise SingularQuaternionError("division by zero scalar")
            return Quaternion(self.w / other, self.x / other,
                              self.y / other, self.z / other)
        return NotImplemented

    def __abs__(self):
        return modulus(self)

    def conj(self) -> Quaternion:
        return conj(self)

    def inverse(self) -> Quaternion:
        return inverse(self)

    def isclose(self, other, tol: float = 1e-12) -> bool:
        """Componentwise closeness relative to the larger modulus."""
        other = _coerce(other)
        scale = max(1.0, modulus(self), modulus(other))
        return modulus(self - other) <= tol * scale

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _coerce(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return from_real(value)
    return NotImplemented


def from_real(value: float) -> Quaternion:
    """Embed a real scalar as a quaternion with zero imaginary part."""
    return Quaternion(float(value), 0.0, 0.0, 0.0)


def hamilton_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    aw, ax, ay, az = a.w, a.x, a.y, a.z
    bw, bx, by, bz = b.w, b.x, b.y, b.z
    return Quaternion(
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def modulus(q: Quaternion) -> float:
    return math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z)


def inverse(q: Quaternion) -> Quaternion:
    """Multiplicative inverse ``conj(q) / |q|^2``.

    Raises
    ------
    SingularQuaternionError
        If ``q`` is zero.
    """
    n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z
    if n2 == 0.0:
        raise SingularQuaternionError("the zero quaternion has no inverse")
    return Quaternion(q.w / n2, -q.x / n2, -q.y / n2, -q.z / n2)
