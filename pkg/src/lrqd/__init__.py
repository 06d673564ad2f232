"""Quaternion matrix algebra and low-rank quaternion decomposition (LRQD).

Kernels are provided by a compiled extension when available, otherwise by
pure-Python fallbacks; :data:`BACKEND` names the one in use.
"""
from ._backend import name as BACKEND
from .errors import DefinitenessError, NumericalError, RankError, SingularQuaternionError
from .quaternion import Quaternion, conj, from_real, hamilton_mul, inverse, modulus
from .qmatrix import (
    QMatrix,
    QSVDResult,
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

__version__ = "0.1.0"
