"""Select the kernel implementation at import time.

The compiled extension is used when importable. Setting ``LRQD_BACKEND`` to
``python`` forces the pure-Python kernels; ``cython`` makes a missing
extension an import error.
"""
import os

_choice = os.environ.get("LRQD_BACKEND", "auto").lower()

if _choice == "python":
    from . import _fallback as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _choice == "cython":
            raise
        from . import _fallback as kernels

name = kernels.name
one_sided_jacobi = kernels.one_sided_jacobi
qcholesky = kernels.qcholesky
qcholesky_solve = kernels.qcholesky_solve
