"""Exception types raised by the quaternion toolbox and the solver."""


class NumericalError(ArithmeticError):
    """An iterative kernel failed or produced inconsistent numbers."""


class DefinitenessError(NumericalError):
    """Cholesky met a nonpositive pivot; the matrix is not positive definite."""


class SingularQuaternionError(ZeroDivisionError):
    """Inversion of the zero quaternion."""


class RankError(ValueError):
    """A low-rank factorization was requested below the numerical rank."""
