"""Alternating proximal least squares for low-rank quaternion completion.

Minimizes ``f(A, B, X) = 1/2 ||AB - X||_F^2`` subject to ``X = D`` on the
observed entries. Each iteration

1. fills the unobserved entries of ``X`` from ``AB``,
2. replaces ``A`` by the minimizer of ``f + lam/2 ||A - A_prev||^2``,
3. replaces ``B`` the same way with the new ``A``,

and every update has a closed form through a small Hermitian positive
definite solve. With ``lam0 = min(lam, 1)`` each step decreases ``f`` by at
least ``lam0/2`` times the squared step length; the run records that slack
so it can be checked.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .gradient import GradientTriple, projected_gradient
from .qmatrix import QMatrix, conj_transpose, frob_norm, hpd_solve, matmul

__all__ = [
    "ObservationMask",
    "SolverConfig",
    "SolverState",
    "IterationRecord",
    "ConvergenceReport",
    "RateFit",
    "objective",
    "default_lambda",
    "initialize",
    "update_X",
    "update_A",
    "update_B",
    "step",
    "run",
    "stationarity_residual",
    "subproblem_residuals",
    "fit_geometric",
    "fit_linear_rate",
    "CONVERGED",
    "MAX_ITERATIONS",
    "NUMERIC_FAILURE",
]

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"
NUMERIC_FAILURE = "numeric-failure"

DESCENT_TOL = 1e-10


@dataclass(frozen=True)
class ObservationMask:
    """Boolean ``m x n`` array, ``True`` where the data entry is observed."""

    observed: np.ndarray

    def __post_init__(self):
        obs = np.array(self.observed, dtype=bool)
        if obs.ndim != 2:
            raise ValueError("mask must be 2-D")
        obs.flags.writeable = False
        object.__setattr__(self, "observed", obs)

    @classmethod
    def full(cls, m, n):
        return cls(np.ones((m, n), dtype=bool))

    @classmethod
    def empty(cls, m, n):
        return cls(np.zeros((m, n), dtype=bool))

    @classmethod
    def random(cls, m, n, missing_ratio, seed=None):
        """Each entry missing independently with probability ``missing_ratio``."""
        if not 0.0 <= missing_ratio < 1.0:
            raise ValueError(f"missing ratio must lie in [0, 1), got {missing_ratio}")
        rng = np.random.default_rng(seed)
        return cls(rng.random((m, n)) >= missing_ratio)

    @property
    def shape(self):
        return self.observed.shape

    @property
    def rows(self):
        return self.observed.shape[0]

    @property
    def cols(self):
        return self.observed.shape[1]

    @property
    def complement(self) -> np.ndarray:
        return ~self.observed

    @property
    def observed_count(self) -> int:
        return int(np.count_nonzero(self.observed))

    @property
    def complement_count(self) -> int:
        return self.observed.size - self.observed_count


@dataclass(frozen=True)
class SolverConfig:
    rank: int
    lam: float | None = None  # None selects default_lambda
    max_iterations: int = 500
    tol: float = 1e-8
    seed: int = 0
    track_rate: bool = True

    def validate(self, m: int, n: int):
        if not isinstance(self.rank, (int, np.integer)) or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")
        if self.rank >= min(m, n):
            raise ValueError(f"rank {self.rank} must be smaller than min(m, n) = {min(m, n)}")
        if self.lam is not None and not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class SolverState:
    A: QMatrix
    B: QMatrix
    X: QMatrix
    iteration: int = 0

    def norm(self) -> float:
        return math.sqrt(frob_norm(self.A) ** 2 + frob_norm(self.B) ** 2
                         + frob_norm(self.X) ** 2)

    def distance(self, other: SolverState) -> float:
        return math.sqrt(frob_norm(self.A - other.A) ** 2 + frob_norm(self.B - other.B) ** 2
                         + frob_norm(self.X - other.X) ** 2)

    def is_finite(self) -> bool:
        return self.A.is_finite() and self.B.is_finite() and self.X.is_finite()


@dataclass(frozen=True)
class IterationRecord:
    """Diagnostics for the transition from iterate ``k - 1`` to iterate ``k``."""

    k: int
    objective: float
    step_norm: float
    residual: float
    descent_slack: float
    grad_g: float
    grad_h: float


@dataclass(frozen=True)
class RateFit:
    sigma: float
    beta: float
    r2: float
    n_points: int
    degenerate: bool = False


@dataclass
class ConvergenceReport:
    lam: float
    initial_objective: float
    initial_residual: float
    records: list[IterationRecord] = field(default_factory=list)
    status: str = MAX_ITERATIONS
    message: str = ""
    history: list[tuple[QMatrix, QMatrix]] = field(default_factory=list)
    mask: ObservationMask | None = None
    rate: RateFit | None = None

    @property
    def lam0(self) -> float:
        return min(self.lam, 1.0)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective if self.records else self.initial_objective

    @property
    def final_residual(self) -> float:
        return self.records[-1].residual if self.records else self.initial_residual

    def objectives(self) -> np.ndarray:
        return np.array([self.initial_objective] + [r.objective for r in self.records])

    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    def squared_step_sum(self) -> float:
        return float(np.sum(self.step_norms() ** 2))

    def trace_csv(self) -> str:
        """Per-iterate table ``k, objective, step_norm, residual``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "objective", "step_norm", "residual"])
        w.writerow([0, repr(self.initial_objective), "", repr(self.initial_residual)])
        for r in self.records:
            w.writerow([r.k, repr(r.objective), repr(r.step_norm), repr(r.residual)])
        return buf.getvalue()


def objective(state: SolverState) -> float:
    return 0.5 * frob_norm(matmul(state.A, state.B) - state.X) ** 2


def default_lambda(d: QMatrix, mask: ObservationMask) -> float:
    m, n = d.shape
    lam = 1e-2 * frob_norm(d.masked(mask.observed)) / math.sqrt(m * n)
    return lam if lam > 0 else 1e-2


def _resolved_lambda(cfg, d, mask):
    return cfg.lam if cfg.lam is not None else default_lambda(d, mask)


def _check_mask(d, mask):
    if mask.shape != d.shape:
        raise ValueError(f"mask shape {mask.shape} does not match data {d.shape}")


def update_X(a: QMatrix, b: QMatrix, d: QMatrix, mask: ObservationMask) -> QMatrix:
    """Data on observed entries, ``AB`` elsewhere."""
    return d.where(mask.observed, matmul(a, b))


def update_A(state: SolverState, lam: float) -> QMatrix:
    """``(X B* + lam A)(B B* + lam I)^-1``."""
    a, b, x = state.A, state.B, state.X
    bh = conj_transpose(b)
    return _solve(matmul(b, bh), matmul(x, bh) + lam * a, lam, "right")


def update_B(state: SolverState, lam: float) -> QMatrix:
    """``(A* A + lam I)^-1 (A* X + lam B)``; ``state.A`` is the freshly updated factor."""
    a, b, x = state.A, state.B, state.X
    ah = conj_transpose(a)
    return _solve(matmul(ah, a), matmul(ah, x) + lam * b, lam, "left")


def _solve(m, rhs, lam, side):
    if not lam > 0:
        raise ValueError("lambda must be positive")
    # BB* is Hermitian up to round-off; symmetrize so the Hermitian check is exact
    m = 0.5 * (m + conj_transpose(m))
    return hpd_solve(m, rhs, shift=lam, side=side)


def initialize(d: QMatrix, mask: ObservationMask, cfg: SolverConfig) -> SolverState:
    """Seeded uniform factors scaled to the data, with ``X`` filled from them."""
    _check_mask(d, mask)
    m, n = d.shape
    cfg.validate(m, n)
    rng = np.random.default_rng(cfg.seed)
    a = QMatrix(rng.uniform(-1.0, 1.0, size=(4, m, cfg.rank)))
    b = QMatrix(rng.uniform(-1.0, 1.0, size=(4, cfg.rank, n)))
    scale = frob_norm(d.masked(mask.observed)) / (frob_norm(matmul(a, b)) + 1e-300)
    a = scale * a
    return SolverState(a, b, update_X(a, b, d, mask), 0)


def subproblem_residuals(prev: SolverState, a_new: QMatrix, b_new: QMatrix, lam: float):
    """First-order residual norms of the ``A`` and ``B`` proximal subproblems."""
    x = prev.X
    grad_g = (matmul(matmul(a_new, prev.B) - x, conj_transpose(prev.B))
              + lam * (a_new - prev.A))
    grad_h = (matmul(conj_transpose(a_new), matmul(a_new, b_new) - x)
              + lam * (b_new - prev.B))
    return frob_norm(grad_g), frob_norm(grad_h)


def stationarity_residual(state: SolverState, mask: ObservationMask) -> float:
    """Norm of the projected gradient; zero exactly at stationary points."""
    return projected_gradient(state, mask).norm()


def step(state: SolverState, d: QMatrix, mask: ObservationMask, cfg: SolverConfig,
         lam: float | None = None):
    """One full ``X -> A -> B`` sweep.

    ``state.X`` must already be the ``X`` update for ``state.A, state.B``
    (as produced by :func:`initialize` or a previous step). Returns the next
    state, whose ``X`` is refreshed from the new factors, and its record.
    """
    if lam is None:
        lam = _resolved_lambda(cfg, d, mask)
    f_old = objective(state)
    a_new = update_A(state, lam)
    b_new = update_B(SolverState(a_new, state.B, state.X, state.iteration), lam)
    x_new = update_X(a_new, b_new, d, mask)
    new = SolverState(a_new, b_new, x_new, state.iteration + 1)
    if not new.is_finite():
        raise NumericalError(f"non-finite iterate at step {new.iteration}")
    f_new = objective(new)
    dz = state.distance(new)
    gg, gh = subproblem_residuals(state, a_new, b_new, lam)
    rec = IterationRecord(
        k=new.iteration,
        objective=f_new,
        step_norm=dz,
        residual=stationarity_residual(new, mask),
        descent_slack=f_old - f_new - 0.5 * min(lam, 1.0) * dz * dz,
        grad_g=gg,
        grad_h=gh,
    )
    return new, rec


def run(d: QMatrix, mask: ObservationMask, cfg: SolverConfig):
    """Iterate until the relative step length drops below ``cfg.tol``.

    Stops when ``||Z_k - Z_{k+1}|| <= tol (1 + ||Z_k||)`` or after
    ``cfg.max_iterations`` steps. Numerical failures end the run with status
    ``numeric-failure`` instead of raising.

    Returns
    -------
    state : SolverState
    report : ConvergenceReport
    """
    _check_mask(d, mask)
    lam = _resolved_lambda(cfg, d, mask)
    state = initialize(d, mask, cfg)
    f0 = objective(state)
    report = ConvergenceReport(lam=lam, initial_objective=f0,
                               initial_residual=stationarity_residual(state, mask),
                               mask=mask)
    if cfg.track_rate:
        report.history.append((state.A, state.B))
    tol_descent = DESCENT_TOL * (1.0 + f0)

    for _ in range(cfg.max_iterations):
        try:
            new, rec = step(state, d, mask, cfg, lam)
        except NumericalError as exc:
            report.status = NUMERIC_FAILURE
            report.message = str(exc)
            log.warning("solver stopped: %s", exc)
            break
        f_prev = report.records[-1].objective if report.records else f0
        report.records.append(rec)
        if cfg.track_rate:
            report.history.append((new.A, new.B))
        if rec.objective > f_prev + tol_descent:
            report.status = NUMERIC_FAILURE
            report.message = f"objective increased at iteration {rec.k}"
            log.warning(report.message)
            state = new
            break
        stop = rec.step_norm <= cfg.tol * (1.0 + state.norm())
        state = new
        if stop:
            report.status = CONVERGED
            break

    if cfg.track_rate and report.status == CONVERGED:
        try:
            report.rate = fit_linear_rate(report, state)
        except ValueError as exc:
            log.info("rate fit skipped: %s", exc)
    return state, report


def fit_geometric(distances, floor: float = 0.0) -> RateFit:
    """Least-squares fit of ``log d_k = log beta + k log sigma`` on the tail half.

    Points at or below ``floor`` are dropped; with fewer than three left the
    fit is flagged degenerate.
    """
    d = np.asarray(distances, dtype=float)
    k = np.arange(d.size)
    start = d.size // 2
    k, d = k[start:], d[start:]
    keep = d > floor
    k, d = k[keep], d[keep]
    if k.size < 3:
        return RateFit(math.nan, math.nan, math.nan, int(k.size), degenerate=True)
    y = np.log(d)
    slope, intercept = np.polyfit(k, y, 1)
    fitted = slope * k + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(math.exp(slope)), float(math.exp(intercept)), r2, int(k.size))


def fit_linear_rate(report: ConvergenceReport, reference: SolverState) -> RateFit:
    """Fit the R-linear rate of ``||Z_k - Z_ref||`` over the recorded iterates.

    The reference is normally the last iterate, so its own (zero) distance
    is excluded. Distances below round-off of the reference are treated as
    already converged.

    Raises
    ------
    ValueError
        If fewer than ten iterates were recorded.
    """
    if len(report.history) < 10:
        raise ValueError(f"need at least 10 recorded iterates, have {len(report.history)}")
    observed = report.mask.observed if report.mask is not None else None
    ab_ref = matmul(reference.A, reference.B)
    dists = []
    for a, b in report.history:
        da2 = frob_norm(a - reference.A) ** 2
        db2 = frob_norm(b - reference.B) ** 2
        dx = matmul(a, b) - ab_ref
        if observed is not None:
            dx = dx.masked(~observed)
        dists.append(math.sqrt(da2 + db2 + frob_norm(dx) ** 2))
    if dists and dists[-1] == 0.0:
        dists = dists[:-1]
    floor = 1e3 * np.finfo(float).eps * (1.0 + reference.norm())
    return fit_geometric(dists, floor)
