import csv
import io
import math

import numpy as np
import pytest

import lrqd.solver as solver
from lrqd import DefinitenessError, QMatrix, frob_norm, low_rank_factor, rank
from lrqd.solver import (
    CONVERGED,
    MAX_ITERATIONS,
    NUMERIC_FAILURE,
    ConvergenceReport,
    ObservationMask,
    SolverConfig,
    SolverState,
    default_lambda,
    fit_geometric,
    fit_linear_rate,
    initialize,
    objective,
    run,
    stationarity_residual,
    step,
    subproblem_residuals,
    update_A,
    update_B,
    update_X,
)

from conftest import unit_scale


def g_value(a, prev, lam):
    return 0.5 * frob_norm(a @ prev.B - prev.X) ** 2 + 0.5 * lam * frob_norm(a - prev.A) ** 2


def h_value(b, a_new, prev, lam):
    return 0.5 * frob_norm(a_new @ b - prev.X) ** 2 + 0.5 * lam * frob_norm(b - prev.B) ** 2


def low_rank(rng, m, r, n):
    return unit_scale(QMatrix.random(m, r, rng) @ QMatrix.random(r, n, rng))


class TestMask:
    def test_counts(self):
        mask = ObservationMask.random(10, 12, 0.4, seed=3)
        assert mask.observed_count + mask.complement_count == 120
        assert mask.shape == (10, 12)

    def test_ratio_zero(self):
        assert ObservationMask.random(5, 5, 0.0, seed=1).complement_count == 0

    def test_deterministic(self):
        a = ObservationMask.random(20, 20, 0.3, seed=9).observed
        b = ObservationMask.random(20, 20, 0.3, seed=9).observed
        np.testing.assert_array_equal(a, b)

    def test_binomial_count(self):
        mask = ObservationMask.random(100, 100, 0.5, seed=0)
        assert abs(mask.observed_count - 5000) <= 4 * math.sqrt(10000 * 0.25)

    @pytest.mark.parametrize("ratio", [-0.1, 1.0, 1.5])
    def test_bad_ratio(self, ratio):
        with pytest.raises(ValueError):
            ObservationMask.random(3, 3, ratio)


class TestConfig:
    def test_rank_must_be_below_min_dim(self, rng):
        d = QMatrix.random(4, 6, rng)
        with pytest.raises(ValueError):
            initialize(d, ObservationMask.full(4, 6), SolverConfig(rank=4))

    @pytest.mark.parametrize("lam", [0.0, -1.0, math.inf])
    def test_bad_lambda(self, lam):
        with pytest.raises(ValueError):
            SolverConfig(rank=1, lam=lam).validate(5, 5)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            SolverConfig(rank=1, tol=0).validate(5, 5)

    def test_default_lambda_positive(self, rng):
        d = QMatrix.random(5, 6, rng)
        mask = ObservationMask.random(5, 6, 0.3, seed=0)
        want = 1e-2 * frob_norm(d.masked(mask.observed)) / math.sqrt(30)
        assert default_lambda(d, mask) == pytest.approx(want)
        assert default_lambda(QMatrix.zeros(3, 3), ObservationMask.full(3, 3)) > 0


class TestInitialize:
    def test_deterministic(self, rng):
        d = QMatrix.random(6, 5, rng)
        mask = ObservationMask.random(6, 5, 0.3, seed=2)
        s1 = initialize(d, mask, SolverConfig(rank=2, seed=4))
        s2 = initialize(d, mask, SolverConfig(rank=2, seed=4))
        assert s1.A == s2.A and s1.B == s2.B and s1.X == s2.X
        s3 = initialize(d, mask, SolverConfig(rank=2, seed=5))
        assert s3.A != s1.A

    def test_full_mask(self, rng):
        d = QMatrix.random(6, 5, rng)
        s = initialize(d, ObservationMask.full(6, 5), SolverConfig(rank=2))
        assert s.X == d

    def test_problem_scale(self, rng):
        d = 10.0 * QMatrix.random(6, 5, rng)
        mask = ObservationMask.random(6, 5, 0.3, seed=2)
        s = initialize(d, mask, SolverConfig(rank=2))
        assert frob_norm(s.A @ s.B) == pytest.approx(frob_norm(d.masked(mask.observed)))

    def test_mask_mismatch(self, rng):
        with pytest.raises(ValueError):
            initialize(QMatrix.random(4, 5, rng), ObservationMask.full(5, 4), SolverConfig(rank=1))


class TestUpdateX:
    def test_all_observed(self, rng):
        a, b, d = QMatrix.random(4, 2, rng), QMatrix.random(2, 5, rng), QMatrix.random(4, 5, rng)
        assert update_X(a, b, d, ObservationMask.full(4, 5)) == d

    def test_none_observed(self, rng):
        a, b, d = QMatrix.random(4, 2, rng), QMatrix.random(2, 5, rng), QMatrix.random(4, 5, rng)
        assert update_X(a, b, d, ObservationMask.empty(4, 5)) == a @ b

    def test_minimizer_against_sampling(self, rng):
        a, b, d = QMatrix.random(4, 2, rng), QMatrix.random(2, 5, rng), QMatrix.random(4, 5, rng)
        mask = ObservationMask.random(4, 5, 0.4, seed=1)
        x = update_X(a, b, d, mask)
        best = objective(SolverState(a, b, x))
        for _ in range(100):
            trial = d.where(mask.observed, QMatrix.random(4, 5, rng))
            assert best <= objective(SolverState(a, b, trial))


class TestUpdateA:
    def test_zero_b_is_fixed(self, rng):
        s = SolverState(QMatrix.random(4, 2, rng), QMatrix.zeros(2, 5), QMatrix.random(4, 5, rng))
        assert update_A(s, 0.3).allclose(s.A, rtol=1e-14)

    def test_exact_fit_is_fixed(self, rng):
        a, b = QMatrix.random(4, 2, rng), QMatrix.random(2, 5, rng)
        s = SolverState(a, b, a @ b)
        assert update_A(s, 0.3).allclose(a, rtol=1e-12)

    def test_local_minimizer(self, rng):
        s = SolverState(QMatrix.random(5, 2, rng), QMatrix.random(2, 6, rng),
                        QMatrix.random(5, 6, rng))
        lam = 0.2
        a_new = update_A(s, lam)
        best = g_value(a_new, s, lam)
        for _ in range(100):
            other = a_new + QMatrix.random(5, 2, rng, scale=10 ** rng.uniform(-4, 0))
            assert best <= g_value(other, s, lam)

    def test_first_order_condition(self, rng):
        s = SolverState(QMatrix.random(5, 2, rng), QMatrix.random(2, 6, rng),
                        QMatrix.random(5, 6, rng))
        a_new = update_A(s, 0.2)
        gg, _ = subproblem_residuals(s, a_new, s.B, 0.2)
        assert gg <= 1e-8 * (1 + s.norm())


class TestUpdateB:
    def test_zero_a_is_fixed(self, rng):
        s = SolverState(QMatrix.zeros(4, 2), QMatrix.random(2, 5, rng), QMatrix.random(4, 5, rng))
        assert update_B(s, 0.3).allclose(s.B, rtol=1e-14)

    def test_exact_fit_is_fixed(self, rng):
        a, b = QMatrix.random(4, 2, rng), QMatrix.random(2, 5, rng)
        assert update_B(SolverState(a, b, a @ b), 0.3).allclose(b, rtol=1e-12)

    def test_first_order_condition(self, rng):
        prev = SolverState(QMatrix.random(5, 2, rng), QMatrix.random(2, 6, rng),
                           QMatrix.random(5, 6, rng))
        a_new = update_A(prev, 0.2)
        b_new = update_B(SolverState(a_new, prev.B, prev.X), 0.2)
        _, gh = subproblem_residuals(prev, a_new, b_new, 0.2)
        assert gh <= 1e-8 * (1 + prev.norm())
        best = h_value(b_new, a_new, prev, 0.2)
        for _ in range(50):
            other = b_new + QMatrix.random(2, 6, rng, scale=1e-3)
            assert best <= h_value(other, a_new, prev, 0.2)


class TestStep:
    def test_stationary_point_is_fixed(self, rng):
        d = low_rank(rng, 8, 2, 7)
        a, b = low_rank_factor(d, 2)
        mask = ObservationMask.random(8, 7, 0.3, seed=2)
        z = SolverState(a, b, update_X(a, b, d, mask))
        new, rec = step(z, d, mask, SolverConfig(rank=2), lam=0.1)
        assert z.distance(new) <= 1e-10
        assert rec.step_norm <= 1e-10

    def test_objective_decreases(self, rng):
        d = QMatrix.random(9, 8, rng)
        mask = ObservationMask.random(9, 8, 0.3, seed=3)
        cfg = SolverConfig(rank=2, seed=1)
        z = initialize(d, mask, cfg)
        for _ in range(10):
            f_old = objective(z)
            z, rec = step(z, d, mask, cfg)
            assert rec.objective <= f_old
            assert rec.descent_slack >= -1e-10 * (1 + f_old)

    def test_feasibility_and_rank_bound(self, rng):
        d = QMatrix.random(9, 8, rng)
        mask = ObservationMask.random(9, 8, 0.4, seed=3)
        cfg = SolverConfig(rank=3, seed=1)
        z = initialize(d, mask, cfg)
        for _ in range(5):
            z, _ = step(z, d, mask, cfg)
            np.testing.assert_array_equal(z.X.planes[:, mask.observed], d.planes[:, mask.observed])
            assert rank(z.A @ z.B, 1e-10) <= 3

    def test_fully_observed_low_rank_objective_vanishes(self, rng):
        d = low_rank(rng, 10, 2, 9)
        mask = ObservationMask.full(10, 9)
        cfg = SolverConfig(rank=2, seed=0)
        z = initialize(d, mask, cfg)
        f0 = objective(z)
        for _ in range(200):
            z, rec = step(z, d, mask, cfg)
        assert rec.objective <= 1e-12 * f0


class TestRun:
    def test_exact_recovery_fully_observed(self, rng):
        d = low_rank(rng, 12, 3, 10)
        state, rep = run(d, ObservationMask.full(12, 10), SolverConfig(rank=3))
        assert rep.status == CONVERGED
        assert rep.final_objective <= 1e-12 * frob_norm(d) ** 2

    def test_rank_one_stationary(self, rng):
        d = unit_scale(QMatrix.random(8, 6, rng))
        mask = ObservationMask.full(8, 6)
        cfg = SolverConfig(rank=1, max_iterations=5000)
        state, rep = run(d, mask, cfg)
        assert rep.status == CONVERGED
        # step rule fired; the iterate is approximately stationary
        assert stationarity_residual(state, mask) <= 10 * cfg.tol * (1 + state.norm())

    def test_zero_iterations(self, rng):
        d = QMatrix.random(5, 4, rng)
        mask = ObservationMask.random(5, 4, 0.3, seed=0)
        cfg = SolverConfig(rank=1, max_iterations=0)
        state, rep = run(d, mask, cfg)
        init = initialize(d, mask, cfg)
        assert rep.status == MAX_ITERATIONS and rep.iterations == 0
        assert state.A == init.A and state.X == init.X

    def test_feasibility_at_end(self, rng):
        d = QMatrix.random(7, 9, rng)
        mask = ObservationMask.random(7, 9, 0.5, seed=0)
        state, _ = run(d, mask, SolverConfig(rank=2, max_iterations=30))
        np.testing.assert_array_equal(state.X.planes[:, mask.observed], d.planes[:, mask.observed])

    def test_deterministic(self, rng):
        d = QMatrix.random(7, 9, rng)
        mask = ObservationMask.random(7, 9, 0.5, seed=0)
        cfg = SolverConfig(rank=2, max_iterations=30, seed=3)
        s1, r1 = run(d, mask, cfg)
        s2, r2 = run(d, mask, cfg)
        assert s1.A == s2.A and r1.trace_csv() == r2.trace_csv()

    def test_residual_trend(self, rng):
        d = QMatrix.random(10, 10, rng)
        mask = ObservationMask.random(10, 10, 0.3, seed=0)
        _, rep = run(d, mask, SolverConfig(rank=2, max_iterations=200))
        assert rep.final_residual <= rep.initial_residual

    def test_summability(self, rng):
        d = QMatrix.random(10, 12, rng)
        mask = ObservationMask.random(10, 12, 0.3, seed=0)
        _, rep = run(d, mask, SolverConfig(rank=3, max_iterations=200))
        assert rep.squared_step_sum() <= 2 / rep.lam0 * rep.initial_objective + 1e-8

    def test_numeric_failure_is_reported(self, rng, monkeypatch):
        def broken(*args, **kwargs):
            raise DefinitenessError("forced")

        monkeypatch.setattr(solver, "hpd_solve", broken)
        d = QMatrix.random(5, 5, rng)
        state, rep = run(d, ObservationMask.full(5, 5), SolverConfig(rank=1))
        assert rep.status == NUMERIC_FAILURE and "forced" in rep.message
        assert rep.iterations == 0

    def test_trace_csv(self, rng):
        d = QMatrix.random(6, 6, rng)
        _, rep = run(d, ObservationMask.random(6, 6, 0.2, seed=0),
                     SolverConfig(rank=2, max_iterations=5))
        rows = list(csv.reader(io.StringIO(rep.trace_csv())))
        assert rows[0] == ["k", "objective", "step_norm", "residual"]
        assert len(rows) == 2 + rep.iterations
        assert [int(r[0]) for r in rows[1:]] == list(range(rep.iterations + 1))
        assert float(rows[-1][1]) == rep.final_objective


class TestStationarityResidual:
    def test_constructed_stationary_point(self, rng):
        x = low_rank(rng, 8, 2, 9)
        a, b = low_rank_factor(x, 2)
        mask = ObservationMask.random(8, 9, 0.5, seed=4)
        d = x.where(mask.observed, QMatrix.random(8, 9, rng))
        z = SolverState(a, b, update_X(a, b, d, mask))
        assert stationarity_residual(z, mask) <= 1e-8

    def test_all_zero(self):
        z = SolverState(QMatrix.zeros(4, 2), QMatrix.zeros(2, 5), QMatrix.zeros(4, 5))
        assert stationarity_residual(z, ObservationMask.random(4, 5, 0.5, seed=0)) == 0.0


class TestRateFit:
    def test_geometric_trace(self):
        fit = fit_geometric(0.5 ** np.arange(30))
        assert fit.sigma == pytest.approx(0.5, rel=1e-12)
        assert fit.beta == pytest.approx(1.0, rel=1e-10)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert not fit.degenerate

    def test_below_precision_is_degenerate(self):
        fit = fit_geometric(np.full(20, 1e-17), floor=1e-13)
        assert fit.degenerate and math.isnan(fit.sigma)

    def test_needs_ten_iterates(self):
        rep = ConvergenceReport(lam=1.0, initial_objective=1.0, initial_residual=1.0)
        z = SolverState(QMatrix.eye(2), QMatrix.eye(2), QMatrix.eye(2))
        rep.history = [(z.A, z.B)] * 5
        with pytest.raises(ValueError):
            fit_linear_rate(rep, z)

    def test_report_with_geometric_history(self):
        # factor iterates A_k = A# + 0.5^k E with B fixed, X unobserved-free
        a_ref = QMatrix.eye(3)
        b = QMatrix.zeros(3, 3)
        e = QMatrix.from_planes(np.diag([1.0, 0.0, 0.0]))
        ref = SolverState(a_ref, b, QMatrix.zeros(3, 3))
        rep = ConvergenceReport(lam=1.0, initial_objective=1.0, initial_residual=1.0,
                                mask=ObservationMask.full(3, 3))
        rep.history = [(a_ref + 0.5 ** k * e, b) for k in range(20)]
        fit = fit_linear_rate(rep, ref)
        assert fit.sigma == pytest.approx(0.5, rel=1e-10)
        assert fit.r2 == pytest.approx(1.0, abs=1e-10)

    def test_recovery_run_is_linear(self, rng):
        d = low_rank(rng, 30, 2, 25)
        mask = ObservationMask.random(30, 25, 0.3, seed=1)
        _, rep = run(d, mask, SolverConfig(rank=2))
        assert rep.status == CONVERGED and rep.rate is not None
        assert rep.rate.sigma < 1 and rep.rate.r2 >= 0.95
