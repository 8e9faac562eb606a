"""Noise schedule, batch sampling, softmax weighting, reverse update, solve."""
import numpy as np
import pytest
from mpmath import mp

from dualarm_mintime import (
    NoiseSchedule,
    SolverConfig,
    build_schedule,
    load_builtin,
    solve,
)
from dualarm_mintime.diffusion import (
    DiffusionState,
    make_rng,
    reverse_update,
    sample_batch,
    softmax_weights,
)
from dualarm_mintime.runner import prepare


class TestSchedule:
    def test_single_step(self):
        sched = build_schedule(SolverConfig(n_steps=1, beta_min=0.02, beta_max=0.02))
        assert sched.alpha_bars[0] == 1.0
        assert sched.alpha_bars[1] == pytest.approx(0.98, abs=0)
        assert sched.alphas[0] == pytest.approx(0.98, abs=0)

    @pytest.mark.parametrize("kind", ["linear_beta", "cosine"])
    def test_product_identity_exact(self, kind):
        sched = build_schedule(SolverConfig(n_steps=64, schedule_kind=kind))
        for t in range(1, 65):
            # cumprod computes exactly fl(bar_{t-1} * alpha_t); the identity
            # holds bit for bit by construction
            assert sched.alpha_bars[t] == sched.alpha_bars[t - 1] * sched.alphas[t - 1]

    @pytest.mark.parametrize("kind", ["linear_beta", "cosine"])
    def test_invariants(self, kind):
        sched = build_schedule(SolverConfig(n_steps=100, schedule_kind=kind))
        assert sched.alpha_bars[0] == 1.0
        assert np.all(np.diff(sched.alpha_bars) < 0)
        assert np.all(sched.alpha_bars > 0)
        assert np.all((sched.alphas > 0) & (sched.alphas < 1))

    def test_high_precision_product_oracle(self):
        cfg = SolverConfig(n_steps=100)
        sched = build_schedule(cfg)
        betas = np.linspace(cfg.beta_min, cfg.beta_max, cfg.n_steps)
        with mp.workdps(60):
            exact = mp.mpf(1)
            for beta in betas:
                exact *= 1 - mp.mpf(float(beta))
            assert abs(float(exact) - sched.alpha_bars[-1]) <= 1e-14

    def test_linear_beta_noise_grows_with_t(self):
        sched = build_schedule(SolverConfig(n_steps=50))
        assert np.all(np.diff(sched.alphas) < 0)  # larger t, larger beta

    def test_validation(self):
        with pytest.raises(ValueError, match="beta"):
            SolverConfig(beta_min=0.0)
        with pytest.raises(ValueError, match="alpha_bars"):
            NoiseSchedule(alphas=np.array([0.5]), alpha_bars=np.array([1.0, 0.5, 0.1]))
        with pytest.raises(ValueError, match="decreasing"):
            NoiseSchedule(alphas=np.array([0.5, 0.5]), alpha_bars=np.array([1.0, 0.5, 0.5]))


class TestSampleBatch:
    def test_final_step_degenerate(self):
        sched = build_schedule(SolverConfig(n_steps=5))
        y = np.array([0.3, -2.0, 0.9])
        state = DiffusionState(y=y, t=1, lam=0.0, rng=make_rng(0))
        batch = sample_batch(state, sched, 8)
        assert batch.shape == (8, 3)
        assert np.array_equal(batch, np.tile(np.clip(y, -1, 1), (8, 1)))

    def test_fixed_seed_bit_identical(self):
        sched = build_schedule(SolverConfig(n_steps=20))
        y = np.full(6, 0.1)
        b1 = sample_batch(DiffusionState(y, 10, 0.0, make_rng(42)), sched, 64)
        b2 = sample_batch(DiffusionState(y, 10, 0.0, make_rng(42)), sched, 64)
        assert np.array_equal(b1, b2)

    def test_monte_carlo_moments(self):
        sched = build_schedule(SolverConfig(n_steps=40))
        t = 3  # small variance keeps the clip inactive
        bar_prev = sched.alpha_bar(t - 1)
        std = np.sqrt(1.0 / bar_prev - 1.0)
        assert std < 0.12
        y = np.array([0.05, -0.1, 0.08, 0.0])
        state = DiffusionState(y=y, t=t, lam=0.0, rng=make_rng(7))
        draws = sample_batch(state, sched, 100_000)
        target = y / np.sqrt(bar_prev)
        stderr = std / np.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - target) <= 4 * stderr)

    def test_all_samples_in_box(self):
        sched = build_schedule(SolverConfig(n_steps=30))
        state = DiffusionState(np.zeros(5), 30, 0.0, make_rng(3))
        batch = sample_batch(state, sched, 256)
        assert np.all(np.abs(batch) <= 1.0)


class TestSoftmaxWeights:
    def test_uniform_on_equal(self):
        w = softmax_weights(np.full(10, 3.7), 0.1)
        assert np.array_equal(w, np.full(10, 0.1))

    def test_two_point_formula(self):
        tau = 0.25
        w = softmax_weights(np.array([1.0, 0.0]), tau)
        a = 1.0 / tau  # standardized scores are +-1, scaled by 1/tau
        expected = np.array([np.exp(a), np.exp(-a)])
        expected /= expected.sum()
        assert np.allclose(w, expected, atol=1e-14)

    def test_sum_nonneg_shift(self, rng):
        for _ in range(100):
            scores = rng.normal(size=32) * rng.uniform(0.1, 10)
            w = softmax_weights(scores, 0.3)
            assert abs(w.sum() - 1.0) <= 1e-12
            assert np.all(w >= 0)
            w_shift = softmax_weights(scores + 123.456, 0.3)
            assert np.allclose(w, w_shift, atol=1e-12)

    def test_shift_invariance_exact_case(self):
        scores = np.array([1.0, 4.0, 2.0, -3.0])  # exact float arithmetic
        assert np.array_equal(
            softmax_weights(scores, 0.5), softmax_weights(scores + 64.0, 0.5)
        )

    def test_permutation_equivariance(self, rng):
        scores = rng.normal(size=16)
        perm = rng.permutation(16)
        assert np.allclose(
            softmax_weights(scores, 0.2)[perm],
            softmax_weights(scores[perm], 0.2),
            atol=1e-15,
        )

    def test_lower_tau_concentrates(self, rng):
        scores = rng.normal(size=20)
        w_hot = softmax_weights(scores, 0.9)
        w_cold = softmax_weights(scores, 0.05)
        assert w_cold.max() > w_hot.max()
        assert int(np.argmax(w_cold)) == int(np.argmax(scores))

    def test_tiny_temperature_stable(self, rng):
        w = softmax_weights(rng.normal(size=64), 0.01)
        assert np.isfinite(w).all()
        assert abs(w.sum() - 1.0) <= 1e-12

    def test_needs_two(self):
        with pytest.raises(ValueError, match=">= 2"):
            softmax_weights(np.array([1.0]), 0.1)


class TestReverseUpdate:
    def test_algebraic_identity(self, rng):
        for n_steps in (3, 17, 100):
            sched = build_schedule(SolverConfig(n_steps=n_steps))
            for _ in range(10):
                t = int(rng.integers(1, n_steps + 1))
                y = rng.normal(size=8)
                y_weighted = rng.uniform(-1, 1, size=8)
                out = reverse_update(y, y_weighted, sched, t)
                expected = np.sqrt(sched.alpha_bar(t - 1)) * y_weighted
                assert np.allclose(out, expected, rtol=1e-12, atol=1e-13)

    def test_score_fixed_point(self):
        sched = build_schedule(SolverConfig(n_steps=10))
        t = 5
        y = np.array([0.4, -0.2])
        y_weighted = y / np.sqrt(sched.alpha_bar(t))
        out = reverse_update(y, y_weighted, sched, t)
        assert np.allclose(out, y / np.sqrt(sched.alpha(t)), atol=1e-14)

    def test_zero_mean_collapses(self):
        sched = build_schedule(SolverConfig(n_steps=10))
        out = reverse_update(np.array([0.7, -0.7]), np.zeros(2), sched, 4)
        assert np.allclose(out, 0.0, atol=1e-15)


class QuadraticObjective:
    """Separable quadratic in the latent box (synthetic test stand-in)."""

    def __init__(self, target, epsilon=1.0):
        self.target = np.asarray(target, dtype=float)
        from dualarm_mintime import ObjectiveConfig

        self.config = ObjectiveConfig(epsilon=epsilon, lambda0=0.0)
        self.evaluations = 0

    @property
    def dim(self):
        return self.target.size

    @property
    def epsilon(self):
        return self.config.epsilon

    def evaluate_latent(self, y, lam):
        from dualarm_mintime.objective import penalized_cost

        y = np.atleast_2d(np.asarray(y, dtype=float))
        V = np.sum((y - self.target) ** 2, axis=1)
        E = np.zeros(V.shape)
        self.evaluations += y.shape[0]
        ev = penalized_cost(V, E, lam, self.config.epsilon)
        if ev.V.shape == (1,):
            return penalized_cost(float(V[0]), 0.0, lam, self.config.epsilon)
        return ev

    def theta_of(self, y):
        return np.asarray(y, dtype=float).copy()


class TestSolve:
    def test_quadratic_converges(self):
        target = np.array([0.4, -0.55, 0.2, 0.05, -0.3])
        obj = QuadraticObjective(target)
        theta, trace = solve(obj, SolverConfig(n_steps=100, n_samples=256, seed=3))
        assert np.linalg.norm(theta - target) <= 0.05
        assert len(trace.steps) == 100

    def test_zero_sigma_returns_nominal(self):
        scenario = load_builtin("toy_1dof")
        problem = prepare(scenario)
        frozen = np.zeros_like(problem.objective.bounds.sigma)
        from dualarm_mintime.parameterization import ExplorationBounds
        from dualarm_mintime.objective import TrajectoryObjective

        bounds0 = ExplorationBounds(
            theta0=problem.objective.bounds.theta0, sigma=frozen
        )
        obj = TrajectoryObjective(
            scenario.arm1, scenario.arm2, scenario.basis, scenario.path,
            bounds0, scenario.objective,
        )
        for seed, steps in ((0, 5), (9, 23)):
            theta, _ = solve(obj, SolverConfig(n_steps=steps, n_samples=16, seed=seed))
            assert np.array_equal(theta, problem.objective.bounds.theta0)

    def test_deterministic_traces(self):
        scenario = load_builtin("toy_1dof")
        cfg = SolverConfig(n_steps=30, n_samples=64, seed=11)
        t1 = solve(prepare(scenario).objective, cfg)[1]
        t2 = solve(prepare(scenario).objective, cfg)[1]
        for a, b in zip(t1.steps, t2.steps):
            assert (a.t, a.lam, a.best_R, a.mean_R, a.V, a.E) == (
                b.t, b.lam, b.best_R, b.mean_R, b.V, b.E,
            )
        assert np.array_equal(t1.theta_star, t2.theta_star)

    def test_different_seeds_differ(self):
        scenario = load_builtin("toy_1dof")
        obj = prepare(scenario).objective
        t1 = solve(obj, SolverConfig(n_steps=5, n_samples=32, seed=0))[1]
        t2 = solve(obj, SolverConfig(n_steps=5, n_samples=32, seed=1))[1]
        assert t1.steps[0].best_R != t2.steps[0].best_R

    def test_toy_reaches_analytic_minimum(self):
        """Slope coefficient box is [0.6, 1.0] at v=1: min time is 0.6 s."""
        scenario = load_builtin("toy_1dof")
        problem = prepare(scenario)
        v_min = 0.6
        for seed in range(10):
            theta, trace = solve(problem.objective, SolverConfig(
                n_steps=100, n_samples=128, seed=seed))
            assert trace.final.V >= v_min - 1e-9
            assert trace.final.R <= 1.05 * v_min, f"seed {seed}: R={trace.final.R}"

    def test_lambda_stays_nonnegative(self):
        scenario = load_builtin("toy_1dof")
        _, trace = solve(prepare(scenario).objective, SolverConfig(
            n_steps=40, n_samples=32, seed=2))
        assert all(s.lam >= 0 for s in trace.steps)
        assert trace.meta["final_lambda"] >= 0
