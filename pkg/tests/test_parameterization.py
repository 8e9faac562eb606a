"""Basis, latent box mapping, and the joint-limit-safe exploration bounds."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualarm_mintime.parameterization import (
    BasisConfig,
    ExplorationBounds,
    basis_matrix,
    basis_row,
    invert_latent,
    map_latent,
    reconstruct_trajectory,
    select_sigma,
)


class TestBasisRow:
    def test_zero_powers(self):
        cfg = BasisConfig(d=3, N=4)
        assert np.array_equal(basis_row(0.0, cfg), [0.0, 0.0, 1.0])

    def test_all_ones_at_one(self):
        for d in (1, 2, 5):
            for order in ("degree_dm1", "paper_literal"):
                cfg = BasisConfig(d=d, N=2, exponent_order=order)
                assert np.array_equal(basis_row(1.0, cfg), np.ones(d))

    def test_midpoint(self):
        cfg = BasisConfig(d=3, N=4)
        assert np.allclose(basis_row(0.5, cfg), [0.25, 0.5, 1.0])

    def test_paper_literal_has_no_constant(self):
        cfg = BasisConfig(d=3, N=4, exponent_order="paper_literal")
        assert np.array_equal(cfg.exponents(), [3, 2, 1])
        assert np.array_equal(basis_row(0.0, cfg), np.zeros(3))

    def test_domain_error(self):
        cfg = BasisConfig(d=2, N=2)
        with pytest.raises(ValueError, match="outside"):
            basis_row(1.5, cfg)
        with pytest.raises(ValueError, match="outside"):
            basis_row(-0.1, cfg)

    @given(st.floats(0.0, 1.0), st.integers(1, 8), st.sampled_from(["degree_dm1", "paper_literal"]))
    @settings(max_examples=200, deadline=None)
    def test_magnitude_bounded(self, s, d, order):
        cfg = BasisConfig(d=d, N=2, exponent_order=order)
        assert np.all(np.abs(basis_row(s, cfg)) <= 1.0)


class TestBasisConfig:
    def test_grid_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            BasisConfig(d=2, N=3, s_grid=np.array([0.0, 0.6, 0.5, 1.0]))
        with pytest.raises(ValueError, match="endpoints"):
            BasisConfig(d=2, N=2, s_grid=np.array([0.0, 0.5, 0.9]))
        with pytest.raises(ValueError, match="d must be"):
            BasisConfig(d=0, N=2)

    def test_default_grid_uniform(self):
        cfg = BasisConfig(d=2, N=4)
        assert np.allclose(cfg.s_grid, [0.0, 0.25, 0.5, 0.75, 1.0])


class TestReconstruct:
    def test_zero_coefficients(self):
        cfg = BasisConfig(d=3, N=5)
        traj = reconstruct_trajectory(np.zeros((2, 3)), cfg)
        assert traj.shape == (6, 2)
        assert np.all(traj == 0.0)

    def test_constant_polynomial(self):
        cfg = BasisConfig(d=1, N=3)
        traj = reconstruct_trajectory(np.array([[0.7]]), cfg)
        assert np.allclose(traj, 0.7)

    def test_identity_polynomial(self):
        cfg = BasisConfig(d=2, N=2, s_grid=np.array([0.0, 0.5, 1.0]))
        traj = reconstruct_trajectory(np.array([[1.0, 0.0]]), cfg)
        assert np.allclose(traj[:, 0], [0.0, 0.5, 1.0])

    def test_linearity(self, rng):
        cfg = BasisConfig(d=4, N=7)
        t1, t2 = rng.normal(size=(2, 3, 4))
        a, b = 1.7, -0.4
        lhs = reconstruct_trajectory(a * t1 + b * t2, cfg)
        rhs = a * reconstruct_trajectory(t1, cfg) + b * reconstruct_trajectory(t2, cfg)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_batched_matches_loop(self, rng):
        cfg = BasisConfig(d=3, N=6)
        thetas = rng.normal(size=(5, 2, 3))
        batched = reconstruct_trajectory(thetas, cfg)
        for b in range(5):
            assert np.array_equal(batched[b], reconstruct_trajectory(thetas[b], cfg))

    def test_shape_mismatch(self):
        cfg = BasisConfig(d=3, N=5)
        with pytest.raises(ValueError, match="shape"):
            reconstruct_trajectory(np.zeros((2, 4)), cfg)


class TestSelectSigma:
    def test_basic_slack(self):
        cfg = BasisConfig(d=4, N=4)
        theta0 = np.full((1, 4), 0.1)
        bounds = select_sigma(theta0, np.array([2.0]), cfg)
        assert np.allclose(bounds.sigma, 0.4)
        assert not bounds.budget_exceeded.any()

    def test_clamped_with_warning(self):
        cfg = BasisConfig(d=2, N=4)
        bounds = select_sigma(np.array([[0.9, 0.2]]), np.array([1.0]), cfg)
        assert bounds.sigma[0, 0] == 0.0
        assert bounds.budget_exceeded[0, 0]
        assert not bounds.budget_exceeded[0, 1]

    def test_symmetric_case(self):
        cfg = BasisConfig(d=5, N=4)
        bounds = select_sigma(np.zeros((3, 5)), np.full(3, np.pi), cfg)
        assert np.allclose(bounds.sigma, np.pi / 5)

    def test_equality_where_positive(self, rng):
        cfg = BasisConfig(d=3, N=4)
        theta0 = rng.uniform(-1, 1, size=(4, 3))
        q_lim = rng.uniform(0.5, 3.0, size=4)
        bounds = select_sigma(theta0, q_lim, cfg)
        total = np.abs(theta0) + bounds.sigma
        budget = q_lim[:, None] / cfg.d
        pos = bounds.sigma > 0
        assert np.allclose(total[pos], np.broadcast_to(budget, total.shape)[pos])
        assert np.all(total[~pos] >= budget[np.nonzero(~pos)[0], 0] - 1e-15)

    def test_rejects_bad_limits(self):
        cfg = BasisConfig(d=2, N=4)
        with pytest.raises(ValueError, match="positive"):
            select_sigma(np.zeros((1, 2)), np.array([-1.0]), cfg)


class TestMapLatent:
    def bounds(self):
        return ExplorationBounds(
            theta0=np.array([[0.1, -0.2], [0.0, 0.3]]),
            sigma=np.array([[0.4, 0.0], [0.2, 0.1]]),
        )

    def test_center(self):
        b = self.bounds()
        assert np.array_equal(map_latent(np.zeros(4), b), b.theta0)

    def test_upper_corner(self):
        b = self.bounds()
        assert np.array_equal(map_latent(np.ones(4), b), b.theta0 + b.sigma)

    def test_arithmetic(self):
        b = ExplorationBounds(theta0=np.array([[0.1]]), sigma=np.array([[0.4]]))
        assert np.isclose(map_latent(np.array([-0.5]), b)[0, 0], -0.1)

    def test_out_of_box_rejected(self):
        b = self.bounds()
        with pytest.raises(ValueError, match="clip"):
            map_latent(np.array([0.0, 0.0, 1.0 + 1e-9, 0.0]), b)
        # within the documented tolerance is accepted
        map_latent(np.array([0.0, 0.0, 1.0 + 1e-13, 0.0]), b)

    def test_joint_major_layout(self):
        b = self.bounds()
        y = np.array([1.0, 0.0, 0.0, 0.0])  # first latent entry is theta[0, 0]
        theta = map_latent(y, b)
        assert theta[0, 0] == b.theta0[0, 0] + b.sigma[0, 0]
        assert np.array_equal(theta.ravel()[1:], b.theta0.ravel()[1:])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_bijection(self, seed):
        r = np.random.default_rng(seed)
        n, d = int(r.integers(1, 5)), int(r.integers(1, 5))
        theta0 = r.uniform(-1, 1, size=(n, d))
        sigma = r.uniform(0.05, 1.0, size=(n, d))
        b = ExplorationBounds(theta0=theta0, sigma=sigma)
        y = r.uniform(-1, 1, size=n * d)
        back = invert_latent(map_latent(y, b), b)
        assert np.allclose(back, y, atol=1e-12)


class TestJointLimitGuarantee:
    """Trajectories from the latent box never exceed the joint limits."""

    def test_random_draws(self, rng):
        eps = np.finfo(float).eps
        for _ in range(300):
            d = int(rng.integers(2, 7))
            n = int(rng.integers(1, 7))
            N = int(rng.integers(2, 51))
            order = "degree_dm1" if rng.random() < 0.5 else "paper_literal"
            cfg = BasisConfig(d=d, N=N, exponent_order=order)
            q_lim = rng.uniform(0.2, 4.0, size=n)
            theta0 = rng.uniform(-1.0, 1.0, size=(n, d)) * (q_lim[:, None] / d)
            bounds = select_sigma(theta0, q_lim, cfg)
            y = rng.uniform(-1, 1, size=n * d)
            if rng.random() < 0.2:
                y = np.sign(rng.normal(size=n * d))  # box corners hit the bound
            traj = reconstruct_trajectory(map_latent(y, bounds), cfg)
            assert np.all(np.abs(traj) <= q_lim * (1 + 4 * eps * d))
