"""Monomial parameterization of joint trajectories and the bounded latent box.

A joint trajectory is a polynomial in the normalized path parameter
s in [0, 1], sampled on a fixed grid of N+1 points. Each joint j has d
coefficients theta[j] and position q[i, j] = sum_k theta[j, k] * p_k(s_i).

Candidates are explored through a latent vector y in [-1, 1]^(n*d) mapped
affinely to coefficients, theta = theta0 + sigma * y. Choosing
|theta0[j, k]| + sigma[j, k] <= q_limit[j] / d per coefficient makes every
trajectory reachable from the box respect |q[i, j]| <= q_limit[j], because
|p_k(s)| <= 1 on [0, 1] for monomials (triangle inequality over d terms).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

EXPONENT_ORDERS = ("degree_dm1", "paper_literal")

# Accepted overshoot when validating that a latent lies in the unit box.
LATENT_BOX_TOL = 1e-12


@dataclass(frozen=True)
class BasisConfig:
    """Monomial basis over a fixed path-sample grid.

    d: number of monomial terms per joint.
    N: number of path segments; the grid has N+1 samples.
    exponent_order:
        "degree_dm1"   -> exponents d-1, d-2, ..., 0 (degree d-1, includes
                          the constant term; default).
        "paper_literal" -> exponents d, d-1, ..., 1 (no constant term).
    s_grid: strictly increasing samples with s_0 = 0 and s_N = 1;
        defaults to the uniform grid i/N.
    """

    d: int
    N: int
    exponent_order: str = "degree_dm1"
    s_grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.exponent_order not in EXPONENT_ORDERS:
            raise ValueError(
                f"exponent_order must be one of {EXPONENT_ORDERS}, got {self.exponent_order!r}"
            )
        if self.s_grid is None:
            grid = np.linspace(0.0, 1.0, self.N + 1)
        else:
            grid = np.asarray(self.s_grid, dtype=float).copy()
        if grid.shape != (self.N + 1,):
            raise ValueError(f"s_grid must have {self.N + 1} entries, got shape {grid.shape}")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ValueError("s_grid endpoints must be exactly 0 and 1")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("s_grid must be strictly increasing")
        grid.setflags(write=False)
        object.__setattr__(self, "s_grid", grid)

    @property
    def n_samples(self) -> int:
        return self.N + 1

    def exponents(self) -> np.ndarray:
        if self.exponent_order == "degree_dm1":
            return np.arange(self.d - 1, -1, -1)
        return np.arange(self.d, 0, -1)


def basis_row(s: float, cfg: BasisConfig) -> np.ndarray:
    """Basis values [p_0(s), ..., p_{d-1}(s)]; every entry is in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"path parameter s={s} outside [0, 1]")
    return np.power(float(s), cfg.exponents().astype(float))


def basis_matrix(cfg: BasisConfig) -> np.ndarray:
    """(N+1, d) matrix with rows basis_row(s_i, cfg)."""
    return np.power(cfg.s_grid[:, None], cfg.exponents()[None, :].astype(float))


def reconstruct_trajectory(theta: np.ndarray, cfg: BasisConfig) -> np.ndarray:
    """Joint positions q[i, j] = sum_k theta[j, k] p_k(s_i).

    theta has shape (n, d) or (B, n, d); the result is (N+1, n) or
    (B, N+1, n). Linear in theta.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim not in (2, 3) or theta.shape[-1] != cfg.d:
        raise ValueError(
            f"theta must have shape (n, {cfg.d}) or (B, n, {cfg.d}), got {theta.shape}"
        )
    basis = basis_matrix(cfg)
    return np.einsum("id,...nd->...in", basis, theta)


@dataclass(frozen=True)
class ExplorationBounds:
    """Box [theta0 - sigma, theta0 + sigma] in coefficient space.

    budget_exceeded flags coefficients where |theta0| alone already exhausts
    the per-coefficient budget q_limit/d, so exploration collapsed to zero
    there (non-fatal; the nominal stays usable).
    """

    theta0: np.ndarray
    sigma: np.ndarray
    budget_exceeded: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        theta0 = np.asarray(self.theta0, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if theta0.ndim != 2 or sigma.shape != theta0.shape:
            raise ValueError(
                f"theta0 and sigma must be matching (n, d) matrices, got {theta0.shape} and {sigma.shape}"
            )
        if not np.all(np.isfinite(theta0)):
            raise ValueError("theta0 must be finite")
        if np.any(sigma < 0):
            raise ValueError("sigma must be non-negative")
        exceeded = self.budget_exceeded
        if exceeded is None:
            exceeded = np.zeros(theta0.shape, dtype=bool)
        exceeded = np.asarray(exceeded, dtype=bool)
        for arr in (theta0, sigma, exceeded):
            arr.setflags(write=False)
        object.__setattr__(self, "theta0", theta0)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "budget_exceeded", exceeded)

    @property
    def n_joints(self) -> int:
        return self.theta0.shape[0]

    @property
    def d(self) -> int:
        return self.theta0.shape[1]

    @property
    def dim(self) -> int:
        return self.theta0.size


def select_sigma(theta0: np.ndarray, q_limits: np.ndarray, cfg: BasisConfig) -> ExplorationBounds:
    """Largest per-coefficient exploration respecting |theta0|+sigma <= q_limit/d.

    sigma[j, k] = max(0, q_limits[j]/d - |theta0[j, k]|). Coefficients whose
    nominal already exceeds the budget get sigma 0 and are flagged in
    budget_exceeded.
    """
    theta0 = np.asarray(theta0, dtype=float)
    q_limits = np.asarray(q_limits, dtype=float)
    if theta0.ndim != 2 or theta0.shape[1] != cfg.d:
        raise ValueError(f"theta0 must have shape (n, {cfg.d}), got {theta0.shape}")
    if q_limits.shape != (theta0.shape[0],):
        raise ValueError(
            f"q_limits must have one entry per joint ({theta0.shape[0]}), got shape {q_limits.shape}"
        )
    if np.any(q_limits <= 0):
        raise ValueError("joint position limits must be positive")
    budget = q_limits[:, None] / cfg.d
    slack = budget - np.abs(theta0)
    sigma = np.maximum(0.0, slack)
    return ExplorationBounds(theta0=theta0, sigma=sigma, budget_exceeded=slack < 0)


def map_latent(y: np.ndarray, bounds: ExplorationBounds) -> np.ndarray:
    """Coefficients theta = theta0 + sigma * y for latents in [-1, 1]^(n*d).

    y has shape (n*d,) or (B, n*d), flattened joint-major (row-major over
    the (n, d) coefficient matrix). Rejects entries outside the unit box by
    more than LATENT_BOX_TOL; callers are expected to clip first.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != bounds.dim:
        raise ValueError(f"latent must have {bounds.dim} entries, got shape {y.shape}")
    if np.any(np.abs(y) > 1.0 + LATENT_BOX_TOL):
        worst = float(np.max(np.abs(y)))
        raise ValueError(f"latent outside [-1, 1] box (max |y| = {worst}); clip before mapping")
    shaped = y.reshape(y.shape[:-1] + (bounds.n_joints, bounds.d))
    return bounds.theta0 + bounds.sigma * shaped


def invert_latent(theta: np.ndarray, bounds: ExplorationBounds) -> np.ndarray:
    """Latent recovering theta where sigma > 0 (0 where sigma == 0)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-2:] != bounds.theta0.shape:
        raise ValueError(
            f"theta must end in shape {bounds.theta0.shape}, got {theta.shape}"
        )
    delta = theta - bounds.theta0
    y = np.divide(delta, bounds.sigma, out=np.zeros_like(delta), where=bounds.sigma > 0)
    return y.reshape(theta.shape[:-2] + (bounds.dim,))
