"""Cost evaluation: traversal time, relative Cartesian error, adaptive penalty.

The traversal-time term V is the exact minimum time for the discrete joint
path under per-joint velocity limits: each segment is traversed at constant
joint rates, so its minimum duration equals the binding joint's time
|dq_j| / v_limit_j, and segment times add up. The tracking term E is the
L-infinity over path samples of a mixed translation/rotation error of the
achieved relative pose against the desired one. The scalarized cost is

    R = V + lam * (E - epsilon)

with an adaptive weight lam updated once per solver step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .fastpath import NUMBA_AVAILABLE, ChainErrorKernel
from .kinematics import ArmModel, DesiredPath, relative_pose
from .parameterization import BasisConfig, ExplorationBounds, basis_matrix, map_latent
from .rotations import rotation_angle

PENALTY_SIGNS = ("dual_ascent", "paper_literal")

ArrayOrFloat = Union[float, np.ndarray]


@dataclass(frozen=True)
class ObjectiveConfig:
    """Tolerance and penalty-dynamics parameters.

    epsilon: Cartesian error tolerance (feasible when E <= epsilon).
    gamma: penalty step size, in (0, 1).
    lambda0: initial penalty weight, >= 0.
    orientation_weight: meters per radian mixed into the pose error norm;
        0 gives position-only tracking.
    penalty_sign: "dual_ascent" raises lam on violation (default);
        "paper_literal" applies the printed update, which lowers it.
    """

    epsilon: float
    gamma: float = 0.1
    lambda0: float = 1.0
    orientation_weight: float = 1.0
    penalty_sign: str = "dual_ascent"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.lambda0 < 0:
            raise ValueError(f"lambda0 must be >= 0, got {self.lambda0}")
        if self.orientation_weight < 0:
            raise ValueError(f"orientation_weight must be >= 0, got {self.orientation_weight}")
        if self.penalty_sign not in PENALTY_SIGNS:
            raise ValueError(f"penalty_sign must be one of {PENALTY_SIGNS}")


@dataclass(frozen=True)
class Evaluation:
    """(V, E, R, feasible) of one candidate or a batch (array fields)."""

    V: ArrayOrFloat
    E: ArrayOrFloat
    R: ArrayOrFloat
    feasible: Union[bool, np.ndarray]


def min_time(traj: np.ndarray, velocity_limits: np.ndarray) -> ArrayOrFloat:
    """Minimum traversal time of the sampled joint path under rate limits.

    traj has shape (N+1, n) or (B, N+1, n); the result is a float or (B,).
    Exact for the constraint set |qdot_j| <= velocity_limits[j]: per segment
    the optimum is the binding joint's time, and times are additive.
    """
    traj = np.asarray(traj, dtype=float)
    velocity_limits = np.asarray(velocity_limits, dtype=float)
    if traj.shape[-1] != velocity_limits.shape[0]:
        raise ValueError(
            f"trajectory has {traj.shape[-1]} joints but {velocity_limits.shape[0]} limits given"
        )
    if np.any(velocity_limits <= 0):
        raise ValueError("velocity limits must be positive")
    seg_times = np.abs(np.diff(traj, axis=-2)) / velocity_limits
    total = seg_times.max(axis=-1).sum(axis=-1)
    return float(total) if total.ndim == 0 else total


def pose_error_norms(
    traj: np.ndarray,
    arm1: ArmModel,
    arm2: ArmModel,
    path: DesiredPath,
):
    """Per-sample translation and rotation error magnitudes.

    traj is (..., N+1, n); returns (translation_err, rotation_err) each of
    shape (..., N+1). Rotation error is the angle of the residual rotation.
    """
    rel_rot, rel_pos = relative_pose(arm1, arm2, traj)
    trans_err = np.linalg.norm(rel_pos - path.translations, axis=-1)
    residual = np.swapaxes(path.rotations, -1, -2) @ rel_rot
    rot_err = rotation_angle(residual)
    return trans_err, rot_err


def cartesian_error(
    traj: np.ndarray,
    arm1: ArmModel,
    arm2: ArmModel,
    path: DesiredPath,
    orientation_weight: float = 1.0,
) -> ArrayOrFloat:
    """L-infinity over samples of ||p err|| + weight * ||rotation log err||."""
    trans_err, rot_err = pose_error_norms(traj, arm1, arm2, path)
    mixed = trans_err + orientation_weight * rot_err
    worst = mixed.max(axis=-1)
    return float(worst) if worst.ndim == 0 else worst


def penalized_cost(V: ArrayOrFloat, E: ArrayOrFloat, lam: float, epsilon: float) -> Evaluation:
    """Assemble R = V + lam*(E - epsilon) and the feasibility flag."""
    if lam < 0:
        raise ValueError(f"penalty weight must be >= 0, got {lam}")
    R = V + lam * (E - epsilon)
    feasible = E <= epsilon
    return Evaluation(V=V, E=E, R=R, feasible=feasible)


def update_penalty(lam: float, E: float, cfg: ObjectiveConfig) -> float:
    """One penalty-weight step; never returns a negative weight.

    dual_ascent grows the weight while the constraint is violated
    (lam + gamma*(E - epsilon)); paper_literal applies the opposite sign
    (lam - gamma*(E - epsilon)).
    """
    if lam < 0:
        raise ValueError(f"penalty weight must be >= 0, got {lam}")
    delta = cfg.gamma * (E - cfg.epsilon)
    if cfg.penalty_sign == "dual_ascent":
        return max(0.0, lam + delta)
    return max(0.0, lam - delta)


class TrajectoryObjective:
    """Batch evaluator of (V, E, R) over latent candidates for one problem.

    Owns the pieces an evaluation composes: both arm models, the desired
    relative path, the basis, and the exploration bounds. All evaluations
    are pure; a single instance can be shared across workers.
    """

    def __init__(
        self,
        arm1: ArmModel,
        arm2: ArmModel,
        basis: BasisConfig,
        path: DesiredPath,
        bounds: ExplorationBounds,
        config: ObjectiveConfig,
    ):
        n = arm1.dof + arm2.dof
        if bounds.n_joints != n:
            raise ValueError(f"bounds cover {bounds.n_joints} joints, arms have {n}")
        if bounds.d != basis.d:
            raise ValueError(f"bounds have d={bounds.d}, basis d={basis.d}")
        if len(path) != basis.n_samples:
            raise ValueError(
                f"path length {len(path)} does not match basis samples {basis.n_samples}"
            )
        self.arm1 = arm1
        self.arm2 = arm2
        self.basis = basis
        self.path = path
        self.bounds = bounds
        self.config = config
        self.velocity_limits = np.concatenate(
            [arm1.velocity_limits, arm2.velocity_limits]
        )
        self._basis_matrix = basis_matrix(basis)
        self._error_kernel = ChainErrorKernel(arm1, arm2, path) if NUMBA_AVAILABLE else None
        self.evaluations = 0  # total candidates evaluated, for budget audits

    @property
    def dim(self) -> int:
        return self.bounds.dim

    @property
    def epsilon(self) -> float:
        return self.config.epsilon

    def trajectories(self, thetas: np.ndarray) -> np.ndarray:
        """Joint trajectories (..., N+1, n) for coefficients (..., n, d)."""
        return np.einsum("id,...nd->...in", self._basis_matrix, np.asarray(thetas, dtype=float))

    def evaluate_coefficients(self, thetas: np.ndarray, lam: float) -> Evaluation:
        """Evaluate coefficient matrices of shape (n, d) or (B, n, d)."""
        thetas = np.asarray(thetas, dtype=float)
        traj = self.trajectories(thetas)
        V = min_time(traj, self.velocity_limits)
        if self._error_kernel is not None:
            trans_err, rot_err = self._error_kernel(traj)
            mixed = trans_err + self.config.orientation_weight * rot_err
            worst = mixed.max(axis=-1)
            E = float(worst) if worst.ndim == 0 else worst
        else:
            E = cartesian_error(
                traj, self.arm1, self.arm2, self.path, self.config.orientation_weight
            )
        self.evaluations += 1 if thetas.ndim == 2 else thetas.shape[0]
        return penalized_cost(V, E, lam, self.config.epsilon)

    def evaluate_latent(self, y: np.ndarray, lam: float) -> Evaluation:
        """Evaluate latent vectors of shape (dim,) or (B, dim)."""
        return self.evaluate_coefficients(map_latent(y, self.bounds), lam)

    def theta_of(self, y: np.ndarray) -> np.ndarray:
        return map_latent(y, self.bounds)
