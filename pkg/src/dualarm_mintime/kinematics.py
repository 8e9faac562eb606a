"""Serial-chain kinematics for the dual-arm system.

Arms are chains of revolute joints. Each joint contributes a fixed link
transform followed by a rotation of angle q about a fixed axis; an optional
tool transform after the last joint places the end effector:

    T_ee(q) = base * prod_j (link_j * Rot(axis_j, q_j)) * tool

Poses are (rotation, translation) pairs; forward kinematics is vectorized
over arbitrary leading batch axes of q, which is what makes sampling-based
optimization over thousands of candidate trajectories cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .parameterization import BasisConfig, basis_matrix
from .rotations import log_so3, rotation_about_axis, skew

_ORTHONORMAL_TOL = 1e-9
_AXIS_TOL = 1e-9
_EYE3 = np.eye(3)


def _check_rotation(rot: np.ndarray, what: str) -> np.ndarray:
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        raise ValueError(f"{what} rotation must be 3x3, got {rot.shape}")
    if np.max(np.abs(rot.T @ rot - np.eye(3))) > _ORTHONORMAL_TOL:
        raise ValueError(f"{what} rotation is not orthonormal within {_ORTHONORMAL_TOL}")
    if np.linalg.det(rot) < 0:
        raise ValueError(f"{what} rotation must be proper (det +1)")
    return rot


@dataclass(frozen=True)
class Joint:
    """Revolute joint: fixed link transform, then rotation about `axis`."""

    axis: np.ndarray
    link_rotation: np.ndarray
    link_translation: np.ndarray
    position_limit: float
    velocity_limit: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,):
            raise ValueError(f"joint axis must be a 3-vector, got shape {axis.shape}")
        if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
            raise ValueError("joint axis must be unit norm")
        rot = _check_rotation(self.link_rotation, "joint link")
        trans = np.asarray(self.link_translation, dtype=float)
        if trans.shape != (3,):
            raise ValueError("joint link translation must be a 3-vector")
        if not self.position_limit > 0:
            raise ValueError(f"position limit must be positive, got {self.position_limit}")
        if not self.velocity_limit > 0:
            raise ValueError(f"velocity limit must be positive, got {self.velocity_limit}")
        for arr in (axis, rot, trans):
            arr.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "link_rotation", rot)
        object.__setattr__(self, "link_translation", trans)


@dataclass(frozen=True)
class ArmModel:
    """Serial chain of revolute joints with base and tool transforms."""

    joints: tuple
    base_rotation: np.ndarray
    base_translation: np.ndarray
    tool_rotation: np.ndarray
    tool_translation: np.ndarray

    def __post_init__(self):
        base_rot = _check_rotation(self.base_rotation, "base")
        tool_rot = _check_rotation(self.tool_rotation, "tool")
        base_t = np.asarray(self.base_translation, dtype=float)
        tool_t = np.asarray(self.tool_translation, dtype=float)
        if base_t.shape != (3,) or tool_t.shape != (3,):
            raise ValueError("base/tool translations must be 3-vectors")
        for arr in (base_rot, base_t, tool_rot, tool_t):
            arr.setflags(write=False)
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "base_rotation", base_rot)
        object.__setattr__(self, "base_translation", base_t)
        object.__setattr__(self, "tool_rotation", tool_rot)
        object.__setattr__(self, "tool_translation", tool_t)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def position_limits(self) -> np.ndarray:
        return np.array([j.position_limit for j in self.joints])

    @property
    def velocity_limits(self) -> np.ndarray:
        return np.array([j.velocity_limit for j in self.joints])


def make_arm(
    joints: Sequence[Joint],
    base_rotation=None,
    base_translation=(0.0, 0.0, 0.0),
    tool_rotation=None,
    tool_translation=(0.0, 0.0, 0.0),
) -> ArmModel:
    """ArmModel with identity defaults for base and tool transforms."""
    eye = np.eye(3)
    return ArmModel(
        joints=tuple(joints),
        base_rotation=eye if base_rotation is None else base_rotation,
        base_translation=base_translation,
        tool_rotation=eye if tool_rotation is None else tool_rotation,
        tool_translation=tool_translation,
    )


def forward_kinematics(arm: ArmModel, q: np.ndarray):
    """World end-effector pose (rotation, translation) for joint angles q.

    q has shape (dof,) or (..., dof); results broadcast accordingly as
    (..., 3, 3) and (..., 3).
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1:] != (arm.dof,):
        raise ValueError(f"expected {arm.dof} joint angles, got shape {q.shape}")
    batch = q.shape[:-1]
    rot = np.broadcast_to(arm.base_rotation, batch + (3, 3))
    pos = np.broadcast_to(arm.base_translation, batch + (3,))
    for j, joint in enumerate(arm.joints):
        if joint.link_translation.any():
            pos = pos + rot @ joint.link_translation
        if not np.array_equal(joint.link_rotation, _EYE3):
            rot = rot @ joint.link_rotation
        rot = rot @ rotation_about_axis(joint.axis, q[..., j])
    if arm.tool_translation.any():
        pos = pos + rot @ arm.tool_translation
    if not np.array_equal(arm.tool_rotation, _EYE3):
        rot = rot @ arm.tool_rotation
    return np.asarray(rot), np.broadcast_to(pos, batch + (3,))


def joint_frames(arm: ArmModel, q: np.ndarray):
    """World joint axes and origins plus the end-effector pose (single q).

    Returns (axes (dof, 3), origins (dof, 3), ee_rotation, ee_translation);
    axis j passes through origin j.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (arm.dof,):
        raise ValueError(f"expected {arm.dof} joint angles, got shape {q.shape}")
    rot = arm.base_rotation.copy()
    pos = arm.base_translation.copy()
    axes = np.zeros((arm.dof, 3))
    origins = np.zeros((arm.dof, 3))
    for j, joint in enumerate(arm.joints):
        pos = pos + rot @ joint.link_translation
        rot = rot @ joint.link_rotation
        axes[j] = rot @ joint.axis
        origins[j] = pos
        rot = rot @ rotation_about_axis(joint.axis, q[j])
    pos = pos + rot @ arm.tool_translation
    rot = rot @ arm.tool_rotation
    return axes, origins, rot, pos


def jacobian(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian (6, dof): rows 0:3 linear, 3:6 angular, world frame."""
    axes, origins, _, ee_pos = joint_frames(arm, q)
    jac = np.zeros((6, arm.dof))
    if arm.dof:
        jac[0:3] = np.cross(axes, ee_pos - origins).T
        jac[3:6] = axes.T
    return jac


def split_joints(arm1: ArmModel, arm2: ArmModel, q: np.ndarray):
    q = np.asarray(q, dtype=float)
    n = arm1.dof + arm2.dof
    if q.shape[-1:] != (n,):
        raise ValueError(f"expected {n} joint angles (both arms), got shape {q.shape}")
    return q[..., : arm1.dof], q[..., arm1.dof :]


def relative_pose(arm1: ArmModel, arm2: ArmModel, q: np.ndarray):
    """Pose of arm-2 end effector in the arm-1 end-effector frame.

    q stacks both arms' angles, shape (..., dof1+dof2). Returns
    (rotation (..., 3, 3), translation (..., 3)).
    """
    q1, q2 = split_joints(arm1, arm2, q)
    rot1, pos1 = forward_kinematics(arm1, q1)
    rot2, pos2 = forward_kinematics(arm2, q2)
    rot1_t = np.swapaxes(rot1, -1, -2)
    rel_rot = rot1_t @ rot2
    rel_pos = np.einsum("...ij,...j->...i", rot1_t, pos2 - pos1)
    return rel_rot, rel_pos


def relative_jacobian(arm1: ArmModel, arm2: ArmModel, q: np.ndarray) -> np.ndarray:
    """Jacobian of the relative pose twist, expressed in the arm-1 EE frame.

    Maps stacked joint rates to [d/dt translation; relative angular
    velocity] of the arm-2 EE pose seen from the arm-1 EE frame.
    """
    q1, q2 = split_joints(arm1, arm2, q)
    axes1, origins1, rot1, pos1 = joint_frames(arm1, q1)
    axes2, origins2, _, pos2 = joint_frames(arm2, q2)
    n = arm1.dof + arm2.dof
    jac = np.zeros((6, n))
    delta = pos2 - pos1
    rot1_t = rot1.T
    if arm1.dof:
        lin1 = np.cross(axes1, pos1 - origins1).T  # d pos1 / d q1
        ang1 = axes1.T
        # translation: R1^T (-v1 + (p2-p1) x w1); rotation: -R1^T w1
        jac[0:3, : arm1.dof] = rot1_t @ (skew(delta) @ ang1 - lin1)
        jac[3:6, : arm1.dof] = -rot1_t @ ang1
    if arm2.dof:
        lin2 = np.cross(axes2, pos2 - origins2).T
        ang2 = axes2.T
        jac[0:3, arm1.dof :] = rot1_t @ lin2
        jac[3:6, arm1.dof :] = rot1_t @ ang2
    return jac


@dataclass(frozen=True)
class DesiredPath:
    """Desired relative poses (arm-2 EE in arm-1 EE frame) per path sample."""

    rotations: np.ndarray  # (N+1, 3, 3)
    translations: np.ndarray  # (N+1, 3)

    def __post_init__(self):
        rot = np.asarray(self.rotations, dtype=float)
        pos = np.asarray(self.translations, dtype=float)
        if rot.ndim != 3 or rot.shape[1:] != (3, 3):
            raise ValueError(f"rotations must be (N+1, 3, 3), got {rot.shape}")
        if pos.shape != (rot.shape[0], 3):
            raise ValueError(f"translations must be ({rot.shape[0]}, 3), got {pos.shape}")
        for mat in rot:
            _check_rotation(mat, "desired path")
        rot.setflags(write=False)
        pos.setflags(write=False)
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "translations", pos)

    def __len__(self) -> int:
        return self.rotations.shape[0]


def pose_error(rel_rot, rel_pos, des_rot, des_pos) -> np.ndarray:
    """6-vector [translation error; rotation log error], arm-1 EE frame.

    Zero iff the achieved relative pose equals the desired one; smooth near
    identity. The rotation part is log(R_des R_rel^T) (axis-angle, radians).
    """
    err = np.empty(6)
    err[0:3] = des_pos - rel_pos
    err[3:6] = log_so3(np.asarray(des_rot) @ np.asarray(rel_rot).T)
    return err


@dataclass(frozen=True)
class IKResult:
    """Joint rows achieved per path sample plus convergence diagnostics."""

    q: np.ndarray  # (N+1, n)
    residuals: np.ndarray  # (N+1,) pose-error norms
    converged: np.ndarray  # (N+1,) bool
    iterations: np.ndarray  # (N+1,) int

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def failures(self):
        """(sample index, residual) pairs for non-converged samples."""
        idx = np.flatnonzero(~self.converged)
        return [(int(i), float(self.residuals[i])) for i in idx]


def inverse_kinematics_path(
    arm1: ArmModel,
    arm2: ArmModel,
    path: DesiredPath,
    q_init: np.ndarray,
    tol: float = 1e-8,
    max_iters: int = 150,
    damping: float = 1e-3,
    step_cap: float = 0.2,
) -> IKResult:
    """Damped-least-squares IK along the whole path, warm-started sample to sample.

    Per sample, iterates q += J^T (J J^T + damping^2 I)^-1 e with per-joint
    steps capped at `step_cap` rad until the pose-error norm drops to `tol`
    or `max_iters` is hit. Non-convergence is reported, not raised; callers
    decide whether the residual is acceptable.
    """
    n = arm1.dof + arm2.dof
    q_init = np.asarray(q_init, dtype=float)
    if q_init.shape != (n,):
        raise ValueError(f"q_init must have {n} entries, got shape {q_init.shape}")
    n_samples = len(path)
    q_out = np.zeros((n_samples, n))
    residuals = np.zeros(n_samples)
    converged = np.zeros(n_samples, dtype=bool)
    iterations = np.zeros(n_samples, dtype=int)
    damping_sq = damping * damping
    q = q_init.copy()
    for i in range(n_samples):
        des_rot = path.rotations[i]
        des_pos = path.translations[i]
        for it in range(max_iters + 1):
            rel_rot, rel_pos = relative_pose(arm1, arm2, q)
            err = pose_error(rel_rot, rel_pos, des_rot, des_pos)
            err_norm = float(np.linalg.norm(err))
            if err_norm <= tol or it == max_iters:
                residuals[i] = err_norm
                converged[i] = err_norm <= tol
                iterations[i] = it
                break
            jac = relative_jacobian(arm1, arm2, q)
            gram = jac @ jac.T
            gram[np.diag_indices_from(gram)] += damping_sq
            step = jac.T @ np.linalg.solve(gram, err)
            np.clip(step, -step_cap, step_cap, out=step)
            q = q + step
        q_out[i] = q
    return IKResult(q=q_out, residuals=residuals, converged=converged, iterations=iterations)


def fit_nominal_coefficients(q_path: np.ndarray, cfg: BasisConfig) -> np.ndarray:
    """Per-joint least-squares fit of sampled joint positions onto the basis.

    Returns theta0 with shape (n, d) minimizing the squared residual of
    q_path (shape (N+1, n)) against the basis rows. Requires N+1 >= d.
    """
    q_path = np.asarray(q_path, dtype=float)
    if q_path.ndim != 2 or q_path.shape[0] != cfg.n_samples:
        raise ValueError(
            f"q_path must have shape ({cfg.n_samples}, n), got {q_path.shape}"
        )
    if cfg.n_samples < cfg.d:
        raise ValueError(f"need at least d={cfg.d} samples to fit, got {cfg.n_samples}")
    basis = basis_matrix(cfg)
    if np.linalg.matrix_rank(basis) < cfg.d:
        # Cannot happen for distinct s and monomial columns; fail loudly anyway.
        raise np.linalg.LinAlgError("basis matrix is rank deficient")
    theta_t, *_ = np.linalg.lstsq(basis, q_path, rcond=None)
    return theta_t.T
