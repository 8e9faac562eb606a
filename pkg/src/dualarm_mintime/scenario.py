"""Scenario files: the full problem instance as a JSON document.

A scenario bundles both arm models, the basis configuration, the desired
relative path (explicit pose list or a line/arc generator), the objective
and solver configurations, IK settings for the nominal, and a seed.
Rotations are stored as unit quaternions (w, x, y, z) and converted to
matrices on load; quaternions within 1e-6 of unit norm are renormalized,
anything worse is an error.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import BaselineConfig
from .diffusion import SolverConfig
from .kinematics import ArmModel, DesiredPath, Joint, make_arm
from .objective import ObjectiveConfig
from .parameterization import BasisConfig
from .rotations import normalized_quaternion, quat_to_matrix


class ScenarioError(ValueError):
    """A scenario file failed to parse or violates an invariant."""


@dataclass(frozen=True)
class IKSettings:
    q_init: np.ndarray
    tol: float = 1e-8
    max_iters: int = 150


@dataclass(frozen=True)
class Scenario:
    """Validated problem instance; `raw` echoes the source document."""

    name: str
    seed: int
    arm1: ArmModel
    arm2: ArmModel
    basis: BasisConfig
    path: DesiredPath
    objective: ObjectiveConfig
    solver: SolverConfig
    ik: IKSettings
    baseline: BaselineConfig
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def n_joints(self) -> int:
        return self.arm1.dof + self.arm2.dof

    @property
    def position_limits(self) -> np.ndarray:
        return np.concatenate([self.arm1.position_limits, self.arm2.position_limits])

    @property
    def velocity_limits(self) -> np.ndarray:
        return np.concatenate([self.arm1.velocity_limits, self.arm2.velocity_limits])


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise ScenarioError(f"missing required field {key!r} in {where}")
    return data[key]


def _pose_from(data: dict, where: str):
    try:
        quat = normalized_quaternion(np.asarray(_require(data, "quaternion", where), dtype=float))
    except ValueError as exc:
        raise ScenarioError(f"bad quaternion in {where}: {exc}") from exc
    translation = np.asarray(_require(data, "translation", where), dtype=float)
    if translation.shape != (3,):
        raise ScenarioError(f"translation in {where} must have 3 components")
    return quat_to_matrix(quat), translation


def _arm_from(data: dict, which: str) -> ArmModel:
    joints = []
    raw_joints = _require(data, "joints", which)
    for k, j in enumerate(raw_joints):
        where = f"{which}.joints[{k}]"
        axis = np.asarray(_require(j, "axis", where), dtype=float)
        rot, trans = _pose_from(_require(j, "origin", where), f"{where}.origin")
        q_lim = float(_require(j, "position_limit", where))
        v_lim = float(_require(j, "velocity_limit", where))
        if q_lim <= 0:
            raise ScenarioError(f"position_limit of {where} must be positive, got {q_lim}")
        if v_lim <= 0:
            raise ScenarioError(f"velocity_limit of {where} must be positive, got {v_lim}")
        try:
            joints.append(
                Joint(
                    axis=axis,
                    link_rotation=rot,
                    link_translation=trans,
                    position_limit=q_lim,
                    velocity_limit=v_lim,
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"invalid {where}: {exc}") from exc
    base_rot, base_trans = _pose_from(_require(data, "base", which), f"{which}.base")
    if "tool" in data:
        tool_rot, tool_trans = _pose_from(data["tool"], f"{which}.tool")
    else:
        tool_rot, tool_trans = np.eye(3), np.zeros(3)
    try:
        return make_arm(
            joints,
            base_rotation=base_rot,
            base_translation=base_trans,
            tool_rotation=tool_rot,
            tool_translation=tool_trans,
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid {which}: {exc}") from exc


def _orthonormal_frame(normal: np.ndarray):
    """Two unit vectors spanning the plane orthogonal to `normal`."""
    normal = normal / np.linalg.norm(normal)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(normal)))] = 1.0
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def _path_from(data: dict, n_samples: int) -> DesiredPath:
    kind = _require(data, "kind", "path")
    if kind == "explicit":
        poses = _require(data, "poses", "path")
        if len(poses) != n_samples:
            raise ScenarioError(
                f"path length must equal N+1 = {n_samples}, got {len(poses)} poses"
            )
        rotations = np.empty((n_samples, 3, 3))
        translations = np.empty((n_samples, 3))
        for i, pose in enumerate(poses):
            rotations[i], translations[i] = _pose_from(pose, f"path.poses[{i}]")
        return DesiredPath(rotations=rotations, translations=translations)
    if kind == "line":
        rot, _ = _pose_from(
            {"quaternion": _require(data, "quaternion", "path"), "translation": [0, 0, 0]},
            "path",
        )
        start = np.asarray(_require(data, "start", "path"), dtype=float)
        end = np.asarray(_require(data, "end", "path"), dtype=float)
        if start.shape != (3,) or end.shape != (3,):
            raise ScenarioError("path start/end must be 3-vectors")
        frac = np.linspace(0.0, 1.0, n_samples)[:, None]
        translations = start + frac * (end - start)
        rotations = np.broadcast_to(rot, (n_samples, 3, 3)).copy()
        return DesiredPath(rotations=rotations, translations=translations)
    if kind == "arc":
        rot, _ = _pose_from(
            {"quaternion": _require(data, "quaternion", "path"), "translation": [0, 0, 0]},
            "path",
        )
        center = np.asarray(_require(data, "center", "path"), dtype=float)
        normal = np.asarray(_require(data, "normal", "path"), dtype=float)
        radius = float(_require(data, "radius", "path"))
        if radius <= 0:
            raise ScenarioError(f"arc radius must be positive, got {radius}")
        if center.shape != (3,) or normal.shape != (3,) or np.linalg.norm(normal) == 0:
            raise ScenarioError("arc center/normal must be 3-vectors, normal nonzero")
        a0 = float(_require(data, "start_angle", "path"))
        a1 = float(_require(data, "end_angle", "path"))
        u, v = _orthonormal_frame(normal)
        angles = np.linspace(a0, a1, n_samples)
        translations = center + radius * (
            np.cos(angles)[:, None] * u + np.sin(angles)[:, None] * v
        )
        rotations = np.broadcast_to(rot, (n_samples, 3, 3)).copy()
        return DesiredPath(rotations=rotations, translations=translations)
    raise ScenarioError(f"unknown path kind {kind!r} (expected explicit, line, or arc)")


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a Scenario from a parsed JSON document."""
    name = str(data.get("name", "unnamed"))
    seed = int(data.get("seed", 0))
    arm1 = _arm_from(_require(data, "arm1", "scenario"), "arm1")
    arm2 = _arm_from(_require(data, "arm2", "scenario"), "arm2")
    n = arm1.dof + arm2.dof
    if n < 1:
        raise ScenarioError("the two arms must have at least one joint in total")

    raw_basis = _require(data, "basis", "scenario")
    try:
        basis = BasisConfig(
            d=int(_require(raw_basis, "d", "basis")),
            N=int(_require(raw_basis, "N", "basis")),
            exponent_order=raw_basis.get("exponent_order", "degree_dm1"),
            s_grid=np.asarray(raw_basis["s_grid"], dtype=float) if "s_grid" in raw_basis else None,
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid basis: {exc}") from exc

    path = _path_from(_require(data, "path", "scenario"), basis.n_samples)

    raw_obj = _require(data, "objective", "scenario")
    try:
        objective = ObjectiveConfig(
            epsilon=float(_require(raw_obj, "epsilon", "objective")),
            gamma=float(raw_obj.get("gamma", 0.1)),
            lambda0=float(raw_obj.get("lambda0", 1.0)),
            orientation_weight=float(raw_obj.get("orientation_weight", 1.0)),
            penalty_sign=raw_obj.get("penalty_sign", "dual_ascent"),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid objective: {exc}") from exc

    raw_solver = data.get("solver", {})
    try:
        solver = SolverConfig(
            n_steps=int(raw_solver.get("n_steps", 100)),
            n_samples=int(raw_solver.get("n_samples", 512)),
            temperature=float(raw_solver.get("temperature", 0.1)),
            seed=seed,
            schedule_kind=raw_solver.get("schedule_kind", "linear_beta"),
            beta_min=float(raw_solver.get("beta_min", 1e-4)),
            beta_max=float(raw_solver.get("beta_max", 0.02)),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid solver config: {exc}") from exc

    raw_ik = data.get("ik", {})
    q_init = np.asarray(raw_ik.get("q_init", np.zeros(n)), dtype=float)
    if q_init.shape != (n,):
        raise ScenarioError(f"ik.q_init must have {n} entries, got shape {q_init.shape}")
    limits = np.concatenate([arm1.position_limits, arm2.position_limits])
    over = np.flatnonzero(np.abs(q_init) > limits)
    if over.size:
        raise ScenarioError(f"ik.q_init exceeds the position limit at joint index {int(over[0])}")
    ik = IKSettings(
        q_init=q_init,
        tol=float(raw_ik.get("tol", 1e-8)),
        max_iters=int(raw_ik.get("max_iters", 150)),
    )

    raw_base = data.get("baseline", {})
    try:
        baseline = BaselineConfig(
            method=raw_base.get("method", "random_search"),
            population=int(raw_base.get("population", solver.n_samples)),
            elite_fraction=float(raw_base.get("elite_fraction", 0.1)),
            iterations=int(raw_base.get("iterations", solver.n_steps)),
            initial_std=float(raw_base.get("initial_std", 0.5)),
            seed=seed,
            fixed_lambda=float(raw_base.get("fixed_lambda", 10.0)),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid baseline config: {exc}") from exc

    return Scenario(
        name=name,
        seed=seed,
        arm1=arm1,
        arm2=arm2,
        basis=basis,
        path=path,
        objective=objective,
        solver=solver,
        ik=ik,
        baseline=baseline,
        raw=data,
    )


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error in {path} at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario file {path} must contain a JSON object")
    return scenario_from_dict(data)


def builtin_scenario_path(name: str) -> Path:
    """Filesystem path of a scenario shipped with the package."""
    ref = resources.files("dualarm_mintime").joinpath("scenarios", f"{name}.json")
    with resources.as_file(ref) as concrete:
        return Path(concrete)


def load_builtin(name: str) -> Scenario:
    return load_scenario(builtin_scenario_path(name))
