"""Shared fixtures: small arm factories and seeded generators."""
import numpy as np
import pytest

from dualarm_mintime import Joint, make_arm
from dualarm_mintime.rotations import rotation_about_axis


def planar_arm(lengths, base_xy=(0.0, 0.0), base_yaw=0.0, offsets=None,
               q_lim=10.0, v_lim=2.0):
    """Planar arm: revolute z joints, links along local x, tool at the tip."""
    offsets = offsets or [0.0] * len(lengths)
    joints = []
    for k in range(len(lengths)):
        trans = (0.0, 0.0, 0.0) if k == 0 else (lengths[k - 1], 0.0, 0.0)
        joints.append(
            Joint(
                axis=(0, 0, 1),
                link_rotation=rotation_about_axis((0, 0, 1), offsets[k]),
                link_translation=trans,
                position_limit=q_lim,
                velocity_limit=v_lim,
            )
        )
    return make_arm(
        joints,
        base_rotation=rotation_about_axis((0, 0, 1), base_yaw),
        base_translation=(base_xy[0], base_xy[1], 0.0),
        tool_translation=(lengths[-1], 0.0, 0.0),
    )


def random_arm(rng, dof, q_lim=10.0, v_lim=2.0):
    """Spatial arm with random unit axes and random fixed link transforms."""
    joints = []
    for _ in range(dof):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        rot_axis = rng.normal(size=3)
        rot_axis /= np.linalg.norm(rot_axis)
        link_rot = rotation_about_axis(rot_axis, rng.uniform(-np.pi, np.pi))
        joints.append(
            Joint(
                axis=axis,
                link_rotation=link_rot,
                link_translation=rng.uniform(-0.4, 0.4, size=3),
                position_limit=q_lim,
                velocity_limit=v_lim,
            )
        )
    base_axis = rng.normal(size=3)
    base_axis /= np.linalg.norm(base_axis)
    return make_arm(
        joints,
        base_rotation=rotation_about_axis(base_axis, rng.uniform(-np.pi, np.pi)),
        base_translation=rng.uniform(-0.5, 0.5, size=3),
        tool_translation=rng.uniform(-0.3, 0.3, size=3),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def dual_planar():
    """The well-conditioned facing pair used across kinematics tests."""
    arm1 = planar_arm([0.5, 0.5], offsets=[0.7, 1.1], q_lim=1.4)
    arm2 = planar_arm(
        [0.5, 0.5], base_xy=(1.25, 0.05), base_yaw=np.pi, offsets=[-0.7, -1.1], q_lim=1.4
    )
    return arm1, arm2
