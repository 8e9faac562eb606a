"""Rotation toolbox against the scipy.spatial.transform oracle."""
import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from dualarm_mintime.rotations import (
    log_so3,
    matrix_to_quat,
    normalized_quaternion,
    quat_to_matrix,
    rotation_about_axis,
    rotation_angle,
    skew,
)


def random_rotations(rng, n):
    return Rotation.random(n, random_state=np.random.RandomState(rng.integers(2**31))).as_matrix()


def test_skew_matches_cross(rng):
    for _ in range(20):
        v, u = rng.normal(size=3), rng.normal(size=3)
        assert np.allclose(skew(v) @ u, np.cross(v, u))


def test_rotation_about_axis_vs_scipy(rng):
    for _ in range(50):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(-2 * np.pi, 2 * np.pi)
        expected = Rotation.from_rotvec(angle * axis).as_matrix()
        assert np.allclose(rotation_about_axis(axis, angle), expected, atol=1e-12)


def test_rotation_about_axis_batched(rng):
    axis = np.array([0.0, 0.0, 1.0])
    angles = rng.uniform(-3, 3, size=(4, 5))
    batch = rotation_about_axis(axis, angles)
    assert batch.shape == (4, 5, 3, 3)
    for i in range(4):
        for j in range(5):
            assert np.allclose(batch[i, j], rotation_about_axis(axis, angles[i, j]))


def test_rotation_angle_vs_scipy(rng):
    mats = random_rotations(rng, 100)
    expected = np.linalg.norm(Rotation.from_matrix(mats).as_rotvec(), axis=1)
    assert np.allclose(rotation_angle(mats), expected, atol=1e-9)


def test_rotation_angle_exact_identity():
    assert rotation_angle(np.eye(3)) == 0.0


@pytest.mark.parametrize("angle", [1e-9, 1e-6, 0.5, 2.0, np.pi - 1e-7, np.pi])
def test_log_so3_angles(angle, rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    rot = rotation_about_axis(axis, angle)
    vec = log_so3(rot)
    # Both +/- axis are valid exactly at pi; compare reconstructions instead.
    assert np.allclose(rotation_about_axis(vec / max(np.linalg.norm(vec), 1e-300),
                                           np.linalg.norm(vec)), rot, atol=1e-7)
    assert np.isclose(np.linalg.norm(vec), angle, atol=1e-7)


def test_log_so3_vs_scipy(rng):
    mats = random_rotations(rng, 200)
    for mat in mats:
        expected = Rotation.from_matrix(mat).as_rotvec()
        assert np.allclose(log_so3(mat), expected, atol=1e-8)


def test_quat_round_trip(rng):
    mats = random_rotations(rng, 100)
    for mat in mats:
        q = matrix_to_quat(mat)
        assert q[0] >= 0
        assert np.isclose(np.linalg.norm(q), 1.0, atol=1e-12)
        assert np.allclose(quat_to_matrix(q), mat, atol=1e-12)


def test_quat_to_matrix_vs_scipy(rng):
    for _ in range(50):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        expected = Rotation.from_quat([q[1], q[2], q[3], q[0]]).as_matrix()
        assert np.allclose(quat_to_matrix(q), expected, atol=1e-12)


def test_normalized_quaternion_tolerance():
    q = np.array([1.0 + 5e-7, 0.0, 0.0, 0.0])
    out = normalized_quaternion(q)
    assert np.isclose(np.linalg.norm(out), 1.0)
    with pytest.raises(ValueError, match="norm"):
        normalized_quaternion(np.array([1.1, 0.0, 0.0, 0.0]))
