"""Small SO(3) toolbox: axis-angle rotations, logarithms, quaternions.

Conventions: rotation matrices are world-from-local, quaternions are
(w, x, y, z) with unit norm. All functions accept stacked inputs where
noted; the leading axes broadcast.
"""
from __future__ import annotations

import numpy as np


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]x such that skew(v) @ u == cross(v, u)."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def rotation_about_axis(axis: np.ndarray, angle) -> np.ndarray:
    """Rodrigues rotation about a fixed unit axis.

    `angle` may be a scalar or any array; the result has shape
    angle.shape + (3, 3). Elements are written directly (no intermediate
    (..., 3, 3) temporaries); this sits on the sampling hot path.
    """
    ux, uy, uz = np.asarray(axis, dtype=float)
    angle = np.asarray(angle, dtype=float)
    c = np.cos(angle)
    s = np.sin(angle)
    v = 1.0 - c
    out = np.empty(angle.shape + (3, 3))
    out[..., 0, 0] = c + v * (ux * ux)
    out[..., 0, 1] = v * (ux * uy) - s * uz
    out[..., 0, 2] = v * (ux * uz) + s * uy
    out[..., 1, 0] = v * (ux * uy) + s * uz
    out[..., 1, 1] = c + v * (uy * uy)
    out[..., 1, 2] = v * (uy * uz) - s * ux
    out[..., 2, 0] = v * (ux * uz) - s * uy
    out[..., 2, 1] = v * (uy * uz) + s * ux
    out[..., 2, 2] = c + v * (uz * uz)
    return out


def rotation_angle(rot: np.ndarray) -> np.ndarray:
    """Rotation angle in [0, pi] of stacked rotation matrices (..., 3, 3).

    Uses atan2 of the skew-symmetric part against the trace, which stays
    accurate for angles near 0 (where arccos of the trace loses half the
    significant digits) and near pi.
    """
    rot = np.asarray(rot, dtype=float)
    sx = rot[..., 2, 1] - rot[..., 1, 2]
    sy = rot[..., 0, 2] - rot[..., 2, 0]
    sz = rot[..., 1, 0] - rot[..., 0, 1]
    sin_term = 0.5 * np.sqrt(sx * sx + sy * sy + sz * sz)
    trace = rot[..., 0, 0] + rot[..., 1, 1] + rot[..., 2, 2]
    cos_term = 0.5 * (trace - 1.0)
    return np.arctan2(sin_term, cos_term)


def log_so3(rot: np.ndarray) -> np.ndarray:
    """Axis-angle vector (angle * unit axis) of a single rotation matrix.

    Handles the small-angle limit with a series for angle/sin(angle) and
    the near-pi branch through the symmetric part of R.
    """
    rot = np.asarray(rot, dtype=float)
    angle = float(rotation_angle(rot))
    s = 0.5 * np.array(
        [rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]]
    )
    if angle < 1e-8:
        # log(R) ~ s for vanishing angle; first-order series is exact enough
        return s
    if angle < np.pi - 1e-4:
        return s * (angle / np.sin(angle))
    # Near pi sin(angle) -> 0; recover the axis from the outer-product part:
    # R = I + sin(a) K + (1-cos(a)) K^2  =>  (R + R^T)/2 = I + (1-cos(a)) K^2
    # and diag(K^2) = axis_i^2 - 1.
    b = (np.diag(rot) - np.cos(angle)) / (1.0 - np.cos(angle))
    axis = np.sqrt(np.maximum(b, 0.0))
    # Fix signs from the dominant component using off-diagonal sums,
    # which are sign-stable where sin(angle) is tiny.
    k = int(np.argmax(axis))
    i, j = (k + 1) % 3, (k + 2) % 3
    axis[i] = np.copysign(axis[i], rot[k, i] + rot[i, k])
    axis[j] = np.copysign(axis[j], rot[k, j] + rot[j, k])
    # The skew part still carries the overall sign when nonzero.
    if s @ axis < 0.0:
        axis = -axis
    return angle * axis


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(rot: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix, w >= 0."""
    rot = np.asarray(rot, dtype=float)
    t = np.trace(rot)
    if t > 0:
        r = np.sqrt(1.0 + t)
        w = 0.5 * r
        x = (rot[2, 1] - rot[1, 2]) / (2.0 * r)
        y = (rot[0, 2] - rot[2, 0]) / (2.0 * r)
        z = (rot[1, 0] - rot[0, 1]) / (2.0 * r)
    else:
        k = int(np.argmax(np.diag(rot)))
        i, j = (k + 1) % 3, (k + 2) % 3
        r = np.sqrt(1.0 + rot[k, k] - rot[i, i] - rot[j, j])
        vec = np.empty(3)
        vec[k] = 0.5 * r
        vec[i] = (rot[i, k] + rot[k, i]) / (2.0 * r)
        vec[j] = (rot[j, k] + rot[k, j]) / (2.0 * r)
        w = (rot[j, i] - rot[i, j]) / (2.0 * r)
        x, y, z = vec
    q = np.array([w, x, y, z])
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def normalized_quaternion(q: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Renormalize a quaternion whose norm is within `tol` of 1, else raise."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError(f"quaternion must have 4 components, got shape {q.shape}")
    norm = float(np.linalg.norm(q))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"quaternion norm {norm:.9f} deviates from 1 by more than {tol}")
    return q / norm
