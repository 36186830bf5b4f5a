"""Rotation algebra for the head/robot bridge.

Everything here works in radians on plain numpy arrays: vectors are
shape-(3,) floats, rotation matrices shape-(3,3). The three head
rotation axes are hard numbers (an exact orthonormal triad), so they
are built once at import time.
"""
import math
from typing import NamedTuple

import numpy as np

from .errors import GimbalLock, NonUnitAxis

_UNIT_TOL = 1e-9
_GIMBAL_TOL = 1e-9


class HeadPose(NamedTuple):
    """End-effector orientation as head angles, radians."""

    roll: float
    pitch: float
    yaw: float


class EulerZYX(NamedTuple):
    """Intrinsic Z-Y-X Euler angles (phi about z, theta about y, psi about x), radians."""

    phi: float
    theta: float
    psi: float


def cpm(v) -> np.ndarray:
    """Cross-product matrix: cpm(v) @ w == v x w."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def axis_angle(e, a: float) -> np.ndarray:
    """Rotation by angle ``a`` about unit axis ``e`` (Rodrigues form).

    Raises NonUnitAxis if ``e`` is not unit length within 1e-9.
    """
    e = np.asarray(e, dtype=float)
    norm = np.linalg.norm(e)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise NonUnitAxis(f"axis norm {norm!r} deviates from 1")
    outer = np.outer(e, e)
    return outer + (np.eye(3) - outer) * math.cos(a) + cpm(e) * math.sin(a)


def head_axes():
    """The yaw/roll/pitch rotation axes of the head, as three unit vectors."""
    e1 = np.array([-1.0, -1.0, -1.0]) / math.sqrt(3.0)
    e2 = (math.sqrt(2.0) / math.sqrt(3.0)) * np.array([-1.0, 0.5, 0.5])
    e3 = (math.sqrt(2.0) / 3.0) * np.array([0.0, 1.5, -1.5])
    return e1, e2, e3


E1, E2, E3 = head_axes()
# change-of-basis matrix with the head axes as columns
_E = np.column_stack([E1, E2, E3])


def compose_head_rotation(yaw: float, roll: float, pitch: float) -> np.ndarray:
    """Head orientation matrix: yaw about e1, then roll about e2, then pitch about e3."""
    return axis_angle(E1, yaw) @ axis_angle(E2, roll) @ axis_angle(E3, pitch)


def decompose_head_rotation(q) -> HeadPose:
    """Invert compose_head_rotation for orientations inside the workspace.

    Rewrites q in the head-axes basis, where the composition is a plain
    intrinsic X-Y-Z factorization.
    """
    m = _E.T @ np.asarray(q, dtype=float) @ _E
    s = float(m[0, 2])
    if abs(s) >= 1.0 - _GIMBAL_TOL:
        raise GimbalLock("head-angle extraction singular")
    roll = math.asin(s)
    yaw = math.atan2(-m[1, 2], m[2, 2])
    pitch = math.atan2(-m[0, 1], m[0, 0])
    return HeadPose(roll=roll, pitch=pitch, yaw=yaw)


def euler_to_matrix(e: EulerZYX) -> np.ndarray:
    """Build Rz(phi) @ Ry(theta) @ Rx(psi)."""
    cf, sf = math.cos(e.phi), math.sin(e.phi)
    ct, st = math.cos(e.theta), math.sin(e.theta)
    cp, sp = math.cos(e.psi), math.sin(e.psi)
    return np.array([
        [cf * ct, cf * st * sp - sf * cp, cf * st * cp + sf * sp],
        [sf * ct, sf * st * sp + cf * cp, sf * st * cp - cf * sp],
        [-st, ct * sp, ct * cp],
    ])


def matrix_to_euler(q) -> EulerZYX:
    """Extract intrinsic Z-Y-X Euler angles; raises GimbalLock near theta = +/-90 deg."""
    q = np.asarray(q, dtype=float)
    s = float(q[2, 0])
    if abs(s) >= 1.0 - _GIMBAL_TOL:
        raise GimbalLock(f"|Q31| = {abs(s)!r} too close to 1")
    theta = -math.asin(s)
    phi = math.atan2(q[1, 0], q[0, 0])
    psi = math.atan2(q[2, 1], q[2, 2])
    return EulerZYX(phi=phi, theta=theta, psi=psi)
