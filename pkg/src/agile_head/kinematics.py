"""Inverse/forward kinematics of the 3-DOF spherical parallel wrist.

The closed-form IKP maps intrinsic Z-Y-X Euler angles of the moving
platform to the three actuated base joints, measured from the reference
configuration where everything is zero. The FKP has no closed form here;
it is a damped Newton iteration on the IKP residual, which is plenty
inside the +/-15 degree workspace where the IKP is smooth and the
tracker always has a nearby seed.
"""
import math
from typing import NamedTuple

from .errors import NoConvergence, SingularPose
from .geometry import EulerZYX, HeadPose

_SINGULAR_TOL = 1e-12
_FKP_TOL = 1e-8
_FKP_MAX_ITER = 50
_FD_STEP = 1e-7
_FKP_ENVELOPE = 1.2  # rad; iterates beyond this are out of the workspace image


class JointAngles(NamedTuple):
    """Actuated base joint angles, radians, zero at the reference configuration."""

    theta1: float
    theta2: float
    theta3: float


class WorkspaceLimits(NamedTuple):
    """Per-axis symmetric head-angle limits, radians."""

    max_roll: float = math.radians(15.0)
    max_pitch: float = math.radians(15.0)
    max_yaw: float = math.radians(15.0)


def ikp(e: EulerZYX) -> JointAngles:
    """Base joint angles for a platform orientation.

    Quadrants are fixed with atan2 of each (numerator, denominator)
    pair; raises SingularPose when a denominator vanishes.
    """
    cf, sf = math.cos(e.phi), math.sin(e.phi)
    ct, st = math.cos(e.theta), math.sin(e.theta)
    cp, sp = math.cos(e.psi), math.sin(e.psi)

    num1 = ct * sp
    den1 = cf * cp + sf * st * sp
    num2 = sf * sp + cf * st * cp
    den2 = ct * cp
    if abs(den1) < _SINGULAR_TOL or abs(den2) < _SINGULAR_TOL or abs(ct) < _SINGULAR_TOL:
        raise SingularPose(f"singular denominators at {e}")
    return JointAngles(
        theta1=math.atan2(num1, den1),
        theta2=math.atan2(num2, den2),
        theta3=e.phi,
    )


def _residual(e: EulerZYX, q: JointAngles):
    s = ikp(e)
    return (s.theta1 - q.theta1, s.theta2 - q.theta2, s.theta3 - q.theta3)


def fkp(q: JointAngles, seed: EulerZYX = EulerZYX(0.0, 0.0, 0.0)) -> EulerZYX:
    """Platform orientation for given joints, by Newton on the IKP residual.

    Finite-difference Jacobian, step halved when the residual grows.
    Raises NoConvergence after 50 iterations (out-of-workspace or
    near-singular target).
    """
    e = [seed.phi, seed.theta, seed.psi]
    try:
        r = list(_residual(EulerZYX(*e), q))
    except SingularPose:
        raise NoConvergence("seed is singular")
    for _ in range(_FKP_MAX_ITER):
        rn = math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
        if rn < _FKP_TOL:
            return EulerZYX(*e)
        # finite-difference Jacobian, column per Euler angle
        jac = [[0.0] * 3 for _ in range(3)]
        try:
            for col in range(3):
                ep = list(e)
                ep[col] += _FD_STEP
                rp = _residual(EulerZYX(*ep), q)
                for row in range(3):
                    jac[row][col] = (rp[row] - r[row]) / _FD_STEP
            step = _solve3(jac, r)
        except (SingularPose, ZeroDivisionError):
            raise NoConvergence("Jacobian singular during iteration")
        scale = 1.0
        while True:
            cand = [e[i] - scale * step[i] for i in range(3)]
            try:
                rc = list(_residual(EulerZYX(*cand), q))
                rcn = math.sqrt(rc[0] ** 2 + rc[1] ** 2 + rc[2] ** 2)
            except SingularPose:
                rcn = math.inf
            if rcn < rn or scale < 1e-6:
                break
            scale *= 0.5
        if not math.isfinite(rcn):
            raise NoConvergence("residual diverged")
        if max(abs(v) for v in cand) > _FKP_ENVELOPE:
            raise NoConvergence(f"iterate left the workspace envelope for {q}")
        e, r = cand, rc
    raise NoConvergence(f"no convergence after {_FKP_MAX_ITER} iterations for {q}")


def _solve3(a, b):
    """Solve a 3x3 linear system by Gaussian elimination with partial pivoting."""
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(3):
        piv = max(range(col, 3), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) < 1e-300:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, 3):
            f = m[r][col] / m[col][col]
            for c in range(col, 4):
                m[r][c] -= f * m[col][c]
    x = [0.0, 0.0, 0.0]
    for row in range(2, -1, -1):
        x[row] = (m[row][3] - sum(m[row][c] * x[c] for c in range(row + 1, 3))) / m[row][row]
    return x


def clamp_to_workspace(p: HeadPose, w: WorkspaceLimits = WorkspaceLimits()) -> HeadPose:
    """Saturate each head angle to its symmetric limit; idempotent."""
    return HeadPose(
        roll=min(max(p.roll, -w.max_roll), w.max_roll),
        pitch=min(max(p.pitch, -w.max_pitch), w.max_pitch),
        yaw=min(max(p.yaw, -w.max_yaw), w.max_yaw),
    )
