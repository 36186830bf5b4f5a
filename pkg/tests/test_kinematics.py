import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agile_head.errors import NoConvergence
from agile_head.geometry import EulerZYX, HeadPose
from agile_head.kinematics import (JointAngles, WorkspaceLimits,
                                   clamp_to_workspace, fkp, ikp)

RNG = np.random.default_rng(7)
LIM = math.radians(15.0)


def ikp_oracle(phi, theta, psi):
    """Direct evaluation of the closed-form joint equations."""
    t1 = math.atan2(math.cos(theta) * math.sin(psi),
                    math.cos(phi) * math.cos(psi)
                    + math.sin(phi) * math.sin(theta) * math.sin(psi))
    t2 = math.atan2(math.sin(phi) * math.sin(psi)
                    + math.cos(phi) * math.sin(theta) * math.cos(psi),
                    math.cos(theta) * math.cos(psi))
    return t1, t2, phi


class TestIkp:
    def test_reference_is_zero(self):
        assert ikp(EulerZYX(0, 0, 0)) == JointAngles(0.0, 0.0, 0.0)

    def test_pure_phi_moves_joint3_only(self):
        q = ikp(EulerZYX(math.radians(30), 0, 0))
        assert abs(q.theta1) < 1e-12 and abs(q.theta2) < 1e-12
        assert abs(q.theta3 - math.radians(30)) < 1e-12

    def test_pure_theta_moves_joint2_only(self):
        q = ikp(EulerZYX(0, math.radians(20), 0))
        assert abs(q.theta1) < 1e-12 and abs(q.theta3) < 1e-12
        assert abs(q.theta2 - math.radians(20)) < 1e-12

    def test_pure_psi_moves_joint1_only(self):
        q = ikp(EulerZYX(0, 0, math.radians(20)))
        assert abs(q.theta2) < 1e-12 and abs(q.theta3) < 1e-12
        assert abs(q.theta1 - math.radians(20)) < 1e-12

    def test_numeric_example(self):
        q = ikp(EulerZYX(math.radians(10), math.radians(20), math.radians(30)))
        assert abs(math.degrees(q.theta1) - 28.03) < 0.1
        assert abs(math.degrees(q.theta2) - 24.94) < 0.1
        assert abs(math.degrees(q.theta3) - 10.0) < 1e-9

    def test_matches_direct_oracle(self):
        for _ in range(500):
            phi, theta, psi = RNG.uniform(-LIM, LIM, size=3)
            q = ikp(EulerZYX(phi, theta, psi))
            o = ikp_oracle(phi, theta, psi)
            assert max(abs(a - b) for a, b in zip(q, o)) < 1e-14

    def test_continuity(self):
        for _ in range(200):
            e = RNG.uniform(-LIM, LIM, size=3)
            q0 = ikp(EulerZYX(*e))
            q1 = ikp(EulerZYX(*(e + 1e-7)))
            assert max(abs(a - b) for a, b in zip(q0, q1)) < 1e-3


class TestFkp:
    def test_identity(self):
        e = fkp(JointAngles(0, 0, 0))
        assert max(abs(v) for v in e) < 1e-9

    def test_roundtrip_500(self):
        for _ in range(500):
            e = EulerZYX(*RNG.uniform(-LIM, LIM, size=3))
            back = fkp(ikp(e))
            assert max(abs(a - b) for a, b in zip(e, back)) < 1e-7

    def test_roundtrip_with_seed(self):
        e = EulerZYX(0.2, -0.1, 0.15)
        back = fkp(ikp(e), seed=EulerZYX(0.19, -0.09, 0.14))
        assert max(abs(a - b) for a, b in zip(e, back)) < 1e-7

    def test_no_convergence_far_outside(self):
        with pytest.raises(NoConvergence):
            fkp(JointAngles(0.0, math.radians(170), 0.0))


class TestClamp:
    def test_inside_unchanged(self):
        p = HeadPose(math.radians(5), 0.0, 0.0)
        assert clamp_to_workspace(p) == p

    def test_saturates(self):
        p = clamp_to_workspace(HeadPose(math.radians(40), 0.0, 0.0))
        assert abs(p.roll - LIM) < 1e-15

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4))
    def test_idempotent(self, roll, pitch, yaw):
        w = WorkspaceLimits()
        once = clamp_to_workspace(HeadPose(roll, pitch, yaw), w)
        assert clamp_to_workspace(once, w) == once
