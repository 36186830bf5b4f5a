"""Inverse and forward kinematics of the 3-DOF spherical wrist.

Walks the closed-form joint solution, the decoupling at the reference
configuration, and the Newton-based forward solve.
"""
import math

import numpy as np

from agile_head.geometry import EulerZYX, compose_head_rotation, matrix_to_euler
from agile_head.kinematics import fkp, ikp

deg = math.degrees
rad = math.radians

print("=== joint solution for platform orientations ===")
for phi, theta, psi in [(0, 0, 0), (30, 0, 0), (0, 20, 0), (0, 0, 20), (10, 20, 30)]:
    q = ikp(EulerZYX(rad(phi), rad(theta), rad(psi)))
    print(f"  euler ({phi:5.1f}, {theta:5.1f}, {psi:5.1f}) deg"
          f" -> joints ({deg(q.theta1):6.2f}, {deg(q.theta2):6.2f}, {deg(q.theta3):6.2f}) deg")
print("note: each pure Euler angle actuates exactly one joint from reference.\n")

print("=== forward kinematics: Newton on the joint residual ===")
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(1000):
    e = EulerZYX(*rng.uniform(-rad(15), rad(15), size=3))
    back = fkp(ikp(e))
    worst = max(worst, max(abs(a - b) for a, b in zip(e, back)))
print(f"  1000 random workspace poses, worst round-trip error {worst:.2e} rad\n")

print("=== head angles ride three skewed axes ===")
q = compose_head_rotation(yaw=rad(10), roll=rad(5), pitch=rad(-8))
e = matrix_to_euler(q)
joints = ikp(e)
print(f"  head (yaw 10, roll 5, pitch -8) deg")
print(f"  -> euler ({deg(e.phi):.2f}, {deg(e.theta):.2f}, {deg(e.psi):.2f}) deg")
print(f"  -> joints ({deg(joints.theta1):.2f}, {deg(joints.theta2):.2f}, "
      f"{deg(joints.theta3):.2f}) deg")
