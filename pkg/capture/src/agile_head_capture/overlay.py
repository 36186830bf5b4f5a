"""Operator feedback drawing: mesh dots, live angles, guard state, pose gizmo.

Everything draws into a plain BGR array so it is testable without a
display; the client decides whether to imshow the result.
"""
import math

import cv2
import numpy as np


def draw_landmarks(img, points):
    h, w = img.shape[:2]
    for x, y, _ in points:
        cv2.circle(img, (int(x * w), int(y * h)), 1, (0, 215, 255), -1)


def draw_status(img, angles=None, held=False, connected=True, recording=False):
    """Top-left text block: the three angles plus guard/link flags."""
    lines = []
    if angles is None:
        lines.append("angles: --")
    else:
        lines.append("roll {roll_deg:+6.1f}  yaw {yaw_deg:+6.1f}  "
                     "pitch {pitch_deg:+6.1f}".format(**angles))
    lines.append("guard: HOLD" if held else "guard: ok")
    if not connected:
        lines.append("broker: DISCONNECTED")
    if recording:
        lines.append("REC")
    y = 24
    for text in lines:
        color = (0, 0, 255) if ("HOLD" in text or "DISCONNECTED" in text) \
            else (40, 160, 40)
        cv2.putText(img, text, (10, y), cv2.FONT_HERSHEY_SIMPLEX, 0.6, color, 2)
        y += 26


def draw_pose_gizmo(img, ee_deg, origin=None, size=60):
    """Three projected axes of the simulated end-effector pose."""
    h, w = img.shape[:2]
    if origin is None:
        origin = (w - 90, 90)
    roll = math.radians(ee_deg.get("roll", 0.0))
    yaw = math.radians(ee_deg.get("yaw", 0.0))
    pitch = math.radians(ee_deg.get("pitch", 0.0))
    cr, sr = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    rz = np.array([[cr, -sr, 0], [sr, cr, 0], [0, 0, 1]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
    rot = rz @ ry @ rx
    axes = [((0, 0, 255), np.array([1.0, 0, 0])),
            ((0, 255, 0), np.array([0, 1.0, 0])),
            ((255, 0, 0), np.array([0, 0, 1.0]))]
    for color, axis in axes:
        v = rot @ axis
        tip = (int(origin[0] + size * v[0]), int(origin[1] + size * v[1]))
        cv2.line(img, origin, tip, color, 2)
    cv2.circle(img, origin, 3, (255, 255, 255), -1)


def compose(img, points=None, angles=None, ee_deg=None, held=False,
            connected=True, recording=False):
    """One call that draws the whole overlay; returns the same array."""
    if points is not None:
        draw_landmarks(img, points)
    draw_status(img, angles=angles, held=held, connected=connected,
                recording=recording)
    if ee_deg is not None:
        draw_pose_gizmo(img, ee_deg)
    return img
