"""Canonical face mesh and synthetic frame rendering.

The committed 468-point neutral mesh lives in head coordinates
(x right, y down, z toward the camera). Rotating it by known angles and
projecting orthographically produces ground-truth landmark frames, which
is what makes the angle estimators testable without a camera or
detector. Renderer sign conventions are chosen so that the estimators
recover positive inputs as positive angles.
"""
import functools
import importlib.resources
import json
import math

import numpy as np

from .facepose import LandmarkFrame

MESH_RESOURCE = "canonical_mesh.json"


@functools.lru_cache(maxsize=1)
def _mesh_data():
    text = importlib.resources.files("agile_head.data").joinpath(MESH_RESOURCE).read_text()
    return json.loads(text)


def canonical_points() -> np.ndarray:
    """Neutral mesh, shape (468, 3), head coordinates."""
    return np.array(_mesh_data()["points"], dtype=float)


def canonical_landmarks() -> dict:
    """Semantic landmark index map committed alongside the mesh."""
    return dict(_mesh_data()["landmarks"])


def head_rotation(roll: float, yaw: float, pitch: float) -> np.ndarray:
    """Rotation applied to mesh points for given head angles (radians)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(-yaw), math.sin(-yaw)
    cp, sp = math.cos(-pitch), math.sin(-pitch)
    rz = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    return rz @ ry @ rx


def render_frame(roll: float = 0.0, yaw: float = 0.0, pitch: float = 0.0,
                 stamp_us: int = 0, width: int = 640, height: int = 640,
                 scale: float = 0.35, center=(0.5, 0.5),
                 points: np.ndarray = None) -> LandmarkFrame:
    """Orthographic projection of the (rotated) mesh into a landmark frame.

    x and y are frame-normalized; z keeps the same scale so depth/width
    ratios survive the projection.
    """
    p = canonical_points() if points is None else np.asarray(points, dtype=float)
    rotated = p @ head_rotation(roll, yaw, pitch).T
    out = np.empty_like(rotated)
    out[:, 0] = center[0] + scale * rotated[:, 0]
    out[:, 1] = center[1] + scale * rotated[:, 1]
    out[:, 2] = scale * rotated[:, 2]
    return LandmarkFrame(stamp_us=stamp_us, width=width, height=height, points=out)


def mirror_frame(frame: LandmarkFrame) -> LandmarkFrame:
    """Left-right mirror: x -> 1 - x, other coordinates untouched."""
    pts = frame.points.copy()
    pts[:, 0] = 1.0 - pts[:, 0]
    return LandmarkFrame(stamp_us=frame.stamp_us, width=frame.width,
                         height=frame.height, points=pts)
