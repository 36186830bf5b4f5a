"""Geometric face-angle estimation, blink area, and eye-mechanism mapping.

All three angles come from arctangents of landmark coordinate
differences, so they are invariant to translating the landmark set and
(for roll/yaw) to uniform scaling. Which indices play the eye centers,
nose ends, and eyelid rings is configuration data, not code; the
defaults follow the committed canonical mesh.
"""
import json
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import (BadCalibration, DegenerateGeometry, MalformedFrame,
                     TooFewPoints)

N_LANDMARKS = 468
_XY_MIN, _XY_MAX = -0.5, 1.5

DEFAULT_PAN_MAX = math.radians(30.0)
DEFAULT_TILT_MAX = math.radians(20.0)


class FaceAngles(NamedTuple):
    """Estimated head angles, radians, each within (-pi/2, pi/2)."""

    roll: float
    yaw: float
    pitch: float


class EyeCommand(NamedTuple):
    pan: float
    tilt: float
    lid_openness: float


@dataclass(frozen=True)
class LandmarkFrame:
    """One timestamped face observation: 468 points, frame-normalized x,y, relative z."""

    stamp_us: int
    width: int
    height: int
    points: np.ndarray  # (468, 3)

    def validate(self):
        p = self.points
        if p.shape != (N_LANDMARKS, 3):
            raise MalformedFrame(f"expected ({N_LANDMARKS}, 3) points, got {p.shape}")
        if self.stamp_us < 0:
            raise MalformedFrame(f"negative stamp_us {self.stamp_us}")
        if not np.all(np.isfinite(p)):
            raise MalformedFrame("non-finite landmark coordinate")
        xy = p[:, :2]
        if xy.min() < _XY_MIN or xy.max() > _XY_MAX:
            raise MalformedFrame("landmark x/y outside [-0.5, 1.5]")
        return self

    def to_payload(self) -> dict:
        return {"stamp_us": int(self.stamp_us), "w": int(self.width),
                "h": int(self.height), "pts": self.points.tolist()}

    @classmethod
    def from_payload(cls, payload) -> "LandmarkFrame":
        try:
            frame = cls(stamp_us=int(payload["stamp_us"]), width=int(payload["w"]),
                        height=int(payload["h"]),
                        points=np.asarray(payload["pts"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedFrame(f"bad landmark payload: {exc}") from exc
        return frame.validate()

    def to_json_line(self) -> str:
        return json.dumps(self.to_payload(), separators=(",", ":"))


def _default_indices():
    # local import: mesh.py imports LandmarkFrame from this module
    from .mesh import canonical_landmarks
    return canonical_landmarks()


def _default_pitch_offset() -> float:
    from .mesh import canonical_landmarks, canonical_points
    lm = canonical_landmarks()
    p = canonical_points()
    top, low = p[lm["nose_top"]], p[lm["nose_lower"]]
    return math.atan((top[1] - low[1]) / (top[2] - low[2]))


@dataclass(frozen=True)
class FaceGeometryConfig:
    """Landmark index sets plus calibration constants for the estimators."""

    left_eye: tuple = ()
    right_eye: tuple = ()
    nose_top: int = -1
    nose_lower: int = -1
    eyelid_left: tuple = ()
    eyelid_right: tuple = ()
    pitch_offset: float = 0.0           # rad, raw arctan value at the neutral pose
    pan_max: float = DEFAULT_PAN_MAX
    tilt_max: float = DEFAULT_TILT_MAX
    lid_area: tuple = (0.0, 1.0)        # (A_min, A_max), normalized units^2

    @classmethod
    def default(cls) -> "FaceGeometryConfig":
        lm = _default_indices()
        cfg = cls(left_eye=tuple(lm["left_eye"]), right_eye=tuple(lm["right_eye"]),
                  nose_top=lm["nose_top"], nose_lower=lm["nose_lower"],
                  eyelid_left=tuple(lm["eyelid_left"]),
                  eyelid_right=tuple(lm["eyelid_right"]),
                  pitch_offset=_default_pitch_offset())
        area = polygon_area(_neutral_eyelid_polygon(cfg))
        return replace(cfg, lid_area=(0.0, area))


def _neutral_eyelid_polygon(cfg):
    from .mesh import canonical_points, render_frame
    frame = render_frame(points=canonical_points())
    return frame.points[list(cfg.eyelid_left)][:, :2]


_DEFAULT = None


def default_config() -> FaceGeometryConfig:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = FaceGeometryConfig.default()
    return _DEFAULT


def _eye_centers(frame: LandmarkFrame, cfg: FaceGeometryConfig):
    p = frame.points
    return p[list(cfg.left_eye)].mean(axis=0), p[list(cfg.right_eye)].mean(axis=0)


def estimate_roll(frame: LandmarkFrame, cfg: FaceGeometryConfig = None) -> float:
    """Slope of the left-eye-to-right-eye vector in the image plane."""
    cfg = cfg or default_config()
    left, right = _eye_centers(frame, cfg)
    dx = right[0] - left[0]
    if abs(dx) < 1e-6:
        raise DegenerateGeometry("eye centers horizontally coincident")
    return math.atan((right[1] - left[1]) / dx)


def estimate_yaw(frame: LandmarkFrame, cfg: FaceGeometryConfig = None) -> float:
    """Same eye vector, projected into the depth/horizontal plane."""
    cfg = cfg or default_config()
    left, right = _eye_centers(frame, cfg)
    dx = right[0] - left[0]
    if abs(dx) < 1e-6:
        raise DegenerateGeometry("eye centers horizontally coincident")
    return math.atan((right[2] - left[2]) / dx)


def estimate_pitch(frame: LandmarkFrame, cfg: FaceGeometryConfig = None) -> float:
    """Nose-bridge-to-under-nose vector angle, minus the neutral-pose offset.

    The nose vector is not parallel to the head's depth axis at the
    neutral pose, so the raw arctan carries a constant bias; the
    configured offset (measured on the canonical neutral mesh) removes it.
    """
    cfg = cfg or default_config()
    p = frame.points
    top, low = p[cfg.nose_top], p[cfg.nose_lower]
    dz = top[2] - low[2]
    if abs(dz) < 1e-9:
        raise DegenerateGeometry("nose endpoints at equal depth")
    return math.atan((top[1] - low[1]) / dz) - cfg.pitch_offset


def estimate_face_angles(frame: LandmarkFrame, cfg: FaceGeometryConfig = None) -> FaceAngles:
    cfg = cfg or default_config()
    return FaceAngles(roll=estimate_roll(frame, cfg),
                      yaw=estimate_yaw(frame, cfg),
                      pitch=estimate_pitch(frame, cfg))


def polygon_area(points) -> float:
    """Shoelace area of an ordered simple polygon; orientation-independent."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise TooFewPoints(f"polygon needs >= 3 points, got {pts.shape}")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * abs(float(np.sum(x * yn - xn * y)))


def eyelid_openness(area: float, cal) -> float:
    """Map a lid polygon area onto [0, 1] between the calibrated extremes."""
    a_min, a_max = cal
    if a_max <= a_min:
        raise BadCalibration(f"need A_max > A_min, got {cal!r}")
    return min(max((area - a_min) / (a_max - a_min), 0.0), 1.0)


def eye_command(frame: LandmarkFrame, cfg: FaceGeometryConfig = None) -> EyeCommand:
    """Point the 2-DOF eye at the face centroid; lid from the blink area."""
    cfg = cfg or default_config()
    cx, cy = frame.points[:, 0].mean(), frame.points[:, 1].mean()
    pan = min(max(cfg.pan_max * 2.0 * (0.5 - cx), -cfg.pan_max), cfg.pan_max)
    tilt = min(max(cfg.tilt_max * 2.0 * (0.5 - cy), -cfg.tilt_max), cfg.tilt_max)
    areas = [polygon_area(frame.points[list(ring)][:, :2])
             for ring in (cfg.eyelid_left, cfg.eyelid_right) if ring]
    lid = eyelid_openness(sum(areas) / len(areas), cfg.lid_area) if areas else 1.0
    return EyeCommand(pan=pan, tilt=tilt, lid_openness=lid)
