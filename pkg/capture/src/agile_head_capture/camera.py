"""Frame sources: a real webcam and a scripted synthetic camera."""
import math

import cv2

from .detector import render_face


class CameraUnavailable(Exception):
    pass


class OpenCvCamera:
    """cv2.VideoCapture wrapper; raises CameraUnavailable if it will not open."""

    def __init__(self, index=0):
        self.cap = cv2.VideoCapture(index)
        if not self.cap.isOpened():
            raise CameraUnavailable(f"camera index {index} failed to open")

    def read(self):
        ok, frame = self.cap.read()
        return (frame if ok else None)

    def release(self):
        self.cap.release()


class SyntheticCamera:
    """Plays a scripted pose sequence as rendered fiducial faces.

    ``poses`` is a list of (roll, yaw, pitch) in radians; ``None``
    entries produce a faceless frame. The source is exhausted after the
    last pose.
    """

    def __init__(self, poses, width=640, height=480):
        self.poses = list(poses)
        self.width = width
        self.height = height
        self._k = 0

    @classmethod
    def swaying(cls, n=60, amplitude_deg=8.0, **kw):
        poses = []
        for k in range(n):
            t = k / max(n - 1, 1)
            a = math.radians(amplitude_deg)
            poses.append((0.4 * a * math.sin(6.28 * t),
                          a * math.sin(3.14 * t),
                          0.6 * a * math.sin(4.4 * t + 0.7)))
        return cls(poses, **kw)

    def read(self):
        if self._k >= len(self.poses):
            return None
        pose = self.poses[self._k]
        self._k += 1
        if pose is None:
            import numpy as np
            return np.full((self.height, self.width, 3), 255, dtype=np.uint8)
        roll, yaw, pitch = pose
        return render_face(self.width, self.height, roll, yaw, pitch)

    def release(self):
        pass
