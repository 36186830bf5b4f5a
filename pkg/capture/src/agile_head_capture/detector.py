"""Face-mesh landmark detectors behind one tiny interface.

``detect(image_bgr)`` returns an (468, 3) float array -- x, y normalized
by the frame size, z relative -- or None when no face is found.

Two implementations:

* MediapipeDetector wraps the off-the-shelf 468-landmark solution
  (optional dependency; import happens lazily).
* SyntheticDetector does real image processing (color-blob moments) on
  procedurally rendered fiducial faces from ``render_face``. It exists
  so the whole client, including ingestion and the live pipeline, can be
  exercised end to end on machines without a camera or mediapipe. Its
  nose geometry is calibrated so a pipeline configured with
  ``pitch_offset_deg = 45`` reads the encoded pitch back out.
"""
import math

import cv2
import numpy as np

N_LANDMARKS = 468

# face-unit geometry of the synthetic face (eye half-distance = 1)
NOSE_DEPTH = 1.6
NOSE_DROP = 1.1
NEUTRAL_NOSE_DEG = 45.0  # raw arctan of the synthetic nose vector at rest

# fiducial colors, BGR
LEFT_EYE_BGR = (0, 255, 0)
RIGHT_EYE_BGR = (255, 0, 0)
NOSE_BGR = (0, 0, 255)

LEFT_EYE_IDX = [33, 160, 158, 133, 153, 144]
RIGHT_EYE_IDX = [263, 387, 385, 362, 380, 373]
NOSE_TOP_IDX = 168
NOSE_LOWER_IDX = 2
NOSE_TIP_IDX = 1

_EYE_RING = [(-0.35, 0.0), (-0.13, -0.12), (0.13, -0.12),
             (0.35, 0.0), (0.13, 0.12), (-0.13, 0.12)]


def _rot(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


def render_face(width=640, height=480, roll=0.0, yaw=0.0, pitch=0.0,
                center=(0.5, 0.5), scale=0.11):
    """Draw the synthetic fiducial face; angles in radians.

    ``scale`` is the eye half-distance as a fraction of the width.
    """
    img = np.full((height, width, 3), 255, dtype=np.uint8)
    f = scale * width  # pixels per face unit
    m = np.array([center[0] * width, center[1] * height])
    along = _rot(roll) @ np.array([1.0, 0.0])
    left = m - f * along
    right = m + f * along
    nose_local = np.array([NOSE_DEPTH * math.sin(yaw),
                           NOSE_DROP * math.cos(pitch) + NOSE_DEPTH * math.sin(pitch)])
    nose = m + f * (_rot(roll) @ nose_local)
    r_eye = max(3, int(0.16 * f))
    r_nose = max(3, int(0.13 * f))
    cv2.circle(img, tuple(np.round(left).astype(int)), r_eye, LEFT_EYE_BGR, -1)
    cv2.circle(img, tuple(np.round(right).astype(int)), r_eye, RIGHT_EYE_BGR, -1)
    cv2.circle(img, tuple(np.round(nose).astype(int)), r_nose, NOSE_BGR, -1)
    # a face oval so the picture reads as a face
    cv2.ellipse(img, tuple(np.round(m).astype(int)),
                (int(2.3 * f), int(2.9 * f)), math.degrees(roll), 0, 360,
                (200, 200, 200), 2)
    return img


def _blob_center(img, bgr, tol=40):
    lower = np.array([max(0, c - tol) for c in bgr])
    upper = np.array([min(255, c + tol) for c in bgr])
    mask = cv2.inRange(img, lower, upper)
    moments = cv2.moments(mask, binaryImage=True)
    if moments["m00"] < 1.0:
        return None
    return np.array([moments["m10"] / moments["m00"],
                     moments["m01"] / moments["m00"]])


class SyntheticDetector:
    """Recover pose from the fiducial blobs, then emit a full 468-point frame."""

    def detect(self, image_bgr):
        h, w = image_bgr.shape[:2]
        left = _blob_center(image_bgr, LEFT_EYE_BGR)
        right = _blob_center(image_bgr, RIGHT_EYE_BGR)
        nose = _blob_center(image_bgr, NOSE_BGR)
        if left is None or right is None or nose is None:
            return None
        mid = 0.5 * (left + right)
        d = right - left
        roll = math.atan2(d[1], d[0])
        f = 0.5 * float(np.hypot(*d))
        if f < 2.0:
            return None
        u = (_rot(-roll) @ (nose - mid)) / f
        yaw = math.asin(min(max(u[0] / NOSE_DEPTH, -1.0), 1.0))
        k = math.hypot(NOSE_DEPTH, NOSE_DROP)
        phase = math.atan2(NOSE_DROP, NOSE_DEPTH)
        pitch = math.asin(min(max(u[1] / k, -1.0), 1.0)) - phase
        return self._build_frame(w, h, mid, f, roll, yaw, pitch, nose)

    def _build_frame(self, w, h, mid, f, roll, yaw, pitch, nose_px):
        """Emit the 468 points in frame-normalized coordinates.

        Offsets are applied in normalized space (not pixel space), so the
        downstream slope estimators read the detected pose back exactly
        even on non-square frames.
        """
        pts = np.zeros((N_LANDMARKS, 3))
        rot = _rot(roll)
        mid_n = np.array([mid[0] / w, mid[1] / h])
        f_n = f / w

        # filler: a deterministic spiral over the face oval, z flat
        golden = 2.399963229728653
        for i in range(N_LANDMARKS):
            r = math.sqrt((i + 1) / N_LANDMARKS)
            a = i * golden
            local = np.array([2.2 * r * math.cos(a), 2.8 * r * math.sin(a)])
            pts[i, :2] = mid_n + f_n * (rot @ local)

        # eye rings around the detected centers; ring depth encodes yaw
        eye_dist_n = 2.0 * f_n
        z_half = 0.5 * eye_dist_n * math.tan(yaw)
        for sign, idxs, z in ((-1.0, LEFT_EYE_IDX, -z_half),
                              (+1.0, RIGHT_EYE_IDX, +z_half)):
            center = mid_n + sign * f_n * (rot @ np.array([1.0, 0.0]))
            for (dx, dy), idx in zip(_EYE_RING, idxs):
                pts[idx, :2] = center + f_n * (rot @ np.array([dx, dy]))
                pts[idx, 2] = z

        # nose pair: arctan(dy/dz) reads 45 deg + pitch by construction
        length = 0.7 * eye_dist_n
        angle = math.radians(NEUTRAL_NOSE_DEG) + pitch
        nose_n = mid_n + f_n * (rot @ np.array(
            [NOSE_DEPTH * math.sin(yaw),
             NOSE_DROP * math.cos(pitch) + NOSE_DEPTH * math.sin(pitch)]))
        pts[NOSE_LOWER_IDX] = (*nose_n, 0.30 * eye_dist_n)
        pts[NOSE_TOP_IDX] = (nose_n[0], nose_n[1] - length * math.sin(angle),
                             pts[NOSE_LOWER_IDX][2] - length * math.cos(angle))
        pts[NOSE_TIP_IDX] = (nose_n[0], nose_n[1] + 0.1 * eye_dist_n,
                             0.45 * eye_dist_n)
        np.clip(pts[:, 0], -0.49, 1.49, out=pts[:, 0])
        np.clip(pts[:, 1], -0.49, 1.49, out=pts[:, 1])
        return pts


class MediapipeDetector:
    """The 468-landmark face mesh; requires the optional mediapipe extra."""

    def __init__(self, min_detection_confidence=0.5, min_tracking_confidence=0.5):
        import mediapipe as mp
        self._mesh = mp.solutions.face_mesh.FaceMesh(
            max_num_faces=1,
            refine_landmarks=False,
            min_detection_confidence=min_detection_confidence,
            min_tracking_confidence=min_tracking_confidence)

    def detect(self, image_bgr):
        rgb = cv2.cvtColor(image_bgr, cv2.COLOR_BGR2RGB)
        result = self._mesh.process(rgb)
        if not result.multi_face_landmarks:
            return None
        lm = result.multi_face_landmarks[0].landmark[:N_LANDMARKS]
        return np.array([[p.x, p.y, p.z] for p in lm])

    def close(self):
        self._mesh.close()


def make_detector(kind: str):
    if kind == "synthetic":
        return SyntheticDetector()
    if kind == "mediapipe":
        return MediapipeDetector()
    raise ValueError(f"unknown detector {kind!r} (use mediapipe or synthetic)")
