"""The capture session: camera -> detector -> `landmarks`, with feedback.

The client does no angle math of its own; the overlay only displays what
it hears back on `angles` and `joint_states`, so the robot side stays
the single source of truth for semantics.
"""
import json
import time
from dataclasses import dataclass

import cv2

from . import overlay
from .wire import WireClient, WireError


class BrokerUnavailable(Exception):
    pass


@dataclass
class CaptureSession:
    broker: str = "127.0.0.1:7447"
    camera_id: int = 0
    fps: float = 20.0
    record_path: str = None
    show_overlay: bool = True
    detector_kind: str = "mediapipe"
    max_frames: int = None          # None = until the source ends or 'q'
    connect_retries: int = 5

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")


def _connect_with_backoff(session) -> WireClient:
    delay = 0.2
    last = None
    for _ in range(max(1, session.connect_retries)):
        try:
            return WireClient(session.broker, name="capture").connect()
        except OSError as exc:
            last = exc
            time.sleep(delay)
            delay = min(delay * 2, 2.0)
    raise BrokerUnavailable(f"cannot reach broker at {session.broker}: {last}")


def stream(session: CaptureSession, camera=None, detector=None,
           clock=time.monotonic) -> dict:
    """Run the capture loop; returns counters for the session.

    Frames with no detected face publish nothing. Every published frame
    is appended to the trace file when recording. On exit an
    ``{"eos": true}`` marker closes the stream so a listening pipeline
    can finish its report.
    """
    if camera is None:
        from .camera import OpenCvCamera
        camera = OpenCvCamera(session.camera_id)
    if detector is None:
        from .detector import make_detector
        detector = make_detector(session.detector_kind)

    client = _connect_with_backoff(session)
    angles_box = client.subscribe("angles", queue=4)
    joints_box = client.subscribe("joint_states", queue=4)

    counters = {"captured": 0, "published": 0, "no_face": 0}
    period = 1.0 / session.fps
    trace = open(session.record_path, "w") if session.record_path else None
    last_angles = None
    last_joints = None
    try:
        next_t = clock()
        while session.max_frames is None or counters["captured"] < session.max_frames:
            img = camera.read()
            if img is None:
                break
            counters["captured"] += 1
            points = detector.detect(img)
            if points is None:
                counters["no_face"] += 1
            else:
                stamp_us = int(clock() * 1e6)
                payload = {"stamp_us": stamp_us, "w": img.shape[1],
                           "h": img.shape[0], "pts": points.tolist()}
                try:
                    client.publish("landmarks", payload, stamp_us=stamp_us)
                except WireError as exc:
                    raise BrokerUnavailable(str(exc)) from exc
                counters["published"] += 1
                if trace:
                    trace.write(json.dumps(payload, separators=(",", ":")) + "\n")

            message = angles_box.latest()
            if message is not None and "roll_deg" in message.payload:
                last_angles = message.payload
            message = joints_box.latest()
            if message is not None and isinstance(message.payload, dict):
                last_joints = message.payload
            if session.show_overlay:
                overlay.compose(img, points=points, angles=last_angles,
                                ee_deg=(last_joints or {}).get("ee_deg"),
                                held=bool((last_joints or {}).get("held", False)),
                                connected=client.connected,
                                recording=trace is not None)
                cv2.imshow("agile-head-capture", img)
                if cv2.waitKey(1) & 0xFF == ord("q"):
                    break

            next_t += period
            delay = next_t - clock()
            if delay > 0:
                time.sleep(delay)
            else:
                next_t = clock()
        # give the pipeline a beat to drain before closing the stream
        time.sleep(0.25)
        try:
            client.publish("landmarks", {"eos": True})
        except WireError:
            pass
    finally:
        if trace:
            trace.close()
        camera.release()
        client.close()
        if session.show_overlay:
            cv2.destroyAllWindows()
    return counters
