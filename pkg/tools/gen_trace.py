#!/usr/bin/env python3
"""Regenerate the committed synthetic landmark traces under tests/data/.

slow_motion_300.jsonl: 300 frames at 30 fps of slow smooth multi-axis
motion within +/-12 degrees, rendered from the canonical mesh. Peak
angular rates stay under ~3 deg/s so the tracking fidelity criterion is
observable, and well under the speed guard threshold.
"""
import json
import math
import pathlib

from agile_head.mesh import render_frame

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"

FPS_US = 33333
N_FRAMES = 300


def pose_at(t: float):
    # zero phase: the stream starts at the reference pose, so the whole
    # run measures tracking rather than initial acquisition
    roll = math.radians(10.0) * math.sin(2 * math.pi * t / 24.0)
    yaw = math.radians(11.0) * math.sin(2 * math.pi * t / 30.0)
    pitch = math.radians(9.0) * math.sin(2 * math.pi * t / 20.0)
    return roll, yaw, pitch


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "slow_motion_300.jsonl"
    with open(path, "w") as fh:
        for k in range(N_FRAMES):
            stamp = k * FPS_US
            roll, yaw, pitch = pose_at(stamp * 1e-6)
            frame = render_frame(roll=roll, yaw=yaw, pitch=pitch, stamp_us=stamp)
            payload = frame.to_payload()
            # 1e-6 of a frame is far below every estimator tolerance
            payload["pts"] = [[round(v, 6) for v in p] for p in payload["pts"]]
            fh.write(json.dumps(payload, separators=(",", ":")) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
