#!/usr/bin/env python3
"""Regenerate the committed canonical 468-point face mesh.

Head coordinates: x right, y down, z toward the camera, face roughly
within [-0.65, 0.65]. Semantic landmarks (eye rings, nose bridge/under-
nose) sit at exact symmetric positions; the remaining indices are filled
with feature rings plus a seeded scatter over the face dome. The output
is committed data; rerunning this script reproduces it bit-for-bit.
"""
import json
import math
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "agile_head" / "data" / "canonical_mesh.json"

N_POINTS = 468
SEED = 20260808

# eye ring offsets around each eye center: outer corner, two upper-lid,
# inner corner, two lower-lid points (ordered for the lid polygon)
EYE_RING = [(-0.080, 0.000), (-0.030, -0.028), (0.030, -0.028),
            (0.080, 0.000), (0.030, 0.028), (-0.030, 0.028)]
LEFT_EYE_CENTER = (-0.22, -0.15)
RIGHT_EYE_CENTER = (0.22, -0.15)
LEFT_EYE_IDX = [33, 160, 158, 133, 153, 144]
RIGHT_EYE_IDX = [263, 387, 385, 362, 380, 373]
NOSE_TOP_IDX = 168     # bridge between the eyes
NOSE_LOWER_IDX = 2     # under-nose point
NOSE_TIP_IDX = 1


def dome_z(x, y):
    r2 = (x / 0.55) ** 2 + (y / 0.70) ** 2
    return 0.45 * math.sqrt(max(0.0, 1.0 - r2))


def main():
    pts = {}

    def put(idx, x, y, z):
        assert idx not in pts, idx
        pts[idx] = (round(x, 6), round(y, 6), round(z, 6))

    for (cx, cy), idxs in ((LEFT_EYE_CENTER, LEFT_EYE_IDX), (RIGHT_EYE_CENTER, RIGHT_EYE_IDX)):
        for (dx, dy), idx in zip(EYE_RING, idxs):
            x, y = cx + dx, cy + dy
            put(idx, x, y, dome_z(x, y) - 0.01)

    put(NOSE_TOP_IDX, 0.0, -0.12, dome_z(0.0, -0.12) + 0.04)
    put(NOSE_LOWER_IDX, 0.0, 0.16, dome_z(0.0, 0.16) + 0.29)
    put(NOSE_TIP_IDX, 0.0, 0.09, dome_z(0.0, 0.09) + 0.32)

    rings = []
    # face oval
    for k in range(36):
        a = 2 * math.pi * k / 36
        rings.append((0.50 * math.cos(a), 0.65 * math.sin(a)))
    # brows
    for side in (-1, 1):
        for k in range(8):
            x = side * (0.10 + 0.024 * k)
            rings.append((x, -0.26 - 0.015 * math.sin(math.pi * k / 7)))
    # mouth, outer and inner
    for k in range(20):
        a = 2 * math.pi * k / 20
        rings.append((0.18 * math.cos(a), 0.32 + 0.075 * math.sin(a)))
    for k in range(12):
        a = 2 * math.pi * k / 12
        rings.append((0.13 * math.cos(a), 0.32 + 0.035 * math.sin(a)))
    # nose sides
    for side in (-1, 1):
        for k in range(6):
            t = k / 5
            rings.append((side * (0.03 + 0.05 * t), -0.08 + 0.22 * t))

    rng = np.random.default_rng(SEED)
    scatter = []
    while len(scatter) < N_POINTS:  # plenty; consumed as needed
        x = rng.uniform(-0.55, 0.55)
        y = rng.uniform(-0.68, 0.68)
        if (x / 0.55) ** 2 + (y / 0.70) ** 2 <= 0.95:
            scatter.append((x, y))

    pool = iter(rings + scatter)
    for idx in range(N_POINTS):
        if idx in pts:
            continue
        x, y = next(pool)
        put(idx, x, y, dome_z(x, y))

    data = {
        "points": [list(pts[i]) for i in range(N_POINTS)],
        "landmarks": {
            "left_eye": LEFT_EYE_IDX,
            "right_eye": RIGHT_EYE_IDX,
            "nose_top": NOSE_TOP_IDX,
            "nose_lower": NOSE_LOWER_IDX,
            "eyelid_left": LEFT_EYE_IDX,
            "eyelid_right": RIGHT_EYE_IDX,
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, separators=(",", ":")) + "\n")
    print(f"wrote {OUT} ({N_POINTS} points)")


if __name__ == "__main__":
    main()
