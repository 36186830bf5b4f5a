"""The linear pose-scoring models: normalize, fit, predict, map to angles.

Builds a labeled dataset from rendered frames (labels on the -10..10
scale), fits the horizontal and vertical models on an 80/20 split, and
maps scores back onto the 15 degree workspace.
"""
import math

from agile_head.mesh import render_frame
from agile_head.regressor import fit, predict, score_to_angle

rad = math.radians

records = []
n = 120
for k in range(n):
    yaw = -14.0 + 28.0 * k / (n - 1)
    pitch = 14.0 - 28.0 * k / (n - 1)
    frame = render_frame(yaw=rad(yaw), pitch=rad(pitch), stamp_us=k)
    records.append((frame, yaw * 10 / 15, pitch * 10 / 15))

print("=== fitting one model per movement axis ===")
models = {}
for axis in ("horizontal", "vertical"):
    model = fit(records, axis, ridge_lambda=1e-6)
    models[axis] = model
    print(f"  {axis:10}: {model.n_train} train / {model.n_val} validation,"
          f" held-out RMSE {model.val_rmse:.4f}")

print("\n=== scores map linearly onto the robot workspace ===")
for yaw_true in (-12.0, -6.0, 0.0, 6.0, 12.0):
    frame = render_frame(yaw=rad(yaw_true), pitch=rad(-yaw_true))
    score = predict(models["horizontal"], frame)
    angle = math.degrees(score_to_angle(score))
    print(f"  true yaw {yaw_true:6.1f} deg -> score {score:6.2f} -> {angle:6.2f} deg")
