"""3-4-5 planning and the PID-tracked servo simulation.

Plans a 15 degree move with zero boundary velocity and acceleration,
tracks it with the committed default gains, and (when matplotlib is
around) saves the profile and tracking plots to demos/out/.
"""
import math
import pathlib

from agile_head.control import PidGains, settle_metrics, track_trajectory
from agile_head.kinematics import JointAngles
from agile_head.trajectory import Trajectory345, ds345, s345

deg = math.degrees
target = math.radians(15.0)
dt = 0.005

print("=== the 3-4-5 profile ===")
for tau in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  S({tau:4.2f}) = {s345(tau):11.9f}   S'({tau:4.2f}) = {ds345(tau):7.5f}")
print(f"  peak normalized velocity: {ds345(0.5)} at the midpoint\n")

traj = Trajectory345(JointAngles(0, 0, 0), JointAngles(target, 0, 0), 1.0)
times = [k * dt for k in range(1, 301)]
setpoints = [traj.position(t).theta1 for t in times]
positions, plant = track_trajectory(setpoints, gains=PidGains(), dt=dt)
settle, overshoot = settle_metrics(times, positions, target, 0.0)

print("=== closed loop: PID + first-order servo ===")
print(f"  move: 15 deg over 1 s, control tick {dt*1000:.0f} ms, gains {PidGains()}")
print(f"  final error     : {deg(abs(positions[-1] - target)):.4f} deg")
print(f"  settled (0.2deg): {settle:.2f} s")
print(f"  overshoot       : {deg(overshoot):.4f} deg "
      f"({100 * overshoot / target:.2f} percent of the move)")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping plots")
else:
    out = pathlib.Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(times, [deg(v) for v in setpoints], label="3-4-5 setpoint")
    ax1.plot(times, [deg(v) for v in positions], label="servo position")
    ax1.set_ylabel("angle [deg]")
    ax1.legend()
    ax2.plot(times, [deg(a - b) for a, b in zip(setpoints, positions)])
    ax2.set_ylabel("tracking error [deg]")
    ax2.set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(out / "tracking.png", dpi=120)
    print(f"  wrote {out / 'tracking.png'}")
