#!/usr/bin/env python3
"""Grid search that produced the committed default PID gains.

Scores each gain triple against the closed-loop criterion (15 degree
3-4-5 move over 1 s: final error < 0.2 deg by 1.5 s, overshoot <= 5
percent of the move) and prints the feasible set ranked by settle time.
The committed defaults (kp=8, ki=0.5, kd=0.05) sit on this front with
comfortable margin on both constraints.
"""
import itertools
import math

from agile_head.control import PidGains, settle_metrics, track_trajectory
from agile_head.kinematics import JointAngles
from agile_head.trajectory import Trajectory345

TARGET = math.radians(15.0)
DT = 0.005


def score(gains):
    traj = Trajectory345(JointAngles(0, 0, 0), JointAngles(TARGET, 0, 0), 1.0)
    times = [k * DT for k in range(1, round(1.5 / DT) + 1)]
    setpoints = [traj.position(t).theta1 for t in times]
    positions, _ = track_trajectory(setpoints, gains=gains, dt=DT)
    settle, overshoot = settle_metrics(times, positions, TARGET, 0.0)
    final = abs(positions[-1] - TARGET)
    ok = final < math.radians(0.2) and settle <= 1.5 and overshoot <= 0.05 * TARGET
    return ok, settle, math.degrees(overshoot), math.degrees(final)


def main():
    grid = itertools.product((2.0, 4.0, 8.0, 12.0, 16.0),
                             (0.0, 0.25, 0.5, 1.0),
                             (0.0, 0.05, 0.1))
    feasible = []
    for kp, ki, kd in grid:
        gains = PidGains(kp=kp, ki=ki, kd=kd)
        ok, settle, overshoot, final = score(gains)
        if ok:
            feasible.append((settle, overshoot, final, gains))
    feasible.sort()
    print(f"{'settle[s]':>9} {'ovr[deg]':>9} {'final[deg]':>10}   gains")
    for settle, overshoot, final, gains in feasible:
        marker = "  <-- committed default" if gains == PidGains() else ""
        print(f"{settle:9.3f} {overshoot:9.4f} {final:10.4f}   "
              f"kp={gains.kp:<5} ki={gains.ki:<5} kd={gains.kd:<5}{marker}")
    if not any(g == PidGains() for _, _, _, g in feasible):
        raise SystemExit("committed defaults fell off the feasible front")


if __name__ == "__main__":
    main()
