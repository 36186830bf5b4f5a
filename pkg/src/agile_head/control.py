"""PID position control of simulated servos, and the input speed guard.

The plant is a velocity-commanded first-order lag with saturation: the
simplest model on which PID tuning and the smoothness of 3-4-5 planning
are observable. Default gains were committed after a scripted grid
search against the closed-loop tracking criterion (15 deg move in 1 s:
settle < 0.2 deg, overshoot < 5 percent of the move).
"""
import math
from collections import deque
from typing import NamedTuple

from .errors import DomainError, NonMonotonicTime
from .geometry import HeadPose

DEFAULT_CONTROL_DT = 0.005  # s, fixed control tick


class PidGains(NamedTuple):
    kp: float = 8.0
    ki: float = 0.5
    kd: float = 0.05
    i_max: float = 0.5  # integral clamp, command units


class PidState(NamedTuple):
    integral: float = 0.0
    prev_error: float = 0.0


def pid_step(gains: PidGains, state: PidState, setpoint: float, measured: float,
             dt: float):
    """One discrete PID update; returns (velocity command, new state)."""
    if dt <= 0.0:
        raise DomainError(f"dt {dt!r} must be positive")
    e = setpoint - measured
    integral = state.integral + e * dt
    integral = min(max(integral, -gains.i_max), gains.i_max)
    derivative = (e - state.prev_error) / dt
    command = gains.kp * e + gains.ki * integral + gains.kd * derivative
    return command, PidState(integral=integral, prev_error=e)


class ServoPlant(NamedTuple):
    """Velocity-commanded smart-servo stand-in: first-order lag + saturation."""

    position: float = 0.0
    velocity: float = 0.0
    v_limit: float = 5.235987755982989  # rad/s, ~300 deg/s
    tau: float = 0.02                   # s, velocity time constant


def servo_step(plant: ServoPlant, command: float, dt: float) -> ServoPlant:
    """Advance the plant one tick under a velocity command; deterministic."""
    if dt <= 0.0:
        raise DomainError(f"dt {dt!r} must be positive")
    cmd = min(max(command, -plant.v_limit), plant.v_limit)
    alpha = min(dt / plant.tau, 1.0)
    v = plant.velocity + (cmd - plant.velocity) * alpha
    return plant._replace(position=plant.position + v * dt, velocity=v)


class SpeedGuardConfig(NamedTuple):
    max_head_speed: float = 1.57  # rad/s
    window: int = 3               # frames averaged


class SpeedGuard:
    """Holds the setpoint while the observed head rate exceeds the limit.

    The rate of each consecutive observation pair is the largest
    per-axis |delta|/dt; the decision averages those rates over the
    last ``window`` pairs. Held poses still enter the history, so a
    fast move that settles is accepted within a frame or two.
    """

    def __init__(self, config: SpeedGuardConfig = SpeedGuardConfig()):
        if config.max_head_speed <= 0.0 or config.window <= 0:
            raise DomainError("guard settings must be positive")
        self.config = config
        self._rates = deque(maxlen=config.window)
        self._last = None  # (t_s, HeadPose)

    def check(self, t_s: float, pose: HeadPose) -> bool:
        """True = accept the new pose as a setpoint, False = hold the last one."""
        if self._last is not None:
            t_prev, p_prev = self._last
            if t_s <= t_prev:
                raise NonMonotonicTime(f"timestamp {t_s!r} not after {t_prev!r}")
            dt = t_s - t_prev
            rate = max(abs(pose[i] - p_prev[i]) for i in range(3)) / dt
            self._rates.append(rate)
        self._last = (t_s, pose)
        if not self._rates:
            return True
        return (sum(self._rates) / len(self._rates)) <= self.config.max_head_speed


def speed_guard(history, new_stamp_s: float, new_pose: HeadPose,
                config: SpeedGuardConfig = SpeedGuardConfig()) -> bool:
    """Stateless wrapper: feed a (t, pose) history plus the new sample.

    Returns True to accept, False to hold.
    """
    guard = SpeedGuard(config)
    for t, p in history:
        guard.check(t, p)
    return guard.check(new_stamp_s, new_pose)


def track_trajectory(targets, gains: PidGains = PidGains(),
                     plant: ServoPlant = ServoPlant(), dt: float = DEFAULT_CONTROL_DT):
    """Run the closed loop over a setpoint sequence; returns (positions, plants).

    ``targets`` is an iterable of setpoints sampled every dt.
    """
    state = PidState()
    positions = []
    for sp in targets:
        command, state = pid_step(gains, state, sp, plant.position, dt)
        plant = servo_step(plant, command, dt)
        positions.append(plant.position)
    return positions, plant


def settle_metrics(times, positions, target: float, start: float):
    """Settling time into a +/-0.2 deg band and peak overshoot past the target.

    Returns (settle_time_s or inf, overshoot_rad).
    """
    band = math.radians(0.2)
    move = target - start
    settle = math.inf
    for t, p in zip(reversed(times), reversed(positions)):
        if abs(p - target) > band:
            break
        settle = t
    overshoot = 0.0
    for p in positions:
        if move >= 0.0:
            overshoot = max(overshoot, p - target)
        else:
            overshoot = max(overshoot, target - p)
    return settle, overshoot
