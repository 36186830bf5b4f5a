"""3-4-5 joint-space motion planning.

The quintic blend S(tau) = 6 tau^5 - 15 tau^4 + 10 tau^3 has zero
velocity and zero acceleration at both ends and a normalized peak
velocity of exactly 1.875 at the midpoint. Each move lasts
T = max(T_min, |dq|_inf / v_max), which bounds the peak joint velocity
at 1.875 * |dq|_inf / T.
"""
from dataclasses import dataclass

from .errors import DomainError
from .kinematics import JointAngles

DEFAULT_T_MIN = 0.05          # s, floor for very small moves
DEFAULT_V_MAX = 1.5707963267948966  # rad/s (90 deg/s) mean-speed bound


def s345(tau: float) -> float:
    """Normalized 3-4-5 position profile on [0, 1]."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau {tau!r} outside [0, 1]")
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))


def ds345(tau: float) -> float:
    """Derivative dS/dtau = 30 tau^2 (tau - 1)^2."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau {tau!r} outside [0, 1]")
    return 30.0 * tau * tau * (tau - 1.0) * (tau - 1.0)


def move_duration(q0: JointAngles, q1: JointAngles,
                  v_max: float = DEFAULT_V_MAX, t_min: float = DEFAULT_T_MIN) -> float:
    """Move time for the speed bound: max(t_min, |dq|_inf / v_max)."""
    if v_max <= 0.0 or t_min <= 0.0:
        raise DomainError("v_max and t_min must be positive")
    dq = max(abs(q1[i] - q0[i]) for i in range(3))
    return max(t_min, dq / v_max)


@dataclass(frozen=True)
class Trajectory345:
    """One planned joint-space move; immutable, evaluation is pure."""

    q_start: JointAngles
    q_end: JointAngles
    duration: float

    def __post_init__(self):
        if self.duration <= 0.0:
            raise DomainError(f"duration {self.duration!r} must be positive")

    def position(self, t: float) -> JointAngles:
        """Joint positions at time t, clamped to [0, duration]."""
        tau = min(max(t / self.duration, 0.0), 1.0)
        s = s345(tau)
        return JointAngles(*(self.q_start[i] + (self.q_end[i] - self.q_start[i]) * s
                             for i in range(3)))

    def velocity(self, t: float) -> JointAngles:
        """Joint velocities at time t (zero outside [0, duration])."""
        if t < 0.0 or t > self.duration:
            return JointAngles(0.0, 0.0, 0.0)
        dsdt = ds345(t / self.duration) / self.duration
        return JointAngles(*((self.q_end[i] - self.q_start[i]) * dsdt for i in range(3)))

    def done(self, t: float) -> bool:
        return t >= self.duration


def plan(q0: JointAngles, q1: JointAngles, duration: float, dt: float):
    """Sample a 3-4-5 move every dt seconds.

    Returns a list of (t, JointAngles, joint velocities); the first and
    last samples land exactly on q0 and q1.
    """
    if duration <= 0.0 or dt <= 0.0 or duration < dt:
        raise DomainError(f"need duration >= dt > 0, got T={duration!r} dt={dt!r}")
    traj = Trajectory345(q0, q1, duration)
    out = []
    k = 0
    while True:
        t = k * dt
        if t >= duration:
            break
        out.append((t, traj.position(t), traj.velocity(t)))
        k += 1
    out.append((duration, traj.position(duration), traj.velocity(duration)))
    return out
