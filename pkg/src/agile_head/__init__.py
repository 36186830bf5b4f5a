"""Head-and-eye imitation with a simulated 3-DOF spherical parallel wrist.

Face-pose estimation from 468-point landmark frames drives the robot's
inverse kinematics through a small pub/sub bus, with PID-controlled
servos following 3-4-5 planned trajectories.
"""
from .control import PidGains, PidState, ServoPlant, SpeedGuard, SpeedGuardConfig
from .facepose import EyeCommand, FaceAngles, FaceGeometryConfig, LandmarkFrame
from .geometry import EulerZYX, HeadPose
from .kinematics import JointAngles, WorkspaceLimits
from .regressor import LinearPoseModel
from .trajectory import Trajectory345

__all__ = [
    "EulerZYX", "EyeCommand", "FaceAngles", "FaceGeometryConfig", "HeadPose",
    "JointAngles", "LandmarkFrame", "LinearPoseModel", "PidGains", "PidState",
    "ServoPlant", "SpeedGuard", "SpeedGuardConfig", "Trajectory345",
    "WorkspaceLimits",
]

__version__ = "0.1.0"
