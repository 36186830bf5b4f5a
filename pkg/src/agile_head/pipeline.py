"""The executable system: the two node processes, trace replay, and reports.

``face_angles`` turns landmark frames into head angles and eye commands;
``agile_eye`` turns head angles into PID-tracked simulated joint motion
through guard -> clamp -> rotation composition -> Euler extraction ->
IKP -> 3-4-5 planning. The nodes talk only via the bus.

Batch mode (replay factor 0) drives the control clock from message
timestamps in fixed ticks, so identical trace + config give bit-identical
reports. Live mode ticks on the wall clock behind a capacity-1
latest-wins mailbox.

End of stream is an in-band ``{"eos": true}`` payload on ``landmarks``,
forwarded on ``angles``.
"""
import json
import math
import os
import pathlib
import subprocess
import sys
import time
from dataclasses import dataclass, field

from . import bus
from .bus import Broker, BusClient, BusMessage
from .config import PipelineConfig
from .control import PidState, SpeedGuard, pid_step, servo_step
from .errors import (AgileHeadError, DegenerateFrame, DegenerateGeometry,
                     Disconnected, GimbalLock, MalformedFrame, NoConvergence,
                     ParseError, SingularPose)
from .facepose import (LandmarkFrame, estimate_face_angles, estimate_roll,
                       eye_command)
from .geometry import (EulerZYX, HeadPose, compose_head_rotation,
                       decompose_head_rotation, euler_to_matrix,
                       matrix_to_euler)
from .kinematics import JointAngles, clamp_to_workspace, fkp, ikp
from .regressor import LinearPoseModel, predict, score_to_angle
from .trajectory import Trajectory345, move_duration

TOPIC_LANDMARKS = "landmarks"
TOPIC_ANGLES = "angles"
TOPIC_EYE = "eye"
TOPIC_JOINTS = "joint_states"
TOPIC_READY = "node_ready"
BATCH_QUEUE = 1_000_000
CSV_HEADER = "t_s,set1_deg,set2_deg,set3_deg,pos1_deg,pos2_deg,pos3_deg,roll_deg,pitch_deg,yaw_deg"
REPORT_SCHEMA = "agile-head-report/1"

_deg = math.degrees


def _is_eos(payload) -> bool:
    return isinstance(payload, dict) and payload.get("eos") is True


@dataclass
class RunReport:
    """What a finished agile_eye run measured."""

    frames_processed: int = 0
    frames_held: int = 0
    singular_events: int = 0
    rms_error_deg: dict = field(default_factory=lambda: {"roll": 0.0, "pitch": 0.0, "yaw": 0.0})
    max_joint_velocity_deg_s: float = 0.0
    duration_s: float = 0.0

    @property
    def frames_accepted(self) -> int:
        return self.frames_processed - self.frames_held

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "frames_processed": self.frames_processed,
            "frames_accepted": self.frames_accepted,
            "frames_held": self.frames_held,
            "singular_events": self.singular_events,
            "rms_error_deg": self.rms_error_deg,
            "max_joint_velocity_deg_s": self.max_joint_velocity_deg_s,
            "duration_s": self.duration_s,
        }


def write_report(out_dir, report: RunReport, rows):
    """Write report.json plus the joint trajectory CSV; returns the dir path."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    with open(out / "trajectory.csv", "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.9f}" for v in row) + "\n")
    return out


class FaceAnglesNode:
    """Per landmark frame: estimate head angles, publish `angles` and `eye`."""

    def __init__(self, config: PipelineConfig, client: BusClient = None):
        self.config = config
        self.client = client or BusClient(config.broker, name="face_angles")
        self.frames = 0
        self.skipped = 0
        self._own_client = client is None
        self._models = None
        if config.method == "regression":
            self._models = (LinearPoseModel.load(config.model_horizontal),
                            LinearPoseModel.load(config.model_vertical))

    def _angles(self, frame: LandmarkFrame):
        cfg = self.config.face
        if self._models is None:
            a = estimate_face_angles(frame, cfg)
            return a.roll, a.yaw, a.pitch
        horizontal, vertical = self._models
        # roll stays geometric: only the eye positions can give it
        roll = estimate_roll(frame, cfg)
        yaw = score_to_angle(predict(horizontal, frame), self.config.workspace.max_yaw)
        pitch = score_to_angle(predict(vertical, frame), self.config.workspace.max_pitch)
        return roll, yaw, pitch

    def run(self):
        if not self.client.connected:
            self.client.connect()
        queue_cap = BATCH_QUEUE if self.config.batch else bus.DEFAULT_QUEUE
        sub = self.client.subscribe(TOPIC_LANDMARKS, queue=queue_cap)
        self.client.advertise(TOPIC_ANGLES)
        self.client.advertise(TOPIC_EYE)
        self.client.publish(TOPIC_READY, {"node": "face_angles"})
        try:
            while True:
                message = sub.queue.pop(timeout=0.25)
                if message is None:
                    if not self.client.connected:
                        raise Disconnected("broker connection lost")
                    continue
                if _is_eos(message.payload):
                    self.client.publish(TOPIC_ANGLES, {"eos": True},
                                        stamp_us=message.stamp_us)
                    break
                self._handle(message)
        finally:
            if self._own_client:
                self.client.close()
        return self

    def _handle(self, message: BusMessage):
        try:
            frame = LandmarkFrame.from_payload(message.payload)
            roll, yaw, pitch = self._angles(frame)
            eye = eye_command(frame, self.config.face)
        except (MalformedFrame, DegenerateGeometry, DegenerateFrame) as exc:
            self.skipped += 1
            print(f"face_angles: skipping frame: {exc}", file=sys.stderr)
            return
        self.frames += 1
        self.client.publish(TOPIC_ANGLES,
                            {"roll_deg": _deg(roll), "yaw_deg": _deg(yaw),
                             "pitch_deg": _deg(pitch), "stamp_us": frame.stamp_us},
                            stamp_us=frame.stamp_us)
        self.client.publish(TOPIC_EYE,
                            {"pan_deg": _deg(eye.pan), "tilt_deg": _deg(eye.tilt),
                             "lid": eye.lid_openness},
                            stamp_us=frame.stamp_us)


class AgileEyeNode:
    """Track the `angles` stream with the simulated robot; record the run."""

    def __init__(self, config: PipelineConfig, out_dir=None, client: BusClient = None):
        self.config = config
        self.out_dir = out_dir
        self.client = client or BusClient(config.broker, name="agile_eye")
        self._own_client = client is None
        self.report = RunReport()
        self.rows = []
        dt = config.control_dt
        self._dt = dt
        self._dt_us = max(1, round(dt * 1e6))
        self._plants = [config.servo, config.servo, config.servo]
        self._pid = [PidState(), PidState(), PidState()]
        self._guard = SpeedGuard(config.guard)
        self._target = JointAngles(0.0, 0.0, 0.0)
        self._traj = None
        self._traj_t0_us = 0
        self._commanded = HeadPose(0.0, 0.0, 0.0)
        self._euler_seed = EulerZYX(0.0, 0.0, 0.0)
        self._last_ee = HeadPose(0.0, 0.0, 0.0)
        self._sim_us = None
        self._t0_us = None
        self._held_last = False
        self._sq = [0.0, 0.0, 0.0]
        self._ticks = 0
        self._tick_count_published = 0

    # -- simulation core -------------------------------------------------

    def _setpoint(self) -> JointAngles:
        if self._traj is None:
            return self._target
        return self._traj.position((self._sim_us - self._traj_t0_us) * 1e-6)

    def _tick(self):
        self._sim_us += self._dt_us
        sp = self._setpoint()
        max_dv = 0.0
        for i in range(3):
            command, self._pid[i] = pid_step(self.config.gains, self._pid[i],
                                             sp[i], self._plants[i].position, self._dt)
            before = self._plants[i].position
            self._plants[i] = servo_step(self._plants[i], command, self._dt)
            max_dv = max(max_dv, abs(self._plants[i].position - before) / self._dt)
        self.report.max_joint_velocity_deg_s = max(
            self.report.max_joint_velocity_deg_s, _deg(max_dv))
        q = JointAngles(*(p.position for p in self._plants))
        try:
            e = fkp(q, seed=self._euler_seed)
            self._euler_seed = e
            self._last_ee = decompose_head_rotation(euler_to_matrix(e))
        except (NoConvergence, GimbalLock):
            pass  # keep the previous estimate for this tick
        ee = self._last_ee
        for i, axis in enumerate(("roll", "pitch", "yaw")):
            err = getattr(self._commanded, axis) - getattr(ee, axis)
            self._sq[i] += err * err
        self._ticks += 1
        t_s = (self._sim_us - self._t0_us) * 1e-6
        self.rows.append((t_s, _deg(sp.theta1), _deg(sp.theta2), _deg(sp.theta3),
                          _deg(q.theta1), _deg(q.theta2), _deg(q.theta3),
                          _deg(ee.roll), _deg(ee.pitch), _deg(ee.yaw)))
        self._tick_count_published += 1
        if self._tick_count_published >= self.config.joint_state_stride:
            self._tick_count_published = 0
            self._publish_joint_state(sp, q, ee)

    def _publish_joint_state(self, sp, q, ee):
        try:
            self.client.publish(TOPIC_JOINTS, {
                "stamp_us": self._sim_us,
                "set_deg": [_deg(v) for v in sp],
                "pos_deg": [_deg(v) for v in q],
                "ee_deg": {"roll": _deg(ee.roll), "pitch": _deg(ee.pitch),
                           "yaw": _deg(ee.yaw)},
                "held": self._held_last,
            }, stamp_us=self._sim_us)
        except Disconnected:
            pass

    def _advance_to(self, target_us: int):
        while self._sim_us + self._dt_us <= target_us:
            self._tick()

    @staticmethod
    def _parse_pose(payload):
        try:
            pose = HeadPose(roll=math.radians(float(payload["roll_deg"])),
                            pitch=math.radians(float(payload["pitch_deg"])),
                            yaw=math.radians(float(payload["yaw_deg"])))
            return pose, int(payload["stamp_us"])
        except (KeyError, TypeError, ValueError):
            return None

    def _apply(self, pose: HeadPose, stamp_us: int):
        """Guard, clamp, and retarget from one angles message."""
        self.report.frames_processed += 1
        accepted = self._guard.check(stamp_us * 1e-6, pose)
        if not accepted:
            self.report.frames_held += 1
            self._held_last = True
            return
        self._held_last = False
        clamped = clamp_to_workspace(pose, self.config.workspace)
        try:
            euler = matrix_to_euler(compose_head_rotation(
                clamped.yaw, clamped.roll, clamped.pitch))
            q_target = ikp(euler)
        except (GimbalLock, SingularPose):
            self.report.singular_events += 1
            return
        self._commanded = clamped
        q_start = self._setpoint()
        duration = move_duration(q_start, q_target,
                                 self.config.planner_v_max, self.config.planner_t_min)
        self._traj = Trajectory345(q_start, q_target, duration)
        self._traj_t0_us = self._sim_us
        self._target = q_target

    # -- run loops --------------------------------------------------------

    def run(self):
        if not self.client.connected:
            self.client.connect()
        queue_cap = BATCH_QUEUE if self.config.batch else 1
        sub = self.client.subscribe(TOPIC_ANGLES, queue=queue_cap)
        self.client.advertise(TOPIC_JOINTS)
        self.client.publish(TOPIC_READY, {"node": "agile_eye"})
        started = time.monotonic()
        try:
            if self.config.batch:
                self._run_batch(sub)
            else:
                self._run_live(sub)
        finally:
            if self._own_client:
                self.client.close()
        if self.config.batch:
            self.report.duration_s = ((self._sim_us - self._t0_us) * 1e-6
                                      if self._sim_us is not None else 0.0)
        else:
            self.report.duration_s = time.monotonic() - started
        if self._ticks:
            self.report.rms_error_deg = {
                axis: _deg(math.sqrt(self._sq[i] / self._ticks))
                for i, axis in enumerate(("roll", "pitch", "yaw"))}
        if self.out_dir is not None:
            write_report(self.out_dir, self.report, self.rows)
        return self

    def _finish_tail(self):
        if self._sim_us is None:
            return
        tail_us = round(self.config.settle_tail_s * 1e6)
        self._advance_to(self._sim_us + tail_us)

    def _run_batch(self, sub):
        """Message-time control clock: deterministic from stamps alone."""
        while True:
            message = sub.queue.pop(timeout=0.25)
            if message is None:
                if not self.client.connected:
                    raise Disconnected("broker connection lost")
                continue
            if _is_eos(message.payload):
                self._finish_tail()
                return
            parsed = self._parse_pose(message.payload)
            if parsed is None:
                self.report.singular_events += 1
                continue
            pose, stamp_us = parsed
            if self._sim_us is None:
                self._t0_us = self._sim_us = stamp_us
            else:
                self._advance_to(stamp_us)
            self._apply(pose, stamp_us)

    def _run_live(self, sub):
        """Wall-clock control ticks behind a capacity-1 latest-wins mailbox."""
        dt = self._dt
        next_t = time.monotonic()
        while True:
            message = sub.queue.pop(timeout=0)
            if message is not None:
                if _is_eos(message.payload):
                    self._finish_tail()
                    return
                parsed = self._parse_pose(message.payload)
                if parsed is None:
                    self.report.singular_events += 1
                else:
                    if self._sim_us is None:
                        self._t0_us = self._sim_us = parsed[1]
                    self._apply(*parsed)
            if not self.client.connected:
                raise Disconnected("broker connection lost")
            if self._sim_us is not None:
                self._tick()
            next_t += dt
            delay = next_t - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_t = time.monotonic()


def replay(trace_path, client: BusClient, speed: float = 0.0,
           publish_eos: bool = True) -> int:
    """Publish a recorded trace on `landmarks`.

    Sleeps recorded-spacing x ``speed`` between frames, so 0 streams as
    fast as possible (batch) and 1 plays in real time.
    """
    if speed < 0:
        raise ParseError(f"speed factor must be >= 0, got {speed!r}")
    count = 0
    prev_stamp = None
    client.advertise(TOPIC_LANDMARKS)
    with open(trace_path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
                stamp = int(payload["stamp_us"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad trace record: {exc}", line=lineno) from exc
            if prev_stamp is not None and speed > 0:
                gap = max(0, stamp - prev_stamp) * 1e-6 * speed
                time.sleep(gap)
            prev_stamp = stamp
            client.publish(TOPIC_LANDMARKS, payload, stamp_us=stamp)
            count += 1
    if publish_eos:
        client.publish(TOPIC_LANDMARKS, {"eos": True},
                       stamp_us=prev_stamp if prev_stamp is not None else 0)
    return count


def run_pipeline(trace_path, config_path, out_dir, timeout: float = 120.0):
    """Launch broker + both node processes + batch replay; returns out_dir.

    The nodes are separate OS processes talking only via the bus; the
    ephemeral broker address reaches them through the environment.
    """
    trace_path = str(trace_path)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    broker = Broker("127.0.0.1", port=0).start()
    procs = []
    client = None
    try:
        env = dict(os.environ)
        env[bus.BROKER_ENV] = f"127.0.0.1:{broker.port}"
        ready = set()
        client = BusClient(broker.address, name="run").connect()
        waiting = {"face_angles", "agile_eye"}
        sub = client.subscribe(TOPIC_READY, queue=16)
        base = [sys.executable, "-m", "agile_head"]
        procs.append(subprocess.Popen(
            base + ["face-angles", "--config", str(config_path), "--batch"], env=env))
        procs.append(subprocess.Popen(
            base + ["agile-eye", "--config", str(config_path), "--batch",
                    "--out", str(out)], env=env))
        deadline = time.monotonic() + timeout
        while ready < waiting:
            message = sub.queue.pop(timeout=0.25)
            if message is not None and isinstance(message.payload, dict):
                ready.add(message.payload.get("node"))
            if time.monotonic() > deadline:
                raise AgileHeadError(f"nodes not ready: missing {waiting - ready}")
            for p in procs:
                code = p.poll()
                if code not in (None, 0):
                    raise AgileHeadError(f"node exited early with code {code}")
        replay(trace_path, client, speed=0.0, publish_eos=True)
        for p in procs:
            code = p.wait(timeout=timeout)
            if code != 0:
                raise AgileHeadError(f"node exited with code {code}")
    finally:
        for p in procs:
            if p.poll() is None:
                p.terminate()
        if client is not None:
            client.close()
        broker.stop()
    return out
