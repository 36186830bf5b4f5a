import dataclasses
import json
import math
import pathlib
import threading
import time

import numpy as np
import pytest

from agile_head.bus import Broker, BusClient
from agile_head.config import PipelineConfig, load_config, parse_config
from agile_head.errors import ConfigError, ParseError
from agile_head.geometry import compose_head_rotation, matrix_to_euler
from agile_head.kinematics import ikp
from agile_head.mesh import render_frame
from agile_head.pipeline import (AgileEyeNode, FaceAnglesNode, RunReport,
                                 replay, write_report)

DATA = pathlib.Path(__file__).parent / "data"
TRACE = DATA / "slow_motion_300.jsonl"


@pytest.fixture
def broker():
    b = Broker("127.0.0.1", port=0).start()
    yield b
    b.stop()


def batch_config(broker, **overrides):
    return dataclasses.replace(PipelineConfig(), broker=broker.address,
                               batch=True, **overrides)


def run_face_angles(broker, publish_frames, config=None):
    """Run the node in a thread against live traffic; returns (node, angles, eye)."""
    config = config or batch_config(broker)
    angles, eye = [], []
    collector = BusClient(broker.address, name="collector").connect()
    collector.subscribe("angles", angles.append, queue=100000)
    collector.subscribe("eye", eye.append, queue=100000)
    ready = []
    collector.subscribe("node_ready", ready.append)

    node = FaceAnglesNode(config)
    thread = threading.Thread(target=node.run)
    thread.start()
    deadline = time.time() + 10
    while not ready and time.time() < deadline:
        time.sleep(0.01)
    assert ready, "node never became ready"

    pub = BusClient(broker.address, name="pub").connect()
    publish_frames(pub)
    pub.publish("landmarks", {"eos": True})
    thread.join(timeout=30)
    assert not thread.is_alive()
    time.sleep(0.1)  # let the collector drain
    collector.close()
    pub.close()
    return node, angles, eye


def run_agile_eye(broker, messages, config=None):
    """Feed angle payloads (with stamps) through a live node; returns the node."""
    config = config or batch_config(broker)
    ready = []
    watcher = BusClient(broker.address, name="watch").connect()
    watcher.subscribe("node_ready", ready.append)
    node = AgileEyeNode(config)
    thread = threading.Thread(target=node.run)
    thread.start()
    deadline = time.time() + 10
    while not ready and time.time() < deadline:
        time.sleep(0.01)
    assert ready
    pub = BusClient(broker.address, name="pub").connect()
    for payload in messages:
        pub.publish("angles", payload, stamp_us=payload.get("stamp_us", 0))
    pub.publish("angles", {"eos": True})
    thread.join(timeout=60)
    assert not thread.is_alive()
    watcher.close()
    pub.close()
    return node


def angle_payload(stamp_us, roll=0.0, yaw=0.0, pitch=0.0):
    return {"roll_deg": roll, "yaw_deg": yaw, "pitch_deg": pitch,
            "stamp_us": stamp_us}


class TestFaceAnglesNode:
    def test_neutral_frame_zero_angles(self, broker):
        frame = render_frame(stamp_us=1000)

        node, angles, _ = run_face_angles(
            broker, lambda pub: pub.publish("landmarks", frame.to_payload(),
                                            stamp_us=1000))
        assert node.frames == 1
        a = angles[0].payload
        assert abs(a["roll_deg"]) < 0.5
        assert abs(a["yaw_deg"]) < 0.5
        assert abs(a["pitch_deg"]) < 0.5

    def test_hundred_frames_hundred_messages(self, broker):
        def publish(pub):
            for k in range(100):
                frame = render_frame(yaw=math.radians(5) * math.sin(k / 20),
                                     stamp_us=k * 33333)
                pub.publish("landmarks", frame.to_payload(), stamp_us=k * 33333)

        node, angles, eye = run_face_angles(broker, publish)
        real = [m for m in angles if "roll_deg" in m.payload]
        assert node.frames == 100
        assert len(real) == 100
        assert len([m for m in eye if "pan_deg" in m.payload]) == 100

    def test_malformed_frame_skipped(self, broker):
        good = render_frame(stamp_us=50)

        def publish(pub):
            pub.publish("landmarks", {"w": 640, "nope": True})
            pub.publish("landmarks", good.to_payload(), stamp_us=50)

        node, angles, _ = run_face_angles(broker, publish)
        assert node.skipped == 1
        assert node.frames == 1
        assert len([m for m in angles if "roll_deg" in m.payload]) == 1


class TestAgileEyeNode:
    def test_constant_zero_settles(self, broker):
        msgs = [angle_payload(k * 33333) for k in range(30)]
        node = run_agile_eye(broker, msgs)
        assert node.report.frames_processed == 30
        assert node.report.frames_held == 0
        final = node.rows[-1]
        assert max(abs(v) for v in final[4:7]) < 0.05  # joints at zero, degrees

    def test_step_converges_to_ikp(self, broker):
        # 10 deg yaw step spread over 150 ms so the guard accepts it
        msgs = [angle_payload(0), angle_payload(150000, yaw=10.0)]
        node = run_agile_eye(broker, msgs)
        assert node.report.frames_held == 0
        target = ikp(matrix_to_euler(compose_head_rotation(math.radians(10), 0.0, 0.0)))
        target_deg = [math.degrees(v) for v in target]
        settle_window = [r for r in node.rows if r[0] >= 0.15 + 1.5]
        assert settle_window, "tail too short to judge settling"
        for row in settle_window:
            assert max(abs(row[4 + i] - target_deg[i]) for i in range(3)) < 0.2

    def test_guard_holds_fast_jump(self, broker):
        msgs = [angle_payload(0),
                angle_payload(33333, yaw=90.0),  # ~47 rad/s jump
                angle_payload(66666, yaw=90.0)]
        node = run_agile_eye(broker, msgs)
        assert node.report.frames_processed == 3
        assert node.report.frames_held >= 1
        # held setpoint: joints stay near zero right after the jump frame
        early = [r for r in node.rows if r[0] < 0.03]
        for row in early:
            assert max(abs(v) for v in row[1:4]) < 1e-9

    def test_counts_consistent(self, broker):
        msgs = [angle_payload(0), angle_payload(20000, yaw=14.0),
                angle_payload(40000, yaw=14.0), angle_payload(600000, yaw=14.0)]
        node = run_agile_eye(broker, msgs)
        r = node.report
        assert r.frames_processed == r.frames_accepted + r.frames_held

    def test_step_velocity_bounded_by_345_peak(self, broker):
        """15 deg step: CSV joint velocities never exceed 1.875 dq/T (+1%)."""
        msgs = [angle_payload(0), angle_payload(250000, yaw=15.0)]
        node = run_agile_eye(broker, msgs)
        assert node.report.frames_held == 0
        target = ikp(matrix_to_euler(
            compose_head_rotation(math.radians(15), 0.0, 0.0)))
        dq_inf = max(abs(v) for v in target)
        duration = max(0.05, dq_inf / math.radians(90))
        peak = 1.875 * math.degrees(dq_inf) / duration
        rows = np.array(node.rows)
        dt = np.diff(rows[:, 0])
        v_set = np.abs(np.diff(rows[:, 1:4], axis=0)) / dt[:, None]
        v_pos = np.abs(np.diff(rows[:, 4:7], axis=0)) / dt[:, None]
        assert v_set.max() <= peak * 1.01
        assert v_pos.max() <= peak * 1.01
        assert v_set.max() >= peak * 0.95  # the profile really shapes the move
        assert abs(node.report.max_joint_velocity_deg_s - v_pos.max()) < 1e-6


class TestReplay:
    def test_batch_replay_counts(self, broker, tmp_path):
        trace = tmp_path / "t.jsonl"
        with open(trace, "w") as fh:
            for k in range(10):
                fh.write(render_frame(stamp_us=k * 1000).to_json_line() + "\n")
        got = []
        sub = BusClient(broker.address, name="sub").connect()
        sub.subscribe("landmarks", got.append, queue=1000)
        pub = BusClient(broker.address, name="replay").connect()
        n = replay(trace, pub, speed=0.0)
        assert n == 10
        deadline = time.time() + 5
        while len(got) < 11 and time.time() < deadline:
            time.sleep(0.01)
        assert len(got) == 11  # 10 frames + eos
        assert got[-1].payload == {"eos": True}
        pub.close()
        sub.close()

    def test_empty_trace(self, broker, tmp_path):
        trace = tmp_path / "empty.jsonl"
        trace.write_text("")
        pub = BusClient(broker.address, name="replay").connect()
        assert replay(trace, pub, speed=0.0) == 0
        pub.close()

    def test_parse_error_line_number(self, broker, tmp_path):
        trace = tmp_path / "bad.jsonl"
        trace.write_text(render_frame(stamp_us=0).to_json_line() + "\nnot json\n")
        pub = BusClient(broker.address, name="replay").connect()
        with pytest.raises(ParseError) as err:
            replay(trace, pub, speed=0.0)
        assert err.value.line == 2
        pub.close()

    def test_realtime_pacing(self, broker, tmp_path):
        trace = tmp_path / "paced.jsonl"
        spacing = 33333
        with open(trace, "w") as fh:
            for k in range(31):
                fh.write(render_frame(stamp_us=k * spacing).to_json_line() + "\n")
        pub = BusClient(broker.address, name="replay").connect()
        t0 = time.perf_counter()
        replay(trace, pub, speed=1.0)
        elapsed = time.perf_counter() - t0
        expected = 30 * spacing * 1e-6
        assert abs(elapsed - expected) < 0.1 * expected + 0.05
        pub.close()


class TestWriteReport:
    def test_zero_frame_run(self, tmp_path):
        out = write_report(tmp_path / "out", RunReport(), [])
        report = json.loads((out / "report.json").read_text())
        assert report["frames_processed"] == 0
        assert report["duration_s"] == 0.0
        csv_lines = (out / "trajectory.csv").read_text().splitlines()
        assert len(csv_lines) == 1  # header only
        assert csv_lines[0].startswith("t_s,set1_deg")

    def test_rows_formatting(self, tmp_path):
        rows = [(0.005, 1, 2, 3, 4, 5, 6, 7, 8, 9.123456789)]
        out = write_report(tmp_path / "out", RunReport(frames_processed=1), rows)
        line = (out / "trajectory.csv").read_text().splitlines()[1]
        assert line.split(",")[0] == "0.005000000"
        assert line.split(",")[-1] == "9.123456789"


class TestConfig:
    def test_defaults_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{}")
        cfg = load_config(path)
        assert cfg.method == "geometry"
        assert cfg.batch is False

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"methd": "geometry"})
        with pytest.raises(ConfigError):
            parse_config({"pid": {"kp": 1, "kq": 2}})

    def test_regression_needs_models(self):
        with pytest.raises(ConfigError):
            parse_config({"method": "regression"})

    def test_degree_conversion(self):
        cfg = parse_config({"workspace_deg": {"roll": 12.0},
                            "speed_guard": {"max_speed_deg_s": 45.0}})
        assert abs(cfg.workspace.max_roll - math.radians(12)) < 1e-12
        assert abs(cfg.workspace.max_pitch - math.radians(15)) < 1e-12
        assert abs(cfg.guard.max_head_speed - math.radians(45)) < 1e-12

    def test_invariant_violations_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"workspace_deg": {"roll": -5.0}})
        with pytest.raises(ConfigError):
            parse_config({"pid": {"kp": -1.0}})
        with pytest.raises(ConfigError):
            parse_config({"servo": {"tau_s": 0.0}})
        with pytest.raises(ConfigError):
            parse_config({"planner": {"v_max_deg_s": 0.0}})
