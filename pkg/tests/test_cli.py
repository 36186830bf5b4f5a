import dataclasses
import json
import math
import subprocess
import sys
import threading
import time

import pytest

from agile_head.bus import Broker, BusClient
from agile_head.config import PipelineConfig
from agile_head.mesh import render_frame
from agile_head.pipeline import AgileEyeNode
from agile_head.regressor import LinearPoseModel, predict, save_dataset


def run_cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "agile_head", *args],
                          capture_output=True, text=True, timeout=120, **kw)


def make_dataset(path, n=40):
    """Rendered frames whose labels scale with the true yaw/pitch (15 deg <-> 10)."""
    records = []
    for k in range(n):
        yaw = -12.0 + 24.0 * k / (n - 1)
        pitch = 12.0 - 24.0 * k / (n - 1)
        frame = render_frame(yaw=math.radians(yaw), pitch=math.radians(pitch),
                             stamp_us=k * 1000)
        records.append((frame, yaw * 10.0 / 15.0, pitch * 10.0 / 15.0))
    save_dataset(path, records)
    return records


class TestTrainCli:
    def test_train_and_predict(self, tmp_path):
        records = make_dataset(tmp_path / "ds")
        out = tmp_path / "horizontal.json"
        result = run_cli("train", "--dataset", str(tmp_path / "ds"),
                         "--axis", "horizontal", "--out", str(out))
        assert result.returncode == 0, result.stderr
        model = LinearPoseModel.load(out)
        assert model.axis == "horizontal"
        # the dataset is exactly linear in pose, so held-out scores track labels
        errs = [abs(predict(model, f) - h) for f, h, _ in records]
        assert sorted(errs)[len(errs) // 2] < 1.0

    def test_train_bad_dataset(self, tmp_path):
        result = run_cli("train", "--dataset", str(tmp_path / "missing"),
                         "--axis", "vertical", "--out", str(tmp_path / "m.json"))
        assert result.returncode != 0


class TestRunCli:
    def test_run_geometry_method(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        with open(trace, "w") as fh:
            for k in range(30):
                frame = render_frame(yaw=math.radians(6.0) * math.sin(k / 8),
                                     stamp_us=k * 33333)
                fh.write(frame.to_json_line() + "\n")
        config = tmp_path / "config.json"
        config.write_text("{}")
        result = run_cli("run", "--trace", str(trace), "--config", str(config),
                         "--out", str(tmp_path / "out"))
        assert result.returncode == 0, result.stderr
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["frames_processed"] == 30
        assert (tmp_path / "out" / "trajectory.csv").exists()

    def test_run_regression_method(self, tmp_path):
        make_dataset(tmp_path / "ds")
        for axis in ("horizontal", "vertical"):
            result = run_cli("train", "--dataset", str(tmp_path / "ds"),
                             "--axis", axis, "--out", str(tmp_path / f"{axis}.json"),
                             "--ridge", "1e-6")
            assert result.returncode == 0, result.stderr
        trace = tmp_path / "trace.jsonl"
        with open(trace, "w") as fh:
            for k in range(20):
                frame = render_frame(yaw=math.radians(9.0) * (k / 19),
                                     stamp_us=k * 100000)  # slow enough for the guard
                fh.write(frame.to_json_line() + "\n")
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "method": "regression",
            "models": {"horizontal": "horizontal.json", "vertical": "vertical.json"},
        }))
        result = run_cli("run", "--trace", str(trace), "--config", str(config),
                         "--out", str(tmp_path / "out"))
        assert result.returncode == 0, result.stderr
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["frames_processed"] == 20
        # the robot ends up near the final commanded yaw of ~9 deg
        last = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()[-1]
        yaw_deg = float(last.split(",")[9])
        assert abs(yaw_deg - 9.0) < 1.5

    def test_bad_config_nonzero_exit(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text('{"unknown_key": 1}')
        result = run_cli("agile-eye", "--config", str(config))
        assert result.returncode != 0


class TestBrokerLoss:
    def test_face_angles_exits_nonzero(self, tmp_path):
        broker = Broker("127.0.0.1", 0).start()
        config = tmp_path / "config.json"
        config.write_text(json.dumps(
            {"broker": f"127.0.0.1:{broker.port}"}))
        proc = subprocess.Popen(
            [sys.executable, "-m", "agile_head", "face-angles",
             "--config", str(config)],
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        try:
            ready = []
            watcher = BusClient(broker.address, name="watch").connect()
            watcher.subscribe("node_ready", ready.append)
            deadline = time.time() + 15
            while not ready and time.time() < deadline:
                time.sleep(0.05)
            assert ready, "node never came up"
            watcher.close()
            broker.stop()
            assert proc.wait(timeout=15) != 0
        finally:
            if proc.poll() is None:
                proc.terminate()
                proc.wait(timeout=10)


class TestLiveMode:
    def test_live_node_runs_on_wall_clock(self):
        broker = Broker("127.0.0.1", 0).start()
        try:
            cfg = dataclasses.replace(PipelineConfig(), broker=broker.address,
                                      batch=False, settle_tail_s=0.1)
            node = AgileEyeNode(cfg)
            thread = threading.Thread(target=node.run)
            thread.start()
            time.sleep(0.3)
            pub = BusClient(broker.address, name="pub").connect()
            t0 = time.monotonic()
            for k in range(10):
                pub.publish("angles", {"roll_deg": 0.0, "yaw_deg": 2.0 * k / 9,
                                       "pitch_deg": 0.0, "stamp_us": k * 40000},
                            stamp_us=k * 40000)
                time.sleep(0.04)
            pub.publish("angles", {"eos": True})
            thread.join(timeout=10)
            wall = time.monotonic() - t0
            assert not thread.is_alive()
            pub.close()
            assert node.report.frames_processed == 10
            # ticks ride the wall clock: roughly wall/dt rows, not stamp-driven
            assert node.report.duration_s == pytest.approx(wall, abs=0.5)
            assert len(node.rows) > 30
        finally:
            broker.stop()
