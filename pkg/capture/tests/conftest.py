import socket
import subprocess
import sys
import time

import pytest

from agile_head_capture.wire import WireClient


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_for_port(port, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.5):
                return
        except OSError:
            time.sleep(0.05)
    raise TimeoutError(f"broker on port {port} never came up")


@pytest.fixture
def primary_broker():
    """The robot-side broker, started through its public CLI."""
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "agile_head", "broker", "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        wait_for_port(port)
        yield f"127.0.0.1:{port}"
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture
def wire_client(primary_broker):
    client = WireClient(primary_broker, name="test").connect()
    yield client
    client.close()
