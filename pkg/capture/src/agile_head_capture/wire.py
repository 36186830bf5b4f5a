"""Client side of the broker's wire protocol, implemented from its spec.

Frame: 4-byte big-endian payload length, then minified UTF-8 JSON with
key order topic, seq, stamp_us, payload. Subscriptions are negotiated on
the reserved ``sys/sub`` / ``sys/unsub`` topics and acknowledged on
``sys/ack``. This module deliberately shares no code with the robot
side: the bytes on the socket are the contract.
"""
import json
import socket
import struct
import threading
from collections import deque
from typing import NamedTuple

DEFAULT_PORT = 7447


class WireError(Exception):
    pass


class Message(NamedTuple):
    topic: str
    seq: int
    stamp_us: int
    payload: object


def encode(topic: str, seq: int, stamp_us: int, payload) -> bytes:
    body = json.dumps({"topic": topic, "seq": int(seq), "stamp_us": int(stamp_us),
                       "payload": payload}, separators=(",", ":")).encode()
    return struct.pack(">I", len(body)) + body


def decode_body(body: bytes) -> Message:
    obj = json.loads(body.decode())
    return Message(topic=obj["topic"], seq=obj["seq"], stamp_us=obj["stamp_us"],
                   payload=obj["payload"])


def parse_address(text: str):
    host, _, port = text.partition(":")
    return (host or "127.0.0.1", int(port) if port else DEFAULT_PORT)


class _Box:
    """Bounded drop-oldest mailbox for one subscription."""

    def __init__(self, capacity):
        self.items = deque(maxlen=max(1, capacity))
        self.cond = threading.Condition()

    def push(self, item):
        with self.cond:
            self.items.append(item)  # deque maxlen drops the oldest
            self.cond.notify()

    def pop(self, timeout=None):
        with self.cond:
            if not self.items and timeout != 0:
                self.cond.wait(timeout=timeout)
            return self.items.popleft() if self.items else None

    def latest(self):
        """Newest item, discarding anything staler; None if empty."""
        with self.cond:
            item = self.items.pop() if self.items else None
            self.items.clear()
            return item


class WireClient:
    def __init__(self, address, name="capture"):
        self.address = parse_address(address) if isinstance(address, str) else address
        self.name = name
        self._sock = None
        self._rfile = None
        self._seq = {}
        self._boxes = {}
        self._lock = threading.Lock()
        self._acks = set()
        self._ack_cond = threading.Condition()
        self._closed = False

    def connect(self, timeout=10.0):
        sock = socket.create_connection(self.address, timeout=timeout)
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._rfile = sock.makefile("rb")
        threading.Thread(target=self._read_loop, name=f"wire-{self.name}",
                         daemon=True).start()
        return self

    @property
    def connected(self):
        return self._sock is not None and not self._closed

    def publish(self, topic: str, payload, stamp_us: int = 0):
        with self._lock:
            seq = self._seq.get(topic, 0) + 1
            self._seq[topic] = seq
            frame = encode(topic, seq, stamp_us, payload)
            try:
                self._sock.sendall(frame)
            except OSError as exc:
                self._teardown()
                raise WireError(f"send failed: {exc}") from exc
        return seq

    def subscribe(self, topic: str, queue: int = 16, timeout: float = 5.0) -> _Box:
        box = _Box(queue)
        self._boxes.setdefault(topic, []).append(box)
        key = ("sys/sub", topic)
        with self._ack_cond:
            self._acks.discard(key)
        self.publish("sys/sub", {"topic": topic, "queue": queue})
        with self._ack_cond:
            if not self._ack_cond.wait_for(lambda: key in self._acks or self._closed,
                                           timeout=timeout):
                raise WireError(f"no broker ack for subscribe {topic!r}")
        return box

    def _read_loop(self):
        try:
            while True:
                header = self._rfile.read(4)
                if len(header) < 4:
                    break
                (length,) = struct.unpack(">I", header)
                body = self._rfile.read(length)
                if len(body) < length:
                    break
                message = decode_body(body)
                if message.topic == "sys/ack":
                    with self._ack_cond:
                        self._acks.add((message.payload.get("op"),
                                        message.payload.get("topic")))
                        self._ack_cond.notify_all()
                    continue
                for box in self._boxes.get(message.topic, ()):
                    box.push(message)
        except (OSError, ValueError, KeyError):
            pass
        finally:
            self._teardown()

    def _teardown(self):
        if self._closed:
            return
        self._closed = True
        with self._ack_cond:
            self._ack_cond.notify_all()
        for boxes in self._boxes.values():
            for box in boxes:
                with box.cond:
                    box.cond.notify_all()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()

    def close(self):
        self._teardown()
