"""Minimal topic-based publish/subscribe middleware over TCP.

One broker, many node clients. Wire format: a 4-byte big-endian payload
length, then that many bytes of minified UTF-8 JSON with the fixed key
order topic, seq, stamp_us, payload. The broker forwards the original
frame bytes untouched, so delivered payloads are byte-identical to what
was published.

Subscription management rides the same framing on the reserved ``sys/``
topic prefix (never routed): ``sys/sub`` and ``sys/unsub`` carry
``{"topic": t, "queue": n}`` and are acknowledged on ``sys/ack``.

Buffering is bounded everywhere with a latest-wins policy (drop oldest):
the controller must act on fresh angles, not a backlog.
"""
import json
import os
import socket
import struct
import threading
from collections import deque
from typing import NamedTuple

from .errors import BindError, Disconnected, MalformedFrame, TopicInvalid

DEFAULT_PORT = 7447
DEFAULT_QUEUE = 16
BROKER_QUEUE = 1024
MAX_FRAME = 16 * 1024 * 1024
_TOPIC_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789_/")
SYS_PREFIX = "sys/"
BROKER_ENV = "AGILE_HEAD_BROKER"


class BusMessage(NamedTuple):
    topic: str
    seq: int
    stamp_us: int
    payload: object


def validate_topic(topic: str) -> str:
    if not isinstance(topic, str) or not topic:
        raise TopicInvalid("topic must be a non-empty string")
    if len(topic.encode()) > 64:
        raise TopicInvalid(f"topic longer than 64 bytes: {topic!r}")
    if not set(topic) <= _TOPIC_CHARS:
        raise TopicInvalid(f"topic charset must be [a-z0-9_/]: {topic!r}")
    return topic


def encode(message: BusMessage) -> bytes:
    """Frame a message: length prefix + canonical minified JSON."""
    validate_topic(message.topic)
    body = json.dumps(
        {"topic": message.topic, "seq": int(message.seq),
         "stamp_us": int(message.stamp_us), "payload": message.payload},
        separators=(",", ":")).encode()
    return struct.pack(">I", len(body)) + body


def decode(data: bytes) -> BusMessage:
    """Parse one complete frame; raises MalformedFrame on anything short or broken."""
    if len(data) < 4:
        raise MalformedFrame("frame shorter than the length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if length > MAX_FRAME:
        raise MalformedFrame(f"declared length {length} exceeds limit")
    if len(data) - 4 < length:
        raise MalformedFrame(f"incomplete frame: declared {length}, got {len(data) - 4}")
    return _parse_body(data[4:4 + length])


def _parse_body(body: bytes) -> BusMessage:
    try:
        obj = json.loads(body.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"frame body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedFrame("frame body must be a JSON object")
    try:
        topic, seq, stamp = obj["topic"], obj["seq"], obj["stamp_us"]
        payload = obj["payload"]
    except KeyError as exc:
        raise MalformedFrame(f"frame missing field {exc}") from exc
    if not isinstance(seq, int) or not isinstance(stamp, int):
        raise MalformedFrame("seq and stamp_us must be integers")
    validate_topic(topic)
    return BusMessage(topic=topic, seq=seq, stamp_us=stamp, payload=payload)


def parse_address(text: str, default_port: int = DEFAULT_PORT):
    host, _, port = text.partition(":")
    return (host or "127.0.0.1", int(port) if port else default_port)


def broker_address_from_env(default=("127.0.0.1", DEFAULT_PORT)):
    text = os.environ.get(BROKER_ENV)
    return parse_address(text) if text else default


def read_frame(stream):
    """Read one frame from a buffered binary stream; None on clean EOF."""
    header = stream.read(4)
    if not header:
        return None
    if len(header) < 4:
        raise MalformedFrame("connection closed inside the length prefix")
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise MalformedFrame(f"declared length {length} exceeds limit")
    body = stream.read(length) if length else b""
    if len(body) < length:
        raise MalformedFrame("connection closed inside the frame body")
    return header + body


class LatestWinsQueue:
    """Bounded FIFO that drops its oldest entry on overflow."""

    def __init__(self, capacity: int = DEFAULT_QUEUE):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._items = deque()
        self._capacity = capacity
        self._cond = threading.Condition()
        self._closed = False
        self.dropped = 0

    def raise_capacity(self, capacity: int):
        with self._cond:
            self._capacity = max(self._capacity, capacity)

    def push(self, item):
        with self._cond:
            if self._closed:
                return
            if len(self._items) >= self._capacity:
                self._items.popleft()
                self.dropped += 1
            self._items.append(item)
            self._cond.notify()

    def pop(self, timeout=None):
        """Oldest item, blocking; None once closed and drained."""
        with self._cond:
            while not self._items:
                if self._closed:
                    return None
                if not self._cond.wait(timeout=timeout):
                    return None
            return self._items.popleft()

    def close(self):
        with self._cond:
            self._closed = True
            self._cond.notify_all()


class _BrokerConnection:
    def __init__(self, broker, sock, peer):
        self.broker = broker
        self.sock = sock
        self.rfile = sock.makefile("rb")
        self.peer = peer
        self.outbound = LatestWinsQueue(BROKER_QUEUE)
        self.topics = set()
        self.alive = True

    def send(self, frame: bytes):
        self.outbound.push(frame)

    def close(self):
        if not self.alive:
            return
        self.alive = False
        self.outbound.close()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.rfile.close()
        except OSError:
            pass
        self.sock.close()


class Broker:
    """Routes every published frame to the current subscribers of its topic."""

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.host = host
        self.port = port
        self._listener = None
        self._conns = set()
        self._subs = {}  # topic -> set of connections
        self._lock = threading.Lock()
        self._threads = []
        self._stopping = False

    def start(self) -> "Broker":
        try:
            listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            listener.bind((self.host, self.port))
            listener.listen()
        except OSError as exc:
            raise BindError(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        if self.port == 0:
            self.port = listener.getsockname()[1]
        listener.settimeout(0.25)  # close() does not wake a blocked accept()
        self._listener = listener
        t = threading.Thread(target=self._accept_loop, name="broker-accept", daemon=True)
        t.start()
        self._threads.append(t)
        return self

    @property
    def address(self):
        return (self.host, self.port)

    def _accept_loop(self):
        while not self._stopping:
            try:
                sock, peer = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            conn = _BrokerConnection(self, sock, peer)
            with self._lock:
                self._conns.add(conn)
            for target, name in ((self._reader_loop, "rd"), (self._writer_loop, "wr")):
                t = threading.Thread(target=target, args=(conn,),
                                     name=f"broker-{name}-{peer}", daemon=True)
                t.start()
                self._threads.append(t)

    def _reader_loop(self, conn):
        try:
            while conn.alive:
                frame = read_frame(conn.rfile)
                if frame is None:
                    break
                message = decode(frame)
                if message.topic.startswith(SYS_PREFIX):
                    self._handle_control(conn, message)
                else:
                    self._route(message.topic, frame)
        except (MalformedFrame, TopicInvalid, OSError):
            pass  # protocol errors close only this connection
        finally:
            self._drop(conn)

    def _writer_loop(self, conn):
        try:
            while True:
                frame = conn.outbound.pop()
                if frame is None:
                    return
                conn.sock.sendall(frame)
        except OSError:
            self._drop(conn)

    def _handle_control(self, conn, message):
        payload = message.payload if isinstance(message.payload, dict) else {}
        topic = validate_topic(payload.get("topic", ""))
        if message.topic == "sys/sub":
            queue = payload.get("queue")
            if isinstance(queue, int) and queue > 0:
                conn.outbound.raise_capacity(queue)
            with self._lock:
                self._subs.setdefault(topic, set()).add(conn)
                conn.topics.add(topic)
        elif message.topic == "sys/unsub":
            with self._lock:
                self._subs.get(topic, set()).discard(conn)
                conn.topics.discard(topic)
        else:
            raise MalformedFrame(f"unknown control topic {message.topic!r}")
        conn.send(encode(BusMessage("sys/ack", 0, message.stamp_us,
                                    {"topic": topic, "op": message.topic})))

    def _route(self, topic, frame):
        with self._lock:
            targets = list(self._subs.get(topic, ()))
        for conn in targets:
            conn.send(frame)

    def _drop(self, conn):
        with self._lock:
            self._conns.discard(conn)
            for subs in self._subs.values():
                subs.discard(conn)
        conn.close()

    def stop(self):
        self._stopping = True
        if self._listener is not None:
            self._listener.close()
        with self._lock:
            conns = list(self._conns)
        for conn in conns:
            conn.close()
        for t in self._threads:
            t.join(timeout=2.0)


class _Subscription:
    """Handler mode runs a dispatcher thread; with handler=None the caller
    pops ``queue`` itself (pull mode)."""

    def __init__(self, client, topic, handler, capacity):
        self.topic = topic
        self.handler = handler
        self.queue = LatestWinsQueue(capacity)
        self.thread = None
        if handler is not None:
            self.thread = threading.Thread(target=self._dispatch_loop,
                                           name=f"sub-{topic}", daemon=True)
            self.thread.start()

    def _dispatch_loop(self):
        while True:
            message = self.queue.pop()
            if message is None:
                return
            try:
                self.handler(message)
            except Exception:
                pass  # a broken handler must not kill delivery

    def close(self):
        self.queue.close()


class BusClient:
    """One node's connection to the broker.

    publish() assigns per-topic sequence numbers automatically;
    subscribe() runs the handler on its own dispatcher thread, one
    message at a time, behind a bounded latest-wins queue.
    """

    def __init__(self, address=None, name: str = "node"):
        self.address = address or broker_address_from_env()
        self.name = name
        self._sock = None
        self._rfile = None
        self._seq = {}
        self._subs = {}
        self._send_lock = threading.Lock()
        self._seq_lock = threading.Lock()
        self._ack = threading.Condition()
        self._acked = set()
        self._reader = None
        self._closed = False

    def connect(self) -> "BusClient":
        sock = socket.create_connection(self.address, timeout=10.0)
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._rfile = sock.makefile("rb")
        self._reader = threading.Thread(target=self._reader_loop,
                                        name=f"client-{self.name}", daemon=True)
        self._reader.start()
        return self

    @property
    def connected(self):
        return self._sock is not None and not self._closed

    def advertise(self, topic: str):
        """Register a publisher-side sequence counter for a topic."""
        validate_topic(topic)
        with self._seq_lock:
            self._seq.setdefault(topic, 0)

    def publish(self, topic: str, payload, stamp_us: int = 0) -> BusMessage:
        if not self.connected:
            raise Disconnected("client is not connected")
        validate_topic(topic)
        with self._seq_lock:
            seq = self._seq.get(topic, 0) + 1
            self._seq[topic] = seq
        message = BusMessage(topic=topic, seq=seq, stamp_us=stamp_us, payload=payload)
        self._send(encode(message))
        return message

    def subscribe(self, topic: str, handler=None, queue: int = DEFAULT_QUEUE,
                  timeout: float = 5.0):
        if not self.connected:
            raise Disconnected("client is not connected")
        validate_topic(topic)
        sub = _Subscription(self, topic, handler, queue)
        self._subs.setdefault(topic, []).append(sub)
        self._control("sys/sub", topic, queue=queue, timeout=timeout)
        return sub

    def unsubscribe(self, topic: str, timeout: float = 5.0):
        for sub in self._subs.pop(topic, []):
            sub.close()
        self._control("sys/unsub", topic, timeout=timeout)

    def _control(self, op, topic, queue=None, timeout=5.0):
        payload = {"topic": topic}
        if queue is not None:
            payload["queue"] = int(queue)
        key = (op, topic)
        with self._ack:
            self._acked.discard(key)
        self._send(encode(BusMessage(op, 0, 0, payload)))
        with self._ack:
            if not self._ack.wait_for(lambda: key in self._acked or self._closed,
                                      timeout=timeout):
                raise Disconnected(f"no broker ack for {op} {topic!r}")

    def _send(self, frame: bytes):
        try:
            with self._send_lock:
                self._sock.sendall(frame)
        except OSError as exc:
            self._teardown()
            raise Disconnected(f"send failed: {exc}") from exc

    def _reader_loop(self):
        try:
            while True:
                frame = read_frame(self._rfile)
                if frame is None:
                    break
                message = decode(frame)
                if message.topic == "sys/ack":
                    with self._ack:
                        self._acked.add((message.payload.get("op"),
                                         message.payload.get("topic")))
                        self._ack.notify_all()
                    continue
                for sub in self._subs.get(message.topic, ()):
                    sub.queue.push(message)
        except (MalformedFrame, OSError):
            pass
        finally:
            self._teardown()

    def _teardown(self):
        if self._closed:
            return
        self._closed = True
        for subs in self._subs.values():
            for sub in subs:
                sub.close()
        with self._ack:
            self._ack.notify_all()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            if self._rfile is not None:
                try:
                    self._rfile.close()
                except OSError:
                    pass
            self._sock.close()

    def close(self):
        self._teardown()
        if self._reader is not None and self._reader is not threading.current_thread():
            self._reader.join(timeout=2.0)
