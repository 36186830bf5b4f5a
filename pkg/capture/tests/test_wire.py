import time

from agile_head_capture.wire import WireClient, decode_body, encode


class TestCodec:
    def test_canonical_frame_bytes(self):
        frame = encode("angles", 1, 0, {})
        body = b'{"topic":"angles","seq":1,"stamp_us":0,"payload":{}}'
        assert frame == len(body).to_bytes(4, "big") + body

    def test_roundtrip(self):
        payload = {"roll_deg": -3.25, "yaw_deg": 7.0, "pitch_deg": 0.5,
                   "stamp_us": 123}
        m = decode_body(encode("angles", 9, 123, payload)[4:])
        assert m.topic == "angles" and m.seq == 9 and m.payload == payload


class TestInterop:
    """The capture client against the robot-side broker, CLI-started."""

    def test_pub_sub_roundtrip(self, primary_broker):
        sub = WireClient(primary_broker, name="sub").connect()
        box = sub.subscribe("landmarks", queue=64)
        pub = WireClient(primary_broker, name="pub").connect()
        for i in range(20):
            pub.publish("landmarks", {"i": i}, stamp_us=i)
        got = []
        deadline = time.time() + 5
        while len(got) < 20 and time.time() < deadline:
            m = box.pop(timeout=0.2)
            if m is not None:
                got.append(m)
        assert [m.payload["i"] for m in got] == list(range(20))
        assert [m.seq for m in got] == list(range(1, 21))
        pub.close()
        sub.close()

    def test_latest_discards_stale(self, primary_broker):
        sub = WireClient(primary_broker, name="sub").connect()
        box = sub.subscribe("angles", queue=8)
        pub = WireClient(primary_broker, name="pub").connect()
        for i in range(8):
            pub.publish("angles", {"i": i})
        time.sleep(0.3)
        newest = box.latest()
        assert newest is not None and newest.payload["i"] == 7
        assert box.latest() is None  # drained
        pub.close()
        sub.close()
