"""Validates fixtures, a fresh event log, and a live bridge session against schemas/.

Usage: python3 scripts/check_schemas.py path/to/xrk
"""

import json
import socket
import struct
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

ROOT = Path(__file__).resolve().parent.parent
SCHEMAS = {p.name: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.json")}
REGISTRY = Registry().with_resources(
    (s["$id"], Resource.from_contents(s)) for s in SCHEMAS.values()
)


def validate(schema_name, doc, what):
    v = Draft202012Validator(SCHEMAS[schema_name], registry=REGISTRY)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        raise SystemExit(f"{what}: {errors[0].message} at {list(errors[0].path)}")


def fixture(name):
    return json.loads((ROOT / "fixtures" / name).read_text())


def check_files(xrk):
    for name in ["ballpit.trace.json", "poem_on_pinch.trace.json", "long_pinch_labels.trace.json"]:
        validate("trace.v1.schema.json", fixture(name), name)
    validate("scene.v1.schema.json", fixture("room.scene.json"), "room.scene.json")
    validate("run-options.v1.schema.json", fixture("mock.options.json"), "mock.options.json")
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "log.json"
        subprocess.run(
            [xrk, "run", "--scene", ROOT / "fixtures/room.scene.json", "--script", "poem-on-pinch",
             "--trace", ROOT / "fixtures/poem_on_pinch.trace.json",
             "--options", ROOT / "fixtures/mock.options.json", "--out", out],
            check=True, capture_output=True,
        )
        validate("event-log.v1.schema.json", json.loads(out.read_text()), "event log")


class Conn:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=30)
        self.seq = 0

    def send(self, kind, payload):
        msg = {"type": kind, "seq": self.seq, "payload": payload}
        self.seq += 1
        validate("bridge-protocol.v1.schema.json", msg, f"client {kind}")
        body = json.dumps(msg).encode()
        self.sock.sendall(struct.pack(">I", len(body)) + body)

    def recv(self):
        header = self.read(4)
        msg = json.loads(self.read(struct.unpack(">I", header)[0]))
        validate("bridge-protocol.v1.schema.json", msg, f"server {msg.get('type')}")
        return msg

    def read(self, n):
        buf = b""
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise SystemExit("connection closed early")
            buf += chunk
        return buf


def check_bridge(xrk):
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    with tempfile.TemporaryDirectory() as tmp:
        server = subprocess.Popen(
            [xrk, "record", "--listen", str(port), "--scene", ROOT / "fixtures/room.scene.json",
             "--script", "ballpit", "--options", ROOT / "fixtures/mock.options.json",
             "--out", Path(tmp) / "live.trace.json"],
            stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
        )
        for _ in range(200):
            try:
                conn = Conn(port)
                break
            except OSError:
                time.sleep(0.025)
        else:
            raise SystemExit("record server did not come up")
        conn.send("hello", {"version": "1.0"})
        assert conn.recv()["payload"]["ok"] is True
        seen = set()
        for i, frame in enumerate(fixture("ballpit.trace.json")["frames"][:60]):
            if i == 10:
                conn.send("spawnRequest", {"position": [0.0, 1.5, -1.0], "velocity": [0.0, 0.0, 0.0]})
            conn.send("input", frame)
            update = conn.recv()
            seen.add(update["type"])
            for _ in range(update["payload"]["eventCount"]):
                seen.add(conn.recv()["type"])
        conn.send("bye", {})
        bye = conn.recv()
        assert bye["type"] == "bye", bye
        server.wait(timeout=30)
        assert seen == {"stateUpdate", "event"}, seen
        validate("trace.v1.schema.json", json.loads((Path(tmp) / "live.trace.json").read_text()), "recorded trace")


def main():
    xrk = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "target/debug/xrk")
    check_files(xrk)
    check_bridge(xrk)
    print(f"schemas ok ({len(SCHEMAS)} files)")


if __name__ == "__main__":
    main()
