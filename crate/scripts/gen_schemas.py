"""Writes the JSON Schemas under schemas/. Run from the repository root."""

import json
from pathlib import Path

DRAFT = "https://json-schema.org/draft/2020-12/schema"
BASE = "https://xrk.invalid/schemas/"

num = {"type": "number"}
vec3 = {"type": "array", "items": num, "minItems": 3, "maxItems": 3}
vec2 = {"type": "array", "items": num, "minItems": 2, "maxItems": 2}
quat = {"type": "array", "items": num, "minItems": 4, "maxItems": 4}
pose = {
    "type": "object",
    "additionalProperties": False,
    "required": ["p", "q"],
    "properties": {"p": vec3, "q": quat},
}


def obj(required, properties, extra=False):
    return {
        "type": "object",
        "additionalProperties": extra,
        "required": required,
        "properties": properties,
    }


def version(n=1):
    return {"const": n}


grammar = obj(
    ["pinch", "swipe"],
    {
        "pinch": obj(
            ["enter", "exit", "longHold"],
            {"enter": num, "exit": num, "longHold": num},
        ),
        "swipe": obj(
            ["window", "minDisp", "dominance"],
            {"window": num, "minDisp": num, "dominance": num},
        ),
    },
)

trace_frame = obj(
    ["frameIndex", "head"],
    {
        "frameIndex": {"type": "integer", "minimum": 0},
        "head": {"$ref": "#/$defs/pose"},
        "hands": obj(
            [],
            {
                "left": {"$ref": "#/$defs/hand"},
                "right": {"$ref": "#/$defs/hand"},
            },
        ),
        "gaze": obj(["origin", "direction"], {"origin": vec3, "direction": vec3}),
        "gazeValid": {"type": "boolean"},
        "injectedIntents": {
            "type": "array",
            "items": obj(
                ["kind", "text"],
                {"kind": {"const": "voiceCommand"}, "text": {"type": "string"}},
            ),
        },
        "spawns": {"type": "array", "items": {"$ref": "#/$defs/spawn"}},
    },
)
hand = {
    "oneOf": [
        obj(["joints"], {"joints": {"type": "array", "items": vec3, "minItems": 21, "maxItems": 21}}),
        obj(["wrist", "thumbTip", "indexTip"], {"wrist": vec3, "thumbTip": vec3, "indexTip": vec3}),
    ]
}
spawn = obj(["position", "velocity"], {"position": vec3, "velocity": vec3})

trace = {
    "title": "Input trace",
    "description": "Recorded per-frame inputs. Frame indices start at 0 and increase by 1.",
    **obj(
        ["version", "frames"],
        {
            "version": version(),
            "grammar": {"$ref": "#/$defs/grammar"},
            "frames": {"type": "array", "items": {"$ref": "#/$defs/frame"}},
        },
    ),
    "$defs": {"pose": pose, "grammar": grammar, "frame": trace_frame, "hand": hand, "spawn": spawn},
}

primitive = {
    "oneOf": [
        obj(["type", "pose", "extents"], {"type": {"const": "plane"}, "pose": pose, "extents": vec2}),
        obj(["type", "center", "radius"], {"type": {"const": "sphere"}, "center": vec3, "radius": num}),
        obj(["type", "pose", "halfExtents"], {"type": {"const": "box"}, "pose": pose, "halfExtents": vec3}),
    ]
}
intrinsics = obj(["fx", "fy", "cx", "cy"], {k: num for k in ["fx", "fy", "cx", "cy"]})
scene = {
    "title": "Scene description",
    **obj(
        ["version"],
        {
            "version": version(),
            "objects": {
                "type": "array",
                "items": obj(
                    ["id", "label", "kind", "pose", "halfExtents"],
                    {
                        "id": {"type": "string", "minLength": 1},
                        "label": {"type": "string"},
                        "kind": {"enum": ["physical", "virtual"]},
                        "pose": pose,
                        "halfExtents": vec3,
                    },
                ),
            },
            "planes": {"type": "array", "items": obj(["pose", "extents"], {"pose": pose, "extents": vec2})},
            "lighting": obj([], {"ambient": num, "direction": vec3}),
            "depthScene": obj(
                ["primitives"],
                {
                    "primitives": {"type": "array", "items": primitive},
                    "camera": obj(
                        ["width", "height", "intrinsics", "pose"],
                        {
                            "width": {"type": "integer", "minimum": 1},
                            "height": {"type": "integer", "minimum": 1},
                            "intrinsics": intrinsics,
                            "pose": pose,
                        },
                    ),
                },
            ),
            "physics": obj(
                [],
                {
                    "gravity": vec3,
                    "dt": num,
                    "maxSpheres": {"type": "integer", "minimum": 0},
                    "damping": num,
                    "substeps": {"type": "integer", "minimum": 1},
                    "radius": num,
                    "restitution": num,
                },
            ),
            "perception": obj([], {"stepMeters": num, "surfaceEpsilon": num, "occlusionEpsilon": num}),
        },
    ),
}

mock = {
    "title": "Mock model script",
    "description": "Canned replies for the deterministic model backend. First matching rule wins.",
    **obj(
        ["version"],
        {
            "version": version(),
            "strict": {"type": "boolean"},
            "rules": {
                "type": "array",
                "items": obj(
                    ["match", "response"],
                    {
                        "match": obj(["substring"], {"substring": {"type": "string"}}),
                        "response": obj(["text"], {"text": {"type": "string"}}),
                        "delayFrames": {"type": "integer", "minimum": 0},
                    },
                ),
            },
        },
    ),
}

options = {
    "title": "Run options",
    **obj(
        ["version"],
        {
            "version": version(),
            "maxFrames": {"type": ["integer", "null"], "minimum": 0},
            "mock": {"$ref": "mock-script.v1.schema.json"},
            "persona": {"type": ["string", "null"]},
        },
    ),
}

categories = ["explicit", "intent", "ai", "physics", "script", "ui"]
log_entry = obj(
    ["frame", "category", "payload"],
    {"frame": {"type": "integer", "minimum": 0}, "category": {"enum": categories}, "payload": {}},
)
log = {
    "title": "Event log",
    "description": "Entries in nondecreasing frame order. hash is the lowercase hex SHA-256 log digest.",
    **obj(
        ["version", "entries"],
        {
            "version": version(),
            "hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
            "entries": {"type": "array", "items": {"$ref": "#/$defs/entry"}},
        },
    ),
    "$defs": {"entry": log_entry},
}

occlusion = {"enum": ["visible", "occluded", "unknown"]}
entity = {
    "node": obj(
        ["id", "kind", "pose", "visible", "halfExtents"],
        {
            "id": {"type": "string"},
            "kind": {"enum": ["panel", "textView", "button", "model3d"]},
            "pose": pose,
            "text": {"type": "string"},
            "visible": {"type": "boolean"},
            "halfExtents": vec3,
            "entity": {"const": "node"},
        },
    ),
    "object": obj(
        ["id", "label", "kind", "pose", "halfExtents", "occlusion"],
        {
            "id": {"type": "string"},
            "label": {"type": "string"},
            "kind": {"enum": ["physical", "virtual"]},
            "pose": pose,
            "halfExtents": vec3,
            "occlusion": occlusion,
            "entity": {"const": "object"},
        },
    ),
    "sphere": obj(
        ["id", "position", "velocity", "radius", "occlusion"],
        {
            "id": {"type": "string"},
            "position": vec3,
            "velocity": vec3,
            "radius": num,
            "occlusion": occlusion,
            "entity": {"const": "sphere"},
        },
    ),
}
snapshot = obj(
    ["frame", "nodes", "objects", "spheres"],
    {
        "frame": {"type": "integer", "minimum": 0},
        "nodes": {"type": "array", "items": {"$ref": "#/$defs/node"}},
        "objects": {"type": "array", "items": {"$ref": "#/$defs/object"}},
        "spheres": {"type": "array", "items": {"$ref": "#/$defs/sphere"}},
    },
)
any_entity = {"oneOf": [{"$ref": "#/$defs/node"}, {"$ref": "#/$defs/object"}, {"$ref": "#/$defs/sphere"}]}
diff = obj(
    ["added", "removed", "changed"],
    {
        "added": {"type": "array", "items": any_entity},
        "removed": {"type": "array", "items": {"type": "string", "pattern": "^(node|object|sphere):"}},
        "changed": {"type": "array", "items": any_entity},
    },
)
hex64 = {"type": "string", "pattern": "^[0-9a-f]{64}$"}
payloads = {
    "hello": obj(["version"], {"version": {"type": "string", "pattern": "^[0-9]+\\.[0-9]+$"}}),
    "helloAck": {
        "oneOf": [
            obj(
                ["ok", "version", "script", "frameDuration", "state"],
                {
                    "ok": {"const": True},
                    "version": {"type": "string"},
                    "script": {"type": "string"},
                    "frameDuration": obj(
                        ["num", "den"],
                        {"num": {"type": "integer"}, "den": {"type": "integer"}},
                    ),
                    "state": {"$ref": "#/$defs/snapshot"},
                },
            ),
            obj(
                ["ok", "error", "version"],
                {
                    "ok": {"const": False},
                    "error": {"enum": ["busy", "unsupported"]},
                    "version": {"type": "string"},
                },
            ),
        ]
    },
    "input": {"$ref": "trace.v1.schema.json#/$defs/frame"},
    "spawnRequest": {"$ref": "trace.v1.schema.json#/$defs/spawn"},
    "stateUpdate": {
        **obj(
            ["frame", "halted", "eventCount"],
            {
                "frame": {"type": "integer", "minimum": 0},
                "halted": {"type": "boolean"},
                "eventCount": {"type": "integer", "minimum": 0},
                "full": {"$ref": "#/$defs/snapshot"},
                "diff": {"$ref": "#/$defs/diff"},
            },
        ),
        "oneOf": [{"required": ["full"]}, {"required": ["diff"]}],
    },
    "event": {
        "oneOf": [
            {"$ref": "event-log.v1.schema.json#/$defs/entry"},
            obj(["kind", "message"], {"kind": {"const": "protocol-error"}, "message": {"type": "string"}}),
        ]
    },
    "bye": {
        "anyOf": [
            obj([], {}),
            obj(
                ["frames", "tracePath", "traceHash", "logHash"],
                {
                    "frames": {"type": "integer", "minimum": 0},
                    "tracePath": {"type": ["string", "null"]},
                    "traceHash": hex64,
                    "logHash": hex64,
                },
            ),
        ]
    },
}
bridge = {
    "title": "Simulator bridge message",
    "description": (
        "One message per frame: u32 big-endian byte length, then this JSON document. "
        "seq starts at 0 and increases by 1 in each direction. Over WebSocket (path /session) "
        "the same framed bytes travel in binary frames."
    ),
    **obj(
        ["type", "seq"],
        {
            "type": {"enum": list(payloads)},
            "seq": {"type": "integer", "minimum": 0},
            "payload": {},
        },
    ),
    "allOf": [
        {
            "if": {"properties": {"type": {"const": kind}}},
            "then": {"properties": {"payload": {"$ref": f"#/$defs/payload/{kind}"}}},
        }
        for kind in payloads
    ],
    "$defs": {"payload": payloads, "snapshot": snapshot, "diff": diff, **entity},
}

config = {
    "title": "CLI defaults file (XRK_CONFIG)",
    **obj(
        [],
        {
            "version": version(),
            "scene": {"type": "string"},
            "script": {"type": "string"},
            "options": {"type": "string"},
            "out": {"type": "string"},
            "listen": {"type": "integer", "minimum": 0, "maximum": 65535},
            "host": {"type": "string"},
        },
    ),
}

files = {
    "trace.v1.schema.json": trace,
    "scene.v1.schema.json": scene,
    "mock-script.v1.schema.json": mock,
    "run-options.v1.schema.json": options,
    "event-log.v1.schema.json": log,
    "bridge-protocol.v1.schema.json": bridge,
    "cli-config.v1.schema.json": config,
}

out = Path("schemas")
out.mkdir(exist_ok=True)
for name, body in files.items():
    doc = {"$schema": DRAFT, "$id": BASE + name, **body}
    (out / name).write_text(json.dumps(doc, indent=2) + "\n")
