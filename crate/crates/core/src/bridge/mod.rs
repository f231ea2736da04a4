//! Live simulator bridge: a lockstep wire protocol over TCP or WebSocket.
//!
//! Every message is one UTF-8 JSON document `{type, seq, payload}` behind a
//! u32 big-endian byte length. Over WebSocket the same framed bytes travel in
//! binary frames (text frames carrying a bare document are also accepted).
//!
//! Client to server: `hello`, `input` (payload: one trace frame),
//! `spawnRequest`, `bye`. Server to client: `helloAck`, `stateUpdate`,
//! `event`, `bye`. Each `input` runs exactly one tick and is answered by one
//! `stateUpdate` followed by `eventCount` `event` messages.

mod client;
mod server;
mod transport;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use client::{BridgeClient, TickReply};
pub use server::{BridgeConfig, BridgeServer, SessionSummary};
pub use transport::{read_frame, write_frame, Transport, MAX_FRAME_BYTES};

pub const PROTOCOL_MAJOR: u32 = 1;
pub const PROTOCOL_MINOR: u32 = 0;
/// WebSocket path the server accepts.
pub const SESSION_PATH: &str = "/session";
/// At or above this many entities a `stateUpdate` carries a diff.
pub const FULL_SNAPSHOT_LIMIT: usize = 200;

pub fn protocol_version() -> String {
    format!("{PROTOCOL_MAJOR}.{PROTOCOL_MINOR}")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BridgeError {
    #[error("i/o: {0}")]
    Io(String),
    #[error("frame: {0}")]
    Frame(String),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("websocket: {0}")]
    WebSocket(String),
    #[error("unsupported protocol version {client} (server speaks {server})")]
    Unsupported { client: String, server: String },
    #[error("server is busy with another session")]
    Busy,
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Runtime(#[from] crate::runtime::RuntimeError),
}

impl From<std::io::Error> for BridgeError {
    fn from(e: std::io::Error) -> Self {
        BridgeError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MessageType {
    Hello,
    HelloAck,
    Input,
    StateUpdate,
    Event,
    SpawnRequest,
    Bye,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

impl BridgeMessage {
    pub fn new(kind: MessageType, seq: u64, payload: Value) -> Self {
        Self { kind, seq, payload }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("message serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BridgeError> {
        serde_json::from_slice(bytes).map_err(|e| BridgeError::Malformed(e.to_string()))
    }
}

/// Major version of a `major.minor` string.
pub fn parse_major(version: &str) -> Option<u32> {
    let (major, minor) = version.split_once('.')?;
    minor.parse::<u32>().ok()?;
    major.parse().ok()
}

/// Flattens a session snapshot into `entity:id -> item`, where each item
/// carries its `entity` kind (`node`, `object` or `sphere`).
pub fn flatten_snapshot(snapshot: &Value) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    for (entity, list) in [("node", "nodes"), ("object", "objects"), ("sphere", "spheres")] {
        for item in snapshot[list].as_array().into_iter().flatten() {
            let mut item = item.clone();
            let id = item["id"].as_str().unwrap_or_default().to_string();
            item["entity"] = entity.into();
            out.insert(format!("{entity}:{id}"), item);
        }
    }
    out
}

/// `(added, removed, changed)` between two flattened snapshots.
pub fn diff_snapshots(before: &BTreeMap<String, Value>, after: &BTreeMap<String, Value>) -> Value {
    let added: Vec<&Value> = after
        .iter()
        .filter(|(k, _)| !before.contains_key(*k))
        .map(|(_, v)| v)
        .collect();
    let removed: Vec<&String> = before.keys().filter(|k| !after.contains_key(*k)).collect();
    let changed: Vec<&Value> = after
        .iter()
        .filter(|(k, v)| before.get(*k).is_some_and(|b| b != *v))
        .map(|(_, v)| v)
        .collect();
    json!({"added": added, "removed": removed, "changed": changed})
}

/// Applies a diff produced by [`diff_snapshots`].
pub fn apply_diff(state: &mut BTreeMap<String, Value>, diff: &Value) -> Result<(), BridgeError> {
    let key = |item: &Value| -> Result<String, BridgeError> {
        match (item["entity"].as_str(), item["id"].as_str()) {
            (Some(e), Some(id)) => Ok(format!("{e}:{id}")),
            _ => Err(BridgeError::Malformed("diff item without entity and id".into())),
        }
    };
    for k in diff["removed"].as_array().into_iter().flatten() {
        state.remove(k.as_str().unwrap_or_default());
    }
    for item in diff["added"]
        .as_array()
        .into_iter()
        .flatten()
        .chain(diff["changed"].as_array().into_iter().flatten())
    {
        state.insert(key(item)?, item.clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_json_shape() {
        let m = BridgeMessage::new(MessageType::HelloAck, 0, json!({"ok": true}));
        let v: Value = serde_json::from_slice(&m.to_bytes()).unwrap();
        assert_eq!(v, json!({"type": "helloAck", "seq": 0, "payload": {"ok": true}}));
        assert_eq!(BridgeMessage::from_bytes(&m.to_bytes()).unwrap(), m);
        assert!(BridgeMessage::from_bytes(br#"{"type":"launch","seq":0}"#).is_err());
    }

    #[test]
    fn versions() {
        assert_eq!(parse_major("1.0"), Some(1));
        assert_eq!(parse_major("2.3"), Some(2));
        assert_eq!(parse_major("1"), None);
        assert_eq!(parse_major("x.0"), None);
    }

    #[test]
    fn diff_round_trip() {
        let a = flatten_snapshot(&json!({
            "nodes": [{"id": "tv", "text": "a"}, {"id": "gone"}],
            "objects": [{"id": "mug"}],
            "spheres": []
        }));
        let b = flatten_snapshot(&json!({
            "nodes": [{"id": "tv", "text": "b"}],
            "objects": [{"id": "mug"}],
            "spheres": [{"id": "ball-0"}]
        }));
        let d = diff_snapshots(&a, &b);
        assert_eq!(d["removed"], json!(["node:gone"]));
        assert_eq!(d["added"].as_array().unwrap().len(), 1);
        assert_eq!(d["changed"].as_array().unwrap().len(), 1);
        let mut state = a.clone();
        apply_diff(&mut state, &d).unwrap();
        assert_eq!(state, b);
    }
}
