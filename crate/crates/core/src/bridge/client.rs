use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::time::Duration;

use serde_json::{json, Value};

use super::transport::Transport;
use super::{apply_diff, flatten_snapshot, protocol_version, BridgeError, BridgeMessage, MessageType};
use crate::trace::{SpawnRequest, TraceFrame};

/// Everything the server sent back for one `input`.
#[derive(Debug, Clone, PartialEq)]
pub struct TickReply {
    pub state_update: Value,
    pub events: Vec<Value>,
}

impl TickReply {
    pub fn halted(&self) -> bool {
        self.state_update["halted"].as_bool().unwrap_or(false)
    }
}

/// Loopback client speaking the same protocol a simulator UI would.
#[derive(Debug)]
pub struct BridgeClient {
    transport: Transport,
    seq: u64,
    state: BTreeMap<String, Value>,
}

impl BridgeClient {
    pub fn connect_tcp(addr: SocketAddr) -> Result<Self, BridgeError> {
        Ok(Self::over(Transport::connect_tcp(addr)?))
    }

    pub fn connect_ws(addr: SocketAddr) -> Result<Self, BridgeError> {
        Ok(Self::over(Transport::connect_ws(addr)?))
    }

    pub fn over(transport: Transport) -> Self {
        let _ = transport.set_read_timeout(Some(Duration::from_secs(30)));
        Self {
            transport,
            seq: 0,
            state: BTreeMap::new(),
        }
    }

    /// Raw send; the seq is assigned here.
    pub fn send(&mut self, kind: MessageType, payload: Value) -> Result<(), BridgeError> {
        let message = BridgeMessage::new(kind, self.seq, payload);
        self.seq += 1;
        self.transport.send(&message)
    }

    pub fn recv(&mut self) -> Result<BridgeMessage, BridgeError> {
        self.transport.recv()?.ok_or(BridgeError::Closed)
    }

    fn expect(&mut self, kind: MessageType) -> Result<BridgeMessage, BridgeError> {
        let message = self.recv()?;
        if message.kind != kind {
            return Err(BridgeError::Protocol(format!(
                "expected {kind:?}, got {:?}: {}",
                message.kind, message.payload
            )));
        }
        Ok(message)
    }

    /// Sends `hello` and returns the ack payload. A refusal comes back as
    /// `Busy` or `Unsupported`.
    pub fn hello(&mut self, version: &str) -> Result<Value, BridgeError> {
        self.send(MessageType::Hello, json!({"version": version}))?;
        let ack = self.expect(MessageType::HelloAck)?.payload;
        if ack["ok"] != true {
            return Err(match ack["error"].as_str() {
                Some("busy") => BridgeError::Busy,
                Some("unsupported") => BridgeError::Unsupported {
                    client: version.to_string(),
                    server: ack["version"].as_str().unwrap_or_default().to_string(),
                },
                _ => BridgeError::Protocol(format!("hello refused: {ack}")),
            });
        }
        self.state = flatten_snapshot(&ack["state"]);
        Ok(ack)
    }

    pub fn hello_current(&mut self) -> Result<Value, BridgeError> {
        self.hello(&protocol_version())
    }

    pub fn spawn(&mut self, spawn: SpawnRequest) -> Result<(), BridgeError> {
        self.send(
            MessageType::SpawnRequest,
            serde_json::to_value(spawn).expect("spawn serializes"),
        )
    }

    /// Runs one frame on the server.
    pub fn send_input(&mut self, frame: &TraceFrame) -> Result<TickReply, BridgeError> {
        self.send(
            MessageType::Input,
            serde_json::to_value(frame).expect("frame serializes"),
        )?;
        let message = self.recv()?;
        if message.kind == MessageType::Event {
            return Err(BridgeError::Protocol(format!("server error: {}", message.payload)));
        }
        if message.kind != MessageType::StateUpdate {
            return Err(BridgeError::Protocol(format!(
                "expected stateUpdate, got {:?}",
                message.kind
            )));
        }
        let update = message.payload;
        if update.get("full").is_some() {
            self.state = flatten_snapshot(&update["full"]);
        } else {
            apply_diff(&mut self.state, &update["diff"])?;
        }
        let count = update["eventCount"]
            .as_u64()
            .ok_or_else(|| BridgeError::Malformed("stateUpdate without eventCount".into()))?;
        let mut events = Vec::with_capacity(count as usize);
        for _ in 0..count {
            events.push(self.expect(MessageType::Event)?.payload);
        }
        Ok(TickReply {
            state_update: update,
            events,
        })
    }

    /// Ends the session and returns the server's summary.
    pub fn bye(mut self) -> Result<Value, BridgeError> {
        self.send(MessageType::Bye, json!({}))?;
        let summary = self.expect(MessageType::Bye)?.payload;
        self.transport.close();
        Ok(summary)
    }

    /// Client-side view of the world, kept current from full states and diffs.
    pub fn state(&self) -> &BTreeMap<String, Value> {
        &self.state
    }

    pub fn close(mut self) {
        self.transport.close();
    }
}
