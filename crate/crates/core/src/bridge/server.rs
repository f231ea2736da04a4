use std::collections::BTreeMap;
use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::transport::Transport;
use super::{
    diff_snapshots, flatten_snapshot, parse_major, protocol_version, BridgeError, BridgeMessage, MessageType,
    FULL_SNAPSHOT_LIMIT, PROTOCOL_MAJOR,
};
use crate::interaction::GrammarConfig;
use crate::runtime::{sample_script, RunOptions, RuntimeError, Session};
use crate::trace::{Category, SceneFile, SpawnRequest, TraceFrame};

/// What a bridge session runs and where it writes its recording.
#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub scene: SceneFile,
    pub script: String,
    pub options: RunOptions,
    pub grammar: GrammarConfig,
    pub trace_out: Option<PathBuf>,
    pub log_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSummary {
    pub frames: u64,
    pub trace_path: Option<PathBuf>,
    pub trace_hash: String,
    pub log_hash: String,
    /// Connections turned away while the session ran.
    pub refused: u32,
}

impl SessionSummary {
    pub fn to_json_value(&self) -> Value {
        json!({
            "frames": self.frames,
            "tracePath": self.trace_path.as_ref().map(|p| p.display().to_string()),
            "traceHash": self.trace_hash,
            "logHash": self.log_hash,
        })
    }
}

/// Serves one lockstep session at a time.
#[derive(Debug)]
pub struct BridgeServer {
    listener: TcpListener,
}

impl BridgeServer {
    pub fn bind(addr: impl ToSocketAddrs) -> Result<Self, BridgeError> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, BridgeError> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until one session has run to completion. Clients
    /// that connect while it runs get `helloAck{ok: false, error: "busy"}`.
    pub fn serve_session(&self, config: BridgeConfig) -> Result<SessionSummary, BridgeError> {
        if sample_script(&config.script).is_none() {
            return Err(RuntimeError::UnknownScript(config.script.clone()).into());
        }
        self.listener.set_nonblocking(true)?;
        let mut worker: Option<thread::JoinHandle<Result<SessionSummary, BridgeError>>> = None;
        let mut refused = 0;
        let done = Arc::new(AtomicBool::new(false));
        let mut config = Some(config);
        loop {
            match self.listener.accept() {
                Ok((stream, _)) => {
                    stream.set_nonblocking(false)?;
                    if worker.is_some() {
                        refused += 1;
                        thread::spawn(move || refuse_busy(stream));
                        continue;
                    }
                    let config = config.take().expect("one session per call");
                    let done = done.clone();
                    worker = Some(thread::spawn(move || {
                        let result = Transport::accept(stream).and_then(|t| run_connection(t, config));
                        done.store(true, Ordering::SeqCst);
                        result
                    }));
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    if done.load(Ordering::SeqCst) {
                        break;
                    }
                    thread::sleep(Duration::from_millis(2));
                }
                Err(e) => return Err(e.into()),
            }
        }
        let handle = worker.expect("done implies a worker");
        let mut summary = handle
            .join()
            .map_err(|_| BridgeError::Protocol("session thread panicked".into()))??;
        summary.refused = refused;
        Ok(summary)
    }
}

fn refuse_busy(stream: std::net::TcpStream) {
    if let Ok(mut t) = Transport::accept(stream) {
        let _ = t.set_read_timeout(Some(Duration::from_secs(2)));
        let _ = t.recv();
        let ack = json!({"ok": false, "error": "busy", "version": protocol_version()});
        let _ = t.send(&BridgeMessage::new(MessageType::HelloAck, 0, ack));
        t.close();
    }
}

struct Connection {
    transport: Transport,
    out_seq: u64,
    in_seq: Option<u64>,
}

impl Connection {
    fn send(&mut self, kind: MessageType, payload: Value) -> Result<(), BridgeError> {
        let message = BridgeMessage::new(kind, self.out_seq, payload);
        self.out_seq += 1;
        self.transport.send(&message)
    }

    /// Next client message with a strictly increasing seq.
    fn recv(&mut self) -> Result<Option<BridgeMessage>, BridgeError> {
        let Some(message) = self.transport.recv()? else {
            return Ok(None);
        };
        if self.in_seq.is_some_and(|last| message.seq <= last) {
            return Err(BridgeError::Protocol(format!(
                "seq {} after {}",
                message.seq,
                self.in_seq.unwrap_or_default()
            )));
        }
        self.in_seq = Some(message.seq);
        Ok(Some(message))
    }

    fn protocol_error(&mut self, message: &str) {
        let _ = self.send(
            MessageType::Event,
            json!({"kind": "protocol-error", "message": message}),
        );
    }
}

fn run_connection(transport: Transport, config: BridgeConfig) -> Result<SessionSummary, BridgeError> {
    let mut conn = Connection {
        transport,
        out_seq: 0,
        in_seq: None,
    };
    let result = drive(&mut conn, config);
    if let Err(e) = &result {
        if !matches!(
            e,
            BridgeError::Unsupported { .. } | BridgeError::Closed | BridgeError::Io(_)
        ) {
            conn.protocol_error(&e.to_string());
        }
    }
    conn.transport.close();
    result
}

fn drive(conn: &mut Connection, config: BridgeConfig) -> Result<SessionSummary, BridgeError> {
    let hello = conn.recv()?.ok_or(BridgeError::Closed)?;
    if hello.kind != MessageType::Hello {
        return Err(BridgeError::Protocol("first message must be hello".into()));
    }
    let client_version = hello.payload["version"].as_str().unwrap_or_default().to_string();
    if parse_major(&client_version) != Some(PROTOCOL_MAJOR) {
        conn.send(
            MessageType::HelloAck,
            json!({"ok": false, "error": "unsupported", "version": protocol_version()}),
        )?;
        return Err(BridgeError::Unsupported {
            client: client_version,
            server: protocol_version(),
        });
    }

    let script = sample_script(&config.script).expect("checked before accept");
    let mut session = Session::new(&config.scene, script, config.grammar, &config.options)?;
    let initial = session.snapshot();
    let mut last = flatten_snapshot(&initial);
    conn.send(
        MessageType::HelloAck,
        json!({
            "ok": true,
            "version": protocol_version(),
            "script": config.script,
            "frameDuration": {"num": 1, "den": 60},
            "state": initial,
        }),
    )?;

    let mut spawns: Vec<SpawnRequest> = Vec::new();
    let said_bye = loop {
        let Some(message) = conn.recv()? else {
            break false;
        };
        match message.kind {
            MessageType::Input => {
                let mut frame: TraceFrame = serde_json::from_value(message.payload)
                    .map_err(|e| BridgeError::Malformed(format!("input: {e}")))?;
                frame.spawns.append(&mut spawns);
                tick(conn, &mut session, &frame, &mut last)?;
            }
            MessageType::SpawnRequest => {
                let spawn: SpawnRequest = serde_json::from_value(message.payload)
                    .map_err(|e| BridgeError::Malformed(format!("spawnRequest: {e}")))?;
                spawns.push(spawn);
            }
            MessageType::Bye => break true,
            other => return Err(BridgeError::Protocol(format!("unexpected {other:?} from client"))),
        }
    };

    session.close()?;
    let trace = session.recorded_trace().clone();
    let trace_json = trace.to_canonical_json();
    if let Some(path) = &config.trace_out {
        std::fs::write(path, format!("{trace_json}\n"))?;
    }
    let log = session.finish();
    if let Some(path) = &config.log_out {
        std::fs::write(path, format!("{}\n", log.to_json()))?;
    }
    let summary = SessionSummary {
        frames: trace.frames.len() as u64,
        trace_path: config.trace_out.clone(),
        trace_hash: trace.hash_hex(),
        log_hash: log.hash_hex(),
        refused: 0,
    };
    if said_bye {
        conn.send(MessageType::Bye, summary.to_json_value())?;
    }
    Ok(summary)
}

fn tick(
    conn: &mut Connection,
    session: &mut Session,
    frame: &TraceFrame,
    last: &mut BTreeMap<String, Value>,
) -> Result<(), BridgeError> {
    let entries = if session.is_halted() {
        Vec::new()
    } else {
        let outcome = session.tick(frame)?;
        session.log().entries()[outcome.first_entry..]
            .iter()
            .filter(|e| !(e.category == Category::Script && e.payload["event"] == "update"))
            .cloned()
            .collect()
    };
    let snapshot = session.snapshot();
    let flat = flatten_snapshot(&snapshot);
    let mut payload = json!({
        "frame": frame.frame_index,
        "halted": session.is_halted(),
        "eventCount": entries.len(),
    });
    if flat.len() < FULL_SNAPSHOT_LIMIT {
        payload["full"] = snapshot;
    } else {
        payload["diff"] = diff_snapshots(last, &flat);
    }
    *last = flat;
    conn.send(MessageType::StateUpdate, payload)?;
    for entry in entries {
        conn.send(
            MessageType::Event,
            serde_json::to_value(&entry).expect("entry serializes"),
        )?;
    }
    Ok(())
}
