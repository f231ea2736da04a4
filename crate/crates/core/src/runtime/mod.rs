//! The script engine: a fixed-step frame loop over the reality model.
//!
//! Each tick runs, in order:
//!
//! 1. ingest the trace frame into the user state
//! 2. run the interaction grammar; log intents, then explicit events
//! 3. drain due AI responses; log each, then call `on_response`
//! 4. apply drags, then `on_intent` for each intent, then select and
//!    UI-touch callbacks and per-node select handlers
//! 5. log `script/update` and call `update(dt)`
//! 6. trace spawns, physics step, collision and occlusion-change entries
//! 7. append the frame's entries to the event log
//!
//! A script error or panic is logged as `script-error` and halts the session.

mod samples;
mod script;
mod session;
mod ui;

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::ai::{AiError, MockScript};
use crate::interaction::InteractionError;
use crate::math::GeometryError;
use crate::model::ModelError;
use crate::perception::PerceptionError;
use crate::physics::PhysicsError;
use crate::trace::{EventLog, FormatError, InputTrace, NonMonotonicLog, SceneFile};

pub use samples::{
    sample_script, Ballpit, EmptyScript, LongPinchLabels, PoemOnPinch, RockPaperScissors, SAMPLE_SCRIPTS,
};
pub use script::{ApiResult, Script, ScriptApi, ScriptResult, SelectHandler};
pub use session::{Session, TickOutcome};
pub use ui::{UiNode, UiNodeKind, UiScene};

/// Backend name the inline mock script registers under.
pub const MOCK_BACKEND: &str = "mock";
/// Agent every session starts with.
pub const DEFAULT_AGENT: &str = "assistant";
/// Gesture model every session starts with.
pub const RPS_MODEL: &str = "rps";
pub const OPTIONS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Ai(#[from] AiError),
    #[error(transparent)]
    Log(#[from] NonMonotonicLog),
    #[error("unknown-id: `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` already exists")]
    DuplicateNode(String),
    #[error("invalid node: {0}")]
    InvalidNode(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown gesture model `{0}`")]
    UnknownModel(String),
    #[error("unknown script `{0}` (known: {known})", known = SAMPLE_SCRIPTS.join(", "))]
    UnknownScript(String),
    #[error("expected trace frame {expected}, got {got}")]
    FrameOutOfSequence { expected: u64, got: u64 },
    #[error("session halted after a script error")]
    Halted,
    #[error("script: {0}")]
    Script(String),
}

/// Per-run options, read from an options file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    /// Stop after this many frames even if the trace is longer.
    pub max_frames: Option<u64>,
    /// Registered as the `mock` backend when present.
    pub mock: Option<MockScript>,
    /// Persona of the default agent.
    pub persona: Option<String>,
}

impl RunOptions {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        #[derive(Deserialize)]
        #[serde(rename_all = "camelCase", deny_unknown_fields)]
        struct File {
            #[serde(rename = "version")]
            _version: u32,
            #[serde(default)]
            max_frames: Option<u64>,
            #[serde(default)]
            mock: Option<Value>,
            #[serde(default)]
            persona: Option<String>,
        }
        let value: Value = serde_json::from_str(text).map_err(|e| crate::trace::syntax_error(text, &e))?;
        let found = value.get("version").and_then(Value::as_u64).unwrap_or(0);
        if found != u64::from(OPTIONS_VERSION) {
            return Err(FormatError::UnsupportedVersion {
                what: "options",
                found,
                supported: OPTIONS_VERSION,
            });
        }
        let malformed = |message: String| FormatError::Malformed { frame: None, message };
        let file: File = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        let mock = file
            .mock
            .map(|m| MockScript::from_json(&m.to_string()))
            .transpose()
            .map_err(|e| malformed(e.to_string()))?;
        Ok(Self {
            max_frames: file.max_frames,
            mock,
            persona: file.persona,
        })
    }

    pub fn to_json_value(&self) -> Value {
        let mut out = serde_json::json!({ "version": OPTIONS_VERSION });
        if let Some(n) = self.max_frames {
            out["maxFrames"] = n.into();
        }
        if let Some(mock) = &self.mock {
            out["mock"] = mock.to_json_value();
        }
        if let Some(p) = &self.persona {
            out["persona"] = p.clone().into();
        }
        out
    }
}

/// Runs `script` over every frame of `trace` (or the first `max_frames`).
pub fn run(
    scene: &SceneFile,
    script: Box<dyn Script>,
    trace: &InputTrace,
    options: &RunOptions,
) -> Result<EventLog, RuntimeError> {
    let mut session = Session::new(scene, script, trace.grammar, options)?;
    let limit = options.max_frames.unwrap_or(u64::MAX);
    for frame in trace.frames.iter().take(usize::try_from(limit).unwrap_or(usize::MAX)) {
        if session.is_halted() {
            break;
        }
        session.tick(frame)?;
    }
    Ok(session.finish())
}

/// File-level entry point: reads the inputs, runs, and returns the log. The
/// options file is optional.
pub fn run_files(
    scene: &Path,
    script_name: &str,
    trace: &Path,
    options: Option<&Path>,
) -> Result<EventLog, RuntimeError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| FormatError::Io(format!("{}: {e}", p.display())));
    let scene = SceneFile::from_json(&read(scene)?)?;
    let trace = InputTrace::from_json(&read(trace)?)?;
    let options = match options {
        Some(p) => RunOptions::from_json(&read(p)?)?,
        None => RunOptions::default(),
    };
    let script = sample_script(script_name).ok_or_else(|| RuntimeError::UnknownScript(script_name.into()))?;
    run(&scene, script, &trace, &options)
}
