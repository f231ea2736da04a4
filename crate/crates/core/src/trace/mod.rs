//! File formats: input traces, scene descriptions, event logs and the
//! canonical JSON they are hashed through.

mod builder;
pub mod canonical;
mod input;
mod log;
mod scene;

pub use builder::{TraceBuilder, EYE, OPEN_GAP, PINCH_GAP};
pub use input::{
    CompactHand, FullHand, GazeOverride, InjectedIntent, InputTrace, SpawnRequest, TraceFrame, TraceHand, TraceHands,
    TRACE_VERSION,
};
pub use log::{Category, EventLog, LogEntry, NonMonotonicLog, LOG_HEADER, LOG_VERSION};
pub use scene::{DepthSceneSpec, SceneFile, SCENE_VERSION};

pub(crate) use input::syntax_error;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("unsupported {what} version {found} (supported: {supported})")]
    UnsupportedVersion {
        what: &'static str,
        found: u64,
        supported: u32,
    },
    #[error("malformed: input truncated at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("malformed: syntax error at byte offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("malformed{}: {message}", frame.map(|i| format!(" frame {i}")).unwrap_or_default())]
    Malformed { frame: Option<usize>, message: String },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e.to_string())
    }
}
