//! Model backends, agents with tools and memory, and the built-in gesture
//! classifier.
//!
//! Requests are resolved only at frame boundaries through [`AiHub::drain`],
//! and timeouts count simulated frames, so a session replays exactly.

mod agent;
mod gesture;
mod hub;
mod mock;

use serde::{Deserialize, Serialize};

pub use agent::{compose_prompt, Agent, ParamType, Tool, MEMORY_CAPACITY, MEMORY_WINDOW, PROMPT_FORMAT_VERSION};
pub use gesture::{hand_features, rps_model, synthetic_hand_pose, GestureModel, RpsGesture};
pub use hub::{AiHub, Backend, BackendReply};
pub use mock::{MockBackend, MockRule, MockScript};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AiError {
    #[error("prompt must not be empty")]
    EmptyPrompt,
    #[error("temperature {0} is outside [0, 2]")]
    InvalidTemperature(f64),
    #[error("timeout must be positive, got {0}")]
    InvalidTimeout(f64),
    #[error("backend `{0}` is already registered")]
    DuplicateBackend(String),
    #[error("no-such-tool: {0}")]
    NoSuchTool(String),
    #[error("bad-args: {}", .0.join(", "))]
    BadArgs(Vec<String>),
    #[error("tool `{0}` is already registered")]
    DuplicateTool(String),
    #[error("hand is not tracked")]
    UntrackedHand,
    #[error("hand span is zero")]
    DegenerateHand,
    #[error("invalid gesture model: {0}")]
    InvalidModel(String),
    #[error("unsupported {what} version {found} (supported: {supported})")]
    UnsupportedVersion {
        what: &'static str,
        found: u32,
        supported: u32,
    },
    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },
}

pub type RequestId = u64;

/// Caller-provided part of a request; the hub assigns the id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct QueryOptions {
    pub context_entries: Vec<String>,
    pub temperature: f64,
    pub timeout_seconds: f64,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            context_entries: Vec::new(),
            temperature: 0.0,
            timeout_seconds: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelRequest {
    pub request_id: RequestId,
    pub prompt: String,
    pub context_entries: Vec<String>,
    pub temperature: f64,
    pub timeout_seconds: f64,
}

impl ModelRequest {
    pub fn new(request_id: RequestId, prompt: impl Into<String>, options: QueryOptions) -> Result<Self, AiError> {
        let prompt = prompt.into();
        if prompt.is_empty() {
            return Err(AiError::EmptyPrompt);
        }
        if !(0.0..=2.0).contains(&options.temperature) {
            return Err(AiError::InvalidTemperature(options.temperature));
        }
        if !(options.timeout_seconds > 0.0 && options.timeout_seconds.is_finite()) {
            return Err(AiError::InvalidTimeout(options.timeout_seconds));
        }
        Ok(Self {
            request_id,
            prompt,
            context_entries: options.context_entries,
            temperature: options.temperature,
            timeout_seconds: options.timeout_seconds,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseStatus {
    Ok,
    Failed,
    Timeout,
}

/// `text` is set exactly when `status` is ok; `reason` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelResponse {
    pub request_id: RequestId,
    pub backend: String,
    pub status: ResponseStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ModelResponse {
    pub fn ok(request_id: RequestId, backend: &str, text: String) -> Self {
        Self {
            request_id,
            backend: backend.to_string(),
            status: ResponseStatus::Ok,
            text: Some(text),
            reason: None,
        }
    }

    pub fn failed(request_id: RequestId, backend: &str, reason: impl Into<String>) -> Self {
        Self {
            request_id,
            backend: backend.to_string(),
            status: ResponseStatus::Failed,
            text: None,
            reason: Some(reason.into()),
        }
    }

    pub fn timeout(request_id: RequestId, backend: &str) -> Self {
        Self {
            request_id,
            backend: backend.to_string(),
            status: ResponseStatus::Timeout,
            text: None,
            reason: Some("timeout".into()),
        }
    }
}
