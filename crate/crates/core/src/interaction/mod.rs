//! The interaction grammar: turns per-frame user state into explicit events
//! (select, drag, UI touch) and implicit intents (pinch, long pinch, swipe,
//! voice, grab).

mod behaviors;
mod grammar;
mod pinch;
mod selection;
mod swipe;

use std::fmt;

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::math::{Pose, Ray};
use crate::model::{Handedness, OBJECT_PREFIX, UI_PREFIX};

pub use behaviors::{Behaviors, DragUpdate};
pub use grammar::{Grammar, GrammarOutput, GRAB_SURFACE_DISTANCE};
pub use pinch::PinchTracker;
pub use selection::{is_selecting_at, resolve_target, selection_ray};
pub use swipe::{recognize_swipe, SwipeTracker};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InteractionError {
    #[error("frame index went from {last} to {got}; it must strictly increase")]
    NonMonotonicFrame { last: u64, got: u64 },
    #[error("unknown node `{0}`")]
    UnknownNode(TargetId),
    #[error("invalid grammar config: {0}")]
    InvalidConfig(&'static str),
}

/// Namespaced id of anything a ray can select. Renders as `obj:<id>` or `ui:<id>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetId {
    Object(String),
    Ui(String),
}

impl TargetId {
    pub fn raw(&self) -> &str {
        match self {
            TargetId::Object(id) | TargetId::Ui(id) => id,
        }
    }

    pub fn qualified(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Option<Self> {
        if let Some(id) = s.strip_prefix(OBJECT_PREFIX) {
            Some(TargetId::Object(id.to_string()))
        } else {
            s.strip_prefix(UI_PREFIX).map(|id| TargetId::Ui(id.to_string()))
        }
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetId::Object(id) => write!(f, "{OBJECT_PREFIX}{id}"),
            TargetId::Ui(id) => write!(f, "{UI_PREFIX}{id}"),
        }
    }
}

impl Serialize for TargetId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Something the selection ray can hit.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub id: TargetId,
    pub pose: Pose,
    pub half_extents: DVec3,
    /// Buttons answer selection and fingertip contact with `uiTouch`.
    pub touchable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandSource {
    Left,
    Right,
    None,
}

impl From<Handedness> for HandSource {
    fn from(h: Handedness) -> Self {
        match h {
            Handedness::Left => HandSource::Left,
            Handedness::Right => HandSource::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExplicitKind {
    Select,
    DragStart,
    DragMove,
    DragEnd,
    UiTouch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplicitEvent {
    pub frame_index: u64,
    pub kind: ExplicitKind,
    pub target: Option<TargetId>,
    pub ray: Ray,
    pub source: HandSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwipeDirection {
    Left,
    Right,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum IntentKind {
    PinchBegan,
    PinchEnded,
    LongPinch,
    Swipe { direction: SwipeDirection },
    VoiceCommand { text: String },
    Grab,
    Release,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ImplicitIntent {
    pub frame_index: u64,
    #[serde(flatten)]
    pub kind: IntentKind,
    pub source: HandSource,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PinchConfig {
    /// Pinch begins below this thumb-index distance, meters.
    pub enter: f64,
    /// Pinch ends above this distance, meters.
    pub exit: f64,
    /// Continuous hold before a long pinch, seconds.
    pub long_hold: f64,
}

impl Default for PinchConfig {
    fn default() -> Self {
        Self {
            enter: 0.02,
            exit: 0.03,
            long_hold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SwipeConfig {
    /// Observation window, seconds.
    pub window: f64,
    /// Minimum dominant-axis wrist displacement, meters.
    pub min_disp: f64,
    /// Required ratio of dominant to off-axis displacement.
    pub dominance: f64,
}

impl Default for SwipeConfig {
    fn default() -> Self {
        Self {
            window: 0.3,
            min_disp: 0.15,
            dominance: 2.0,
        }
    }
}

/// Recognizer thresholds; serialized into every trace so replays are self-contained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarConfig {
    pub pinch: PinchConfig,
    pub swipe: SwipeConfig,
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<(), InteractionError> {
        let p = &self.pinch;
        if !(p.enter > 0.0 && p.exit.is_finite() && p.long_hold >= 0.0 && p.long_hold.is_finite()) {
            return Err(InteractionError::InvalidConfig("pinch thresholds must be positive"));
        }
        if !(p.exit > p.enter) {
            return Err(InteractionError::InvalidConfig("pinch exit must exceed enter"));
        }
        let s = &self.swipe;
        if !(s.window > 0.0 && s.min_disp > 0.0 && s.window.is_finite() && s.min_disp.is_finite()) {
            return Err(InteractionError::InvalidConfig(
                "swipe window and displacement must be positive",
            ));
        }
        if !(s.dominance > 1.0 && s.dominance.is_finite()) {
            return Err(InteractionError::InvalidConfig("swipe dominance must exceed 1"));
        }
        Ok(())
    }
}
