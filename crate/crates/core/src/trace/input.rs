//! Recorded user input: one frame of head, hands and gaze per tick.

use glam::DVec3;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::canonical::to_canonical_json;
use super::FormatError;
use crate::interaction::GrammarConfig;
use crate::math::Pose;
use crate::model::{GazeState, HandJoint, HandState, Handedness, UserState, JOINT_COUNT};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputTrace {
    pub version: u32,
    #[serde(default)]
    pub grammar: GrammarConfig,
    pub frames: Vec<TraceFrame>,
}

impl Default for InputTrace {
    fn default() -> Self {
        Self {
            version: TRACE_VERSION,
            grammar: GrammarConfig::default(),
            frames: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TraceFrame {
    pub frame_index: u64,
    pub head: Pose,
    #[serde(default)]
    pub hands: TraceHands,
    /// Replaces the head-forward gaze ray when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze: Option<GazeOverride>,
    #[serde(default)]
    pub gaze_valid: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub injected_intents: Vec<InjectedIntent>,
    /// Sphere spawns requested by a live client; replayed verbatim.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spawns: Vec<SpawnRequest>,
}

impl TraceFrame {
    pub fn new(frame_index: u64, head: Pose) -> Self {
        Self {
            frame_index,
            head,
            hands: TraceHands::default(),
            gaze: None,
            gaze_valid: false,
            injected_intents: Vec::new(),
            spawns: Vec::new(),
        }
    }

    pub fn user_state(&self) -> Result<UserState, FormatError> {
        let malformed = |message: String| FormatError::Malformed {
            frame: Some(self.frame_index as usize),
            message,
        };
        let hand = |h: Handedness, trace: &Option<TraceHand>| match trace {
            None => Ok(HandState::untracked(h)),
            Some(t) => HandState::tracked(h, t.joints().map_err(malformed)?).map_err(|e| malformed(e.to_string())),
        };
        let gaze = match &self.gaze {
            Some(g) => GazeState::new(g.origin, g.direction, self.gaze_valid).map_err(|e| malformed(e.to_string()))?,
            None => GazeState::from_head(&self.head, self.gaze_valid),
        };
        Ok(UserState {
            head: self.head,
            hands: [
                hand(Handedness::Left, &self.hands.left)?,
                hand(Handedness::Right, &self.hands.right)?,
            ],
            gaze,
        })
    }

    pub fn voice_commands(&self) -> Vec<String> {
        self.injected_intents
            .iter()
            .map(|i| match i {
                InjectedIntent::VoiceCommand { text } => text.clone(),
            })
            .collect()
    }
}

/// `None` means the hand is not tracked.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHands {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<TraceHand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<TraceHand>,
}

/// Full skeleton, or the three joints the grammar reads with the rest
/// zero-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceHand {
    Full(FullHand),
    Compact(CompactHand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullHand {
    pub joints: Vec<DVec3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CompactHand {
    pub wrist: DVec3,
    pub thumb_tip: DVec3,
    pub index_tip: DVec3,
}

impl TraceHand {
    pub fn full(joints: &[DVec3; JOINT_COUNT]) -> Self {
        TraceHand::Full(FullHand {
            joints: joints.to_vec(),
        })
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, TraceHand::Compact(_))
    }

    pub fn joints(&self) -> Result<[DVec3; JOINT_COUNT], String> {
        match self {
            TraceHand::Full(h) => <[DVec3; JOINT_COUNT]>::try_from(h.joints.as_slice())
                .map_err(|_| format!("hand needs {JOINT_COUNT} joints, got {}", h.joints.len())),
            TraceHand::Compact(c) => {
                let mut joints = [DVec3::ZERO; JOINT_COUNT];
                joints[HandJoint::Wrist.index()] = c.wrist;
                joints[HandJoint::ThumbTip.index()] = c.thumb_tip;
                joints[HandJoint::IndexTip.index()] = c.index_tip;
                Ok(joints)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GazeOverride {
    pub origin: DVec3,
    pub direction: DVec3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum InjectedIntent {
    VoiceCommand { text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpawnRequest {
    pub position: DVec3,
    pub velocity: DVec3,
}

impl InputTrace {
    /// Parses and validates a trace. Syntax errors report a byte offset,
    /// bad frames their index.
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let value: Value = serde_json::from_str(text).map_err(|e| syntax_error(text, &e))?;
        let found = value.get("version").and_then(Value::as_u64);
        match found {
            Some(v) if v == u64::from(TRACE_VERSION) => {}
            Some(v) => {
                return Err(FormatError::UnsupportedVersion {
                    what: "trace",
                    found: v,
                    supported: TRACE_VERSION,
                })
            }
            None => {
                return Err(FormatError::Malformed {
                    frame: None,
                    message: "missing numeric `version`".into(),
                })
            }
        }
        let Value::Object(mut top) = value else {
            unreachable!("version lookup succeeded on an object")
        };
        let frames = match top.remove("frames") {
            Some(Value::Array(frames)) => frames,
            _ => {
                return Err(FormatError::Malformed {
                    frame: None,
                    message: "`frames` must be an array".into(),
                })
            }
        };
        top.insert("frames".into(), Value::Array(Vec::new()));
        let mut trace: InputTrace = serde_json::from_value(Value::Object(top)).map_err(|e| FormatError::Malformed {
            frame: None,
            message: e.to_string(),
        })?;
        trace.grammar.validate().map_err(|e| FormatError::Malformed {
            frame: None,
            message: e.to_string(),
        })?;
        for (i, frame) in frames.into_iter().enumerate() {
            let frame: TraceFrame = serde_json::from_value(frame).map_err(|e| FormatError::Malformed {
                frame: Some(i),
                message: e.to_string(),
            })?;
            if frame.frame_index != i as u64 {
                return Err(FormatError::Malformed {
                    frame: Some(i),
                    message: format!("frameIndex {} breaks the dense sequence", frame.frame_index),
                });
            }
            frame.user_state()?;
            trace.frames.push(frame);
        }
        Ok(trace)
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("trace serializes")
    }

    /// Canonical JSON text; `from_json` of it yields an equal trace.
    pub fn to_canonical_json(&self) -> String {
        to_canonical_json(&self.to_json_value())
    }

    /// SHA-256 of the canonical JSON text, hex encoded.
    pub fn hash_hex(&self) -> String {
        hex::encode(super::canonical::sha256(self.to_canonical_json().as_bytes()))
    }
}

pub(crate) fn syntax_error(text: &str, e: &serde_json::Error) -> FormatError {
    let offset = byte_offset(text, e.line(), e.column());
    if e.is_eof() {
        FormatError::Truncated { offset }
    } else {
        FormatError::Syntax {
            offset,
            message: e.to_string(),
        }
    }
}

/// Converts serde_json's 1-based line and byte column into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InputTrace {
        let mut frame = TraceFrame::new(0, Pose::from_position(DVec3::new(0.0, 1.6, 0.0)).unwrap());
        frame.hands.right = Some(TraceHand::Compact(CompactHand {
            wrist: DVec3::new(0.2, 1.3, -0.3),
            thumb_tip: DVec3::new(0.2, 1.4, -0.3),
            index_tip: DVec3::new(0.25, 1.4, -0.3),
        }));
        frame
            .injected_intents
            .push(InjectedIntent::VoiceCommand { text: "hi".into() });
        let mut second = TraceFrame::new(1, Pose::IDENTITY);
        second.hands.left = Some(TraceHand::full(&[DVec3::splat(0.1); JOINT_COUNT]));
        second.gaze = Some(GazeOverride {
            origin: DVec3::ZERO,
            direction: DVec3::new(0.0, 0.0, -2.0),
        });
        second.gaze_valid = true;
        second.spawns.push(SpawnRequest {
            position: DVec3::ONE,
            velocity: DVec3::NEG_Z,
        });
        InputTrace {
            frames: vec![frame, second],
            ..InputTrace::default()
        }
    }

    #[test]
    fn round_trip() {
        let trace = sample();
        let text = trace.to_canonical_json();
        let back = InputTrace::from_json(&text).unwrap();
        assert_eq!(back, trace);
        assert_eq!(back.to_canonical_json(), text);
    }

    #[test]
    fn user_state_from_frame() {
        let trace = sample();
        let user = trace.frames[1].user_state().unwrap();
        assert!(user.hands[0].is_tracked());
        assert!(!user.hands[1].is_tracked());
        assert_eq!(user.gaze.direction(), DVec3::NEG_Z);
        let first = trace.frames[0].user_state().unwrap();
        assert!((first.hands[1].pinch_distance() - 0.05).abs() < 1e-12);
        assert_eq!(trace.frames[0].voice_commands(), vec!["hi".to_string()]);
    }

    #[test]
    fn version_errors() {
        let err = InputTrace::from_json(r#"{"version":99,"frames":[]}"#).unwrap_err();
        assert_eq!(
            err,
            FormatError::UnsupportedVersion {
                what: "trace",
                found: 99,
                supported: 1
            }
        );
        assert!(err.to_string().contains("99") && err.to_string().contains('1'));
    }

    #[test]
    fn truncation_names_offset() {
        let text = sample().to_canonical_json();
        let cut = &text[..text.len() / 2];
        match InputTrace::from_json(cut).unwrap_err() {
            FormatError::Truncated { offset } => assert_eq!(offset, cut.len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_frame_names_index() {
        let mut value = sample().to_json_value();
        value["frames"][1]["hands"]["left"]["joints"] = serde_json::json!([[0, 0, 0]]);
        let err = InputTrace::from_json(&value.to_string()).unwrap_err();
        assert!(matches!(err, FormatError::Malformed { frame: Some(1), .. }), "{err:?}");
        let mut value = sample().to_json_value();
        value["frames"][1]["frameIndex"] = 5.into();
        assert!(matches!(
            InputTrace::from_json(&value.to_string()).unwrap_err(),
            FormatError::Malformed { frame: Some(1), .. }
        ));
        let mut value = sample().to_json_value();
        value["frames"][0]["bogus"] = true.into();
        assert!(matches!(
            InputTrace::from_json(&value.to_string()).unwrap_err(),
            FormatError::Malformed { frame: Some(0), .. }
        ));
    }
}
