//! Scripted construction of input traces for tests and fixtures.

use glam::DVec3;

use super::{CompactHand, InjectedIntent, InputTrace, SpawnRequest, TraceFrame, TraceHand, TraceHands};
use crate::interaction::GrammarConfig;
use crate::math::{GeometryError, Pose};

/// Thumb-index gap of an open hand, meters.
pub const OPEN_GAP: f64 = 0.08;
/// Thumb-index gap of a closed pinch, meters.
pub const PINCH_GAP: f64 = 0.01;
/// Default eye position: standing user at the origin.
pub const EYE: DVec3 = DVec3::new(0.0, 1.6, 0.0);

/// Appends frames with dense indices while head and hand state are changed
/// between calls.
#[derive(Debug, Clone)]
pub struct TraceBuilder {
    trace: InputTrace,
    head: Pose,
    right: Option<CompactHand>,
    left: Option<TraceHand>,
    pending_voice: Vec<String>,
    pending_spawns: Vec<SpawnRequest>,
}

impl Default for TraceBuilder {
    fn default() -> Self {
        Self::new(GrammarConfig::default())
    }
}

impl TraceBuilder {
    pub fn new(grammar: GrammarConfig) -> Self {
        Self {
            trace: InputTrace {
                grammar,
                ..InputTrace::default()
            },
            head: Pose::from_position(EYE).expect("finite"),
            right: None,
            left: None,
            pending_voice: Vec::new(),
            pending_spawns: Vec::new(),
        }
    }

    pub fn len(&self) -> u64 {
        self.trace.frames.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.trace.frames.is_empty()
    }

    pub fn head(&mut self, pose: Pose) -> &mut Self {
        self.head = pose;
        self
    }

    /// Turns the head (and so the fallback gaze) toward `target`.
    pub fn look_at(&mut self, target: DVec3) -> Result<&mut Self, GeometryError> {
        self.head = Pose::looking_at(self.head.position(), target)?;
        Ok(self)
    }

    /// Right hand below and in front of the head with the given thumb-index gap.
    pub fn right_hand(&mut self, gap: f64) -> &mut Self {
        let wrist = self.head.position() + DVec3::new(0.15, -0.35, -0.3);
        let thumb_tip = wrist + DVec3::new(-0.02, 0.08, -0.03);
        self.right = Some(CompactHand {
            wrist,
            thumb_tip,
            index_tip: thumb_tip + DVec3::new(0.0, gap, 0.0),
        });
        self
    }

    /// Moves the right wrist by `delta`, keeping the fingers.
    pub fn move_right_hand(&mut self, delta: DVec3) -> &mut Self {
        if let Some(h) = &mut self.right {
            h.wrist += delta;
            h.thumb_tip += delta;
            h.index_tip += delta;
        }
        self
    }

    pub fn right_hand_raw(&mut self, hand: Option<CompactHand>) -> &mut Self {
        self.right = hand;
        self
    }

    pub fn left_hand(&mut self, hand: Option<TraceHand>) -> &mut Self {
        self.left = hand;
        self
    }

    pub fn open(&mut self) -> &mut Self {
        self.right_hand(OPEN_GAP)
    }

    pub fn pinch(&mut self) -> &mut Self {
        self.right_hand(PINCH_GAP)
    }

    pub fn no_hands(&mut self) -> &mut Self {
        self.right = None;
        self.left = None;
        self
    }

    /// Injects a voice command into the next frame.
    pub fn voice(&mut self, text: impl Into<String>) -> &mut Self {
        self.pending_voice.push(text.into());
        self
    }

    /// Requests a sphere spawn in the next frame.
    pub fn spawn(&mut self, position: DVec3, velocity: DVec3) -> &mut Self {
        self.pending_spawns.push(SpawnRequest { position, velocity });
        self
    }

    /// Appends `n` frames with the current state.
    pub fn frames(&mut self, n: u64) -> &mut Self {
        for _ in 0..n {
            let mut frame = TraceFrame::new(self.len(), self.head);
            frame.hands = TraceHands {
                left: self.left.clone(),
                right: self.right.map(TraceHand::Compact),
            };
            frame.injected_intents = self
                .pending_voice
                .drain(..)
                .map(|text| InjectedIntent::VoiceCommand { text })
                .collect();
            frame.spawns = std::mem::take(&mut self.pending_spawns);
            self.trace.frames.push(frame);
        }
        self
    }

    /// Appends frames for `seconds` at 60 Hz (rounded to whole frames).
    pub fn hold(&mut self, seconds: f64) -> &mut Self {
        self.frames((seconds * 60.0).round() as u64)
    }

    pub fn build(&self) -> InputTrace {
        self.trace.clone()
    }
}
