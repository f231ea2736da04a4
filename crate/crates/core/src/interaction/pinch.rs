use super::{HandSource, ImplicitIntent, IntentKind, InteractionError, PinchConfig};
use crate::model::{FrameDuration, HandState, Handedness};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Released,
    Pinched { since: u64, long_fired: bool },
}

/// Hysteresis state machine for one hand's pinch.
///
/// Begins below `enter`, ends above `exit`, and reports one long pinch once
/// the pinch has been held for `long_hold` seconds. Losing tracking while
/// pinched ends the pinch.
#[derive(Debug, Clone)]
pub struct PinchTracker {
    hand: Handedness,
    config: PinchConfig,
    long_frames: u64,
    phase: Phase,
    last_frame: Option<u64>,
}

impl PinchTracker {
    pub fn new(hand: Handedness, config: PinchConfig, frame_duration: FrameDuration) -> Self {
        Self {
            hand,
            config,
            long_frames: frame_duration.frames_for(config.long_hold),
            phase: Phase::Released,
            last_frame: None,
        }
    }

    pub fn is_pinched(&self) -> bool {
        matches!(self.phase, Phase::Pinched { .. })
    }

    pub fn hand(&self) -> Handedness {
        self.hand
    }

    pub fn update(&mut self, hand: &HandState, frame_index: u64) -> Result<Vec<ImplicitIntent>, InteractionError> {
        if let Some(last) = self.last_frame {
            if frame_index <= last {
                return Err(InteractionError::NonMonotonicFrame { last, got: frame_index });
            }
        }
        self.last_frame = Some(frame_index);
        let emit = |kind| ImplicitIntent {
            frame_index,
            kind,
            source: HandSource::from(self.hand),
            confidence: 1.0,
        };
        let mut out = Vec::new();
        match self.phase {
            Phase::Released => {
                if hand.is_tracked() && hand.pinch_distance() < self.config.enter {
                    self.phase = Phase::Pinched {
                        since: frame_index,
                        long_fired: false,
                    };
                    out.push(emit(IntentKind::PinchBegan));
                }
            }
            Phase::Pinched { .. } => {
                if !hand.is_tracked() || hand.pinch_distance() > self.config.exit {
                    self.phase = Phase::Released;
                    out.push(emit(IntentKind::PinchEnded));
                }
            }
        }
        if let Phase::Pinched { since, long_fired } = &mut self.phase {
            if !*long_fired && frame_index - *since >= self.long_frames {
                *long_fired = true;
                out.push(emit(IntentKind::LongPinch));
            }
        }
        Ok(out)
    }
}
