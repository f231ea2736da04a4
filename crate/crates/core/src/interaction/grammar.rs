use std::collections::BTreeSet;

use super::{
    resolve_target, selection_ray, Behaviors, DragUpdate, ExplicitEvent, ExplicitKind, GrammarConfig, HandSource,
    ImplicitIntent, IntentKind, InteractionError, PinchTracker, SwipeTracker, Target, TargetId,
};
use crate::model::{FrameDuration, HandJoint, Handedness, UserState};
use crate::perception::DepthFrame;

/// A pinch that begins within this distance (along the depth camera axis) of
/// the sensed surface also reports `grab`.
pub const GRAB_SURFACE_DISTANCE: f64 = 0.05;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrammarOutput {
    pub intents: Vec<ImplicitIntent>,
    pub events: Vec<ExplicitEvent>,
    pub drags: Vec<DragUpdate>,
}

/// Per-frame recognizer for both hands.
///
/// Emission order within a frame: for the left then the right hand, pinch
/// intents, grab/release and swipe; then injected voice commands. Explicit
/// events follow the same hand order: select, uiTouch and dragStart on pinch
/// begin, dragEnd on pinch end, then dragMove for held drags, then fingertip
/// uiTouch contacts.
#[derive(Debug, Clone)]
pub struct Grammar {
    config: GrammarConfig,
    pinch: [PinchTracker; 2],
    swipe: [SwipeTracker; 2],
    grabbing: [bool; 2],
    touching: BTreeSet<(Handedness, TargetId)>,
}

impl Grammar {
    pub fn new(config: GrammarConfig, frame_duration: FrameDuration) -> Result<Self, InteractionError> {
        config.validate()?;
        Ok(Self {
            config,
            pinch: Handedness::BOTH.map(|h| PinchTracker::new(h, config.pinch, frame_duration)),
            swipe: Handedness::BOTH.map(|_| SwipeTracker::new(config.swipe, frame_duration)),
            grabbing: [false; 2],
            touching: BTreeSet::new(),
        })
    }

    pub fn config(&self) -> &GrammarConfig {
        &self.config
    }

    pub fn is_pinched(&self, hand: Handedness) -> bool {
        self.pinch[hand.index()].is_pinched()
    }

    /// True when either hand holds a pinch.
    pub fn pinch_active(&self) -> bool {
        self.pinch.iter().any(PinchTracker::is_pinched)
    }

    pub fn process<H>(
        &mut self,
        frame_index: u64,
        user: &UserState,
        targets: &[Target],
        depth: Option<&DepthFrame>,
        voice_commands: &[String],
        behaviors: &mut Behaviors<H>,
    ) -> Result<GrammarOutput, InteractionError> {
        let mut out = GrammarOutput::default();
        let ray = selection_ray(user);
        let mut started_drag = [false; 2];

        for hand in Handedness::BOTH {
            let state = user.hand(hand);
            let source = HandSource::from(hand);
            let intents = self.pinch[hand.index()].update(state, frame_index)?;
            for intent in intents {
                match intent.kind {
                    IntentKind::PinchBegan => {
                        out.intents.push(intent);
                        if depth.is_some_and(|d| near_surface(d, state.pinch_point())) {
                            self.grabbing[hand.index()] = true;
                            out.intents.push(simple(frame_index, IntentKind::Grab, source));
                        }
                        let hit = resolve_target(&ray, targets);
                        let target = hit.as_ref().map(|(id, _)| id.clone());
                        out.events.push(explicit(
                            frame_index,
                            ExplicitKind::Select,
                            target.clone(),
                            &ray,
                            source,
                        ));
                        if let Some((id, distance)) = hit {
                            let node = targets.iter().find(|t| t.id == id).expect("resolved target exists");
                            if node.touchable {
                                out.events.push(explicit(
                                    frame_index,
                                    ExplicitKind::UiTouch,
                                    Some(id.clone()),
                                    &ray,
                                    source,
                                ));
                            }
                            if behaviors.is_draggable(&id) && behaviors.dragging(hand).is_none() {
                                behaviors.begin_drag(hand, node, &ray, distance);
                                started_drag[hand.index()] = true;
                                out.events
                                    .push(explicit(frame_index, ExplicitKind::DragStart, Some(id), &ray, source));
                            }
                        }
                    }
                    IntentKind::PinchEnded => {
                        out.intents.push(intent);
                        if std::mem::take(&mut self.grabbing[hand.index()]) {
                            out.intents.push(simple(frame_index, IntentKind::Release, source));
                        }
                        if let Some(id) = behaviors.end_drag(hand) {
                            out.events
                                .push(explicit(frame_index, ExplicitKind::DragEnd, Some(id), &ray, source));
                        }
                    }
                    _ => out.intents.push(intent),
                }
            }
            let wrist = state.is_tracked().then(|| state.joint(HandJoint::Wrist));
            if let Some((direction, confidence)) = self.swipe[hand.index()].update(frame_index, wrist) {
                out.intents.push(ImplicitIntent {
                    frame_index,
                    kind: IntentKind::Swipe { direction },
                    source,
                    confidence,
                });
            }
        }

        for text in voice_commands {
            out.intents.push(simple(
                frame_index,
                IntentKind::VoiceCommand { text: text.clone() },
                HandSource::None,
            ));
        }

        for hand in Handedness::BOTH {
            if started_drag[hand.index()] || !self.is_pinched(hand) {
                continue;
            }
            if let Some(update) = behaviors.update_drag(hand, &ray) {
                out.events.push(explicit(
                    frame_index,
                    ExplicitKind::DragMove,
                    Some(update.target.clone()),
                    &ray,
                    HandSource::from(hand),
                ));
                out.drags.push(update);
            }
        }

        let mut touching = BTreeSet::new();
        for hand in Handedness::BOTH {
            let state = user.hand(hand);
            if !state.is_tracked() {
                continue;
            }
            let tip = state.joint(HandJoint::IndexTip);
            for target in targets.iter().filter(|t| t.touchable) {
                let local = target.pose.inverse_transform_point(tip);
                if local.abs().cmple(target.half_extents).all() {
                    let key = (hand, target.id.clone());
                    if !self.touching.contains(&key) {
                        out.events.push(ExplicitEvent {
                            frame_index,
                            kind: ExplicitKind::UiTouch,
                            target: Some(target.id.clone()),
                            ray: crate::math::Ray {
                                origin: tip,
                                direction: ray.direction,
                            },
                            source: HandSource::from(hand),
                        });
                    }
                    touching.insert(key);
                }
            }
        }
        self.touching = touching;
        Ok(out)
    }
}

fn near_surface(depth: &DepthFrame, point: glam::DVec3) -> bool {
    let Some(proj) = depth.project(point) else {
        return false;
    };
    let Some((x, y)) = depth.pixel_index(proj.pixel) else {
        return false;
    };
    depth
        .depth_at(x, y)
        .is_some_and(|stored| (stored - proj.depth).abs() <= GRAB_SURFACE_DISTANCE)
}

fn simple(frame_index: u64, kind: IntentKind, source: HandSource) -> ImplicitIntent {
    ImplicitIntent {
        frame_index,
        kind,
        source,
        confidence: 1.0,
    }
}

fn explicit(
    frame_index: u64,
    kind: ExplicitKind,
    target: Option<TargetId>,
    ray: &crate::math::Ray,
    source: HandSource,
) -> ExplicitEvent {
    ExplicitEvent {
        frame_index,
        kind,
        target,
        ray: *ray,
        source,
    }
}
