//! Built-in sample scripts.

use std::collections::{BTreeMap, BTreeSet};

use glam::DVec3;

use super::script::{Script, ScriptApi, ScriptResult};
use super::ui::{UiNode, UiNodeKind};
use super::{DEFAULT_AGENT, MOCK_BACKEND, RPS_MODEL};
use crate::ai::{ModelResponse, RequestId, ResponseStatus};
use crate::interaction::{ExplicitEvent, ImplicitIntent, IntentKind, TargetId};
use crate::math::Pose;
use crate::model::Handedness;

/// Names accepted by [`sample_script`].
pub const SAMPLE_SCRIPTS: &[&str] = &[
    "empty",
    "poem-on-pinch",
    "ballpit",
    "long-pinch-labels",
    "rock-paper-scissors",
];

/// Looks up a sample by name. Case, `-` and `_` are ignored, so
/// `PoemOnPinch` and `poem-on-pinch` both work.
pub fn sample_script(name: &str) -> Option<Box<dyn Script>> {
    let key: String = name
        .chars()
        .filter(|c| *c != '-' && *c != '_')
        .map(|c| c.to_ascii_lowercase())
        .collect();
    Some(match key.as_str() {
        "empty" => Box::new(EmptyScript),
        "poemonpinch" => Box::new(PoemOnPinch::default()),
        "ballpit" => Box::new(Ballpit),
        "longpinchlabels" => Box::new(LongPinchLabels::default()),
        "rockpaperscissors" | "rps" => Box::new(RockPaperScissors::default()),
        _ => return None,
    })
}

fn at(x: f64, y: f64, z: f64) -> Pose {
    Pose::from_position(DVec3::new(x, y, z)).expect("finite literal")
}

fn response_text(response: &ModelResponse) -> &str {
    match (response.status, &response.text) {
        (ResponseStatus::Ok, Some(text)) => text,
        _ => "(error)",
    }
}

/// Does nothing.
#[derive(Debug, Default)]
pub struct EmptyScript;

impl Script for EmptyScript {
    fn update(&mut self, _api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        Ok(())
    }
}

/// Asks for a poem about whichever object the user pinch-selects and shows
/// it in a text view.
///
/// Queries fire once when a selection starts, not every frame it is held.
#[derive(Debug, Default)]
pub struct PoemOnPinch {
    selecting: BTreeSet<String>,
    pending: BTreeSet<RequestId>,
}

impl PoemOnPinch {
    pub const TEXT_VIEW: &'static str = "poem";
}

impl Script for PoemOnPinch {
    fn init(&mut self, api: &mut ScriptApi<'_>) -> ScriptResult {
        api.add_node(UiNode::new(Self::TEXT_VIEW, UiNodeKind::TextView, at(0.8, 1.9, -1.2)).with_text(""))
    }

    fn update(&mut self, api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        let objects: Vec<(String, String)> = api
            .find_objects(None)
            .into_iter()
            .map(|o| (o.id.clone(), o.label.clone()))
            .collect();
        for (id, label) in objects {
            let now = api.is_selecting_at(&TargetId::Object(id.clone()));
            if now && self.selecting.insert(id.clone()) {
                let request = api.agent_query(DEFAULT_AGENT, MOCK_BACKEND, &format!("Write a poem with {label}"))?;
                self.pending.insert(request);
            } else if !now {
                self.selecting.remove(&id);
            }
        }
        Ok(())
    }

    fn on_response(&mut self, api: &mut ScriptApi<'_>, response: &ModelResponse) -> ScriptResult {
        if self.pending.remove(&response.request_id) {
            api.set_text(Self::TEXT_VIEW, response_text(response))?;
        }
        Ok(())
    }
}

/// Throws a ball along the selection ray on every select.
#[derive(Debug, Default)]
pub struct Ballpit;

impl Ballpit {
    pub const LAUNCH_SPEED: f64 = 3.0;
}

impl Script for Ballpit {
    fn update(&mut self, _api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        Ok(())
    }

    fn on_select(&mut self, api: &mut ScriptApi<'_>, event: &ExplicitEvent) -> ScriptResult {
        api.spawn_sphere(event.ray.origin, event.ray.direction * Self::LAUNCH_SPEED)?;
        Ok(())
    }
}

/// Long-pinch an object to attach a panel and an "ask" button above it;
/// touching the button asks the assistant about the object.
#[derive(Debug, Default)]
pub struct LongPinchLabels {
    /// Button id to (object label, panel id).
    buttons: BTreeMap<String, (String, String)>,
    /// Request to the panel that shows its answer.
    pending: BTreeMap<RequestId, String>,
}

impl LongPinchLabels {
    pub fn panel_id(object: &str) -> String {
        format!("panel-{object}")
    }

    pub fn button_id(object: &str) -> String {
        format!("button-{object}")
    }
}

impl Script for LongPinchLabels {
    fn update(&mut self, _api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        Ok(())
    }

    fn on_intent(&mut self, api: &mut ScriptApi<'_>, intent: &ImplicitIntent) -> ScriptResult {
        if intent.kind != IntentKind::LongPinch {
            return Ok(());
        }
        let Some(TargetId::Object(id)) = api.selection_target() else {
            return Ok(());
        };
        let panel = Self::panel_id(&id);
        if api.node(&panel).is_some() {
            return Ok(());
        }
        let object = api.object(&id).expect("selection targets exist").clone();
        let top = object.pose.position() + DVec3::new(0.0, object.half_extents.y + 0.25, 0.0);
        let panel_pose = Pose::new(top, object.pose.orientation())?;
        let button_pose = Pose::new(top + DVec3::new(0.0, -0.1, 0.03), object.pose.orientation())?;
        let button = Self::button_id(&id);
        api.add_node(UiNode::new(&panel, UiNodeKind::Panel, panel_pose).with_text(object.label.clone()))?;
        api.add_node(
            UiNode::new(&button, UiNodeKind::Button, button_pose).with_text(format!("Ask about {}", object.label)),
        )?;
        self.buttons.insert(button, (object.label, panel));
        Ok(())
    }

    fn on_ui_touch(&mut self, api: &mut ScriptApi<'_>, event: &ExplicitEvent) -> ScriptResult {
        let Some(TargetId::Ui(button)) = &event.target else {
            return Ok(());
        };
        let Some((label, panel)) = self.buttons.get(button).cloned() else {
            return Ok(());
        };
        let request = api.agent_query(DEFAULT_AGENT, MOCK_BACKEND, &format!("Tell me about the {label}"))?;
        self.pending.insert(request, panel);
        Ok(())
    }

    fn on_response(&mut self, api: &mut ScriptApi<'_>, response: &ModelResponse) -> ScriptResult {
        if let Some(panel) = self.pending.remove(&response.request_id) {
            if api.node(&panel).is_some() {
                api.set_text(&panel, response_text(response))?;
            }
        }
        Ok(())
    }
}

/// Classifies the right hand (or the left when the right is not tracked)
/// every few frames and shows the label.
#[derive(Debug, Default)]
pub struct RockPaperScissors {
    last: Option<String>,
}

impl RockPaperScissors {
    pub const TEXT_VIEW: &'static str = "rps-label";
    pub const PERIOD_FRAMES: u64 = 10;
}

impl Script for RockPaperScissors {
    fn init(&mut self, api: &mut ScriptApi<'_>) -> ScriptResult {
        api.add_node(UiNode::new(Self::TEXT_VIEW, UiNodeKind::TextView, at(0.0, 2.0, -1.5)).with_text("show a hand"))
    }

    fn update(&mut self, api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        if api.frame_index() % Self::PERIOD_FRAMES != 0 {
            return Ok(());
        }
        let hand = [Handedness::Right, Handedness::Left]
            .into_iter()
            .find(|h| api.user().hand(*h).is_tracked());
        let Some(hand) = hand else {
            return Ok(());
        };
        let (label, _) = api.run_model(RPS_MODEL, hand)?;
        if self.last.as_deref() != Some(label.as_str()) {
            api.set_text(Self::TEXT_VIEW, label.clone())?;
            self.last = Some(label);
        }
        Ok(())
    }
}
