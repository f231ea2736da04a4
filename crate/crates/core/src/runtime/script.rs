use std::collections::BTreeMap;

use glam::DVec3;
use serde_json::{json, Map, Value};

use super::ui::{UiNode, UiScene};
use super::RuntimeError;
use crate::ai::{Agent, AiHub, GestureModel, ModelResponse, QueryOptions, RequestId};
use crate::interaction::{
    is_selecting_at, resolve_target, selection_ray, Behaviors, ExplicitEvent, Grammar, ImplicitIntent, Target, TargetId,
};
use crate::math::{Pose, Ray};
use crate::model::{Handedness, RealityModel, UserState, WorldObject};
use crate::perception::{occlusion_test, raycast_depth, DepthFrame, DepthHit, Occlusion, PerceptionConfig};
use crate::physics::{PhysicsWorld, RigidSphere};
use crate::trace::{Category, LogEntry};

pub type ScriptResult = Result<(), RuntimeError>;

/// Per-node select callback registered through [`ScriptApi::make_selectable`].
pub type SelectHandler = Box<dyn FnMut(&mut ScriptApi<'_>, &ExplicitEvent) -> ScriptResult + Send>;

/// Application logic driven by the frame loop. Only `update` is required.
///
/// Callbacks must touch the session only through the [`ScriptApi`] handle.
pub trait Script: Send {
    fn init(&mut self, _api: &mut ScriptApi<'_>) -> ScriptResult {
        Ok(())
    }

    fn update(&mut self, api: &mut ScriptApi<'_>, dt: f64) -> ScriptResult;

    /// Every select event, targeted or not.
    fn on_select(&mut self, _api: &mut ScriptApi<'_>, _event: &ExplicitEvent) -> ScriptResult {
        Ok(())
    }

    fn on_intent(&mut self, _api: &mut ScriptApi<'_>, _intent: &ImplicitIntent) -> ScriptResult {
        Ok(())
    }

    /// Pinch-selects and fingertip presses on buttons.
    fn on_ui_touch(&mut self, _api: &mut ScriptApi<'_>, _event: &ExplicitEvent) -> ScriptResult {
        Ok(())
    }

    fn on_response(&mut self, _api: &mut ScriptApi<'_>, _response: &ModelResponse) -> ScriptResult {
        Ok(())
    }
}

/// Everything a session owns except the script itself.
pub(crate) struct SessionState {
    pub model: RealityModel,
    pub ui: UiScene,
    pub behaviors: Behaviors<SelectHandler>,
    pub grammar: Grammar,
    pub hub: AiHub,
    pub agents: BTreeMap<String, Agent>,
    pub gesture_models: BTreeMap<String, GestureModel>,
    pub physics: PhysicsWorld,
    pub perception: PerceptionConfig,
    pub sphere_occlusion: BTreeMap<String, Occlusion>,
    /// Entries of the frame in progress.
    pub pending: Vec<LogEntry>,
}

impl SessionState {
    pub fn frame(&self) -> u64 {
        self.model.frame_index
    }

    pub fn log(&mut self, category: Category, payload: Value) {
        self.pending
            .push(LogEntry::new(self.model.frame_index, category, payload));
    }

    pub fn depth(&self) -> Option<&DepthFrame> {
        self.model.world.depth.as_deref()
    }

    /// World objects and visible UI nodes; buttons are touchable.
    pub fn targets(&self) -> Vec<Target> {
        let objects = self.model.world.objects().iter().map(|o| Target {
            id: TargetId::Object(o.id.clone()),
            pose: o.pose,
            half_extents: o.half_extents,
            touchable: false,
        });
        let nodes = self.ui.nodes().filter(|n| n.visible).map(|n| Target {
            id: TargetId::Ui(n.id.clone()),
            pose: n.pose,
            half_extents: n.half_extents,
            touchable: n.kind == super::UiNodeKind::Button,
        });
        objects.chain(nodes).collect()
    }

    pub fn spawn_sphere(&mut self, at: DVec3, velocity: DVec3) -> Result<String, RuntimeError> {
        let sphere = self.physics.spawn(at, velocity)?.clone();
        self.log(
            Category::Physics,
            json!({
                "event": "spawn",
                "id": sphere.id,
                "position": sphere.position.to_array(),
                "velocity": sphere.velocity.to_array(),
                "radius": sphere.radius,
            }),
        );
        Ok(sphere.id)
    }
}

/// The handle scripts use to read and change the session.
pub struct ScriptApi<'a> {
    pub(crate) state: &'a mut SessionState,
}

impl<'a> ScriptApi<'a> {
    pub(crate) fn new(state: &'a mut SessionState) -> Self {
        Self { state }
    }

    pub fn frame_index(&self) -> u64 {
        self.state.frame()
    }

    pub fn time_seconds(&self) -> f64 {
        self.state.model.time_seconds()
    }

    pub fn model(&self) -> &RealityModel {
        &self.state.model
    }

    pub fn user(&self) -> &UserState {
        &self.state.model.user
    }

    pub fn find_objects(&self, label: Option<&str>) -> Vec<&WorldObject> {
        self.state.model.world.find_objects(label)
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.state.model.world.object(id)
    }

    /// Appends a free-form `script` entry.
    pub fn log(&mut self, message: impl Into<String>) {
        let message = message.into();
        self.state
            .log(Category::Script, json!({"event": "log", "message": message}));
    }

    // --- UI scene ---

    pub fn node(&self, id: &str) -> Option<&UiNode> {
        self.state.ui.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &UiNode> {
        self.state.ui.nodes()
    }

    pub fn add_node(&mut self, node: UiNode) -> ScriptResult {
        let payload = json!({"op": "addNode", "node": serde_json::to_value(&node).expect("node serializes")});
        self.state.ui.add(node)?;
        self.state.log(Category::Ui, payload);
        Ok(())
    }

    pub fn remove_node(&mut self, id: &str) -> ScriptResult {
        self.state.ui.remove(id)?;
        self.state.behaviors.forget(&TargetId::Ui(id.to_string()));
        self.state.log(Category::Ui, json!({"op": "removeNode", "id": id}));
        Ok(())
    }

    pub fn set_text(&mut self, id: &str, text: impl Into<String>) -> ScriptResult {
        let text = text.into();
        self.state.ui.get_mut(id)?.text = Some(text.clone());
        self.state
            .log(Category::Ui, json!({"op": "setText", "id": id, "text": text}));
        Ok(())
    }

    pub fn set_pose(&mut self, id: &str, pose: Pose) -> ScriptResult {
        self.state.ui.get_mut(id)?.pose = pose;
        self.state
            .log(Category::Ui, json!({"op": "setPose", "id": id, "pose": pose}));
        Ok(())
    }

    pub fn set_visible(&mut self, id: &str, visible: bool) -> ScriptResult {
        self.state.ui.get_mut(id)?.visible = visible;
        self.state
            .log(Category::Ui, json!({"op": "setVisible", "id": id, "visible": visible}));
        Ok(())
    }

    // --- interaction ---

    pub fn make_selectable(&mut self, id: TargetId, handler: SelectHandler) -> ScriptResult {
        let targets = self.state.targets();
        self.state.behaviors.make_selectable(id, handler, &targets)?;
        Ok(())
    }

    pub fn make_draggable(&mut self, id: TargetId) -> ScriptResult {
        let targets = self.state.targets();
        self.state.behaviors.make_draggable(id, &targets)?;
        Ok(())
    }

    pub fn selection_ray(&self) -> Ray {
        selection_ray(&self.state.model.user)
    }

    /// Nearest target on the selection ray.
    pub fn selection_target(&self) -> Option<TargetId> {
        let targets = self.state.targets();
        resolve_target(&self.selection_ray(), &targets).map(|(id, _)| id)
    }

    /// True while a pinch is held and the selection ray rests on `target`.
    pub fn is_selecting_at(&self, target: &TargetId) -> bool {
        let targets = self.state.targets();
        is_selecting_at(
            &self.state.model.user,
            target,
            self.state.grammar.pinch_active(),
            &targets,
        )
    }

    // --- perception ---

    pub fn depth(&self) -> Option<&DepthFrame> {
        self.state.depth()
    }

    pub fn raycast_depth(&self, ray: &Ray, max_distance: f64) -> ApiResult<Option<DepthHit>> {
        match self.state.depth() {
            None => Ok(None),
            Some(frame) => Ok(raycast_depth(
                frame,
                ray.origin,
                ray.direction,
                max_distance,
                &self.state.perception,
            )?),
        }
    }

    pub fn occlusion(&self, point: DVec3) -> Occlusion {
        match self.state.depth() {
            None => Occlusion::Unknown,
            Some(frame) => occlusion_test(frame, point, &self.state.perception),
        }
    }

    // --- physics ---

    pub fn spawn_sphere(&mut self, at: DVec3, velocity: DVec3) -> ApiResult<String> {
        self.state.spawn_sphere(at, velocity)
    }

    pub fn spheres(&self) -> &[RigidSphere] {
        self.state.physics.spheres()
    }

    // --- AI ---

    /// Sends `prompt` verbatim to `backend`.
    pub fn query(&mut self, backend: &str, prompt: &str, options: QueryOptions) -> ApiResult<RequestId> {
        let frame = self.state.frame();
        let request = self.state.hub.query(backend, prompt, options, frame)?;
        self.state.log(
            Category::Ai,
            json!({"event": "request", "requestId": request.request_id, "backend": backend, "prompt": prompt}),
        );
        Ok(request.request_id)
    }

    /// Sends `prompt` through `agent`'s persona and recent memory.
    pub fn agent_query(&mut self, agent: &str, backend: &str, prompt: &str) -> ApiResult<RequestId> {
        let composed = self
            .state
            .agents
            .get(agent)
            .ok_or_else(|| RuntimeError::UnknownAgent(agent.into()))?
            .compose(prompt);
        let frame = self.state.frame();
        let request = self
            .state
            .hub
            .query(backend, composed.clone(), QueryOptions::default(), frame)?;
        self.state.log(
            Category::Ai,
            json!({
                "event": "request",
                "requestId": request.request_id,
                "backend": backend,
                "agent": agent,
                "prompt": composed,
            }),
        );
        Ok(request.request_id)
    }

    pub fn add_agent(&mut self, agent: Agent) -> ScriptResult {
        if self.state.agents.contains_key(agent.id()) {
            return Err(RuntimeError::DuplicateNode(agent.id().to_string()));
        }
        self.state.model.agents.push(agent.id().to_string());
        self.state.agents.insert(agent.id().to_string(), agent);
        Ok(())
    }

    pub fn agent_mut(&mut self, id: &str) -> ApiResult<&mut Agent> {
        self.state
            .agents
            .get_mut(id)
            .ok_or_else(|| RuntimeError::UnknownAgent(id.into()))
    }

    pub fn use_tool(&mut self, agent: &str, tool: &str, args: &Map<String, Value>) -> ApiResult<String> {
        let state = &mut *self.state;
        let frame = state.model.frame_index;
        let a = state
            .agents
            .get(agent)
            .ok_or_else(|| RuntimeError::UnknownAgent(agent.into()))?;
        let result = a.use_tool(tool, args, frame, &mut state.model.context)?;
        state.log(
            Category::Ai,
            json!({"event": "tool", "agent": agent, "tool": tool, "args": Value::Object(args.clone()), "result": result}),
        );
        Ok(result)
    }

    /// Classifies `hand` with a registered gesture model.
    pub fn run_model(&mut self, model: &str, hand: Handedness) -> ApiResult<(String, f64)> {
        let m = self
            .state
            .gesture_models
            .get(model)
            .ok_or_else(|| RuntimeError::UnknownModel(model.into()))?;
        let (label, confidence) = m.run(self.state.model.user.hand(hand))?;
        self.state.log(
            Category::Ai,
            json!({"event": "runModel", "model": model, "hand": hand.as_str(), "label": label, "confidence": confidence}),
        );
        Ok((label, confidence))
    }

    pub fn register_model(&mut self, name: impl Into<String>, model: GestureModel) {
        self.state.gesture_models.insert(name.into(), model);
    }
}

pub type ApiResult<T> = Result<T, RuntimeError>;
