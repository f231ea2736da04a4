use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use serde_json::{json, Value};

use super::script::{Script, ScriptApi, ScriptResult, SessionState};
use super::ui::UiScene;
use super::{RunOptions, RuntimeError, DEFAULT_AGENT, MOCK_BACKEND, RPS_MODEL};
use crate::ai::{Agent, AiHub, GestureModel, MockBackend};
use crate::interaction::{Behaviors, ExplicitEvent, ExplicitKind, Grammar, GrammarConfig, TargetId};
use crate::math::{ray_box, Ray};
use crate::model::RealityModel;
use crate::perception::occlusion_test;
use crate::physics::PhysicsWorld;
use crate::trace::{Category, EventLog, InputTrace, SceneFile, TraceFrame};

const RPS_MODEL_JSON: &str = include_str!("../../data/rps_gesture_model.json");
const DEFAULT_PERSONA: &str = "a helpful mixed-reality assistant";

/// What one tick produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickOutcome {
    pub frame_index: u64,
    /// Index of the first log entry written by this tick.
    pub first_entry: usize,
    pub halted: bool,
}

/// A running script over one scene. Feed it trace frames in order.
pub struct Session {
    state: SessionState,
    script: Box<dyn Script>,
    log: EventLog,
    recorded: InputTrace,
    next_frame: u64,
    halted: bool,
    closed: bool,
}

impl Session {
    /// Builds the session and runs the script's `init` at frame 0.
    pub fn new(
        scene: &SceneFile,
        script: Box<dyn Script>,
        grammar: GrammarConfig,
        options: &RunOptions,
    ) -> Result<Self, RuntimeError> {
        let mut model = RealityModel {
            world: scene.world_state()?,
            ..RealityModel::default()
        };
        model.world.depth = scene.depth_frame()?.map(Arc::new);
        let fd = model.frame_duration;

        let mut hub = AiHub::new(fd);
        if let Some(mock) = &options.mock {
            hub.register(MOCK_BACKEND, Box::new(MockBackend::new(mock.clone())))?;
        }
        let persona = options.persona.as_deref().unwrap_or(DEFAULT_PERSONA);
        let mut agents = BTreeMap::new();
        agents.insert(DEFAULT_AGENT.to_string(), Agent::new(DEFAULT_AGENT, persona));
        model.agents.push(DEFAULT_AGENT.to_string());
        let mut gesture_models = BTreeMap::new();
        gesture_models.insert(RPS_MODEL.to_string(), GestureModel::from_json(RPS_MODEL_JSON)?);

        let state = SessionState {
            model,
            ui: UiScene::default(),
            behaviors: Behaviors::default(),
            grammar: Grammar::new(grammar, fd)?,
            hub,
            agents,
            gesture_models,
            physics: PhysicsWorld::new(scene.physics)?,
            perception: scene.perception,
            sphere_occlusion: BTreeMap::new(),
            pending: Vec::new(),
        };
        let mut session = Self {
            state,
            script,
            log: EventLog::new(),
            recorded: InputTrace {
                grammar,
                ..InputTrace::default()
            },
            next_frame: 0,
            halted: false,
            closed: false,
        };
        session.invoke("init", |s, api| s.init(api));
        session.flush()?;
        Ok(session)
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// Every frame ingested so far, as a replayable trace.
    pub fn recorded_trace(&self) -> &InputTrace {
        &self.recorded
    }

    pub fn model(&self) -> &RealityModel {
        &self.state.model
    }

    pub fn ui(&self) -> &UiScene {
        &self.state.ui
    }

    /// Frames ticked so far.
    pub fn frames_run(&self) -> u64 {
        self.next_frame
    }

    /// Runs one frame. Frames must arrive with dense indices from 0.
    pub fn tick(&mut self, frame: &TraceFrame) -> Result<TickOutcome, RuntimeError> {
        if self.halted || self.closed {
            return Err(RuntimeError::Halted);
        }
        if frame.frame_index != self.next_frame {
            return Err(RuntimeError::FrameOutOfSequence {
                expected: self.next_frame,
                got: frame.frame_index,
            });
        }
        let first_entry = self.log.len();
        let index = frame.frame_index;

        // (1) ingest
        let user = frame.user_state()?;
        self.state.model.frame_index = index;
        self.state.model.user = user;
        self.recorded.frames.push(frame.clone());
        self.next_frame += 1;

        self.run_phases(frame)?;
        self.state.model.interfaces = self.state.ui.nodes().map(|n| n.id.clone()).collect();

        // (7) append
        self.flush()?;
        Ok(TickOutcome {
            frame_index: index,
            first_entry,
            halted: self.halted,
        })
    }

    fn run_phases(&mut self, frame: &TraceFrame) -> Result<(), RuntimeError> {
        let index = frame.frame_index;

        // (2) grammar
        let targets = self.state.targets();
        let depth = self.state.model.world.depth.clone();
        let voice = frame.voice_commands();
        let state = &mut self.state;
        let out = state.grammar.process(
            index,
            &state.model.user,
            &targets,
            depth.as_deref(),
            &voice,
            &mut state.behaviors,
        )?;
        for intent in &out.intents {
            let payload = without_frame(serde_json::to_value(intent).expect("intent serializes"));
            self.state.record_context("intent", &payload);
            self.state.log(Category::Intent, payload);
        }
        for event in &out.events {
            let payload = without_frame(serde_json::to_value(event).expect("event serializes"));
            self.state.record_context("explicit", &payload);
            self.state.log(Category::Explicit, payload);
        }

        // (3) AI responses
        for response in self.state.hub.drain(index) {
            self.log_response(&response);
            if !self.invoke("onResponse", |s, api| s.on_response(api, &response)) {
                return Ok(());
            }
        }

        // (4) dispatch
        for drag in &out.drags {
            match &drag.target {
                TargetId::Ui(id) => {
                    if let Ok(node) = self.state.ui.get_mut(id) {
                        node.pose = drag.pose;
                        self.state
                            .log(Category::Ui, json!({"op": "setPose", "id": id, "pose": drag.pose}));
                    }
                }
                TargetId::Object(id) => {
                    if self.state.model.world.set_object_pose(id, drag.pose).is_ok() {
                        self.state.log(
                            Category::Ui,
                            json!({"op": "setObjectPose", "id": id, "pose": drag.pose}),
                        );
                    }
                }
            }
        }
        for intent in &out.intents {
            if !self.invoke("onIntent", |s, api| s.on_intent(api, intent)) {
                return Ok(());
            }
        }
        for event in &out.events {
            let ok = match event.kind {
                ExplicitKind::Select => {
                    self.invoke("onSelect", |s, api| s.on_select(api, event)) && self.invoke_handler(event)
                }
                ExplicitKind::UiTouch => self.invoke("onUiTouch", |s, api| s.on_ui_touch(api, event)),
                _ => true,
            };
            if !ok {
                return Ok(());
            }
        }

        // (5) update
        let dt = self.state.model.frame_duration.seconds();
        self.state.log(Category::Script, json!({"event": "update", "dt": dt}));
        if !self.invoke("update", |s, api| s.update(api, dt)) {
            return Ok(());
        }

        // (6) physics
        for spawn in &frame.spawns {
            if let Err(e) = self.state.spawn_sphere(spawn.position, spawn.velocity) {
                self.state.log(
                    Category::Physics,
                    json!({"event": "spawnRejected", "reason": e.to_string()}),
                );
            }
        }
        let result = self.state.physics.step(depth.as_deref())?;
        for c in &result.collisions {
            let mut payload = serde_json::to_value(c).expect("collision serializes");
            payload["event"] = "collision".into();
            self.state.log(Category::Physics, payload);
        }
        if let Some(depth) = depth.as_deref() {
            for sphere in result.spheres {
                let now = occlusion_test(depth, sphere.position, &self.state.perception);
                if self.state.sphere_occlusion.insert(sphere.id.clone(), now) != Some(now) {
                    self.state.log(
                        Category::Physics,
                        json!({"event": "occlusion", "id": sphere.id, "state": now.as_str()}),
                    );
                }
            }
        }
        Ok(())
    }

    fn log_response(&mut self, response: &crate::ai::ModelResponse) {
        let mut payload = serde_json::to_value(response).expect("response serializes");
        payload["event"] = "response".into();
        self.state.log(Category::Ai, payload);
    }

    /// Calls into the script, converting errors and panics into a logged
    /// `script-error` and a halt. Returns false when the session halted.
    fn invoke<F>(&mut self, callback: &'static str, f: F) -> bool
    where
        F: FnOnce(&mut dyn Script, &mut ScriptApi<'_>) -> ScriptResult,
    {
        let state = &mut self.state;
        let script = &mut *self.script;
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            let mut api = ScriptApi::new(state);
            f(script, &mut api)
        }));
        self.check(callback, outcome)
    }

    fn invoke_handler(&mut self, event: &ExplicitEvent) -> bool {
        let Some(target) = &event.target else {
            return true;
        };
        let Some(mut handler) = self.state.behaviors.take_handler(target) else {
            return true;
        };
        let state = &mut self.state;
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            let mut api = ScriptApi::new(state);
            handler(&mut api, event)
        }));
        // The handler may have removed its own node.
        if self.state.targets().iter().any(|t| &t.id == target) {
            self.state.behaviors.restore_handler(target.clone(), handler);
        }
        self.check("selectHandler", outcome)
    }

    fn check(&mut self, callback: &'static str, outcome: std::thread::Result<ScriptResult>) -> bool {
        let message = match outcome {
            Ok(Ok(())) => return true,
            Ok(Err(e)) => e.to_string(),
            Err(panic) => panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into()),
        };
        self.state.log(
            Category::Script,
            json!({"event": "script-error", "callback": callback, "message": message}),
        );
        self.halted = true;
        false
    }

    fn flush(&mut self) -> Result<(), RuntimeError> {
        for entry in self.state.pending.drain(..) {
            self.log.push(entry)?;
        }
        Ok(())
    }

    /// Fails outstanding AI requests and logs them. Further ticks are refused.
    pub fn close(&mut self) -> Result<(), RuntimeError> {
        if self.closed {
            return Ok(());
        }
        self.closed = true;
        for response in self.state.hub.close() {
            self.log_response(&response);
        }
        self.flush()
    }

    pub fn finish(mut self) -> EventLog {
        // Entries only ever carry the current frame, so the flush cannot fail.
        self.close().expect("close keeps frame order");
        self.log
    }

    /// Full view for a live client: UI nodes, objects and spheres with
    /// occlusion flags.
    pub fn snapshot(&self) -> Value {
        let depth = self.state.depth();
        let cfg = &self.state.perception;
        let occlusion = |p| match depth {
            Some(d) => occlusion_test(d, p, cfg).as_str(),
            None => "unknown",
        };
        // An object's own depth proxy would hide its center, so test the
        // point where the camera's line of sight enters its box.
        let object_occlusion = |o: &crate::model::WorldObject| {
            let Some(d) = depth else { return "unknown" };
            let eye = d.camera_pose().position();
            let point = Ray::new(eye, o.pose.position() - eye)
                .ok()
                .and_then(|ray| ray_box(&ray, &o.pose, o.half_extents).map(|t| ray.at(t)))
                .unwrap_or(o.pose.position());
            occlusion_test(d, point, cfg).as_str()
        };
        let nodes: Vec<Value> = self
            .state
            .ui
            .nodes()
            .map(|n| serde_json::to_value(n).expect("node"))
            .collect();
        let objects: Vec<Value> = self
            .state
            .model
            .world
            .find_objects(None)
            .into_iter()
            .map(|o| {
                json!({
                    "id": o.id,
                    "label": o.label,
                    "kind": o.kind,
                    "pose": o.pose,
                    "halfExtents": o.half_extents.to_array(),
                    "occlusion": object_occlusion(o),
                })
            })
            .collect();
        let spheres: Vec<Value> = self
            .state
            .physics
            .spheres()
            .iter()
            .map(|s| {
                json!({
                    "id": s.id,
                    "position": s.position.to_array(),
                    "velocity": s.velocity.to_array(),
                    "radius": s.radius,
                    "occlusion": occlusion(s.position),
                })
            })
            .collect();
        json!({
            "frame": self.state.model.frame_index,
            "nodes": nodes,
            "objects": objects,
            "spheres": spheres,
        })
    }
}

fn without_frame(mut payload: Value) -> Value {
    if let Some(map) = payload.as_object_mut() {
        map.remove("frameIndex");
    }
    payload
}

impl SessionState {
    fn record_context(&mut self, kind: &str, payload: &Value) {
        let frame = self.model.frame_index;
        // Frames are ingested in order, so the push cannot go backwards.
        let _ = self.model.context.push(frame, kind, payload.to_string());
    }
}
