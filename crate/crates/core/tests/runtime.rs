use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use glam::DVec3;
use serde_json::Value;
use xrk_core::ai::{MockRule, MockScript};
use xrk_core::math::Pose;
use xrk_core::runtime::{
    run, sample_script, Ballpit, EmptyScript, LongPinchLabels, PoemOnPinch, RunOptions, RuntimeError, Script,
    ScriptApi, ScriptResult, Session, UiNode, UiNodeKind,
};
use xrk_core::trace::{Category, EventLog, InputTrace, LogEntry, SceneFile, TraceBuilder, TraceFrame};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn room() -> SceneFile {
    SceneFile::from_json(&read("room.scene.json")).unwrap()
}

fn options() -> RunOptions {
    RunOptions::from_json(&read("mock.options.json")).unwrap()
}

fn trace(name: &str) -> InputTrace {
    InputTrace::from_json(&read(name)).unwrap()
}

fn of(log: &EventLog, category: Category, event: &str) -> Vec<LogEntry> {
    log.entries()
        .iter()
        .filter(|e| e.category == category && e.payload["event"] == event)
        .cloned()
        .collect()
}

fn ui_ops(log: &EventLog, op: &str) -> Vec<Value> {
    log.entries()
        .iter()
        .filter(|e| e.category == Category::Ui && e.payload["op"] == op)
        .map(|e| e.payload.clone())
        .collect()
}

fn assert_phase_order(log: &EventLog) {
    let mut updated_frame = None;
    for e in log.entries() {
        if e.category == Category::Script && e.payload["event"] == "update" {
            updated_frame = Some(e.frame);
        }
        if e.category == Category::Intent {
            assert_ne!(updated_frame, Some(e.frame), "intent after update in frame {}", e.frame);
        }
    }
}

#[test]
fn empty_script_logs_only_updates() {
    let mut t = InputTrace::default();
    for i in 0..60 {
        t.frames.push(TraceFrame::new(i, Pose::IDENTITY));
    }
    let log = run(&SceneFile::default(), Box::new(EmptyScript), &t, &RunOptions::default()).unwrap();
    assert_eq!(log.len(), 60);
    for (i, e) in log.entries().iter().enumerate() {
        assert_eq!(e.frame, i as u64);
        assert_eq!(e.category, Category::Script);
        assert_eq!(e.payload["event"], "update");
        assert_eq!(e.payload["dt"], 1.0 / 60.0);
    }
}

#[test]
fn max_frames_limits_the_run() {
    let options = RunOptions {
        max_frames: Some(10),
        ..options()
    };
    let log = run(&room(), Box::new(EmptyScript), &trace("ballpit.trace.json"), &options).unwrap();
    assert_eq!(of(&log, Category::Script, "update").len(), 10);
}

type Results = Arc<Mutex<Vec<Result<(), String>>>>;

struct SceneApiProbe(Results);

impl Script for SceneApiProbe {
    fn init(&mut self, api: &mut ScriptApi<'_>) -> ScriptResult {
        let mut out = self.0.lock().unwrap();
        let mut record = |r: ScriptResult| out.push(r.map_err(|e| e.to_string()));
        record(api.add_node(UiNode::new("tv", UiNodeKind::TextView, Pose::IDENTITY)));
        record(api.set_text("tv", "hi"));
        record(api.add_node(UiNode::new("tv", UiNodeKind::Panel, Pose::IDENTITY)));
        record(api.remove_node("tv"));
        record(api.set_text("tv", "again"));
        Ok(())
    }

    fn update(&mut self, _api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        Ok(())
    }
}

#[test]
fn scene_api_mutations_are_logged_and_checked() {
    let results: Results = Arc::default();
    let session = Session::new(
        &SceneFile::default(),
        Box::new(SceneApiProbe(results.clone())),
        Default::default(),
        &RunOptions::default(),
    )
    .unwrap();
    let results = results.lock().unwrap().clone();
    assert!(results[0].is_ok() && results[1].is_ok());
    assert!(results[2].as_ref().unwrap_err().contains("already exists"));
    assert!(results[3].is_ok());
    assert!(results[4].as_ref().unwrap_err().contains("unknown-id"));
    let log = session.finish();
    let set_text = ui_ops(&log, "setText");
    assert_eq!(
        set_text,
        vec![serde_json::json!({"op": "setText", "id": "tv", "text": "hi"})]
    );
    assert_eq!(ui_ops(&log, "removeNode").len(), 1);
}

struct Panicker;

impl Script for Panicker {
    fn update(&mut self, api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        if api.frame_index() == 5 {
            panic!("boom at five");
        }
        Ok(())
    }
}

struct Failer;

impl Script for Failer {
    fn update(&mut self, api: &mut ScriptApi<'_>, _dt: f64) -> ScriptResult {
        api.set_text("missing", "x")
    }
}

#[test]
fn script_panic_is_logged_and_halts() {
    let mut b = TraceBuilder::default();
    b.frames(20);
    let log = run(
        &SceneFile::default(),
        Box::new(Panicker),
        &b.build(),
        &RunOptions::default(),
    )
    .unwrap();
    let errors = of(&log, Category::Script, "script-error");
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].frame, 5);
    assert_eq!(errors[0].payload["message"], "boom at five");
    assert_eq!(log.entries().last().unwrap().frame, 5);
    assert_eq!(of(&log, Category::Script, "update").len(), 6);
}

#[test]
fn script_error_halts_too() {
    let mut b = TraceBuilder::default();
    b.frames(5);
    let log = run(
        &SceneFile::default(),
        Box::new(Failer),
        &b.build(),
        &RunOptions::default(),
    )
    .unwrap();
    let errors = of(&log, Category::Script, "script-error");
    assert_eq!(errors.len(), 1);
    assert!(errors[0].payload["message"].as_str().unwrap().contains("unknown-id"));
}

#[test]
fn frames_must_arrive_in_order() {
    let mut session = Session::new(&room(), Box::new(EmptyScript), Default::default(), &options()).unwrap();
    let t = trace("ballpit.trace.json");
    session.tick(&t.frames[0]).unwrap();
    assert!(matches!(
        session.tick(&t.frames[2]),
        Err(RuntimeError::FrameOutOfSequence { expected: 1, got: 2 })
    ));
}

fn requests(log: &EventLog) -> Vec<String> {
    of(log, Category::Ai, "request")
        .into_iter()
        .map(|e| e.payload["prompt"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn poem_on_pinch_queries_once_per_selection() {
    let log = run(
        &room(),
        Box::new(PoemOnPinch::default()),
        &trace("poem_on_pinch.trace.json"),
        &options(),
    )
    .unwrap();
    let prompts = requests(&log);
    assert_eq!(prompts.len(), 2, "{prompts:?}");
    assert!(prompts[0].ends_with("Write a poem with mug"));
    assert!(prompts[1].ends_with("Write a poem with book"));
    let texts: Vec<_> = ui_ops(&log, "setText").into_iter().map(|p| p["text"].clone()).collect();
    assert_eq!(
        texts,
        vec![
            Value::from("A mug of morning light, warm in waiting hands."),
            Value::from("Pages folded like wings, a book asleep on the table.")
        ]
    );
    // Three pinches, including the one at empty space.
    let selects = log
        .entries()
        .iter()
        .filter(|e| e.category == Category::Explicit && e.payload["kind"] == "select")
        .count();
    assert_eq!(selects, 3);
    assert_phase_order(&log);
}

#[test]
fn poem_on_pinch_without_backend_shows_error() {
    let log = run(
        &room(),
        Box::new(PoemOnPinch::default()),
        &trace("poem_on_pinch.trace.json"),
        &RunOptions::default(),
    )
    .unwrap();
    let texts: Vec<_> = ui_ops(&log, "setText").into_iter().map(|p| p["text"].clone()).collect();
    assert_eq!(texts, vec![Value::from("(error)"), Value::from("(error)")]);
}

#[test]
fn pinch_at_empty_space_sends_nothing() {
    let mut b = TraceBuilder::default();
    b.look_at(DVec3::new(0.0, 3.0, -1.0))
        .unwrap()
        .open()
        .frames(5)
        .pinch()
        .frames(30)
        .open()
        .frames(5);
    let log = run(&room(), Box::new(PoemOnPinch::default()), &b.build(), &options()).unwrap();
    assert!(requests(&log).is_empty());
}

#[test]
fn strict_mock_failure_sets_error_text() {
    let options = RunOptions {
        mock: Some(MockScript {
            rules: vec![MockRule::new("book", "only books", 0)],
            strict: true,
        }),
        ..RunOptions::default()
    };
    let log = run(
        &room(),
        Box::new(PoemOnPinch::default()),
        &trace("poem_on_pinch.trace.json"),
        &options,
    )
    .unwrap();
    let texts: Vec<_> = ui_ops(&log, "setText").into_iter().map(|p| p["text"].clone()).collect();
    assert_eq!(texts, vec![Value::from("(error)"), Value::from("only books")]);
}

#[test]
fn ballpit_spawns_and_collides() {
    let log = run(&room(), Box::new(Ballpit), &trace("ballpit.trace.json"), &options()).unwrap();
    let spawns = of(&log, Category::Physics, "spawn");
    let ids: Vec<_> = spawns
        .iter()
        .map(|e| e.payload["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["ball-0", "ball-1", "ball-2"]);
    for s in &spawns {
        let v = &s.payload["velocity"];
        let speed = (0..3).map(|i| v[i].as_f64().unwrap().powi(2)).sum::<f64>().sqrt();
        assert!((speed - 3.0).abs() < 1e-12);
    }
    let collisions = of(&log, Category::Physics, "collision");
    assert!(!collisions.is_empty());
    let first_spawn = spawns[0].frame;
    assert!(collisions[0].frame <= first_spawn + 120);
}

#[test]
fn long_pinch_attaches_panel_and_button_queries() {
    let log = run(
        &room(),
        Box::new(LongPinchLabels::default()),
        &trace("long_pinch_labels.trace.json"),
        &options(),
    )
    .unwrap();
    let added: Vec<String> = ui_ops(&log, "addNode")
        .into_iter()
        .map(|p| p["node"]["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(added, ["panel-book", "button-book"]);
    let touches = log
        .entries()
        .iter()
        .filter(|e| e.category == Category::Explicit && e.payload["kind"] == "uiTouch")
        .count();
    assert_eq!(touches, 1);
    let prompts = requests(&log);
    assert_eq!(prompts.len(), 1);
    assert!(prompts[0].contains("book"));
    let texts: Vec<_> = ui_ops(&log, "setText").into_iter().map(|p| p["text"].clone()).collect();
    assert_eq!(texts, vec![Value::from("A hardcover book, about 30 by 20 cm.")]);
    assert_eq!(LongPinchLabels::panel_id("book"), "panel-book");
}

#[test]
fn same_inputs_same_hash() {
    for (name, file) in [
        ("poem-on-pinch", "poem_on_pinch.trace.json"),
        ("ballpit", "ballpit.trace.json"),
        ("long-pinch-labels", "long_pinch_labels.trace.json"),
    ] {
        let a = run(&room(), sample_script(name).unwrap(), &trace(file), &options()).unwrap();
        let b = run(&room(), sample_script(name).unwrap(), &trace(file), &options()).unwrap();
        assert_eq!(a.hash(), b.hash(), "{name}");
        assert_eq!(EventLog::from_json(&a.to_json()).unwrap().hash(), a.hash());
        assert_phase_order(&a);
    }
}

#[test]
fn script_names_resolve() {
    for name in [
        "empty",
        "PoemOnPinch",
        "poem-on-pinch",
        "Ballpit",
        "long_pinch_labels",
        "rps",
    ] {
        assert!(sample_script(name).is_some(), "{name}");
    }
    assert!(sample_script("nope").is_none());
}
