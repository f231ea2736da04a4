//! Regenerates the bundled scene, trace and options fixtures.
//!
//! Usage: `cargo run -p xrk-core --example make_fixtures [OUT_DIR]`
//! (default: the workspace `fixtures/` directory). Golden hashes are not
//! written here; pin them with `xrk run` after reviewing the logs.

use std::path::{Path, PathBuf};

use glam::DVec3;
use xrk_core::ai::{MockRule, MockScript};
use xrk_core::math::Pose;
use xrk_core::model::{ObjectKind, WorldObject};
use xrk_core::perception::{DepthCamera, Intrinsics, Primitive};
use xrk_core::runtime::RunOptions;
use xrk_core::trace::{DepthSceneSpec, SceneFile, TraceBuilder};

const MUG: DVec3 = DVec3::new(-0.3, 0.8, -1.0);
const BOOK: DVec3 = DVec3::new(0.3, 0.77, -1.0);
const BOOK_HALF: DVec3 = DVec3::new(0.1, 0.02, 0.15);
const SKY: DVec3 = DVec3::new(0.0, 3.0, -1.0);
const FLOOR_AIM: DVec3 = DVec3::new(0.0, 0.0, -1.6);

fn pose(p: DVec3) -> Pose {
    Pose::from_position(p).unwrap()
}

fn room() -> SceneFile {
    let objects = vec![
        WorldObject::new(
            "mug",
            "mug",
            ObjectKind::Physical,
            pose(MUG),
            DVec3::new(0.04, 0.05, 0.04),
        )
        .unwrap(),
        WorldObject::new("book", "book", ObjectKind::Physical, pose(BOOK), BOOK_HALF).unwrap(),
    ];
    let primitives = vec![
        Primitive::Plane {
            pose: Pose::IDENTITY,
            extents: [4.0, 4.0],
        },
        Primitive::Box {
            pose: pose(DVec3::new(0.0, 0.35, -1.0)),
            half_extents: DVec3::new(0.6, 0.35, 0.4),
        },
        Primitive::Box {
            pose: pose(MUG),
            half_extents: DVec3::new(0.04, 0.05, 0.04),
        },
        Primitive::Box {
            pose: pose(BOOK),
            half_extents: BOOK_HALF,
        },
        Primitive::Box {
            pose: pose(DVec3::new(0.0, 1.2, -3.0)),
            half_extents: DVec3::new(3.0, 1.2, 0.1),
        },
    ];
    let camera = DepthCamera {
        width: 128,
        height: 128,
        intrinsics: Intrinsics::new(80.0, 80.0, 64.0, 64.0).unwrap(),
        pose: Pose::looking_at(DVec3::new(0.0, 1.6, 0.3), DVec3::new(0.0, 0.5, -1.5)).unwrap(),
    };
    SceneFile {
        objects,
        depth_scene: Some(DepthSceneSpec { primitives, camera }),
        ..SceneFile::default()
    }
}

fn mock_options() -> RunOptions {
    RunOptions {
        max_frames: None,
        mock: Some(MockScript {
            rules: vec![
                MockRule::new("poem with mug", "A mug of morning light, warm in waiting hands.", 3),
                MockRule::new(
                    "poem with book",
                    "Pages folded like wings, a book asleep on the table.",
                    3,
                ),
                MockRule::new("about the book", "A hardcover book, about 30 by 20 cm.", 2),
                MockRule::new("about the mug", "A ceramic mug holding about 300 ml.", 2),
            ],
            strict: false,
        }),
        persona: Some("a concise narrator".into()),
    }
}

/// Look at the mug and pinch for 0.4 s, then the book, then empty space.
fn poem_trace() -> TraceBuilder {
    let mut b = TraceBuilder::default();
    b.look_at(MUG)
        .unwrap()
        .open()
        .frames(30)
        .pinch()
        .hold(0.4)
        .open()
        .frames(30);
    b.look_at(BOOK).unwrap().pinch().hold(0.4).open().frames(30);
    b.look_at(SKY).unwrap().pinch().hold(0.4).open().frames(30);
    b
}

/// Three quick pinches aimed at the floor, then two seconds of settling.
fn ballpit_trace() -> TraceBuilder {
    let mut b = TraceBuilder::default();
    b.look_at(FLOOR_AIM).unwrap().open().frames(10);
    for _ in 0..3 {
        b.pinch().frames(6).open().frames(10);
    }
    b.frames(120);
    b
}

/// Long pinch on the book, touch its button, then long pinch at nothing.
fn long_pinch_trace() -> TraceBuilder {
    let top = BOOK + DVec3::new(0.0, BOOK_HALF.y + 0.25, 0.0);
    let button = top + DVec3::new(0.0, -0.1, 0.03);
    let mut b = TraceBuilder::default();
    b.look_at(BOOK)
        .unwrap()
        .open()
        .frames(20)
        .pinch()
        .hold(0.75)
        .open()
        .frames(20);
    b.look_at(button)
        .unwrap()
        .frames(10)
        .pinch()
        .frames(6)
        .open()
        .frames(30);
    b.look_at(SKY).unwrap().pinch().hold(0.75).open().frames(20);
    b
}

fn write(dir: &Path, name: &str, text: &str) {
    let path = dir.join(name);
    std::fs::write(&path, format!("{text}\n")).unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    std::fs::create_dir_all(&dir).unwrap();
    write(&dir, "room.scene.json", &serde_json::to_string_pretty(&room()).unwrap());
    write(
        &dir,
        "mock.options.json",
        &serde_json::to_string_pretty(&mock_options().to_json_value()).unwrap(),
    );
    write(
        &dir,
        "poem_on_pinch.trace.json",
        &poem_trace().build().to_canonical_json(),
    );
    write(&dir, "ballpit.trace.json", &ballpit_trace().build().to_canonical_json());
    write(
        &dir,
        "long_pinch_labels.trace.json",
        &long_pinch_trace().build().to_canonical_json(),
    );
}
