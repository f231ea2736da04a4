use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use glam::DVec3;
use xrk_core::math::Pose;
use xrk_core::perception::{
    occlusion_test, raycast_depth, synthesize_depth, DepthFrame, Intrinsics, PerceptionConfig, Primitive,
    SyntheticScene,
};
use xrk_core::physics::{step_physics, PhysicsConfig, RigidSphere};
use xrk_core::runtime::{run, sample_script, RunOptions};
use xrk_core::trace::{InputTrace, SceneFile};

fn room() -> (SyntheticScene, Intrinsics, Pose) {
    let scene = SyntheticScene::new(vec![
        Primitive::Plane {
            pose: Pose::IDENTITY,
            extents: [4.0, 4.0],
        },
        Primitive::Sphere {
            center: DVec3::new(0.3, 0.4, -1.5),
            radius: 0.3,
        },
    ])
    .unwrap();
    let eye = Pose::looking_at(DVec3::new(0.0, 1.6, 0.5), DVec3::new(0.0, 0.3, -1.5)).unwrap();
    (scene, Intrinsics::new(100.0, 100.0, 64.0, 64.0).unwrap(), eye)
}

fn frame() -> DepthFrame {
    let (scene, k, eye) = room();
    synthesize_depth(&scene, k, 128, 128, eye).unwrap()
}

fn perception(c: &mut Criterion) {
    let (scene, k, eye) = room();
    c.bench_function("synthesize_depth 128x128", |b| {
        b.iter(|| synthesize_depth(black_box(&scene), k, 128, 128, eye).unwrap())
    });
    let frame = frame();
    let config = PerceptionConfig::default();
    let origin = frame.camera_pose().position();
    let dir = (DVec3::new(0.2, 0.0, -2.0) - origin).normalize();
    c.bench_function("raycast_depth", |b| {
        b.iter(|| raycast_depth(&frame, black_box(origin), black_box(dir), 10.0, &config).unwrap())
    });
    c.bench_function("occlusion_test", |b| {
        b.iter(|| occlusion_test(&frame, black_box(DVec3::new(0.3, 0.4, -2.0)), &config))
    });
}

fn physics(c: &mut Criterion) {
    let frame = frame();
    let config = PhysicsConfig::default();
    let spheres: Vec<RigidSphere> = (0..32)
        .map(|i| RigidSphere {
            id: format!("ball-{i}"),
            radius: 0.05,
            position: DVec3::new((i % 8) as f64 * 0.15 - 0.5, 0.2 + (i / 8) as f64 * 0.15, -1.0),
            velocity: DVec3::new(0.0, -1.0, 0.0),
            restitution: 0.6,
            mass: 1.0,
        })
        .collect();
    c.bench_function("step_physics 32 spheres", |b| {
        b.iter(|| step_physics(black_box(&spheres), Some(&frame), &config).unwrap())
    });
}

fn replay(c: &mut Criterion) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let read = |name: &str| std::fs::read_to_string(fixtures.join(name)).unwrap();
    let scene = SceneFile::from_json(&read("room.scene.json")).unwrap();
    let options = RunOptions::from_json(&read("mock.options.json")).unwrap();
    let trace = InputTrace::from_json(&read("ballpit.trace.json")).unwrap();
    c.bench_function("replay ballpit trace", |b| {
        b.iter(|| {
            run(&scene, sample_script("ballpit").unwrap(), &trace, &options)
                .unwrap()
                .hash_hex()
        })
    });
}

criterion_group!(benches, perception, physics, replay);
criterion_main!(benches);
