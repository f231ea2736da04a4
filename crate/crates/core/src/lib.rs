//! Deterministic headless XR interaction runtime.
//!
//! - [`model`]: users, hands, gaze, world objects and the per-session context log.
//! - [`perception`]: depth frames, projection, raycasts, normals, occlusion and synthetic depth.
//! - [`interaction`]: pinch, long pinch, swipe, grab and voice recognizers plus selection and drag.
//! - [`physics`]: rigid spheres against the depth surface and each other.
//! - [`ai`]: model backends, the deterministic mock, agents with tools and the gesture classifier.
//! - [`runtime`]: the fixed-timestep session loop and sample scripts.
//! - [`trace`]: input traces, event logs, scenes and canonical hashing.
//! - [`bridge`]: the live simulator protocol, its server and a loopback client.

pub mod ai;
pub mod bridge;
pub mod interaction;
pub mod math;
pub mod model;
pub mod perception;
pub mod physics;
pub mod runtime;
pub mod trace;
