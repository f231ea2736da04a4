//! Analytic scenes rendered to depth frames. They stand in for a device depth
//! sensor and give tests an exact ground truth.

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use super::{DepthFrame, Intrinsics, PerceptionError};
use crate::math::{ray_box, Pose, Ray};
use crate::model::vec3_array;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum Primitive {
    /// Local XZ rectangle with normal +Y; `extents` are half sizes along X and Z.
    Plane { pose: Pose, extents: [f64; 2] },
    Sphere {
        #[serde(with = "vec3_array")]
        center: DVec3,
        radius: f64,
    },
    #[serde(rename_all = "camelCase")]
    Box {
        pose: Pose,
        #[serde(with = "vec3_array")]
        half_extents: DVec3,
    },
}

impl Primitive {
    fn validate(&self) -> Result<(), PerceptionError> {
        let ok = match self {
            Primitive::Plane { extents, .. } => extents[0] > 0.0 && extents[1] > 0.0,
            Primitive::Sphere { center, radius } => *radius > 0.0 && center.is_finite(),
            Primitive::Box { half_extents, .. } => half_extents.cmpgt(DVec3::ZERO).all(),
        };
        if ok {
            Ok(())
        } else {
            Err(PerceptionError::InvalidPrimitive)
        }
    }

    /// Nearest positive distance along a unit-direction ray.
    pub fn intersect(&self, ray: &Ray) -> Option<f64> {
        match self {
            Primitive::Plane { pose, extents } => {
                let o = pose.inverse_transform_point(ray.origin);
                let d = pose.inverse_transform_vector(ray.direction);
                if d.y.abs() < 1e-15 {
                    return None;
                }
                let t = -o.y / d.y;
                if t <= 0.0 {
                    return None;
                }
                let hit = o + d * t;
                (hit.x.abs() <= extents[0] && hit.z.abs() <= extents[1]).then_some(t)
            }
            Primitive::Sphere { center, radius } => {
                let oc = ray.origin - *center;
                let b = oc.dot(ray.direction);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                let t0 = -b - s;
                let t1 = -b + s;
                if t0 > 0.0 {
                    Some(t0)
                } else if t1 > 0.0 {
                    Some(t1)
                } else {
                    None
                }
            }
            Primitive::Box { pose, half_extents } => ray_box(ray, pose, *half_extents),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticScene {
    pub primitives: Vec<Primitive>,
}

impl SyntheticScene {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self, PerceptionError> {
        let scene = Self { primitives };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        self.primitives.iter().try_for_each(Primitive::validate)
    }

    /// Nearest hit distance over all primitives.
    pub fn intersect(&self, ray: &Ray) -> Option<f64> {
        self.primitives
            .iter()
            .filter_map(|p| p.intersect(ray))
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
    }
}

/// Sensor placement and resolution used to render a synthetic scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthCamera {
    pub width: u32,
    pub height: u32,
    pub intrinsics: Intrinsics,
    pub pose: Pose,
}

impl Default for DepthCamera {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            intrinsics: Intrinsics {
                fx: 100.0,
                fy: 100.0,
                cx: 64.0,
                cy: 64.0,
            },
            pose: Pose::IDENTITY,
        }
    }
}

/// Renders planar depth per pixel from the nearest analytic intersection.
pub fn synthesize_depth(
    scene: &SyntheticScene,
    intrinsics: Intrinsics,
    width: u32,
    height: u32,
    camera_pose: Pose,
) -> Result<DepthFrame, PerceptionError> {
    scene.validate()?;
    if width == 0 || height == 0 {
        return Err(PerceptionError::EmptyFrame);
    }
    let mut depths = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let dir_cam = intrinsics.pixel_direction(DVec2::new(x as f64, y as f64));
            let scale = dir_cam.length();
            let ray = Ray {
                origin: camera_pose.position(),
                direction: camera_pose.transform_vector(dir_cam / scale),
            };
            let depth = scene.intersect(&ray).map_or(0.0, |t| (t / scale) as f32);
            depths.push(depth);
        }
    }
    DepthFrame::new(width, height, depths, intrinsics, camera_pose)
}

impl DepthCamera {
    pub fn render(&self, scene: &SyntheticScene) -> Result<DepthFrame, PerceptionError> {
        synthesize_depth(scene, self.intrinsics, self.width, self.height, self.pose)
    }
}
