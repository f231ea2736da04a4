//! Geometric queries against a depth frame: ray marching, surface normals and
//! per-point occlusion.

use glam::DVec3;
use serde::{Deserialize, Serialize};

use super::{DepthFrame, PerceptionError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct PerceptionConfig {
    /// Ray-march sample spacing, meters.
    pub step_meters: f64,
    /// Depth excess that counts a march sample as behind the surface.
    pub surface_epsilon: f64,
    /// Depth excess that counts a point as occluded.
    pub occlusion_epsilon: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            step_meters: 0.01,
            surface_epsilon: 0.01,
            occlusion_epsilon: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DepthHit {
    pub point: DVec3,
    /// Distance along the ray from its origin.
    pub distance: f64,
    pub normal: DVec3,
    /// False when the neighborhood could not support a normal estimate and
    /// `normal` fell back to facing the ray.
    pub normal_estimated: bool,
    pub pixel: (u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Occlusion {
    Visible,
    Occluded,
    Unknown,
}

impl Occlusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Occlusion::Visible => "visible",
            Occlusion::Occluded => "occluded",
            Occlusion::Unknown => "unknown",
        }
    }
}

const BISECTION_ITERATIONS: usize = 48;
const BISECTION_RESOLUTION: f64 = 1e-10;

/// How far `point` sits behind the stored surface, `None` for free space
/// (off-screen, behind the camera or invalid depth).
#[inline]
fn depth_excess(frame: &DepthFrame, point: DVec3) -> Option<(f64, (u32, u32))> {
    let proj = frame.project(point)?;
    let (x, y) = frame.pixel_index(proj.pixel)?;
    let stored = frame.depth_at(x, y)?;
    Some((proj.depth - stored, (x, y)))
}

/// Marches a ray through the depth frame and reports the first surface crossing.
///
/// Samples are spaced `step_meters` apart. The first sample deeper than the
/// stored surface by more than `surface_epsilon` ends the march; the crossing
/// is then located by bisection between the last sample in front of the
/// surface and that one.
pub fn raycast_depth(
    frame: &DepthFrame,
    origin: DVec3,
    direction: DVec3,
    max_distance: f64,
    config: &PerceptionConfig,
) -> Result<Option<DepthHit>, PerceptionError> {
    let norm = direction.length();
    if !((norm - 1.0).abs() <= 1e-3) {
        return Err(PerceptionError::InvalidDirection(norm));
    }
    if !(max_distance > 0.0 && max_distance.is_finite()) {
        return Err(PerceptionError::InvalidMaxDistance(max_distance));
    }
    if !origin.is_finite() || !(config.step_meters > 0.0) {
        return Err(PerceptionError::InvalidDirection(norm));
    }
    let dir = direction / norm;
    let steps = (max_distance / config.step_meters).ceil() as u64;
    // Last sample on the camera side of the surface; samples within
    // `surface_epsilon` behind it neither end the march nor advance this.
    let mut last_front = 0.0;
    for i in 1..=steps {
        let t = (i as f64 * config.step_meters).min(max_distance);
        let excess = depth_excess(frame, origin + dir * t).map(|(excess, _)| excess);
        match excess {
            Some(e) if e > config.surface_epsilon => {}
            Some(e) if e > 0.0 => continue,
            _ => {
                last_front = t;
                continue;
            }
        }
        let (mut lo, mut hi) = (last_front, t);
        for _ in 0..BISECTION_ITERATIONS {
            if hi - lo <= BISECTION_RESOLUTION {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if depth_excess(frame, origin + dir * mid).is_some_and(|(e, _)| e > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let point = origin + dir * hi;
        let pixel = depth_excess(frame, point)
            .map(|(_, px)| px)
            .expect("bisection keeps the upper bound behind a valid pixel");
        let (normal, normal_estimated) = match estimate_normal(frame, pixel) {
            Ok(n) => (n, true),
            Err(_) => (-dir, false),
        };
        return Ok(Some(DepthHit {
            point,
            distance: hi,
            normal,
            normal_estimated,
            pixel,
        }));
    }
    Ok(None)
}

/// World-space surface normal at an integer pixel from central differences,
/// oriented toward the camera.
pub fn estimate_normal(frame: &DepthFrame, pixel: (u32, u32)) -> Result<DVec3, PerceptionError> {
    let (x, y) = pixel;
    if x == 0 || y == 0 || x + 1 >= frame.width() || y + 1 >= frame.height() {
        return Err(PerceptionError::InsufficientSupport(x, y));
    }
    let fetch = |px: u32, py: u32| {
        frame
            .surface_point(px, py)
            .ok_or(PerceptionError::InsufficientSupport(x, y))
    };
    let center = fetch(x, y)?;
    let tangent_u = fetch(x + 1, y)? - fetch(x - 1, y)?;
    let tangent_v = fetch(x, y + 1)? - fetch(x, y - 1)?;
    let n = tangent_u.cross(tangent_v);
    let len = n.length();
    if !(len > 0.0 && len.is_finite()) {
        return Err(PerceptionError::InsufficientSupport(x, y));
    }
    let mut n = n / len;
    let view = center - frame.camera_pose().position();
    if n.dot(view) > 0.0 {
        n = -n;
    }
    Ok(n)
}

/// Classifies a world point against the stored depth.
pub fn occlusion_test(frame: &DepthFrame, point: DVec3, config: &PerceptionConfig) -> Occlusion {
    let Some(proj) = frame.project(point) else {
        return Occlusion::Unknown;
    };
    let Some((x, y)) = frame.pixel_index(proj.pixel) else {
        return Occlusion::Unknown;
    };
    match frame.depth_at(x, y) {
        None => Occlusion::Unknown,
        Some(stored) if stored + config.occlusion_epsilon < proj.depth => Occlusion::Occluded,
        Some(_) => Occlusion::Visible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Pose;
    use crate::perception::{synthesize_depth, Intrinsics, Primitive, SyntheticScene};
    use glam::DQuat;

    fn k() -> Intrinsics {
        Intrinsics::new(100.0, 100.0, 64.0, 64.0).unwrap()
    }

    fn flat(depth: f32) -> DepthFrame {
        DepthFrame::constant(128, 128, depth, k(), Pose::IDENTITY).unwrap()
    }

    #[test]
    fn ray_down_the_axis_hits_flat_plane() {
        let cfg = PerceptionConfig::default();
        let hit = raycast_depth(&flat(2.0), DVec3::ZERO, DVec3::NEG_Z, 10.0, &cfg)
            .unwrap()
            .unwrap();
        assert!((hit.distance - 2.0).abs() <= cfg.step_meters);
        assert!((hit.normal - DVec3::Z).length() < 1e-3);
        assert!(hit.normal_estimated);
    }

    #[test]
    fn ray_away_from_scene_misses() {
        let cfg = PerceptionConfig::default();
        assert_eq!(
            raycast_depth(&flat(2.0), DVec3::ZERO, DVec3::Z, 10.0, &cfg).unwrap(),
            None
        );
    }

    #[test]
    fn ray_shorter_than_surface_misses() {
        let cfg = PerceptionConfig::default();
        assert_eq!(
            raycast_depth(&flat(2.0), DVec3::ZERO, DVec3::NEG_Z, 1.5, &cfg).unwrap(),
            None
        );
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let cfg = PerceptionConfig::default();
        let err = raycast_depth(&flat(2.0), DVec3::ZERO, DVec3::new(0.0, 0.0, -1.1), 5.0, &cfg);
        assert!(matches!(err, Err(PerceptionError::InvalidDirection(_))));
        let err = raycast_depth(&flat(2.0), DVec3::ZERO, DVec3::NEG_Z, 0.0, &cfg);
        assert!(matches!(err, Err(PerceptionError::InvalidMaxDistance(_))));
    }

    #[test]
    fn invalid_pixels_are_free_space() {
        let cfg = PerceptionConfig::default();
        assert_eq!(
            raycast_depth(&flat(0.0), DVec3::ZERO, DVec3::NEG_Z, 10.0, &cfg).unwrap(),
            None
        );
    }

    #[test]
    fn frontal_normal() {
        let n = estimate_normal(&flat(3.0), (40, 70)).unwrap();
        assert!((n - DVec3::Z).length() < 1e-3);
        assert!((n.length() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn tilted_plane_normal_within_one_degree() {
        // Plane through (0,0,-2) tilted 45 degrees about X.
        let normal = DVec3::new(0.0, 1.0, 1.0).normalize();
        let scene = SyntheticScene::new(vec![Primitive::Plane {
            pose: Pose::new(DVec3::new(0.0, 0.0, -2.0), DQuat::from_rotation_arc(DVec3::Y, normal)).unwrap(),
            extents: [50.0, 50.0],
        }])
        .unwrap();
        let frame = synthesize_depth(&scene, k(), 128, 128, Pose::IDENTITY).unwrap();
        for px in [(64, 64), (30, 90), (100, 40)] {
            let n = estimate_normal(&frame, px).unwrap();
            let angle = n.dot(normal).clamp(-1.0, 1.0).acos().to_degrees();
            assert!(angle < 1.0, "pixel {px:?} off by {angle} degrees");
        }
    }

    #[test]
    fn normal_needs_full_neighborhood() {
        assert!(matches!(
            estimate_normal(&flat(2.0), (0, 5)),
            Err(PerceptionError::InsufficientSupport(0, 5))
        ));
        let mut depths = vec![2.0f32; 128 * 128];
        depths[10 * 128 + 11] = 0.0;
        let frame = DepthFrame::new(128, 128, depths, k(), Pose::IDENTITY).unwrap();
        assert!(estimate_normal(&frame, (10, 10)).is_err());
    }

    #[test]
    fn occlusion_cases() {
        let cfg = PerceptionConfig::default();
        let f = flat(2.0);
        assert_eq!(
            occlusion_test(&f, DVec3::new(0.0, 0.0, -3.0), &cfg),
            Occlusion::Occluded
        );
        assert_eq!(occlusion_test(&f, DVec3::new(0.0, 0.0, -1.0), &cfg), Occlusion::Visible);
        assert_eq!(
            occlusion_test(&f, DVec3::new(0.0, 0.0, -2.004), &cfg),
            Occlusion::Visible
        );
        assert_eq!(occlusion_test(&f, DVec3::new(0.0, 0.0, 1.0), &cfg), Occlusion::Unknown);
        assert_eq!(
            occlusion_test(&flat(0.0), DVec3::new(0.0, 0.0, -1.0), &cfg),
            Occlusion::Unknown
        );
    }
}
