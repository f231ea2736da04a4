//! Small geometric vocabulary shared by every subsystem.
//!
//! World space is right-handed, Y-up, in meters. A camera or head looks down
//! its local -Z axis.

use glam::{DQuat, DVec3};
use serde::{Deserialize, Serialize};

/// Allowed deviation of a quaternion norm from 1.
pub const UNIT_QUAT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("quaternion norm {0} is not within 1e-6 of 1")]
    NonUnitQuaternion(f64),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("direction vector is not unit length (norm {0})")]
    NonUnitDirection(f64),
}

/// Rigid placement: position plus unit orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    position: DVec3,
    orientation: DQuat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRepr {
    p: [f64; 3],
    q: [f64; 4],
}

impl TryFrom<PoseRepr> for Pose {
    type Error = GeometryError;

    fn try_from(r: PoseRepr) -> Result<Self, Self::Error> {
        Pose::new(DVec3::from_array(r.p), DQuat::from_array(r.q))
    }
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        PoseRepr {
            p: p.position.to_array(),
            q: p.orientation.to_array(),
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: DVec3::ZERO,
        orientation: DQuat::IDENTITY,
    };

    pub fn new(position: DVec3, orientation: DQuat) -> Result<Self, GeometryError> {
        if !position.is_finite() {
            return Err(GeometryError::NonFinite("position"));
        }
        check_unit_quat(orientation)?;
        Ok(Self { position, orientation })
    }

    pub fn from_position(position: DVec3) -> Result<Self, GeometryError> {
        Self::new(position, DQuat::IDENTITY)
    }

    /// Builds a pose that looks from `eye` toward `target` with +Y as the up hint.
    pub fn looking_at(eye: DVec3, target: DVec3) -> Result<Self, GeometryError> {
        let forward = (target - eye).normalize_or_zero();
        if forward == DVec3::ZERO {
            return Err(GeometryError::NonUnitDirection(0.0));
        }
        let up_hint = if forward.y.abs() > 0.999 {
            DVec3::NEG_Z
        } else {
            DVec3::Y
        };
        let right = forward.cross(up_hint).normalize();
        let up = right.cross(forward);
        let basis = glam::DMat3::from_cols(right, up, -forward);
        Self::new(eye, DQuat::from_mat3(&basis).normalize())
    }

    #[inline]
    pub fn position(&self) -> DVec3 {
        self.position
    }

    #[inline]
    pub fn orientation(&self) -> DQuat {
        self.orientation
    }

    pub fn with_position(self, position: DVec3) -> Result<Self, GeometryError> {
        Self::new(position, self.orientation)
    }

    #[inline]
    pub fn transform_point(&self, local: DVec3) -> DVec3 {
        self.orientation * local + self.position
    }

    #[inline]
    pub fn transform_vector(&self, local: DVec3) -> DVec3 {
        self.orientation * local
    }

    #[inline]
    pub fn inverse_transform_point(&self, world: DVec3) -> DVec3 {
        self.orientation.conjugate() * (world - self.position)
    }

    #[inline]
    pub fn inverse_transform_vector(&self, world: DVec3) -> DVec3 {
        self.orientation.conjugate() * world
    }

    /// Local -Z expressed in world space.
    #[inline]
    pub fn forward(&self) -> DVec3 {
        self.orientation * DVec3::NEG_Z
    }
}

pub fn check_unit_quat(q: DQuat) -> Result<(), GeometryError> {
    if !q.is_finite() {
        return Err(GeometryError::NonFinite("orientation"));
    }
    let norm = q.length();
    if (norm - 1.0).abs() > UNIT_QUAT_TOLERANCE {
        return Err(GeometryError::NonUnitQuaternion(norm));
    }
    Ok(())
}

/// Half-line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: DVec3,
    pub direction: DVec3,
}

impl Ray {
    /// Normalizes `direction`; fails on zero or non-finite input.
    pub fn new(origin: DVec3, direction: DVec3) -> Result<Self, GeometryError> {
        if !origin.is_finite() {
            return Err(GeometryError::NonFinite("ray origin"));
        }
        let len = direction.length();
        if !len.is_finite() || len == 0.0 {
            return Err(GeometryError::NonUnitDirection(len));
        }
        Ok(Self {
            origin,
            direction: direction / len,
        })
    }

    #[inline]
    pub fn at(&self, t: f64) -> DVec3 {
        self.origin + self.direction * t
    }
}

/// Rotation taking unit vector `from` onto unit vector `to` along the shortest arc.
///
/// Uses only arithmetic and `sqrt` so results are reproducible bit for bit.
pub fn shortest_arc(from: DVec3, to: DVec3) -> DQuat {
    let dot = from.dot(to);
    if dot >= 1.0 - 1e-15 {
        return DQuat::IDENTITY;
    }
    if dot <= -1.0 + 1e-15 {
        let axis = if from.x.abs() < 0.9 {
            from.cross(DVec3::X)
        } else {
            from.cross(DVec3::Y)
        }
        .normalize();
        return DQuat::from_xyzw(axis.x, axis.y, axis.z, 0.0);
    }
    let c = from.cross(to);
    DQuat::from_xyzw(c.x, c.y, c.z, 1.0 + dot).normalize()
}

/// Ray against an oriented box given by pose and half extents.
///
/// Returns the nearest positive parametric distance, which is the exit distance
/// when the origin lies inside the box.
pub fn ray_box(ray: &Ray, pose: &Pose, half_extents: DVec3) -> Option<f64> {
    let o = pose.inverse_transform_point(ray.origin);
    let d = pose.inverse_transform_vector(ray.direction);
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        let (oa, da, ha) = (o[axis], d[axis], half_extents[axis]);
        if da.abs() < 1e-15 {
            if oa < -ha || oa > ha {
                return None;
            }
            continue;
        }
        let inv = 1.0 / da;
        let mut t0 = (-ha - oa) * inv;
        let mut t1 = (ha - oa) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    if t_near > 0.0 {
        Some(t_near)
    } else if t_far > 0.0 {
        Some(t_far)
    } else {
        None
    }
}
