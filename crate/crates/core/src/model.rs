//! The reality model: typed per-frame state that scripts read and the frame
//! loop mutates.
//!
//! The model is a plain value. [`RealityModel::snapshot`] is a deep copy; the
//! only shared part is the depth frame, which is immutable once built.

use std::collections::VecDeque;
use std::sync::Arc;

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::math::{GeometryError, Pose, Ray};
use crate::perception::{DepthFrame, LightingEstimate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("invalid id `{0}`: {1}")]
    InvalidId(String, &'static str),
    #[error("half extents must be strictly positive")]
    NonPositiveExtents,
    #[error("context entries must have non-decreasing frame index ({last} then {got})")]
    NonMonotonicContext { last: u64, got: u64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Reserved qualifier for UI node ids in event targets.
pub const UI_PREFIX: &str = "ui:";
/// Reserved qualifier for world object ids in event targets.
pub const OBJECT_PREFIX: &str = "obj:";

/// Raw ids may not carry a namespace qualifier, which keeps the object and UI
/// namespaces disjoint once qualified.
pub fn validate_raw_id(id: &str) -> Result<(), ModelError> {
    if id.is_empty() {
        return Err(ModelError::InvalidId(id.into(), "empty"));
    }
    if id.starts_with(UI_PREFIX) || id.starts_with(OBJECT_PREFIX) {
        return Err(ModelError::InvalidId(id.into(), "reserved namespace prefix"));
    }
    Ok(())
}

/// Fixed simulation step as an exact rational number of seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDuration {
    pub num: u32,
    pub den: u32,
}

impl FrameDuration {
    pub const SIXTIETH: FrameDuration = FrameDuration { num: 1, den: 60 };

    pub fn seconds(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Time of `frame`, rounded once from the exact rational value.
    pub fn time_at(self, frame: u64) -> f64 {
        (frame as f64 * self.num as f64) / self.den as f64
    }

    /// Smallest frame count whose duration reaches `seconds`.
    pub fn frames_for(self, seconds: f64) -> u64 {
        let exact = seconds * self.den as f64 / self.num as f64;
        // Absorb representation error such as 0.3 * 60 = 17.999999999999996.
        let rounded = exact.round();
        if (exact - rounded).abs() < 1e-9 {
            rounded.max(0.0) as u64
        } else {
            exact.ceil().max(0.0) as u64
        }
    }
}

impl Default for FrameDuration {
    fn default() -> Self {
        Self::SIXTIETH
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub const BOTH: [Handedness; 2] = [Handedness::Left, Handedness::Right];

    pub fn index(self) -> usize {
        match self {
            Handedness::Left => 0,
            Handedness::Right => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Handedness::Left => "left",
            Handedness::Right => "right",
        }
    }
}

/// Number of joints in the hand skeleton.
pub const JOINT_COUNT: usize = 21;

/// Named hand joints in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[repr(usize)]
pub enum HandJoint {
    Wrist = 0,
    ThumbCmc,
    ThumbMcp,
    ThumbIp,
    ThumbTip,
    IndexMcp,
    IndexPip,
    IndexDip,
    IndexTip,
    MiddleMcp,
    MiddlePip,
    MiddleDip,
    MiddleTip,
    RingMcp,
    RingPip,
    RingDip,
    RingTip,
    LittleMcp,
    LittlePip,
    LittleDip,
    LittleTip,
}

impl HandJoint {
    pub const FINGERTIPS: [HandJoint; 5] = [
        HandJoint::ThumbTip,
        HandJoint::IndexTip,
        HandJoint::MiddleTip,
        HandJoint::RingTip,
        HandJoint::LittleTip,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HandState {
    handedness: Handedness,
    joints: [DVec3; JOINT_COUNT],
    tracked: bool,
    pinch_distance: f64,
}

impl HandState {
    pub fn untracked(handedness: Handedness) -> Self {
        Self {
            handedness,
            joints: [DVec3::ZERO; JOINT_COUNT],
            tracked: false,
            pinch_distance: 0.0,
        }
    }

    pub fn tracked(handedness: Handedness, joints: [DVec3; JOINT_COUNT]) -> Result<Self, GeometryError> {
        if joints.iter().any(|j| !j.is_finite()) {
            return Err(GeometryError::NonFinite("hand joint"));
        }
        let pinch_distance = joints[HandJoint::ThumbTip.index()].distance(joints[HandJoint::IndexTip.index()]);
        Ok(Self {
            handedness,
            joints,
            tracked: true,
            pinch_distance,
        })
    }

    pub fn handedness(&self) -> Handedness {
        self.handedness
    }

    pub fn is_tracked(&self) -> bool {
        self.tracked
    }

    pub fn joints(&self) -> &[DVec3; JOINT_COUNT] {
        &self.joints
    }

    #[inline]
    pub fn joint(&self, joint: HandJoint) -> DVec3 {
        self.joints[joint.index()]
    }

    /// Thumb tip to index tip, meters.
    pub fn pinch_distance(&self) -> f64 {
        self.pinch_distance
    }

    /// Midpoint between thumb and index tips.
    pub fn pinch_point(&self) -> DVec3 {
        (self.joint(HandJoint::ThumbTip) + self.joint(HandJoint::IndexTip)) * 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GazeState {
    pub origin: DVec3,
    direction: DVec3,
    pub valid: bool,
}

impl GazeState {
    pub fn new(origin: DVec3, direction: DVec3, valid: bool) -> Result<Self, GeometryError> {
        let ray = Ray::new(origin, direction)?;
        Ok(Self {
            origin: ray.origin,
            direction: ray.direction,
            valid,
        })
    }

    /// Gaze along the head's forward axis.
    pub fn from_head(head: &Pose, valid: bool) -> Self {
        Self {
            origin: head.position(),
            direction: head.forward().normalize(),
            valid,
        }
    }

    pub fn direction(&self) -> DVec3 {
        self.direction
    }

    pub fn ray(&self) -> Ray {
        Ray {
            origin: self.origin,
            direction: self.direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserState {
    pub head: Pose,
    pub hands: [HandState; 2],
    pub gaze: GazeState,
}

impl Default for UserState {
    fn default() -> Self {
        Self {
            head: Pose::IDENTITY,
            hands: [
                HandState::untracked(Handedness::Left),
                HandState::untracked(Handedness::Right),
            ],
            gaze: GazeState::from_head(&Pose::IDENTITY, false),
        }
    }
}

impl UserState {
    pub fn hand(&self, handedness: Handedness) -> &HandState {
        &self.hands[handedness.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Physical,
    Virtual,
}

/// A labeled oriented box in the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, try_from = "WorldObjectRepr")]
pub struct WorldObject {
    pub id: String,
    pub label: String,
    pub kind: ObjectKind,
    pub pose: Pose,
    #[serde(with = "vec3_array")]
    pub half_extents: DVec3,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct WorldObjectRepr {
    id: String,
    label: String,
    kind: ObjectKind,
    pose: Pose,
    half_extents: [f64; 3],
}

impl TryFrom<WorldObjectRepr> for WorldObject {
    type Error = ModelError;

    fn try_from(r: WorldObjectRepr) -> Result<Self, ModelError> {
        WorldObject::new(r.id, r.label, r.kind, r.pose, DVec3::from_array(r.half_extents))
    }
}

impl WorldObject {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        kind: ObjectKind,
        pose: Pose,
        half_extents: DVec3,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        validate_raw_id(&id)?;
        if !(half_extents.cmpgt(DVec3::ZERO).all() && half_extents.is_finite()) {
            return Err(ModelError::NonPositiveExtents);
        }
        Ok(Self {
            id,
            label: label.into(),
            kind,
            pose,
            half_extents,
        })
    }
}

/// A bounded planar surface. The plane spans the local XZ plane with normal +Y;
/// `extents` are half sizes along local X and Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plane {
    pub pose: Pose,
    pub extents: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct WorldState {
    pub depth: Option<Arc<DepthFrame>>,
    objects: Vec<WorldObject>,
    pub planes: Vec<Plane>,
    pub lighting: LightingEstimate,
}

impl WorldState {
    pub fn add_object(&mut self, object: WorldObject) -> Result<(), ModelError> {
        if self.objects.iter().any(|o| o.id == object.id) {
            return Err(ModelError::DuplicateId(object.id));
        }
        self.objects.push(object);
        Ok(())
    }

    pub fn add_plane(&mut self, plane: Plane) -> Result<(), ModelError> {
        if !(plane.extents[0] > 0.0 && plane.extents[1] > 0.0) {
            return Err(ModelError::NonPositiveExtents);
        }
        self.planes.push(plane);
        Ok(())
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn set_object_pose(&mut self, id: &str, pose: Pose) -> Result<(), ModelError> {
        let object = self
            .objects
            .iter_mut()
            .find(|o| o.id == id)
            .ok_or_else(|| ModelError::UnknownId(id.into()))?;
        object.pose = pose;
        Ok(())
    }

    /// Objects in ascending id order, optionally restricted to an exact label.
    pub fn find_objects(&self, label: Option<&str>) -> Vec<&WorldObject> {
        let mut out: Vec<&WorldObject> = self
            .objects
            .iter()
            .filter(|o| label.is_none_or(|l| o.label == l))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn objects(&self) -> &[WorldObject] {
        &self.objects
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContextEntry {
    pub frame_index: u64,
    pub kind: String,
    pub payload: String,
}

/// Bounded interaction history. Oldest entries are evicted first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextLog {
    entries: VecDeque<ContextEntry>,
    capacity: usize,
}

impl Default for ContextLog {
    fn default() -> Self {
        Self::with_capacity(Self::DEFAULT_CAPACITY)
    }
}

impl ContextLog {
    pub const DEFAULT_CAPACITY: usize = 1024;

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity.min(Self::DEFAULT_CAPACITY)),
            capacity: capacity.max(1),
        }
    }

    pub fn push(
        &mut self,
        frame_index: u64,
        kind: impl Into<String>,
        payload: impl Into<String>,
    ) -> Result<(), ModelError> {
        if let Some(last) = self.entries.back() {
            if frame_index < last.frame_index {
                return Err(ModelError::NonMonotonicContext {
                    last: last.frame_index,
                    got: frame_index,
                });
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(ContextEntry {
            frame_index,
            kind: kind.into(),
            payload: payload.into(),
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &ContextEntry> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RealityModel {
    pub frame_index: u64,
    pub frame_duration: FrameDuration,
    pub user: UserState,
    pub world: WorldState,
    pub interfaces: Vec<String>,
    pub agents: Vec<String>,
    pub context: ContextLog,
}

impl Default for RealityModel {
    fn default() -> Self {
        Self {
            frame_index: 0,
            frame_duration: FrameDuration::SIXTIETH,
            user: UserState::default(),
            world: WorldState::default(),
            interfaces: Vec::new(),
            agents: Vec::new(),
            context: ContextLog::default(),
        }
    }
}

impl RealityModel {
    pub fn time_seconds(&self) -> f64 {
        self.frame_duration.time_at(self.frame_index)
    }

    /// Deep, independent copy of the current state.
    pub fn snapshot(&self) -> RealityModel {
        self.clone()
    }

    /// SHA-256 of the canonical JSON rendering of the model.
    pub fn canonical_hash(&self) -> [u8; 32] {
        let value = serde_json::to_value(self).expect("reality model serializes");
        crate::trace::canonical::sha256(crate::trace::canonical::to_canonical_json(&value).as_bytes())
    }
}

pub(crate) mod vec3_array {
    use glam::DVec3;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &DVec3, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&v.to_array(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVec3, D::Error> {
        Ok(DVec3::from_array(<[f64; 3]>::deserialize(d)?))
    }
}
