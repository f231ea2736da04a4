//! Fixed-step rigid spheres bouncing off the depth surface and each other.
//!
//! Integration is semi-implicit Euler. Depth contacts are found by ray
//! marching along each sphere's motion segment and then along gravity; the
//! surface behind the stored depth counts as solid.

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::perception::{raycast_depth, DepthFrame, DepthHit, PerceptionConfig};

/// Distance a spawned sphere is pulled back from a depth hit toward the camera.
pub const SPAWN_STANDOFF: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhysicsError {
    #[error("too-many-bodies: capacity of {0} spheres reached")]
    TooManyBodies(usize),
    #[error("sphere `{0}` has non-finite state")]
    NonFinite(String),
    #[error("sphere `{0}` is invalid: radius and mass must be positive, restitution in [0, 1]")]
    InvalidSphere(String),
    #[error("duplicate sphere id `{0}`")]
    DuplicateId(String),
    #[error("invalid physics config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RigidSphere {
    pub id: String,
    pub radius: f64,
    pub position: DVec3,
    pub velocity: DVec3,
    pub restitution: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl RigidSphere {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.radius > 0.0 && self.mass > 0.0 && (0.0..=1.0).contains(&self.restitution)) {
            return Err(PhysicsError::InvalidSphere(self.id.clone()));
        }
        self.check_finite()
    }

    fn check_finite(&self) -> Result<(), PhysicsError> {
        if self.position.is_finite() && self.velocity.is_finite() && self.radius.is_finite() && self.mass.is_finite() {
            Ok(())
        } else {
            Err(PhysicsError::NonFinite(self.id.clone()))
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.length_squared()
    }

    /// Kinetic plus gravitational potential energy (zero at the origin).
    pub fn mechanical_energy(&self, gravity: DVec3) -> f64 {
        self.kinetic_energy() - self.mass * gravity.dot(self.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub gravity: DVec3,
    /// Seconds per step.
    pub dt: f64,
    pub max_spheres: usize,
    /// Multiplier on tangential velocity at each depth contact.
    #[serde(rename = "damping")]
    pub tangential_damping: f64,
    pub substeps: u32,
    /// Radius used by [`PhysicsWorld::spawn`].
    pub radius: f64,
    /// Restitution used by [`PhysicsWorld::spawn`].
    pub restitution: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            gravity: DVec3::new(0.0, -9.81, 0.0),
            dt: 1.0 / 60.0,
            max_spheres: 256,
            tangential_damping: 0.98,
            substeps: 1,
            radius: 0.05,
            restitution: 0.6,
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PhysicsError::InvalidConfig("dt must be positive"));
        }
        if !(self.tangential_damping > 0.0 && self.tangential_damping <= 1.0) {
            return Err(PhysicsError::InvalidConfig("damping must be in (0, 1]"));
        }
        if !self.gravity.is_finite() {
            return Err(PhysicsError::InvalidConfig("gravity must be finite"));
        }
        if self.substeps == 0 {
            return Err(PhysicsError::InvalidConfig("substeps must be at least 1"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(PhysicsError::InvalidConfig("radius must be positive"));
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(PhysicsError::InvalidConfig("restitution must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CollisionEvent {
    pub sphere: String,
    /// The other sphere, or `None` for the depth surface.
    pub other: Option<String>,
    pub point: DVec3,
    pub normal: DVec3,
    /// Closing speed along the normal before the response.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Spheres sorted by id.
    pub spheres: Vec<RigidSphere>,
    /// Impacts, excluding resting contacts.
    pub collisions: Vec<CollisionEvent>,
    /// True when any sphere touched the depth surface or another sphere.
    pub contact: bool,
}

/// Advances `spheres` by one `config.dt`.
pub fn step_physics(
    spheres: &[RigidSphere],
    depth: Option<&DepthFrame>,
    config: &PhysicsConfig,
) -> Result<StepResult, PhysicsError> {
    config.validate()?;
    let mut spheres = spheres.to_vec();
    spheres.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in spheres.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(PhysicsError::DuplicateId(pair[0].id.clone()));
        }
    }
    for s in &spheres {
        s.validate()?;
    }
    let h = config.dt / f64::from(config.substeps);
    let mut collisions = Vec::new();
    let mut contact = false;
    for _ in 0..config.substeps {
        contact |= substep(&mut spheres, depth, config, h, &mut collisions);
    }
    for s in &spheres {
        s.check_finite()?;
    }
    Ok(StepResult {
        spheres,
        collisions,
        contact,
    })
}

const PERCEPTION: PerceptionConfig = PerceptionConfig {
    step_meters: 0.01,
    surface_epsilon: 0.01,
    occlusion_epsilon: 0.005,
};

/// Extra probe length past the sphere surface so the march reaches a
/// sample deeper than `surface_epsilon`.
const PROBE_MARGIN: f64 = 4.0 * (PERCEPTION.step_meters + PERCEPTION.surface_epsilon);
/// Tangential relative speed below this fraction of the total counts as a
/// head-on sphere hit.
const HEAD_ON_TOLERANCE: f64 = 1e-12;

fn substep(
    spheres: &mut [RigidSphere],
    depth: Option<&DepthFrame>,
    config: &PhysicsConfig,
    h: f64,
    collisions: &mut Vec<CollisionEvent>,
) -> bool {
    let g = config.gravity;
    let energy_before: f64 = spheres.iter().map(|s| s.mechanical_energy(g)).sum();
    let mut involved = vec![false; spheres.len()];

    let previous: Vec<DVec3> = spheres.iter().map(|s| s.position).collect();
    for s in spheres.iter_mut() {
        s.velocity += g * h;
        s.position += s.velocity * h;
    }
    let integrated: Vec<DVec3> = spheres.iter().map(|s| s.position).collect();

    if let Some(frame) = depth {
        for (i, s) in spheres.iter_mut().enumerate() {
            if let Some(contact) = resolve_depth(s, previous[i], frame, config, h) {
                involved[i] = true;
                collisions.extend(contact);
            }
        }
    }

    let mut displaced: Vec<Option<DVec3>> = vec![None; spheres.len()];
    for i in 0..spheres.len() {
        for j in i + 1..spheres.len() {
            let (left, right) = spheres.split_at_mut(j);
            let (a, b) = (&mut left[i], &mut right[0]);
            let d = b.position - a.position;
            let dist = d.length();
            let reach = a.radius + b.radius;
            if dist >= reach {
                continue;
            }
            let n = if dist > 0.0 { d / dist } else { DVec3::X };
            displaced[i].get_or_insert(a.position);
            displaced[j].get_or_insert(b.position);
            involved[i] = true;
            involved[j] = true;
            let push = n * (0.5 * (reach - dist));
            a.position -= push;
            b.position += push;
            let closing = (a.velocity - b.velocity).dot(n);
            if closing > 0.0 {
                let e = a.restitution.min(b.restitution);
                if a.mass == b.mass {
                    // Equal masses exchange normal velocity. Written around the
                    // partner's velocity so a head-on elastic hit swaps exactly.
                    let rel = a.velocity - b.velocity;
                    let rel_n = n * closing;
                    let mut rel_t = rel - rel_n;
                    if rel_t.length() <= HEAD_ON_TOLERANCE * rel.length() {
                        rel_t = DVec3::ZERO;
                    }
                    let kept = rel_n * (0.5 * (1.0 - e));
                    let (va, vb) = (a.velocity, b.velocity);
                    a.velocity = vb + rel_t + kept;
                    b.velocity = va - rel_t - kept;
                } else {
                    let impulse = (1.0 + e) * closing / (1.0 / a.mass + 1.0 / b.mass);
                    a.velocity -= n * (impulse / a.mass);
                    b.velocity += n * (impulse / b.mass);
                }
                collisions.push(CollisionEvent {
                    sphere: a.id.clone(),
                    other: Some(b.id.clone()),
                    point: a.position + n * a.radius,
                    normal: n,
                    speed: closing,
                });
            }
        }
    }

    if let Some(frame) = depth {
        for (i, s) in spheres.iter_mut().enumerate() {
            if let Some(from) = displaced[i] {
                if let Some(contact) = resolve_depth(s, from, frame, config, h) {
                    collisions.extend(contact);
                }
            }
        }
    }

    let energy_after: f64 = spheres.iter().map(|s| s.mechanical_energy(g)).sum();
    let excess = energy_after - energy_before;
    if excess > 0.0 {
        let kinetic: f64 = spheres
            .iter()
            .zip(&involved)
            .filter(|(_, hit)| **hit)
            .map(|(s, _)| s.kinetic_energy())
            .sum();
        if kinetic > 0.0 {
            let scale = ((kinetic - excess) / kinetic).max(0.0).sqrt();
            for (s, _) in spheres.iter_mut().zip(&involved).filter(|(_, hit)| **hit) {
                s.velocity *= scale;
            }
        }
        // Push-outs against spurious depth edges can lift a sphere by more
        // than its kinetic energy pays for. Free integration alone loses
        // energy, so shrinking the contact displacement always balances.
        let residual = excess - kinetic;
        if residual > 0.0 {
            let lift: f64 = spheres
                .iter()
                .zip(&integrated)
                .zip(&involved)
                .filter(|(_, hit)| **hit)
                .map(|((s, p), _)| -s.mass * g.dot(s.position - *p))
                .sum();
            if lift > 0.0 {
                let keep = (1.0 - residual / lift).max(0.0);
                for ((s, p), _) in spheres
                    .iter_mut()
                    .zip(&integrated)
                    .zip(&involved)
                    .filter(|(_, hit)| **hit)
                {
                    s.position = *p + (s.position - *p) * keep;
                }
            }
        }
    }
    involved.iter().any(|&hit| hit)
}

/// First depth hit within the sphere's reach, probing along the motion
/// segment from `from` and then along gravity.
fn depth_contact(s: &RigidSphere, from: DVec3, frame: &DepthFrame, gravity: DVec3) -> Option<DepthHit> {
    let touching = |hit: &DepthHit| (s.position - hit.point).dot(hit.normal) < s.radius;
    let probe = |origin: DVec3, dir: DVec3, len: f64| {
        raycast_depth(frame, origin, dir, len, &PERCEPTION)
            .ok()
            .flatten()
            .filter(touching)
    };
    let delta = s.position - from;
    let travel = delta.length();
    let along_motion = if travel > 1e-12 {
        probe(from, delta / travel, travel + s.radius + PROBE_MARGIN)
    } else {
        None
    };
    along_motion.or_else(|| {
        let g = gravity.length();
        (g > 0.0)
            .then(|| probe(s.position, gravity / g, s.radius + PROBE_MARGIN))
            .flatten()
    })
}

/// Pushes a penetrating sphere out along the surface normal and reflects its
/// normal velocity. Returns `None` without contact, `Some(None)` for a
/// resting contact, `Some(Some(event))` for an impact.
///
/// The rebound speed `u` is chosen so that the quantity
/// `u²/2 + (dt/2)(g·n)u` equals `e²` times its value at first contact.
/// Semi-implicit Euler conserves this quantity exactly in free flight, so the
/// stepped rebound apex follows `e²h` without a one-step lag.
fn resolve_depth(
    s: &mut RigidSphere,
    from: DVec3,
    frame: &DepthFrame,
    config: &PhysicsConfig,
    h: f64,
) -> Option<Option<CollisionEvent>> {
    let hit = depth_contact(s, from, frame, config.gravity)?;
    let n = hit.normal;
    let depth_in = s.radius - (s.position - hit.point).dot(n);
    s.position += n * depth_in;

    let vn = s.velocity.dot(n);
    let tangential = (s.velocity - n * vn) * config.tangential_damping;
    if vn >= 0.0 {
        s.velocity = tangential + n * vn;
        return Some(None);
    }
    let a_n = config.gravity.dot(n);
    let at_contact = (0.5 * vn * vn + a_n * depth_in + 0.5 * h * a_n * vn).max(0.0);
    let e2 = s.restitution * s.restitution;
    let mut rebound = 0.5 * (-h * a_n + (h * h * a_n * a_n + 8.0 * e2 * at_contact).sqrt());
    let resting = rebound <= 1.5 * a_n.abs() * h;
    if resting {
        rebound = 0.0;
    }
    s.velocity = tangential + n * rebound;
    Some((!resting).then(|| CollisionEvent {
        sphere: s.id.clone(),
        other: None,
        point: s.position - n * s.radius,
        normal: n,
        speed: -vn,
    }))
}

/// A point [`SPAWN_STANDOFF`] meters from a depth hit toward `camera`.
pub fn spawn_standoff(hit: &DepthHit, camera: DVec3) -> DVec3 {
    let toward = camera - hit.point;
    let len = toward.length();
    if len > 0.0 {
        hit.point + toward * (SPAWN_STANDOFF / len)
    } else {
        hit.point
    }
}

/// Owns the sphere set and id counter for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsWorld {
    config: PhysicsConfig,
    spheres: Vec<RigidSphere>,
    next_id: u64,
}

impl PhysicsWorld {
    pub fn new(config: PhysicsConfig) -> Result<Self, PhysicsError> {
        config.validate()?;
        Ok(Self {
            config,
            spheres: Vec::new(),
            next_id: 0,
        })
    }

    pub fn config(&self) -> &PhysicsConfig {
        &self.config
    }

    /// Spheres sorted by id.
    pub fn spheres(&self) -> &[RigidSphere] {
        &self.spheres
    }

    pub fn spawn(&mut self, at: DVec3, velocity: DVec3) -> Result<&RigidSphere, PhysicsError> {
        self.spawn_with(at, velocity, self.config.radius, self.config.restitution)
    }

    pub fn spawn_with(
        &mut self,
        at: DVec3,
        velocity: DVec3,
        radius: f64,
        restitution: f64,
    ) -> Result<&RigidSphere, PhysicsError> {
        if self.spheres.len() >= self.config.max_spheres {
            return Err(PhysicsError::TooManyBodies(self.config.max_spheres));
        }
        let sphere = RigidSphere {
            id: format!("ball-{}", self.next_id),
            radius,
            position: at,
            velocity,
            restitution,
            mass: 1.0,
        };
        sphere.validate()?;
        self.next_id += 1;
        let slot = self.spheres.partition_point(|s| s.id < sphere.id);
        self.spheres.insert(slot, sphere);
        Ok(&self.spheres[slot])
    }

    pub fn step(&mut self, depth: Option<&DepthFrame>) -> Result<StepResult, PhysicsError> {
        let result = step_physics(&self.spheres, depth, &self.config)?;
        self.spheres.clone_from(&result.spheres);
        Ok(result)
    }

    pub fn total_energy(&self) -> f64 {
        self.spheres
            .iter()
            .map(|s| s.mechanical_energy(self.config.gravity))
            .sum()
    }
}
