use std::collections::{BTreeMap, BTreeSet};

use glam::{DQuat, DVec3};

use super::{InteractionError, Target, TargetId};
use crate::math::{shortest_arc, Pose, Ray};
use crate::model::Handedness;

#[derive(Debug, Clone, PartialEq)]
struct Drag {
    target: TargetId,
    start_direction: DVec3,
    grab_distance: f64,
    /// Node center minus grab point at drag start.
    offset: DVec3,
    start_orientation: DQuat,
}

/// New pose for a dragged node.
#[derive(Debug, Clone, PartialEq)]
pub struct DragUpdate {
    pub hand: Handedness,
    pub target: TargetId,
    pub pose: Pose,
}

/// `.selectable` and `.draggable` registrations plus active drags.
///
/// `H` is the select handler type; the runtime stores script callbacks here.
pub struct Behaviors<H> {
    selectable: BTreeMap<TargetId, H>,
    draggable: BTreeSet<TargetId>,
    drags: [Option<Drag>; 2],
}

impl<H> Default for Behaviors<H> {
    fn default() -> Self {
        Self {
            selectable: BTreeMap::new(),
            draggable: BTreeSet::new(),
            drags: [None, None],
        }
    }
}

impl<H> std::fmt::Debug for Behaviors<H> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Behaviors")
            .field("selectable", &self.selectable.keys().collect::<Vec<_>>())
            .field("draggable", &self.draggable)
            .field("drags", &self.drags)
            .finish()
    }
}

impl<H> Behaviors<H> {
    pub fn make_selectable(&mut self, id: TargetId, handler: H, targets: &[Target]) -> Result<(), InteractionError> {
        if !targets.iter().any(|t| t.id == id) {
            return Err(InteractionError::UnknownNode(id));
        }
        self.selectable.insert(id, handler);
        Ok(())
    }

    pub fn make_draggable(&mut self, id: TargetId, targets: &[Target]) -> Result<(), InteractionError> {
        if !targets.iter().any(|t| t.id == id) {
            return Err(InteractionError::UnknownNode(id));
        }
        self.draggable.insert(id);
        Ok(())
    }

    pub fn is_selectable(&self, id: &TargetId) -> bool {
        self.selectable.contains_key(id)
    }

    pub fn is_draggable(&self, id: &TargetId) -> bool {
        self.draggable.contains(id)
    }

    /// Temporarily removes a handler so it can be called with mutable access
    /// to its owner; pair with [`Behaviors::restore_handler`].
    pub fn take_handler(&mut self, id: &TargetId) -> Option<H> {
        self.selectable.remove(id)
    }

    pub fn restore_handler(&mut self, id: TargetId, handler: H) {
        self.selectable.entry(id).or_insert(handler);
    }

    /// Drops every registration and drag for a removed node.
    pub fn forget(&mut self, id: &TargetId) {
        self.selectable.remove(id);
        self.draggable.remove(id);
        for slot in &mut self.drags {
            if slot.as_ref().is_some_and(|d| &d.target == id) {
                *slot = None;
            }
        }
    }

    pub fn dragging(&self, hand: Handedness) -> Option<&TargetId> {
        self.drags[hand.index()].as_ref().map(|d| &d.target)
    }

    pub fn begin_drag(&mut self, hand: Handedness, target: &Target, ray: &Ray, distance: f64) {
        let grab_point = ray.at(distance);
        self.drags[hand.index()] = Some(Drag {
            target: target.id.clone(),
            start_direction: ray.direction,
            grab_distance: distance,
            offset: target.pose.position() - grab_point,
            start_orientation: target.pose.orientation(),
        });
    }

    /// Re-poses the dragged node so the grab point stays at the original
    /// distance along the current ray and the node keeps its offset in the
    /// ray's frame.
    pub fn update_drag(&self, hand: Handedness, ray: &Ray) -> Option<DragUpdate> {
        let drag = self.drags[hand.index()].as_ref()?;
        let rotation = shortest_arc(drag.start_direction, ray.direction);
        let center = ray.at(drag.grab_distance) + rotation * drag.offset;
        let orientation = (rotation * drag.start_orientation).normalize();
        let pose = Pose::new(center, orientation).ok()?;
        Some(DragUpdate {
            hand,
            target: drag.target.clone(),
            pose,
        })
    }

    pub fn end_drag(&mut self, hand: Handedness) -> Option<TargetId> {
        self.drags[hand.index()].take().map(|d| d.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(z: f64) -> Target {
        Target {
            id: TargetId::Ui("card".into()),
            pose: Pose::from_position(DVec3::new(0.0, 0.0, z)).unwrap(),
            half_extents: DVec3::new(0.2, 0.2, 0.05),
            touchable: false,
        }
    }

    #[test]
    fn registration_requires_existing_node() {
        let mut b: Behaviors<()> = Behaviors::default();
        let missing = TargetId::Ui("ghost".into());
        assert_eq!(
            b.make_selectable(missing.clone(), (), &[node(-2.0)]),
            Err(InteractionError::UnknownNode(missing.clone()))
        );
        assert!(b.make_draggable(missing, &[]).is_err());
        b.make_draggable(node(-2.0).id, &[node(-2.0)]).unwrap();
        assert!(b.is_draggable(&node(-2.0).id));
    }

    /// Analytic oracle: rotating the ray by 10 degrees about its origin
    /// rotates the node center about the same origin by 10 degrees.
    #[test]
    fn drag_follows_rotated_ray() {
        let mut b: Behaviors<()> = Behaviors::default();
        let target = node(-2.05);
        let ray = Ray::new(DVec3::ZERO, DVec3::NEG_Z).unwrap();
        b.begin_drag(Handedness::Right, &target, &ray, 2.0);

        let angle = 10f64.to_radians();
        let rotated_dir = DVec3::new(-angle.sin(), 0.0, -angle.cos());
        let rotated = Ray::new(DVec3::ZERO, rotated_dir).unwrap();
        let update = b.update_drag(Handedness::Right, &rotated).unwrap();

        let expected_center = rotated_dir * 2.05;
        assert!((update.pose.position() - expected_center).length() < 1e-6);
        let grab_point = rotated.at(2.0);
        assert!(((update.pose.position() - grab_point).length() - 0.05).abs() < 1e-6);
        // Center stays on the rotated ray.
        let along = update.pose.position().dot(rotated_dir);
        assert!((update.pose.position() - rotated_dir * along).length() < 1e-6);
        assert_eq!(b.end_drag(Handedness::Right), Some(target.id));
        assert_eq!(b.update_drag(Handedness::Right, &rotated), None);
    }

    #[test]
    fn handlers_can_be_taken_and_restored() {
        let mut b: Behaviors<u32> = Behaviors::default();
        let t = node(-1.0);
        b.make_selectable(t.id.clone(), 7, std::slice::from_ref(&t)).unwrap();
        assert_eq!(b.take_handler(&t.id), Some(7));
        assert!(!b.is_selectable(&t.id));
        b.restore_handler(t.id.clone(), 7);
        assert!(b.is_selectable(&t.id));
        b.forget(&t.id);
        assert!(!b.is_selectable(&t.id));
    }
}
