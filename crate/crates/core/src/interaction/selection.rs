use super::{Target, TargetId};
use crate::math::{ray_box, Ray};
use crate::model::UserState;

/// Distances closer than this are treated as a tie.
const TIE_EPSILON: f64 = 1e-9;

/// Gaze ray when gaze is valid, otherwise the head's forward axis.
pub fn selection_ray(user: &UserState) -> Ray {
    if user.gaze.valid {
        user.gaze.ray()
    } else {
        let head = &user.head;
        Ray {
            origin: head.position(),
            direction: head.forward().normalize(),
        }
    }
}

/// Nearest target hit by `ray`, ties broken by the smallest qualified id.
pub fn resolve_target<'a>(ray: &Ray, targets: impl IntoIterator<Item = &'a Target>) -> Option<(TargetId, f64)> {
    let mut best: Option<(&TargetId, f64)> = None;
    for target in targets {
        let Some(t) = ray_box(ray, &target.pose, target.half_extents) else {
            continue;
        };
        best = match best {
            None => Some((&target.id, t)),
            Some((id, bt)) => {
                if (t - bt).abs() < TIE_EPSILON {
                    let (a, b) = (target.id.qualified(), id.qualified());
                    if a < b {
                        Some((&target.id, t.min(bt)))
                    } else {
                        Some((id, bt.min(t)))
                    }
                } else if t < bt {
                    Some((&target.id, t))
                } else {
                    Some((id, bt))
                }
            }
        };
    }
    best.map(|(id, t)| (id.clone(), t))
}

/// True when a pinch is active and the selection ray's nearest hit is `target`.
pub fn is_selecting_at(user: &UserState, target: &TargetId, pinch_active: bool, targets: &[Target]) -> bool {
    pinch_active && resolve_target(&selection_ray(user), targets).is_some_and(|(id, _)| &id == target)
}
