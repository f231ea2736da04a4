use glam::DVec3;
use serde::{Deserialize, Serialize};

use super::AiError;
use crate::math::Pose;
use crate::model::{HandJoint, HandState, JOINT_COUNT};

pub const GESTURE_MODEL_VERSION: u32 = 1;

/// Fingertip-to-wrist distances (thumb to little) divided by the
/// wrist-to-middle-knuckle span.
pub fn hand_features(hand: &HandState) -> Result<[f64; 5], AiError> {
    if !hand.is_tracked() {
        return Err(AiError::UntrackedHand);
    }
    let wrist = hand.joint(HandJoint::Wrist);
    let span = (hand.joint(HandJoint::MiddleMcp) - wrist).length();
    if !(span > 0.0) {
        return Err(AiError::DegenerateHand);
    }
    Ok(HandJoint::FINGERTIPS.map(|tip| (hand.joint(tip) - wrist).length() / span))
}

/// Nearest-centroid classifier over [`hand_features`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureModel {
    version: u32,
    classes: Vec<String>,
    centroids: Vec<[f64; 5]>,
}

impl GestureModel {
    pub fn new(classes: Vec<String>, centroids: Vec<[f64; 5]>) -> Result<Self, AiError> {
        let model = Self {
            version: GESTURE_MODEL_VERSION,
            classes,
            centroids,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), AiError> {
        if self.version != GESTURE_MODEL_VERSION {
            return Err(AiError::UnsupportedVersion {
                what: "gesture model",
                found: self.version,
                supported: GESTURE_MODEL_VERSION,
            });
        }
        if self.classes.is_empty() || self.classes.len() != self.centroids.len() {
            return Err(AiError::InvalidModel("need exactly one centroid per class".into()));
        }
        let mut names: Vec<_> = self.classes.iter().collect();
        names.sort();
        names.dedup();
        if names.len() != self.classes.len() {
            return Err(AiError::InvalidModel("class labels must be unique".into()));
        }
        if self.centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AiError::InvalidModel("centroids must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, AiError> {
        let model: Self = serde_json::from_str(text).map_err(|e| AiError::Malformed {
            what: "gesture model",
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn centroids(&self) -> &[[f64; 5]] {
        &self.centroids
    }

    /// Label of the nearest centroid and confidence `d2 / (d1 + d2)`, where
    /// `d1 <= d2` are the two smallest distances. Ties go to the smaller label.
    pub fn classify(&self, features: &[f64; 5]) -> (String, f64) {
        let mut ranked: Vec<(f64, &String)> = self
            .classes
            .iter()
            .zip(&self.centroids)
            .map(|(label, c)| {
                let d2: f64 = c.iter().zip(features).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2.sqrt(), label)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let (d1, label) = ranked[0];
        let confidence = match ranked.get(1) {
            None => 1.0,
            Some((d2, _)) if d1 + d2 > 0.0 => d2 / (d1 + d2),
            Some(_) => 0.5,
        };
        (label.clone(), confidence)
    }

    pub fn run(&self, hand: &HandState) -> Result<(String, f64), AiError> {
        Ok(self.classify(&hand_features(hand)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RpsGesture {
    Paper,
    Rock,
    Scissors,
}

impl RpsGesture {
    pub const ALL: [RpsGesture; 3] = [RpsGesture::Paper, RpsGesture::Rock, RpsGesture::Scissors];

    pub fn label(self) -> &'static str {
        match self {
            RpsGesture::Paper => "paper",
            RpsGesture::Rock => "rock",
            RpsGesture::Scissors => "scissors",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.label() == label)
    }
}

// Hand geometry in a local frame: wrist at the origin, fingers along +Y,
// palm facing +Z. Units are meters at scale 1.
const FINGER_BASES: [DVec3; 4] = [
    DVec3::new(0.025, 0.09, 0.0),
    DVec3::new(0.0, 0.095, 0.0),
    DVec3::new(-0.022, 0.088, 0.0),
    DVec3::new(-0.042, 0.078, 0.0),
];
const FINGER_SEGMENTS: [[f64; 3]; 4] = [
    [0.040, 0.025, 0.020],
    [0.045, 0.028, 0.022],
    [0.042, 0.026, 0.021],
    [0.032, 0.020, 0.018],
];
const FINGER_CURLED: [DVec3; 3] = [
    DVec3::new(0.0, 0.0, 1.0),
    DVec3::new(0.0, -1.0, 0.0),
    DVec3::new(0.0, -0.6, -0.8),
];
const THUMB_BASE: DVec3 = DVec3::new(0.02, 0.02, 0.005);
const THUMB_SEGMENTS: [f64; 3] = [0.035, 0.030, 0.025];
const THUMB_OPEN: DVec3 = DVec3::new(0.6, 0.8, 0.0);
const THUMB_FOLDED: [DVec3; 3] = [
    DVec3::new(0.6, 0.8, 0.0),
    DVec3::new(0.0, 0.6, 0.8),
    DVec3::new(-0.8, 0.0, 0.6),
];

/// Noise-free joint positions for a rock, paper or scissors hand placed at
/// `pose` and uniformly scaled about the wrist.
pub fn synthetic_hand_pose(gesture: RpsGesture, pose: &Pose, scale: f64) -> [DVec3; JOINT_COUNT] {
    let mut local = [DVec3::ZERO; JOINT_COUNT];
    let chain = |local: &mut [DVec3; JOINT_COUNT], first: usize, base: DVec3, lengths: [f64; 3], dirs: [DVec3; 3]| {
        local[first] = base;
        let mut p = base;
        for k in 0..3 {
            p += dirs[k] * lengths[k];
            local[first + 1 + k] = p;
        }
    };
    let thumb_dirs = match gesture {
        RpsGesture::Paper => [THUMB_OPEN; 3],
        RpsGesture::Rock | RpsGesture::Scissors => THUMB_FOLDED,
    };
    chain(
        &mut local,
        HandJoint::ThumbCmc.index(),
        THUMB_BASE,
        THUMB_SEGMENTS,
        thumb_dirs,
    );
    let firsts = [
        HandJoint::IndexMcp,
        HandJoint::MiddleMcp,
        HandJoint::RingMcp,
        HandJoint::LittleMcp,
    ];
    for (finger, first) in firsts.iter().enumerate() {
        let extended = match gesture {
            RpsGesture::Paper => true,
            RpsGesture::Rock => false,
            RpsGesture::Scissors => finger < 2,
        };
        let dirs = if extended { [DVec3::Y; 3] } else { FINGER_CURLED };
        chain(
            &mut local,
            first.index(),
            FINGER_BASES[finger],
            FINGER_SEGMENTS[finger],
            dirs,
        );
    }
    local.map(|p| pose.transform_point(p * scale))
}

/// The shipped rock/paper/scissors model: one centroid per class taken from
/// the generator's noise-free pose.
pub fn rps_model() -> GestureModel {
    let mut classes = Vec::new();
    let mut centroids = Vec::new();
    for gesture in RpsGesture::ALL {
        let joints = synthetic_hand_pose(gesture, &Pose::IDENTITY, 1.0);
        let hand = HandState::tracked(crate::model::Handedness::Right, joints).expect("finite joints");
        classes.push(gesture.label().to_string());
        centroids.push(hand_features(&hand).expect("tracked hand"));
    }
    GestureModel::new(classes, centroids).expect("generator model is valid")
}
