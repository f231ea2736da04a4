use std::collections::BTreeMap;

use glam::DVec3;
use serde::{Deserialize, Serialize};

use super::RuntimeError;
use crate::math::Pose;
use crate::model::{validate_raw_id, vec3_array};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UiNodeKind {
    Panel,
    TextView,
    Button,
    Model3d,
}

impl UiNodeKind {
    /// Box used for ray selection when the script does not give one.
    pub fn default_half_extents(self) -> DVec3 {
        match self {
            UiNodeKind::Panel => DVec3::new(0.2, 0.15, 0.01),
            UiNodeKind::TextView => DVec3::new(0.15, 0.05, 0.005),
            UiNodeKind::Button => DVec3::new(0.05, 0.025, 0.01),
            UiNodeKind::Model3d => DVec3::new(0.1, 0.1, 0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UiNode {
    pub id: String,
    pub kind: UiNodeKind,
    pub pose: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub visible: bool,
    #[serde(with = "vec3_array")]
    pub half_extents: DVec3,
}

impl UiNode {
    /// Visible node with the kind's default extents. Text views start with
    /// empty text.
    pub fn new(id: impl Into<String>, kind: UiNodeKind, pose: Pose) -> Self {
        Self {
            id: id.into(),
            kind,
            pose,
            text: (kind == UiNodeKind::TextView).then(String::new),
            visible: true,
            half_extents: kind.default_half_extents(),
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        validate_raw_id(&self.id)?;
        if self.kind == UiNodeKind::TextView && self.text.is_none() {
            return Err(RuntimeError::InvalidNode(format!("text view `{}` needs text", self.id)));
        }
        if !(self.half_extents.cmpgt(DVec3::ZERO).all() && self.half_extents.is_finite()) {
            return Err(RuntimeError::InvalidNode(format!(
                "node `{}` needs positive extents",
                self.id
            )));
        }
        Ok(())
    }
}

/// The script's UI nodes keyed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UiScene {
    nodes: BTreeMap<String, UiNode>,
}

impl UiScene {
    pub fn add(&mut self, node: UiNode) -> Result<(), RuntimeError> {
        node.validate()?;
        if self.nodes.contains_key(&node.id) {
            return Err(RuntimeError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Result<UiNode, RuntimeError> {
        self.nodes
            .remove(id)
            .ok_or_else(|| RuntimeError::UnknownNode(id.into()))
    }

    pub fn get(&self, id: &str) -> Option<&UiNode> {
        self.nodes.get(id)
    }

    pub fn get_mut(&mut self, id: &str) -> Result<&mut UiNode, RuntimeError> {
        self.nodes
            .get_mut(id)
            .ok_or_else(|| RuntimeError::UnknownNode(id.into()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &UiNode> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
