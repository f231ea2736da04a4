//! Scene description files.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{syntax_error, FormatError};
use crate::model::{Plane, WorldObject, WorldState};
use crate::perception::{
    estimate_lighting, DepthCamera, DepthFrame, LightingConfig, PerceptionConfig, Primitive, SyntheticScene,
};
use crate::physics::PhysicsConfig;

pub const SCENE_VERSION: u32 = 1;

/// Analytic geometry rendered once into the session's depth frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthSceneSpec {
    pub primitives: Vec<Primitive>,
    #[serde(default)]
    pub camera: DepthCamera,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    #[serde(default)]
    pub objects: Vec<WorldObject>,
    #[serde(default)]
    pub planes: Vec<Plane>,
    #[serde(default)]
    pub lighting: LightingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_scene: Option<DepthSceneSpec>,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub perception: PerceptionConfig,
}

impl Default for SceneFile {
    fn default() -> Self {
        Self {
            version: SCENE_VERSION,
            objects: Vec::new(),
            planes: Vec::new(),
            lighting: LightingConfig::default(),
            depth_scene: None,
            physics: PhysicsConfig::default(),
            perception: PerceptionConfig::default(),
        }
    }
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let value: Value = serde_json::from_str(text).map_err(|e| syntax_error(text, &e))?;
        match value.get("version").and_then(Value::as_u64) {
            Some(v) if v == u64::from(SCENE_VERSION) => {}
            Some(v) => {
                return Err(FormatError::UnsupportedVersion {
                    what: "scene",
                    found: v,
                    supported: SCENE_VERSION,
                })
            }
            None => {
                return Err(FormatError::Malformed {
                    frame: None,
                    message: "missing numeric `version`".into(),
                })
            }
        }
        let scene: SceneFile = serde_json::from_value(value).map_err(|e| FormatError::Malformed {
            frame: None,
            message: e.to_string(),
        })?;
        scene.world_state()?;
        scene
            .physics
            .validate()
            .map_err(|e| FormatError::InvalidScene(e.to_string()))?;
        Ok(scene)
    }

    /// Objects, planes and lighting; depth is attached separately.
    pub fn world_state(&self) -> Result<WorldState, FormatError> {
        let invalid = |e: crate::model::ModelError| FormatError::InvalidScene(e.to_string());
        let mut world = WorldState::default();
        for object in &self.objects {
            world.add_object(object.clone()).map_err(invalid)?;
        }
        for plane in &self.planes {
            world.add_plane(*plane).map_err(invalid)?;
        }
        world.lighting = estimate_lighting(&self.lighting);
        Ok(world)
    }

    pub fn depth_frame(&self) -> Result<Option<DepthFrame>, FormatError> {
        let Some(spec) = &self.depth_scene else {
            return Ok(None);
        };
        let scene =
            SyntheticScene::new(spec.primitives.clone()).map_err(|e| FormatError::InvalidScene(e.to_string()))?;
        spec.camera
            .render(&scene)
            .map(Some)
            .map_err(|e| FormatError::InvalidScene(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scene() {
        let scene = SceneFile::from_json(r#"{"version":1}"#).unwrap();
        assert_eq!(scene, SceneFile::default());
        assert!(scene.depth_frame().unwrap().is_none());
    }

    #[test]
    fn full_scene() {
        let text = r#"{
            "version": 1,
            "objects": [{"id":"mug","label":"mug","kind":"physical",
                         "pose":{"p":[0,1,-2],"q":[0,0,0,1]},"halfExtents":[0.1,0.1,0.1]}],
            "planes": [{"pose":{"p":[0,0,0],"q":[0,0,0,1]},"extents":[2,2]}],
            "lighting": {"ambient": 0.5, "direction": [0, -2, 0]},
            "depthScene": {"primitives":[{"type":"sphere","center":[0,0,-3],"radius":0.5}]},
            "physics": {"gravity":[0,-9.81,0],"dt":0.016666666666666666,"maxSpheres":16,"damping":0.9}
        }"#;
        let scene = SceneFile::from_json(text).unwrap();
        let world = scene.world_state().unwrap();
        assert_eq!(world.find_objects(Some("mug")).len(), 1);
        assert_eq!(world.lighting.primary_direction, glam::DVec3::NEG_Y);
        let depth = scene.depth_frame().unwrap().unwrap();
        assert!((depth.depth_at(64, 64).unwrap() - 2.5).abs() < 1e-6);
        assert_eq!(scene.physics.max_spheres, 16);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        assert!(matches!(
            SceneFile::from_json(r#"{"version":1,"extra":1}"#),
            Err(FormatError::Malformed { .. })
        ));
        assert!(matches!(
            SceneFile::from_json(r#"{"version":3}"#),
            Err(FormatError::UnsupportedVersion { found: 3, .. })
        ));
        assert!(matches!(
            SceneFile::from_json(
                r#"{"version":1,"objects":[{"id":"ui:x","label":"x","kind":"virtual","pose":{"p":[0,0,0],"q":[0,0,0,1]},"halfExtents":[1,1,1]}]}"#
            ),
            Err(FormatError::Malformed { .. })
        ));
    }
}
