use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::model::vec3_array;

/// Placeholder lighting: one ambient intensity and one dominant direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LightingEstimate {
    pub ambient_intensity: f64,
    #[serde(with = "vec3_array")]
    pub primary_direction: DVec3,
}

impl Default for LightingEstimate {
    fn default() -> Self {
        estimate_lighting(&LightingConfig::default())
    }
}

/// Scene-file lighting block: `{ambient, direction}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightingConfig {
    pub ambient: f64,
    pub direction: [f64; 3],
}

impl Default for LightingConfig {
    fn default() -> Self {
        Self {
            ambient: 1.0,
            direction: [0.0, -1.0, 0.0],
        }
    }
}

/// Returns the configured estimate with the direction normalized. Negative or
/// non-finite intensities clamp to zero; a degenerate direction falls back to
/// straight down.
pub fn estimate_lighting(config: &LightingConfig) -> LightingEstimate {
    let ambient_intensity = if config.ambient.is_finite() {
        config.ambient.max(0.0)
    } else {
        0.0
    };
    let dir = DVec3::from_array(config.direction);
    let len = dir.length();
    let primary_direction = if len.is_finite() && len > 0.0 {
        dir / len
    } else {
        DVec3::NEG_Y
    };
    LightingEstimate {
        ambient_intensity,
        primary_direction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_estimate() {
        let est = estimate_lighting(&LightingConfig::default());
        assert_eq!(est.ambient_intensity, 1.0);
        assert_eq!(est.primary_direction, DVec3::NEG_Y);
    }

    #[test]
    fn configured_ambient() {
        let est = estimate_lighting(&LightingConfig {
            ambient: 0.3,
            ..Default::default()
        });
        assert_eq!(est.ambient_intensity, 0.3);
    }

    #[test]
    fn direction_is_normalized() {
        let est = estimate_lighting(&LightingConfig {
            ambient: 1.0,
            direction: [3.0, -4.0, 0.0],
        });
        assert!((est.primary_direction.length() - 1.0).abs() < 1e-12);
        assert!((est.primary_direction - DVec3::new(0.6, -0.8, 0.0)).length() < 1e-12);
        let zero = estimate_lighting(&LightingConfig {
            ambient: -2.0,
            direction: [0.0; 3],
        });
        assert_eq!(zero.primary_direction, DVec3::NEG_Y);
        assert_eq!(zero.ambient_intensity, 0.0);
    }
}
