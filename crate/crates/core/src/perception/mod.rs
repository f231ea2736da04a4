//! Depth perception: pinhole projection, synthetic depth, ray marching,
//! normals, occlusion and a lighting stub.
//!
//! All functions are pure; frames are immutable after construction.

mod depth;
mod lighting;
mod query;
mod synth;
mod xrdf;

pub use depth::{DepthFrame, Intrinsics, Projection};
pub use lighting::{estimate_lighting, LightingConfig, LightingEstimate};
pub use query::{estimate_normal, occlusion_test, raycast_depth, DepthHit, Occlusion, PerceptionConfig};
pub use synth::{synthesize_depth, DepthCamera, Primitive, SyntheticScene};
pub use xrdf::{decode_xrdf, read_xrdf, write_xrdf, XRDF_MAGIC, XRDF_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerceptionError {
    #[error("pixel ({u}, {v}) is outside the image")]
    PixelOutOfBounds { u: f64, v: f64 },
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("ray direction must be unit length, norm {0}")]
    InvalidDirection(f64),
    #[error("max distance must be positive, got {0}")]
    InvalidMaxDistance(f64),
    #[error("insufficient-support: pixel ({0}, {1}) lacks a valid 4-neighborhood")]
    InsufficientSupport(u32, u32),
    #[error("intrinsics need positive focal lengths")]
    InvalidIntrinsics,
    #[error("frame must be at least 1x1")]
    EmptyFrame,
    #[error("depth buffer holds {got} samples, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("depth sample {0} is negative or non-finite")]
    InvalidDepthValue(usize),
    #[error("primitive radius and extents must be positive")]
    InvalidPrimitive,
    #[error("not an XRDF file")]
    BadMagic,
    #[error("unsupported XRDF version {0}")]
    UnsupportedVersion(u32),
    #[error("XRDF data truncated: need {needed} bytes, have {got}")]
    Truncated { needed: usize, got: usize },
    #[error("invalid camera pose")]
    InvalidPose,
    #[error("i/o: {0}")]
    Io(String),
}
