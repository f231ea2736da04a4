use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PerceptionError;
use crate::math::Pose;

/// Pinhole intrinsics in pixels. Pixel centers sit at integer coordinates and
/// the image Y axis points down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, PerceptionError> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(PerceptionError::InvalidIntrinsics);
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(PerceptionError::InvalidIntrinsics);
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Camera-space point at planar depth `depth` seen through `pixel`.
    #[inline]
    pub fn unproject(&self, pixel: DVec2, depth: f64) -> DVec3 {
        DVec3::new(
            (pixel.x - self.cx) * depth / self.fx,
            -(pixel.y - self.cy) * depth / self.fy,
            -depth,
        )
    }

    /// Direction through `pixel` scaled so its camera-space z is -1.
    #[inline]
    pub fn pixel_direction(&self, pixel: DVec2) -> DVec3 {
        DVec3::new((pixel.x - self.cx) / self.fx, -(pixel.y - self.cy) / self.fy, -1.0)
    }
}

/// Metric depth image: planar depth along camera -Z, `0.0` marks invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    width: u32,
    height: u32,
    depths: Vec<f32>,
    intrinsics: Intrinsics,
    camera_pose: Pose,
}

/// A projected world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: DVec2,
    pub depth: f64,
}

impl DepthFrame {
    pub fn new(
        width: u32,
        height: u32,
        depths: Vec<f32>,
        intrinsics: Intrinsics,
        camera_pose: Pose,
    ) -> Result<Self, PerceptionError> {
        if width == 0 || height == 0 {
            return Err(PerceptionError::EmptyFrame);
        }
        if depths.len() != width as usize * height as usize {
            return Err(PerceptionError::SizeMismatch {
                expected: width as usize * height as usize,
                got: depths.len(),
            });
        }
        if let Some(bad) = depths.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(PerceptionError::InvalidDepthValue(bad));
        }
        let intrinsics = Intrinsics::new(intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy)?;
        Ok(Self {
            width,
            height,
            depths,
            intrinsics,
            camera_pose,
        })
    }

    /// Frame with every pixel at the same depth.
    pub fn constant(
        width: u32,
        height: u32,
        depth: f32,
        intrinsics: Intrinsics,
        camera_pose: Pose,
    ) -> Result<Self, PerceptionError> {
        Self::new(
            width,
            height,
            vec![depth; width as usize * height as usize],
            intrinsics,
            camera_pose,
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn depths(&self) -> &[f32] {
        &self.depths
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics
    }

    pub fn camera_pose(&self) -> &Pose {
        &self.camera_pose
    }

    /// Stored depth at an integer pixel, `None` when invalid.
    #[inline]
    pub fn depth_at(&self, x: u32, y: u32) -> Option<f64> {
        if x >= self.width || y >= self.height {
            return None;
        }
        let d = self.depths[y as usize * self.width as usize + x as usize];
        (d > 0.0).then_some(d as f64)
    }

    /// True when a continuous pixel coordinate falls inside the image. Each
    /// integer pixel covers `[i - 0.5, i + 0.5)`.
    #[inline]
    pub fn contains(&self, pixel: DVec2) -> bool {
        pixel.x >= -0.5 && pixel.y >= -0.5 && pixel.x < self.width as f64 - 0.5 && pixel.y < self.height as f64 - 0.5
    }

    /// Integer pixel containing a continuous coordinate.
    #[inline]
    pub fn pixel_index(&self, pixel: DVec2) -> Option<(u32, u32)> {
        if !self.contains(pixel) {
            return None;
        }
        let x = (pixel.x + 0.5).floor() as u32;
        let y = (pixel.y + 0.5).floor() as u32;
        Some((x.min(self.width - 1), y.min(self.height - 1)))
    }

    /// Lifts a pixel at planar depth `depth` into world space.
    pub fn backproject(&self, pixel: DVec2, depth: f64) -> Result<DVec3, PerceptionError> {
        if !self.contains(pixel) {
            return Err(PerceptionError::PixelOutOfBounds { u: pixel.x, v: pixel.y });
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(PerceptionError::NonPositiveDepth(depth));
        }
        let camera = self.intrinsics.unproject(pixel, depth);
        Ok(self.camera_pose.transform_point(camera))
    }

    /// Pinhole projection; `None` behind the camera or outside the image.
    pub fn project(&self, world: DVec3) -> Option<Projection> {
        let camera = self.camera_pose.inverse_transform_point(world);
        if !(camera.z < 0.0) {
            return None;
        }
        let depth = -camera.z;
        let k = &self.intrinsics;
        let pixel = DVec2::new(k.fx * camera.x / depth + k.cx, -k.fy * camera.y / depth + k.cy);
        self.contains(pixel).then_some(Projection { pixel, depth })
    }

    /// Backprojects an integer pixel using its stored depth.
    pub fn surface_point(&self, x: u32, y: u32) -> Option<DVec3> {
        let d = self.depth_at(x, y)?;
        Some(
            self.camera_pose
                .transform_point(self.intrinsics.unproject(DVec2::new(x as f64, y as f64), d)),
        )
    }

    /// Content digest of the depth samples (little-endian f32 bytes).
    pub fn depth_digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for d in &self.depths {
            h.update(d.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Frames serialize as a header plus digest; the full image lives in XRDF files.
impl Serialize for DepthFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DepthFrame", 5)?;
        st.serialize_field("width", &self.width)?;
        st.serialize_field("height", &self.height)?;
        st.serialize_field("intrinsics", &self.intrinsics)?;
        st.serialize_field("cameraPose", &self.camera_pose)?;
        st.serialize_field("depthSha256", &hex::encode(self.depth_digest()))?;
        st.end()
    }
}
