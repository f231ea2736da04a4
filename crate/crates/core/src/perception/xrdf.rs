//! Binary depth fixture format.
//!
//! Little-endian layout: `b"XRDF"`, `u32` version (1), `u32` width, `u32`
//! height, four `f32` intrinsics (fx, fy, cx, cy), seven `f32` camera pose
//! values (px, py, pz, qx, qy, qz, qw), then `width * height` `f32` depths in
//! row-major order.

use std::io::{Read, Write};

use glam::{DQuat, DVec3};

use super::{DepthFrame, Intrinsics, PerceptionError};
use crate::math::Pose;

pub const XRDF_MAGIC: &[u8; 4] = b"XRDF";
pub const XRDF_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 3 + 4 * 4 + 4 * 7;

pub fn write_xrdf<W: Write>(frame: &DepthFrame, mut out: W) -> std::io::Result<()> {
    out.write_all(XRDF_MAGIC)?;
    for v in [XRDF_VERSION, frame.width(), frame.height()] {
        out.write_all(&v.to_le_bytes())?;
    }
    let k = frame.intrinsics();
    let pose = frame.camera_pose();
    let p = pose.position();
    let q = pose.orientation();
    for v in [k.fx, k.fy, k.cx, k.cy, p.x, p.y, p.z, q.x, q.y, q.z, q.w] {
        out.write_all(&(v as f32).to_le_bytes())?;
    }
    for d in frame.depths() {
        out.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_xrdf<R: Read>(mut input: R) -> Result<DepthFrame, PerceptionError> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| PerceptionError::Io(e.to_string()))?;
    decode_xrdf(&bytes)
}

pub fn decode_xrdf(bytes: &[u8]) -> Result<DepthFrame, PerceptionError> {
    if bytes.len() < HEADER_LEN {
        return Err(PerceptionError::Truncated {
            needed: HEADER_LEN,
            got: bytes.len(),
        });
    }
    if &bytes[..4] != XRDF_MAGIC {
        return Err(PerceptionError::BadMagic);
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
    let version = u32_at(4);
    if version != XRDF_VERSION {
        return Err(PerceptionError::UnsupportedVersion(version));
    }
    let (width, height) = (u32_at(8), u32_at(12));
    let count = width as usize * height as usize;
    let needed = HEADER_LEN + count * 4;
    if bytes.len() < needed {
        return Err(PerceptionError::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    let f: Vec<f64> = (0..11).map(|i| f32_at(16 + 4 * i)).collect();
    let intrinsics = Intrinsics::new(f[0], f[1], f[2], f[3])?;
    // f32 storage loses a little of the quaternion norm; renormalize.
    let q = DQuat::from_xyzw(f[7], f[8], f[9], f[10]).normalize();
    let pose = Pose::new(DVec3::new(f[4], f[5], f[6]), q).map_err(|_| PerceptionError::InvalidPose)?;
    let depths = bytes[HEADER_LEN..needed]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DepthFrame::new(width, height, depths, intrinsics, pose)
}
