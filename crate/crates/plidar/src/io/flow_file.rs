//! Scene-flow files: 8-byte magic "PLSF0001", little-endian u64 count,
//! then count little-endian f32 (dx, dy, dz) triples. Index-aligned with
//! the row-major back-projection of the depth map they belong to.

use std::fs;
use std::path::Path;

use plidar_core::interp::SceneFlow;

use super::IoError;

pub const FLOW_MAGIC: &[u8; 8] = b"PLSF0001";

pub fn read_scene_flow(path: &Path) -> Result<SceneFlow, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    if bytes.len() < 16 || &bytes[..8] != FLOW_MAGIC {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = 16 + n as usize * 12;
    if bytes.len() != expected {
        return Err(IoError::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len().min(expected) as u64,
            message: format!(
                "header promises {n} vectors ({expected} bytes), file has {}",
                bytes.len()
            ),
        });
    }
    let mut vectors = Vec::with_capacity(n as usize);
    for rec in bytes[16..].chunks_exact(12) {
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        vectors.push([f(0), f(1), f(2)]);
    }
    SceneFlow::new(vectors).map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn write_scene_flow(sf: &SceneFlow, path: &Path) -> Result<(), IoError> {
    let mut bytes = Vec::with_capacity(16 + sf.len() * 12);
    bytes.extend_from_slice(FLOW_MAGIC);
    bytes.extend_from_slice(&(sf.len() as u64).to_le_bytes());
    for v in sf.vectors() {
        for c in v {
            bytes.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| IoError::file(path, e))
}
