//! Plain-text intrinsics files: lines of `fu <v>`, `fv <v>`, `cu <v>`,
//! `cv <v>` in any order; `#` starts a comment.

use std::fs;
use std::path::Path;

use plidar_core::geometry::CameraIntrinsics;

use super::IoError;

pub fn read_intrinsics(path: &Path) -> Result<CameraIntrinsics, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let mut values: [Option<f64>; 4] = [None; 4];
    const KEYS: [&str; 4] = ["fu", "fv", "cu", "cv"];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let Some(slot) = KEYS.iter().position(|&k| k == key) else {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("unknown key \"{key}\""),
            });
        };
        let value = parts
            .next()
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| IoError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected \"{key} <number>\""),
            })?;
        values[slot] = Some(value);
    }
    for (slot, key) in KEYS.iter().enumerate() {
        if values[slot].is_none() {
            return Err(IoError::MissingKey {
                path: path.to_path_buf(),
                key,
            });
        }
    }
    CameraIntrinsics::new(
        values[0].unwrap(),
        values[1].unwrap(),
        values[2].unwrap(),
        values[3].unwrap(),
    )
    .map_err(|e| IoError::Invalid(e.to_string()))
}

/// Companion writer so `synth` can emit a loadable file.
pub fn write_intrinsics(k: &CameraIntrinsics, path: &Path) -> Result<(), IoError> {
    let text = format!(
        "fu {}\nfv {}\ncu {}\ncv {}\n",
        k.f_u(),
        k.f_v(),
        k.c_u(),
        k.c_v()
    );
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}
