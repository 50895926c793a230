//! Bit-exact readers and writers for every on-disk format.

mod cloud_bin;
mod depth_png;
mod flow_file;
mod intrinsics_txt;
mod ply;

pub use cloud_bin::{read_cloud_bin, write_cloud_bin};
pub use depth_png::{read_depth_png, write_depth_png, DEPTH_SCALE, MAX_DEPTH_M};
pub use flow_file::{read_scene_flow, write_scene_flow, FLOW_MAGIC};
pub use intrinsics_txt::{read_intrinsics, write_intrinsics};
pub use ply::write_ply;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a 16-bit single-channel image")]
    NotLuma16 { path: PathBuf },
    #[error("{path}: malformed image: {message}")]
    BadImage { path: PathBuf, message: String },
    #[error("{path}: depth {depth_m} m at pixel ({u}, {v}) exceeds the {MAX_DEPTH_M} m valid range")]
    DepthOutOfRange {
        path: PathBuf,
        u: u32,
        v: u32,
        depth_m: f64,
    },
    #[error("depth {depth_m} m does not fit the 16-bit 1/256 m encoding")]
    DepthNotEncodable { depth_m: f64 },
    #[error("{path}: truncated at byte {offset}: {message}")]
    Truncated {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("{path}: bad magic at byte 0 (expected \"PLSF0001\")")]
    BadMagic { path: PathBuf },
    #[error("{path}: missing key \"{key}\"")]
    MissingKey { path: PathBuf, key: &'static str },
    #[error("{path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid data: {0}")]
    Invalid(String),
}

impl IoError {
    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}
