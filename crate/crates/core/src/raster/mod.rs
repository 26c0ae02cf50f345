//! Scene container, planes, statistics and the on-disk formats for raw scenes
//! and calibration tables.

mod calib;
mod io;
mod plane;
mod scene;
mod stats;

pub use calib::{BandCalibration, CalibrationTable};
pub use io::{load_raw, read_raw, save_raw, write_raw, HEADER_LEN, MAGIC};
pub use plane::Plane;
pub use scene::{BandId, RawScene};
pub use stats::{line_stats, mean_std, SceneStats};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("bad magic {0:?}, expected \"L3RW\"")]
    BadMagic([u8; 4]),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid header or scene: {0}")]
    HeaderInvalid(String),
    #[error("window out of bounds: {0}")]
    OutOfBounds(String),
    #[error("invalid calibration table: {0}")]
    CalibInvalid(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RasterError>;
