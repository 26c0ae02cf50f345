//! Band co-registration: edge maps, tiled FFT correlation against a reference
//! band, outlier rejection, polynomial warp fitting and resampling.

mod canny;
mod distortion;
mod matching;
mod outliers;
mod prior;
mod resample;
mod scene;
mod xcorr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canny::{canny_auto, canny_edges, gaussian_blur, hysteresis, non_max_suppression, sobel, RelativeThresholds};
pub use distortion::{coeff_count, fit_distortion, monomials, DistortionModel};
pub use matching::{
    coreg_residual, collect_matches, edge_feature, residual_grid, residual_with, EdgeMatcher, MatchParams, Residual,
    DEFAULT_RESIDUAL_POINTS,
};
pub use outliers::{remove_outliers, ShiftPrior, MAD_FACTOR, MAD_FLOOR_PX};
pub use prior::predict_shift_prior;
pub use resample::{bilinear, resample, Resampled};
pub use scene::{align_scene, AlignedScene, BandAlignment, CoregParams, PriorSource};
pub use xcorr::{fft_xcorr, locate_peak, CorrelationMode, Correlator, Shift};


#[derive(Debug, Error)]
pub enum CoregError {
    #[error("edge thresholds must satisfy 0 < low < high (got {t_low}, {t_high})")]
    BadThresholds { t_low: f64, t_high: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("tile shape: {0}")]
    TileShape(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("tile has zero variance")]
    FlatTile,
    #[error("no tile produced a usable match")]
    NoMatches,
    #[error("every match was rejected as an outlier")]
    AllRejected,
    #[error("{found} matches, at least {needed} required")]
    TooFewMatches { found: usize, needed: usize },
    #[error("distortion fit is singular")]
    SingularFit,
    #[error("metadata carries no attitude samples")]
    MissingAttitude,
    #[error("geometry: {0}")]
    Geometry(#[from] crate::georef::GeorefError),
}

pub type Result<T> = std::result::Result<T, CoregError>;

/// Shift of the target band relative to the reference at one tile center:
/// a feature at `(x_ref, y_ref)` in the reference appears at
/// `(x_ref + dx, y_ref + dy)` in the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPoint {
    pub x_ref: f64,
    pub y_ref: f64,
    pub dx: f64,
    pub dy: f64,
    pub score: f64,
    pub tile_id: usize,
}
