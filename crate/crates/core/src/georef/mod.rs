//! Direct georeferencing: TLE decoding, SGP4 propagation, Earth rotation,
//! attitude interpolation, pinhole lines of sight and ellipsoid
//! intersection, plus error statistics and bias estimation.

mod bias;
mod camera;
mod ellipsoid;
mod errors;
mod frames;
mod geoline;
mod metadata;
mod orbit;
mod quat;
mod sgp4;
mod time;
mod tle;

use thiserror::Error;

pub use bias::{estimate_bias, BiasEstimate, SceneBias, DEFAULT_MIN_SCENES};
pub use camera::{pixel_los, BandRowOffsets, ImagerModel};
pub use ellipsoid::{intersect_ellipsoid, intersect_point};
pub use errors::{decompose, georef_error_stats, GeorefErrorStats, PointError, TruthPoint};
pub use frames::{
    azimuth_deg, earth_rotation, ecef_to_geodetic, eci_to_ecef, eci_to_ecef_velocity, enu_basis, geodetic_to_ecef,
    GeodeticCoord, EARTH_RATE, WGS84_A, WGS84_B, WGS84_E2, WGS84_F,
};
pub use geoline::{
    build_geogrid, georeference_line, grid_nodes, orbital_frame, Corners, GeoGrid, Georeferencer, TrackPoint,
    WorldFile,
};
pub use metadata::{AcqMetadata, AttitudeFrame};
pub use orbit::{CircularOrbit, Orbit, MU_WGS84};
pub use quat::{slerp_attitude, AttitudeSample, AttitudeTrack, Quaternion};
pub use sgp4::{kepler_semi_major_axis, sgp4_propagate, Sgp4, StateVector};
pub use time::{gmst, julian_date, SIDEREAL_DAY_S};
pub use tle::{format_tle, parse_tle, tle_checksum, TleElements};

#[derive(Debug, Error)]
pub enum GeorefError {
    #[error("TLE line {line} has length {len}, expected 69")]
    BadLength { line: u8, len: usize },
    #[error("TLE line {line} checksum mismatch")]
    BadChecksum { line: u8 },
    #[error("cannot parse TLE field {field}: {text:?}")]
    FieldParse { field: &'static str, text: String },
    #[error("orbital period {period_min:.1} min is deep space; only near-Earth SGP4 is supported")]
    DeepSpaceUnsupported { period_min: f64 },
    #[error("orbit decayed (radius {radius_km:.1} km)")]
    Decay { radius_km: f64 },
    #[error("propagation failed: {0}")]
    Propagation(String),
    #[error("no attitude samples")]
    EmptySamples,
    #[error("time {t} outside attitude samples [{first}, {last}]")]
    OutOfRange { t: f64, first: f64, last: f64 },
    #[error("column {column} outside imager with {columns} columns")]
    ColumnOutOfRange { column: usize, columns: usize },
    #[error("line of sight does not intersect the ellipsoid")]
    NoIntersection,
    #[error("no truth points")]
    EmptyTruth,
    #[error("{found} scenes, at least {needed} required")]
    InsufficientScenes { found: usize, needed: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("metadata: {0}")]
    Metadata(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeorefError>;
