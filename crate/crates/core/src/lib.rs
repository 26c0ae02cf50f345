//! Systematic preprocessing of multispectral pushbroom satellite scenes.
//!
//! The processing chain runs in a fixed order:
//!
//! 1. [`radiometry`]: per-column vignetting and dark-level correction.
//! 2. [`coreg`]: band co-registration by edge-map cross-correlation, robust
//!    outlier rejection, polynomial distortion fitting and resampling.
//! 3. [`georef`]: direct georeferencing from a TLE (SGP4), star-tracker
//!    attitude quaternions and a pinhole imager model.
//!
//! [`synth`] manufactures scenes with known distortions and known ground truth,
//! and [`pipeline`] orchestrates the stages and writes quality reports.

pub mod coreg;
mod lsq;
pub mod georef;
pub mod pipeline;
pub mod radiometry;
pub mod raster;
pub mod synth;

pub use raster::{BandId, CalibrationTable, Plane, RawScene};
