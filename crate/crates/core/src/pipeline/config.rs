use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::coreg::CoregParams;
use crate::raster::BandId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub raw: PathBuf,
    pub calib: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    /// Synthetic truth file; when present the report carries error statistics.
    pub truth: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub vignetting: bool,
    pub coreg: bool,
    pub georef: bool,
    pub coreg_params: CoregParams,
    /// Grid node spacing, pixels.
    pub grid_step: usize,
    /// Rayon worker threads; 0 uses the global pool.
    pub workers: usize,
    pub quicklook: bool,
    pub quicklook_bands: Vec<BandId>,
    /// Percentile bounds of the quicklook stretch.
    pub stretch_percentiles: (f64, f64),
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            raw: PathBuf::new(),
            calib: None,
            meta: None,
            truth: None,
            out_dir: PathBuf::from("out"),
            vignetting: true,
            coreg: true,
            georef: true,
            coreg_params: CoregParams::default(),
            grid_step: 64,
            workers: 0,
            quicklook: false,
            quicklook_bands: vec![BandId::Red, BandId::Green, BandId::Blue],
            stretch_percentiles: (2.0, 98.0),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::input(super::Stage::Config, path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if !(self.vignetting || self.coreg || self.georef) {
            return bad("at least one stage must be enabled");
        }
        if self.raw.as_os_str().is_empty() {
            return bad("raw input path is required");
        }
        if self.vignetting && self.calib.is_none() {
            return bad("vignetting needs a calibration file");
        }
        let inputs: Vec<&Path> = [Some(&self.raw), self.calib.as_ref(), self.meta.as_ref(), self.truth.as_ref()]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect();
        for (i, a) in inputs.iter().enumerate() {
            if inputs[i + 1..].contains(a) {
                return bad(&format!("path {} used twice", a.display()));
            }
        }
        if self.grid_step == 0 {
            return bad("grid step must be positive");
        }
        if self.coreg_params.order > 3 {
            return bad("warp order above 3");
        }
        if !(self.coreg_params.gate > 0.0) {
            return bad("gate must be positive");
        }
        let (lo, hi) = self.stretch_percentiles;
        if !(0.0..100.0).contains(&lo) || !(lo < hi && hi <= 100.0) {
            return bad("stretch percentiles must satisfy 0 <= lo < hi <= 100");
        }
        if self.quicklook && !matches!(self.quicklook_bands.len(), 1 | 3) {
            return Err(PipelineError::BadBandSelection(self.quicklook_bands.len()));
        }
        Ok(())
    }
}
