use serde::{Deserialize, Serialize};

use super::matching::{residual_with, EdgeMatcher, MatchParams, Residual, DEFAULT_RESIDUAL_POINTS};
use super::{fit_distortion, predict_shift_prior, remove_outliers, resample, CoregError, DistortionModel, Result, ShiftPrior};
use crate::georef::AcqMetadata;
use crate::raster::{BandId, Plane, RawScene};

/// Scene-level co-registration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoregParams {
    pub reference: BandId,
    pub matching: MatchParams,
    pub order: usize,
    pub gate: f64,
    /// Tile count for the post-alignment residual; 0 skips the measurement.
    pub residual_points: usize,
    /// Predict the shift from metadata geometry when available.
    pub use_attitude_prior: bool,
}

impl Default for CoregParams {
    fn default() -> Self {
        Self {
            reference: BandId::Red,
            matching: MatchParams::default(),
            order: 2,
            gate: ShiftPrior::DEFAULT_GATE,
            residual_points: DEFAULT_RESIDUAL_POINTS,
            use_attitude_prior: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorSource {
    Attitude,
    Median,
}

/// What happened to one target band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAlignment {
    pub band: BandId,
    pub matches: usize,
    pub inliers: usize,
    pub prior: ShiftPrior,
    pub prior_source: PriorSource,
    pub model: DistortionModel,
    pub invalid_pixels: usize,
    pub residual: Option<Residual>,
}

/// Scene with every band resampled onto the reference band geometry.
#[derive(Debug, Clone)]
pub struct AlignedScene {
    pub scene: RawScene,
    pub reference: BandId,
    /// Applied warp per band (zero for the reference).
    pub models: [DistortionModel; 4],
    pub valid: [Option<Plane<bool>>; 4],
    pub bands: Vec<BandAlignment>,
}

fn band_prior(
    metadata: Option<&AcqMetadata>,
    scene: &RawScene,
    params: &CoregParams,
    band: BandId,
    matches: &[super::MatchPoint],
) -> Result<(ShiftPrior, PriorSource)> {
    if let (true, Some(meta)) = (params.use_attitude_prior, metadata) {
        let t_mid = scene.line_times()[scene.lines() / 2];
        match predict_shift_prior(meta, params.reference, band, t_mid, params.gate) {
            Ok(p) => return Ok((p, PriorSource::Attitude)),
            Err(CoregError::MissingAttitude) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((ShiftPrior::from_matches(matches, params.gate)?, PriorSource::Median))
}

/// Matches, filters, fits and resamples every non-reference band.
pub fn align_scene(scene: &RawScene, params: &CoregParams, metadata: Option<&AcqMetadata>) -> Result<AlignedScene> {
    let (w, h) = (scene.width(), scene.lines());
    let matcher = EdgeMatcher::new(scene.plane(params.reference), params.matching)?;
    let mut planes = scene.planes().clone();
    let mut models: [DistortionModel; 4] = std::array::from_fn(|_| DistortionModel::zero(params.order, w, h));
    let mut valid: [Option<Plane<bool>>; 4] = Default::default();
    let mut bands = Vec::new();
    for band in BandId::ALL {
        if band == params.reference {
            continue;
        }
        let matches = matcher.match_plane(scene.plane(band))?;
        let (prior, prior_source) = band_prior(metadata, scene, params, band, &matches)?;
        let inliers = remove_outliers(&matches, &prior)?;
        let model = fit_distortion(&inliers, params.order, w, h)?;
        let out = resample(scene.plane(band), &model);
        let residual = match params.residual_points {
            0 => None,
            n => Some(residual_with(&matcher, &out.plane, n)?),
        };
        bands.push(BandAlignment {
            band,
            matches: matches.len(),
            inliers: inliers.len(),
            prior,
            prior_source,
            invalid_pixels: out.invalid_count(),
            model: model.clone(),
            residual,
        });
        planes[band.index()] = out.plane;
        valid[band.index()] = Some(out.valid);
        models[band.index()] = model;
    }
    let scene = scene.with_planes(planes).map_err(|e| CoregError::InvalidParams(e.to_string()))?;
    Ok(AlignedScene { scene, reference: params.reference, models, valid, bands })
}
