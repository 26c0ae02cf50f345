//! Per-column radiometric correction `Y = R · (X − D)` and the quality metrics
//! used to judge it: edge/center falloff, second-order line-profile fit and
//! area uniformity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lsq::lstsq;
use crate::raster::{mean_std, BandCalibration, BandId, CalibrationTable, Plane, RawScene};

#[derive(Debug, Error)]
pub enum RadiometryError {
    #[error("calibration has {calib} columns, scene has {scene}")]
    WidthMismatch { calib: usize, scene: usize },
    #[error("{band}: response R[{column}] = {value} is not positive")]
    NonPositiveResponse { band: BandId, column: usize, value: f64 },
    #[error("dark scene has {lines} lines, at least {min} required")]
    TooFewLines { lines: usize, min: usize },
    #[error("center window mean is zero")]
    ZeroCenterMean,
    #[error("second-order fit is degenerate")]
    DegenerateFit,
    #[error("region mean is zero")]
    ZeroMean,
    #[error("bad region or rows: {0}")]
    OutOfBounds(String),
}

pub type Result<T> = std::result::Result<T, RadiometryError>;

/// Axis-aligned pixel region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn full<T: Copy>(plane: &Plane<T>) -> Self {
        Self {
            x0: 0,
            y0: 0,
            width: plane.width(),
            height: plane.height(),
        }
    }
}

/// Relative column profile and its second-order fit over `u = c / (w − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    /// Column mean divided by the profile maximum.
    pub relative: Vec<f64>,
    /// `(a0, a1, a2)` of `a0 + a1·u + a2·u²`.
    pub poly2: [f64; 3],
    pub rms_residual: f64,
}

impl LineProfile {
    pub fn eval(&self, u: f64) -> f64 {
        self.poly2[0] + u * (self.poly2[1] + u * self.poly2[2])
    }
}

fn check_calib(scene: &RawScene, calib: &CalibrationTable) -> Result<()> {
    if calib.columns() != scene.width() {
        return Err(RadiometryError::WidthMismatch {
            calib: calib.columns(),
            scene: scene.width(),
        });
    }
    for band in BandId::ALL {
        let c = calib.band(band);
        if let Some((column, &value)) = c
            .response
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(RadiometryError::NonPositiveResponse { band, column, value });
        }
        if c.dark.len() != scene.width() {
            return Err(RadiometryError::WidthMismatch {
                calib: c.dark.len(),
                scene: scene.width(),
            });
        }
    }
    Ok(())
}

#[inline]
fn corrected_value(x: u16, r: f64, d: f64) -> f64 {
    r * (x as f64 - d).max(0.0)
}

/// Round half up, then clamp into the DN range.
#[inline]
fn quantize(y: f64, max_dn: u16) -> u16 {
    (y + 0.5).floor().clamp(0.0, max_dn as f64) as u16
}

fn correct_plane(plane: &Plane<u16>, cal: &BandCalibration, max_dn: u16) -> Plane<u16> {
    let mut out = plane.clone();
    let w = out.width();
    out.as_mut_slice()
        .par_chunks_mut(w)
        .for_each(|row| {
            for ((v, &r), &d) in row.iter_mut().zip(&cal.response).zip(&cal.dark) {
                *v = quantize(corrected_value(*v, r, d), max_dn);
            }
        });
    out
}

/// Applies `Y_i = round(R_i · max(X_i − D_i, 0))` to every line of every band,
/// clamped to the scene DN range.
///
/// Lines are processed independently (in parallel on the current rayon pool);
/// the result does not depend on how lines are partitioned.
pub fn correct_vignetting(scene: &RawScene, calib: &CalibrationTable) -> Result<RawScene> {
    check_calib(scene, calib)?;
    let max_dn = scene.max_dn();
    let planes = std::array::from_fn(|b| {
        let band = BandId::ALL[b];
        correct_plane(scene.plane(band), calib.band(band), max_dn)
    });
    Ok(scene
        .with_planes(planes)
        .expect("quantized planes stay within the scene DN range"))
}

/// Pre-rounding, unclamped `R · max(X − D, 0)` for every band.
pub fn correct_vignetting_f64(
    scene: &RawScene,
    calib: &CalibrationTable,
) -> Result<[Plane<f64>; 4]> {
    check_calib(scene, calib)?;
    Ok(std::array::from_fn(|b| {
        let band = BandId::ALL[b];
        let cal = calib.band(band);
        let plane = scene.plane(band);
        Plane::from_fn(plane.width(), plane.height(), |x, y| {
            corrected_value(plane.get(x, y), cal.response[x], cal.dark[x])
        })
    }))
}

pub const DEFAULT_MIN_DARK_LINES: usize = 32;

/// Per-column dark level from a dark observation: column mean over all lines,
/// rounded to the nearest DN.
pub fn build_dark_from_scene(dark_scene: &RawScene, min_lines: usize) -> Result<[Vec<f64>; 4]> {
    if dark_scene.lines() < min_lines {
        return Err(RadiometryError::TooFewLines {
            lines: dark_scene.lines(),
            min: min_lines,
        });
    }
    let rows: Vec<usize> = (0..dark_scene.lines()).collect();
    Ok(std::array::from_fn(|b| {
        dark_scene
            .plane(BandId::ALL[b])
            .column_means(&rows)
            .into_iter()
            .map(|m| (m + 0.5).floor())
            .collect()
    }))
}

fn check_rows<T: Copy>(plane: &Plane<T>, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(RadiometryError::OutOfBounds("no rows selected".into()));
    }
    if let Some(r) = rows.iter().find(|&&r| r >= plane.height()) {
        return Err(RadiometryError::OutOfBounds(format!(
            "row {r} of {}",
            plane.height()
        )));
    }
    Ok(())
}

/// Column windows used by [`edge_center_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalloffWindows {
    /// Width of each of the three windows as a fraction of the line width.
    pub fraction: f64,
}

impl Default for FalloffWindows {
    fn default() -> Self {
        Self { fraction: 0.05 }
    }
}

impl FalloffWindows {
    pub fn span(&self, width: usize) -> usize {
        ((self.fraction * width as f64).round() as usize).clamp(1, width / 3)
    }

    /// Normalized column `(c + 0.5) / w` at the middle of the outer windows.
    pub fn edge_anchor(&self, width: usize) -> f64 {
        self.span(width) as f64 / 2.0 / width as f64
    }
}

/// Brightness falloff in percent: `100 · (1 − min(edge_l, edge_r) / center)`,
/// each term the mean over its column window and the given rows.
pub fn edge_center_ratio<T: Copy + Into<f64>>(
    plane: &Plane<T>,
    rows: &[usize],
    windows: FalloffWindows,
) -> Result<f64> {
    check_rows(plane, rows)?;
    let w = plane.width();
    if w < 16 {
        return Err(RadiometryError::OutOfBounds(format!(
            "width {w} below 16"
        )));
    }
    let means = plane.column_means(rows);
    let n = windows.span(w);
    let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let left = avg(&means[..n]);
    let right = avg(&means[w - n..]);
    let c0 = (w - n) / 2;
    let center = avg(&means[c0..c0 + n]);
    if center == 0.0 {
        return Err(RadiometryError::ZeroCenterMean);
    }
    Ok(100.0 * (1.0 - left.min(right) / center))
}

/// Least-squares `a0 + a1·u + a2·u²` over `u = c / (len − 1)`.
pub fn fit_poly2(relative: &[f64]) -> Result<LineProfile> {
    let w = relative.len();
    if w < 3 {
        return Err(RadiometryError::DegenerateFit);
    }
    let denom = (w - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..w)
        .map(|c| {
            let u = c as f64 / denom;
            vec![1.0, u, u * u]
        })
        .collect();
    let fit = lstsq(&rows, relative).ok_or(RadiometryError::DegenerateFit)?;
    Ok(LineProfile {
        relative: relative.to_vec(),
        poly2: [fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]],
        rms_residual: fit.rms(),
    })
}

/// Relative column profile (mean over `rows`, divided by its maximum) and
/// its second-order fit.
pub fn fit_profile_poly2<T: Copy + Into<f64>>(
    plane: &Plane<T>,
    rows: &[usize],
) -> Result<LineProfile> {
    check_rows(plane, rows)?;
    if plane.width() < 3 {
        return Err(RadiometryError::DegenerateFit);
    }
    let means = plane.column_means(rows);
    let max = means.iter().copied().fold(f64::MIN, f64::max);
    if !(max > 0.0) {
        return Err(RadiometryError::DegenerateFit);
    }
    let relative: Vec<f64> = means.iter().map(|m| m / max).collect();
    fit_poly2(&relative)
}

/// `100 · std / mean` over a region (population std).
pub fn uniformity_std<T: Copy + Into<f64>>(plane: &Plane<T>, region: Region) -> Result<f64> {
    if region.width == 0
        || region.height == 0
        || region.x0 + region.width > plane.width()
        || region.y0 + region.height > plane.height()
    {
        return Err(RadiometryError::OutOfBounds(format!("{region:?}")));
    }
    let values: Vec<f64> = (region.y0..region.y0 + region.height)
        .flat_map(|y| plane.row(y)[region.x0..region.x0 + region.width].iter().map(|&v| v.into()))
        .collect();
    let (mean, std) = mean_std(&values);
    if mean == 0.0 {
        return Err(RadiometryError::ZeroMean);
    }
    Ok(100.0 * std / mean)
}

/// How a flat-field observation is turned into a response vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatFieldModel {
    /// `R = 1 / relative profile`, column by column.
    Measured,
    /// `R = 1 / poly2 fit` of the relative profile.
    Poly2,
}

/// Builds a calibration table from a flat-field observation and a dark
/// level per band. The relative profile is measured on dark-subtracted DNs.
pub fn calibration_from_flat_field(
    flat: &RawScene,
    dark: &[Vec<f64>; 4],
    model: FlatFieldModel,
) -> Result<CalibrationTable> {
    let w = flat.width();
    let rows: Vec<usize> = (0..flat.lines()).collect();
    let mut bands = Vec::with_capacity(4);
    for band in BandId::ALL {
        let d = &dark[band.index()];
        if d.len() != w {
            return Err(RadiometryError::WidthMismatch {
                calib: d.len(),
                scene: w,
            });
        }
        let plane = flat.plane(band);
        let signal = Plane::from_fn(w, flat.lines(), |x, y| (plane.get(x, y) as f64 - d[x]).max(0.0));
        let profile = fit_profile_poly2(&signal, &rows)?;
        let denom = (w - 1).max(1) as f64;
        let response = (0..w)
            .map(|c| {
                let rel = match model {
                    FlatFieldModel::Measured => profile.relative[c],
                    FlatFieldModel::Poly2 => profile.eval(c as f64 / denom),
                };
                if rel > 0.0 {
                    Ok(1.0 / rel)
                } else {
                    Err(RadiometryError::NonPositiveResponse {
                        band,
                        column: c,
                        value: rel,
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        bands.push(BandCalibration {
            response,
            dark: d.clone(),
        });
    }
    let bands: [BandCalibration; 4] = bands.try_into().expect("four bands");
    Ok(CalibrationTable::new(bands).expect("shape checked above"))
}
