//! Browser bindings for three small demonstrations: vignetting correction of
//! a flat-field line, FFT shift measurement between two tiles, and the ground
//! footprint of a scene for a given orbit and pointing offset.

use pushbroom_core::coreg::{bilinear, fft_xcorr};
use pushbroom_core::radiometry::{correct_vignetting, edge_center_ratio, fit_profile_poly2, FalloffWindows};
use pushbroom_core::synth::{generate, render, vignette_profile, AttitudeProfile, OrbitChoice, SynthSpec, Texture, VignetteShape};
use pushbroom_core::{BandId, CalibrationTable, Plane, RawScene};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Flat-field line with the given falloff, before and after an exact
/// calibration.
pub fn vignetting_line(width: usize, falloff_pct: f64, cos4: bool, level: f64) -> Result<Value, String> {
    if !(16..=8192).contains(&width) {
        return Err(format!("width {width} outside 16..=8192"));
    }
    let shape = if cos4 { VignetteShape::Cos4 } else { VignetteShape::Quadratic };
    let profile: Vec<f64> = (0..width).map(|c| vignette_profile(shape, falloff_pct, 0.05, width, c)).collect();
    let lines = 4;
    let raw_row: Vec<u16> = profile.iter().map(|v| (v * level).round().clamp(0.0, 255.0) as u16).collect();
    let plane = Plane::from_fn(width, lines, |x, _| raw_row[x]);
    let scene = RawScene::new(8, std::array::from_fn(|_| plane.clone()), (0..lines).map(|i| i as f64).collect())
        .map_err(|e| e.to_string())?;
    let mut calib = CalibrationTable::identity(width);
    for band in BandId::ALL {
        calib.band_mut(band).response = profile.iter().map(|v| 1.0 / v).collect();
    }
    let corrected = correct_vignetting(&scene, &calib).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = (0..lines).collect();
    let before = scene.plane(BandId::Red);
    let after = corrected.plane(BandId::Red);
    let falloff = |p: &Plane<u16>| edge_center_ratio(p, &rows, FalloffWindows::default()).map_err(|e| e.to_string());
    let fit = fit_profile_poly2(before, &rows).map_err(|e| e.to_string())?;
    Ok(json!({
        "raw": before.row(0),
        "corrected": after.row(0),
        "falloff_before_pct": falloff(before)?,
        "falloff_after_pct": falloff(after)?,
        "poly2": fit.poly2,
    }))
}

/// Measures the displacement between a textured tile and a copy moved by
/// `(dx, dy)` pixels.
pub fn tile_shift(size: usize, dx: f64, dy: f64, seed: u64) -> Result<Value, String> {
    if !(16..=512).contains(&size) {
        return Err(format!("tile size {size} outside 16..=512"));
    }
    if dx.abs() > size as f64 / 4.0 || dy.abs() > size as f64 / 4.0 {
        return Err("shift larger than a quarter tile".into());
    }
    let pad = size / 4 + 2;
    let field = render(&Texture::UrbanBlocks { block: 6.0 }, size + 2 * pad, size + 2 * pad, seed);
    let sample = |x: f64, y: f64| bilinear(&field, x + pad as f64, y + pad as f64).unwrap_or(0.0);
    let reference = Plane::from_fn(size, size, |x, y| sample(x as f64, y as f64));
    let target = Plane::from_fn(size, size, |x, y| sample(x as f64 - dx, y as f64 - dy));
    let shift = fft_xcorr(&reference, &target).map_err(|e| e.to_string())?;
    Ok(json!({
        "true": [dx, dy],
        "measured": [shift.dx, shift.dy],
        "error_px": (shift.dx - dx).hypot(shift.dy - dy),
        "score": shift.score,
    }))
}

/// Ground corners, swath and sample distance of a short full-width scene,
/// nadir-pointing and with a constant roll/pitch offset.
pub fn footprint(altitude_km: f64, inclination_deg: f64, roll_deg: f64, pitch_deg: f64) -> Result<Value, String> {
    let base = SynthSpec {
        width: 8000,
        lines: 16,
        grid_step: 8000,
        vignette_falloff: 0.0,
        texture: Texture::Flat,
        orbit: OrbitChoice::Circular { altitude_km, inclination_deg, raan_deg: 0.0, arg_latitude_deg: 0.0 },
        ..SynthSpec::default()
    };
    let offset = SynthSpec {
        attitude_profile: AttitudeProfile::ConstantOffset { roll_deg, pitch_deg, yaw_deg: 0.0 },
        ..base.clone()
    };
    let (_, nadir) = generate(&base).map_err(|e| e.to_string())?;
    let (_, pointed) = generate(&offset).map_err(|e| e.to_string())?;
    let summary = |g: &pushbroom_core::georef::GeoGrid| {
        let c = &g.corners;
        json!({
            "corners": [
                [c.upper_left.lat, c.upper_left.lon],
                [c.upper_right.lat, c.upper_right.lon],
                [c.lower_right.lat, c.lower_right.lon],
                [c.lower_left.lat, c.lower_left.lon],
            ],
            "swath_km": g.swath_m / 1000.0,
            "gsd_m": g.gsd_across_m,
        })
    };
    let shift = pushbroom_core::synth::truth_georef_error(&pointed.geogrid, &nadir.geogrid).map_err(|e| e.to_string())?;
    Ok(json!({
        "nadir": summary(&nadir.geogrid),
        "pointed": summary(&pointed.geogrid),
        "offset_across_km": shift.mean_across_m / 1000.0,
        "offset_along_km": shift.mean_along_m / 1000.0,
    }))
}

#[wasm_bindgen(js_name = vignettingLine)]
pub fn vignetting_line_js(width: usize, falloff_pct: f64, cos4: bool) -> Result<String, JsError> {
    to_js(vignetting_line(width, falloff_pct, cos4, 200.0))
}

#[wasm_bindgen(js_name = tileShift)]
pub fn tile_shift_js(size: usize, dx: f64, dy: f64, seed: u32) -> Result<String, JsError> {
    to_js(tile_shift(size, dx, dy, seed as u64))
}

#[wasm_bindgen(js_name = footprint)]
pub fn footprint_js(altitude_km: f64, inclination_deg: f64, roll_deg: f64, pitch_deg: f64) -> Result<String, JsError> {
    to_js(footprint(altitude_km, inclination_deg, roll_deg, pitch_deg))
}
