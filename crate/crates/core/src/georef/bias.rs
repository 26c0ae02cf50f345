use serde::{Deserialize, Serialize};

use super::{GeorefError, Result};
use crate::lsq::lstsq;

pub const DEFAULT_MIN_SCENES: usize = 5;

/// Per-scene summary feeding [`estimate_bias`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneBias {
    pub mean_across_m: f64,
    pub mean_along_m: f64,
    /// Satellite altitude at scene center, m.
    pub altitude_m: f64,
    pub ground_speed_mps: f64,
    /// Time-tag drift of the scene as a fraction of the clock-sync
    /// interval. A scene's timing error is modeled as `drift · time_offset`.
    pub time_tag_drift: f64,
    /// Azimuth of the imager's along-track axis on the ground minus the
    /// ground-track azimuth, degrees. Earth rotation makes this nonzero, so
    /// a pure roll also moves the footprint along the track.
    #[serde(default)]
    pub crab_deg: f64,
}

/// Offsets to apply as imager mounting and timing corrections.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    /// Timing error per unit drift, s. Scene `i` uses `drift_i · time_offset_s`.
    pub time_offset_s: f64,
    /// RMS of the fit residual over all across- and along-track means, m.
    pub residual_rms_m: f64,
}

impl BiasEstimate {
    /// Time offset for a scene with the given drift.
    pub fn time_offset_for(&self, drift: f64) -> f64 {
        drift * self.time_offset_s
    }
}

/// Smallest spread of drifts that still separates timing from pitch.
const MIN_DRIFT_SPREAD: f64 = 1e-3;

/// Joint least-squares fit of roll, pitch and timing to the per-scene mean
/// errors. With crab angle `κ`, a roll `r` displaces the ground point by
/// `h·tan r` along the imager's across axis, a pitch `p` by `h·tan p` along
/// its along axis and a timing error by `v·drift·τ` along the track:
///
/// ```text
/// across = h·cos κ·tan r − h·sin κ·tan p
/// along  = h·sin κ·tan r + h·cos κ·tan p + v·drift·τ
/// ```
///
/// When the drifts do not vary enough to separate the last two terms, all
/// along-track error is assigned to pitch.
pub fn estimate_bias(scenes: &[SceneBias], min_scenes: usize) -> Result<BiasEstimate> {
    let needed = min_scenes.max(1);
    if scenes.len() < needed {
        return Err(GeorefError::InsufficientScenes { found: scenes.len(), needed });
    }
    if scenes.iter().any(|s| !(s.altitude_m > 0.0)) {
        return Err(GeorefError::Metadata("scene altitude must be positive".into()));
    }
    let (lo, hi) = scenes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.time_tag_drift), hi.max(s.time_tag_drift)));
    let with_time = hi - lo >= MIN_DRIFT_SPREAD;

    let mut rows = Vec::with_capacity(2 * scenes.len());
    let mut rhs = Vec::with_capacity(2 * scenes.len());
    for s in scenes {
        let (sk, ck) = s.crab_deg.to_radians().sin_cos();
        let h = s.altitude_m;
        let timing = s.ground_speed_mps * s.time_tag_drift;
        rows.push(if with_time { vec![h * ck, -h * sk, 0.0] } else { vec![h * ck, -h * sk] });
        rhs.push(s.mean_across_m);
        rows.push(if with_time { vec![h * sk, h * ck, timing] } else { vec![h * sk, h * ck] });
        rhs.push(s.mean_along_m);
    }
    let fit = lstsq(&rows, &rhs).ok_or(GeorefError::Metadata("degenerate scene set".into()))?;
    Ok(BiasEstimate {
        roll_deg: fit.coeffs[0].atan().to_degrees(),
        pitch_deg: fit.coeffs[1].atan().to_degrees(),
        time_offset_s: if with_time { fit.coeffs[2] } else { 0.0 },
        residual_rms_m: fit.rms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(across: f64, along: f64, drift: f64) -> SceneBias {
        SceneBias {
            mean_across_m: across,
            mean_along_m: along,
            altitude_m: 510_000.0,
            ground_speed_mps: 7040.0,
            time_tag_drift: drift,
            crab_deg: 0.0,
        }
    }

    #[test]
    fn zero_errors_give_zero() {
        let s: Vec<_> = (0..5).map(|k| scene(0.0, 0.0, k as f64 * 0.2)).collect();
        let b = estimate_bias(&s, 5).unwrap();
        assert_eq!((b.roll_deg, b.pitch_deg, b.time_offset_s), (0.0, 0.0, 0.0));
    }

    #[test]
    fn across_error_inverts_to_roll() {
        let s: Vec<_> = (0..5).map(|_| scene(3570.0, 0.0, 0.0)).collect();
        let b = estimate_bias(&s, 5).unwrap();
        assert!((b.roll_deg - 0.401).abs() < 0.005, "{}", b.roll_deg);
        assert_eq!(b.time_offset_s, 0.0);
    }

    #[test]
    fn pitch_and_time_separate() {
        let (pitch, tau) = (0.5f64.to_radians(), 0.3);
        let s: Vec<_> = [0.1, 0.4, 0.7, 1.0, 1.3]
            .iter()
            .map(|&x| scene(0.0, 510_000.0 * pitch.tan() + 7040.0 * x * tau, x))
            .collect();
        let b = estimate_bias(&s, 5).unwrap();
        assert!((b.pitch_deg - 0.5).abs() < 1e-9);
        assert!((b.time_offset_s - 0.3).abs() < 1e-9);
        assert!((b.time_offset_for(0.4) - 0.12).abs() < 1e-9);
    }

    #[test]
    fn crab_couples_roll_into_along_track() {
        // Forward model written out independently of the estimator.
        let (roll, pitch, tau) = (0.401f64.to_radians(), 0.2f64.to_radians(), 0.15);
        let s: Vec<_> = [(0.3, -3.5), (0.6, 1.0), (0.9, 3.8), (1.2, -2.0), (1.5, 0.2)]
            .iter()
            .map(|&(drift, crab): &(f64, f64)| {
                let h = 515_000.0 + 3000.0 * drift;
                let v = 7000.0 + 20.0 * crab;
                let (sk, ck) = crab.to_radians().sin_cos();
                let (rx, py) = (h * roll.tan(), h * pitch.tan());
                SceneBias {
                    mean_across_m: rx * ck - py * sk,
                    mean_along_m: rx * sk + py * ck + v * drift * tau,
                    altitude_m: h,
                    ground_speed_mps: v,
                    time_tag_drift: drift,
                    crab_deg: crab,
                }
            })
            .collect();
        let b = estimate_bias(&s, 5).unwrap();
        assert!((b.roll_deg - 0.401).abs() < 1e-9);
        assert!((b.pitch_deg - 0.2).abs() < 1e-9);
        assert!((b.time_offset_s - 0.15).abs() < 1e-9);
        assert!(b.residual_rms_m < 1e-6);
    }

    #[test]
    fn constant_drift_assigns_along_to_pitch() {
        let along = 510_000.0 * 0.1f64.to_radians().tan();
        let s: Vec<_> = (0..5).map(|_| scene(0.0, along, 1.0)).collect();
        let b = estimate_bias(&s, 5).unwrap();
        assert!((b.pitch_deg - 0.1).abs() < 1e-9);
        assert_eq!(b.time_offset_s, 0.0);
    }

    #[test]
    fn too_few_scenes() {
        let s = vec![scene(0.0, 0.0, 0.0); 4];
        assert!(matches!(
            estimate_bias(&s, 5),
            Err(GeorefError::InsufficientScenes { found: 4, needed: 5 })
        ));
        assert!(estimate_bias(&s, 3).is_ok());
    }
}
