use serde::{Deserialize, Serialize};

use super::frames::{enu_basis, geodetic_to_ecef, GeodeticCoord};
use super::geoline::GeoGrid;
use super::{GeorefError, Result};

/// Reference ground position of one grid node with the local ground-track
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthPoint {
    pub line: usize,
    pub column: usize,
    pub coord: GeodeticCoord,
    pub track_azimuth_deg: f64,
}

/// Error of one node, truth minus computed, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub line: usize,
    pub column: usize,
    pub along_m: f64,
    pub across_m: f64,
    pub total_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeorefErrorStats {
    pub mean_along_m: f64,
    pub mean_across_m: f64,
    pub std_along_m: f64,
    pub std_across_m: f64,
    pub rms_total_m: f64,
    pub max_total_m: f64,
    pub points: Vec<PointError>,
}

/// Splits `truth − computed` into along-track (ground-track direction) and
/// across-track (up × along) components in the horizontal plane at the truth
/// point.
pub fn decompose(truth: &GeodeticCoord, computed: &GeodeticCoord, track_azimuth_deg: f64) -> (f64, f64) {
    let d = (geodetic_to_ecef(truth) - geodetic_to_ecef(computed)) * 1000.0;
    let [e, n, _] = enu_basis(truth);
    let (de, dn) = (d.dot(&e), d.dot(&n));
    let (te, tn) = track_azimuth_deg.to_radians().sin_cos();
    (de * te + dn * tn, -de * tn + dn * te)
}

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn georef_error_stats(grid: &GeoGrid, truth: &[TruthPoint]) -> Result<GeorefErrorStats> {
    if truth.is_empty() {
        return Err(GeorefError::EmptyTruth);
    }
    let points: Vec<PointError> = truth
        .iter()
        .map(|t| {
            let computed = grid.get(t.line, t.column).ok_or_else(|| {
                GeorefError::GridMismatch(format!("no grid node at line {} column {}", t.line, t.column))
            })?;
            let (along_m, across_m) = decompose(&t.coord, computed, t.track_azimuth_deg);
            Ok(PointError { line: t.line, column: t.column, along_m, across_m, total_m: along_m.hypot(across_m) })
        })
        .collect::<Result<_>>()?;
    let (mean_along_m, std_along_m) = mean_std(points.iter().map(|p| p.along_m));
    let (mean_across_m, std_across_m) = mean_std(points.iter().map(|p| p.across_m));
    let n = points.len() as f64;
    Ok(GeorefErrorStats {
        mean_along_m,
        mean_across_m,
        std_along_m,
        std_across_m,
        rms_total_m: (points.iter().map(|p| p.total_m * p.total_m).sum::<f64>() / n).sqrt(),
        max_total_m: points.iter().map(|p| p.total_m).fold(0.0, f64::max),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn offset(g: &GeodeticCoord, east_m: f64, north_m: f64) -> GeodeticCoord {
        let [e, n, _] = enu_basis(g);
        let p = geodetic_to_ecef(g) + (e * east_m + n * north_m) / 1000.0;
        super::super::frames::ecef_to_geodetic(&p)
    }

    #[test]
    fn northbound_track_axes() {
        let truth = GeodeticCoord { lat: -7.0, lon: 110.0, alt: 0.0 };
        // Computed point 100 m south and 30 m east of truth.
        let computed = offset(&truth, 30.0, -100.0);
        let (along, across) = decompose(&truth, &computed, 0.0);
        assert!((along - 100.0).abs() < 1e-3);
        // Across axis points west for a northbound track.
        assert!((across - 30.0).abs() < 1e-3);
    }

    #[test]
    fn identical_grid_gives_zero() {
        let pts: Vec<GeodeticCoord> = (0..4).map(|k| GeodeticCoord { lat: k as f64 * 0.1, lon: 5.0, alt: 0.0 }).collect();
        let grid = GeoGrid::new(vec![0, 10], vec![0, 20], pts.clone(), vec![0.0, 0.0]);
        let truth: Vec<TruthPoint> = grid
            .iter()
            .map(|(line, column, c)| TruthPoint { line, column, coord: *c, track_azimuth_deg: 12.0 })
            .collect();
        let s = georef_error_stats(&grid, &truth).unwrap();
        assert_eq!(s.rms_total_m, 0.0);
        assert_eq!(s.mean_across_m, 0.0);
        assert!(matches!(georef_error_stats(&grid, &[]), Err(GeorefError::EmptyTruth)));
        let stray = TruthPoint { line: 5, ..truth[0] };
        assert!(matches!(georef_error_stats(&grid, &[stray]), Err(GeorefError::GridMismatch(_))));
    }

    proptest! {
        #[test]
        fn components_are_orthogonal(e in -5000.0..5000.0f64, n in -5000.0..5000.0f64, az in -180.0..180.0f64, lat in -60.0..60.0f64) {
            let truth = GeodeticCoord { lat, lon: 20.0, alt: 0.0 };
            let computed = offset(&truth, e, n);
            let (along, across) = decompose(&truth, &computed, az);
            let d = (geodetic_to_ecef(&truth) - geodetic_to_ecef(&computed)) * 1000.0;
            let up = enu_basis(&truth)[2];
            let horiz = (d - up * d.dot(&up)).norm();
            prop_assert!((along * along + across * across - horiz * horiz).abs() <= 1e-9 * horiz * horiz + 1e-12);
        }
    }
}
