use nalgebra::Vector3;

use super::frames::{ecef_to_geodetic, GeodeticCoord, WGS84_A, WGS84_B};
use super::{GeorefError, Result};

/// Nearest forward intersection of a ray with the WGS84 ellipsoid, Earth-fixed
/// km.
pub fn intersect_point(r: &Vector3<f64>, dir: &Vector3<f64>) -> Result<Vector3<f64>> {
    let (a2, b2) = (WGS84_A * WGS84_A, WGS84_B * WGS84_B);
    let qa = (dir.x * dir.x + dir.y * dir.y) / a2 + dir.z * dir.z / b2;
    let qb = 2.0 * ((r.x * dir.x + r.y * dir.y) / a2 + r.z * dir.z / b2);
    let qc = (r.x * r.x + r.y * r.y) / a2 + r.z * r.z / b2 - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa <= 0.0 {
        return Err(GeorefError::NoIntersection);
    }
    let q = -0.5 * (qb + disc.sqrt().copysign(qb));
    let (t1, t2) = (q / qa, if q != 0.0 { qc / q } else { f64::NAN });
    let t = [t1, t2]
        .into_iter()
        .filter(|t| t.is_finite() && *t > 0.0)
        .min_by(f64::total_cmp)
        .ok_or(GeorefError::NoIntersection)?;
    Ok(r + dir * t)
}

/// Ground point seen along `dir` (unit) from Earth-fixed position `r` (km).
pub fn intersect_ellipsoid(r: &Vector3<f64>, dir: &Vector3<f64>) -> Result<GeodeticCoord> {
    intersect_point(r, dir).map(|p| ecef_to_geodetic(&p))
}
