use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::time::gmst;

/// WGS84 semi-major axis, km.
pub const WGS84_A: f64 = 6378.137;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);
/// Earth rotation rate, rad/s.
pub const EARTH_RATE: f64 = 7.292_115_146_706_979e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticCoord {
    pub lat: f64,
    pub lon: f64,
    /// Meters above the ellipsoid.
    pub alt: f64,
}

/// Rotation taking inertial coordinates to Earth-fixed ones for Earth angle
/// `theta`.
pub fn earth_rotation(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotates an inertial position into the Earth-fixed frame at Unix time `t`.
pub fn eci_to_ecef(r_eci: &Vector3<f64>, t: f64) -> Vector3<f64> {
    earth_rotation(gmst(t)) * r_eci
}

/// Earth-fixed velocity of an inertial state, including the frame rotation.
pub fn eci_to_ecef_velocity(r_eci: &Vector3<f64>, v_eci: &Vector3<f64>, t: f64) -> Vector3<f64> {
    let rot = earth_rotation(gmst(t));
    let omega = Vector3::new(0.0, 0.0, EARTH_RATE);
    rot * (v_eci - omega.cross(r_eci))
}

fn wrap_lon(lon: f64) -> f64 {
    let l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l >= 180.0 {
        l - 360.0
    } else {
        l
    }
}

/// Geodetic coordinate to Earth-fixed Cartesian, km.
pub fn geodetic_to_ecef(g: &GeodeticCoord) -> Vector3<f64> {
    let (slat, clat) = g.lat.to_radians().sin_cos();
    let (slon, clon) = g.lon.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * slat * slat).sqrt();
    let h = g.alt / 1000.0;
    Vector3::new((n + h) * clat * clon, (n + h) * clat * slon, (n * (1.0 - WGS84_E2) + h) * slat)
}

/// Earth-fixed Cartesian (km) to geodetic by fixed-point latitude refinement.
pub fn ecef_to_geodetic(r: &Vector3<f64>) -> GeodeticCoord {
    let p = r.x.hypot(r.y);
    let lon = r.y.atan2(r.x).to_degrees();
    let mut lat = r.z.atan2(p * (1.0 - WGS84_E2));
    for _ in 0..50 {
        let s = lat.sin();
        let n = WGS84_A / (1.0 - WGS84_E2 * s * s).sqrt();
        let h = p * lat.cos() + r.z * s - WGS84_A * WGS84_A / n;
        let next = r.z.atan2(p * (1.0 - WGS84_E2 * n / (n + h)));
        let done = (next - lat).abs() < 1e-13;
        lat = next;
        if done {
            break;
        }
    }
    let (s, c) = lat.sin_cos();
    let h = p * c + r.z * s - WGS84_A * (1.0 - WGS84_E2 * s * s).sqrt();
    GeodeticCoord {
        lat: lat.to_degrees(),
        lon: wrap_lon(lon),
        alt: h * 1000.0,
    }
}

/// East, north and up unit vectors at a geodetic position.
pub fn enu_basis(g: &GeodeticCoord) -> [Vector3<f64>; 3] {
    let (slat, clat) = g.lat.to_radians().sin_cos();
    let (slon, clon) = g.lon.to_radians().sin_cos();
    [
        Vector3::new(-slon, clon, 0.0),
        Vector3::new(-slat * clon, -slat * slon, clat),
        Vector3::new(clat * clon, clat * slon, slat),
    ]
}

/// Clockwise-from-north azimuth (degrees) of an Earth-fixed direction at `g`.
pub fn azimuth_deg(g: &GeodeticCoord, dir: &Vector3<f64>) -> f64 {
    let [e, n, _] = enu_basis(g);
    dir.dot(&e).atan2(dir.dot(&n)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_angle_is_identity() {
        let r = Vector3::new(7000.0, -12.0, 300.0);
        assert_eq!(earth_rotation(0.0) * r, r);
    }

    #[test]
    fn spin_axis_is_fixed() {
        let r = Vector3::new(0.0, 0.0, 7000.0);
        for t in [0.0, 1e9, 1.7e9] {
            assert!((eci_to_ecef(&r, t) - r).norm() < 1e-12);
        }
    }

    #[test]
    fn equator_prime_meridian() {
        let g = ecef_to_geodetic(&Vector3::new(WGS84_A, 0.0, 0.0));
        assert!(g.lat.abs() < 1e-12 && g.lon.abs() < 1e-12 && g.alt.abs() < 1e-6);
        let pole = ecef_to_geodetic(&Vector3::new(0.0, 0.0, WGS84_B + 1.0));
        assert!((pole.lat - 90.0).abs() < 1e-9 && (pole.alt - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn enu_is_orthonormal() {
        let [e, n, u] = enu_basis(&GeodeticCoord { lat: -7.3, lon: 110.2, alt: 0.0 });
        assert!((e.cross(&n) - u).norm() < 1e-12);
        assert!((e.norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(x in -8000.0..8000.0f64, y in -8000.0..8000.0f64, z in -8000.0..8000.0f64, t in 6e8..2.8e9f64) {
            let r = Vector3::new(x, y, z);
            let n = r.norm();
            prop_assert!((eci_to_ecef(&r, t).norm() - n).abs() <= 1e-12 * n.max(1.0));
        }

        #[test]
        fn geodetic_roundtrip(lat in -89.9..89.9f64, lon in -179.9..179.9f64, alt in -500.0..900_000.0f64) {
            let g = GeodeticCoord { lat, lon, alt };
            let back = ecef_to_geodetic(&geodetic_to_ecef(&g));
            prop_assert!((back.lat - lat).abs() < 1e-6);
            prop_assert!((back.lon - lon).abs() < 1e-6);
            prop_assert!((back.alt - alt).abs() < 1e-3);
        }
    }
}
