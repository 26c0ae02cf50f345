//! Ground-truth viewing geometry for generated scenes. Written separately
//! from the georef chain (explicit rotation matrices, unit-sphere scaling for
//! the ellipsoid, Bowring's latitude formula) so the two can check each
//! other.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};

use super::{AttitudeProfile, InjectedBias, OrbitChoice, Result, SynthError};
use crate::georef::{gmst, parse_tle, GeodeticCoord, ImagerModel, Sgp4};

const A: f64 = 6378.137;
const F: f64 = 1.0 / 298.257_223_563;
const MU: f64 = 398_600.441_8;

fn b_axis() -> f64 {
    A * (1.0 - F)
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body rotation for (roll, pitch, yaw) in degrees: roll about +y first,
/// then pitch about −x, then yaw about +z.
pub(crate) fn rpy_matrix(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    rot_z(yaw.to_radians()) * rot_x(-pitch.to_radians()) * rot_y(roll.to_radians())
}

enum TruthOrbit {
    Circular { radius: f64, n: f64, p: Vector3<f64>, q: Vector3<f64>, u0: f64, epoch: f64 },
    Sgp4(Box<Sgp4>),
}

pub(crate) struct TruthGeometry {
    orbit: TruthOrbit,
    profile: AttitudeProfile,
    bias: InjectedBias,
    imager: ImagerModel,
    start_time: f64,
}

impl TruthGeometry {
    pub(crate) fn new(
        orbit: &OrbitChoice,
        profile: AttitudeProfile,
        bias: InjectedBias,
        imager: ImagerModel,
        start_time: f64,
    ) -> Result<Self> {
        let orbit = match orbit {
            OrbitChoice::Circular { altitude_km, inclination_deg, raan_deg, arg_latitude_deg } => {
                let radius = A + altitude_km;
                let (si, ci) = inclination_deg.to_radians().sin_cos();
                let (so, co) = raan_deg.to_radians().sin_cos();
                TruthOrbit::Circular {
                    radius,
                    n: (MU / (radius * radius * radius)).sqrt(),
                    p: Vector3::new(co, so, 0.0),
                    q: Vector3::new(-ci * so, ci * co, si),
                    u0: arg_latitude_deg.to_radians(),
                    epoch: start_time,
                }
            }
            OrbitChoice::Tle([l1, l2]) => TruthOrbit::Sgp4(Box::new(Sgp4::new(&parse_tle(l1, l2)?)?)),
        };
        Ok(Self { orbit, profile, bias, imager, start_time })
    }

    pub(crate) fn state(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        match &self.orbit {
            TruthOrbit::Circular { radius, n, p, q, u0, epoch } => {
                let u = u0 + n * (t - epoch);
                let (su, cu) = u.sin_cos();
                Ok(((p * cu + q * su) * *radius, (q * cu - p * su) * (radius * n)))
            }
            TruthOrbit::Sgp4(s) => Ok(s.propagate_minutes((t - s.epoch()) / 60.0).map_err(SynthError::from)?),
        }
    }

    /// Attitude of the body relative to the orbital frame at `t`.
    pub(crate) fn profile_matrix(&self, t: f64) -> Matrix3<f64> {
        match self.profile {
            AttitudeProfile::Nadir => Matrix3::identity(),
            AttitudeProfile::ConstantOffset { roll_deg, pitch_deg, yaw_deg } => rpy_matrix(roll_deg, pitch_deg, yaw_deg),
            AttitudeProfile::Nutation { amplitude_deg, period_s } => {
                rpy_matrix(amplitude_deg * (TAU * (t - self.start_time) / period_s).sin(), 0.0, 0.0)
            }
        }
    }

    /// Orbital frame columns: orbit normal, along track, nadir.
    pub(crate) fn orbital_matrix(r: &Vector3<f64>, v: &Vector3<f64>) -> Matrix3<f64> {
        let nadir = -r / r.norm();
        let normal = r.cross(v);
        let normal = normal / normal.norm();
        let along = nadir.cross(&normal);
        Matrix3::from_columns(&[normal, along, nadir])
    }

    /// Body-to-inertial attitude the spacecraft actually flies at `t`.
    pub(crate) fn body_to_inertial(&self, t: f64) -> Result<Matrix3<f64>> {
        let (r, v) = self.state(t)?;
        Ok(Self::orbital_matrix(&r, &v) * self.profile_matrix(t))
    }

    fn earth_angle(t: f64) -> Matrix3<f64> {
        rot_z(-gmst(t))
    }

    /// Earth-fixed ground point (km) actually seen at line tag `t_tag`
    /// through a fractional column and detector row, with the injected
    /// mounting and clock errors.
    pub(crate) fn ground(&self, t_tag: f64, column: f64, row: f64) -> Result<Vector3<f64>> {
        let t = t_tag + self.bias.time_s;
        let (r, _) = self.state(t)?;
        let pitch_mm = self.imager.pixel_pitch_um * 1e-3;
        let cam = Vector3::new(
            (column - (self.imager.columns as f64 - 1.0) / 2.0) * pitch_mm,
            row * pitch_mm,
            self.imager.focal_length_mm,
        );
        let mount = rpy_matrix(self.bias.roll_deg, self.bias.pitch_deg, 0.0);
        let earth = Self::earth_angle(t);
        let d = earth * (self.body_to_inertial(t)? * (mount * cam.normalize()));
        let o = earth * r;
        sphere_hit(&o, &d).ok_or_else(|| SynthError::SpecInvalid("line of sight misses the Earth".into()))
    }

    /// Earth-fixed sub-satellite point on the ellipsoid at inertial time `t`.
    pub(crate) fn sub_satellite(&self, t: f64) -> Result<Vector3<f64>> {
        let (r, _) = self.state(t)?;
        let g = bowring(&(Self::earth_angle(t) * r));
        Ok(to_cartesian(g.lat, g.lon))
    }

    /// Ground-track azimuth (degrees from north) at line tag `t_tag`.
    pub(crate) fn track_azimuth(&self, t_tag: f64) -> Result<f64> {
        let t = t_tag + self.bias.time_s;
        let d = self.sub_satellite(t + 0.5)? - self.sub_satellite(t - 0.5)?;
        let g = bowring(&self.sub_satellite(t)?);
        let (slat, clat) = g.lat.to_radians().sin_cos();
        let (slon, clon) = g.lon.to_radians().sin_cos();
        let east = Vector3::new(-slon, clon, 0.0);
        let north = Vector3::new(-slat * clon, -slat * slon, clat);
        Ok(d.dot(&east).atan2(d.dot(&north)).to_degrees())
    }
}

/// Ray against the ellipsoid by scaling space so the ellipsoid becomes the
/// unit sphere.
fn sphere_hit(o: &Vector3<f64>, d: &Vector3<f64>) -> Option<Vector3<f64>> {
    let s = Vector3::new(1.0 / A, 1.0 / A, 1.0 / b_axis());
    let os = o.component_mul(&s);
    let ds = d.component_mul(&s);
    let a = ds.norm_squared();
    let half_b = os.dot(&ds);
    let c = os.norm_squared() - 1.0;
    let disc = half_b * half_b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-half_b - disc.sqrt()) / a;
    (t > 0.0).then(|| o + d * t)
}

/// Bowring's closed-form geodetic latitude, degrees and meters.
pub(crate) fn bowring(p: &Vector3<f64>) -> GeodeticCoord {
    let b = b_axis();
    let e2 = 1.0 - (b * b) / (A * A);
    let ep2 = (A * A - b * b) / (b * b);
    let rho = p.x.hypot(p.y);
    let theta = (p.z * A).atan2(rho * b);
    let (st, ct) = theta.sin_cos();
    let lat = (p.z + ep2 * b * st * st * st).atan2(rho - e2 * A * ct * ct * ct);
    let n = A / (1.0 - e2 * lat.sin().powi(2)).sqrt();
    GeodeticCoord {
        lat: lat.to_degrees(),
        lon: p.y.atan2(p.x).to_degrees(),
        alt: (rho / lat.cos() - n) * 1000.0,
    }
}

/// Point on the ellipsoid surface at a geodetic latitude/longitude, km.
pub(crate) fn to_cartesian(lat_deg: f64, lon_deg: f64) -> Vector3<f64> {
    let e2 = F * (2.0 - F);
    let (sl, cl) = lat_deg.to_radians().sin_cos();
    let (so, co) = lon_deg.to_radians().sin_cos();
    let n = A / (1.0 - e2 * sl * sl).sqrt();
    Vector3::new(n * cl * co, n * cl * so, n * (1.0 - e2) * sl)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowring_on_surface() {
        for (lat, lon) in [(0.0, 0.0), (-7.5, 110.0), (45.0, -120.0), (80.0, 10.0)] {
            let g = bowring(&to_cartesian(lat, lon));
            assert!((g.lat - lat).abs() < 1e-9 && (g.lon - lon).abs() < 1e-9 && g.alt.abs() < 1e-3);
        }
    }

    #[test]
    fn rpy_matches_axis_conventions() {
        let z = Vector3::z();
        let r = rpy_matrix(1.0, 0.0, 0.0) * z;
        assert!(r.x > 0.0 && r.y.abs() < 1e-15);
        let p = rpy_matrix(0.0, 1.0, 0.0) * z;
        assert!(p.y > 0.0 && p.x.abs() < 1e-15);
    }

    #[test]
    fn nadir_ray_hits_below() {
        let o = Vector3::new(A + 510.0, 0.0, 0.0);
        let hit = sphere_hit(&o, &-Vector3::x()).unwrap();
        assert!((hit - Vector3::new(A, 0.0, 0.0)).norm() < 1e-12);
    }
}
