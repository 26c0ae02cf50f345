use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::frames::WGS84_A;
use super::sgp4::{Sgp4, StateVector};
use super::tle::{parse_tle, TleElements};
use super::{GeorefError, Result};

/// WGS84 gravitational parameter, km³/s².
pub const MU_WGS84: f64 = 398_600.441_8;

/// Closed-form circular Keplerian orbit, used where a propagation model
/// independent of SGP4 is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    /// Altitude above the equatorial radius, km.
    pub altitude_km: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub raan_deg: f64,
    /// Argument of latitude at `epoch`, degrees.
    #[serde(default)]
    pub arg_latitude_deg: f64,
    /// Unix seconds.
    pub epoch: f64,
}

impl CircularOrbit {
    pub fn radius_km(&self) -> f64 {
        WGS84_A + self.altitude_km
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self) -> f64 {
        (MU_WGS84 / self.radius_km().powi(3)).sqrt()
    }

    pub fn state(&self, t: f64) -> StateVector {
        let a = self.radius_km();
        let n = self.mean_motion();
        let u = self.arg_latitude_deg.to_radians() + n * (t - self.epoch);
        let (si, ci) = self.inclination_deg.to_radians().sin_cos();
        let (so, co) = self.raan_deg.to_radians().sin_cos();
        let p = Vector3::new(co, so, 0.0);
        let q = Vector3::new(-ci * so, ci * co, si);
        let (su, cu) = u.sin_cos();
        StateVector {
            t,
            r: (p * cu + q * su) * a,
            v: (q * cu - p * su) * (a * n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.altitude_km > 100.0
            && self.altitude_km < 5000.0
            && [self.inclination_deg, self.raan_deg, self.arg_latitude_deg, self.epoch]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(GeorefError::Metadata(format!("invalid circular orbit {self:?}")))
        }
    }
}

/// Orbit model resolved from metadata.
#[derive(Debug, Clone)]
pub enum Orbit {
    Sgp4(Box<Sgp4>),
    Circular(CircularOrbit),
}

impl Orbit {
    pub fn from_tle(line1: &str, line2: &str) -> Result<Self> {
        Self::from_elements(&parse_tle(line1, line2)?)
    }

    pub fn from_elements(el: &TleElements) -> Result<Self> {
        Ok(Self::Sgp4(Box::new(Sgp4::new(el)?)))
    }

    pub fn state(&self, t: f64) -> Result<StateVector> {
        match self {
            Self::Sgp4(p) => p.state(t),
            Self::Circular(c) => Ok(c.state(t)),
        }
    }
}
