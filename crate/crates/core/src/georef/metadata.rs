use std::path::Path;

use serde::{Deserialize, Serialize};

use super::camera::ImagerModel;
use super::orbit::{CircularOrbit, Orbit};
use super::quat::{AttitudeSample, AttitudeTrack};
use super::{GeorefError, Result};

/// Frame the attitude quaternions rotate body vectors into.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttitudeFrame {
    /// Inertial frame directly.
    #[default]
    Eci,
    /// Local orbital frame: x along the orbit normal, y completing the
    /// triad roughly along the velocity, z toward the Earth center. The
    /// identity quaternion is then nadir pointing.
    Orbital,
}

/// Acquisition metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcqMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tle: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circular_orbit: Option<CircularOrbit>,
    #[serde(default)]
    pub attitude: Vec<AttitudeSample>,
    #[serde(default)]
    pub attitude_frame: AttitudeFrame,
    pub line_period_s: f64,
    pub imager: ImagerModel,
    /// Scene time-tag drift as a fraction of the clock-sync interval; the
    /// regressor used to separate a timing error from a pitch offset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_tag_drift: Option<f64>,
}

impl AcqMetadata {
    pub fn orbit(&self) -> Result<Orbit> {
        match (&self.tle, &self.circular_orbit) {
            (Some([l1, l2]), None) => Orbit::from_tle(l1, l2),
            (None, Some(c)) => {
                c.validate()?;
                Ok(Orbit::Circular(*c))
            }
            (Some(_), Some(_)) => Err(GeorefError::Metadata("both tle and circular_orbit given".into())),
            (None, None) => Err(GeorefError::Metadata("no orbit (tle or circular_orbit)".into())),
        }
    }

    pub fn attitude_track(&self) -> Result<AttitudeTrack> {
        AttitudeTrack::new(self.attitude.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.imager.validate()?;
        if !(self.line_period_s > 0.0 && self.line_period_s.is_finite()) {
            return Err(GeorefError::Metadata(format!("line period {}", self.line_period_s)));
        }
        self.orbit()?;
        self.attitude_track()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::quat::Quaternion;
    use super::*;

    #[test]
    fn sidecar_json_roundtrip() {
        let text = r#"{
            "tle": ["1 00005U 58002B   00179.78495062  .00000023  00000-0  28098-4 0  4753",
                    "2 00005  34.2682 348.7242 1859667 331.7664  19.3264 10.82419157413667"],
            "attitude": [{"t": 0.0, "q": [1, 0, 0, 0]}, {"t": 10.0, "q": [0, 1, 0, 0]}],
            "line_period_s": 0.00213,
            "imager": {"focal_length_mm": 340.0, "pixel_pitch_um": 10.0, "columns": 8000,
                       "band_row_offset": {"blue": 2.0}, "boresight_rpy_deg": [0.4, 1.1, 0.0],
                       "time_offset_s": 0.5}
        }"#;
        let m = AcqMetadata::from_json(text).unwrap();
        assert_eq!(m.attitude_frame, AttitudeFrame::Eci);
        assert_eq!(m.attitude[1].q, Quaternion { qs: 0.0, qx: 1.0, qy: 0.0, qz: 0.0 });
        assert_eq!(m.imager.band_row_offset.blue, 2.0);
        m.validate().unwrap();
        assert_eq!(AcqMetadata::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn orbit_must_be_present() {
        let m = AcqMetadata {
            tle: None,
            circular_orbit: None,
            attitude: vec![],
            attitude_frame: AttitudeFrame::Orbital,
            line_period_s: 0.002,
            imager: ImagerModel::default(),
            time_tag_drift: None,
        };
        assert!(matches!(m.orbit(), Err(GeorefError::Metadata(_))));
    }
}
