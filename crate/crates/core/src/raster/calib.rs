use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BandId, RasterError, Result};

/// Per-column relative response `R` and dark level `D` for one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCalibration {
    #[serde(rename = "R")]
    pub response: Vec<f64>,
    #[serde(rename = "D")]
    pub dark: Vec<f64>,
}

/// Calibration for all four bands.
///
/// JSON form: `{"bands":{"blue":{"R":[...],"D":[...]}, ...}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    bands: [BandCalibration; 4],
}

#[derive(Serialize, Deserialize)]
struct CalibrationFile {
    bands: BTreeMap<BandId, BandCalibration>,
}

impl CalibrationTable {
    pub fn new(bands: [BandCalibration; 4]) -> Result<Self> {
        let t = Self { bands };
        t.check_shape()?;
        Ok(t)
    }

    /// `R ≡ 1`, `D ≡ 0`.
    pub fn identity(columns: usize) -> Self {
        Self::uniform(columns, 1.0, 0.0)
    }

    pub fn uniform(columns: usize, response: f64, dark: f64) -> Self {
        let band = BandCalibration {
            response: vec![response; columns],
            dark: vec![dark; columns],
        };
        Self {
            bands: std::array::from_fn(|_| band.clone()),
        }
    }

    pub fn band(&self, band: BandId) -> &BandCalibration {
        &self.bands[band.index()]
    }

    pub fn band_mut(&mut self, band: BandId) -> &mut BandCalibration {
        &mut self.bands[band.index()]
    }

    pub fn columns(&self) -> usize {
        self.bands[0].response.len()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.columns();
        for b in BandId::ALL {
            let c = self.band(b);
            if c.response.len() != n || c.dark.len() != n {
                return Err(RasterError::CalibInvalid(format!(
                    "{b}: R has {} and D has {} columns, expected {n}",
                    c.response.len(),
                    c.dark.len()
                )));
            }
        }
        Ok(())
    }

    /// Full invariant check against a scene bit depth: finite positive `R`,
    /// `0 <= D < 2^bit_depth`.
    pub fn validate(&self, bit_depth: u8) -> Result<()> {
        self.check_shape()?;
        let limit = (1u64 << bit_depth) as f64;
        for b in BandId::ALL {
            let c = self.band(b);
            if let Some(i) = c.response.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
                return Err(RasterError::CalibInvalid(format!(
                    "{b}: R[{i}] = {} is not finite and positive",
                    c.response[i]
                )));
            }
            if let Some(i) = c.dark.iter().position(|d| !(*d >= 0.0 && *d < limit)) {
                return Err(RasterError::CalibInvalid(format!(
                    "{b}: D[{i}] = {} outside [0, {limit})",
                    c.dark[i]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CalibrationFile {
            bands: BandId::ALL
                .into_iter()
                .map(|b| (b, self.band(b).clone()))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut file: CalibrationFile = serde_json::from_str(text)?;
        let mut take = |b: BandId| {
            file.bands
                .remove(&b)
                .ok_or_else(|| RasterError::CalibInvalid(format!("band {b} missing")))
        };
        Self::new([
            take(BandId::Blue)?,
            take(BandId::Green)?,
            take(BandId::Red)?,
            take(BandId::Nir)?,
        ])
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout_uses_band_names_and_symbols() {
        let t = CalibrationTable::uniform(2, 1.25, 3.0);
        let v: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(v["bands"]["nir"]["R"][1], 1.25);
        assert_eq!(v["bands"]["blue"]["D"][0], 3.0);
        assert_eq!(CalibrationTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }

    #[test]
    fn missing_band_and_bad_values() {
        let text = r#"{"bands":{"blue":{"R":[1],"D":[0]}}}"#;
        assert!(CalibrationTable::from_json(text).is_err());
        let mut t = CalibrationTable::identity(3);
        t.band_mut(BandId::Red).response[1] = 0.0;
        assert!(t.validate(8).is_err());
        let mut t = CalibrationTable::identity(3);
        t.band_mut(BandId::Green).dark[2] = 256.0;
        assert!(t.validate(8).is_err());
        assert!(t.validate(16).is_ok());
    }
}
