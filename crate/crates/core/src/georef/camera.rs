use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeorefError, Result};
use crate::raster::BandId;

/// Detector row of each band relative to the focal-plane origin, in lines.
/// Positive rows look ahead along track.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandRowOffsets {
    pub blue: f64,
    pub green: f64,
    pub red: f64,
    pub nir: f64,
}

impl BandRowOffsets {
    pub fn get(&self, band: BandId) -> f64 {
        match band {
            BandId::Blue => self.blue,
            BandId::Green => self.green,
            BandId::Red => self.red,
            BandId::Nir => self.nir,
        }
    }

    pub fn set(&mut self, band: BandId, rows: f64) {
        match band {
            BandId::Blue => self.blue = rows,
            BandId::Green => self.green = rows,
            BandId::Red => self.red = rows,
            BandId::Nir => self.nir = rows,
        }
    }
}

/// Pinhole pushbroom imager. Body axes: +x across track, +y along track,
/// +z toward nadir when the attitude is the orbital frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagerModel {
    pub focal_length_mm: f64,
    pub pixel_pitch_um: f64,
    pub columns: usize,
    #[serde(default)]
    pub band_row_offset: BandRowOffsets,
    /// Mounting offsets (roll, pitch, yaw), degrees.
    #[serde(default)]
    pub boresight_rpy_deg: [f64; 3],
    /// Added to every line time before orbit and attitude lookup.
    #[serde(default)]
    pub time_offset_s: f64,
}

impl Default for ImagerModel {
    /// 8000 columns of 10 µm behind a lens whose edge pixels look out at
    /// atan(60/510), i.e. a 120 km swath from 510 km.
    fn default() -> Self {
        Self {
            focal_length_mm: 339.9575,
            pixel_pitch_um: 10.0,
            columns: 8000,
            band_row_offset: BandRowOffsets::default(),
            boresight_rpy_deg: [0.0; 3],
            time_offset_s: 0.0,
        }
    }
}

impl ImagerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_mm > 0.0 && self.pixel_pitch_um > 0.0 && self.columns > 0) {
            return Err(GeorefError::Metadata(format!(
                "imager needs positive focal length, pixel pitch and columns (got {}, {}, {})",
                self.focal_length_mm, self.pixel_pitch_um, self.columns
            )));
        }
        let finite = self.boresight_rpy_deg.iter().all(|v| v.is_finite()) && self.time_offset_s.is_finite();
        if !finite {
            return Err(GeorefError::Metadata("non-finite imager offset".into()));
        }
        Ok(())
    }

    /// Fixed mounting rotation. Roll turns about the along-track axis and is
    /// applied first (positive roll tilts the boresight toward +x), then
    /// pitch (positive tilts toward +y), then yaw about the boresight.
    pub fn boresight_matrix(&self) -> Matrix3<f64> {
        let [r, p, y] = self.boresight_rpy_deg.map(f64::to_radians);
        let roll = Rotation3::from_axis_angle(&Vector3::y_axis(), r);
        let pitch = Rotation3::from_axis_angle(&Vector3::x_axis(), -p);
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), y);
        (yaw * pitch * roll).into_inner()
    }

    /// Focal-plane ray (before the mounting rotation) for a fractional
    /// column and detector row, unit length.
    pub fn camera_ray(&self, column: f64, row: f64) -> Vector3<f64> {
        let pitch_mm = self.pixel_pitch_um * 1e-3;
        let x = (column - (self.columns as f64 - 1.0) / 2.0) * pitch_mm;
        Vector3::new(x, row * pitch_mm, self.focal_length_mm).normalize()
    }

    /// Half-angle subtended by the outermost pixel centers, radians.
    pub fn half_field_of_view(&self) -> f64 {
        ((self.columns as f64 - 1.0) / 2.0 * self.pixel_pitch_um * 1e-3 / self.focal_length_mm).atan()
    }
}

/// Body-frame line of sight of `column` in `band`, mounting rotation applied.
pub fn pixel_los(imager: &ImagerModel, band: BandId, column: usize) -> Result<Vector3<f64>> {
    if column >= imager.columns {
        return Err(GeorefError::ColumnOutOfRange { column, columns: imager.columns });
    }
    let ray = imager.camera_ray(column as f64, imager.band_row_offset.get(band));
    Ok(imager.boresight_matrix() * ray)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd_imager() -> ImagerModel {
        ImagerModel { columns: 8001, ..Default::default() }
    }

    #[test]
    fn center_column_is_boresight() {
        let v = pixel_los(&odd_imager(), BandId::Red, 4000).unwrap();
        assert!((v - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn edge_column_half_angle() {
        let im = ImagerModel::default();
        let v = pixel_los(&im, BandId::Red, 7999).unwrap();
        let angle = v.x.atan2(v.z);
        assert!((angle - (60.0f64 / 510.0).atan()).abs() < 1e-9);
        assert!((angle.to_degrees() - 6.71).abs() < 0.01);
        assert!((im.half_field_of_view() - angle).abs() < 1e-12);
        assert!(matches!(pixel_los(&im, BandId::Red, 8000), Err(GeorefError::ColumnOutOfRange { .. })));
    }

    #[test]
    fn roll_tilts_by_exact_angle_toward_x() {
        let mut im = odd_imager();
        im.boresight_rpy_deg = [0.401, 0.0, 0.0];
        let v = pixel_los(&im, BandId::Red, 4000).unwrap();
        assert!((v.x.atan2(v.z).to_degrees() - 0.401).abs() < 1e-12);
        assert!(v.y.abs() < 1e-15);
    }

    #[test]
    fn pitch_tilts_toward_y() {
        let mut im = odd_imager();
        im.boresight_rpy_deg = [0.0, 1.09, 0.0];
        let v = pixel_los(&im, BandId::Red, 4000).unwrap();
        assert!((v.y.atan2(v.z).to_degrees() - 1.09).abs() < 1e-12);
        assert!(v.x.abs() < 1e-15);
    }

    #[test]
    fn band_row_offset_looks_ahead() {
        let mut im = odd_imager();
        im.band_row_offset.set(BandId::Blue, 3.0);
        let v = pixel_los(&im, BandId::Blue, 4000).unwrap();
        assert!((v.y / v.z - 3.0 * 0.01 / im.focal_length_mm).abs() < 1e-15);
    }
}
