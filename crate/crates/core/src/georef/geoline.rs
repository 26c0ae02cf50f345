use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::ImagerModel;
use super::ellipsoid::intersect_point;
use super::frames::{azimuth_deg, earth_rotation, ecef_to_geodetic, geodetic_to_ecef, GeodeticCoord};
use super::metadata::{AcqMetadata, AttitudeFrame};
use super::orbit::Orbit;
use super::quat::AttitudeTrack;
use super::sgp4::StateVector;
use super::time::gmst;
use super::{GeorefError, Result};
use crate::lsq::lstsq;
use crate::raster::{BandId, RawScene};

/// Orbital frame as a body-to-inertial matrix: columns are the orbit normal,
/// the completing along-track axis, and nadir.
pub fn orbital_frame(state: &StateVector) -> Matrix3<f64> {
    let z = -state.r.normalize();
    let x = state.r.cross(&state.v).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}

/// Satellite ground track at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    /// Point on the ellipsoid directly below the satellite.
    pub ground: GeodeticCoord,
    pub azimuth_deg: f64,
    /// Speed of the sub-satellite point over the rotating Earth, m/s.
    pub ground_speed_mps: f64,
    /// Geodetic altitude of the satellite, m.
    pub altitude_m: f64,
    /// Azimuth of the imager's along-track axis on the ground minus
    /// `azimuth_deg`, degrees in [−180, 180).
    pub crab_deg: f64,
}

/// Georeferencing context assembled from metadata: orbit, attitude track and
/// imager geometry.
#[derive(Debug, Clone)]
pub struct Georeferencer {
    orbit: Orbit,
    attitude: AttitudeTrack,
    frame: AttitudeFrame,
    imager: ImagerModel,
    boresight: Matrix3<f64>,
    line_period_s: f64,
    band: BandId,
}

impl Georeferencer {
    pub fn new(meta: &AcqMetadata) -> Result<Self> {
        Self::with_imager(meta, &meta.imager)
    }

    /// Uses `imager` in place of the sidecar's imager block.
    pub fn with_imager(meta: &AcqMetadata, imager: &ImagerModel) -> Result<Self> {
        imager.validate()?;
        if !(meta.line_period_s > 0.0) {
            return Err(GeorefError::Metadata(format!("line period {}", meta.line_period_s)));
        }
        Ok(Self {
            orbit: meta.orbit()?,
            attitude: meta.attitude_track()?,
            frame: meta.attitude_frame,
            imager: *imager,
            boresight: imager.boresight_matrix(),
            line_period_s: meta.line_period_s,
            band: BandId::Red,
        })
    }

    /// Band whose detector row defines the lines of sight (default red).
    pub fn with_band(mut self, band: BandId) -> Self {
        self.band = band;
        self
    }

    pub fn imager(&self) -> &ImagerModel {
        &self.imager
    }

    pub fn line_period_s(&self) -> f64 {
        self.line_period_s
    }

    pub fn state(&self, t: f64) -> Result<StateVector> {
        self.orbit.state(t)
    }

    fn body_to_eci(&self, t: f64, state: &StateVector) -> Result<Matrix3<f64>> {
        let q = self.attitude.at(t)?.to_matrix();
        Ok(match self.frame {
            AttitudeFrame::Eci => q,
            AttitudeFrame::Orbital => orbital_frame(state) * q,
        })
    }

    /// Earth-fixed ground point (km) of a fractional column and detector row
    /// for the line tagged `t_line`.
    pub fn ground_point(&self, t_line: f64, column: f64, row: f64) -> Result<Vector3<f64>> {
        let t = t_line + self.imager.time_offset_s;
        let state = self.orbit.state(t)?;
        let rot = earth_rotation(gmst(t));
        let body = self.boresight * self.imager.camera_ray(column, row);
        let dir = rot * (self.body_to_eci(t, &state)? * body);
        intersect_point(&(rot * state.r), &dir)
    }

    /// Ground coordinates of `columns` for the line tagged `t_line`.
    pub fn georeference_line(&self, t_line: f64, columns: &[usize]) -> Result<Vec<GeodeticCoord>> {
        let t = t_line + self.imager.time_offset_s;
        let state = self.orbit.state(t)?;
        let rot = earth_rotation(gmst(t));
        let to_ecef = rot * self.body_to_eci(t, &state)? * self.boresight;
        let r = rot * state.r;
        let row = self.imager.band_row_offset.get(self.band);
        columns
            .iter()
            .map(|&c| {
                if c >= self.imager.columns {
                    return Err(GeorefError::ColumnOutOfRange { column: c, columns: self.imager.columns });
                }
                let dir = to_ecef * self.imager.camera_ray(c as f64, row);
                Ok(ecef_to_geodetic(&intersect_point(&r, &dir)?))
            })
            .collect()
    }

    /// Sub-satellite track at `t` (offset not applied).
    pub fn track(&self, t: f64) -> Result<TrackPoint> {
        let sub = |t: f64| -> Result<(Vector3<f64>, GeodeticCoord)> {
            let r = earth_rotation(gmst(t)) * self.orbit.state(t)?.r;
            let g = ecef_to_geodetic(&r);
            let ground = GeodeticCoord { alt: 0.0, ..g };
            Ok((geodetic_to_ecef(&ground), g))
        };
        let (p0, g) = sub(t)?;
        let (pa, _) = sub(t - 0.5)?;
        let (pb, _) = sub(t + 0.5)?;
        let vel = pb - pa;
        let azimuth = azimuth_deg(&g, &vel);
        // Ground image of a one-row tilt of the boresight at the center column.
        let t_tag = t - self.imager.time_offset_s;
        let center = (self.imager.columns as f64 - 1.0) / 2.0;
        let ahead = self.ground_point(t_tag, center, 1.0)?;
        let behind = self.ground_point(t_tag, center, -1.0)?;
        let body_azimuth = azimuth_deg(&ecef_to_geodetic(&(0.5 * (ahead + behind))), &(ahead - behind));
        Ok(TrackPoint {
            ground: GeodeticCoord { alt: 0.0, ..ecef_to_geodetic(&p0) },
            azimuth_deg: azimuth,
            ground_speed_mps: vel.norm() * 1000.0,
            altitude_m: g.alt,
            crab_deg: (body_azimuth - azimuth + 180.0).rem_euclid(360.0) - 180.0,
        })
    }

    /// Ground grid sampled every `step` lines and columns (last line and
    /// column always included).
    pub fn build_grid(&self, line_times: &[f64], width: usize, step: usize) -> Result<GeoGrid> {
        if step == 0 {
            return Err(GeorefError::Metadata("grid step must be at least 1".into()));
        }
        if width != self.imager.columns {
            return Err(GeorefError::Metadata(format!(
                "scene width {width} but imager has {} columns",
                self.imager.columns
            )));
        }
        if line_times.is_empty() {
            return Err(GeorefError::Metadata("scene has no lines".into()));
        }
        let line_nodes = grid_nodes(line_times.len(), step);
        let column_nodes = grid_nodes(width, step);
        let rows: Vec<(Vec<GeodeticCoord>, f64)> = line_nodes
            .par_iter()
            .map(|&l| {
                let pts = self.georeference_line(line_times[l], &column_nodes)?;
                Ok((pts, self.track(line_times[l])?.azimuth_deg))
            })
            .collect::<Result<_>>()?;
        let mut points = Vec::with_capacity(line_nodes.len() * column_nodes.len());
        let mut track_azimuth_deg = Vec::with_capacity(line_nodes.len());
        for (pts, az) in rows {
            points.extend(pts);
            track_azimuth_deg.push(az);
        }
        Ok(GeoGrid::new(line_nodes, column_nodes, points, track_azimuth_deg))
    }
}

/// `0, step, 2·step, …` plus the last index.
pub fn grid_nodes(n: usize, step: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).step_by(step.max(1)).collect();
    if v.last() != Some(&(n - 1)) {
        v.push(n - 1);
    }
    v
}

/// Spec-style entry point: ground coordinates of `columns` on one scene line.
pub fn georeference_line(
    line: usize,
    scene: &RawScene,
    metadata: &AcqMetadata,
    imager: &ImagerModel,
    columns: &[usize],
) -> Result<Vec<GeodeticCoord>> {
    let t = *scene
        .line_times()
        .get(line)
        .ok_or_else(|| GeorefError::Metadata(format!("line {line} outside scene")))?;
    Georeferencer::with_imager(metadata, imager)?.georeference_line(t, columns)
}

pub fn build_geogrid(scene: &RawScene, metadata: &AcqMetadata, imager: &ImagerModel, step: usize) -> Result<GeoGrid> {
    Georeferencer::with_imager(metadata, imager)?.build_grid(scene.line_times(), scene.width(), step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corners {
    pub upper_left: GeodeticCoord,
    pub upper_right: GeodeticCoord,
    pub lower_left: GeodeticCoord,
    pub lower_right: GeodeticCoord,
}

/// Ground coordinates at a lattice of (line, column) nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoGrid {
    pub line_nodes: Vec<usize>,
    pub column_nodes: Vec<usize>,
    /// Row-major over line nodes.
    pub points: Vec<GeodeticCoord>,
    /// Ground-track azimuth at each line node, degrees from north.
    pub track_azimuth_deg: Vec<f64>,
    pub corners: Corners,
    /// Mean of the across- and along-track sample distances, m.
    pub gsd_m: f64,
    pub gsd_across_m: f64,
    pub gsd_along_m: f64,
    /// Mean first-to-last column ground distance, m.
    pub swath_m: f64,
}

fn distance_m(a: &GeodeticCoord, b: &GeodeticCoord) -> f64 {
    (geodetic_to_ecef(a) - geodetic_to_ecef(b)).norm() * 1000.0
}

impl GeoGrid {
    pub fn new(
        line_nodes: Vec<usize>,
        column_nodes: Vec<usize>,
        points: Vec<GeodeticCoord>,
        track_azimuth_deg: Vec<f64>,
    ) -> Self {
        let (nl, nc) = (line_nodes.len(), column_nodes.len());
        assert_eq!(points.len(), nl * nc, "grid point count");
        let at = |i: usize, j: usize| &points[i * nc + j];
        let corners = Corners {
            upper_left: *at(0, 0),
            upper_right: *at(0, nc - 1),
            lower_left: *at(nl - 1, 0),
            lower_right: *at(nl - 1, nc - 1),
        };
        let mut across = (0.0, 0usize);
        let mut along = (0.0, 0usize);
        let mut swath = 0.0;
        for i in 0..nl {
            for j in 0..nc {
                if j + 1 < nc {
                    across.0 += distance_m(at(i, j), at(i, j + 1)) / (column_nodes[j + 1] - column_nodes[j]) as f64;
                    across.1 += 1;
                }
                if i + 1 < nl {
                    along.0 += distance_m(at(i, j), at(i + 1, j)) / (line_nodes[i + 1] - line_nodes[i]) as f64;
                    along.1 += 1;
                }
            }
            swath += distance_m(at(i, 0), at(i, nc - 1));
        }
        let mean = |(s, n): (f64, usize)| if n > 0 { s / n as f64 } else { 0.0 };
        let (gsd_across_m, gsd_along_m) = (mean(across), mean(along));
        let gsd_m = match (across.1 > 0, along.1 > 0) {
            (true, true) => 0.5 * (gsd_across_m + gsd_along_m),
            (true, false) => gsd_across_m,
            _ => gsd_along_m,
        };
        Self {
            line_nodes,
            column_nodes,
            points,
            track_azimuth_deg,
            corners,
            gsd_m,
            gsd_across_m,
            gsd_along_m,
            swath_m: swath / nl as f64,
        }
    }

    pub fn get(&self, line: usize, column: usize) -> Option<&GeodeticCoord> {
        let i = self.line_nodes.binary_search(&line).ok()?;
        let j = self.column_nodes.binary_search(&column).ok()?;
        self.points.get(i * self.column_nodes.len() + j)
    }

    /// Nodes as `(line, column, coord)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &GeodeticCoord)> {
        let nc = self.column_nodes.len();
        self.points
            .iter()
            .enumerate()
            .map(move |(k, p)| (self.line_nodes[k / nc], self.column_nodes[k % nc], p))
    }

    /// Largest node-to-node ground distance to another grid on the same
    /// nodes, m.
    pub fn max_deviation_m(&self, other: &GeoGrid) -> Result<f64> {
        if self.line_nodes != other.line_nodes || self.column_nodes != other.column_nodes {
            return Err(GeorefError::GridMismatch("grids sampled at different nodes".into()));
        }
        Ok(self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| distance_m(a, b))
            .fold(0.0, f64::max))
    }

    /// Least-squares affine map from pixel (column, line) to (lon, lat).
    pub fn world_file(&self) -> Result<WorldFile> {
        let rows: Vec<Vec<f64>> = self.iter().map(|(l, c, _)| vec![c as f64, l as f64, 1.0]).collect();
        let lon: Vec<f64> = self.points.iter().map(|p| p.lon).collect();
        let lat: Vec<f64> = self.points.iter().map(|p| p.lat).collect();
        let degenerate = || GeorefError::GridMismatch("grid too small for an affine fit".into());
        let fx = lstsq(&rows, &lon).ok_or_else(degenerate)?;
        let fy = lstsq(&rows, &lat).ok_or_else(degenerate)?;
        let mut sq = 0.0;
        let mut max: f64 = 0.0;
        for (k, p) in self.points.iter().enumerate() {
            let fitted = GeodeticCoord { lon: p.lon - fx.residuals[k], lat: p.lat - fy.residuals[k], alt: p.alt };
            let d = distance_m(p, &fitted);
            sq += d * d;
            max = max.max(d);
        }
        Ok(WorldFile {
            x_scale: fx.coeffs[0],
            y_skew: fy.coeffs[0],
            x_skew: fx.coeffs[1],
            y_scale: fy.coeffs[1],
            x_origin: fx.coeffs[2],
            y_origin: fy.coeffs[2],
            rms_residual_m: (sq / self.points.len() as f64).sqrt(),
            max_residual_m: max,
        })
    }

    /// Plain-text corner coordinate block.
    pub fn corners_text(&self) -> String {
        let c = &self.corners;
        [("UL", c.upper_left), ("UR", c.upper_right), ("LL", c.lower_left), ("LR", c.lower_right)]
            .iter()
            .map(|(k, p)| format!("{k} {:.8} {:.8}\n", p.lat, p.lon))
            .collect()
    }
}

/// Six-parameter pixel-to-(lon, lat) affine in ESRI world-file order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldFile {
    pub x_scale: f64,
    pub y_skew: f64,
    pub x_skew: f64,
    pub y_scale: f64,
    pub x_origin: f64,
    pub y_origin: f64,
    pub rms_residual_m: f64,
    pub max_residual_m: f64,
}

impl WorldFile {
    pub fn to_text(&self) -> String {
        [self.x_scale, self.y_skew, self.x_skew, self.y_scale, self.x_origin, self.y_origin]
            .iter()
            .map(|v| format!("{v:.12e}\n"))
            .collect()
    }

    /// Applies the affine to a pixel position, returning (lon, lat).
    pub fn apply(&self, column: f64, line: f64) -> (f64, f64) {
        (
            self.x_scale * column + self.x_skew * line + self.x_origin,
            self.y_skew * column + self.y_scale * line + self.y_origin,
        )
    }
}
