//! Synthetic scene generator with exact ground truth: clean texture, band
//! warps, vignetting, dark level, noise, orbit/attitude metadata and the true
//! ground position of every grid node.

mod texture;
mod truth;

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use texture::{render, Texture};

use crate::coreg::{coeff_count, AlignedScene, CoregError, DistortionModel};
use crate::georef::{
    format_tle, georef_error_stats, grid_nodes, orbital_frame, parse_tle, AcqMetadata, AttitudeFrame,
    AttitudeSample, CircularOrbit, GeoGrid, GeodeticCoord, GeorefError, GeorefErrorStats, ImagerModel,
    Quaternion, StateVector, TleElements, TruthPoint,
};
use crate::raster::{save_raw, BandCalibration, BandId, CalibrationTable, Plane, RasterError, RawScene};
use truth::{bowring, TruthGeometry};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    SpecInvalid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Georef(#[from] GeorefError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Coreg(#[from] CoregError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VignetteShape {
    /// `1 − f·g(u)` with `g` quadratic in the normalized column.
    #[default]
    Quadratic,
    /// Natural `cos⁴` falloff of the field angle.
    Cos4,
}

/// Polynomial warp of one band over normalized coordinates (same monomial
/// order as [`DistortionModel`]); the order follows from the coefficient
/// count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BandWarp {
    pub coeff_dx: Vec<f64>,
    pub coeff_dy: Vec<f64>,
}

impl BandWarp {
    pub fn translation(dx: f64, dy: f64) -> Self {
        Self { coeff_dx: vec![dx], coeff_dy: vec![dy] }
    }

    fn order(&self) -> Option<usize> {
        let n = self.coeff_dx.len().max(self.coeff_dy.len()).max(1);
        (0..=3).find(|&o| coeff_count(o) == n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitChoice {
    /// Circular orbit starting at the scene start time.
    Circular {
        altitude_km: f64,
        inclination_deg: f64,
        #[serde(default)]
        raan_deg: f64,
        #[serde(default)]
        arg_latitude_deg: f64,
    },
    /// Two TLE lines propagated with SGP4.
    Tle([String; 2]),
}

impl Default for OrbitChoice {
    fn default() -> Self {
        OrbitChoice::Circular { altitude_km: 510.0, inclination_deg: 97.5, raan_deg: 0.0, arg_latitude_deg: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttitudeProfile {
    #[default]
    Nadir,
    ConstantOffset {
        #[serde(default)]
        roll_deg: f64,
        #[serde(default)]
        pitch_deg: f64,
        #[serde(default)]
        yaw_deg: f64,
    },
    /// Sinusoidal roll disturbance.
    Nutation { amplitude_deg: f64, period_s: f64 },
}

/// Errors present in the true geometry but absent from the written metadata.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InjectedBias {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    /// True imaging time minus the tagged line time, s.
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub width: usize,
    pub lines: usize,
    pub bit_depth: u8,
    pub texture: Texture,
    /// Mid-gray level of the clean scene, DN.
    pub base_level: f64,
    /// Peak-to-peak texture amplitude, DN.
    pub contrast: f64,
    /// Per-band multiplier on the clean scene (blue, green, red, nir).
    pub band_gain: [f64; 4],
    pub vignette: VignetteShape,
    /// Brightness loss at the edge windows, percent.
    pub vignette_falloff: f64,
    /// Width of the edge window the falloff refers to, fraction of a line.
    pub falloff_window: f64,
    pub band_warp: BTreeMap<BandId, BandWarp>,
    pub dark_level: f64,
    pub noise_sigma: f64,
    pub orbit: OrbitChoice,
    /// Unix seconds of the first line; defaults to the TLE epoch in TLE mode.
    pub start_time: Option<f64>,
    pub attitude_profile: AttitudeProfile,
    pub injected_bias: InjectedBias,
    pub time_tag_drift: Option<f64>,
    /// Imager geometry; `None` uses the default optics with `width` columns.
    pub imager: Option<ImagerModel>,
    /// `None` matches the along-track sample distance to the across-track one.
    pub line_period_s: Option<f64>,
    pub attitude_interval_s: f64,
    /// Spacing of truth grid nodes, pixels.
    pub grid_step: usize,
}

pub const DEFAULT_START_TIME: f64 = 1_561_939_200.0;

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            width: 512,
            lines: 512,
            bit_depth: 8,
            texture: Texture::default(),
            base_level: 120.0,
            contrast: 160.0,
            band_gain: [0.8, 0.9, 1.0, 1.1],
            vignette: VignetteShape::Quadratic,
            vignette_falloff: 40.0,
            falloff_window: 0.05,
            band_warp: BTreeMap::new(),
            dark_level: 0.0,
            noise_sigma: 0.0,
            orbit: OrbitChoice::default(),
            start_time: None,
            attitude_profile: AttitudeProfile::Nadir,
            injected_bias: InjectedBias::default(),
            time_tag_drift: None,
            imager: None,
            line_period_s: None,
            attitude_interval_s: 0.5,
            grid_step: 64,
        }
    }
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn imager(&self) -> ImagerModel {
        self.imager.unwrap_or(ImagerModel { columns: self.width, ..ImagerModel::default() })
    }

    fn start(&self) -> Result<f64> {
        match (&self.start_time, &self.orbit) {
            (Some(t), _) => Ok(*t),
            (None, OrbitChoice::Tle([l1, l2])) => Ok(parse_tle(l1, l2)?.epoch),
            (None, _) => Ok(DEFAULT_START_TIME),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SynthError::SpecInvalid(m));
        if self.width < 16 || self.lines < 2 {
            return bad(format!("scene {}x{} too small", self.width, self.lines));
        }
        if self.bit_depth != 8 && self.bit_depth != 16 {
            return bad(format!("bit depth {}", self.bit_depth));
        }
        if !(0.0..=90.0).contains(&self.vignette_falloff) {
            return bad(format!("falloff {} outside [0, 90]", self.vignette_falloff));
        }
        if !(self.falloff_window > 0.0 && self.falloff_window < 0.34) {
            return bad(format!("falloff window {}", self.falloff_window));
        }
        if self.noise_sigma < 0.0 || self.dark_level < 0.0 || self.band_gain.iter().any(|g| !(*g >= 0.0)) {
            return bad("negative noise, dark level or gain".into());
        }
        if self.grid_step == 0 || !(self.attitude_interval_s > 0.0) {
            return bad("grid step and attitude interval must be positive".into());
        }
        if self.imager().columns != self.width {
            return bad(format!("imager has {} columns, scene {}", self.imager().columns, self.width));
        }
        self.imager().validate()?;
        for (band, warp) in &self.band_warp {
            let Some(order) = warp.order() else {
                return bad(format!("{band} warp coefficient count"));
            };
            if warp.coeff_dx.len() != warp.coeff_dy.len() && !(warp.coeff_dx.is_empty() || warp.coeff_dy.is_empty()) {
                return bad(format!("{band} warp components differ in length"));
            }
            let m = self.warp_model(warp, order, 0.0, 0.0);
            if m.max_magnitude() >= self.width as f64 / 8.0 {
                return bad(format!("{band} warp exceeds width/8"));
            }
        }
        if let OrbitChoice::Circular { altitude_km, .. } = self.orbit {
            if !(100.0..5000.0).contains(&altitude_km) {
                return bad(format!("altitude {altitude_km} km"));
            }
        }
        Ok(())
    }

    fn warp_model(&self, warp: &BandWarp, order: usize, extra_dx: f64, extra_dy: f64) -> DistortionModel {
        let mut m = DistortionModel::zero(order, self.width, self.lines);
        let n = coeff_count(order);
        for (k, c) in warp.coeff_dx.iter().take(n).enumerate() {
            m.coeff_dx[k] = *c;
        }
        for (k, c) in warp.coeff_dy.iter().take(n).enumerate() {
            m.coeff_dy[k] = *c;
        }
        m.coeff_dx[0] += extra_dx;
        m.coeff_dy[0] += extra_dy;
        m
    }
}

/// Vignetting transmission at column `c` of `width`, clamped to ≥ 0.01.
/// The profile reaches exactly `1 − falloff` at the middle of the outer
/// windows, so the window-mean falloff metric recovers the nominal value.
pub fn vignette_profile(shape: VignetteShape, falloff_pct: f64, window: f64, width: usize, c: usize) -> f64 {
    let f = falloff_pct / 100.0;
    let span = ((window * width as f64).round() as usize).clamp(1, width / 3);
    let anchor = span as f64 / 2.0 / width as f64;
    let u = (c as f64 + 0.5) / width as f64;
    let s = (u - 0.5) / (0.5 - anchor);
    let v = match shape {
        VignetteShape::Quadratic => 1.0 - f * s * s,
        VignetteShape::Cos4 => {
            if f <= 0.0 {
                1.0
            } else {
                let theta_edge = (1.0 - f).powf(0.25).acos();
                let theta = (s * theta_edge.tan()).atan();
                theta.cos().powi(4)
            }
        }
    };
    v.max(0.01)
}

/// Everything the generator knows about a scene.
#[derive(Debug, Clone)]
pub struct TruthPack {
    pub clean: RawScene,
    pub calibration: CalibrationTable,
    /// Per band: `raw(x) = clean(x + w(x))` before radiometric effects.
    pub warps: [DistortionModel; 4],
    pub geogrid: GeoGrid,
    pub metadata: AcqMetadata,
    pub vignette: Vec<f64>,
}

/// On-disk form of the truth needed to score a processed scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub warps: BTreeMap<BandId, DistortionModel>,
    pub geogrid: GeoGrid,
    pub vignette: Vec<f64>,
}

impl TruthFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: TruthFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if BandId::ALL.iter().any(|b| !file.warps.contains_key(b)) {
            return Err(SynthError::SpecInvalid("truth file lacks a band warp".into()));
        }
        Ok(file)
    }

    pub fn warp_array(&self) -> [DistortionModel; 4] {
        std::array::from_fn(|b| self.warps[&BandId::ALL[b]].clone())
    }
}

fn quantize(v: f64, max: u16) -> u16 {
    (v + 0.5).floor().clamp(0.0, max as f64) as u16
}

fn sample_clamped(p: &Plane<u16>, x: f64, y: f64) -> f64 {
    let xc = x.clamp(0.0, (p.width() - 1) as f64);
    let yc = y.clamp(0.0, (p.height() - 1) as f64);
    crate::coreg::bilinear(p, xc, yc).expect("clamped inside")
}

/// Solves `d = a·col_step + b·line_step` in the horizontal plane at `at`.
fn pixel_components(d: Vector3<f64>, col_step: Vector3<f64>, line_step: Vector3<f64>, at: &Vector3<f64>) -> (f64, f64) {
    let up = at.normalize();
    let flat = |v: Vector3<f64>| v - up * v.dot(&up);
    let (d, c, l) = (flat(d), flat(col_step), flat(line_step));
    let (a11, a12, a22) = (c.dot(&c), c.dot(&l), l.dot(&l));
    let (p, q) = (d.dot(&c), d.dot(&l));
    let det = a11 * a22 - a12 * a12;
    ((p * a22 - q * a12) / det, (q * a11 - p * a12) / det)
}

pub fn generate(spec: &SynthSpec) -> Result<(RawScene, TruthPack)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.lines);
    let start = spec.start()?;
    let mut imager = spec.imager();
    imager.boresight_rpy_deg = [0.0; 3];
    imager.time_offset_s = 0.0;
    let geom = TruthGeometry::new(&spec.orbit, spec.attitude_profile, spec.injected_bias, imager, start)?;
    let ideal = TruthGeometry::new(&spec.orbit, spec.attitude_profile, InjectedBias::default(), imager, start)?;

    // Line period matching the along-track and across-track sample distances
    // at the scene center.
    let center = (w as f64 - 1.0) / 2.0;
    let line_period_s = match spec.line_period_s {
        Some(p) if p > 0.0 => p,
        Some(p) => return Err(SynthError::SpecInvalid(format!("line period {p}"))),
        None => {
            let across = (ideal.ground(start, center + 0.5, 0.0)? - ideal.ground(start, center - 0.5, 0.0)?).norm();
            let speed = (ideal.ground(start + 0.5, center, 0.0)? - ideal.ground(start - 0.5, center, 0.0)?).norm();
            across / speed
        }
    };
    let line_times: Vec<f64> = (0..h).map(|i| start + i as f64 * line_period_s).collect();
    let t_mid = line_times[h / 2];

    // Band detector rows seen through the true geometry, in output pixels.
    let reference = BandId::Red;
    let rows = imager.band_row_offset;
    let g_ref = geom.ground(t_mid, center, rows.get(reference))?;
    let col_step = geom.ground(t_mid, center + 1.0, rows.get(reference))? - g_ref;
    let line_step = geom.ground(t_mid + line_period_s, center, rows.get(reference))? - g_ref;
    let mut warps: [DistortionModel; 4] = std::array::from_fn(|_| DistortionModel::zero(0, w, h));
    for band in BandId::ALL {
        let offset = geom.ground(t_mid, center, rows.get(band))? - g_ref;
        let (ex, ey) = pixel_components(offset, col_step, line_step, &g_ref);
        let warp = spec.band_warp.get(&band).cloned().unwrap_or_default();
        let order = warp.order().unwrap_or(0);
        warps[band.index()] = spec.warp_model(&warp, order, ex, ey);
    }

    // Clean scene.
    let max = if spec.bit_depth == 8 { u8::MAX as u16 } else { u16::MAX };
    let pattern = render(&spec.texture, w, h, spec.seed);
    let clean_planes: [Plane<u16>; 4] = std::array::from_fn(|b| {
        let gain = spec.band_gain[b];
        pattern.map(|p| quantize(gain * (spec.base_level + spec.contrast * (p - 0.5)), max))
    });
    let clean = RawScene::new(spec.bit_depth, clean_planes, line_times.clone())?;

    // Raw scene.
    let vignette: Vec<f64> = (0..w)
        .map(|c| vignette_profile(spec.vignette, spec.vignette_falloff, spec.falloff_window, w, c))
        .collect();
    let noise = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma checked"));
    let raw_planes: [Plane<u16>; 4] = std::array::from_fn(|b| {
        let src = clean.plane(BandId::ALL[b]);
        let model = &warps[b];
        let mut out = Plane::new(w, h, 0u16);
        out.as_mut_slice().par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(((b as u64) << 40) | y as u64);
            for (x, px) in row.iter_mut().enumerate() {
                let (dx, dy) = model.eval(x as f64, y as f64);
                let v = vignette[x] * sample_clamped(src, x as f64 + dx, y as f64 + dy) + spec.dark_level;
                let n = noise.map_or(0.0, |d| d.sample(&mut rng));
                *px = quantize(v + n, max);
            }
        });
        out
    });
    let raw = RawScene::new(spec.bit_depth, raw_planes, line_times.clone())?;

    let calibration = CalibrationTable::new(std::array::from_fn(|_| BandCalibration {
        response: vignette.iter().map(|v| 1.0 / v).collect(),
        dark: vec![spec.dark_level; w],
    }))?;

    let metadata = build_metadata(spec, &ideal, imager, start, &line_times, line_period_s)?;
    let geogrid = truth_grid(&geom, &line_times, w, spec.grid_step, rows.get(reference))?;

    Ok((raw, TruthPack { clean, calibration, warps, geogrid, metadata, vignette }))
}

fn build_metadata(
    spec: &SynthSpec,
    geom: &TruthGeometry,
    imager: ImagerModel,
    start: f64,
    line_times: &[f64],
    line_period_s: f64,
) -> Result<AcqMetadata> {
    let (tle, circular_orbit) = match &spec.orbit {
        OrbitChoice::Tle(lines) => (Some(lines.clone()), None),
        OrbitChoice::Circular { altitude_km, inclination_deg, raan_deg, arg_latitude_deg } => (
            None,
            Some(CircularOrbit {
                altitude_km: *altitude_km,
                inclination_deg: *inclination_deg,
                raan_deg: *raan_deg,
                arg_latitude_deg: *arg_latitude_deg,
                epoch: start,
            }),
        ),
    };
    // Star-tracker samples of the flown attitude, covering the scene with a
    // margin for clock corrections.
    let margin = 3.0;
    let t0 = line_times[0] - margin;
    let t1 = line_times[line_times.len() - 1] + margin;
    let n = ((t1 - t0) / spec.attitude_interval_s).ceil() as usize;
    let attitude = (0..=n)
        .map(|k| {
            let t = t0 + k as f64 * spec.attitude_interval_s;
            let (r, v) = geom.state(t)?;
            let m = orbital_frame(&StateVector { t, r, v }) * geom.profile_matrix(t);
            Ok(AttitudeSample { t, q: Quaternion::from_matrix(&m) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AcqMetadata {
        tle,
        circular_orbit,
        attitude,
        attitude_frame: AttitudeFrame::Eci,
        line_period_s,
        imager,
        time_tag_drift: spec.time_tag_drift,
    })
}

fn truth_grid(geom: &TruthGeometry, line_times: &[f64], width: usize, step: usize, row: f64) -> Result<GeoGrid> {
    let line_nodes = grid_nodes(line_times.len(), step);
    let column_nodes = grid_nodes(width, step);
    let rows: Vec<(Vec<GeodeticCoord>, f64)> = line_nodes
        .par_iter()
        .map(|&l| {
            let t = line_times[l];
            let pts = column_nodes
                .iter()
                .map(|&c| {
                    let mut g = bowring(&geom.ground(t, c as f64, row)?);
                    g.alt = 0.0;
                    Ok(g)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((pts, geom.track_azimuth(t)?))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut az = Vec::new();
    for (p, a) in rows {
        points.extend(p);
        az.push(a);
    }
    Ok(GeoGrid::new(line_nodes, column_nodes, points, az))
}

impl TruthPack {
    pub fn to_file(&self) -> TruthFile {
        TruthFile {
            warps: BandId::ALL.iter().map(|b| (*b, self.warps[b.index()].clone())).collect(),
            geogrid: self.geogrid.clone(),
            vignette: self.vignette.clone(),
        }
    }

    /// Writes `clean.l3raw`, `calib.json`, `meta.json` and `truth.json`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        save_raw(&self.clean, dir.join("clean.l3raw"))?;
        self.calibration.save(dir.join("calib.json"))?;
        self.metadata.save(dir.join("meta.json"))?;
        let file = self.to_file();
        std::fs::write(dir.join("truth.json"), serde_json::to_string_pretty(&file)? + "\n")?;
        Ok(())
    }
}

/// Generates a scene and writes it with its truth files to `dir`
/// (`raw.l3raw` plus the [`TruthPack::save`] set).
pub fn generate_to_dir(spec: &SynthSpec, dir: impl AsRef<Path>) -> Result<(RawScene, TruthPack)> {
    let (raw, truth) = generate(spec)?;
    std::fs::create_dir_all(dir.as_ref())?;
    save_raw(&raw, dir.as_ref().join("raw.l3raw"))?;
    truth.save(dir.as_ref())?;
    Ok((raw, truth))
}

/// Per-band geometric error of an aligned scene against the true warps, RMS
/// pixels over a dense grid, `None` for the reference band. For an output
/// pixel `x` that sampled the raw band at `x + d(x)`, the ground it shows is
/// `x + d(x) + w_b(x + d(x))` in clean coordinates; the reference band shows
/// `x + w_ref(x)`.
pub fn truth_coreg_residual_per_band(warps: &[DistortionModel; 4], aligned: &AlignedScene) -> Result<[Option<f64>; 4]> {
    let (w, h) = (warps[0].width, warps[0].height);
    if aligned.scene.width() != w || aligned.scene.lines() != h {
        return Err(SynthError::DimensionMismatch(format!(
            "truth {w}x{h}, scene {}x{}",
            aligned.scene.width(),
            aligned.scene.lines()
        )));
    }
    let wr = &warps[aligned.reference.index()];
    let step = 8;
    let mut out = [None; 4];
    for band in BandId::ALL {
        if band == aligned.reference {
            continue;
        }
        let d = &aligned.models[band.index()];
        let wb = &warps[band.index()];
        let (mut sum, mut n) = (0.0, 0usize);
        for y in (0..h).step_by(step) {
            for x in (0..w).step_by(step) {
                let (xf, yf) = (x as f64, y as f64);
                let (dx, dy) = d.eval(xf, yf);
                let (sx, sy) = (xf + dx, yf + dy);
                if !(sx >= 0.0 && sy >= 0.0 && sx <= (w - 1) as f64 && sy <= (h - 1) as f64) {
                    continue;
                }
                let (bx, by) = wb.eval(sx, sy);
                let (rx, ry) = wr.eval(xf, yf);
                let (ex, ey) = (dx + bx - rx, dy + by - ry);
                sum += ex * ex + ey * ey;
                n += 1;
            }
        }
        out[band.index()] = Some(if n > 0 { (sum / n as f64).sqrt() } else { f64::INFINITY });
    }
    Ok(out)
}

/// RMS geometric error over all non-reference bands, pixels.
pub fn truth_coreg_residual(warps: &[DistortionModel; 4], aligned: &AlignedScene) -> Result<f64> {
    let per = truth_coreg_residual_per_band(warps, aligned)?;
    let vals: Vec<f64> = per.iter().flatten().copied().collect();
    Ok((vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64).sqrt())
}

/// Errors of a computed grid against the truth grid at the nodes the two
/// grids share, decomposed along the true ground track.
pub fn truth_georef_error(tg: &GeoGrid, grid: &GeoGrid) -> Result<GeorefErrorStats> {
    let nc = tg.column_nodes.len();
    let points: Vec<TruthPoint> = tg
        .iter()
        .enumerate()
        .filter(|(_, (line, column, _))| grid.get(*line, *column).is_some())
        .map(|(k, (line, column, coord))| TruthPoint {
            line,
            column,
            coord: *coord,
            track_azimuth_deg: tg.track_azimuth_deg[k / nc],
        })
        .collect();
    if points.is_empty() {
        return Err(GeorefError::GridMismatch("computed grid shares no node with the truth".into()).into());
    }
    Ok(georef_error_stats(grid, &points)?)
}

/// A two-line element set for a near-circular orbit with the given shape,
/// handy for TLE-mode specs.
pub fn synthetic_tle(epoch: f64, altitude_km: f64, inclination_deg: f64, raan_deg: f64) -> [String; 2] {
    let a = crate::georef::WGS84_A + altitude_km;
    let n = (crate::georef::MU_WGS84 / (a * a * a)).sqrt() * 86_400.0 / std::f64::consts::TAU;
    let (l1, l2) = format_tle(&TleElements {
        satnum: 39_206,
        epoch,
        inclination_deg,
        raan_deg,
        eccentricity: 0.0001,
        arg_perigee_deg: 90.0,
        mean_anomaly_deg: 270.0,
        mean_motion: n,
        bstar: 0.0,
    });
    [l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiometry::{edge_center_ratio, FalloffWindows};

    fn small() -> SynthSpec {
        SynthSpec { width: 128, lines: 96, grid_step: 32, ..SynthSpec::default() }
    }

    #[test]
    fn identity_config_reproduces_clean() {
        let spec = SynthSpec { vignette_falloff: 0.0, ..small() };
        let (raw, truth) = generate(&spec).unwrap();
        assert_eq!(raw.planes(), truth.clean.planes());
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec { noise_sigma: 2.0, ..small() };
        let (a, ta) = generate(&spec).unwrap();
        let (b, tb) = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.geogrid, tb.geogrid);
        assert_eq!(ta.metadata, tb.metadata);
    }

    #[test]
    fn flat_falloff_matches_nominal() {
        let spec = SynthSpec { texture: Texture::Flat, width: 400, lines: 8, ..SynthSpec::default() };
        let (raw, _) = generate(&spec).unwrap();
        let rows: Vec<usize> = (0..8).collect();
        let r = edge_center_ratio(raw.plane(BandId::Red), &rows, FalloffWindows::default()).unwrap();
        assert!((r - 40.0).abs() <= 0.5, "{r}");
    }

    #[test]
    fn cos4_profile_hits_falloff_at_anchor() {
        let w = 1000;
        let span = 50;
        let v = vignette_profile(VignetteShape::Cos4, 40.0, 0.05, w, span / 2);
        // Column 25 sits half a pixel beyond the window middle.
        assert!((v - 0.6).abs() < 0.01, "{v}");
        assert_eq!(vignette_profile(VignetteShape::Quadratic, 40.0, 0.05, w, w / 2), 1.0 - 0.4 * (0.5f64 / 1000.0 / 0.475).powi(2));
    }

    #[test]
    fn oversized_warp_rejected() {
        let mut spec = small();
        spec.band_warp.insert(BandId::Blue, BandWarp::translation(20.0, 0.0));
        assert!(matches!(generate(&spec), Err(SynthError::SpecInvalid(_))));
    }

    #[test]
    fn spec_json_defaults() {
        let s = SynthSpec::from_json(r#"{"seed": 7, "texture": {"kind": "checkerboard"}, "orbit": {"circular": {"altitude_km": 600, "inclination_deg": 98}}}"#).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.texture, Texture::Checkerboard { cell: 16 });
        assert_eq!(s.width, 512);
    }

    #[test]
    fn nadir_line_period_matches_sample_distance() {
        let (_, truth) = generate(&small()).unwrap();
        let g = &truth.geogrid;
        assert!((g.gsd_across_m - g.gsd_along_m).abs() / g.gsd_across_m < 0.01, "{g:?}");
        assert!((g.gsd_across_m - 15.0).abs() < 0.5);
    }
}
