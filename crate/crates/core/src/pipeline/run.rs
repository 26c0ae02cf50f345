use std::path::Path;
use std::time::Instant;

use super::report::{
    BandCoregMetrics, BandRadiometryMetrics, CoregMetrics, GeorefErrorSummary, GeorefMetrics, QualityReport,
    SceneInfo, StageTime, Timing, VignettingMetrics, REPORT_SCHEMA,
};
use super::{render_quicklook, PipelineConfig, PipelineError, Result, Stage};
use crate::coreg::{align_scene, AlignedScene};
use crate::georef::{AcqMetadata, GeoGrid, Georeferencer, WorldFile};
use crate::radiometry::{correct_vignetting, edge_center_ratio, uniformity_std, FalloffWindows, Region};
use crate::raster::{load_raw, save_raw, BandId, CalibrationTable, RawScene};
use crate::synth::{truth_coreg_residual_per_band, truth_georef_error, TruthFile};

/// Parsed inputs of one run.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub scene: RawScene,
    pub calib: Option<CalibrationTable>,
    pub meta: Option<AcqMetadata>,
    pub truth: Option<TruthFile>,
}

impl PipelineInputs {
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let scene = load_raw(&config.raw).map_err(|e| PipelineError::input(Stage::Load, &config.raw, e))?;
        let calib = match (&config.calib, config.vignetting) {
            (Some(p), true) => {
                Some(CalibrationTable::load(p).map_err(|e| PipelineError::input(Stage::Vignetting, p, e))?)
            }
            _ => None,
        };
        let meta_stage = if config.georef { Stage::Georef } else { Stage::Coreg };
        let meta = match &config.meta {
            Some(p) if config.georef || config.coreg => {
                Some(AcqMetadata::load(p).map_err(|e| PipelineError::input(meta_stage, p, e))?)
            }
            _ => None,
        };
        let truth = match &config.truth {
            Some(p) => Some(TruthFile::load(p).map_err(|e| PipelineError::input(Stage::Load, p, e))?),
            None => None,
        };
        Ok(Self { scene, calib, meta, truth })
    }
}

/// In-memory products of a run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub scene: RawScene,
    pub aligned: Option<AlignedScene>,
    pub grid: Option<GeoGrid>,
    pub world_file: Option<WorldFile>,
    pub report: QualityReport,
}

fn radiometry_metrics(before: &RawScene, after: &RawScene) -> Result<VignettingMetrics> {
    let rows: Vec<usize> = (0..before.lines()).collect();
    let windows = FalloffWindows::default();
    let bands = BandId::ALL
        .iter()
        .map(|&band| {
            let (b, a) = (before.plane(band), after.plane(band));
            let m = |e| PipelineError::stage(Stage::Vignetting, e);
            Ok(BandRadiometryMetrics {
                band,
                falloff_before_pct: edge_center_ratio(b, &rows, windows).map_err(m)?,
                falloff_after_pct: edge_center_ratio(a, &rows, windows).map_err(m)?,
                uniformity_before_pct: uniformity_std(b, Region::full(b)).map_err(m)?,
                uniformity_after_pct: uniformity_std(a, Region::full(a)).map_err(m)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(VignettingMetrics { bands })
}

fn coreg_metrics(aligned: &AlignedScene, truth: Option<&TruthFile>) -> Result<CoregMetrics> {
    let truth_per_band = truth
        .map(|t| truth_coreg_residual_per_band(&t.warp_array(), aligned))
        .transpose()
        .map_err(|e| PipelineError::stage(Stage::Coreg, e))?;
    let bands: Vec<BandCoregMetrics> = aligned
        .bands
        .iter()
        .map(|b| BandCoregMetrics {
            band: b.band,
            matches: b.matches,
            inliers: b.inliers,
            prior_source: b.prior_source,
            prior_dx: b.prior.dx,
            prior_dy: b.prior.dy,
            residual_mean_px: b.residual.map(|r| r.mean_px),
            residual_rms_px: b.residual.map(|r| r.rms_px),
            residual_points: b.residual.map(|r| r.points),
            invalid_pixels: b.invalid_pixels,
            model: b.model.clone(),
            truth_rms_px: truth_per_band.and_then(|t| t[b.band.index()]),
        })
        .collect();
    let truth_rms_px = truth_per_band.map(|t| {
        let v: Vec<f64> = t.iter().flatten().copied().collect();
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    });
    Ok(CoregMetrics { reference: aligned.reference, bands, truth_rms_px })
}

/// Runs the enabled stages on parsed inputs without touching the file
/// system. Stage times are filled in; load and write times are left at zero.
pub fn run_stages(inputs: &PipelineInputs, config: &PipelineConfig) -> Result<PipelineOutput> {
    if config.workers == 0 {
        return run_stages_here(inputs, config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_stages_here(inputs, config))
}

fn run_stages_here(inputs: &PipelineInputs, config: &PipelineConfig) -> Result<PipelineOutput> {
    let mut scene = inputs.scene.clone();
    let mut timing = Timing::default();
    let mut stages_run = Vec::new();
    let mut report_vignetting = None;
    let mut report_coreg = None;
    let mut report_georef = None;
    let mut aligned_out = None;
    let mut grid_out = None;
    let mut world_out = None;

    if config.vignetting {
        let t0 = Instant::now();
        let calib = inputs
            .calib
            .as_ref()
            .ok_or_else(|| PipelineError::Stage {
                stage: Stage::Vignetting,
                kind: "MissingCalibration".into(),
                message: "no calibration table".into(),
            })?;
        let corrected = correct_vignetting(&scene, calib).map_err(|e| PipelineError::stage(Stage::Vignetting, e))?;
        report_vignetting = Some(radiometry_metrics(&scene, &corrected)?);
        scene = corrected;
        timing.stages.push(StageTime { stage: Stage::Vignetting, seconds: t0.elapsed().as_secs_f64() });
        stages_run.push(Stage::Vignetting);
    }

    let mut reference = BandId::Red;
    if config.coreg {
        let t0 = Instant::now();
        let aligned = align_scene(&scene, &config.coreg_params, inputs.meta.as_ref())
            .map_err(|e| PipelineError::stage(Stage::Coreg, e))?;
        report_coreg = Some(coreg_metrics(&aligned, inputs.truth.as_ref())?);
        reference = aligned.reference;
        scene = aligned.scene.clone();
        aligned_out = Some(aligned);
        timing.stages.push(StageTime { stage: Stage::Coreg, seconds: t0.elapsed().as_secs_f64() });
        stages_run.push(Stage::Coreg);
    }

    if config.georef {
        let t0 = Instant::now();
        let meta = inputs.meta.as_ref().ok_or_else(|| PipelineError::Stage {
            stage: Stage::Georef,
            kind: "MissingMetadata".into(),
            message: "georeferencing needs an acquisition metadata file".into(),
        })?;
        let err = |e| PipelineError::stage(Stage::Georef, e);
        let grid = Georeferencer::new(meta)
            .map_err(err)?
            .with_band(reference)
            .build_grid(scene.line_times(), scene.width(), config.grid_step)
            .map_err(err)?;
        let world = grid.world_file().map_err(err)?;
        let errors = inputs
            .truth
            .as_ref()
            .map(|t| truth_georef_error(&t.geogrid, &grid))
            .transpose()
            .map_err(|e| PipelineError::stage(Stage::Georef, e))?;
        report_georef = Some(GeorefMetrics {
            corners: grid.corners,
            gsd_m: grid.gsd_m,
            gsd_across_m: grid.gsd_across_m,
            gsd_along_m: grid.gsd_along_m,
            swath_m: grid.swath_m,
            world_file: world,
            errors: errors.as_ref().map(GeorefErrorSummary::from),
        });
        grid_out = Some(grid);
        world_out = Some(world);
        timing.stages.push(StageTime { stage: Stage::Georef, seconds: t0.elapsed().as_secs_f64() });
        stages_run.push(Stage::Georef);
    }

    timing.total_s = timing.stages.iter().map(|s| s.seconds).sum();
    let report = QualityReport {
        schema: REPORT_SCHEMA,
        scene: SceneInfo { width: scene.width(), lines: scene.lines(), bit_depth: scene.bit_depth() },
        stages_run,
        workers: config.workers,
        vignetting: report_vignetting,
        coreg: report_coreg,
        georef: report_georef,
        timing,
    };
    Ok(PipelineOutput { scene, aligned: aligned_out, grid: grid_out, world_file: world_out, report })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| PipelineError::stage(Stage::Output, e))
}

/// Writes `corrected.l3raw`, `report.json` and, when georeferenced,
/// `grid.json`, `corrected.wld` and `corners.txt` (plus `quicklook.pgm` or
/// `.ppm` on request).
fn write_outputs(out: &PipelineOutput, config: &PipelineConfig) -> Result<()> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::stage(Stage::Output, e))?;
    save_raw(&out.scene, dir.join("corrected.l3raw")).map_err(|e| PipelineError::stage(Stage::Output, e))?;
    if let (Some(grid), Some(world)) = (&out.grid, &out.world_file) {
        let json = serde_json::to_string_pretty(grid).map_err(|e| PipelineError::stage(Stage::Output, e))?;
        write_text(&dir.join("grid.json"), &(json + "\n"))?;
        write_text(&dir.join("corrected.wld"), &world.to_text())?;
        write_text(&dir.join("corners.txt"), &grid.corners_text())?;
    }
    if config.quicklook {
        let image = render_quicklook(&out.scene, &config.quicklook_bands, config.stretch_percentiles)?;
        let name = if image.channels == 1 { "quicklook.pgm" } else { "quicklook.ppm" };
        std::fs::write(dir.join(name), image.to_pnm()).map_err(|e| PipelineError::stage(Stage::Output, e))?;
    }
    Ok(())
}

/// Loads the inputs, runs the enabled stages in order and writes the
/// products and `report.json` to the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<QualityReport> {
    let start = Instant::now();
    config.validate()?;
    let t0 = Instant::now();
    let inputs = PipelineInputs::load(config)?;
    let load_s = t0.elapsed().as_secs_f64();
    let mut out = run_stages(&inputs, config)?;
    let t1 = Instant::now();
    write_outputs(&out, config)?;
    out.report.timing.load_s = load_s;
    out.report.timing.write_s = t1.elapsed().as_secs_f64();
    out.report.timing.total_s = start.elapsed().as_secs_f64();
    write_text(&config.out_dir.join("report.json"), &out.report.to_json())?;
    Ok(out.report)
}
