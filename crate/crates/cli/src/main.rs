use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pushbroom_core::pipeline::{report_timing, run_pipeline, PipelineConfig, PipelineError, QualityReport, Stage};
use pushbroom_core::synth::{generate_to_dir, SynthError, SynthSpec};

/// Vignetting correction, band co-registration and direct georeferencing of
/// four-band pushbroom scenes.
#[derive(Parser)]
#[command(name = "pushbroom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the processing pipeline on one scene.
    Preprocess(PreprocessArgs),
    /// Generate a synthetic scene with calibration, metadata and truth files.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a report.json written by `preprocess`.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long)]
    calib: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Synthetic truth file; adds error statistics to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    skip_vignetting: bool,
    #[arg(long)]
    skip_coreg: bool,
    #[arg(long)]
    skip_georef: bool,
    /// JSON pipeline configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    quicklook: bool,
}

impl PreprocessArgs {
    fn into_config(self) -> Result<PipelineConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(raw) = self.raw {
            config.raw = raw;
        }
        if self.calib.is_some() {
            config.calib = self.calib;
        }
        if self.meta.is_some() {
            config.meta = self.meta;
        }
        if self.truth.is_some() {
            config.truth = self.truth;
        }
        if let Some(out) = self.out {
            config.out_dir = out;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        config.vignetting &= !self.skip_vignetting;
        config.coreg &= !self.skip_coreg;
        config.georef &= !self.skip_georef;
        config.quicklook |= self.quicklook;
        Ok(config)
    }
}

fn print_summary(report: &QualityReport) {
    if let Some(v) = &report.vignetting {
        for b in &v.bands {
            println!(
                "vignetting {:<5} falloff {:6.2}% -> {:6.2}%  uniformity {:6.2}% -> {:6.2}%",
                b.band.name(),
                b.falloff_before_pct,
                b.falloff_after_pct,
                b.uniformity_before_pct,
                b.uniformity_after_pct
            );
        }
    }
    if let Some(c) = &report.coreg {
        for b in &c.bands {
            let rms = b.residual_rms_px.map_or("-".to_string(), |r| format!("{r:.3}"));
            println!(
                "coreg {}->{:<5} matches {:3} inliers {:3} residual rms {} px",
                c.reference.name(),
                b.band.name(),
                b.matches,
                b.inliers,
                rms
            );
        }
        if let Some(t) = c.truth_rms_px {
            println!("coreg truth rms {t:.3} px");
        }
    }
    if let Some(g) = &report.georef {
        println!("georef gsd {:.2} m  swath {:.1} km", g.gsd_m, g.swath_m / 1000.0);
        if let Some(e) = &g.errors {
            println!(
                "georef error mean along {:.1} m  mean across {:.1} m  max {:.1} m",
                e.mean_along_m, e.mean_across_m, e.max_total_m
            );
        }
    }
    print!("{}", report_timing(report).to_table());
}

fn fail(err: PipelineError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn preprocess(args: PreprocessArgs) -> ExitCode {
    let config = match args.into_config() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match run_pipeline(&config) {
        Ok(report) => {
            print_summary(&report);
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn synth(spec_path: PathBuf, out: PathBuf) -> ExitCode {
    let spec = match std::fs::read_to_string(&spec_path)
        .map_err(SynthError::from)
        .and_then(|text| SynthSpec::from_json(&text))
    {
        Ok(s) => s,
        Err(e) => {
            return fail(PipelineError::Input {
                stage: Stage::Load,
                path: spec_path.display().to_string(),
                message: e.to_string(),
            })
        }
    };
    match generate_to_dir(&spec, &out) {
        Ok((raw, truth)) => {
            println!(
                "wrote {}x{} scene to {} (gsd {:.2} m, swath {:.1} km)",
                raw.width(),
                raw.lines(),
                out.display(),
                truth.geogrid.gsd_m,
                truth.geogrid.swath_m / 1000.0
            );
            ExitCode::SUCCESS
        }
        Err(SynthError::SpecInvalid(m)) => fail(PipelineError::Config(m)),
        Err(e) => fail(PipelineError::Stage { stage: Stage::Output, kind: "Synth".into(), message: e.to_string() }),
    }
}

fn report(input: PathBuf) -> ExitCode {
    let parsed = std::fs::read_to_string(&input)
        .map_err(|e| e.to_string())
        .and_then(|t| QualityReport::from_json(&t).map_err(|e| e.to_string()));
    match parsed {
        Ok(r) => {
            print_summary(&r);
            ExitCode::SUCCESS
        }
        Err(message) => fail(PipelineError::Input { stage: Stage::Load, path: input.display().to_string(), message }),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Preprocess(args) => preprocess(args),
        Command::Synth { spec, out } => synth(spec, out),
        Command::Report { input } => report(input),
    }
}
