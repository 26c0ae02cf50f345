//! Batch orchestration: vignetting correction, band co-registration and
//! direct georeferencing in that order, with a JSON quality report.

mod config;
mod quicklook;
mod report;
mod run;

use serde::Serialize;
use thiserror::Error;

pub use config::PipelineConfig;
pub use quicklook::{percentile_nearest_rank, quicklook, render_quicklook, stretch_band, QuicklookImage};
pub use report::{
    report_timing, BandCoregMetrics, BandRadiometryMetrics, CoregMetrics, GeorefMetrics, QualityReport, SceneInfo,
    StageTime, Timing, TimingBreakdown, TimingRow, VignettingMetrics, REPORT_SCHEMA,
};
pub use run::{run_pipeline, run_stages, PipelineInputs, PipelineOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Load,
    Vignetting,
    Coreg,
    Georef,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Vignetting => "vignetting",
            Stage::Coreg => "coreg",
            Stage::Georef => "georef",
            Stage::Output => "output",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An input file is missing or malformed; `stage` is the stage that needs it.
    #[error("{stage}: cannot read {path}: {message}")]
    Input { stage: Stage, path: String, message: String },
    #[error("{stage} failed: {message}")]
    Stage { stage: Stage, kind: String, message: String },
    #[error("quicklook needs 1 or 3 bands, got {0}")]
    BadBandSelection(usize),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    stage: Stage,
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

impl PipelineError {
    pub(crate) fn stage(stage: Stage, err: impl std::fmt::Debug + std::fmt::Display) -> Self {
        let debug = format!("{err:?}");
        let kind = debug.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        PipelineError::Stage { stage, kind, message: err.to_string() }
    }

    pub(crate) fn input(stage: Stage, path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        PipelineError::Input { stage, path: path.display().to_string(), message: err.to_string() }
    }

    pub fn failed_stage(&self) -> Stage {
        match self {
            PipelineError::Config(_) | PipelineError::BadBandSelection(_) => Stage::Config,
            PipelineError::Input { stage, .. } | PipelineError::Stage { stage, .. } => *stage,
        }
    }

    /// 2 for configuration or input problems, 3 for a stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Input { .. } | PipelineError::BadBandSelection(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }

    /// `{"error": {"stage": ..., "kind": ..., "message": ...}}`
    pub fn to_json(&self) -> String {
        let (kind, path) = match self {
            PipelineError::Config(_) => ("Config", None),
            PipelineError::Input { path, .. } => ("Input", Some(path.as_str())),
            PipelineError::Stage { kind, .. } => (kind.as_str(), None),
            PipelineError::BadBandSelection(_) => ("BadBandSelection", None),
        };
        let message = match self {
            PipelineError::Stage { message, .. } | PipelineError::Input { message, .. } => message.clone(),
            other => other.to_string(),
        };
        serde_json::to_string(&ErrorDoc { error: ErrorBody { stage: self.failed_stage(), kind, message, path } })
            .expect("error document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_json_names_stage() {
        let e = PipelineError::stage(Stage::Georef, crate::georef::GeorefError::EmptyTruth);
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["stage"], "georef");
        assert_eq!(v["error"]["kind"], "EmptyTruth");
        assert_eq!(e.exit_code(), 3);
        assert_eq!(PipelineError::Config("x".into()).exit_code(), 2);
    }
}
