use serde::{Deserialize, Serialize};

use super::Stage;
use crate::coreg::{DistortionModel, PriorSource};
use crate::georef::{Corners, GeorefErrorStats, WorldFile};
use crate::raster::BandId;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneInfo {
    pub width: usize,
    pub lines: usize,
    pub bit_depth: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRadiometryMetrics {
    pub band: BandId,
    /// Edge/center brightness loss, percent.
    pub falloff_before_pct: f64,
    pub falloff_after_pct: f64,
    /// Whole-band `100 · std / mean`.
    pub uniformity_before_pct: f64,
    pub uniformity_after_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VignettingMetrics {
    pub bands: Vec<BandRadiometryMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCoregMetrics {
    pub band: BandId,
    pub matches: usize,
    pub inliers: usize,
    pub prior_source: PriorSource,
    pub prior_dx: f64,
    pub prior_dy: f64,
    pub residual_mean_px: Option<f64>,
    pub residual_rms_px: Option<f64>,
    pub residual_points: Option<usize>,
    pub invalid_pixels: usize,
    pub model: DistortionModel,
    /// RMS geometric error against the synthetic truth, pixels.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_rms_px: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoregMetrics {
    pub reference: BandId,
    pub bands: Vec<BandCoregMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_rms_px: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeorefMetrics {
    pub corners: Corners,
    pub gsd_m: f64,
    pub gsd_across_m: f64,
    pub gsd_along_m: f64,
    pub swath_m: f64,
    pub world_file: WorldFile,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub errors: Option<GeorefErrorSummary>,
}

/// Error statistics without the per-node listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeorefErrorSummary {
    pub mean_along_m: f64,
    pub mean_across_m: f64,
    pub std_along_m: f64,
    pub std_across_m: f64,
    pub rms_total_m: f64,
    pub max_total_m: f64,
    pub points: usize,
}

impl From<&GeorefErrorStats> for GeorefErrorSummary {
    fn from(s: &GeorefErrorStats) -> Self {
        Self {
            mean_along_m: s.mean_along_m,
            mean_across_m: s.mean_across_m,
            std_along_m: s.std_along_m,
            std_across_m: s.std_across_m,
            rms_total_m: s.rms_total_m,
            max_total_m: s.max_total_m,
            points: s.points.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: Stage,
    pub seconds: f64,
}

/// Wall-clock times; the only non-deterministic part of a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stages: Vec<StageTime>,
    pub load_s: f64,
    pub write_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub schema: u32,
    pub scene: SceneInfo,
    pub stages_run: Vec<Stage>,
    pub workers: usize,
    pub vignetting: Option<VignettingMetrics>,
    pub coreg: Option<CoregMetrics>,
    pub georef: Option<GeorefMetrics>,
    pub timing: Timing,
}

impl QualityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// JSON with the wall-time fields removed, for reproducibility checks.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.timing = Timing::default();
        copy.to_json()
    }

    /// Every reported number is finite. Non-finite floats serialize as
    /// null, so any null outside the optional fields counts as a failure.
    pub fn all_finite(&self) -> bool {
        const OPTIONAL: [&str; 6] =
            ["vignetting", "coreg", "georef", "residual_mean_px", "residual_rms_px", "residual_points"];
        fn walk(v: &serde_json::Value, key: &str) -> bool {
            match v {
                serde_json::Value::Null => OPTIONAL.contains(&key),
                serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
                serde_json::Value::Array(a) => a.iter().all(|x| walk(x, key)),
                serde_json::Value::Object(o) => o.iter().all(|(k, x)| walk(x, k)),
                _ => true,
            }
        }
        walk(&serde_json::to_value(self).expect("report serializes"), "")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub stage: Stage,
    pub seconds: f64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub rows: Vec<TimingRow>,
    pub stage_total_s: f64,
    pub total_s: f64,
    /// Co-registration took more than half of the stage time.
    pub coreg_dominant: bool,
}

impl TimingBreakdown {
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12} {:>10} {:>8}\n", "stage", "seconds", "share");
        for r in &self.rows {
            out += &format!("{:<12} {:>10.3} {:>7.1}%\n", r.stage.name(), r.seconds, r.percent);
        }
        out += &format!("{:<12} {:>10.3}\n", "total", self.total_s);
        if self.coreg_dominant {
            out += "co-registration exceeds 50% of processing time\n";
        }
        out
    }
}

/// Per-stage seconds and shares of the summed stage time.
pub fn report_timing(report: &QualityReport) -> TimingBreakdown {
    let stage_total_s: f64 = report.timing.stages.iter().map(|s| s.seconds).sum();
    let rows: Vec<TimingRow> = report
        .timing
        .stages
        .iter()
        .map(|s| TimingRow {
            stage: s.stage,
            seconds: s.seconds,
            percent: if stage_total_s > 0.0 { 100.0 * s.seconds / stage_total_s } else { 0.0 },
        })
        .collect();
    let coreg_dominant = rows.iter().any(|r| r.stage == Stage::Coreg && r.percent > 50.0);
    TimingBreakdown { rows, stage_total_s, total_s: report.timing.total_s, coreg_dominant }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_times(times: &[(Stage, f64)]) -> QualityReport {
        QualityReport {
            schema: REPORT_SCHEMA,
            scene: SceneInfo { width: 1, lines: 1, bit_depth: 8 },
            stages_run: times.iter().map(|t| t.0).collect(),
            workers: 1,
            vignetting: None,
            coreg: None,
            georef: None,
            timing: Timing {
                stages: times.iter().map(|&(stage, seconds)| StageTime { stage, seconds }).collect(),
                load_s: 0.0,
                write_s: 0.0,
                total_s: times.iter().map(|t| t.1).sum(),
            },
        }
    }

    #[test]
    fn coreg_share_flagged() {
        let b = report_timing(&with_times(&[(Stage::Vignetting, 10.0), (Stage::Coreg, 30.0), (Stage::Georef, 10.0)]));
        assert_eq!(b.rows[1].percent, 60.0);
        assert!(b.coreg_dominant);
        assert!(b.to_table().contains("60.0%"));
    }

    #[test]
    fn single_stage_is_everything() {
        let b = report_timing(&with_times(&[(Stage::Georef, 2.5)]));
        assert_eq!(b.rows[0].percent, 100.0);
        assert!(!b.coreg_dominant);
    }

    #[test]
    fn deterministic_json_drops_times() {
        let a = with_times(&[(Stage::Coreg, 1.0)]);
        let b = with_times(&[(Stage::Coreg, 2.0)]);
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        assert!(a.all_finite());
    }
}
