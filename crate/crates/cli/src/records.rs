//! Output records: line-delimited key-value text (the default) or JSON
//! lines. Field order is stable and documented in the README; golden
//! files depend on it.

use serde::Serialize;

use draftread_core::model::{DepthReading, FailureReason};

/// `kv` (default) or `json` output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Kv,
    Json,
}

fn opt_fixed(value: Option<f64>, decimals: usize) -> String {
    match value {
        Some(v) => format!("{v:.decimals$}"),
        None => "-".to_string(),
    }
}

fn int_list(values: &[i32]) -> String {
    if values.is_empty() {
        "-".to_string()
    } else {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One line per processed frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRecord {
    pub frame: String,
    pub timestamp_ms: Option<i64>,
    pub method: String,
    pub depth_m: Option<f64>,
    pub avg_depth_m: Option<f64>,
    pub waterline_row: Option<f64>,
    pub scales_used: Vec<i32>,
    pub detections: usize,
    pub kept: usize,
    pub assembled: usize,
    pub unpaired: usize,
    pub scored: usize,
    pub corrected: usize,
    pub dropped: usize,
    pub low_confidence: bool,
    pub failed_stage: Option<String>,
}

impl FrameRecord {
    pub fn from_reading(
        frame: &str,
        timestamp_ms: Option<i64>,
        reading: &DepthReading<f64>,
        avg_depth_m: Option<f64>,
    ) -> Self {
        let diagnostics = reading.diagnostics;
        let failed_stage = reading.failure.map(|reason| {
            match reason {
                FailureReason::EmptyLadder if diagnostics.low_confidence => "correct_scales",
                FailureReason::EmptyLadder => "assemble_scales",
                FailureReason::WaterlineNotVisible => "extract_profile",
                FailureReason::NoScaleAboveWaterline => "estimate_depth",
            }
            .to_string()
        });
        Self {
            frame: frame.to_string(),
            timestamp_ms,
            method: reading.method.to_string(),
            depth_m: reading.depth_m,
            avg_depth_m,
            waterline_row: reading.waterline_row,
            scales_used: reading.scales_used.clone(),
            detections: diagnostics.detections,
            kept: diagnostics.kept,
            assembled: diagnostics.assembled,
            unpaired: diagnostics.unpaired,
            scored: diagnostics.scored,
            corrected: diagnostics.corrected,
            dropped: diagnostics.dropped,
            low_confidence: diagnostics.low_confidence,
            failed_stage,
        }
    }

    /// Frame that never reached the pipeline (unreadable or unparsable
    /// input); `stage` names the parse step that failed.
    pub fn parse_failure(
        frame: &str,
        timestamp_ms: Option<i64>,
        stage: &str,
        avg: Option<f64>,
    ) -> Self {
        Self {
            frame: frame.to_string(),
            timestamp_ms,
            method: "failed".to_string(),
            depth_m: None,
            avg_depth_m: avg,
            waterline_row: None,
            scales_used: Vec::new(),
            detections: 0,
            kept: 0,
            assembled: 0,
            unpaired: 0,
            scored: 0,
            corrected: 0,
            dropped: 0,
            low_confidence: false,
            failed_stage: Some(stage.to_string()),
        }
    }

    pub fn to_kv(&self) -> String {
        format!(
            "frame={} timestamp_ms={} method={} depth_m={} avg_depth_m={} waterline_row={} \
             scales_used={} detections={} kept={} assembled={} unpaired={} scored={} \
             corrected={} dropped={} low_confidence={} failed_stage={}",
            self.frame,
            self.timestamp_ms
                .map_or_else(|| "-".to_string(), |t| t.to_string()),
            self.method,
            opt_fixed(self.depth_m, 6),
            opt_fixed(self.avg_depth_m, 6),
            opt_fixed(self.waterline_row, 1),
            int_list(&self.scales_used),
            self.detections,
            self.kept,
            self.assembled,
            self.unpaired,
            self.scored,
            self.corrected,
            self.dropped,
            self.low_confidence,
            self.failed_stage.as_deref().unwrap_or("-"),
        )
    }
}

/// Per-frame evaluation line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalFrameRecord {
    pub frame: String,
    pub mavd_px: f64,
    pub depth_error_m: f64,
    pub excluded_columns: usize,
}

impl EvalFrameRecord {
    pub fn to_kv(&self) -> String {
        format!(
            "frame={} mavd_px={:.6} depth_error_m={:.6} excluded_columns={}",
            self.frame, self.mavd_px, self.depth_error_m, self.excluded_columns
        )
    }
}

/// Final summary line of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummaryRecord {
    pub frames: usize,
    pub mavd_mean_px: f64,
    pub mavd_std_px: f64,
    pub madde_mean_m: f64,
    pub madde_std_m: f64,
    pub excluded_columns: usize,
}

impl EvalSummaryRecord {
    pub fn to_kv(&self) -> String {
        format!(
            "frames={} mavd_mean_px={:.6} mavd_std_px={:.6} madde_mean_m={:.6} madde_std_m={:.6} excluded_columns={}",
            self.frames,
            self.mavd_mean_px,
            self.mavd_std_px,
            self.madde_mean_m,
            self.madde_std_m,
            self.excluded_columns
        )
    }
}

pub fn render<T: Serialize>(
    record: &T,
    kv: impl FnOnce() -> String,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Kv => kv(),
        OutputFormat::Json => serde_json::to_string(record).expect("records serialize"),
    }
}
