//! Per-frame composition of the full engine.

use crate::config::EngineConfig;
use crate::depth::{TemporalWindow, estimate_depth};
use crate::geometry::cross_class_nms;
use crate::model::{CharacterDetection, DepthReading, Diagnostics, SegmentationMask};
use crate::scalar::Scalar;
use crate::scale::{assemble_scales, correct_scales, score_scales};
use crate::waterline::extract_profile;

/// One frame's reading plus the running windowed average.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome<T: Scalar> {
    pub reading: DepthReading<T>,
    /// Mean depth over the last second of successful readings; `None`
    /// until the window has seen one.
    pub windowed_depth_m: Option<T>,
}

/// Runs NMS, assembly, scoring, correction, waterline extraction, depth
/// estimation, and temporal averaging over already-parsed inputs.
pub fn process_frame<T: Scalar>(
    detections: &[CharacterDetection<T>],
    mask: &SegmentationMask,
    config: &EngineConfig<T>,
    window: &mut TemporalWindow<T>,
) -> FrameOutcome<T> {
    let kept = cross_class_nms(detections, config.nms_threshold);
    let assembly = assemble_scales(&kept);
    let scored = score_scales(&assembly.ladder, &config.rules);
    let scored_count = scored.scored_count();
    let correction = correct_scales(&scored, &config.rules);
    let profile = extract_profile(mask);

    let mut reading = estimate_depth(
        &correction.ladder,
        &profile,
        &config.rules,
        config.two_scale_form(),
    );
    reading.diagnostics = Diagnostics {
        detections: detections.len(),
        kept: kept.len(),
        assembled: assembly.ladder.len(),
        unpaired: assembly.unpaired,
        scored: scored_count,
        corrected: correction.corrected,
        dropped: correction.dropped,
        low_confidence: correction.low_confidence,
    };

    let windowed_depth_m = window.push_and_average(&reading);
    FrameOutcome {
        reading,
        windowed_depth_m,
    }
}
