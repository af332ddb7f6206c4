//! Quantitative metrics: mean absolute vertical distance between waterline
//! profiles (pixels) and mean absolute draft depth error (meters).

use thiserror::Error;

use crate::model::WaterlineProfile;
use crate::scalar::{Scalar, num_usize};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("profiles differ in width: prediction {pred}, label {label}")]
    WidthMismatch { pred: usize, label: usize },
    #[error("no column holds a waterline in both profiles; the metric is undefined")]
    NoJointColumns,
    #[error("depth sequences differ in length: prediction {pred}, label {label}")]
    LengthMismatch { pred: usize, label: usize },
    #[error("depth sequences are empty")]
    EmptyInput,
}

/// MAVD components for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MavdBreakdown<T: Scalar> {
    /// Mean absolute vertical distance over jointly-present columns, pixels.
    pub value: T,
    pub compared_columns: usize,
    /// Columns absent in either profile and excluded from the mean.
    pub excluded_columns: usize,
}

/// Mean absolute vertical distance between two waterline profiles.
///
/// Columns lacking a waterline on either side are excluded from the mean
/// and reported in the breakdown.
pub fn mavd_detailed<T: Scalar>(
    pred: &WaterlineProfile,
    label: &WaterlineProfile,
) -> Result<MavdBreakdown<T>, EvalError> {
    if pred.width() != label.width() {
        return Err(EvalError::WidthMismatch {
            pred: pred.width(),
            label: label.width(),
        });
    }
    let mut sum = T::zero();
    let mut compared = 0usize;
    for (p, l) in pred.rows().iter().zip(label.rows()) {
        if let (Some(p), Some(l)) = (p, l) {
            let diff = (i64::from(*l) - i64::from(*p)).unsigned_abs();
            sum = sum + T::from_u64(diff).unwrap();
            compared += 1;
        }
    }
    if compared == 0 {
        return Err(EvalError::NoJointColumns);
    }
    Ok(MavdBreakdown {
        value: sum / num_usize(compared),
        compared_columns: compared,
        excluded_columns: pred.width() - compared,
    })
}

/// Mean absolute vertical distance, pixels.
pub fn mavd<T: Scalar>(pred: &WaterlineProfile, label: &WaterlineProfile) -> Result<T, EvalError> {
    mavd_detailed(pred, label).map(|b| b.value)
}

/// Mean absolute draft depth error and its population standard deviation,
/// meters, across paired frames.
pub fn madde<T: Scalar>(pred: &[T], label: &[T]) -> Result<(T, T), EvalError> {
    if pred.len() != label.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            label: label.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let errors: Vec<T> = pred
        .iter()
        .zip(label)
        .map(|(p, l)| (*l - *p).abs())
        .collect();
    Ok(mean_and_population_std(&errors))
}

fn mean_and_population_std<T: Scalar>(values: &[T]) -> (T, T) {
    let n = num_usize::<T>(values.len());
    let mean = values.iter().fold(T::zero(), |acc, v| acc + *v) / n;
    let var = values
        .iter()
        .fold(T::zero(), |acc, v| acc + (*v - mean) * (*v - mean))
        / n;
    (mean, var.max(T::zero()).sqrt())
}

/// One frame's prediction/label pair for batch evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameComparison<T: Scalar> {
    pub pred_profile: WaterlineProfile,
    pub label_profile: WaterlineProfile,
    pub pred_depth_m: T,
    pub label_depth_m: T,
}

/// Aggregate metrics over an evaluation batch. The spread figures are
/// population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T: Scalar> {
    pub mavd_mean: T,
    pub mavd_std: T,
    pub madde_mean: T,
    pub madde_std: T,
    /// Per-frame `(mavd, |depth error|)` in input order.
    pub per_frame: Vec<(T, T)>,
    /// Total columns excluded from MAVD across all frames.
    pub excluded_columns: usize,
}

/// Evaluates a batch of frames; frame order is preserved in `per_frame`.
pub fn build_report<T: Scalar>(
    frames: &[FrameComparison<T>],
) -> Result<EvaluationReport<T>, EvalError> {
    if frames.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut mavds = Vec::with_capacity(frames.len());
    let mut excluded = 0usize;
    for frame in frames {
        let breakdown = mavd_detailed::<T>(&frame.pred_profile, &frame.label_profile)?;
        mavds.push(breakdown.value);
        excluded += breakdown.excluded_columns;
    }
    let preds: Vec<T> = frames.iter().map(|f| f.pred_depth_m).collect();
    let labels: Vec<T> = frames.iter().map(|f| f.label_depth_m).collect();
    let (madde_mean, madde_std) = madde(&preds, &labels)?;
    let (mavd_mean, mavd_std) = mean_and_population_std(&mavds);

    let per_frame = mavds
        .iter()
        .zip(preds.iter().zip(&labels))
        .map(|(m, (p, l))| (*m, (*l - *p).abs()))
        .collect();

    Ok(EvaluationReport {
        mavd_mean,
        mavd_std,
        madde_mean,
        madde_std,
        per_frame,
        excluded_columns: excluded,
    })
}
