//! Engine configuration shared by every pipeline stage.

use crate::depth::TwoScaleForm;
use crate::model::ValidationError;
use crate::scalar::Scalar;
use crate::scale::SpatialRules;

/// Tunable pipeline parameters with the standard depiction-rule defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig<T: Scalar> {
    /// Suppression threshold for cross-class NMS, strictly inside (0, 1).
    pub nms_threshold: T,
    pub rules: SpatialRules<T>,
    /// Source camera frame rate; sizes the one-second averaging window.
    pub frame_rate: u32,
    /// Selects the ratio-only two-scale formula (no anchor term) for
    /// comparison runs. Off by default.
    pub printed_eq10_compat: bool,
}

impl<T: Scalar> Default for EngineConfig<T> {
    fn default() -> Self {
        Self {
            nms_threshold: T::from_f64(0.3).unwrap(),
            rules: SpatialRules::default(),
            frame_rate: 30,
            printed_eq10_compat: false,
        }
    }
}

impl<T: Scalar> EngineConfig<T> {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if !self.nms_threshold.is_finite()
            || self.nms_threshold <= T::zero()
            || self.nms_threshold >= T::one()
        {
            return Err(ValidationError::BadNmsThreshold {
                value: self.nms_threshold.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.frame_rate == 0 {
            return Err(ValidationError::BadFrameRate);
        }
        SpatialRules::new(
            self.rules.scale_spacing_dm,
            self.rules.char_height_m,
            self.rules.neighbor_gap_factor,
        )?;
        Ok(())
    }

    pub fn two_scale_form(&self) -> TwoScaleForm {
        if self.printed_eq10_compat {
            TwoScaleForm::RatioOnly
        } else {
            TwoScaleForm::Anchored
        }
    }
}
