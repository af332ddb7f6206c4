//! Adaptive draft depth estimation and temporal smoothing.
//!
//! Depending on how many scales remain visible above the waterline, the
//! depth comes from inter-scale distance ratios (two or more visible) or
//! from the single scale's character height (exactly one visible). With
//! no usable scale the frame fails — a value, not an error.

use std::collections::VecDeque;

use crate::model::{
    DepthMethod, DepthReading, DraftScale, FailureReason, ScaleLadder, WaterlineProfile,
};
use crate::scalar::{Scalar, num};
use crate::scale::SpatialRules;
use crate::waterline::waterline_row_at;

/// Which two-scale formula to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwoScaleForm {
    /// `depth = S1 + (d/d1) * (S1 - S2)`: anchored at the reference scale,
    /// so `d = 0` reads exactly `S1`.
    #[default]
    Anchored,
    /// `depth = (d/d1) * (S1 - S2)`: the ratio term alone, with no anchor.
    /// Reads 0 at `d = 0`; kept selectable for comparison runs only.
    RatioOnly,
}

/// Estimates the draft depth for one frame.
///
/// Every ladder scale is measured against the waterline over its own
/// horizontal extent; a scale counts as visible when its bottom edge
/// (`y_c + char_height/2`) clears the measured waterline row. The scale
/// closest above the waterline is the reference `S1`; with a second
/// visible scale the ladder neighbor directly above `S1` provides the
/// pixel-to-meter ratio, otherwise the character height does.
pub fn estimate_depth<T: Scalar>(
    ladder: &ScaleLadder<T>,
    profile: &WaterlineProfile,
    rules: &SpatialRules<T>,
    form: TwoScaleForm,
) -> DepthReading<T> {
    let scales = ladder.scales();
    if scales.is_empty() {
        return DepthReading::failed(FailureReason::EmptyLadder);
    }

    let two = num::<T>(2);
    let mut measured: Vec<(usize, T, T)> = Vec::with_capacity(scales.len());
    for (i, scale) in scales.iter().enumerate() {
        if let Ok(row) = waterline_row_at(scale, profile) {
            measured.push((i, row, row - scale.y_c));
        }
    }
    if measured.is_empty() {
        return DepthReading::failed(FailureReason::WaterlineNotVisible);
    }

    let visible: Vec<&(usize, T, T)> = measured
        .iter()
        .filter(|(i, _, d)| *d >= scales[*i].char_height / two)
        .collect();
    let Some(&&(s1_idx, s1_row, s1_dist)) = visible.iter().min_by(|a, b| {
        a.2.partial_cmp(&b.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                // prefer the lower scale on equal distance
                scales[b.0]
                    .y_c
                    .partial_cmp(&scales[a.0].y_c)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    }) else {
        return DepthReading::failed(FailureReason::NoScaleAboveWaterline);
    };

    let s1 = &scales[s1_idx];
    if visible.len() >= 2 && s1_idx > 0 {
        let s2 = &scales[s1_idx - 1];
        let depth = two_scale_depth(s1, s2, s1_dist, form);
        DepthReading::success(
            DepthMethod::TwoScale,
            depth,
            vec![s1.value_dm, s2.value_dm],
            s1_row,
        )
        .expect("two-scale depth is finite")
    } else {
        let depth = single_scale_depth(s1, s1_dist, rules);
        DepthReading::success(DepthMethod::SingleScale, depth, vec![s1.value_dm], s1_row)
            .expect("single-scale depth is finite")
    }
}

/// Two-scale depth formula: `dist` is the pixel distance from `s1`'s
/// center down to the waterline, `s2` the neighbor above.
pub fn two_scale_depth<T: Scalar>(
    s1: &DraftScale<T>,
    s2: &DraftScale<T>,
    dist: T,
    form: TwoScaleForm,
) -> T {
    let d1 = (s2.y_c - s1.y_c).abs();
    let value_step_m = num::<T>(s1.value_dm - s2.value_dm) / num(10);
    let ratio_term = dist / d1 * value_step_m;
    match form {
        TwoScaleForm::Anchored => s1.value_m() + ratio_term,
        TwoScaleForm::RatioOnly => ratio_term,
    }
}

/// Single-scale depth formula: the physical glyph height maps `dist`
/// pixels to meters through the scale's character pixel height.
pub fn single_scale_depth<T: Scalar>(s1: &DraftScale<T>, dist: T, rules: &SpatialRules<T>) -> T {
    s1.value_m() - rules.char_height_m * dist / s1.char_height
}

/// Bounded queue of recent readings: one second's worth of frames.
///
/// Single-writer state; each camera stream owns its window.
#[derive(Debug, Clone)]
pub struct TemporalWindow<T: Scalar> {
    capacity: usize,
    readings: VecDeque<DepthReading<T>>,
}

impl<T: Scalar> TemporalWindow<T> {
    /// `capacity` is the frame count making up one second at the source
    /// frame rate; must be at least 1.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "window capacity must be >= 1");
        Self {
            capacity,
            readings: VecDeque::with_capacity(capacity),
        }
    }

    pub fn from_frame_rate(frame_rate: u32) -> Self {
        Self::new(frame_rate.max(1) as usize)
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.readings.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    /// Appends a successful reading (failed ones leave the window as-is),
    /// evicting the oldest beyond capacity, and returns the mean depth
    /// over the window — absent while no successful reading has arrived.
    pub fn push_and_average(&mut self, reading: &DepthReading<T>) -> Option<T> {
        if reading.depth_m.is_some() {
            if self.readings.len() == self.capacity {
                self.readings.pop_front();
            }
            self.readings.push_back(reading.clone());
        }
        self.average()
    }

    /// Mean depth over the stored readings.
    pub fn average(&self) -> Option<T> {
        if self.readings.is_empty() {
            return None;
        }
        let sum = self
            .readings
            .iter()
            .filter_map(|r| r.depth_m)
            .fold(T::zero(), |acc, d| acc + d);
        Some(sum / T::from_usize(self.readings.len()).unwrap())
    }

    pub fn clear(&mut self) {
        self.readings.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScaleLadder;

    fn scale(y: f64, value_dm: i32, h: f64) -> DraftScale<f64> {
        DraftScale::new(100.0, y, h, value_dm, true).unwrap()
    }

    fn uniform_profile(row: u32) -> WaterlineProfile {
        WaterlineProfile::new(vec![Some(row); 200])
    }

    fn rules() -> SpatialRules<f64> {
        SpatialRules::default()
    }

    #[test]
    fn two_scale_interpolates_below_reference() {
        let ladder =
            ScaleLadder::new(vec![scale(220.0, 80, 40.0), scale(300.0, 78, 40.0)]).unwrap();
        let reading = estimate_depth(
            &ladder,
            &uniform_profile(340),
            &rules(),
            TwoScaleForm::Anchored,
        );
        assert_eq!(reading.method, DepthMethod::TwoScale);
        assert!((reading.depth_m.unwrap() - 7.7).abs() < 1e-12);
        assert_eq!(reading.scales_used, vec![78, 80]);
        assert_eq!(reading.waterline_row, Some(340.0));
    }

    #[test]
    fn waterline_on_reference_reads_reference_exactly() {
        let s1 = scale(300.0, 78, 40.0);
        let s2 = scale(220.0, 80, 40.0);
        assert_eq!(two_scale_depth(&s1, &s2, 0.0, TwoScaleForm::Anchored), 7.8);
        assert_eq!(single_scale_depth(&s1, 0.0, &rules()), 7.8);
    }

    #[test]
    fn ratio_only_form_reads_zero_at_reference() {
        let s1 = scale(300.0, 78, 40.0);
        let s2 = scale(220.0, 80, 40.0);
        assert_eq!(two_scale_depth(&s1, &s2, 0.0, TwoScaleForm::RatioOnly), 0.0);
    }

    #[test]
    fn single_scale_uses_character_height() {
        let ladder = ScaleLadder::new(vec![scale(300.0, 78, 40.0)]).unwrap();
        let reading = estimate_depth(
            &ladder,
            &uniform_profile(320),
            &rules(),
            TwoScaleForm::Anchored,
        );
        assert_eq!(reading.method, DepthMethod::SingleScale);
        assert!((reading.depth_m.unwrap() - 7.75).abs() < 1e-12);
        assert_eq!(reading.scales_used, vec![78]);
    }

    #[test]
    fn empty_ladder_fails() {
        let reading = estimate_depth(
            &ScaleLadder::<f64>::empty(),
            &uniform_profile(100),
            &rules(),
            TwoScaleForm::Anchored,
        );
        assert_eq!(reading.method, DepthMethod::Failed);
        assert_eq!(reading.failure, Some(FailureReason::EmptyLadder));
        assert!(reading.depth_m.is_none());
    }

    #[test]
    fn submerged_ladder_fails() {
        let ladder = ScaleLadder::new(vec![scale(300.0, 78, 40.0)]).unwrap();
        let reading = estimate_depth(
            &ladder,
            &uniform_profile(310),
            &rules(),
            TwoScaleForm::Anchored,
        );
        assert_eq!(reading.failure, Some(FailureReason::NoScaleAboveWaterline));
    }

    #[test]
    fn missing_waterline_fails() {
        let ladder = ScaleLadder::new(vec![scale(300.0, 78, 40.0)]).unwrap();
        let profile = WaterlineProfile::new(vec![None; 200]);
        let reading = estimate_depth(&ladder, &profile, &rules(), TwoScaleForm::Anchored);
        assert_eq!(reading.failure, Some(FailureReason::WaterlineNotVisible));
    }

    #[test]
    fn window_averages_recent_successes() {
        let mut window = TemporalWindow::new(3);
        let mk =
            |d: f64| DepthReading::success(DepthMethod::TwoScale, d, vec![78, 80], 340.0).unwrap();
        assert_eq!(window.push_and_average(&mk(7.7)), Some(7.7));
        window.push_and_average(&mk(7.9));
        let avg = window.push_and_average(&mk(7.8)).unwrap();
        assert!((avg - 7.8).abs() < 1e-12);

        // Eviction: pushing a fourth drops the oldest (7.7).
        let avg = window.push_and_average(&mk(7.6)).unwrap();
        assert!((avg - (7.9 + 7.8 + 7.6) / 3.0).abs() < 1e-12);
        assert_eq!(window.len(), 3);
    }

    #[test]
    fn window_capacity_from_frame_rate_is_at_least_one() {
        assert_eq!(TemporalWindow::<f64>::from_frame_rate(0).capacity(), 1);
        assert_eq!(TemporalWindow::<f64>::from_frame_rate(30).capacity(), 30);
    }

    #[test]
    fn window_ignores_failures_and_starts_absent() {
        let mut window = TemporalWindow::<f64>::new(3);
        let failed = DepthReading::failed(FailureReason::EmptyLadder);
        assert_eq!(window.push_and_average(&failed), None);
        assert_eq!(window.push_and_average(&failed), None);
        let ok = DepthReading::success(DepthMethod::SingleScale, 7.7, vec![78], 320.0).unwrap();
        assert_eq!(window.push_and_average(&ok), Some(7.7));
        // A later failure leaves the window untouched.
        assert_eq!(window.push_and_average(&failed), Some(7.7));
    }
}
