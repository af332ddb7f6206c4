//! Waterline extraction from binary masks and scale-to-waterline distances.

use thiserror::Error;

use crate::model::{DraftScale, SegmentationMask, WaterlineProfile};
use crate::scalar::{Scalar, num_u32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WaterlineError {
    #[error("no waterline column within the scale's horizontal extent")]
    NotVisible,
}

/// Per-column topmost water row. A column with no water pixel stays absent.
///
/// The scan is row-major from the top so the common case (waterline high
/// in the frame) finishes early.
pub fn extract_profile(mask: &SegmentationMask) -> WaterlineProfile {
    let width = mask.width() as usize;
    let mut rows: Vec<Option<u32>> = vec![None; width];
    let mut remaining = width;

    for y in 0..mask.height() {
        let row = mask.row(y);
        for (x, &cell) in row.iter().enumerate() {
            if cell != 0 && rows[x].is_none() {
                rows[x] = Some(y);
                remaining -= 1;
            }
        }
        if remaining == 0 {
            break;
        }
    }

    WaterlineProfile::new(rows)
}

/// Median waterline row over a scale's horizontal extent.
///
/// The extent is `[x_c - char_height, x_c + char_height]` (glyph width
/// proxied by height). The median makes the measurement robust to
/// wave-induced spikes in single columns; an even column count averages
/// the two central rows.
pub fn waterline_row_at<T: Scalar>(
    scale: &DraftScale<T>,
    profile: &WaterlineProfile,
) -> Result<T, WaterlineError> {
    if profile.width() == 0 {
        return Err(WaterlineError::NotVisible);
    }
    let lo_f = (scale.x_c - scale.char_height)
        .ceil()
        .to_f64()
        .unwrap_or(f64::NAN);
    let hi_f = (scale.x_c + scale.char_height)
        .floor()
        .to_f64()
        .unwrap_or(f64::NAN);
    let max_col = (profile.width() - 1) as f64;
    if lo_f.is_nan() || hi_f.is_nan() || lo_f > hi_f || hi_f < 0.0 || lo_f > max_col {
        return Err(WaterlineError::NotVisible);
    }
    let lo = lo_f.clamp(0.0, max_col) as usize;
    let hi = hi_f.clamp(0.0, max_col) as usize;

    let mut present: Vec<u32> = (lo..=hi).filter_map(|x| profile.row(x)).collect();
    if present.is_empty() {
        return Err(WaterlineError::NotVisible);
    }
    present.sort_unstable();

    let n = present.len();
    let median = if n % 2 == 1 {
        num_u32::<T>(present[n / 2])
    } else {
        (num_u32::<T>(present[n / 2 - 1]) + num_u32::<T>(present[n / 2])) / num_u32::<T>(2)
    };
    Ok(median)
}

/// Signed vertical distance from the scale center down to the waterline,
/// in pixels; positive when the water lies below the scale.
pub fn distance_to_waterline<T: Scalar>(
    scale: &DraftScale<T>,
    profile: &WaterlineProfile,
) -> Result<T, WaterlineError> {
    Ok(waterline_row_at(scale, profile)? - scale.y_c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(width: u32, height: u32, water: impl Fn(u32, u32) -> bool) -> SegmentationMask {
        let mut cells = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                cells.push(u8::from(water(x, y)));
            }
        }
        SegmentationMask::new(width, height, cells).unwrap()
    }

    fn scale_at(x_c: f64, y_c: f64, char_height: f64) -> DraftScale<f64> {
        DraftScale::new(x_c, y_c, char_height, 78, true).unwrap()
    }

    #[test]
    fn uniform_horizontal_waterline() {
        let m = mask(4, 4, |_, y| y >= 2);
        let p = extract_profile(&m);
        assert_eq!(p.rows(), &[Some(2), Some(2), Some(2), Some(2)]);
    }

    #[test]
    fn all_background_gives_absent_columns() {
        let m = mask(4, 4, |_, _| false);
        let p = extract_profile(&m);
        assert!(p.rows().iter().all(|r| r.is_none()));
    }

    #[test]
    fn staircase_profile() {
        let m = mask(4, 4, |x, y| y >= 3 - x);
        let p = extract_profile(&m);
        assert_eq!(p.rows(), &[Some(3), Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn water_hole_still_takes_topmost_pixel() {
        // water / background / water stacked in one column
        let m = mask(1, 5, |_, y| y == 1 || y >= 3);
        let p = extract_profile(&m);
        assert_eq!(p.rows(), &[Some(1)]);
    }

    #[test]
    fn distance_over_uniform_profile() {
        let p = WaterlineProfile::new(vec![Some(160); 200]);
        let s = scale_at(100.0, 100.0, 10.0);
        assert_eq!(distance_to_waterline(&s, &p).unwrap(), 60.0);
    }

    #[test]
    fn distance_is_median_of_extent() {
        let mut rows = vec![None; 200];
        rows[99] = Some(158);
        rows[100] = Some(160);
        rows[101] = Some(162);
        let p = WaterlineProfile::new(rows);
        let s = scale_at(100.0, 100.0, 1.5);
        assert_eq!(distance_to_waterline(&s, &p).unwrap(), 60.0);
    }

    #[test]
    fn absent_extent_is_not_visible() {
        let p = WaterlineProfile::new(vec![None; 200]);
        let s = scale_at(100.0, 100.0, 10.0);
        assert_eq!(
            distance_to_waterline(&s, &p),
            Err(WaterlineError::NotVisible)
        );
    }

    #[test]
    fn even_extent_averages_central_rows() {
        let mut rows = vec![None; 10];
        rows[4] = Some(150);
        rows[5] = Some(151);
        let p = WaterlineProfile::new(rows);
        let s = scale_at(4.5, 100.0, 0.6);
        assert_eq!(waterline_row_at(&s, &p).unwrap(), 150.5);
    }
}
