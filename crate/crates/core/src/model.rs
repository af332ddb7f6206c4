//! Shared domain types and unit conventions.
//!
//! Conventions used across the crate:
//!
//! - Image coordinates are raster order: `y` is the row index and grows
//!   downward, so "below" always means larger `y`.
//! - Scale values are stored as integer **decimeters** (`8.2 m` is `82`),
//!   which keeps the 0.2 m neighbor-spacing test exact.
//! - Masks are binary: 1 = water, 0 = background.
//!
//! Constructors validate invariants and return [`ValidationError`]; the
//! types are immutable values after construction and freely shareable
//! across threads.

use thiserror::Error;

use crate::scalar::{Scalar, num};

/// Invariant violation raised by the validating constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("bounding box {field} must be finite and non-negative, got {value}")]
    BadBoxCoordinate { field: &'static str, value: f64 },
    #[error("bounding box {field} must be finite and > 0, got {value}")]
    BadBoxDimension { field: &'static str, value: f64 },
    #[error("confidence must lie in [0, 1], got {value}")]
    BadConfidence { value: f64 },
    #[error("unknown scale character '{0}' (expected one of 0-9 or M)")]
    UnknownClass(char),
    #[error("scale {field} must be finite{}, got {value}", if *.positive { " and > 0" } else { "" })]
    BadScaleField {
        field: &'static str,
        value: f64,
        positive: bool,
    },
    #[error("scale value must be >= 0 decimeters, got {0}")]
    NegativeScaleValue(i32),
    #[error("ladder scales must have strictly increasing y_c, found duplicate row {0}")]
    DuplicateLadderRow(f64),
    #[error("mask dimensions must be non-zero, got {width}x{height}")]
    EmptyMask { width: u32, height: u32 },
    #[error("mask holds {got} cells, expected width*height = {expected}")]
    MaskCellCount { expected: usize, got: usize },
    #[error("mask cell {index} is {value}, expected 0 or 1")]
    MaskCellValue { index: usize, value: u8 },
    #[error("profile row {row} is outside mask height {height}")]
    ProfileRowOutOfRange { row: u32, height: u32 },
    #[error("{name} must be > 0")]
    NonPositiveParameter { name: &'static str },
    #[error("nms threshold must lie strictly inside (0, 1), got {value}")]
    BadNmsThreshold { value: f64 },
    #[error("frame rate must be >= 1")]
    BadFrameRate,
    #[error("depth reading: {0}")]
    BadDepthReading(&'static str),
}

fn as_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Axis-aligned box in center format: `(x, y)` is the center in pixels,
/// `w`/`h` the full width and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T: Scalar> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Result<Self, ValidationError> {
        for (field, value) in [("x", x), ("y", y)] {
            if !value.is_finite() || value < T::zero() {
                return Err(ValidationError::BadBoxCoordinate {
                    field,
                    value: as_f64(value),
                });
            }
        }
        for (field, value) in [("w", w), ("h", h)] {
            if !value.is_finite() || value <= T::zero() {
                return Err(ValidationError::BadBoxDimension {
                    field,
                    value: as_f64(value),
                });
            }
        }
        Ok(Self { x, y, w, h })
    }

    #[inline]
    pub fn left(&self) -> T {
        self.x - self.w / num(2)
    }

    #[inline]
    pub fn right(&self) -> T {
        self.x + self.w / num(2)
    }

    #[inline]
    pub fn top(&self) -> T {
        self.y - self.h / num(2)
    }

    #[inline]
    pub fn bottom(&self) -> T {
        self.y + self.h / num(2)
    }
}

/// The 11-symbol draft character alphabet: digits plus the meter mark.
///
/// The declaration order gives `'0' < '1' < ... < '9' < 'M'`, which is the
/// tie-break order used by the deterministic sorts in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CharClass {
    D0,
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
    D8,
    D9,
    M,
}

impl CharClass {
    pub const ALL: [CharClass; 11] = [
        CharClass::D0,
        CharClass::D1,
        CharClass::D2,
        CharClass::D3,
        CharClass::D4,
        CharClass::D5,
        CharClass::D6,
        CharClass::D7,
        CharClass::D8,
        CharClass::D9,
        CharClass::M,
    ];

    pub fn from_char(c: char) -> Result<Self, ValidationError> {
        match c {
            '0' => Ok(CharClass::D0),
            '1' => Ok(CharClass::D1),
            '2' => Ok(CharClass::D2),
            '3' => Ok(CharClass::D3),
            '4' => Ok(CharClass::D4),
            '5' => Ok(CharClass::D5),
            '6' => Ok(CharClass::D6),
            '7' => Ok(CharClass::D7),
            '8' => Ok(CharClass::D8),
            '9' => Ok(CharClass::D9),
            'M' => Ok(CharClass::M),
            other => Err(ValidationError::UnknownClass(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            CharClass::D0 => '0',
            CharClass::D1 => '1',
            CharClass::D2 => '2',
            CharClass::D3 => '3',
            CharClass::D4 => '4',
            CharClass::D5 => '5',
            CharClass::D6 => '6',
            CharClass::D7 => '7',
            CharClass::D8 => '8',
            CharClass::D9 => '9',
            CharClass::M => 'M',
        }
    }

    /// Digit value, `None` for the meter mark.
    pub fn digit(self) -> Option<i32> {
        match self {
            CharClass::M => None,
            _ => Some(self as i32),
        }
    }

    /// Digit value in the units position, where the meter mark reads as 0.
    pub fn units_digit(self) -> i32 {
        self.digit().unwrap_or(0)
    }
}

impl std::fmt::Display for CharClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One detected scale character: box, class label, confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterDetection<T: Scalar> {
    pub bbox: BoundingBox<T>,
    pub class: CharClass,
    pub confidence: T,
}

impl<T: Scalar> CharacterDetection<T> {
    pub fn new(
        bbox: BoundingBox<T>,
        class: CharClass,
        confidence: T,
    ) -> Result<Self, ValidationError> {
        if !confidence.is_finite() || confidence < T::zero() || confidence > T::one() {
            return Err(ValidationError::BadConfidence {
                value: as_f64(confidence),
            });
        }
        Ok(Self {
            bbox,
            class,
            confidence,
        })
    }
}

/// One assembled scale reading: center position, mean character pixel
/// height, value in integer decimeters, and the spatial-rule score flag.
///
/// Pre-correction ladders may hold odd `value_dm` (a misread two-glyph
/// concatenation such as "81"); correction restores the even 2 dm grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DraftScale<T: Scalar> {
    pub x_c: T,
    pub y_c: T,
    pub char_height: T,
    pub value_dm: i32,
    pub scored: bool,
}

impl<T: Scalar> DraftScale<T> {
    pub fn new(
        x_c: T,
        y_c: T,
        char_height: T,
        value_dm: i32,
        scored: bool,
    ) -> Result<Self, ValidationError> {
        for (field, value, positive) in [("x_c", x_c, false), ("y_c", y_c, false)] {
            if !value.is_finite() {
                return Err(ValidationError::BadScaleField {
                    field,
                    value: as_f64(value),
                    positive,
                });
            }
        }
        if !char_height.is_finite() || char_height <= T::zero() {
            return Err(ValidationError::BadScaleField {
                field: "char_height",
                value: as_f64(char_height),
                positive: true,
            });
        }
        if value_dm < 0 {
            return Err(ValidationError::NegativeScaleValue(value_dm));
        }
        Ok(Self {
            x_c,
            y_c,
            char_height,
            value_dm,
            scored,
        })
    }

    /// Scale value in meters.
    #[inline]
    pub fn value_m(&self) -> T {
        num::<T>(self.value_dm) / num(10)
    }
}

/// Ordered sequence of draft scales, sorted top of image first
/// (strictly increasing `y_c`).
///
/// A freshly assembled ladder may still carry misread values; after
/// correction the values are additionally strictly decreasing with `y_c`,
/// pairwise distinct, and multiples of 2 dm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScaleLadder<T: Scalar> {
    scales: Vec<DraftScale<T>>,
}

impl<T: Scalar> ScaleLadder<T> {
    pub fn new(mut scales: Vec<DraftScale<T>>) -> Result<Self, ValidationError> {
        scales.sort_by(|a, b| {
            a.y_c
                .partial_cmp(&b.y_c)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    a.x_c
                        .partial_cmp(&b.x_c)
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        for pair in scales.windows(2) {
            if pair[0].y_c == pair[1].y_c {
                return Err(ValidationError::DuplicateLadderRow(as_f64(pair[0].y_c)));
            }
        }
        Ok(Self { scales })
    }

    pub fn empty() -> Self {
        Self { scales: Vec::new() }
    }

    #[inline]
    pub fn scales(&self) -> &[DraftScale<T>] {
        &self.scales
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DraftScale<T>> {
        self.scales.iter()
    }

    pub fn scored_count(&self) -> usize {
        self.scales.iter().filter(|s| s.scored).count()
    }

    pub fn values_dm(&self) -> Vec<i32> {
        self.scales.iter().map(|s| s.value_dm).collect()
    }

    /// True when values strictly decrease from top to bottom, are pairwise
    /// distinct, and all sit on the 2 dm grid: the corrected-ladder shape.
    pub fn is_corrected_shape(&self) -> bool {
        self.scales.iter().all(|s| s.value_dm % 2 == 0)
            && self
                .scales
                .windows(2)
                .all(|pair| pair[0].value_dm > pair[1].value_dm)
    }
}

/// Binary vessel/water mask in row-major order, 1 = water.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    width: u32,
    height: u32,
    cells: Vec<u8>,
}

impl SegmentationMask {
    pub fn new(width: u32, height: u32, cells: Vec<u8>) -> Result<Self, ValidationError> {
        if width == 0 || height == 0 {
            return Err(ValidationError::EmptyMask { width, height });
        }
        let expected = width as usize * height as usize;
        if cells.len() != expected {
            return Err(ValidationError::MaskCellCount {
                expected,
                got: cells.len(),
            });
        }
        if let Some(index) = cells.iter().position(|&c| c > 1) {
            return Err(ValidationError::MaskCellValue {
                index,
                value: cells[index],
            });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        let start = y as usize * w;
        &self.cells[start..start + w]
    }

    #[inline]
    pub fn cell(&self, x: u32, y: u32) -> u8 {
        self.cells[y as usize * self.width as usize + x as usize]
    }
}

/// Per-column row index of the topmost water pixel; `None` where a column
/// holds no water at all.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterlineProfile {
    rows: Vec<Option<u32>>,
}

impl WaterlineProfile {
    pub fn new(rows: Vec<Option<u32>>) -> Self {
        Self { rows }
    }

    /// Validating constructor for profiles loaded from external sources.
    pub fn with_height_bound(rows: Vec<Option<u32>>, height: u32) -> Result<Self, ValidationError> {
        for row in rows.iter().flatten() {
            if *row >= height {
                return Err(ValidationError::ProfileRowOutOfRange { row: *row, height });
            }
        }
        Ok(Self { rows })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn row(&self, x: usize) -> Option<u32> {
        self.rows.get(x).copied().flatten()
    }

    #[inline]
    pub fn rows(&self) -> &[Option<u32>] {
        &self.rows
    }

    pub fn present_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }
}

/// Which estimator produced a depth reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthMethod {
    TwoScale,
    SingleScale,
    Failed,
}

impl std::fmt::Display for DepthMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DepthMethod::TwoScale => "two_scale",
            DepthMethod::SingleScale => "single_scale",
            DepthMethod::Failed => "failed",
        };
        write!(f, "{s}")
    }
}

/// Why a frame produced no depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// The corrected ladder holds no scales at all.
    EmptyLadder,
    /// No waterline column intersects any scale's horizontal extent.
    WaterlineNotVisible,
    /// Every measurable scale sits at or below the waterline.
    NoScaleAboveWaterline,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FailureReason::EmptyLadder => "empty_ladder",
            FailureReason::WaterlineNotVisible => "waterline_not_visible",
            FailureReason::NoScaleAboveWaterline => "no_scale_above_waterline",
        };
        write!(f, "{s}")
    }
}

/// Per-stage counters carried alongside every reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Detections handed to the pipeline.
    pub detections: usize,
    /// Detections surviving cross-class NMS.
    pub kept: usize,
    /// Scales produced by character pairing.
    pub assembled: usize,
    /// Detections that could not be paired (plus pair conflicts).
    pub unpaired: usize,
    /// Scales consistent with the spatial rules before correction.
    pub scored: usize,
    /// Scales whose value was replaced by correction.
    pub corrected: usize,
    /// Scales removed as uncorrectable.
    pub dropped: usize,
    /// Set when fewer than two scales were rule-consistent, so the
    /// surviving values could not be cross-checked.
    pub low_confidence: bool,
}

/// Final output of the per-frame pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthReading<T: Scalar> {
    /// Draft depth in meters; absent exactly when `method` is `Failed`.
    pub depth_m: Option<T>,
    pub method: DepthMethod,
    /// Values (decimeters) of the scales the estimate used, reference first.
    pub scales_used: Vec<i32>,
    /// Median waterline row at the reference scale's extent.
    pub waterline_row: Option<T>,
    pub failure: Option<FailureReason>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> DepthReading<T> {
    /// Successful reading; clamps the depth at zero.
    pub fn success(
        method: DepthMethod,
        depth_m: T,
        scales_used: Vec<i32>,
        waterline_row: T,
    ) -> Result<Self, ValidationError> {
        if method == DepthMethod::Failed {
            return Err(ValidationError::BadDepthReading(
                "a successful reading cannot carry the failed method tag",
            ));
        }
        if !depth_m.is_finite() {
            return Err(ValidationError::BadDepthReading("depth must be finite"));
        }
        Ok(Self {
            depth_m: Some(depth_m.max(T::zero())),
            method,
            scales_used,
            waterline_row: Some(waterline_row),
            failure: None,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn failed(reason: FailureReason) -> Self {
        Self {
            depth_m: None,
            method: DepthMethod::Failed,
            scales_used: Vec::new(),
            waterline_row: None,
            failure: Some(reason),
            diagnostics: Diagnostics::default(),
        }
    }

    #[inline]
    pub fn is_failed(&self) -> bool {
        self.method == DepthMethod::Failed
    }
}
