//! Seeded synthetic draft-mark scenes with exact ground truth.
//!
//! A scene fabricates what the upstream detector and segmenter would emit
//! for a hull whose geometry is fully known: a rule-compliant ladder of
//! two-glyph scales, a water mask below a (possibly wavy) waterline, and
//! the detections those scales would produce — optionally corrupted to
//! model stains. The retained ground truth makes scenes usable as oracles
//! for correction recovery and depth accuracy.
//!
//! Generation is a pure function of the spec: the only randomness is a
//! ChaCha8 stream seeded from `SceneSpec::seed`, so identical specs yield
//! byte-identical scenes on every platform.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    BoundingBox, CharClass, CharacterDetection, DraftScale, ScaleLadder, SegmentationMask,
    WaterlineProfile,
};
use crate::scalar::Scalar;
use crate::scale::SpatialRules;

/// Which glyph of a scale a misread replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharSlot {
    Tens,
    Units,
}

/// A single wrong-character substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Misread {
    pub slot: CharSlot,
    pub replacement: CharClass,
}

/// Stain model applied to the emitted detections; ground truth is never
/// touched. Indices refer to the visible ladder, top scale first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorruptionSpec<T: Scalar> {
    /// Scales whose characters vanish entirely.
    pub drop_indices: BTreeSet<usize>,
    /// Scales with one glyph replaced.
    pub misreads: BTreeMap<usize, Misread>,
    /// Maximum uniform positional noise added to box centers, pixels.
    pub jitter_px: T,
}

impl<T: Scalar> CorruptionSpec<T> {
    pub fn none() -> Self {
        Self {
            drop_indices: BTreeSet::new(),
            misreads: BTreeMap::new(),
            jitter_px: T::zero(),
        }
    }
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<T: Scalar> {
    pub seed: u64,
    /// Value of the topmost configured scale, even decimeters.
    pub ladder_top_value_dm: i32,
    /// Configured scale count; the visible subset depends on the depth.
    pub scale_count: usize,
    pub char_height_px: T,
    /// Vertical distance between adjacent scale centers, pixels.
    pub spacing_px: T,
    /// `(width, height)` of the frame.
    pub image_size: (u32, u32),
    /// True draft depth, strictly inside the configured value span.
    pub true_depth_m: T,
    pub wave_amplitude_px: T,
    pub corruption: CorruptionSpec<T>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("scale_count must be >= 2, got {0}")]
    BadScaleCount(usize),
    #[error("ladder_top_value_dm must be a non-negative even value, got {0}")]
    BadTopValue(i32),
    #[error("ladder bottom value would be negative ({0} dm)")]
    NegativeBottomValue(i32),
    #[error("char_height_px must be finite and > 0")]
    BadCharHeight,
    #[error(
        "spacing_px ({spacing}) must exceed char_height_px ({char_height}): scales cannot overlap"
    )]
    SpacingTooSmall { spacing: f64, char_height: f64 },
    #[error(
        "spacing_px ({spacing}) must stay below {limit} so the true ladder satisfies the neighbor gap rule"
    )]
    SpacingTooWide { spacing: f64, limit: f64 },
    #[error("true_depth_m {depth} must lie strictly inside the ladder span ({low}, {high})")]
    DepthOutsideSpan { depth: f64, low: f64, high: f64 },
    #[error("ladder does not fit the {width}x{height} image")]
    LadderExceedsImage { width: u32, height: u32 },
    #[error("image width {width} cannot hold the glyph pair (needs >= {needed})")]
    ImageTooNarrow { width: u32, needed: u32 },
    #[error("waterline band [{low}, {high}] leaves the image (height {height})")]
    WaterlineOutOfImage { low: f64, high: f64, height: u32 },
    #[error("wave_amplitude_px must be finite and >= 0")]
    BadWaveAmplitude,
    #[error(
        "jitter_px {jitter} too large: must stay below {limit} to keep glyph association intact"
    )]
    JitterTooLarge { jitter: f64, limit: f64 },
    #[error("corruption index {index} out of range: only {visible} scales are visible")]
    CorruptionIndexOutOfRange { index: usize, visible: usize },
}

/// Generator output: corrupted observables plus retained ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene<T: Scalar> {
    /// Detections after corruption, reading order (top to bottom, tens
    /// before units).
    pub detections: Vec<CharacterDetection<T>>,
    pub mask: SegmentationMask,
    /// The visible scales a perfect pipeline would recover.
    pub truth_ladder: ScaleLadder<T>,
    /// Waterline of the mask; identical to `extract_profile(&mask)`.
    pub truth_profile: WaterlineProfile,
    pub truth_depth_m: T,
    /// Waterline row at the ladder's center column.
    pub truth_waterline_row: u32,
    /// Whether the corruption provably leaves the ladder recoverable:
    /// at least two rule-compliant scales survive scoring and every
    /// scale that scores carries its true value. Computed from unjittered
    /// geometry, so it is exact for `jitter_px = 0`.
    pub recoverable: bool,
}

struct Layout {
    char_h: f64,
    spacing: f64,
    width: u32,
    height: u32,
    ladder_x: f64,
    top_y: f64,
    waterline_base: f64,
    wave_amp: f64,
    values: Vec<i32>,
}

fn plan_layout<T: Scalar>(spec: &SceneSpec<T>) -> Result<Layout, SynthError> {
    if spec.scale_count < 2 {
        return Err(SynthError::BadScaleCount(spec.scale_count));
    }
    if spec.ladder_top_value_dm < 0 || spec.ladder_top_value_dm % 2 != 0 {
        return Err(SynthError::BadTopValue(spec.ladder_top_value_dm));
    }
    let bottom_dm = spec.ladder_top_value_dm - 2 * (spec.scale_count as i32 - 1);
    if bottom_dm < 0 {
        return Err(SynthError::NegativeBottomValue(bottom_dm));
    }

    let char_h = spec.char_height_px.to_f64().unwrap_or(f64::NAN);
    if !char_h.is_finite() || char_h <= 0.0 {
        return Err(SynthError::BadCharHeight);
    }
    let spacing = spec.spacing_px.to_f64().unwrap_or(f64::NAN);
    if !spacing.is_finite() || spacing <= char_h {
        return Err(SynthError::SpacingTooSmall {
            spacing,
            char_height: char_h,
        });
    }
    let rules = SpatialRules::<f64>::default();
    let gap_limit = rules.neighbor_gap_factor * char_h;
    if spacing >= gap_limit {
        return Err(SynthError::SpacingTooWide {
            spacing,
            limit: gap_limit,
        });
    }

    let wave_amp = spec.wave_amplitude_px.to_f64().unwrap_or(f64::NAN);
    if !wave_amp.is_finite() || wave_amp < 0.0 {
        return Err(SynthError::BadWaveAmplitude);
    }

    let (width, height) = spec.image_size;
    let needed = (1.1 * char_h).ceil() as u32 + 2;
    if width < needed {
        return Err(SynthError::ImageTooNarrow { width, needed });
    }

    let depth = spec.true_depth_m.to_f64().unwrap_or(f64::NAN);
    let top_m = f64::from(spec.ladder_top_value_dm) / 10.0;
    let bottom_m = f64::from(bottom_dm) / 10.0;
    if !(depth > bottom_m && depth < top_m) {
        return Err(SynthError::DepthOutsideSpan {
            depth,
            low: bottom_m,
            high: top_m,
        });
    }

    let top_y = char_h;
    let bottom_y = top_y + spacing * (spec.scale_count as f64 - 1.0);
    if bottom_y + char_h / 2.0 > f64::from(height) - 1.0 {
        return Err(SynthError::LadderExceedsImage { width, height });
    }

    // Invert the two-scale relation: 0.2 m of draft per spacing_px.
    let waterline_base =
        top_y + spacing * (f64::from(spec.ladder_top_value_dm) - depth * 10.0) / 2.0;
    if waterline_base - wave_amp < 0.0 || waterline_base + wave_amp > f64::from(height) - 1.0 {
        return Err(SynthError::WaterlineOutOfImage {
            low: waterline_base - wave_amp,
            high: waterline_base + wave_amp,
            height,
        });
    }

    let jitter = spec.corruption.jitter_px.to_f64().unwrap_or(f64::NAN);
    let jitter_limit = (0.2 * char_h).min((gap_limit - spacing) / 2.0);
    if !jitter.is_finite() || jitter < 0.0 || (jitter > 0.0 && jitter >= jitter_limit) {
        return Err(SynthError::JitterTooLarge {
            jitter,
            limit: jitter_limit,
        });
    }

    let values: Vec<i32> = (0..spec.scale_count)
        .map(|i| spec.ladder_top_value_dm - 2 * i as i32)
        .collect();

    Ok(Layout {
        char_h,
        spacing,
        width,
        height,
        ladder_x: f64::from(width) / 2.0,
        top_y,
        waterline_base,
        wave_amp,
        values,
    })
}

fn glyphs_for_value(value_dm: i32) -> (CharClass, CharClass) {
    let tens = CharClass::from_char(char::from_digit((value_dm / 10) as u32, 10).unwrap())
        .expect("digit in alphabet");
    let units = if value_dm % 10 == 0 {
        CharClass::M
    } else {
        CharClass::from_char(char::from_digit((value_dm % 10) as u32, 10).unwrap())
            .expect("digit in alphabet")
    };
    (tens, units)
}

/// Deterministic single scene; the wave sits at its seeded base phase.
pub fn generate<T: Scalar>(spec: &SceneSpec<T>) -> Result<SyntheticScene<T>, SynthError> {
    generate_with_phase(spec, 0.0)
}

/// One second of frames: the wave phase advances a full cycle across the
/// sequence, everything else (confidences, jitter) repeats per frame.
pub fn generate_sequence<T: Scalar>(
    spec: &SceneSpec<T>,
    frames: usize,
) -> Result<Vec<SyntheticScene<T>>, SynthError> {
    (0..frames)
        .map(|k| generate_with_phase(spec, std::f64::consts::TAU * k as f64 / frames as f64))
        .collect()
}

fn generate_with_phase<T: Scalar>(
    spec: &SceneSpec<T>,
    phase_offset: f64,
) -> Result<SyntheticScene<T>, SynthError> {
    let layout = plan_layout(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Fixed draw order: wavelength, base phase, per-scale confidences,
    // then jitter offsets. Never reorder; fixtures depend on it.
    let wavelength: f64 =
        rng.random_range(f64::from(layout.width) / 4.0..f64::from(layout.width) / 2.0);
    let base_phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let phase = base_phase + phase_offset;

    // Visibility demands the full glyph clears even the wave crest.
    let crest = layout.waterline_base - layout.wave_amp;
    let visible: Vec<(f64, i32)> = layout
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (layout.top_y + layout.spacing * i as f64, v))
        .filter(|(y, _)| y + layout.char_h / 2.0 < crest)
        .collect();

    for &index in &spec.corruption.drop_indices {
        if index >= visible.len() {
            return Err(SynthError::CorruptionIndexOutOfRange {
                index,
                visible: visible.len(),
            });
        }
    }
    for &index in spec.corruption.misreads.keys() {
        if index >= visible.len() {
            return Err(SynthError::CorruptionIndexOutOfRange {
                index,
                visible: visible.len(),
            });
        }
    }

    let confidences: Vec<(f64, f64)> = visible
        .iter()
        .map(|_| (rng.random_range(0.85..0.99), rng.random_range(0.85..0.99)))
        .collect();

    // Truth ladder: exactly what a perfect pipeline should recover.
    let to_t = |v: f64| T::from_f64(v).expect("layout value representable");
    let truth_scales: Vec<DraftScale<T>> = visible
        .iter()
        .map(|&(y, v)| {
            DraftScale::new(to_t(layout.ladder_x), to_t(y), to_t(layout.char_h), v, true)
                .expect("truth scale valid")
        })
        .collect();
    let truth_ladder = ScaleLadder::new(truth_scales).expect("distinct rows by construction");

    // Detections: two glyphs per surviving scale, with misreads applied.
    let glyph_w = 0.5 * layout.char_h;
    let dx_glyph = 0.3 * layout.char_h;
    let jitter = spec.corruption.jitter_px.to_f64().unwrap();
    let mut detections: Vec<CharacterDetection<T>> = Vec::new();
    for (i, &(y, value)) in visible.iter().enumerate() {
        if spec.corruption.drop_indices.contains(&i) {
            continue;
        }
        let (mut tens, mut units) = glyphs_for_value(value);
        if let Some(misread) = spec.corruption.misreads.get(&i) {
            match misread.slot {
                CharSlot::Tens => tens = misread.replacement,
                CharSlot::Units => units = misread.replacement,
            }
        }
        let (conf_tens, conf_units) = confidences[i];
        for (class, x, conf) in [
            (tens, layout.ladder_x - dx_glyph, conf_tens),
            (units, layout.ladder_x + dx_glyph, conf_units),
        ] {
            let (mut bx, mut by) = (x, y);
            if jitter > 0.0 {
                bx += rng.random_range(-jitter..=jitter);
                by += rng.random_range(-jitter..=jitter);
            }
            detections.push(
                CharacterDetection::new(
                    BoundingBox::new(to_t(bx), to_t(by), to_t(glyph_w), to_t(layout.char_h))
                        .expect("glyph box valid"),
                    class,
                    to_t(conf),
                )
                .expect("confidence in range"),
            );
        }
    }

    // Water mask below the sinusoidal waterline; every column holds water.
    let rows: Vec<u32> = (0..layout.width)
        .map(|x| {
            let offset =
                layout.wave_amp * (std::f64::consts::TAU * f64::from(x) / wavelength + phase).sin();
            (layout.waterline_base + offset).round().max(0.0) as u32
        })
        .collect();
    let mut cells = vec![0u8; layout.width as usize * layout.height as usize];
    for y in 0..layout.height {
        let base = y as usize * layout.width as usize;
        for (x, &row) in rows.iter().enumerate() {
            if y >= row {
                cells[base + x] = 1;
            }
        }
    }
    let mask = SegmentationMask::new(layout.width, layout.height, cells).expect("grid consistent");
    let truth_waterline_row = rows[layout.width as usize / 2];
    let truth_profile = WaterlineProfile::new(rows.into_iter().map(Some).collect());

    let recoverable = simulate_recoverability(spec, &visible, layout.char_h);

    Ok(SyntheticScene {
        detections,
        mask,
        truth_ladder,
        truth_profile,
        truth_depth_m: spec.true_depth_m,
        truth_waterline_row,
        recoverable,
    })
}

/// Applies the scoring rule to the corrupted values on paper: the scene is
/// recoverable iff at least two scales score and every scoring scale
/// carries its true value.
fn simulate_recoverability<T: Scalar>(
    spec: &SceneSpec<T>,
    visible: &[(f64, i32)],
    char_h: f64,
) -> bool {
    let mut entries: Vec<(f64, i32, i32)> = Vec::new(); // (y, value, truth)
    for (i, &(y, truth)) in visible.iter().enumerate() {
        if spec.corruption.drop_indices.contains(&i) {
            continue;
        }
        let value = match spec.corruption.misreads.get(&i) {
            None => truth,
            Some(misread) => {
                let (mut tens, mut units) = glyphs_for_value(truth);
                match misread.slot {
                    CharSlot::Tens => tens = misread.replacement,
                    CharSlot::Units => units = misread.replacement,
                }
                match tens.digit() {
                    // A meter mark cannot open a scale: the pair never
                    // assembles, which acts like a drop.
                    None => continue,
                    Some(t) => t * 10 + units.units_digit(),
                }
            }
        };
        entries.push((y, value, truth));
    }

    let rules = SpatialRules::<f64>::default();
    let gap = rules.neighbor_gap_factor * char_h;
    let supported = |i: usize, k: usize| -> bool {
        let (yi, vi, _) = entries[i];
        let (yk, vk, _) = entries[k];
        (vi - vk).abs() == rules.scale_spacing_dm && (yk - yi).abs() < gap
    };

    let mut scored_truthful = 0usize;
    for i in 0..entries.len() {
        let scored =
            (i > 0 && supported(i, i - 1)) || (i + 1 < entries.len() && supported(i, i + 1));
        if scored {
            let (_, value, truth) = entries[i];
            if value != truth {
                return false;
            }
            scored_truthful += 1;
        }
    }
    scored_truthful >= 2
}
