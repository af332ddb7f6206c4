//! Draft scale assembly, spatial-rule scoring, and mistaken-recognition
//! correction.
//!
//! Inland draft marks follow fixed depiction rules: values run large (top)
//! to small (bottom), adjacent scales differ by exactly 0.2 m, and each
//! glyph is 0.1 m tall. Those rules let obviously-wrong readings be
//! detected (scoring) and replaced by values extrapolated from trusted
//! neighbors (correction).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{CharacterDetection, DraftScale, ScaleLadder, ValidationError};
use crate::scalar::{Scalar, num};

/// Scale value grid step: all legal readings are multiples of 2 dm (0.2 m).
pub const SCALE_STEP_DM: i32 = 2;

/// Snapping search range, in decimeters, around a raw corrected value
/// (ten grid steps either side).
pub const PHI_WINDOW_DM: i32 = 10 * SCALE_STEP_DM;

/// The depiction-regulation constants used for scoring and depth estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialRules<T: Scalar> {
    /// Value difference between vertically adjacent scales, decimeters.
    pub scale_spacing_dm: i32,
    /// Physical glyph height in meters.
    pub char_height_m: T,
    /// A neighbor supports a scale only when the vertical center gap is
    /// below this multiple of the scale's character pixel height.
    pub neighbor_gap_factor: T,
}

impl<T: Scalar> SpatialRules<T> {
    pub fn new(
        scale_spacing_dm: i32,
        char_height_m: T,
        neighbor_gap_factor: T,
    ) -> Result<Self, ValidationError> {
        if scale_spacing_dm <= 0 {
            return Err(ValidationError::NonPositiveParameter {
                name: "scale_spacing_dm",
            });
        }
        if !char_height_m.is_finite() || char_height_m <= T::zero() {
            return Err(ValidationError::NonPositiveParameter {
                name: "char_height_m",
            });
        }
        if !neighbor_gap_factor.is_finite() || neighbor_gap_factor <= T::zero() {
            return Err(ValidationError::NonPositiveParameter {
                name: "neighbor_gap_factor",
            });
        }
        Ok(Self {
            scale_spacing_dm,
            char_height_m,
            neighbor_gap_factor,
        })
    }
}

impl<T: Scalar> Default for SpatialRules<T> {
    fn default() -> Self {
        Self {
            scale_spacing_dm: SCALE_STEP_DM,
            char_height_m: T::from_f64(0.1).unwrap(),
            neighbor_gap_factor: T::from_f64(2.3).unwrap(),
        }
    }
}

/// Ladder produced by character pairing, plus detections left over.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly<T: Scalar> {
    pub ladder: ScaleLadder<T>,
    /// Detections that could not take part in any scale (includes both
    /// characters of a pairing discarded over a row conflict).
    pub unpaired: usize,
}

/// Pairs characters into scales.
///
/// A pair `(i, j)` is admissible when `0 < x_j - x_i < 2 w_i` and
/// `|y_j - y_i| < min(h_i, h_j)`. Pairing is greedy left-to-right with each
/// detection used at most once; for a given left character the nearest
/// admissible right character wins. The meter mark is only legal in the
/// units position, where it reads as the digit 0 ("8M" is 80 dm). Every
/// emitted scale starts out `scored = true`.
pub fn assemble_scales<T: Scalar>(detections: &[CharacterDetection<T>]) -> Assembly<T> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&i, &j| {
        let a = &detections[i];
        let b = &detections[j];
        a.bbox
            .x
            .partial_cmp(&b.bbox.x)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.bbox.y.partial_cmp(&b.bbox.y).unwrap_or(Ordering::Equal))
            .then_with(|| a.class.cmp(&b.class))
    });

    let mut used = vec![false; detections.len()];
    let mut scales: Vec<DraftScale<T>> = Vec::new();

    for &i in &order {
        if used[i] {
            continue;
        }
        let lead = &detections[i];
        let Some(tens) = lead.class.digit() else {
            // 'M' cannot open a scale; it stays available as a units mark.
            continue;
        };

        let mut best: Option<(usize, T, T)> = None;
        for &j in &order {
            if used[j] || j == i {
                continue;
            }
            let cand = &detections[j];
            let dx = cand.bbox.x - lead.bbox.x;
            let dy = (cand.bbox.y - lead.bbox.y).abs();
            if dx <= T::zero() || dx >= lead.bbox.w * num(2) {
                continue;
            }
            if dy >= lead.bbox.h.min(cand.bbox.h) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bj, bdx, bdy)) => match dx.partial_cmp(bdx).unwrap_or(Ordering::Equal) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match dy.partial_cmp(bdy).unwrap_or(Ordering::Equal) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => detections[j].class < detections[*bj].class,
                    },
                },
            };
            if better {
                best = Some((j, dx, dy));
            }
        }

        if let Some((j, _, _)) = best {
            let unit = &detections[j];
            let value_dm = tens * 10 + unit.class.units_digit();
            let two = num::<T>(2);
            let scale = DraftScale::new(
                (lead.bbox.x + unit.bbox.x) / two,
                (lead.bbox.y + unit.bbox.y) / two,
                (lead.bbox.h + unit.bbox.h) / two,
                value_dm,
                true,
            )
            .expect("paired detections always yield a valid scale");
            scales.push(scale);
            used[i] = true;
            used[j] = true;
        }
    }

    let mut unpaired = used.iter().filter(|&&u| !u).count();

    // Distinct physical scales cannot share a row; keep the leftmost of an
    // exact y tie so the ladder constructor's strict ordering holds.
    scales.sort_by(|a, b| {
        a.y_c
            .partial_cmp(&b.y_c)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.x_c.partial_cmp(&b.x_c).unwrap_or(Ordering::Equal))
    });
    let mut deduped: Vec<DraftScale<T>> = Vec::with_capacity(scales.len());
    for scale in scales {
        if deduped.last().is_some_and(|prev| prev.y_c == scale.y_c) {
            unpaired += 2;
        } else {
            deduped.push(scale);
        }
    }

    Assembly {
        ladder: ScaleLadder::new(deduped).expect("rows deduplicated above"),
        unpaired,
    }
}

/// Re-scores every scale against the spatial distribution rules.
///
/// Scale `i` keeps its score iff some ladder-adjacent neighbor differs by
/// exactly `scale_spacing_dm` in value and sits within
/// `neighbor_gap_factor * char_height_i` vertically. Geometry and values
/// are never touched, so the operation is idempotent. A single-scale
/// ladder has no neighbor and comes back unscored.
pub fn score_scales<T: Scalar>(ladder: &ScaleLadder<T>, rules: &SpatialRules<T>) -> ScaleLadder<T> {
    let scales = ladder.scales();
    let supported = |i: usize, k: usize| -> bool {
        let s = &scales[i];
        let n = &scales[k];
        (s.value_dm - n.value_dm).abs() == rules.scale_spacing_dm
            && (n.y_c - s.y_c).abs() < rules.neighbor_gap_factor * s.char_height
    };

    let rescored: Vec<DraftScale<T>> = scales
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let by_prev = i > 0 && supported(i, i - 1);
            let by_next = i + 1 < scales.len() && supported(i, i + 1);
            DraftScale {
                scored: by_prev || by_next,
                ..s.clone()
            }
        })
        .collect();

    ScaleLadder::new(rescored).expect("geometry unchanged")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrectionError {
    #[error("no free non-negative scale multiple within {window_dm} dm of {raw_dm}")]
    PhiExhausted { raw_dm: f64, window_dm: i32 },
}

/// Snaps a raw decimeter value to the nearest free multiple of 2 dm.
///
/// Candidates already present in `occupied` are skipped; when the nearest
/// free candidates above and below are equidistant the larger one wins.
/// The result is always non-negative. Fails when no free non-negative
/// multiple lies within [`PHI_WINDOW_DM`] of `raw_dm`.
pub fn phi<T: Scalar>(raw_dm: T, occupied: &BTreeSet<i32>) -> Result<i32, CorrectionError> {
    let lo_f = (raw_dm - num(PHI_WINDOW_DM)).to_f64().unwrap_or(f64::MIN);
    let hi_f = (raw_dm + num(PHI_WINDOW_DM)).to_f64().unwrap_or(f64::MAX);
    let lo = (lo_f / 2.0).ceil().clamp(i32::MIN as f64, i32::MAX as f64) as i32;
    let hi = (hi_f / 2.0).floor().clamp(i32::MIN as f64, i32::MAX as f64) as i32;

    let mut best: Option<(i32, T)> = None;
    for k in lo.max(0)..=hi {
        let candidate = k * SCALE_STEP_DM;
        if occupied.contains(&candidate) {
            continue;
        }
        let dist = (num::<T>(candidate) - raw_dm).abs();
        // `<=` prefers the later (larger) candidate on an exact tie.
        if best.as_ref().is_none_or(|(_, d)| dist <= *d) {
            best = Some((candidate, dist));
        }
    }

    best.map(|(c, _)| c).ok_or(CorrectionError::PhiExhausted {
        raw_dm: raw_dm.to_f64().unwrap_or(f64::NAN),
        window_dm: PHI_WINDOW_DM,
    })
}

/// Outcome of the correction pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction<T: Scalar> {
    pub ladder: ScaleLadder<T>,
    /// Scales whose value was replaced.
    pub corrected: usize,
    /// Scales removed as uncorrectable.
    pub dropped: usize,
    /// Fewer than two rule-consistent scales existed, so the surviving
    /// values went unverified.
    pub low_confidence: bool,
}

/// Replaces every unscored scale by extrapolating from its two nearest
/// scored references.
///
/// For unscored scale `i`, the two scored scales nearest in vertical
/// distance (ties toward smaller `y`) serve as references; the
/// larger-valued one anchors the interpolation. With `d1` the signed row
/// distance between the references and `d2 = y_i - y_anchor`, the raw
/// replacement is `c_anchor - d2 * (c_anchor - c_other) / d1`, snapped by
/// [`phi`] away from every value already in use (scored scales plus
/// earlier corrections; corrected scales never serve as references).
///
/// With fewer than two scored scales correction is impossible: a lone
/// assembled scale is kept as-is (there was no rule to test it against),
/// otherwise the ladder is restricted to its scored scales; either way the
/// result is flagged low-confidence.
///
/// The returned ladder always has the corrected shape — values strictly
/// decreasing from top to bottom, pairwise distinct, on the 2 dm grid —
/// with violating scales removed and counted rather than re-corrected.
pub fn correct_scales<T: Scalar>(
    ladder: &ScaleLadder<T>,
    _rules: &SpatialRules<T>,
) -> Correction<T> {
    let scales = ladder.scales();
    let scored_idx: Vec<usize> = (0..scales.len()).filter(|&i| scales[i].scored).collect();

    if scored_idx.len() < 2 {
        let survivors: Vec<DraftScale<T>> = if scales.len() == 1 {
            scales.to_vec()
        } else {
            scored_idx.iter().map(|&i| scales[i].clone()).collect()
        };
        let dropped_unscored = scales.len() - survivors.len();
        let (kept, dropped_sweep) = enforce_corrected_shape(survivors);
        return Correction {
            ladder: ScaleLadder::new(kept).expect("subset of a valid ladder"),
            corrected: 0,
            dropped: dropped_unscored + dropped_sweep,
            low_confidence: true,
        };
    }

    let mut occupied: BTreeSet<i32> = scored_idx.iter().map(|&i| scales[i].value_dm).collect();
    let mut result: Vec<DraftScale<T>> = Vec::with_capacity(scales.len());
    let mut corrected = 0usize;
    let mut dropped = 0usize;

    for scale in scales {
        if scale.scored {
            result.push(scale.clone());
            continue;
        }

        let (anchor, other) = nearest_scored_pair(scales, &scored_idx, scale.y_c);
        let c_anchor = num::<T>(anchor.value_dm);
        let c_other = num::<T>(other.value_dm);
        let d1 = other.y_c - anchor.y_c;
        let d2 = scale.y_c - anchor.y_c;
        let raw = c_anchor - d2 * (c_anchor - c_other) / d1;

        match phi(raw, &occupied) {
            Ok(value_dm) => {
                occupied.insert(value_dm);
                result.push(DraftScale {
                    value_dm,
                    scored: true,
                    ..scale.clone()
                });
                corrected += 1;
            }
            Err(_) => {
                dropped += 1;
            }
        }
    }

    let (kept, dropped_sweep) = enforce_corrected_shape(result);
    Correction {
        ladder: ScaleLadder::new(kept).expect("subset of a valid ladder"),
        corrected,
        dropped: dropped + dropped_sweep,
        low_confidence: false,
    }
}

/// Two nearest scored scales by vertical distance, ties toward smaller y;
/// the larger-valued of the two comes first (the anchor).
fn nearest_scored_pair<'a, T: Scalar>(
    scales: &'a [DraftScale<T>],
    scored_idx: &[usize],
    y: T,
) -> (&'a DraftScale<T>, &'a DraftScale<T>) {
    let mut ranked: Vec<usize> = scored_idx.to_vec();
    ranked.sort_by(|&a, &b| {
        let da = (scales[a].y_c - y).abs();
        let db = (scales[b].y_c - y).abs();
        da.partial_cmp(&db)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                scales[a]
                    .y_c
                    .partial_cmp(&scales[b].y_c)
                    .unwrap_or(Ordering::Equal)
            })
    });
    let first = &scales[ranked[0]];
    let second = &scales[ranked[1]];
    if first.value_dm >= second.value_dm {
        (first, second)
    } else {
        (second, first)
    }
}

/// Removes off-grid values, then keeps the longest strictly-decreasing
/// value subsequence (earliest scales preferred on ties). Returns the
/// kept scales plus the number removed.
fn enforce_corrected_shape<T: Scalar>(scales: Vec<DraftScale<T>>) -> (Vec<DraftScale<T>>, usize) {
    let total = scales.len();
    let evens: Vec<DraftScale<T>> = scales
        .into_iter()
        .filter(|s| s.value_dm % SCALE_STEP_DM == 0)
        .collect();

    if evens
        .windows(2)
        .all(|pair| pair[0].value_dm > pair[1].value_dm)
    {
        let dropped = total - evens.len();
        return (evens, dropped);
    }

    let n = evens.len();
    let mut len = vec![1usize; n];
    let mut pred = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..i {
            if evens[j].value_dm > evens[i].value_dm && len[j] + 1 > len[i] {
                len[i] = len[j] + 1;
                pred[i] = j;
            }
        }
    }
    let best_len = len.iter().copied().max().unwrap_or(0);
    let end = (0..n).find(|&i| len[i] == best_len);

    let mut keep = vec![false; n];
    let mut cursor = end;
    while let Some(i) = cursor {
        keep[i] = true;
        cursor = (pred[i] != usize::MAX).then(|| pred[i]);
    }

    let kept: Vec<DraftScale<T>> = evens
        .into_iter()
        .zip(&keep)
        .filter_map(|(s, &k)| k.then_some(s))
        .collect();
    let dropped = total - kept.len();
    (kept, dropped)
}
