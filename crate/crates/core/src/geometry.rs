//! Bounding-box overlap math and cross-class non-maximum suppression.

use std::cmp::Ordering;

use crate::model::{BoundingBox, CharacterDetection};
use crate::scalar::Scalar;

/// Intersection-over-union of two boxes, in `[0, 1]`.
///
/// Areas are continuous (`w * h`), not rasterized pixel counts, and both
/// areas are derived from the same corner extents as the intersection so
/// that `iou(a, a) == 1` exactly.
pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    let (al, ar, at, ab) = (a.left(), a.right(), a.top(), a.bottom());
    let (bl, br, bt, bb) = (b.left(), b.right(), b.top(), b.bottom());

    let ix = ar.min(br) - al.max(bl);
    let iy = ab.min(bb) - at.max(bt);
    if ix <= T::zero() || iy <= T::zero() {
        return T::zero();
    }
    let inter = ix * iy;
    let union = (ar - al) * (ab - at) + (br - bl) * (bb - bt) - inter;
    if union <= T::zero() {
        return T::zero();
    }
    inter / union
}

/// Greedy cross-class non-maximum suppression.
///
/// Detections are visited in confidence-descending order (ties broken by
/// `(y, x, class)` so the result never depends on input order) and kept iff
/// their IoU with every already-kept detection is `<= threshold`. Class
/// labels play no role in suppression. A pair at exactly the threshold is
/// not suppressed. The output preserves the original input order.
///
/// `threshold` is expected to lie strictly inside `(0, 1)`.
pub fn cross_class_nms<T: Scalar>(
    detections: &[CharacterDetection<T>],
    threshold: T,
) -> Vec<CharacterDetection<T>> {
    debug_assert!(threshold > T::zero() && threshold < T::one());

    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&i, &j| {
        let a = &detections[i];
        let b = &detections[j];
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.bbox.y.partial_cmp(&b.bbox.y).unwrap_or(Ordering::Equal))
            .then_with(|| a.bbox.x.partial_cmp(&b.bbox.x).unwrap_or(Ordering::Equal))
            .then_with(|| a.class.cmp(&b.class))
    });

    let mut keep = vec![false; detections.len()];
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let overlaps = kept
            .iter()
            .any(|&k| iou(&detections[i].bbox, &detections[k].bbox) > threshold);
        if !overlaps {
            keep[i] = true;
            kept.push(i);
        }
    }

    detections
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(d, _)| d.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CharClass;

    fn bx(x: f64, y: f64, w: f64, h: f64) -> BoundingBox<f64> {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    fn det(x: f64, y: f64, w: f64, h: f64, class: CharClass, conf: f64) -> CharacterDetection<f64> {
        CharacterDetection::new(bx(x, y, w, h), class, conf).unwrap()
    }

    #[test]
    fn iou_identity_is_exactly_one() {
        let a = bx(10.0, 10.0, 4.0, 4.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_disjoint_is_zero() {
        let a = bx(10.0, 10.0, 4.0, 4.0);
        let b = bx(100.0, 100.0, 4.0, 4.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_half_overlap_is_one_third() {
        // intersection 2x4 = 8, union 16 + 16 - 8 = 24
        let a = bx(10.0, 10.0, 4.0, 4.0);
        let b = bx(12.0, 10.0, 4.0, 4.0);
        assert_eq!(iou(&a, &b), 1.0 / 3.0);
        assert_eq!(iou(&b, &a), 1.0 / 3.0);
    }

    #[test]
    fn nms_keeps_highest_confidence_across_classes() {
        let d = vec![
            det(10.0, 10.0, 4.0, 4.0, CharClass::D8, 0.9),
            det(10.0, 10.0, 4.0, 4.0, CharClass::M, 0.7),
        ];
        let out = cross_class_nms(&d, 0.3);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].class, CharClass::D8);
    }

    #[test]
    fn nms_empty_input() {
        let out = cross_class_nms::<f64>(&[], 0.3);
        assert!(out.is_empty());
    }

    #[test]
    fn nms_disjoint_detections_all_kept_in_order() {
        let d = vec![
            det(10.0, 10.0, 4.0, 4.0, CharClass::D1, 0.5),
            det(50.0, 10.0, 4.0, 4.0, CharClass::D2, 0.9),
            det(90.0, 10.0, 4.0, 4.0, CharClass::D3, 0.7),
        ];
        let out = cross_class_nms(&d, 0.3);
        assert_eq!(out, d);
    }

    #[test]
    fn nms_pair_exactly_at_threshold_survives() {
        // iou = 1/3 > 0.3 suppresses; at threshold 1/3 both stay.
        let d = vec![
            det(10.0, 10.0, 4.0, 4.0, CharClass::D1, 0.9),
            det(12.0, 10.0, 4.0, 4.0, CharClass::D2, 0.8),
        ];
        assert_eq!(cross_class_nms(&d, 0.3).len(), 1);
        assert_eq!(cross_class_nms(&d, 1.0 / 3.0).len(), 2);
    }
}
