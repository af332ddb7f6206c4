//! Property suites backed by independent oracles: a naive double-loop
//! profile scan, exhaustive snapping search, and ground-truth synthetic
//! scenes.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use draftread_core::depth::{TwoScaleForm, estimate_depth};
use draftread_core::eval::{madde, mavd};
use draftread_core::geometry::{cross_class_nms, iou};
use draftread_core::model::{
    BoundingBox, CharClass, CharacterDetection, DepthMethod, DraftScale, ScaleLadder,
    SegmentationMask, WaterlineProfile,
};
use draftread_core::scale::{SpatialRules, assemble_scales, correct_scales, phi, score_scales};
use draftread_core::synth::{CharSlot, CorruptionSpec, Misread, SceneSpec, generate};
use draftread_core::waterline::{distance_to_waterline, extract_profile};

fn arb_bbox() -> impl Strategy<Value = BoundingBox<f64>> {
    (0.0..2000.0f64, 0.0..2000.0f64, 0.5..300.0f64, 0.5..300.0f64)
        .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, w, h).unwrap())
}

fn arb_detection() -> impl Strategy<Value = CharacterDetection<f64>> {
    (arb_bbox(), 0..11usize, 0.0..=1.0f64).prop_map(|(bbox, class, conf)| {
        CharacterDetection::new(bbox, CharClass::ALL[class], conf).unwrap()
    })
}

fn arb_mask() -> impl Strategy<Value = SegmentationMask> {
    (1u32..=64, 1u32..=64).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.4), (w * h) as usize).prop_map(move |bits| {
            SegmentationMask::new(w, h, bits.into_iter().map(u8::from).collect()).unwrap()
        })
    })
}

/// Naive per-column double loop; the oracle for `extract_profile`.
fn naive_profile(mask: &SegmentationMask) -> Vec<Option<u32>> {
    let mut rows = Vec::with_capacity(mask.width() as usize);
    for x in 0..mask.width() {
        let mut top = None;
        for y in 0..mask.height() {
            if mask.cell(x, y) == 1 {
                top = Some(y);
                break;
            }
        }
        rows.push(top);
    }
    rows
}

proptest! {
    #[test]
    fn iou_symmetric_and_bounded(a in arb_bbox(), b in arb_bbox()) {
        let ab = iou(&a, &b);
        let ba = iou(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn nms_invariants(detections in prop::collection::vec(arb_detection(), 0..32)) {
        let threshold = 0.3;
        let once = cross_class_nms(&detections, threshold);
        let twice = cross_class_nms(&once, threshold);
        prop_assert_eq!(&once, &twice, "idempotence");

        for (i, a) in once.iter().enumerate() {
            for b in &once[i + 1..] {
                prop_assert!(iou(&a.bbox, &b.bbox) <= threshold);
            }
        }

        // subset, order-preserving
        let mut cursor = detections.iter();
        for kept in &once {
            prop_assert!(cursor.any(|d| d == kept));
        }

        if let Some(top) = detections
            .iter()
            .max_by(|a, b| a.confidence.partial_cmp(&b.confidence).unwrap())
        {
            prop_assert!(once.iter().any(|d| d.confidence == top.confidence));
        }
    }

    #[test]
    fn phi_matches_exhaustive_search(
        raw in -30.0..130.0f64,
        occupied_bits in prop::collection::btree_set(0i32..=60, 0..40),
    ) {
        let occupied: BTreeSet<i32> = occupied_bits.into_iter().map(|k| k * 2).collect();
        // Interior candidates stay clear of the window boundary so the
        // oracle never disagrees over a rounding ulp.
        let interior: Vec<i32> = (-40..=80)
            .map(|k| k * 2)
            .filter(|&c| c >= 0 && !occupied.contains(&c) && (f64::from(c) - raw).abs() <= 19.9)
            .collect();

        match phi(raw, &occupied) {
            Ok(value) => {
                prop_assert_eq!(value % 2, 0);
                prop_assert!(value >= 0);
                prop_assert!(!occupied.contains(&value));
                let dist = (f64::from(value) - raw).abs();
                prop_assert!(dist <= 20.0 + 1e-9);
                for c in interior {
                    prop_assert!(dist <= (f64::from(c) - raw).abs() + 1e-9);
                }
            }
            Err(_) => prop_assert!(interior.is_empty()),
        }
    }

    #[test]
    fn profile_matches_naive_oracle(mask in arb_mask()) {
        let profile = extract_profile(&mask);
        let oracle = naive_profile(&mask);
        prop_assert_eq!(profile.rows(), oracle.as_slice());
    }

    #[test]
    fn flooding_never_raises_the_profile(mask in arb_mask(), extra in 0u32..8) {
        let before = extract_profile(&mask);
        let flood_from = mask.height().saturating_sub(extra.min(mask.height()));
        let mut cells = mask.cells().to_vec();
        for y in flood_from..mask.height() {
            for x in 0..mask.width() {
                cells[y as usize * mask.width() as usize + x as usize] = 1;
            }
        }
        let flooded = SegmentationMask::new(mask.width(), mask.height(), cells).unwrap();
        let after = extract_profile(&flooded);
        for (b, a) in before.rows().iter().zip(after.rows()) {
            match (b, a) {
                (Some(b), Some(a)) => prop_assert!(a <= b),
                (Some(_), None) => prop_assert!(false, "flooding removed a column"),
                _ => {}
            }
        }
    }

    #[test]
    fn distance_invariant_under_horizontal_shift(
        rows in prop::collection::vec(prop::option::weighted(0.8, 80u32..160), 40..80),
        shift in 1usize..20,
    ) {
        let profile = WaterlineProfile::new(rows.clone());
        let scale = DraftScale::new(20.0, 40.0, 8.0, 78, true).unwrap();

        let mut shifted_rows = vec![None; shift];
        shifted_rows.extend(rows);
        let shifted_profile = WaterlineProfile::new(shifted_rows);
        let shifted_scale =
            DraftScale::new(20.0 + shift as f64, 40.0, 8.0, 78, true).unwrap();

        prop_assert_eq!(
            distance_to_waterline(&scale, &profile).ok(),
            distance_to_waterline(&shifted_scale, &shifted_profile).ok()
        );
    }

    #[test]
    fn assembled_values_are_two_character_readings(
        detections in prop::collection::vec(arb_detection(), 0..24),
    ) {
        let assembly = assemble_scales(&detections);
        for scale in assembly.ladder.scales() {
            prop_assert!((0..=99).contains(&scale.value_dm));
        }
        prop_assert!(assembly.ladder.len() * 2 + assembly.unpaired <= detections.len() + assembly.unpaired);
    }

    #[test]
    fn scoring_preserves_geometry_and_is_idempotent(
        values in prop::collection::vec(0i32..100, 2..8),
    ) {
        let scales: Vec<DraftScale<f64>> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| DraftScale::new(50.0, 30.0 + 45.0 * i as f64, 20.0, v, true).unwrap())
            .collect();
        let ladder = ScaleLadder::new(scales).unwrap();
        let rules = SpatialRules::default();
        let once = score_scales(&ladder, &rules);
        let twice = score_scales(&once, &rules);
        prop_assert_eq!(&once, &twice);
        for (a, b) in ladder.scales().iter().zip(once.scales()) {
            prop_assert_eq!(a.y_c, b.y_c);
            prop_assert_eq!(a.value_dm, b.value_dm);
        }
    }

    #[test]
    fn corrected_ladders_have_corrected_shape(
        values in prop::collection::vec(0i32..100, 2..8),
    ) {
        let scales: Vec<DraftScale<f64>> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| DraftScale::new(50.0, 30.0 + 45.0 * i as f64, 20.0, v, true).unwrap())
            .collect();
        let ladder = ScaleLadder::new(scales).unwrap();
        let rules = SpatialRules::default();
        let corrected = correct_scales(&score_scales(&ladder, &rules), &rules);
        prop_assert!(corrected.ladder.is_corrected_shape());
    }

    #[test]
    fn value_corruption_round_trip(
        seed in any::<u64>(),
        count in 4usize..=10,
    ) {
        let spacing = 45.0;
        let top_value = 90;
        let truth: Vec<DraftScale<f64>> = (0..count)
            .map(|i| {
                DraftScale::new(50.0, 30.0 + spacing * i as f64, 20.0, top_value - 2 * i as i32, true)
                    .unwrap()
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = count.div_ceil(3);
        let corrupt = sample_non_adjacent(&mut rng, count, budget);
        let mut scales = truth.clone();
        for &i in &corrupt {
            scales[i].value_dm = rng.random_range(0..100);
        }

        let rules = SpatialRules::default();
        let scored = score_scales(&ScaleLadder::new(scales).unwrap(), &rules);
        let honest_scored = scored
            .scales()
            .iter()
            .enumerate()
            .filter(|(i, s)| s.scored && !corrupt.contains(i))
            .count();
        let poisoned = scored
            .scales()
            .iter()
            .enumerate()
            .any(|(i, s)| s.scored && corrupt.contains(&i));

        let corrected = correct_scales(&scored, &rules);
        if honest_scored >= 2 && !poisoned {
            let truth_ladder = ScaleLadder::new(truth).unwrap();
            prop_assert_eq!(&corrected.ladder, &truth_ladder);
            prop_assert!(!corrected.low_confidence);
        } else if scored.scored_count() < 2 {
            prop_assert!(corrected.low_confidence);
        }
    }

    #[test]
    fn depth_monotone_and_translation_invariant(
        row in 330u32..420,
        step in 1u32..30,
        dy in 1u32..40,
    ) {
        let ladder = ScaleLadder::new(vec![
            DraftScale::new(100.0, 220.0, 40.0, 80, true).unwrap(),
            DraftScale::new(100.0, 300.0, 40.0, 78, true).unwrap(),
        ])
        .unwrap();
        let rules = SpatialRules::default();

        let depth_at = |r: u32, ladder: &ScaleLadder<f64>| {
            let profile = WaterlineProfile::new(vec![Some(r); 200]);
            estimate_depth(ladder, &profile, &rules, TwoScaleForm::Anchored)
                .depth_m
                .unwrap()
        };

        // water lower => draft no deeper
        prop_assert!(depth_at(row + step, &ladder) <= depth_at(row, &ladder));

        // shifting ladder and waterline together changes nothing
        let shifted = ScaleLadder::new(
            ladder
                .scales()
                .iter()
                .map(|s| DraftScale::new(s.x_c, s.y_c + f64::from(dy), s.char_height, s.value_dm, s.scored).unwrap())
                .collect(),
        )
        .unwrap();
        prop_assert_eq!(depth_at(row, &ladder), depth_at(row + dy, &shifted));
    }

    #[test]
    fn two_scale_and_single_scale_agree_at_consistent_geometry(row in 321u32..379) {
        // spacing = 2 * char height matches 0.2 m per spacing and 0.1 m glyphs
        let s1 = DraftScale::new(100.0, 300.0, 40.0, 78, true).unwrap();
        let s2 = DraftScale::new(100.0, 220.0, 40.0, 80, true).unwrap();
        let rules = SpatialRules::default();
        let profile = WaterlineProfile::new(vec![Some(row); 200]);

        let both = ScaleLadder::new(vec![s1.clone(), s2]).unwrap();
        let two = estimate_depth(&both, &profile, &rules, TwoScaleForm::Anchored);
        prop_assert_eq!(two.method, DepthMethod::TwoScale);

        let only = ScaleLadder::new(vec![s1]).unwrap();
        let one = estimate_depth(&only, &profile, &rules, TwoScaleForm::Anchored);
        prop_assert_eq!(one.method, DepthMethod::SingleScale);

        let d1 = 80.0f64;
        let bound = 0.2 / d1;
        let gap: f64 = two.depth_m.unwrap() - one.depth_m.unwrap();
        prop_assert!(gap.abs() <= bound);
    }

    #[test]
    fn mavd_symmetry_and_triangle(
        a in prop::collection::vec(0u32..200, 10..40),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<u32> = a.iter().map(|&v| v + rng.random_range(0..20)).collect();
        let c: Vec<u32> = a.iter().map(|&v| v + rng.random_range(0..20)).collect();
        let pa = WaterlineProfile::new(a.iter().map(|&v| Some(v)).collect());
        let pb = WaterlineProfile::new(b.iter().map(|&v| Some(v)).collect());
        let pc = WaterlineProfile::new(c.iter().map(|&v| Some(v)).collect());

        let ab: f64 = mavd(&pa, &pb).unwrap();
        let ba: f64 = mavd(&pb, &pa).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(mavd::<f64>(&pa, &pa).unwrap(), 0.0);

        let ac: f64 = mavd(&pa, &pc).unwrap();
        let bc: f64 = mavd(&pb, &pc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn madde_invariant_under_shared_permutation(
        pairs in prop::collection::vec((6.0..10.0f64, 6.0..10.0f64), 1..30),
        seed in any::<u64>(),
    ) {
        let pred: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let label: Vec<f64> = pairs.iter().map(|p| p.1).collect();

        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let pred_p: Vec<f64> = order.iter().map(|&i| pred[i]).collect();
        let label_p: Vec<f64> = order.iter().map(|&i| label[i]).collect();

        let (m1, s1) = madde(&pred, &label).unwrap();
        let (m2, s2) = madde(&pred_p, &label_p).unwrap();
        prop_assert!((m1 - m2).abs() < 1e-12);
        prop_assert!((s1 - s2).abs() < 1e-12);
    }
}

fn sample_non_adjacent(rng: &mut ChaCha8Rng, total: usize, budget: usize) -> BTreeSet<usize> {
    let mut available: Vec<usize> = (0..total).collect();
    let mut chosen = BTreeSet::new();
    while chosen.len() < budget && !available.is_empty() {
        let pick = available[rng.random_range(0..available.len())];
        chosen.insert(pick);
        available.retain(|&i| i != pick && i + 1 != pick && i != pick + 1);
    }
    chosen
}

/// Scene-level recovery: generated corruption, pipeline correction, exact
/// ground-truth comparison (drops and vanished pairs excluded from the
/// expectation, since no correction can reinvent an absent scale).
#[test]
fn scene_corruption_recovery_matches_generator_flag() {
    let mut recoverable_seen = 0usize;
    let mut flagged_seen = 0usize;
    for seed in 0..200u64 {
        let scene_and_spec = corrupted_scene(seed);
        let (spec, scene) = scene_and_spec;
        let rules = SpatialRules::default();
        let kept = cross_class_nms(&scene.detections, 0.3);
        let scored = score_scales(&assemble_scales(&kept).ladder, &rules);
        let corrected = correct_scales(&scored, &rules);

        if scene.recoverable {
            recoverable_seen += 1;
            let expected = expected_ladder(&spec, &scene);
            assert_eq!(
                corrected.ladder, expected,
                "seed {seed}: recoverable scene must recover exactly"
            );
            assert!(!corrected.low_confidence);
        } else if scored.scored_count() < 2 {
            flagged_seen += 1;
            assert!(
                corrected.low_confidence,
                "seed {seed}: unrecoverable scene must be flagged"
            );
        }
    }
    assert!(recoverable_seen > 50, "suite should exercise recovery");
    assert!(flagged_seen > 3, "suite should exercise flagging");
}

fn corrupted_scene(seed: u64) -> (SceneSpec<f64>, draftread_core::synth::SyntheticScene<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let visible = rng.random_range(4usize..=10);
    let scale_count = visible + 1;
    let top = 90;
    let bottom_m = f64::from(top - 2 * (scale_count as i32 - 1)) / 10.0;

    let mut corruption = CorruptionSpec::none();
    let budget = rng.random_range(1..=visible.div_ceil(3));
    for index in sample_non_adjacent(&mut rng, visible, budget) {
        if rng.random_range(0..2) == 0 {
            corruption.drop_indices.insert(index);
        } else {
            let truth_value = top - 2 * index as i32;
            let slot = if rng.random_range(0..2) == 0 {
                CharSlot::Tens
            } else {
                CharSlot::Units
            };
            let truth_char = match slot {
                CharSlot::Tens => char::from_digit((truth_value / 10) as u32, 10).unwrap(),
                CharSlot::Units => {
                    if truth_value % 10 == 0 {
                        'M'
                    } else {
                        char::from_digit((truth_value % 10) as u32, 10).unwrap()
                    }
                }
            };
            let replacement = loop {
                let c = CharClass::ALL[rng.random_range(0..11)];
                if c.as_char() != truth_char {
                    break c;
                }
            };
            corruption
                .misreads
                .insert(index, Misread { slot, replacement });
        }
    }

    let spec = SceneSpec {
        seed,
        ladder_top_value_dm: top,
        scale_count,
        char_height_px: 20.0,
        spacing_px: 40.0,
        image_size: (120, 560),
        true_depth_m: bottom_m + 0.1,
        wave_amplitude_px: 0.0,
        corruption,
    };
    let scene = generate(&spec).unwrap();
    (spec, scene)
}

fn expected_ladder(
    spec: &SceneSpec<f64>,
    scene: &draftread_core::synth::SyntheticScene<f64>,
) -> ScaleLadder<f64> {
    let survivors: Vec<DraftScale<f64>> = scene
        .truth_ladder
        .scales()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            if spec.corruption.drop_indices.contains(i) {
                return false;
            }
            // a tens glyph misread to the meter mark never assembles
            !matches!(
                spec.corruption.misreads.get(i),
                Some(Misread {
                    slot: CharSlot::Tens,
                    replacement: CharClass::M
                })
            )
        })
        .map(|(_, s)| s.clone())
        .collect();
    ScaleLadder::new(survivors).unwrap()
}

#[test]
fn pipeline_works_in_f32() {
    let spec: SceneSpec<f32> = SceneSpec {
        seed: 3,
        ladder_top_value_dm: 80,
        scale_count: 4,
        char_height_px: 40.0,
        spacing_px: 80.0,
        image_size: (160, 400),
        true_depth_m: 7.7,
        wave_amplitude_px: 0.0,
        corruption: CorruptionSpec::none(),
    };
    let scene = generate(&spec).unwrap();
    let config = draftread_core::EngineConfig::<f32>::default();
    let mut window = draftread_core::TemporalWindow::from_frame_rate(30);
    let outcome =
        draftread_core::process_frame(&scene.detections, &scene.mask, &config, &mut window);
    assert_eq!(outcome.reading.method, DepthMethod::TwoScale);
    assert!((outcome.reading.depth_m.unwrap() - 7.7).abs() < 0.01);
}
