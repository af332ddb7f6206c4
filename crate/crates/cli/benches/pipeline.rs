//! End-to-end throughput of per-frame post-processing: detection and mask
//! parsing plus the full reading pipeline on a 640x384 frame carrying 30
//! detections (15 two-glyph scales).

use criterion::{Criterion, criterion_group, criterion_main};
use std::hint::black_box;

use draftread_cli::formats::{parse_detections, parse_mask, write_detections, write_mask};
use draftread_core::EngineConfig;
use draftread_core::depth::TemporalWindow;
use draftread_core::pipeline::process_frame;
use draftread_core::synth::{CorruptionSpec, SceneSpec, generate};

fn perf_scene_bytes() -> (String, Vec<u8>) {
    let spec: SceneSpec<f64> = SceneSpec {
        seed: 99,
        ladder_top_value_dm: 60,
        scale_count: 16,
        char_height_px: 16.0,
        spacing_px: 22.0,
        image_size: (640, 384),
        true_depth_m: 3.05,
        wave_amplitude_px: 2.0,
        corruption: CorruptionSpec::none(),
    };
    let scene = generate(&spec).expect("benchmark scene generates");
    assert_eq!(scene.detections.len(), 30);
    (write_detections(&scene.detections), write_mask(&scene.mask))
}

fn bench_frame(c: &mut Criterion) {
    let (detection_text, mask_bytes) = perf_scene_bytes();
    let config = EngineConfig::<f64>::default();

    c.bench_function("frame_640x384_30dets", |b| {
        let mut window = TemporalWindow::from_frame_rate(config.frame_rate);
        b.iter(|| {
            let detections = parse_detections(black_box(&detection_text)).unwrap();
            let mask = parse_mask(black_box(&mask_bytes)).unwrap();
            let outcome = process_frame(&detections, &mask, &config, &mut window);
            black_box(outcome.reading.depth_m);
        });
    });

    c.bench_function("pipeline_only_640x384_30dets", |b| {
        let detections = parse_detections(&detection_text).unwrap();
        let mask = parse_mask(&mask_bytes).unwrap();
        let mut window = TemporalWindow::from_frame_rate(config.frame_rate);
        b.iter(|| {
            let outcome = process_frame(black_box(&detections), &mask, &config, &mut window);
            black_box(outcome.reading.depth_m);
        });
    });
}

criterion_group!(benches, bench_frame);
criterion_main!(benches);
