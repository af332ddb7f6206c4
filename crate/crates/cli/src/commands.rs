//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use draftread_core::EngineConfig;
use draftread_core::depth::TemporalWindow;
use draftread_core::eval::{FrameComparison, build_report, mavd_detailed};
use draftread_core::model::SegmentationMask;
use draftread_core::pipeline::process_frame;
use draftread_core::synth::{SyntheticScene, generate, generate_sequence};
use draftread_core::waterline::extract_profile;

use crate::error::{CliError, CliResult};
use crate::formats::{
    EvalEntry, FrameInput, parse_detections, parse_eval_manifest, parse_frames_manifest,
    parse_mask, read_bytes, read_text, write_detections, write_mask,
};
use crate::records::{EvalFrameRecord, EvalSummaryRecord, FrameRecord, OutputFormat, render};

/// Frames in manifest order form one camera stream: a single temporal
/// window spans the whole run.
pub fn run_read(
    manifest_path: &Path,
    config: &EngineConfig<f64>,
    format: OutputFormat,
) -> CliResult<String> {
    let manifest_text = read_text(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let frames = parse_frames_manifest(&manifest_text, base)?;

    let mut window = TemporalWindow::from_frame_rate(config.frame_rate);
    let mut out = String::new();
    for frame in &frames {
        let record = run_pipeline(frame, config, &mut window);
        let line = render(&record, || record.to_kv(), format);
        writeln!(out, "{line}").expect("string write");
    }
    Ok(out)
}

/// Parses one frame's files and runs the full engine over them, updating
/// the temporal window. Unreadable or malformed inputs yield a failed
/// record naming the parse stage; they never abort the stream.
pub fn run_pipeline(
    frame: &FrameInput,
    config: &EngineConfig<f64>,
    window: &mut TemporalWindow<f64>,
) -> FrameRecord {
    let detections = read_bytes(&frame.detections_path)
        .and_then(|bytes| {
            String::from_utf8(bytes).map_err(|_| {
                CliError::input(format!(
                    "detections {}: not valid UTF-8",
                    frame.detections_path.display()
                ))
            })
        })
        .and_then(|text| parse_detections(&text));
    let detections = match detections {
        Ok(d) => d,
        Err(_) => {
            return FrameRecord::parse_failure(
                &frame.frame_id,
                frame.timestamp_ms,
                "parse_detections",
                window.average(),
            );
        }
    };

    let mask = match read_bytes(&frame.mask_path).and_then(|bytes| parse_mask(&bytes)) {
        Ok(m) => m,
        Err(_) => {
            return FrameRecord::parse_failure(
                &frame.frame_id,
                frame.timestamp_ms,
                "parse_mask",
                window.average(),
            );
        }
    };

    let outcome = process_frame(&detections, &mask, config, window);
    FrameRecord::from_reading(
        &frame.frame_id,
        frame.timestamp_ms,
        &outcome.reading,
        outcome.windowed_depth_m,
    )
}

/// Compares predictions against labels frame by frame (label order wins)
/// and appends an aggregate summary record.
pub fn run_eval(pred_path: &Path, label_path: &Path, format: OutputFormat) -> CliResult<String> {
    let pred_entries = parse_eval_manifest(
        &read_text(pred_path)?,
        pred_path.parent().unwrap_or(Path::new(".")),
    )?;
    let label_entries = parse_eval_manifest(
        &read_text(label_path)?,
        label_path.parent().unwrap_or(Path::new(".")),
    )?;
    if label_entries.is_empty() {
        return Err(CliError::input("eval: label manifest holds no frames"));
    }

    let mut by_id: std::collections::BTreeMap<&str, &EvalEntry> = std::collections::BTreeMap::new();
    for entry in &pred_entries {
        if by_id.insert(entry.frame_id.as_str(), entry).is_some() {
            return Err(CliError::input(format!(
                "eval: duplicate prediction frame {:?}",
                entry.frame_id
            )));
        }
    }

    let mut comparisons = Vec::with_capacity(label_entries.len());
    for label in &label_entries {
        let pred = by_id.remove(label.frame_id.as_str()).ok_or_else(|| {
            CliError::input(format!(
                "eval: no prediction for label frame {:?}",
                label.frame_id
            ))
        })?;
        let pred_mask = load_mask(&pred.mask_path)?;
        let label_mask = load_mask(&label.mask_path)?;
        comparisons.push(FrameComparison {
            pred_profile: extract_profile(&pred_mask),
            label_profile: extract_profile(&label_mask),
            pred_depth_m: pred.depth_m,
            label_depth_m: label.depth_m,
        });
    }
    if let Some((frame_id, _)) = by_id.pop_first() {
        return Err(CliError::input(format!(
            "eval: prediction frame {frame_id:?} has no label"
        )));
    }

    let report = build_report(&comparisons).map_err(|e| CliError::input(format!("eval: {e}")))?;

    let mut out = String::new();
    for ((label, comparison), (mavd_px, depth_error_m)) in label_entries
        .iter()
        .zip(&comparisons)
        .zip(&report.per_frame)
    {
        let breakdown =
            mavd_detailed::<f64>(&comparison.pred_profile, &comparison.label_profile)
                .map_err(|e| CliError::input(format!("eval frame {:?}: {e}", label.frame_id)))?;
        let record = EvalFrameRecord {
            frame: label.frame_id.clone(),
            mavd_px: *mavd_px,
            depth_error_m: *depth_error_m,
            excluded_columns: breakdown.excluded_columns,
        };
        let line = render(&record, || record.to_kv(), format);
        writeln!(out, "{line}").expect("string write");
    }
    let summary = EvalSummaryRecord {
        frames: report.per_frame.len(),
        mavd_mean_px: report.mavd_mean,
        mavd_std_px: report.mavd_std,
        madde_mean_m: report.madde_mean,
        madde_std_m: report.madde_std,
        excluded_columns: report.excluded_columns,
    };
    let line = render(&summary, || summary.to_kv(), format);
    writeln!(out, "{line}").expect("string write");
    Ok(out)
}

fn load_mask(path: &Path) -> CliResult<SegmentationMask> {
    let bytes = read_bytes(path)?;
    parse_mask(&bytes).map_err(|e| match e {
        CliError::Input(message) => CliError::input(format!("{}: {message}", path.display())),
        other => other,
    })
}

/// Writes every scene of a spec file into `out_dir`, together with a
/// frames manifest and an evaluation label manifest covering the corpus.
pub fn run_synth(spec_path: &Path, out_dir: &Path) -> CliResult<String> {
    let scenes = crate::formats::parse_scene_specs(&read_text(spec_path)?)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut frames_manifest = String::new();
    let mut labels_manifest = String::new();
    let mut summary = String::new();

    for scene in &scenes {
        let generated: Vec<SyntheticScene<f64>> = if scene.frames == 1 {
            vec![
                generate(&scene.spec)
                    .map_err(|e| CliError::input(format!("scene {}: {e}", scene.name)))?,
            ]
        } else {
            generate_sequence(&scene.spec, scene.frames)
                .map_err(|e| CliError::input(format!("scene {}: {e}", scene.name)))?
        };

        let mut truth = String::new();
        for (index, frame) in generated.iter().enumerate() {
            let frame_id = if scene.frames == 1 {
                scene.name.clone()
            } else {
                format!("{}_f{index:03}", scene.name)
            };
            let detections_name = format!("{frame_id}.detections.txt");
            let mask_name = format!("{frame_id}.mask.pgm");
            write_file(
                &out_dir.join(&detections_name),
                write_detections(&frame.detections).as_bytes(),
            )?;
            write_file(&out_dir.join(&mask_name), &write_mask(&frame.mask))?;

            writeln!(frames_manifest, "{frame_id} {detections_name} {mask_name}")
                .expect("string write");
            writeln!(
                labels_manifest,
                "{frame_id} {mask_name} {:.6}",
                frame.truth_depth_m
            )
            .expect("string write");

            let ladder = frame
                .truth_ladder
                .scales()
                .iter()
                .map(|s| format!("{}@{:.1}", s.value_dm, s.y_c))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(
                truth,
                "frame={frame_id} depth_m={:.6} waterline_row={} recoverable={} scales={}",
                frame.truth_depth_m,
                frame.truth_waterline_row,
                frame.recoverable,
                if ladder.is_empty() {
                    "-".to_string()
                } else {
                    ladder
                },
            )
            .expect("string write");
        }
        write_file(
            &out_dir.join(format!("{}.truth.txt", scene.name)),
            truth.as_bytes(),
        )?;
        writeln!(summary, "scene {} -> {} frame(s)", scene.name, scene.frames)
            .expect("string write");
    }

    write_file(&out_dir.join("frames.txt"), frames_manifest.as_bytes())?;
    write_file(&out_dir.join("labels.txt"), labels_manifest.as_bytes())?;
    Ok(summary)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}
