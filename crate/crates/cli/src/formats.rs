//! On-disk formats: detection lists, P5 masks, manifests, and scene specs.
//!
//! All text formats share the same conventions: UTF-8, one record per
//! line, blank lines and `#` comments skipped, paths resolved relative to
//! the file that names them. Writers are canonical — parsing a written
//! file reproduces the value exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use draftread_core::model::{BoundingBox, CharClass, CharacterDetection, SegmentationMask};
use draftread_core::synth::{CharSlot, CorruptionSpec, Misread, SceneSpec};

use crate::error::{CliError, CliResult};

/// Pixel value at or above which a graymap cell counts as water.
pub const WATER_THRESHOLD: u8 = 128;

// ---------------------------------------------------------------------------
// detection lists: `class x y w h confidence`
// ---------------------------------------------------------------------------

pub fn parse_detections(text: &str) -> CliResult<Vec<CharacterDetection<f64>>> {
    let mut out = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(CliError::input(format!(
                "detections line {line_no}: expected 6 fields `class x y w h confidence`, got {}",
                fields.len()
            )));
        }
        let mut chars = fields[0].chars();
        let (class_char, extra) = (chars.next(), chars.next());
        let class = match (class_char, extra) {
            (Some(c), None) => CharClass::from_char(c).map_err(|e| {
                CliError::input(format!("detections line {line_no}: field class: {e}"))
            })?,
            _ => {
                return Err(CliError::input(format!(
                    "detections line {line_no}: field class: expected a single character, got {:?}",
                    fields[0]
                )));
            }
        };
        let num = |index: usize, name: &str| -> CliResult<f64> {
            fields[index].parse::<f64>().map_err(|_| {
                CliError::input(format!(
                    "detections line {line_no}: field {name}: invalid number {:?}",
                    fields[index]
                ))
            })
        };
        let bbox = BoundingBox::new(num(1, "x")?, num(2, "y")?, num(3, "w")?, num(4, "h")?)
            .map_err(|e| CliError::input(format!("detections line {line_no}: {e}")))?;
        let detection = CharacterDetection::new(bbox, class, num(5, "confidence")?)
            .map_err(|e| CliError::input(format!("detections line {line_no}: {e}")))?;
        out.push(detection);
    }
    Ok(out)
}

pub fn write_detections(detections: &[CharacterDetection<f64>]) -> String {
    let mut out = String::new();
    for d in detections {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            d.class, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h, d.confidence
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// masks: binary portable graymap, magic P5, maxval 255, >= 128 means water
// ---------------------------------------------------------------------------

struct PgmHeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeaderReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> CliResult<&'a str> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(CliError::input(format!(
                "mask: missing {what} at byte {start}"
            )));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| CliError::input(format!("mask: non-ascii {what} at byte {start}")))
    }

    fn dimension(&mut self, what: &str) -> CliResult<u32> {
        let at = self.pos;
        let token = self.token(what)?;
        token.parse::<u32>().map_err(|_| {
            CliError::input(format!(
                "mask: {what} at byte {at}: invalid value {token:?}"
            ))
        })
    }
}

pub fn parse_mask(bytes: &[u8]) -> CliResult<SegmentationMask> {
    let mut reader = PgmHeaderReader::new(bytes);
    let magic = reader.token("magic")?;
    if magic != "P5" {
        return Err(CliError::input(format!(
            "mask: expected magic P5, found {magic:?}"
        )));
    }
    let width = reader.dimension("width")?;
    let height = reader.dimension("height")?;
    let maxval = reader.dimension("maxval")?;
    if width == 0 || height == 0 {
        return Err(CliError::input(format!(
            "mask: zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(CliError::input(format!(
            "mask: maxval must be 255, found {maxval}"
        )));
    }
    if reader.pos >= bytes.len() || !bytes[reader.pos].is_ascii_whitespace() {
        return Err(CliError::input(format!(
            "mask: expected single whitespace before pixel data at byte {}",
            reader.pos
        )));
    }
    let data = &bytes[reader.pos + 1..];
    let expected = width as usize * height as usize;
    if data.len() != expected {
        return Err(CliError::input(format!(
            "mask: pixel payload holds {} bytes, expected {expected} for {width}x{height}",
            data.len()
        )));
    }
    let cells: Vec<u8> = data
        .iter()
        .map(|&v| u8::from(v >= WATER_THRESHOLD))
        .collect();
    SegmentationMask::new(width, height, cells)
        .map_err(|e| CliError::Internal(format!("mask construction: {e}")))
}

pub fn write_mask(mask: &SegmentationMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(
        mask.cells()
            .iter()
            .map(|&c| if c == 1 { 255u8 } else { 0u8 }),
    );
    out
}

// ---------------------------------------------------------------------------
// frame manifest: `frame_id detections_path mask_path [timestamp_ms]`
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameInput {
    pub frame_id: String,
    pub detections_path: PathBuf,
    pub mask_path: PathBuf,
    pub timestamp_ms: Option<i64>,
}

pub fn parse_frames_manifest(text: &str, base: &Path) -> CliResult<Vec<FrameInput>> {
    let mut out = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(CliError::input(format!(
                "frames manifest line {line_no}: expected `frame_id detections mask [timestamp_ms]`"
            )));
        }
        let timestamp_ms = match fields.get(3) {
            None => None,
            Some(t) => Some(t.parse::<i64>().map_err(|_| {
                CliError::input(format!(
                    "frames manifest line {line_no}: field timestamp_ms: invalid value {t:?}"
                ))
            })?),
        };
        out.push(FrameInput {
            frame_id: fields[0].to_string(),
            detections_path: base.join(fields[1]),
            mask_path: base.join(fields[2]),
            timestamp_ms,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// evaluation manifest: `frame_id mask_path depth_m`
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct EvalEntry {
    pub frame_id: String,
    pub mask_path: PathBuf,
    pub depth_m: f64,
}

pub fn parse_eval_manifest(text: &str, base: &Path) -> CliResult<Vec<EvalEntry>> {
    let mut out = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CliError::input(format!(
                "eval manifest line {line_no}: expected `frame_id mask_path depth_m`"
            )));
        }
        let depth_m = fields[2].parse::<f64>().map_err(|_| {
            CliError::input(format!(
                "eval manifest line {line_no}: field depth_m: invalid value {:?}",
                fields[2]
            ))
        })?;
        if !depth_m.is_finite() {
            return Err(CliError::input(format!(
                "eval manifest line {line_no}: field depth_m: must be finite"
            )));
        }
        out.push(EvalEntry {
            frame_id: fields[0].to_string(),
            mask_path: base.join(fields[1]),
            depth_m,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// scene spec files: `key = value` lines, one block per `scene = <name>`
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureScene {
    pub name: String,
    /// Frames generated for this scene; 1 emits a single frame, more
    /// advance the wave phase across one simulated second.
    pub frames: usize,
    pub spec: SceneSpec<f64>,
}

fn default_scene_spec() -> SceneSpec<f64> {
    SceneSpec {
        seed: 0,
        ladder_top_value_dm: 80,
        scale_count: 4,
        char_height_px: 40.0,
        spacing_px: 80.0,
        image_size: (160, 400),
        true_depth_m: 7.7,
        wave_amplitude_px: 0.0,
        corruption: CorruptionSpec::none(),
    }
}

fn parse_misread(token: &str, line_no: usize) -> CliResult<(usize, Misread)> {
    let parts: Vec<&str> = token.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!(
            "scene spec line {line_no}: misread {token:?} must be `index:slot:char`"
        )));
    }
    let index = parts[0].parse::<usize>().map_err(|_| {
        CliError::input(format!(
            "scene spec line {line_no}: misread index {:?} invalid",
            parts[0]
        ))
    })?;
    let slot = match parts[1] {
        "tens" => CharSlot::Tens,
        "units" => CharSlot::Units,
        other => {
            return Err(CliError::input(format!(
                "scene spec line {line_no}: misread slot {other:?} must be tens or units"
            )));
        }
    };
    let mut chars = parts[2].chars();
    let replacement = match (chars.next(), chars.next()) {
        (Some(c), None) => CharClass::from_char(c).map_err(|e| {
            CliError::input(format!("scene spec line {line_no}: misread char: {e}"))
        })?,
        _ => {
            return Err(CliError::input(format!(
                "scene spec line {line_no}: misread char {:?} must be a single character",
                parts[2]
            )));
        }
    };
    Ok((index, Misread { slot, replacement }))
}

pub fn parse_scene_specs(text: &str) -> CliResult<Vec<FixtureScene>> {
    let mut scenes: Vec<FixtureScene> = Vec::new();
    let mut seen = BTreeMap::new();

    for (number, raw) in text.lines().enumerate() {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::input(format!(
                "scene spec line {line_no}: expected `key = value`, got {line:?}"
            )));
        };
        let key = key.trim();
        let value = value.trim();

        if key == "scene" {
            if value.is_empty() {
                return Err(CliError::input(format!(
                    "scene spec line {line_no}: scene name must not be empty"
                )));
            }
            if let Some(previous) = seen.insert(value.to_string(), line_no) {
                return Err(CliError::input(format!(
                    "scene spec line {line_no}: scene {value:?} already defined at line {previous}"
                )));
            }
            scenes.push(FixtureScene {
                name: value.to_string(),
                frames: 1,
                spec: default_scene_spec(),
            });
            continue;
        }

        let Some(scene) = scenes.last_mut() else {
            return Err(CliError::input(format!(
                "scene spec line {line_no}: {key:?} appears before any `scene = <name>`"
            )));
        };
        let bad = |what: &str| {
            CliError::input(format!(
                "scene spec line {line_no}: field {key}: invalid {what} {value:?}"
            ))
        };
        match key {
            "frames" => {
                scene.frames = value.parse().map_err(|_| bad("count"))?;
                if scene.frames == 0 {
                    return Err(CliError::input(format!(
                        "scene spec line {line_no}: frames must be >= 1"
                    )));
                }
            }
            "seed" => scene.spec.seed = value.parse().map_err(|_| bad("integer"))?,
            "ladder_top_value_dm" => {
                scene.spec.ladder_top_value_dm = value.parse().map_err(|_| bad("integer"))?;
            }
            "scale_count" => scene.spec.scale_count = value.parse().map_err(|_| bad("count"))?,
            "char_height_px" => {
                scene.spec.char_height_px = value.parse().map_err(|_| bad("number"))?;
            }
            "spacing_px" => scene.spec.spacing_px = value.parse().map_err(|_| bad("number"))?,
            "image_width" => scene.spec.image_size.0 = value.parse().map_err(|_| bad("size"))?,
            "image_height" => scene.spec.image_size.1 = value.parse().map_err(|_| bad("size"))?,
            "true_depth_m" => scene.spec.true_depth_m = value.parse().map_err(|_| bad("number"))?,
            "wave_amplitude_px" => {
                scene.spec.wave_amplitude_px = value.parse().map_err(|_| bad("number"))?;
            }
            "jitter_px" => {
                scene.spec.corruption.jitter_px = value.parse().map_err(|_| bad("number"))?;
            }
            "drop_indices" => {
                for token in value.split(',').filter(|t| !t.trim().is_empty()) {
                    scene
                        .spec
                        .corruption
                        .drop_indices
                        .insert(token.trim().parse().map_err(|_| bad("index list"))?);
                }
            }
            "misreads" => {
                for token in value.split(';').filter(|t| !t.trim().is_empty()) {
                    let (index, misread) = parse_misread(token.trim(), line_no)?;
                    scene.spec.corruption.misreads.insert(index, misread);
                }
            }
            other => {
                return Err(CliError::input(format!(
                    "scene spec line {line_no}: unknown field {other:?}"
                )));
            }
        }
    }

    if scenes.is_empty() {
        return Err(CliError::input(
            "scene spec: no `scene = <name>` block found",
        ));
    }
    Ok(scenes)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}
