//! Deterministic vessel draft reading engine.
//!
//! Turns per-frame perception outputs — draft-scale character detections
//! plus a vessel/water segmentation mask — into a corrected scale ladder
//! and a draft depth in meters. The stages:
//!
//! 1. **geometry** – cross-class non-maximum suppression over the raw
//!    character detections.
//! 2. **scale** – glyph pairing into two-character scales, spatial-rule
//!    scoring, and correction of mistaken readings against trusted
//!    neighbors.
//! 3. **waterline** – per-column topmost-water extraction from the mask
//!    and scale-to-waterline distances.
//! 4. **depth** – adaptive depth estimation (inter-scale ratio or
//!    character height) plus one-second temporal averaging.
//! 5. **eval** – MAVD / MADDE benchmarking metrics.
//! 6. **synth** – seeded synthetic scenes with exact ground truth, used
//!    as the verification oracle.
//!
//! All continuous math is generic over [`scalar::Scalar`] (`f32` or
//! `f64`); the `*F32`/`*F64` aliases below pin the common instantiations.
//! Everything is pure and deterministic: frames may be processed in
//! parallel, and identical inputs produce identical outputs bit for bit.

pub mod config;
pub mod depth;
pub mod eval;
pub mod geometry;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod scale;
pub mod synth;
pub mod waterline;

pub use config::EngineConfig;
pub use depth::{TemporalWindow, TwoScaleForm};
pub use model::{
    BoundingBox, CharClass, CharacterDetection, DepthMethod, DepthReading, Diagnostics, DraftScale,
    FailureReason, ScaleLadder, SegmentationMask, ValidationError, WaterlineProfile,
};
pub use pipeline::{FrameOutcome, process_frame};
pub use scalar::Scalar;
pub use scale::SpatialRules;
pub use synth::{CorruptionSpec, SceneSpec, SyntheticScene};

pub type BoundingBoxF32 = BoundingBox<f32>;
pub type BoundingBoxF64 = BoundingBox<f64>;
pub type CharacterDetectionF32 = CharacterDetection<f32>;
pub type CharacterDetectionF64 = CharacterDetection<f64>;
pub type DraftScaleF32 = DraftScale<f32>;
pub type DraftScaleF64 = DraftScale<f64>;
pub type ScaleLadderF32 = ScaleLadder<f32>;
pub type ScaleLadderF64 = ScaleLadder<f64>;
pub type DepthReadingF32 = DepthReading<f32>;
pub type DepthReadingF64 = DepthReading<f64>;
pub type SpatialRulesF32 = SpatialRules<f32>;
pub type SpatialRulesF64 = SpatialRules<f64>;
pub type EngineConfigF32 = EngineConfig<f32>;
pub type EngineConfigF64 = EngineConfig<f64>;
pub type SceneSpecF32 = SceneSpec<f32>;
pub type SceneSpecF64 = SceneSpec<f64>;
