//! Engine configuration from file plus flag overrides; flags win.

use draftread_core::EngineConfig;
use draftread_core::scale::SpatialRules;

use crate::error::{CliError, CliResult};

/// Partial configuration; fields left `None` fall back to the next layer
/// (flags over file over defaults).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfigOverrides {
    pub nms_threshold: Option<f64>,
    pub scale_spacing_dm: Option<i32>,
    pub char_height_m: Option<f64>,
    pub neighbor_gap_factor: Option<f64>,
    pub frame_rate: Option<u32>,
    pub printed_eq10_compat: Option<bool>,
}

impl ConfigOverrides {
    fn apply(&self, config: &mut EngineConfig<f64>) {
        if let Some(v) = self.nms_threshold {
            config.nms_threshold = v;
        }
        if let Some(v) = self.scale_spacing_dm {
            config.rules.scale_spacing_dm = v;
        }
        if let Some(v) = self.char_height_m {
            config.rules.char_height_m = v;
        }
        if let Some(v) = self.neighbor_gap_factor {
            config.rules.neighbor_gap_factor = v;
        }
        if let Some(v) = self.frame_rate {
            config.frame_rate = v;
        }
        if let Some(v) = self.printed_eq10_compat {
            config.printed_eq10_compat = v;
        }
    }
}

pub fn parse_config_file(text: &str) -> CliResult<ConfigOverrides> {
    let mut overrides = ConfigOverrides::default();
    for (number, raw) in text.lines().enumerate() {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::input(format!(
                "config line {line_no}: expected `key = value`, got {line:?}"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = || {
            CliError::input(format!(
                "config line {line_no}: field {key}: invalid value {value:?}"
            ))
        };
        match key {
            "nms_threshold" => overrides.nms_threshold = Some(value.parse().map_err(|_| bad())?),
            "scale_spacing_dm" => {
                overrides.scale_spacing_dm = Some(value.parse().map_err(|_| bad())?);
            }
            "char_height_m" => overrides.char_height_m = Some(value.parse().map_err(|_| bad())?),
            "neighbor_gap_factor" => {
                overrides.neighbor_gap_factor = Some(value.parse().map_err(|_| bad())?);
            }
            "frame_rate" => overrides.frame_rate = Some(value.parse().map_err(|_| bad())?),
            "printed_eq10_compat" => {
                overrides.printed_eq10_compat = Some(value.parse().map_err(|_| bad())?);
            }
            other => {
                return Err(CliError::input(format!(
                    "config line {line_no}: unknown field {other:?}"
                )));
            }
        }
    }
    Ok(overrides)
}

/// Defaults, then the config file, then the flags; validated at the end.
pub fn resolve_config(
    file: Option<&ConfigOverrides>,
    flags: &ConfigOverrides,
) -> CliResult<EngineConfig<f64>> {
    let mut config = EngineConfig::<f64>::default();
    if let Some(file) = file {
        file.apply(&mut config);
    }
    flags.apply(&mut config);
    config
        .validate()
        .map_err(|e| CliError::input(format!("config: {e}")))?;
    SpatialRules::new(
        config.rules.scale_spacing_dm,
        config.rules.char_height_m,
        config.rules.neighbor_gap_factor,
    )
    .map_err(|e| CliError::input(format!("config: {e}")))?;
    Ok(config)
}
