use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use draftread_cli::commands::{run_eval, run_read, run_synth};
use draftread_cli::config_file::{ConfigOverrides, parse_config_file, resolve_config};
use draftread_cli::error::{CliError, CliResult};
use draftread_cli::formats::read_text;
use draftread_cli::records::OutputFormat;

#[derive(Parser)]
#[command(
    name = "draftread",
    version,
    about = "Vessel draft reading from detection and segmentation outputs",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Process a frame manifest into per-frame depth records.
    Read {
        /// Manifest: one `frame_id detections_path mask_path [timestamp_ms]` per line.
        #[arg(long)]
        frames: PathBuf,
        /// Configuration file (`key = value`); flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write records here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Kv)]
        format: OutputFormat,
        #[arg(long)]
        nms_threshold: Option<f64>,
        #[arg(long)]
        scale_spacing_dm: Option<i32>,
        #[arg(long)]
        char_height_m: Option<f64>,
        #[arg(long)]
        neighbor_gap_factor: Option<f64>,
        #[arg(long)]
        frame_rate: Option<u32>,
        /// Use the ratio-only two-scale formula (no anchor term).
        #[arg(long, num_args(0..=1), default_missing_value = "true")]
        printed_eq10_compat: Option<bool>,
    },
    /// Score predictions against labels (MAVD and MADDE).
    Eval {
        /// Prediction manifest: `frame_id mask_path depth_m` per line.
        #[arg(long)]
        pred: PathBuf,
        /// Label manifest in the same format.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Kv)]
        format: OutputFormat,
    },
    /// Generate synthetic fixture scenes from a scene spec file.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for detections, masks, truth, and manifests.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the program version.
    Version,
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("cannot write to stdout: {e}"))),
    }
}

fn run() -> CliResult<()> {
    let cli = Cli::try_parse().map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            print!("{e}");
            std::process::exit(0);
        }
        _ => CliError::input(e.to_string()),
    })?;

    match cli.command {
        Command::Read {
            frames,
            config,
            output,
            format,
            nms_threshold,
            scale_spacing_dm,
            char_height_m,
            neighbor_gap_factor,
            frame_rate,
            printed_eq10_compat,
        } => {
            let file_overrides = match &config {
                Some(path) => Some(parse_config_file(&read_text(path)?)?),
                None => None,
            };
            let flag_overrides = ConfigOverrides {
                nms_threshold,
                scale_spacing_dm,
                char_height_m,
                neighbor_gap_factor,
                frame_rate,
                printed_eq10_compat,
            };
            let engine_config = resolve_config(file_overrides.as_ref(), &flag_overrides)?;
            let text = run_read(&frames, &engine_config, format)?;
            emit(&text, output.as_ref())
        }
        Command::Eval {
            pred,
            labels,
            output,
            format,
        } => {
            let text = run_eval(&pred, &labels, format)?;
            emit(&text, output.as_ref())
        }
        Command::Synth { spec, out } => {
            let text = run_synth(&spec, &out)?;
            emit(&text, None)
        }
        Command::Version => emit(&format!("draftread {}\n", env!("CARGO_PKG_VERSION")), None),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(error.exit_code());
        }
    }
}
