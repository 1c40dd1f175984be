//! Command-line front end: `synth`, `featurize`, `evaluate`, `report`.
//!
//! Precedence for every setting: flag, then `FUSELEARN_*` environment
//! variable, then `--config` file, then built-in default.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::features::FeatureConfig;
use crate::ingest::{Channel, Millis};
use crate::labeling::LabelWeights;
use crate::models::{standard_combinations, CvConfig, ModelKind};
use crate::pipeline::{
    evaluate, featurize_session, load_session, read_text, write_text, Evaluation,
    EvaluationSpec, FeatureSet, PipelineError,
};
use crate::synth::{write_session, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fuselearn", version, about = "Multi-channel feature fusion for learning-unit-state regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic session directory.
    Synth {
        /// Synth config JSON; defaults apply to missing fields.
        #[arg(long, env = "FUSELEARN_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, env = "FUSELEARN_OUT")]
        out: PathBuf,
        #[arg(long, env = "FUSELEARN_SEED")]
        seed: Option<u64>,
        /// Number of learning units.
        #[arg(long, env = "FUSELEARN_UNITS")]
        units: Option<usize>,
    },
    /// Extract per-channel unit feature matrices and labels from a session.
    Featurize {
        /// Session manifest JSON; channel paths resolve next to it.
        manifest: PathBuf,
        #[arg(long, env = "FUSELEARN_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, env = "FUSELEARN_OUT")]
        out: PathBuf,
        /// Window length, e.g. `60s`, `1m`, `500ms` (bare numbers are ms).
        #[arg(long, env = "FUSELEARN_INTERVAL", value_parser = parse_interval)]
        interval: Option<Millis>,
        /// Resampling rates, e.g. `gaze=30,mouse=20,frames=15`.
        #[arg(long, env = "FUSELEARN_RATES")]
        rates: Option<String>,
        /// Label weights `mastery,self,class`.
        #[arg(long, env = "FUSELEARN_WEIGHTS")]
        weights: Option<String>,
    },
    /// Cross-validate channel combinations and models on a feature directory.
    Evaluate {
        /// Directory written by `featurize`.
        features: PathBuf,
        #[arg(long, env = "FUSELEARN_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, env = "FUSELEARN_OUT")]
        out: PathBuf,
        /// Comma-separated subset of `video,eye,mouse`.
        #[arg(long, env = "FUSELEARN_CHANNELS")]
        channels: Option<String>,
        /// Comma-separated subset of `cart,rf,gbdt`.
        #[arg(long, env = "FUSELEARN_MODELS")]
        models: Option<String>,
        #[arg(long, env = "FUSELEARN_K")]
        k: Option<usize>,
        #[arg(long, env = "FUSELEARN_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "FUSELEARN_ALPHA")]
        alpha: Option<f64>,
        #[arg(long, env = "FUSELEARN_RETENTION")]
        retention: Option<f64>,
    },
    /// Summarize an evaluation directory.
    Report {
        dir: PathBuf,
        /// Machine-readable output instead of the text table.
        #[arg(long, env = "FUSELEARN_FORMAT")]
        format: Option<Format>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Settings file shared by `featurize` and `evaluate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub features: Option<FeatureConfig>,
    pub weights: Option<LabelWeights>,
    pub cv: Option<CvConfig>,
    pub channels: Option<Vec<Channel>>,
    pub models: Option<Vec<ModelKind>>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Pipeline(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Pipeline(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Pipeline(e) => write!(f, "{e}"),
        }
    }
}

pub fn parse_interval(text: &str) -> Result<Millis, String> {
    let t = text.trim();
    let (number, scale) = if let Some(v) = t.strip_suffix("ms") {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix('s') {
        (v, 1000.0)
    } else if let Some(v) = t.strip_suffix('m') {
        (v, 60_000.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("bad interval {text:?}"))?;
    let ms = (value * scale).round();
    if !(ms >= 1.0 && ms.is_finite()) {
        return Err(format!("interval {text:?} must be at least 1 ms"));
    }
    Ok(ms as Millis)
}

fn apply_rates(config: &mut FeatureConfig, text: &str) -> Result<(), CliError> {
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("rate {part:?} is not name=hz")))?;
        let channel = Channel::parse(name)
            .ok_or_else(|| CliError::Usage(format!("unknown channel {name:?}")))?;
        let hz: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| *v > 0.0 && v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("bad rate {value:?}")))?;
        match channel {
            Channel::Video => config.frames_rate_hz = hz,
            Channel::Eye => config.gaze_rate_hz = hz,
            Channel::Mouse => config.mouse_rate_hz = hz,
        }
    }
    Ok(())
}

fn parse_list<T>(text: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse(p).ok_or_else(|| CliError::Usage(format!("unknown {what} {p:?}"))))
        .collect()
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Pipeline(PipelineError::Data(format!("{}: {e}", path.display()))))
}

fn cmd_synth(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    units: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut synth: SynthConfig = match config {
        Some(path) => read_config(path)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        synth.seed = s;
    }
    if let Some(n) = units {
        synth.n_units = n;
    }
    let session = write_session(&synth, out).map_err(PipelineError::from)?;
    let _ = writeln!(
        stdout,
        "wrote {} units (seed {}) to {}",
        session.units.len(),
        synth.seed,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_featurize(
    manifest: &Path,
    config: Option<&Path>,
    out: &Path,
    interval: Option<Millis>,
    rates: Option<&str>,
    weights: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let file: PipelineConfig = match config {
        Some(path) => read_config(path)?,
        None => PipelineConfig::default(),
    };
    let mut features = file.features.unwrap_or_default();
    if let Some(ms) = interval {
        features.interval_ms = ms;
    }
    if let Some(r) = rates {
        apply_rates(&mut features, r)?;
    }
    let weights = match weights {
        Some(w) => LabelWeights::parse(w).map_err(|e| CliError::Usage(e.to_string()))?,
        None => file.weights.unwrap_or_default(),
    };
    let (session, streams) = load_session(manifest)?;
    let set = featurize_session(&session, &streams, &features, &weights)?;
    set.write_dir(out)?;
    let windows: i64 = session
        .units
        .iter()
        .map(|u| (u.duration() + features.interval_ms - 1) / features.interval_ms)
        .sum();
    let meta = serde_json::json!({
        "features": features,
        "weights": weights,
        "n_units": session.units.len(),
        "windows_per_channel": windows,
        "columns": set.matrices.iter().map(|(c, m)| (c.to_string(), m.n_cols())).collect::<std::collections::BTreeMap<_, _>>(),
    });
    write_text(
        &out.join("featurize.json"),
        &(serde_json::to_string_pretty(&meta).expect("serializes") + "\n"),
    )?;
    let _ = writeln!(
        stdout,
        "featurized {} units, {} windows per channel, into {}",
        session.units.len(),
        windows,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    features: &Path,
    config: Option<&Path>,
    out: &Path,
    channels: Option<&str>,
    models: Option<&str>,
    k: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
    retention: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let file: PipelineConfig = match config {
        Some(path) => read_config(path)?,
        None => PipelineConfig::default(),
    };
    let mut cv = file.cv.unwrap_or_default();
    if let Some(k) = k {
        cv.k = k;
    }
    if let Some(s) = seed {
        cv.seed = s;
    }
    if let Some(a) = alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(CliError::Usage(format!("--alpha {a} outside (0, 1)")));
        }
        cv.reduction.alpha = a;
    }
    if let Some(r) = retention {
        if !(r > 0.0 && r <= 1.0) {
            return Err(CliError::Usage(format!("--retention {r} outside (0, 1]")));
        }
        cv.reduction.retention = r;
    }
    let set = FeatureSet::read_dir(features)?;
    let available: Vec<Channel> = set.matrices.iter().map(|(c, _)| *c).collect();
    let mut channels = match channels {
        Some(text) => parse_list(text, Channel::parse, "channel")?,
        None => file.channels.unwrap_or_else(|| available.clone()),
    };
    channels.sort();
    channels.dedup();
    if let Some(missing) = channels.iter().find(|c| !available.contains(c)) {
        return Err(CliError::Pipeline(PipelineError::Data(format!(
            "{}: no features for channel {missing}",
            features.display()
        ))));
    }
    let models = match models {
        Some(text) => parse_list(text, ModelKind::parse, "model")?,
        None => file.models.unwrap_or_else(|| ModelKind::ALL.to_vec()),
    };
    if channels.is_empty() || models.is_empty() {
        return Err(CliError::Usage("need at least one channel and one model".into()));
    }
    let spec = EvaluationSpec {
        combinations: standard_combinations(&channels),
        channels,
        models,
        cv,
    };
    let evaluation = evaluate(&set, &spec, None)?;
    evaluation.write_dir(out)?;
    let _ = write!(stdout, "{}", evaluation.report.table_csv());
    Ok(())
}

fn cmd_report(dir: &Path, format: Option<Format>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let evaluation = Evaluation::read_dir(dir)?;
    let text = match format {
        None => evaluation.summary_text(),
        Some(Format::Csv) => evaluation.long_csv(),
        Some(Format::Json) => evaluation.summary_json(),
    };
    let _ = write!(stdout, "{text}");
    Ok(())
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Synth {
            config,
            out,
            seed,
            units,
        } => cmd_synth(config.as_deref(), &out, seed, units, stdout),
        Command::Featurize {
            manifest,
            config,
            out,
            interval,
            rates,
            weights,
        } => cmd_featurize(
            &manifest,
            config.as_deref(),
            &out,
            interval,
            rates.as_deref(),
            weights.as_deref(),
            stdout,
        ),
        Command::Evaluate {
            features,
            config,
            out,
            channels,
            models,
            k,
            seed,
            alpha,
            retention,
        } => cmd_evaluate(
            &features,
            config.as_deref(),
            &out,
            channels.as_deref(),
            models.as_deref(),
            k,
            seed,
            alpha,
            retention,
            stdout,
        ),
        Command::Report { dir, format } => cmd_report(&dir, format, stdout),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        assert_eq!(parse_interval("30s"), Ok(30_000));
        assert_eq!(parse_interval("1m"), Ok(60_000));
        assert_eq!(parse_interval("1.5m"), Ok(90_000));
        assert_eq!(parse_interval("250ms"), Ok(250));
        assert_eq!(parse_interval("4000"), Ok(4000));
        assert!(parse_interval("0s").is_err());
        assert!(parse_interval("soon").is_err());
    }

    #[test]
    fn rates() {
        let mut c = FeatureConfig::default();
        apply_rates(&mut c, "eye=60, frames=10").unwrap();
        assert_eq!((c.gaze_rate_hz, c.mouse_rate_hz, c.frames_rate_hz), (60.0, 20.0, 10.0));
        assert!(apply_rates(&mut c, "gaze:30").is_err());
        assert!(apply_rates(&mut c, "keyboard=3").is_err());
        assert!(apply_rates(&mut c, "mouse=-1").is_err());
    }

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["fuselearn"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fuselearn", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["fuselearn", "report", "x", "--format", "xml"]).0, EXIT_USAGE);
        let (code, out, _) = run_capture(&["fuselearn", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("featurize"));
    }

    #[test]
    fn missing_config_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.json");
        let out = dir.path().join("data");
        let (code, _, err) = run_capture(&[
            "fuselearn",
            "synth",
            "--config",
            missing.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("nope.json"), "{err}");
    }

    #[test]
    fn empty_report_dir_fails() {
        let dir = tempfile::tempdir().unwrap();
        let (code, _, err) = run_capture(&["fuselearn", "report", dir.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("evaluation.json"));
    }
}
