//! End-to-end stages: session streams to unit matrices and labels, matrices
//! to cross-validated scores and a cross-channel correlation summary.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{
    assemble_matrix, frame_features, gaze_features, mouse_features, unit_features,
    AssemblyReport, FeatureConfig, FeatureError, FeatureMatrix, FeatureVector, UnitVector,
};
use crate::fusion::{
    cross_channel_correlation, fuse, ChannelPipeline, CorrelationSummary, FusionError,
};
use crate::ingest::{
    cut_windows, load_manifest, parse_frames, parse_gaze, parse_mouse, unit_span, Channel,
    FrameSample, GazeEvent, IngestError, LearningUnit, MouseEvent, Session,
};
use crate::labeling::{labels_csv, lus_label, LabelWeights, LusLabel};
use crate::models::{kfold_cv, CvConfig, EvaluationReport, FitRecord, ModelError, ModelKind};
use crate::synth::{generate_unit, plan_session, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Ingest { path: String, source: IngestError },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
}

impl PipelineError {
    /// Numeric failures (degenerate matrices, undefined scores) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            PipelineError::Fusion(_)
                | PipelineError::Model(ModelError::Fusion(_))
                | PipelineError::Model(ModelError::ConstantTruth)
                | PipelineError::Model(ModelError::TooFewRows { .. })
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError {
    let path = path.display().to_string();
    move |source| PipelineError::Io { path, source }
}

pub fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// The three channel streams, each sorted by time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelStreams {
    pub gaze: Vec<GazeEvent>,
    pub mouse: Vec<MouseEvent>,
    pub frames: Vec<FrameSample>,
}

impl ChannelStreams {
    /// Stable-sorts every stream by timestamp.
    pub fn new(
        mut gaze: Vec<GazeEvent>,
        mut mouse: Vec<MouseEvent>,
        mut frames: Vec<FrameSample>,
    ) -> Self {
        gaze.sort_by_key(|e| e.timestamp);
        mouse.sort_by_key(|e| e.time);
        frames.sort_by_key(|e| e.timestamp);
        ChannelStreams {
            gaze,
            mouse,
            frames,
        }
    }
}

/// Session manifest plus parsed channel files; paths resolve against the
/// manifest's directory.
pub fn load_session(manifest_path: &Path) -> Result<(Session, ChannelStreams), PipelineError> {
    let ingest = |path: &Path| {
        let path = path.display().to_string();
        move |source| PipelineError::Ingest { path, source }
    };
    let session = load_manifest(&read_text(manifest_path)?).map_err(ingest(manifest_path))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let gaze_path = base.join(&session.channels.gaze);
    let mouse_path = base.join(&session.channels.mouse);
    let frames_path = base.join(&session.channels.frames);
    let gaze = parse_gaze(&read_text(&gaze_path)?).map_err(ingest(&gaze_path))?;
    let mouse = parse_mouse(&read_text(&mouse_path)?).map_err(ingest(&mouse_path))?;
    let frames = parse_frames(&read_text(&frames_path)?).map_err(ingest(&frames_path))?;
    Ok((
        session,
        ChannelStreams::new(gaze.events, mouse.events, frames.events),
    ))
}

/// Unit-level vectors for one unit, in `Channel::ALL` order. Each slice holds
/// only that unit's events, sorted.
pub fn featurize_unit(
    unit: &LearningUnit,
    gaze: &[GazeEvent],
    mouse: &[MouseEvent],
    frames: &[FrameSample],
    config: &FeatureConfig,
) -> Result<[FeatureVector; 3], FeatureError> {
    let interval = config.interval_ms;
    let video: Vec<FeatureVector> = cut_windows(frames, unit, interval, Channel::Video)
        .iter()
        .map(|w| frame_features(w, config))
        .collect();
    let eye: Vec<FeatureVector> = cut_windows(gaze, unit, interval, Channel::Eye)
        .iter()
        .map(|w| gaze_features(w, config))
        .collect();
    let mouse: Vec<FeatureVector> = cut_windows(mouse, unit, interval, Channel::Mouse)
        .iter()
        .map(|w| mouse_features(w, config))
        .collect();
    Ok([
        unit_features(&video)?,
        unit_features(&eye)?,
        unit_features(&mouse)?,
    ])
}

/// Per-channel unit matrices and labels sharing one row order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub matrices: Vec<(Channel, FeatureMatrix)>,
    pub assembly: Vec<(Channel, AssemblyReport)>,
    pub labels: Vec<LusLabel>,
}

impl FeatureSet {
    pub fn label_values(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.value).collect()
    }

    pub fn matrix(&self, channel: Channel) -> Option<&FeatureMatrix> {
        self.matrices
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, m)| m)
    }

    pub fn row_ids(&self) -> &[String] {
        &self.matrices[0].1.row_ids
    }

    pub fn file_name(channel: Channel) -> String {
        format!("{channel}_features.csv")
    }

    /// `{channel}_features.csv`, `labels.csv`, and `assembly.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (channel, m) in &self.matrices {
            write_text(&dir.join(Self::file_name(*channel)), &m.to_csv())?;
        }
        write_text(&dir.join("labels.csv"), &labels_csv(&self.labels))?;
        let assembly: Vec<serde_json::Value> = self
            .assembly
            .iter()
            .map(|(c, r)| serde_json::json!({ "channel": c, "report": r }))
            .collect();
        write_text(
            &dir.join("assembly.json"),
            &(serde_json::to_string_pretty(&assembly).expect("serializes") + "\n"),
        )
    }

    /// Loads whatever channel matrices exist in `dir` plus `labels.csv`,
    /// aligning labels to matrix rows by unit id.
    pub fn read_dir(dir: &Path) -> Result<FeatureSet, PipelineError> {
        let mut matrices = Vec::new();
        for channel in Channel::ALL {
            let path = dir.join(Self::file_name(channel));
            if path.exists() {
                let m = FeatureMatrix::from_csv(&read_text(&path)?)
                    .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
                matrices.push((channel, m));
            }
        }
        if matrices.is_empty() {
            return Err(PipelineError::Data(format!(
                "{}: no *_features.csv files",
                dir.display()
            )));
        }
        let labels_path = dir.join("labels.csv");
        let by_id = parse_labels(&read_text(&labels_path)?)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", labels_path.display())))?;
        let labels = matrices[0]
            .1
            .row_ids
            .iter()
            .map(|id| {
                by_id.get(id).cloned().ok_or_else(|| {
                    PipelineError::Data(format!("no label for unit {id} in labels.csv"))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(FeatureSet {
            matrices,
            assembly: Vec::new(),
            labels,
        })
    }
}

fn parse_labels(text: &str) -> Result<HashMap<String, LusLabel>, String> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let num = |j: usize| -> Result<f64, String> {
            fields
                .get(j)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| format!("line {}: bad field {j}", i + 1))
        };
        let label = LusLabel {
            unit_id: fields[0].to_string(),
            value: num(1)?,
            components: [num(2)?, num(3)?, num(4)?],
        };
        out.insert(label.unit_id.clone(), label);
    }
    Ok(out)
}

fn assemble(
    units: &[LearningUnit],
    vectors: Vec<[FeatureVector; 3]>,
    weights: &LabelWeights,
) -> Result<FeatureSet, PipelineError> {
    let mut per_channel: [Vec<UnitVector>; 3] = Default::default();
    for (unit, triple) in units.iter().zip(vectors) {
        for (slot, vector) in per_channel.iter_mut().zip(triple) {
            slot.push(UnitVector {
                unit_id: unit.unit_id.clone(),
                start: unit.start,
                vector,
            });
        }
    }
    let mut matrices = Vec::new();
    let mut assembly = Vec::new();
    for (channel, vectors) in Channel::ALL.into_iter().zip(per_channel) {
        let (m, report) = assemble_matrix(vectors)?;
        matrices.push((channel, m));
        assembly.push((channel, report));
    }
    let mut sorted: Vec<&LearningUnit> = units.iter().collect();
    sorted.sort_by_key(|u| u.start);
    let labels = sorted
        .iter()
        .map(|u| {
            lus_label(u, weights).map_err(|source| PipelineError::Ingest {
                path: u.unit_id.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(FeatureSet {
        matrices,
        assembly,
        labels,
    })
}

/// Features and labels for every unit of a loaded session.
pub fn featurize_session(
    session: &Session,
    streams: &ChannelStreams,
    config: &FeatureConfig,
    weights: &LabelWeights,
) -> Result<FeatureSet, PipelineError> {
    if config.interval_ms <= 0 {
        return Err(PipelineError::Data(format!(
            "interval must be positive, got {} ms",
            config.interval_ms
        )));
    }
    let vectors = session
        .units
        .par_iter()
        .map(|u| {
            featurize_unit(
                u,
                unit_span(&streams.gaze, u),
                unit_span(&streams.mouse, u),
                unit_span(&streams.frames, u),
                config,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    assemble(&session.units, vectors, weights)
}

/// Generates and featurizes a synthetic session unit by unit without
/// holding every stream in memory. Also returns each unit's latent.
pub fn featurize_synthetic(
    synth: &SynthConfig,
    config: &FeatureConfig,
    weights: &LabelWeights,
) -> Result<(FeatureSet, Vec<f64>), PipelineError> {
    let (_, plans) = plan_session(synth)?;
    let vectors = plans
        .par_iter()
        .enumerate()
        .map(|(i, plan)| {
            let u = generate_unit(synth, i, plan);
            featurize_unit(&plan.unit, &u.gaze, &u.mouse, &u.frames, config)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let units: Vec<LearningUnit> = plans.iter().map(|p| p.unit.clone()).collect();
    let set = assemble(&units, vectors, weights)?;
    Ok((set, plans.iter().map(|p| p.latent).collect()))
}

/// Channel pipelines fit on every row, then fused; for describing how the
/// reduced channels relate, not for scoring.
pub fn full_data_correlation(
    set: &FeatureSet,
    channels: &[Channel],
    config: &CvConfig,
) -> Result<CorrelationSummary, PipelineError> {
    let labels = set.label_values();
    let mut blocks = Vec::new();
    for &c in channels {
        let m = set
            .matrix(c)
            .ok_or_else(|| PipelineError::Data(format!("no matrix for channel {c}")))?;
        let p = ChannelPipeline::fit(c, m, &labels, &config.reduction)?;
        blocks.push((c, p.transform(m)?));
    }
    let (fused, spans) = fuse(&blocks)?;
    Ok(cross_channel_correlation(&fused, &spans)?)
}

/// What an evaluation run was asked to do; hashed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSpec {
    pub channels: Vec<Channel>,
    pub combinations: Vec<Vec<Channel>>,
    pub models: Vec<ModelKind>,
    pub cv: CvConfig,
}

impl EvaluationSpec {
    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub seed: u64,
    pub config_hash: String,
    pub spec: EvaluationSpec,
    pub report: EvaluationReport,
    /// Absent when fewer than two channels were evaluated.
    pub correlation: Option<CorrelationSummary>,
}

pub const TABLE_FILE: &str = "r2_table.csv";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const CORRELATION_PAIRS_FILE: &str = "correlation_pairs.json";

pub fn evaluate(
    set: &FeatureSet,
    spec: &EvaluationSpec,
    observer: Option<&mut dyn FnMut(&FitRecord)>,
) -> Result<Evaluation, PipelineError> {
    let labels = set.label_values();
    let report = kfold_cv(
        &set.matrices,
        &labels,
        &spec.combinations,
        &spec.models,
        &spec.cv,
        observer,
    )?;
    let correlation = if spec.channels.len() >= 2 {
        Some(full_data_correlation(set, &spec.channels, &spec.cv)?)
    } else {
        None
    };
    Ok(Evaluation {
        seed: spec.cv.seed,
        config_hash: spec.config_hash(),
        spec: spec.clone(),
        report,
        correlation,
    })
}

impl Evaluation {
    pub fn write_dir(&self, dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_text(&dir.join(TABLE_FILE), &self.report.table_csv())?;
        write_text(
            &dir.join(EVALUATION_FILE),
            &(serde_json::to_string_pretty(self).expect("serializes") + "\n"),
        )?;
        if let Some(c) = &self.correlation {
            write_text(&dir.join(CORRELATION_FILE), &c.matrix_csv())?;
            write_text(&dir.join(CORRELATION_PAIRS_FILE), &c.pairs_json())?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Evaluation, PipelineError> {
        let path = dir.join(EVALUATION_FILE);
        serde_json::from_str(&read_text(&path)?)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
    }

    /// Long-form `combination,model,fold,r2` rows for plotting.
    pub fn long_csv(&self) -> String {
        let mut out = String::from("combination,model,fold,r2\n");
        for e in &self.report.entries {
            for (f, r2) in e.fold_r2.iter().enumerate() {
                let _ = writeln!(out, "{},{},{f},{r2}", e.combination, e.model.label());
            }
        }
        out
    }

    /// Fixed-width table plus correlation and best-entry lines.
    pub fn summary_text(&self) -> String {
        let models = self.report.models();
        let mut out = format!(
            "mean R² over {} folds (seed {}, config {})\n",
            self.report.k,
            self.seed,
            &self.config_hash[..12]
        );
        let _ = write!(out, "{:<18}", "combination");
        for m in &models {
            let _ = write!(out, "{:>15}", m.label());
        }
        out.push('\n');
        for combo in self.report.combinations() {
            let _ = write!(out, "{combo:<18}");
            for &m in &models {
                match self.report.entry(&combo, m) {
                    Some(e) => {
                        let _ = write!(out, "{:>15.4}", e.mean_r2);
                    }
                    None => {
                        let _ = write!(out, "{:>15}", "-");
                    }
                }
            }
            out.push('\n');
        }
        if let Some(c) = &self.correlation {
            out.push_str("\ncross-channel |r| (mean / best-match mean / max)\n");
            for p in &c.pairs {
                let _ = writeln!(
                    out,
                    "{:<14}{:>8.4}{:>8.4}{:>8.4}",
                    format!("{}-{}", p.a, p.b),
                    p.mean_abs_r,
                    p.mean_best_abs_r,
                    p.max_abs_r
                );
            }
        }
        if let Some(best) = self.report.best() {
            let _ = writeln!(
                out,
                "\nbest: {} with {} (mean R² {:.4})",
                best.combination,
                best.model.label(),
                best.mean_r2
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let best = self.report.best();
        let doc = serde_json::json!({
            "seed": self.seed,
            "config_hash": self.config_hash,
            "k": self.report.k,
            "table": self.report.entries.iter().map(|e| serde_json::json!({
                "combination": e.combination,
                "model": e.model.label(),
                "mean_r2": e.mean_r2,
            })).collect::<Vec<_>>(),
            "pairs": self.correlation.as_ref().map(|c| &c.pairs),
            "best": best.map(|b| serde_json::json!({
                "combination": b.combination,
                "model": b.model.label(),
                "mean_r2": b.mean_r2,
            })),
        });
        serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
    }
}
