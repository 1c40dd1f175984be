//! Automatic learning-unit-state labels from mastery and the two evaluations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{IngestError, LearningUnit};

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weights must be finite and non-negative: {0:?}")]
    Negative([f64; 3]),
    #[error("weights sum to zero")]
    ZeroSum,
    #[error("expected three comma-separated weights, got {0:?}")]
    Format(String),
}

/// Convex weights over (mastery, self-evaluation, class evaluation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights")]
pub struct LabelWeights {
    w_mastery: f64,
    w_self: f64,
    w_class: f64,
}

#[derive(Deserialize)]
struct RawWeights {
    w_mastery: f64,
    w_self: f64,
    w_class: f64,
}

impl TryFrom<RawWeights> for LabelWeights {
    type Error = WeightError;
    fn try_from(raw: RawWeights) -> Result<Self, WeightError> {
        LabelWeights::new(raw.w_mastery, raw.w_self, raw.w_class)
    }
}

impl Default for LabelWeights {
    fn default() -> Self {
        LabelWeights {
            w_mastery: 0.2,
            w_self: 0.4,
            w_class: 0.4,
        }
    }
}

impl LabelWeights {
    /// Normalizes to unit sum.
    pub fn new(w_mastery: f64, w_self: f64, w_class: f64) -> Result<Self, WeightError> {
        let raw = [w_mastery, w_self, w_class];
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(WeightError::Negative(raw));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(WeightError::ZeroSum);
        }
        Ok(LabelWeights {
            w_mastery: w_mastery / sum,
            w_self: w_self / sum,
            w_class: w_class / sum,
        })
    }

    /// Parses `"m,s,c"`.
    pub fn parse(text: &str) -> Result<Self, WeightError> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| WeightError::Format(text.to_string()))?;
        match parts[..] {
            [m, s, c] => LabelWeights::new(m, s, c),
            _ => Err(WeightError::Format(text.to_string())),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_mastery, self.w_self, self.w_class]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LusLabel {
    pub unit_id: String,
    pub value: f64,
    /// Normalized mastery, self-evaluation, class evaluation.
    pub components: [f64; 3],
}

pub fn normalized_components(unit: &LearningUnit) -> [f64; 3] {
    [
        unit.mastery / 100.0,
        (unit.self_eval - 10.0) / 90.0,
        unit.class_eval / 100.0,
    ]
}

pub fn lus_label(unit: &LearningUnit, weights: &LabelWeights) -> Result<LusLabel, IngestError> {
    unit.validate()?;
    let components = normalized_components(unit);
    let value: f64 = components
        .iter()
        .zip(weights.as_array())
        .map(|(c, w)| c * w)
        .sum();
    Ok(LusLabel {
        unit_id: unit.unit_id.clone(),
        value: value.clamp(0.0, 1.0),
        components,
    })
}

pub fn labels_csv(labels: &[LusLabel]) -> String {
    let mut out = String::from("unit_id,lus,mastery_norm,self_norm,class_norm\n");
    for l in labels {
        let [m, s, c] = l.components;
        let _ = writeln!(out, "{},{},{m},{s},{c}", l.unit_id, l.value);
    }
    out
}
