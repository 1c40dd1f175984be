//! Per-channel filter, standardize, and reduce; then feature-level fusion.
//!
//! Each channel's unit-level matrix passes through its own
//! [`ChannelPipeline`]: a correlation significance screen against the
//! labels, standardization, and PCA down to the smallest number of
//! components that keeps the configured share of variance. The reduced
//! blocks are concatenated in (video, eye, mouse) order by [`fuse`].

mod correlation;
mod filter;
mod pca;
mod scaler;

pub use correlation::{cross_channel_correlation, CorrelationSummary, PairSummary};
pub use filter::{correlation_p_value, hypothesis_filter, pearson, FilterMask};
pub use pca::PcaModel;
pub use scaler::Scaler;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureError, FeatureMatrix};
use crate::ingest::Channel;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("{rows} rows, need at least {min}")]
    TooFewRows { rows: usize, min: usize },
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(String),
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row ids differ between channels ({0})")]
    RowMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Matrix(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub alpha: f64,
    pub retention: f64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            alpha: 0.05,
            retention: 0.95,
        }
    }
}

/// Fitted filter, scaler, and PCA for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPipeline {
    pub channel: Channel,
    pub mask: FilterMask,
    pub scaler: Scaler,
    pub pca: PcaModel,
}

/// A step that learns state from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStage {
    Filter,
    Scaler,
    Pca,
    Model,
}

impl ChannelPipeline {
    /// Fits every stage on `matrix` (training rows only) against `labels`.
    pub fn fit(
        channel: Channel,
        matrix: &FeatureMatrix,
        labels: &[f64],
        config: &ReductionConfig,
    ) -> Result<ChannelPipeline, FusionError> {
        Self::fit_audited(channel, matrix, labels, config, &mut |_, _| {})
    }

    /// Like [`fit`](Self::fit), reporting the row ids each stage learns from.
    pub fn fit_audited(
        channel: Channel,
        matrix: &FeatureMatrix,
        labels: &[f64],
        config: &ReductionConfig,
        audit: &mut dyn FnMut(FitStage, &[String]),
    ) -> Result<ChannelPipeline, FusionError> {
        audit(FitStage::Filter, &matrix.row_ids);
        let mask = hypothesis_filter(matrix, labels, config.alpha)?;
        let filtered = mask.apply(matrix)?;
        audit(FitStage::Scaler, &filtered.row_ids);
        let scaler = Scaler::fit(&filtered)?;
        let scaled = scaler.apply(&filtered)?;
        audit(FitStage::Pca, &scaled.row_ids);
        let pca = PcaModel::fit(&scaled, config.retention)?;
        Ok(ChannelPipeline {
            channel,
            mask,
            scaler,
            pca,
        })
    }

    /// Reduces `matrix` to `k` component columns without touching fitted state.
    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FusionError> {
        let filtered = self.mask.apply(matrix)?;
        let scaled = self.scaler.apply(&filtered)?;
        self.pca.transform(&scaled)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline serializes")
    }
}

/// Concatenates per-channel blocks column-wise in channel order, prefixing
/// each column with its channel id. Returns the fused matrix and each
/// channel's column span.
pub fn fuse(
    blocks: &[(Channel, FeatureMatrix)],
) -> Result<(FeatureMatrix, Vec<(Channel, Range<usize>)>), FusionError> {
    let mut ordered: Vec<&(Channel, FeatureMatrix)> = blocks.iter().collect();
    ordered.sort_by_key(|(c, _)| *c);
    let Some((_, first)) = ordered.first() else {
        return Err(FusionError::InvalidParameter("no channels to fuse".into()));
    };
    for (channel, m) in &ordered {
        if m.row_ids != first.row_ids {
            return Err(FusionError::RowMismatch(channel.to_string()));
        }
    }
    let n = first.n_rows();
    let width: usize = ordered.iter().map(|(_, m)| m.n_cols()).sum();
    let mut columns = Vec::with_capacity(width);
    let mut spans = Vec::with_capacity(ordered.len());
    for (channel, m) in &ordered {
        let start = columns.len();
        columns.extend(m.columns.iter().map(|c| format!("{channel}.{c}")));
        spans.push((*channel, start..columns.len()));
    }
    let mut data = Vec::with_capacity(n * width);
    for r in 0..n {
        for (_, m) in &ordered {
            data.extend_from_slice(m.row(r));
        }
    }
    Ok((
        FeatureMatrix::new(first.row_ids.clone(), columns, data)?,
        spans,
    ))
}
