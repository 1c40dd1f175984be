//! Per-window feature extraction and unit-level aggregation.
//!
//! Every channel is turned into a handful of base series (positions, step
//! lengths, speeds, pose angles, emotion scores). Each base series gets the
//! same general battery: [`stats`] on the raw event-derived values, plus
//! [`wavelet`] and [`fourier`] features on a uniformly resampled copy. Window
//! vectors are then summarized per learning unit by mean and spread, and the
//! units stacked into a [`FeatureMatrix`].

pub mod aggregate;
pub mod channel;
pub mod fourier;
pub mod stats;
pub mod subjective;
pub mod wavelet;

mod matrix;

pub use aggregate::{assemble_matrix, unit_features, AssemblyReport, UnitVector};
pub use channel::{
    channel_feature_names, frame_features, gaze_features, mouse_features, FeatureConfig,
};
pub use fourier::{fourier_features, power_spectrum};
pub use matrix::FeatureMatrix;
pub use stats::stat_features;
pub use subjective::gaze_subjective;
pub use wavelet::{haar_dwt, haar_dwt_levels, wavelet_features, HaarPyramid};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("empty series")]
    EmptySeries,
    #[error("series of length {len} is shorter than {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("no windows to aggregate")]
    NoWindows,
    #[error("feature name lists differ ({0})")]
    InconsistentNames(String),
    #[error("feature matrix: {0}")]
    Format(String),
}

/// Named feature values; `None` marks a value that could not be computed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<Option<f64>>,
}

impl FeatureVector {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Option<f64>)>) -> Self {
        let (names, values) = pairs.into_iter().unzip();
        FeatureVector { names, values }
    }

    /// Every name present, every value missing.
    pub fn missing(names: Vec<String>) -> Self {
        let values = vec![None; names.len()];
        FeatureVector { names, values }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Option<f64>) {
        self.names.push(name.into());
        self.values.push(value);
    }

    /// Appends `other` with every name prefixed by `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: FeatureVector) {
        for (name, value) in other.names.into_iter().zip(other.values) {
            self.names.push(format!("{prefix}.{name}"));
            self.values.push(value);
        }
    }

    pub fn get(&self, name: &str) -> Option<Option<f64>> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}
