//! Tree regressors, R² scoring, and the k-fold evaluation harness.

mod cart;
mod cv;
mod forest;
mod gbdt;
mod metrics;
mod serialize;

pub use cart::{cart_fit, CartParams, SplitChoice, TreeNode};
pub use cv::{
    combination_name, fold_assignment, kfold_cv, standard_combinations, CvConfig,
    EvaluationEntry, EvaluationReport, FitRecord, RetainedDims,
};
pub use forest::{forest_fit, ForestModel, ForestParams};
pub use gbdt::{gbdt_fit, GbdtModel, GbdtParams};
pub use metrics::r2_score;
pub use serialize::{deserialize_model, serialize_model, MODEL_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::fusion::FusionError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("non-finite target value")]
    NonFiniteTarget,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("R² is undefined for a constant truth vector")]
    ConstantTruth,
    #[error("{rows} rows, need at least {min}")]
    TooFewRows { rows: usize, min: usize },
    #[error("model schema violation: {0}")]
    SchemaViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cart,
    RandomForest,
    Gbdt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Cart, ModelKind::RandomForest, ModelKind::Gbdt];

    /// Column header used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Cart => "CART",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::Gbdt => "GBDT",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "cart" => Some(ModelKind::Cart),
            "rf" | "forest" | "random_forest" => Some(ModelKind::RandomForest),
            "gbdt" | "gbm" | "boosting" => Some(ModelKind::Gbdt),
            _ => None,
        }
    }
}

/// Hyperparameters for all three model families.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub cart: CartParams,
    pub forest: ForestParams,
    pub gbdt: GbdtParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Cart { tree: TreeNode },
    RandomForest(ForestModel),
    Gbdt(GbdtModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Cart { .. } => ModelKind::Cart,
            Model::RandomForest(_) => ModelKind::RandomForest,
            Model::Gbdt(_) => ModelKind::Gbdt,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        match self {
            Model::Cart { tree } => tree.predict(x),
            Model::RandomForest(f) => f.predict(x),
            Model::Gbdt(g) => g.predict(x),
        }
    }

    pub fn predict_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        (0..x.n_rows()).map(|r| self.predict(x.row(r))).collect()
    }
}

/// Fits one model family; `seed` only matters for the forest.
pub fn fit_model(
    kind: ModelKind,
    config: &ModelConfig,
    x: &FeatureMatrix,
    y: &[f64],
    seed: u64,
) -> Result<Model, ModelError> {
    Ok(match kind {
        ModelKind::Cart => Model::Cart {
            tree: cart_fit(x, y, &config.cart)?,
        },
        ModelKind::RandomForest => Model::RandomForest(forest_fit(x, y, &config.forest, seed)?),
        ModelKind::Gbdt => Model::Gbdt(gbdt_fit(x, y, &config.gbdt)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names() {
        for kind in ModelKind::ALL {
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(ModelKind::parse(json.trim_matches('"')), Some(kind));
        }
        assert_eq!(ModelKind::parse("Random Forest"), Some(ModelKind::RandomForest));
        assert_eq!(ModelKind::parse("svm"), None);
    }
}
