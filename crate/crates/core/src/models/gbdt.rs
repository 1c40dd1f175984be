use serde::{Deserialize, Serialize};

use super::cart::{check_inputs, grow_tree, Presorted};
use super::{CartParams, ModelError, TreeNode};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub tree: CartParams,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_trees: 200,
            learning_rate: 0.1,
            tree: CartParams {
                max_depth: 3,
                ..CartParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<TreeNode>,
    /// Training MSE after 0, 1, ..., T rounds.
    pub train_mse: Vec<f64>,
}

impl GbdtModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        let mut sum = 0.0;
        for t in &self.trees {
            sum += t.predict(x)?;
        }
        Ok(self.base + self.learning_rate * sum)
    }
}

fn mse(y: &[f64], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
}

/// Squared-loss gradient boosting: each round fits a tree to the current residuals.
pub fn gbdt_fit(x: &FeatureMatrix, y: &[f64], params: &GbdtParams) -> Result<GbdtModel, ModelError> {
    let n = x.n_rows();
    if n < 2 {
        return Err(if n == 0 {
            ModelError::EmptyTrainingSet
        } else {
            ModelError::TooFewRows { rows: n, min: 2 }
        });
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(ModelError::InvalidParameter(format!(
            "learning_rate = {}",
            params.learning_rate
        )));
    }
    check_inputs(x, y)?;
    params.tree.validate()?;
    let base = y.iter().sum::<f64>() / n as f64;
    let mut fitted = vec![base; n];
    let mut train_mse = vec![mse(y, &fitted)];
    let pre = Presorted::new(x);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let tree = grow_tree(&pre, &residuals, &params.tree, None);
        for (r, f) in fitted.iter_mut().enumerate() {
            *f += params.learning_rate * tree.predict(x.row(r))?;
        }
        train_mse.push(mse(y, &fitted));
        trees.push(tree);
    }
    Ok(GbdtModel {
        base,
        learning_rate: params.learning_rate,
        trees,
        train_mse,
    })
}
