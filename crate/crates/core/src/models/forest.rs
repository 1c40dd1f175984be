use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cart::{check_inputs, grow_tree, FeatureSampler, Presorted};
use super::{CartParams, ModelError, TreeNode};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: CartParams,
    /// Draw `n` rows with replacement per tree; off means every tree sees all rows.
    pub bootstrap: bool,
    /// Features tried per split; `None` means `max(1, p / 3)`.
    pub feature_subsample: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: CartParams::default(),
            bootstrap: true,
            feature_subsample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    /// Tree `i` drew from ChaCha8 seeded with `seed`, stream `i`.
    pub seed: u64,
    pub feature_subsample: usize,
    pub bootstrap: bool,
    pub trees: Vec<TreeNode>,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        if self.trees.is_empty() {
            return Err(ModelError::InvalidParameter("forest has no trees".into()));
        }
        let mut sum = 0.0;
        for t in &self.trees {
            sum += t.predict(x)?;
        }
        Ok(sum / self.trees.len() as f64)
    }
}

/// The random source for tree `index`: ChaCha8 keyed by `seed` on stream `index`.
pub(crate) fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bagged CART ensemble. Trees are grown in parallel, each from its own
/// PRNG stream, so the result does not depend on scheduling.
pub fn forest_fit(
    x: &FeatureMatrix,
    y: &[f64],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    let n = x.n_rows();
    if n < 2 {
        return Err(if n == 0 {
            ModelError::EmptyTrainingSet
        } else {
            ModelError::TooFewRows { rows: n, min: 2 }
        });
    }
    check_inputs(x, y)?;
    params.tree.validate()?;
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParameter("n_trees = 0".into()));
    }
    let p = x.n_cols();
    let m = params
        .feature_subsample
        .unwrap_or((p / 3).max(1))
        .clamp(1, p.max(1));
    let full = Presorted::new(x);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(seed, i);
            let sampler_tree = |pre: &Presorted, targets: &[f64], rng: &mut ChaCha8Rng| {
                let sampler = FeatureSampler { rng, m };
                grow_tree(pre, targets, &params.tree, Some(sampler))
            };
            if params.bootstrap {
                let rows: Vec<usize> =
                    (0..n).map(|_| (rng.next_u64() % n as u64) as usize).collect();
                let targets: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
                sampler_tree(&full.resample(&rows), &targets, &mut rng)
            } else {
                sampler_tree(&full, y, &mut rng)
            }
        })
        .collect();
    Ok(ForestModel {
        seed,
        feature_subsample: m,
        bootstrap: params.bootstrap,
        trees,
    })
}
