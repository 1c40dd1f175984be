//! k-fold cross-validation over channel combinations and model families.
//!
//! Fold assignment: rows are shuffled with ChaCha8 seeded by `seed`
//! (Fisher-Yates from the last index down, `j = next_u64() % (i + 1)`),
//! then cut into `k` contiguous folds; the first `n % k` folds get one
//! extra row. Every fold fits its own channel pipelines and models on the
//! remaining rows only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_model, r2_score, ModelConfig, ModelError, ModelKind};
use crate::features::FeatureMatrix;
use crate::fusion::{fuse, ChannelPipeline, FitStage, FusionError, ReductionConfig};
use crate::ingest::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub reduction: ReductionConfig,
    pub models: ModelConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: 0,
            reduction: ReductionConfig::default(),
            models: ModelConfig::default(),
        }
    }
}

/// One fit performed inside a fold, with the rows it learned from.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub fold: usize,
    /// Channel id for pipeline stages, `"{combination}/{model}"` for model fits.
    pub scope: String,
    pub stage: FitStage,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub combination: String,
    pub channels: Vec<Channel>,
    pub model: ModelKind,
    pub fold_r2: Vec<f64>,
    pub mean_r2: f64,
}

/// Per-channel dimensions kept in each fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedDims {
    pub channel: Channel,
    pub input_features: usize,
    pub kept_features: Vec<usize>,
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: u64,
    pub k: usize,
    pub n_rows: usize,
    /// Row ids of each test fold.
    pub folds: Vec<Vec<String>>,
    pub retained: Vec<RetainedDims>,
    pub entries: Vec<EvaluationEntry>,
}

/// `video+eye`-style name with channels in fusion order.
pub fn combination_name(channels: &[Channel]) -> String {
    let mut sorted = channels.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("+")
}

/// Singles, then pairs, then the triple, restricted to `available`.
pub fn standard_combinations(available: &[Channel]) -> Vec<Vec<Channel>> {
    use Channel::*;
    let all = [
        vec![Video],
        vec![Eye],
        vec![Mouse],
        vec![Video, Eye],
        vec![Eye, Mouse],
        vec![Video, Mouse],
        vec![Video, Eye, Mouse],
    ];
    all.into_iter()
        .filter(|combo| combo.iter().all(|c| available.contains(c)))
        .collect()
}

/// Test-fold row indices for `n` rows.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, ModelError> {
    if k < 2 {
        return Err(ModelError::InvalidParameter(format!("k = {k}")));
    }
    if n < k {
        return Err(ModelError::TooFewRows { rows: n, min: k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn model_seed(seed: u64, fold: usize, combo: usize, kind: ModelKind) -> u64 {
    [fold as u64, combo as u64, kind as u64]
        .iter()
        .fold(splitmix(seed), |acc, v| splitmix(acc ^ v))
}

struct FoldOutcome {
    /// `(combination index, model index) -> R²`.
    scores: Vec<Vec<f64>>,
    dims: Vec<(usize, usize, usize)>,
    records: Vec<FitRecord>,
}

fn run_fold(
    fold: usize,
    test: &[usize],
    channels: &[(Channel, FeatureMatrix)],
    labels: &[f64],
    needed: &[Channel],
    combos: &[Vec<Channel>],
    kinds: &[ModelKind],
    config: &CvConfig,
) -> Result<FoldOutcome, ModelError> {
    let n = labels.len();
    let mut is_test = vec![false; n];
    for &r in test {
        is_test[r] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&r| !is_test[r]).collect();
    let y_train: Vec<f64> = train.iter().map(|&r| labels[r]).collect();
    let y_test: Vec<f64> = test.iter().map(|&r| labels[r]).collect();

    let mut records = Vec::new();
    let mut reduced: BTreeMap<Channel, (FeatureMatrix, FeatureMatrix)> = BTreeMap::new();
    let mut dims = Vec::new();
    for &channel in needed {
        let (_, matrix) = channels
            .iter()
            .find(|(c, _)| *c == channel)
            .expect("needed channels are present");
        let train_m = matrix.select_rows(&train);
        let test_m = matrix.select_rows(test);
        let scope = channel.to_string();
        let pipeline = ChannelPipeline::fit_audited(
            channel,
            &train_m,
            &y_train,
            &config.reduction,
            &mut |stage, rows| {
                records.push(FitRecord {
                    fold,
                    scope: scope.clone(),
                    stage,
                    rows: rows.to_vec(),
                })
            },
        )?;
        dims.push((
            matrix.n_cols(),
            pipeline.mask.kept.len(),
            pipeline.pca.k(),
        ));
        reduced.insert(
            channel,
            (pipeline.transform(&train_m)?, pipeline.transform(&test_m)?),
        );
    }

    let mut scores = Vec::with_capacity(combos.len());
    for (ci, combo) in combos.iter().enumerate() {
        let pick = |test_side: bool| -> Result<FeatureMatrix, FusionError> {
            let blocks: Vec<(Channel, FeatureMatrix)> = combo
                .iter()
                .map(|c| {
                    let (tr, te) = &reduced[c];
                    (*c, if test_side { te.clone() } else { tr.clone() })
                })
                .collect();
            Ok(fuse(&blocks)?.0)
        };
        let x_train = pick(false)?;
        let x_test = pick(true)?;
        let mut row = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            records.push(FitRecord {
                fold,
                scope: format!("{}/{}", combination_name(combo), kind.label()),
                stage: FitStage::Model,
                rows: x_train.row_ids.clone(),
            });
            let model = fit_model(
                kind,
                &config.models,
                &x_train,
                &y_train,
                model_seed(config.seed, fold, ci, kind),
            )?;
            let predictions = model.predict_matrix(&x_test)?;
            row.push(r2_score(&y_test, &predictions)?);
        }
        scores.push(row);
    }
    Ok(FoldOutcome {
        scores,
        dims,
        records,
    })
}

/// Cross-validates every combination in `combos` with every model in `kinds`.
///
/// `channels` holds one unit-level matrix per channel, all with the same row
/// ids in the same order as `labels`. `observer` receives every fit, in fold
/// order, after all folds finish.
pub fn kfold_cv(
    channels: &[(Channel, FeatureMatrix)],
    labels: &[f64],
    combos: &[Vec<Channel>],
    kinds: &[ModelKind],
    config: &CvConfig,
    observer: Option<&mut dyn FnMut(&FitRecord)>,
) -> Result<EvaluationReport, ModelError> {
    let Some((_, first)) = channels.first() else {
        return Err(ModelError::InvalidParameter("no channels".into()));
    };
    let n = first.n_rows();
    if labels.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if labels.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteTarget);
    }
    for (channel, m) in channels {
        if m.row_ids != first.row_ids {
            return Err(FusionError::RowMismatch(channel.to_string()).into());
        }
    }
    if combos.is_empty() || kinds.is_empty() {
        return Err(ModelError::InvalidParameter(
            "need at least one combination and one model".into(),
        ));
    }
    let mut needed: Vec<Channel> = combos.iter().flatten().copied().collect();
    needed.sort();
    needed.dedup();
    for c in &needed {
        if !channels.iter().any(|(have, _)| have == c) {
            return Err(ModelError::InvalidParameter(format!("no matrix for channel {c}")));
        }
    }

    let folds = fold_assignment(n, config.k, config.seed)?;
    let outcomes = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| run_fold(f, test, channels, labels, &needed, combos, kinds, config))
        .collect::<Result<Vec<_>, _>>()?;

    if let Some(observe) = observer {
        for outcome in &outcomes {
            for record in &outcome.records {
                observe(record);
            }
        }
    }

    let retained = needed
        .iter()
        .enumerate()
        .map(|(i, &channel)| RetainedDims {
            channel,
            input_features: outcomes[0].dims[i].0,
            kept_features: outcomes.iter().map(|o| o.dims[i].1).collect(),
            components: outcomes.iter().map(|o| o.dims[i].2).collect(),
        })
        .collect();
    let mut entries = Vec::with_capacity(combos.len() * kinds.len());
    for (ci, combo) in combos.iter().enumerate() {
        for (mi, &kind) in kinds.iter().enumerate() {
            let fold_r2: Vec<f64> = outcomes.iter().map(|o| o.scores[ci][mi]).collect();
            let mean_r2 = fold_r2.iter().sum::<f64>() / fold_r2.len() as f64;
            let mut sorted = combo.clone();
            sorted.sort();
            entries.push(EvaluationEntry {
                combination: combination_name(combo),
                channels: sorted,
                model: kind,
                fold_r2,
                mean_r2,
            });
        }
    }
    Ok(EvaluationReport {
        seed: config.seed,
        k: config.k,
        n_rows: n,
        folds: folds
            .iter()
            .map(|f| f.iter().map(|&r| first.row_ids[r].clone()).collect())
            .collect(),
        retained,
        entries,
    })
}

impl EvaluationReport {
    pub fn entry(&self, combination: &str, model: ModelKind) -> Option<&EvaluationEntry> {
        self.entries
            .iter()
            .find(|e| e.combination == combination && e.model == model)
    }

    pub fn mean_r2(&self, channels: &[Channel], model: ModelKind) -> Option<f64> {
        self.entry(&combination_name(channels), model)
            .map(|e| e.mean_r2)
    }

    /// Combinations in first-seen order.
    pub fn combinations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.combination) {
                out.push(e.combination.clone());
            }
        }
        out
    }

    pub fn models(&self) -> Vec<ModelKind> {
        let mut out: Vec<ModelKind> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.model) {
                out.push(e.model);
            }
        }
        out
    }

    /// Mean R² grid: one row per combination, one column per model.
    pub fn table_csv(&self) -> String {
        let models = self.models();
        let mut out = String::from("combination");
        for m in &models {
            let _ = write!(out, ",{}", m.label());
        }
        out.push('\n');
        for combo in self.combinations() {
            out.push_str(&combo);
            for &m in &models {
                match self.entry(&combo, m) {
                    Some(e) => {
                        let _ = write!(out, ",{}", e.mean_r2);
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// The `(combination, model)` pair with the highest mean R².
    pub fn best(&self) -> Option<&EvaluationEntry> {
        self.entries
            .iter()
            .reduce(|a, b| if b.mean_r2 > a.mean_r2 { b } else { a })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn twenty_rows_ten_folds() {
        let folds = fold_assignment(20, 10, 3).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.len() == 2));
    }

    #[test]
    fn folds_partition_rows() {
        for (n, k) in [(23, 10), (10, 10), (101, 7), (5, 2)] {
            let folds = fold_assignment(n, k, 17).unwrap();
            let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = folds.concat();
            all.sort();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fold_assignment_is_seeded() {
        assert_eq!(fold_assignment(50, 10, 1).unwrap(), fold_assignment(50, 10, 1).unwrap());
        assert_ne!(fold_assignment(50, 10, 1).unwrap(), fold_assignment(50, 10, 2).unwrap());
        assert!(matches!(
            fold_assignment(5, 10, 0),
            Err(ModelError::TooFewRows { .. })
        ));
    }

    #[test]
    fn combination_names() {
        assert_eq!(combination_name(&[Channel::Mouse, Channel::Video]), "video+mouse");
        let all = standard_combinations(&Channel::ALL);
        assert_eq!(all.len(), 7);
        assert_eq!(combination_name(&all[6]), "video+eye+mouse");
        assert_eq!(standard_combinations(&[Channel::Eye]), vec![vec![Channel::Eye]]);
    }

    fn toy_channels(n: usize, seed: u64) -> (Vec<(Channel, FeatureMatrix)>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latent: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ids: Vec<String> = (0..n).map(|i| format!("u{i:03}")).collect();
        let mut blocks = Vec::new();
        for (ci, channel) in Channel::ALL.into_iter().enumerate() {
            let p = 4 + ci;
            let mut data = Vec::with_capacity(n * p);
            for l in &latent {
                for j in 0..p {
                    let signal = if j < 2 { l * (j + 1) as f64 } else { 0.0 };
                    data.push(signal + rng.gen_range(-0.3..0.3));
                }
            }
            let cols = (0..p).map(|j| format!("f{j}")).collect();
            blocks.push((channel, FeatureMatrix::new(ids.clone(), cols, data).unwrap()));
        }
        (blocks, latent)
    }

    fn quick_config(seed: u64) -> CvConfig {
        let mut config = CvConfig {
            seed,
            ..CvConfig::default()
        };
        config.models.forest.n_trees = 15;
        config.models.gbdt.n_trees = 30;
        config
    }

    #[test]
    fn report_shape_and_determinism() {
        let (channels, labels) = toy_channels(60, 4);
        let combos = standard_combinations(&Channel::ALL);
        let config = quick_config(9);
        let a = kfold_cv(&channels, &labels, &combos, &ModelKind::ALL, &config, None).unwrap();
        let b = kfold_cv(&channels, &labels, &combos, &ModelKind::ALL, &config, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.entries.len(), 21);
        let table = a.table_csv();
        assert_eq!(table.lines().count(), 8);
        assert_eq!(table.lines().next().unwrap(), "combination,CART,Random Forest,GBDT");
        assert!(a.entries.iter().all(|e| e.fold_r2.len() == 10));
        assert!(a.mean_r2(&Channel::ALL, ModelKind::Gbdt).unwrap() > 0.5);
    }

    #[test]
    fn fits_never_see_their_test_fold() {
        let (channels, labels) = toy_channels(40, 8);
        let combos = standard_combinations(&Channel::ALL);
        let config = quick_config(2);
        let mut records = Vec::new();
        let report = kfold_cv(
            &channels,
            &labels,
            &combos,
            &ModelKind::ALL,
            &config,
            Some(&mut |r: &FitRecord| records.push(r.clone())),
        )
        .unwrap();
        // 3 channels x 3 stages + 7 combos x 3 models, per fold.
        assert_eq!(records.len(), 10 * (9 + 21));
        for r in &records {
            let test: HashSet<&String> = report.folds[r.fold].iter().collect();
            assert!(r.rows.iter().all(|id| !test.contains(id)));
            assert_eq!(r.rows.len() + test.len(), 40);
        }
    }

    #[test]
    fn row_mismatch_rejected() {
        let (mut channels, labels) = toy_channels(20, 1);
        channels[1].1.row_ids[0] = "other".into();
        let err = kfold_cv(
            &channels,
            &labels,
            &[vec![Channel::Video]],
            &[ModelKind::Cart],
            &quick_config(0),
            None,
        );
        assert!(matches!(err, Err(ModelError::Fusion(FusionError::RowMismatch(_)))));
    }
}
