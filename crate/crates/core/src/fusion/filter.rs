use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::FusionError;
use crate::features::FeatureMatrix;

/// Columns retained by the per-channel significance screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterMask {
    pub alpha: f64,
    /// Indices into the original column list, ascending.
    pub kept: Vec<usize>,
    pub kept_names: Vec<String>,
    /// Two-sided p-value per original column; `None` for constant columns.
    pub p_values: Vec<Option<f64>>,
    pub original_columns: Vec<String>,
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the correlation t-test with `n - 2` degrees of freedom.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn is_constant(column: &[f64]) -> bool {
    column.iter().all(|&v| v == column[0])
}

/// Keeps columns whose correlation with `labels` is significant at `alpha`.
/// Constant columns are always dropped; when nothing passes, the single
/// smallest-p column is kept.
pub fn hypothesis_filter(
    matrix: &FeatureMatrix,
    labels: &[f64],
    alpha: f64,
) -> Result<FilterMask, FusionError> {
    let n = matrix.n_rows();
    if n != labels.len() {
        return Err(FusionError::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if n < 3 {
        return Err(FusionError::TooFewRows { rows: n, min: 3 });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FusionError::InvalidParameter(format!("alpha = {alpha}")));
    }
    let p_values: Vec<Option<f64>> = (0..matrix.n_cols())
        .map(|j| {
            let col = matrix.column(j);
            if is_constant(&col) {
                return None;
            }
            Some(pearson(&col, labels).map_or(1.0, |r| correlation_p_value(r, n)))
        })
        .collect();

    let mut kept: Vec<usize> = p_values
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_some_and(|p| p <= alpha))
        .map(|(j, _)| j)
        .collect();
    if kept.is_empty() {
        let best = p_values
            .iter()
            .enumerate()
            .filter_map(|(j, p)| p.map(|p| (j, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, _)) => kept.push(j),
            None => return Err(FusionError::DegenerateMatrix("every column is constant".into())),
        }
    }
    Ok(FilterMask {
        alpha,
        kept_names: kept.iter().map(|&j| matrix.columns[j].clone()).collect(),
        kept,
        p_values,
        original_columns: matrix.columns.clone(),
    })
}

impl FilterMask {
    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FusionError> {
        if matrix.columns != self.original_columns {
            return Err(FusionError::DimensionMismatch {
                expected: self.original_columns.len(),
                found: matrix.n_cols(),
            });
        }
        Ok(matrix.select_columns(&self.kept))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn matrix(cols: &[Vec<f64>]) -> FeatureMatrix {
        let n = cols[0].len();
        let mut data = Vec::new();
        for r in 0..n {
            data.extend(cols.iter().map(|c| c[r]));
        }
        FeatureMatrix::new(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..cols.len()).map(|j| format!("c{j}")).collect(),
            data,
        )
        .unwrap()
    }

    #[test]
    fn perfect_correlate_kept_constant_dropped() {
        let labels = vec![0.1, 0.5, 0.2, 0.9, 0.4];
        let m = matrix(&[labels.clone(), vec![3.0; 5]]);
        let mask = hypothesis_filter(&m, &labels, 0.05).unwrap();
        assert_eq!(mask.kept, vec![0]);
        assert_eq!(mask.p_values[0], Some(0.0));
        assert_eq!(mask.p_values[1], None);
    }

    #[test]
    fn p_value_matches_known_quantile() {
        // t = 2.0484 is the two-sided 5% critical value at df = 28.
        let n = 30;
        let t: f64 = 2.048407141795244;
        let r = t / (t * t + (n - 2) as f64).sqrt();
        assert!((correlation_p_value(r, n) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn keeps_best_when_nothing_passes() {
        let labels = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let weak = vec![1.0, -1.0, 2.0, 0.0, 1.5, 0.5];
        let weaker = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let m = matrix(&[weaker, weak]);
        let mask = hypothesis_filter(&m, &labels, 1e-6).unwrap();
        assert_eq!(mask.kept.len(), 1);
    }

    #[test]
    fn too_few_rows() {
        let m = matrix(&[vec![1.0, 2.0]]);
        assert!(matches!(
            hypothesis_filter(&m, &[1.0, 2.0], 0.05),
            Err(FusionError::TooFewRows { .. })
        ));
    }

    #[test]
    fn independent_noise_usually_dropped() {
        let mut dropped = 0;
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
            let signal: Vec<f64> = labels.iter().map(|l| l * 2.0).collect();
            let noise: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mask = hypothesis_filter(&matrix(&[signal, noise]), &labels, 0.05).unwrap();
            if !mask.kept.contains(&1) {
                dropped += 1;
            }
        }
        assert!(dropped >= 180, "dropped in {dropped} of 200 trials");
    }
}
