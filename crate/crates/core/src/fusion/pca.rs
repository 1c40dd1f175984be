//! Principal component analysis through the SVD of the centered data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FusionError;
use crate::features::FeatureMatrix;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub retention: f64,
    /// Column means of the fitting data.
    pub mean: Vec<f64>,
    /// `k` rows of length `p`, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Explained-variance share of each retained component, non-increasing.
    pub explained: Vec<f64>,
    /// Numerical rank of the fitting data.
    pub rank: usize,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn cumulative_explained(&self) -> f64 {
        self.explained.iter().sum()
    }

    /// Smallest prefix of `shares` whose cumulative sum reaches `retention`.
    pub fn minimal_k(shares: &[f64], retention: f64) -> usize {
        // Shares of a full-rank prefix may sum to 1 - ulp.
        let target = if retention >= 1.0 { 1.0 - 1e-12 } else { retention };
        let mut cumulative = 0.0;
        for (i, s) in shares.iter().enumerate() {
            cumulative += s;
            if cumulative >= target {
                return i + 1;
            }
        }
        shares.len()
    }

    pub fn fit(matrix: &FeatureMatrix, retention: f64) -> Result<PcaModel, FusionError> {
        let (n, p) = (matrix.n_rows(), matrix.n_cols());
        if n < 2 {
            return Err(FusionError::TooFewRows { rows: n, min: 2 });
        }
        if !(retention > 0.0 && retention <= 1.0) {
            return Err(FusionError::InvalidParameter(format!(
                "retention = {retention}"
            )));
        }
        let mean: Vec<f64> = (0..p)
            .map(|j| matrix.column(j).iter().sum::<f64>() / n as f64)
            .collect();
        let centered = DMatrix::from_fn(n, p, |r, c| matrix.get(r, c) - mean[c]);
        let svd = centered.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");

        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let largest = sigma.first().copied().unwrap_or(0.0);
        if largest <= 0.0 || !largest.is_finite() {
            return Err(FusionError::DegenerateMatrix("rank 0 after centering".into()));
        }
        let rank = sigma
            .iter()
            .take_while(|&&s| s > RANK_TOLERANCE * largest)
            .count();
        let total: f64 = sigma.iter().map(|s| s * s).sum();
        let shares: Vec<f64> = sigma[..rank].iter().map(|s| s * s / total).collect();
        let k = PcaModel::minimal_k(&shares, retention);

        let components = order[..k]
            .iter()
            .map(|&i| {
                let mut row: Vec<f64> = v_t.row(i).iter().copied().collect();
                let pivot = row
                    .iter()
                    .copied()
                    .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
                    .unwrap_or(0.0);
                if pivot < 0.0 {
                    row.iter_mut().for_each(|v| *v = -*v);
                }
                row
            })
            .collect();
        Ok(PcaModel {
            retention,
            mean,
            components,
            explained: shares[..k].to_vec(),
            rank,
        })
    }

    /// Projects one row: `components · (row - mean)`.
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(row.iter().zip(&self.mean))
                    .map(|(w, (x, m))| w * (x - m))
                    .sum()
            })
            .collect()
    }

    /// Column names are `pc1..pck`.
    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FusionError> {
        if matrix.n_cols() != self.dim() {
            return Err(FusionError::DimensionMismatch {
                expected: self.dim(),
                found: matrix.n_cols(),
            });
        }
        let mut data = Vec::with_capacity(matrix.n_rows() * self.k());
        for r in 0..matrix.n_rows() {
            data.extend(self.project(matrix.row(r)));
        }
        Ok(FeatureMatrix::new(
            matrix.row_ids.clone(),
            (1..=self.k()).map(|i| format!("pc{i}")).collect(),
            data,
        )?)
    }

    /// Maps component scores back to the centered-input space and re-adds the mean.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (s, c) in scores.iter().zip(&self.components) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += s * w;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::new(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            (0..rows[0].len()).map(|j| format!("c{j}")).collect(),
            rows.concat(),
        )
        .unwrap()
    }

    #[test]
    fn points_on_a_line() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let pca = PcaModel::fit(&from_rows(&rows), 0.95).unwrap();
        assert_eq!(pca.k(), 1);
        assert_eq!(pca.rank, 1);
        assert!((pca.explained[0] - 1.0).abs() < 1e-12);
        let c = &pca.components[0];
        assert!((c[0] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((c[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn full_retention_reaches_rank() {
        let rows = vec![
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![2.0, 1.0, 3.0],
            vec![-1.0, 2.0, 1.0],
        ];
        let pca = PcaModel::fit(&from_rows(&rows), 1.0).unwrap();
        assert_eq!(pca.rank, 2);
        assert_eq!(pca.k(), 2);
        let m = from_rows(&rows);
        let scores = pca.transform(&m).unwrap();
        for r in 0..4 {
            let back = pca.reconstruct(scores.row(r));
            for (a, b) in back.iter().zip(m.row(r)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn duplicated_point_is_degenerate() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        assert!(matches!(
            PcaModel::fit(&from_rows(&rows), 0.95),
            Err(FusionError::DegenerateMatrix(_))
        ));
    }

    #[test]
    fn orthogonal_row_maps_to_zero() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64, 0.0]).collect();
        let pca = PcaModel::fit(&from_rows(&rows), 0.95).unwrap();
        // Offset from the mean orthogonal to the single component.
        let mut row = pca.mean.clone();
        row[0] += 1.0;
        row[1] -= 1.0;
        row[2] += 3.0;
        assert!(pca.project(&row)[0].abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let pca = PcaModel::fit(&from_rows(&rows), 0.95).unwrap();
        let other = from_rows(&[vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            pca.transform(&other),
            Err(FusionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minimal_prefix() {
        assert_eq!(PcaModel::minimal_k(&[0.6, 0.3, 0.06, 0.04], 0.95), 3);
        assert_eq!(PcaModel::minimal_k(&[0.6, 0.36, 0.04], 0.95), 2);
        assert_eq!(PcaModel::minimal_k(&[0.5, 0.5], 1.0), 2);
    }
}
