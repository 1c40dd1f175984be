use serde::{Deserialize, Serialize};

use super::FusionError;
use crate::features::FeatureMatrix;

/// Per-column standardization moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    /// Sample (n-1) standard deviations; all strictly positive.
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(matrix: &FeatureMatrix) -> Result<Scaler, FusionError> {
        let n = matrix.n_rows();
        if n < 2 {
            return Err(FusionError::TooFewRows { rows: n, min: 2 });
        }
        let mut means = Vec::with_capacity(matrix.n_cols());
        let mut stds = Vec::with_capacity(matrix.n_cols());
        for j in 0..matrix.n_cols() {
            let col = matrix.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            if var <= 0.0 {
                return Err(FusionError::ZeroVarianceColumn(matrix.columns[j].clone()));
            }
            means.push(mean);
            stds.push(var.sqrt());
        }
        Ok(Scaler {
            columns: matrix.columns.clone(),
            means,
            stds,
        })
    }

    /// Standardizes with the stored moments.
    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FusionError> {
        if matrix.n_cols() != self.means.len() {
            return Err(FusionError::DimensionMismatch {
                expected: self.means.len(),
                found: matrix.n_cols(),
            });
        }
        let p = self.means.len();
        let data = matrix
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - self.means[i % p]) / self.stds[i % p])
            .collect();
        Ok(FeatureMatrix::new(matrix.row_ids.clone(), matrix.columns.clone(), data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn column(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(
            (0..values.len()).map(|i| i.to_string()).collect(),
            vec!["a".into()],
            values.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_column() {
        let m = column(&[1.0, 3.0]);
        let s = Scaler::fit(&m).unwrap();
        assert_eq!(s.means, vec![2.0]);
        assert!((s.stds[0] - 2f64.sqrt()).abs() < 1e-15);
        let z = s.apply(&m).unwrap();
        assert!((z.get(0, 0) + FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((z.get(1, 0) - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn standardized_is_fixed_point() {
        let m = column(&[-1.0, 0.0, 1.0]);
        let z = Scaler::fit(&m).unwrap().apply(&m).unwrap();
        for r in 0..3 {
            assert!((z.get(r, 0) - m.get(r, 0)).abs() < 1e-9);
        }
    }

    #[test]
    fn stored_moments_used_on_new_data() {
        let s = Scaler::fit(&column(&[1.0, 3.0])).unwrap();
        let z = s.apply(&column(&[10.0, 10.0, 10.0])).unwrap();
        assert!((z.get(0, 0) - 8.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_rejected() {
        assert!(matches!(
            Scaler::fit(&column(&[2.0, 2.0])),
            Err(FusionError::ZeroVarianceColumn(_))
        ));
    }
}
