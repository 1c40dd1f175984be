use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{pearson, FusionError};
use crate::features::FeatureMatrix;
use crate::ingest::Channel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub a: Channel,
    pub b: Channel,
    /// Mean |r| over every cross-channel entry.
    pub mean_abs_r: f64,
    /// Mean, over the columns of both channels, of each column's largest |r|
    /// against the other channel.
    pub mean_best_abs_r: f64,
    pub max_abs_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub columns: Vec<String>,
    /// Row-major `p x p` Pearson matrix.
    pub matrix: Vec<f64>,
    pub pairs: Vec<PairSummary>,
}

/// Full Pearson matrix over the fused columns plus per-channel-pair summaries.
/// Zero-variance columns correlate 0 with everything, themselves included.
pub fn cross_channel_correlation(
    fused: &FeatureMatrix,
    spans: &[(Channel, Range<usize>)],
) -> Result<CorrelationSummary, FusionError> {
    if fused.n_rows() < 3 {
        return Err(FusionError::TooFewRows {
            rows: fused.n_rows(),
            min: 3,
        });
    }
    if spans.len() < 2 {
        return Err(FusionError::InvalidParameter(
            "correlation needs at least two channels".into(),
        ));
    }
    let p = fused.n_cols();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| fused.column(j)).collect();
    let mut matrix = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let r = pearson(&cols[i], &cols[j]).unwrap_or(0.0);
            let r = if i == j && r != 0.0 { 1.0 } else { r };
            matrix[i * p + j] = r;
            matrix[j * p + i] = r;
        }
    }

    let mut pairs = Vec::new();
    for (x, (a, span_a)) in spans.iter().enumerate() {
        for (b, span_b) in &spans[x + 1..] {
            let mut sum = 0.0;
            let mut max: f64 = 0.0;
            let mut best_a = vec![0.0f64; span_a.len()];
            let mut best_b = vec![0.0f64; span_b.len()];
            for (ia, i) in span_a.clone().enumerate() {
                for (jb, j) in span_b.clone().enumerate() {
                    let r = matrix[i * p + j].abs();
                    sum += r;
                    max = max.max(r);
                    best_a[ia] = best_a[ia].max(r);
                    best_b[jb] = best_b[jb].max(r);
                }
            }
            let cells = (span_a.len() * span_b.len()).max(1) as f64;
            let bests = (best_a.len() + best_b.len()).max(1) as f64;
            pairs.push(PairSummary {
                a: *a,
                b: *b,
                mean_abs_r: sum / cells,
                mean_best_abs_r: (best_a.iter().sum::<f64>() + best_b.iter().sum::<f64>())
                    / bests,
                max_abs_r: max,
            });
        }
    }
    Ok(CorrelationSummary {
        columns: fused.columns.clone(),
        matrix,
        pairs,
    })
}

impl CorrelationSummary {
    /// Square CSV with a leading `column` header cell.
    pub fn matrix_csv(&self) -> String {
        let p = self.columns.len();
        let mut out = String::from("column");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for i in 0..p {
            out.push_str(&self.columns[i]);
            for j in 0..p {
                let _ = write!(out, ",{}", self.matrix[i * p + j]);
            }
            out.push('\n');
        }
        out
    }

    pub fn pairs_json(&self) -> String {
        serde_json::to_string_pretty(&self.pairs).expect("pairs serialize") + "\n"
    }

    pub fn pair(&self, a: Channel, b: Channel) -> Option<&PairSummary> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::fuse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(rows: usize, cols: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::new(
            (0..rows).map(|i| format!("u{i}")).collect(),
            (1..=cols).map(|i| format!("pc{i}")).collect(),
            (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn self_correlation_is_one_on_diagonal() {
        let (fused, spans) =
            fuse(&[(Channel::Video, noise(20, 3, 1)), (Channel::Eye, noise(20, 2, 2))]).unwrap();
        let s = cross_channel_correlation(&fused, &spans).unwrap();
        for i in 0..5 {
            assert_eq!(s.matrix[i * 5 + i], 1.0);
        }
    }

    #[test]
    fn independent_noise_is_weak() {
        for seed in 0..10 {
            let (fused, spans) = fuse(&[
                (Channel::Video, noise(200, 4, seed * 2)),
                (Channel::Eye, noise(200, 4, seed * 2 + 1)),
            ])
            .unwrap();
            let s = cross_channel_correlation(&fused, &spans).unwrap();
            assert!(s.pairs[0].mean_abs_r < 0.15, "{:?}", s.pairs[0]);
        }
    }

    #[test]
    fn duplicated_single_column_channel() {
        let m = noise(50, 1, 7);
        let (fused, spans) = fuse(&[(Channel::Eye, m.clone()), (Channel::Mouse, m)]).unwrap();
        let s = cross_channel_correlation(&fused, &spans).unwrap();
        assert!((s.pairs[0].mean_abs_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_block_best_match_is_one() {
        let m = noise(50, 4, 9);
        let (fused, spans) = fuse(&[(Channel::Eye, m.clone()), (Channel::Mouse, m)]).unwrap();
        let s = cross_channel_correlation(&fused, &spans).unwrap();
        assert!((s.pairs[0].mean_best_abs_r - 1.0).abs() < 1e-12);
        assert!((s.pairs[0].max_abs_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let (fused, spans) =
            fuse(&[(Channel::Video, noise(2, 1, 1)), (Channel::Eye, noise(2, 1, 2))]).unwrap();
        assert!(matches!(
            cross_channel_correlation(&fused, &spans),
            Err(FusionError::TooFewRows { .. })
        ));
    }
}
