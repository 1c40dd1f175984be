//! The 21-entry statistical battery.

use super::{FeatureError, FeatureVector};

pub const STAT_NAMES: [&str; 21] = [
    "count",
    "mean",
    "std",
    "variance",
    "min",
    "max",
    "range",
    "median",
    "q1",
    "q3",
    "iqr",
    "skewness",
    "kurtosis",
    "rms",
    "mean_abs_dev",
    "zero_cross_rate",
    "energy",
    "diff_mean",
    "diff_std",
    "diff_abs_mean",
    "autocorr_lag1",
];

/// Linear-interpolated quantile of sorted data (the "type 7" definition).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n-1 denominator; 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Raw values in [`STAT_NAMES`] order.
pub fn stat_values(series: &[f64]) -> Result<[f64; 21], FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    let n = series.len() as f64;
    let m = mean(series);
    let variance = sample_variance(series);
    let std = variance.sqrt();

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let median = quantile_sorted(&sorted, 0.5);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);

    // Central moments use the population (1/n) normalization.
    let (mut m2, mut m3, mut m4, mut abs_dev) = (0.0, 0.0, 0.0, 0.0);
    for &x in series {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        abs_dev += d.abs();
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let skewness = ratio_or_zero(m3, m2.powf(1.5));
    let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };

    let energy: f64 = series.iter().map(|x| x * x).sum();
    let rms = (energy / n).sqrt();

    let pairs = series.len().saturating_sub(1);
    let crossings = series
        .windows(2)
        .filter(|w| (w[0] - m) * (w[1] - m) < 0.0)
        .count();
    let zero_cross_rate = ratio_or_zero(crossings as f64, pairs as f64);

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let (diff_mean, diff_abs_mean) = if diffs.is_empty() {
        (0.0, 0.0)
    } else {
        (mean(&diffs), diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64)
    };
    let diff_std = sample_variance(&diffs).sqrt();

    let lag_num: f64 = series.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let autocorr_lag1 = ratio_or_zero(lag_num, m2 * n);

    Ok([
        n,
        m,
        std,
        variance,
        min,
        max,
        max - min,
        median,
        q1,
        q3,
        q3 - q1,
        skewness,
        kurtosis,
        rms,
        abs_dev / n,
        zero_cross_rate,
        energy,
        diff_mean,
        diff_std,
        diff_abs_mean,
        autocorr_lag1,
    ])
}

pub fn stat_features(series: &[f64]) -> Result<FeatureVector, FeatureError> {
    let values = stat_values(series)?;
    Ok(FeatureVector::from_pairs(
        STAT_NAMES.iter().zip(values).map(|(n, v)| (n.to_string(), Some(v))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(fv: &FeatureVector, name: &str) -> f64 {
        fv.get(name).unwrap().unwrap()
    }

    #[test]
    fn one_to_four() {
        let fv = stat_features(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(fv.len(), 21);
        assert!((get(&fv, "mean") - 2.5).abs() < 1e-12);
        assert!((get(&fv, "variance") - 5.0 / 3.0).abs() < 1e-12);
        assert!((get(&fv, "std") - 1.2909944487358056).abs() < 1e-12);
        assert_eq!(get(&fv, "range"), 3.0);
        assert_eq!(get(&fv, "median"), 2.5);
    }

    #[test]
    fn constant_series_degenerate_conventions() {
        let fv = stat_features(&[7.0, 7.0, 7.0]).unwrap();
        for name in ["std", "skewness", "zero_cross_rate", "autocorr_lag1", "kurtosis"] {
            assert_eq!(get(&fv, name), 0.0, "{name}");
        }
    }

    #[test]
    fn alternating_signs_cross_every_pair() {
        let fv = stat_features(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(get(&fv, "zero_cross_rate"), 1.0);
    }

    #[test]
    fn single_element() {
        let fv = stat_features(&[3.0]).unwrap();
        for name in ["std", "variance", "range", "iqr", "diff_mean", "diff_std", "diff_abs_mean"] {
            assert_eq!(get(&fv, name), 0.0, "{name}");
        }
        assert_eq!(get(&fv, "energy"), 9.0);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(stat_features(&[]), Err(FeatureError::EmptySeries)));
    }
}
