//! Orthonormal Haar decomposition and per-level energy features.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{FeatureError, FeatureVector};

pub const MAX_LEVELS: usize = 5;

/// Coefficients of a multi-level Haar analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarPyramid {
    /// Coarsest approximation band.
    pub approx: Vec<f64>,
    /// Detail bands, finest (level 1) first.
    pub details: Vec<Vec<f64>>,
}

impl HaarPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Sum of squares over every coefficient in the pyramid.
    pub fn energy(&self) -> f64 {
        let sq = |v: &Vec<f64>| v.iter().map(|c| c * c).sum::<f64>();
        sq(&self.approx) + self.details.iter().map(sq).sum::<f64>()
    }
}

/// `min(5, floor(log2 n))`.
pub fn default_levels(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()).min(MAX_LEVELS as u32) as usize
    }
}

fn haar_step(signal: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half = signal.len().div_ceil(2);
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for k in 0..half {
        let a = signal[2 * k];
        // Odd tails reflect the last sample.
        let b = signal.get(2 * k + 1).copied().unwrap_or(a);
        approx.push((a + b) * FRAC_1_SQRT_2);
        detail.push((a - b) * FRAC_1_SQRT_2);
    }
    (approx, detail)
}

/// Runs `levels` analysis steps (stopping early once a band has a single sample).
pub fn haar_dwt_levels(series: &[f64], levels: usize) -> Result<HaarPyramid, FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    let mut approx = series.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        if approx.len() < 2 {
            break;
        }
        let (a, d) = haar_step(&approx);
        details.push(d);
        approx = a;
    }
    Ok(HaarPyramid { approx, details })
}

pub fn haar_dwt(series: &[f64]) -> Result<HaarPyramid, FeatureError> {
    haar_dwt_levels(series, default_levels(series.len()))
}

fn level_names(level: usize) -> [String; 2] {
    [
        format!("wav.d{level}_energy"),
        format!("wav.d{level}_log_energy"),
    ]
}

fn pyramid_features(pyramid: &HaarPyramid, pad_to: usize) -> FeatureVector {
    let mut fv = FeatureVector::default();
    let mut detail_total = 0.0;
    let mut finest = 0.0;
    for level in 1..=pad_to.max(pyramid.levels()) {
        let [energy_name, log_name] = level_names(level);
        match pyramid.details.get(level - 1) {
            Some(band) => {
                let e: f64 = band.iter().map(|c| c * c).sum();
                if level == 1 {
                    finest = e;
                }
                detail_total += e;
                fv.push(energy_name, Some(e));
                fv.push(log_name, Some((e + 1e-12).ln()));
            }
            None => {
                fv.push(energy_name, None);
                fv.push(log_name, None);
            }
        }
    }
    let approx_energy: f64 = pyramid.approx.iter().map(|c| c * c).sum();
    fv.push("wav.approx_energy", Some(approx_energy));
    let total = approx_energy + detail_total;
    let ratio = if pyramid.levels() == 0 {
        None
    } else if total > 0.0 {
        Some(finest / total)
    } else {
        Some(0.0)
    };
    fv.push("wav.d1_ratio", ratio);
    fv
}

/// Per-level detail energy and log energy, approximation energy, and the
/// finest level's share of total energy: `2L + 2` features.
pub fn wavelet_features(series: &[f64]) -> Result<FeatureVector, FeatureError> {
    let pyramid = haar_dwt(series)?;
    Ok(pyramid_features(&pyramid, 0))
}

/// As [`wavelet_features`] but always over [`MAX_LEVELS`] levels; levels the
/// series is too short for are reported missing so names stay fixed.
pub fn wavelet_features_fixed(series: &[f64]) -> Result<FeatureVector, FeatureError> {
    let pyramid = haar_dwt(series)?;
    Ok(pyramid_features(&pyramid, MAX_LEVELS))
}

pub fn wavelet_feature_names() -> Vec<String> {
    let mut names: Vec<String> = (1..=MAX_LEVELS).flat_map(level_names).collect();
    names.push("wav.approx_energy".into());
    names.push("wav.d1_ratio".into());
    names
}
