//! One-sided power spectrum and spectral shape features.

use std::cell::RefCell;

use rustfft::{num_complex::Complex, FftPlanner};

use super::{FeatureError, FeatureVector};

pub const FOURIER_NAMES: [&str; 11] = [
    "fft.total_power",
    "fft.dc_power",
    "fft.dominant_freq_hz",
    "fft.dominant_power",
    "fft.spectral_centroid_hz",
    "fft.spectral_entropy",
    "fft.rolloff85_hz",
    "fft.band1_energy",
    "fft.band2_energy",
    "fft.band3_energy",
    "fft.band4_energy",
];

/// Relative power below which spectral differences are treated as roundoff.
pub const SPECTRAL_FLOOR: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized DFT of a real series.
pub fn dft(series: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

/// `P_k = |X_k|^2 / n` for `k = 0..=n/2`.
pub fn power_spectrum(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    dft(series)
        .iter()
        .take(n / 2 + 1)
        .map(|c| c.norm_sqr() / n as f64)
        .collect()
}

/// Upper edges of the four octave bands over `(0, nyquist]`.
fn band_index(freq: f64, nyquist: f64) -> usize {
    if freq <= nyquist / 8.0 {
        0
    } else if freq <= nyquist / 4.0 {
        1
    } else if freq <= nyquist / 2.0 {
        2
    } else {
        3
    }
}

pub fn fourier_values(series: &[f64], rate_hz: f64) -> Result<[f64; 11], FeatureError> {
    if series.len() < 2 {
        return Err(FeatureError::SeriesTooShort {
            len: series.len(),
            min: 2,
        });
    }
    let n = series.len() as f64;
    let power = power_spectrum(series);
    let freq = |k: usize| k as f64 * rate_hz / n;
    let nyquist = rate_hz / 2.0;

    let total: f64 = power.iter().sum();
    let ac = &power[1..];
    // FFT roundoff leaves ~1e-30 power in the AC bins of a constant series.
    let mut ac_total: f64 = ac.iter().sum();
    if ac_total <= SPECTRAL_FLOOR * total {
        ac_total = 0.0;
    }

    // Lowest frequency among bins tied (to roundoff) for the largest power.
    let mut dominant_k = 0;
    let mut dominant_power = 0.0;
    if ac_total > 0.0 {
        let peak = ac.iter().cloned().fold(0.0, f64::max);
        let k = ac
            .iter()
            .position(|&p| p >= peak - SPECTRAL_FLOOR * total)
            .expect("peak is attained");
        dominant_k = k + 1;
        dominant_power = ac[k];
    }

    let (mut centroid, mut entropy, mut rolloff) = (0.0, 0.0, 0.0);
    let mut bands = [0.0; 4];
    if ac_total > 0.0 {
        let mut cumulative = 0.0;
        let mut rolloff_set = false;
        for (i, &p) in ac.iter().enumerate() {
            let k = i + 1;
            centroid += freq(k) * p;
            let share = p / ac_total;
            if share > 0.0 {
                entropy -= share * share.log2();
            }
            cumulative += p;
            if !rolloff_set && cumulative >= 0.85 * ac_total {
                rolloff = freq(k);
                rolloff_set = true;
            }
            bands[band_index(freq(k), nyquist)] += p;
        }
        centroid /= ac_total;
    }

    Ok([
        total,
        power[0],
        if dominant_k == 0 { 0.0 } else { freq(dominant_k) },
        dominant_power,
        centroid,
        entropy,
        rolloff,
        bands[0],
        bands[1],
        bands[2],
        bands[3],
    ])
}

pub fn fourier_features(series: &[f64], rate_hz: f64) -> Result<FeatureVector, FeatureError> {
    let values = fourier_values(series, rate_hz)?;
    Ok(FeatureVector::from_pairs(
        FOURIER_NAMES.iter().zip(values).map(|(n, v)| (n.to_string(), Some(v))),
    ))
}
