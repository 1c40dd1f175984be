//! Statistical, Haar, and spectral features of one resampled series.
//!
//! ```text
//! cargo run --example signal_features -- [rate_hz]
//! ```

use std::f64::consts::TAU;

use fuselearn::features::{fourier_features, haar_dwt, stat_features, wavelet_features};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rate: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(30.0);

    // Ten seconds of a 2 Hz tone with a slow drift and a burst at t = 6 s.
    let n = (10.0 * rate) as usize;
    let series: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let burst = if (6.0..6.5).contains(&t) { 3.0 } else { 0.0 };
            (TAU * 2.0 * t).sin() + 0.1 * t + burst
        })
        .collect();

    let pyramid = haar_dwt(&series)?;
    println!("{n} samples at {rate} Hz, {} Haar levels", pyramid.levels());
    // Odd-length bands repeat their last sample, so the two agree exactly
    // only when n is divisible by 2^levels (try rate 25.6).
    let energy: f64 = series.iter().map(|x| x * x).sum();
    println!("signal energy {energy:.6}, pyramid energy {:.6}", pyramid.energy());

    for (title, fv) in [
        ("statistics", stat_features(&series)?),
        ("wavelet", wavelet_features(&series)?),
        ("spectrum", fourier_features(&series, rate)?),
    ] {
        println!("\n{title}");
        for (name, value) in fv.names.iter().zip(&fv.values) {
            match value {
                Some(v) => println!("  {name:<28}{v:>14.6}"),
                None => println!("  {name:<28}{:>14}", "missing"),
            }
        }
    }
    Ok(())
}
