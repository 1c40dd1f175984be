//! Seed-averaged R² grid on default synthetic sessions.
//!
//! ```text
//! cargo run --release --example table_trend -- [n_seeds] [n_units]
//! ```

use std::time::Instant;

use fuselearn::features::FeatureConfig;
use fuselearn::ingest::Channel;
use fuselearn::labeling::LabelWeights;
use fuselearn::models::{kfold_cv, standard_combinations, CvConfig, ModelKind};
use fuselearn::pipeline::featurize_synthetic;
use fuselearn::synth::SynthConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let n_units: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);

    let combos = standard_combinations(&Channel::ALL);
    let mut sums = vec![vec![0.0; 3]; combos.len()];
    for seed in 0..n_seeds {
        let started = Instant::now();
        let synth = SynthConfig {
            n_units,
            seed,
            ..SynthConfig::default()
        };
        let (set, _) =
            featurize_synthetic(&synth, &FeatureConfig::default(), &LabelWeights::default())?;
        let featurized = started.elapsed();
        let cv = CvConfig {
            seed,
            ..CvConfig::default()
        };
        let report = kfold_cv(&set.matrices, &set.label_values(), &combos, &ModelKind::ALL, &cv, None)?;
        println!(
            "seed {seed}: featurize {:.1?}, cv {:.1?}",
            featurized,
            started.elapsed() - featurized
        );
        for (ci, combo) in combos.iter().enumerate() {
            let row: Vec<f64> = ModelKind::ALL
                .iter()
                .map(|&m| report.mean_r2(combo, m).unwrap())
                .collect();
            println!("  {:<18}{:>9.4}{:>9.4}{:>9.4}", fuselearn::models::combination_name(combo), row[0], row[1], row[2]);
            for (s, v) in sums[ci].iter_mut().zip(row) {
                *s += v;
            }
        }
    }
    println!("\naverage over {n_seeds} seeds");
    println!("{:<18}{:>9}{:>9}{:>9}", "combination", "CART", "RF", "GBDT");
    for (combo, row) in combos.iter().zip(&sums) {
        println!(
            "{:<18}{:>9.4}{:>9.4}{:>9.4}",
            fuselearn::models::combination_name(combo),
            row[0] / n_seeds as f64,
            row[1] / n_seeds as f64,
            row[2] / n_seeds as f64
        );
    }
    Ok(())
}
