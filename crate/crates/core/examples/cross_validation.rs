//! k-fold evaluation of every channel combination, with every fitted stage
//! audited against the held-out fold.
//!
//! ```text
//! cargo run --example cross_validation -- [k] [seed]
//! ```

use std::collections::HashSet;

use fuselearn::features::FeatureConfig;
use fuselearn::ingest::Channel;
use fuselearn::labeling::LabelWeights;
use fuselearn::models::{kfold_cv, standard_combinations, CvConfig, FitRecord, ModelKind};
use fuselearn::pipeline::featurize_synthetic;
use fuselearn::synth::SynthConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let synth = SynthConfig {
        n_units: 100,
        seed,
        min_duration_ms: 2 * 60_000,
        max_duration_ms: 4 * 60_000,
        ..SynthConfig::default()
    };
    let (set, _) = featurize_synthetic(&synth, &FeatureConfig::default(), &LabelWeights::default())?;
    let cv = CvConfig {
        k,
        seed,
        ..CvConfig::default()
    };

    let mut fits: Vec<FitRecord> = Vec::new();
    let mut observe = |r: &FitRecord| fits.push(r.clone());
    let report = kfold_cv(
        &set.matrices,
        &set.label_values(),
        &standard_combinations(&Channel::ALL),
        &ModelKind::ALL,
        &cv,
        Some(&mut observe),
    )?;

    print!("{}", report.table_csv());
    if let Some(best) = report.best() {
        println!("\nbest: {} with {} (mean R² {:.4})", best.combination, best.model.label(), best.mean_r2);
    }
    for dims in &report.retained {
        println!("{:<6} components per fold {:?}", dims.channel, dims.components);
    }

    let leaked = fits
        .iter()
        .filter(|f| {
            let test: HashSet<&String> = report.folds[f.fold].iter().collect();
            f.rows.iter().any(|id| test.contains(id))
        })
        .count();
    println!("\n{} fits observed, {leaked} touched a test row", fits.len());
    Ok(())
}
