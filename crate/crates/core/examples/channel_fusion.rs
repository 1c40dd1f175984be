//! Per-channel filter, scaling, and PCA, then feature-level fusion and the
//! cross-channel correlation summary.
//!
//! ```text
//! cargo run --example channel_fusion -- [n_units] [retention]
//! ```

use fuselearn::features::FeatureConfig;
use fuselearn::fusion::{cross_channel_correlation, fuse, ChannelPipeline, ReductionConfig};
use fuselearn::ingest::Channel;
use fuselearn::labeling::LabelWeights;
use fuselearn::pipeline::featurize_synthetic;
use fuselearn::synth::SynthConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_units: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(80);
    let retention: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.95);

    let synth = SynthConfig {
        n_units,
        seed: 3,
        min_duration_ms: 2 * 60_000,
        max_duration_ms: 4 * 60_000,
        ..SynthConfig::default()
    };
    let (set, _) = featurize_synthetic(&synth, &FeatureConfig::default(), &LabelWeights::default())?;
    let labels = set.label_values();
    let config = ReductionConfig {
        retention,
        ..ReductionConfig::default()
    };

    let mut blocks = Vec::new();
    for channel in Channel::ALL {
        let m = set.matrix(channel).expect("every channel is featurized");
        let pipeline = ChannelPipeline::fit(channel, m, &labels, &config)?;
        println!(
            "{channel:<6} {:>4} columns -> {:>4} pass the filter -> {:>3} components ({:.1}% variance)",
            m.n_cols(),
            pipeline.mask.kept.len(),
            pipeline.pca.k(),
            100.0 * pipeline.pca.cumulative_explained()
        );
        blocks.push((channel, pipeline.transform(m)?));
    }

    let (fused, spans) = fuse(&blocks)?;
    println!("\nfused matrix: {} rows x {} columns", fused.n_rows(), fused.n_cols());
    for (channel, span) in &spans {
        println!("  {channel:<6} columns {span:?}");
    }

    let summary = cross_channel_correlation(&fused, &spans)?;
    println!("\n{:<14}{:>12}{:>16}{:>12}", "pair", "mean |r|", "mean best |r|", "max |r|");
    for p in &summary.pairs {
        println!(
            "{:<14}{:>12.4}{:>16.4}{:>12.4}",
            format!("{}~{}", p.a, p.b),
            p.mean_abs_r,
            p.mean_best_abs_r,
            p.max_abs_r
        );
    }
    Ok(())
}
