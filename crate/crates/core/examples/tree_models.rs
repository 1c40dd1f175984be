//! CART, random forest, and gradient boosting on a nonlinear toy target,
//! plus a save/load round trip through the versioned JSON format.
//!
//! ```text
//! cargo run --example tree_models -- [n_train]
//! ```

use fuselearn::features::FeatureMatrix;
use fuselearn::models::{
    deserialize_model, fit_model, r2_score, serialize_model, ModelConfig, ModelKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut ChaCha8Rng, n: usize) -> (FeatureMatrix, Vec<f64>) {
    let p = 5;
    let mut values = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Two informative columns with an interaction, three pure noise.
        y.push((3.0 * row[0]).sin() + row[1] * row[0] + 0.1 * rng.gen_range(-1.0..1.0));
        values.extend(row);
    }
    let m = FeatureMatrix::new(
        (0..n).map(|i| format!("r{i}")).collect(),
        (0..p).map(|j| format!("x{j}")).collect(),
        values,
    )
    .expect("shape is consistent");
    (m, y)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(300);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (train_x, train_y) = sample(&mut rng, n);
    let (test_x, test_y) = sample(&mut rng, 500);
    let config = ModelConfig::default();

    println!("{:<15}{:>10}{:>10}", "model", "train R²", "test R²");
    for kind in ModelKind::ALL {
        let model = fit_model(kind, &config, &train_x, &train_y, 42)?;
        let fit = r2_score(&train_y, &model.predict_matrix(&train_x)?)?;
        let held_out = r2_score(&test_y, &model.predict_matrix(&test_x)?)?;
        println!("{:<15}{fit:>10.4}{held_out:>10.4}", kind.label());

        let json = serialize_model(&model);
        let restored = deserialize_model(&json)?;
        assert_eq!(restored.predict_matrix(&test_x)?, model.predict_matrix(&test_x)?);
        println!("  saved as {} bytes of JSON, reload predicts identically", json.len());
    }
    Ok(())
}
