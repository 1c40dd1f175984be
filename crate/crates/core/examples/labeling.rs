//! Learning-unit labels from mastery, self-evaluation, and class evaluation.
//!
//! ```text
//! cargo run --example labeling -- [mastery,self,class weights]
//! ```

use fuselearn::ingest::LearningUnit;
use fuselearn::labeling::{labels_csv, lus_label, LabelWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = match std::env::args().nth(1) {
        Some(text) => LabelWeights::parse(&text)?,
        None => LabelWeights::default(),
    };
    println!("weights (mastery, self, class) = {:?}\n", weights.as_array());

    let scores = [
        (100.0, 100.0, 100.0),
        (0.0, 10.0, 0.0),
        (50.0, 70.0, 80.0),
        (72.0, 40.0, 65.0),
    ];
    let mut labels = Vec::new();
    for (i, (mastery, self_eval, class_eval)) in scores.into_iter().enumerate() {
        let unit = LearningUnit {
            unit_id: format!("unit-{i}"),
            start: i as i64 * 600_000,
            end: (i as i64 + 1) * 600_000,
            self_eval,
            class_eval,
            mastery,
        };
        labels.push(lus_label(&unit, &weights)?);
    }
    print!("{}", labels_csv(&labels));

    let bad = LearningUnit {
        unit_id: "bad".into(),
        start: 0,
        end: 1,
        self_eval: 5.0,
        class_eval: 50.0,
        mastery: 50.0,
    };
    println!("\nself-evaluation below 10: {}", lus_label(&bad, &weights).unwrap_err());
    Ok(())
}
