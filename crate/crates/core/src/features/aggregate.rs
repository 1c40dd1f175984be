use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix, FeatureVector};
use crate::ingest::Millis;

/// Collapses window vectors to one unit vector: per feature, the mean and
/// sample std over the windows where it is present.
pub fn unit_features(windows: &[FeatureVector]) -> Result<FeatureVector, FeatureError> {
    let first = windows.first().ok_or(FeatureError::NoWindows)?;
    if let Some(bad) = windows.iter().find(|w| w.names != first.names) {
        return Err(FeatureError::InconsistentNames(format!(
            "{} vs {} names",
            first.len(),
            bad.len()
        )));
    }
    let mut out = FeatureVector::default();
    let mut present = Vec::with_capacity(windows.len());
    for (j, name) in first.names.iter().enumerate() {
        present.clear();
        present.extend(windows.iter().filter_map(|w| w.values[j]));
        let (mean, std) = if present.is_empty() {
            (None, None)
        } else {
            let n = present.len() as f64;
            let mean = present.iter().sum::<f64>() / n;
            let std = if present.len() < 2 {
                0.0
            } else {
                (present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            (Some(mean), Some(std))
        };
        out.push(format!("{name}.wmean"), mean);
        out.push(format!("{name}.wstd"), std);
    }
    Ok(out)
}

/// A unit-level vector with the identity needed to order matrix rows.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    pub unit_id: String,
    pub start: Millis,
    pub vector: FeatureVector,
}

/// Audit trail of what matrix assembly changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    /// `(column, number of imputed cells, fill value)`.
    pub imputed: Vec<(String, usize, f64)>,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
}

/// Stacks unit vectors into a matrix ordered by unit start, filling missing
/// cells with the column mean over present cells and dropping columns that
/// are missing everywhere.
pub fn assemble_matrix(
    mut units: Vec<UnitVector>,
) -> Result<(FeatureMatrix, AssemblyReport), FeatureError> {
    units.sort_by_key(|u| u.start);
    let names = units
        .first()
        .map(|u| u.vector.names.clone())
        .unwrap_or_default();
    if units.iter().any(|u| u.vector.names != names) {
        return Err(FeatureError::InconsistentNames(
            "units disagree on feature names".into(),
        ));
    }

    let mut report = AssemblyReport::default();
    let mut kept = Vec::new();
    let mut fills = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let present: Vec<f64> = units.iter().filter_map(|u| u.vector.values[j]).collect();
        if present.is_empty() {
            report.dropped.push(name.clone());
            report
                .warnings
                .push(format!("column {name} missing in every unit; dropped"));
            continue;
        }
        let fill = present.iter().sum::<f64>() / present.len() as f64;
        let missing = units.len() - present.len();
        if missing > 0 {
            report.imputed.push((name.clone(), missing, fill));
        }
        kept.push(j);
        fills.push(fill);
    }

    let mut data = Vec::with_capacity(units.len() * kept.len());
    for u in &units {
        for (&j, &fill) in kept.iter().zip(&fills) {
            data.push(u.vector.values[j].unwrap_or(fill));
        }
    }
    let matrix = FeatureMatrix::new(
        units.iter().map(|u| u.unit_id.clone()).collect(),
        kept.iter().map(|&j| names[j].clone()).collect(),
        data,
    )?;
    Ok((matrix, report))
}
