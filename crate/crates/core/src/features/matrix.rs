use std::collections::HashSet;
use std::fmt::Write as _;

use super::FeatureError;

/// Dense row-major matrix with named columns and identified rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub columns: Vec<String>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(
        row_ids: Vec<String>,
        columns: Vec<String>,
        data: Vec<f64>,
    ) -> Result<Self, FeatureError> {
        if data.len() != row_ids.len() * columns.len() {
            return Err(FeatureError::Format(format!(
                "{} values for {} x {}",
                data.len(),
                row_ids.len(),
                columns.len()
            )));
        }
        let unique: HashSet<&String> = columns.iter().collect();
        if unique.len() != columns.len() {
            return Err(FeatureError::InconsistentNames(
                "duplicate column names".into(),
            ));
        }
        Ok(FeatureMatrix {
            row_ids,
            columns,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[row * p..(row + 1) * p]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols());
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
            columns: self.columns.clone(),
            data,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        FeatureMatrix {
            row_ids: self.row_ids.clone(),
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            data,
        }
    }

    /// CSV with a `unit_id` first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("unit_id");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in 0..self.n_rows() {
            out.push_str(&self.row_ids[r]);
            for v in self.row(r) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<FeatureMatrix, FeatureError> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines
            .next()
            .ok_or_else(|| FeatureError::Format("empty matrix file".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("unit_id") {
            return Err(FeatureError::Format("first column must be unit_id".into()));
        }
        let columns: Vec<String> = cols.map(String::from).collect();
        let mut row_ids = Vec::new();
        let mut data = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut fields = line.split(',');
            row_ids.push(fields.next().unwrap_or_default().to_string());
            let before = data.len();
            for f in fields {
                let v: f64 = f.parse().map_err(|_| {
                    FeatureError::Format(format!("line {}: bad value {f:?}", i + 2))
                })?;
                data.push(v);
            }
            if data.len() - before != columns.len() {
                return Err(FeatureError::Format(format!("line {}: wrong arity", i + 2)));
            }
        }
        FeatureMatrix::new(row_ids, columns, data)
    }
}
