//! Regression trees grown greedily on squared-error reduction.
//!
//! Each feature's sample order is sorted once at the root and then split
//! stably down the tree, so a node costs `O(n * p)` rather than a sort per
//! feature per node.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    /// `usize::MAX` for unlimited depth.
    pub max_depth: usize,
    pub min_leaf: usize,
    pub min_split: usize,
    /// Minimum SSE reduction a split must exceed.
    pub min_impurity_decrease: f64,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: 8,
            min_leaf: 2,
            min_split: 4,
            min_impurity_decrease: 0.0,
        }
    }
}

impl CartParams {
    pub fn unlimited() -> Self {
        CartParams {
            max_depth: usize::MAX,
            min_leaf: 1,
            min_split: 2,
            min_impurity_decrease: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.max_depth < 1 || self.min_leaf < 1 || self.min_split < 2 * self.min_leaf {
            return Err(ModelError::InvalidParameter(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Routes `x[feature] <= threshold` left.
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return Ok(*value),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = *x.get(*feature).ok_or(ModelError::DimensionMismatch {
                        expected: feature + 1,
                        found: x.len(),
                    })?;
                    node = if v <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Highest feature index referenced, if any split exists.
    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => [Some(*feature), left.max_feature(), right.max_feature()]
                .into_iter()
                .flatten()
                .max(),
        }
    }
}

/// A candidate split as scored by the grower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// `SSE(parent) - SSE(left) - SSE(right)`.
    pub gain: f64,
    /// Number of samples routed left.
    pub n_left: usize,
}

/// Per-split random feature subset for forests.
pub(crate) struct FeatureSampler<'r> {
    pub rng: &'r mut dyn RngCore,
    pub m: usize,
}

impl FeatureSampler<'_> {
    fn draw(&mut self, p: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(0..p);
        let m = self.m.min(p);
        for i in 0..m {
            let j = i + (self.rng.next_u64() % (p - i) as u64) as usize;
            out.swap(i, j);
        }
        out.truncate(m);
        out.sort_unstable();
    }
}

/// Training samples with every feature's sample order computed once.
/// Values are column-major: `values[f * n + s]`.
pub(crate) struct Presorted {
    n: usize,
    p: usize,
    values: Vec<f64>,
    order: Vec<u32>,
}

impl Presorted {
    pub fn new(x: &FeatureMatrix) -> Presorted {
        let (n, p) = (x.n_rows(), x.n_cols());
        let mut values = vec![0.0; n * p];
        for r in 0..n {
            for (f, v) in x.row(r).iter().enumerate() {
                values[f * n + r] = *v;
            }
        }
        let mut order = Vec::with_capacity(n * p);
        for f in 0..p {
            let col = &values[f * n..(f + 1) * n];
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            order.extend(idx);
        }
        Presorted {
            n,
            p,
            values,
            order,
        }
    }

    /// The multiset of samples `rows` (repeats allowed), sorted by merging
    /// from this presort instead of sorting again.
    pub fn resample(&self, rows: &[usize]) -> Presorted {
        let (n, p) = (rows.len(), self.p);
        let mut values = vec![0.0; n * p];
        for f in 0..p {
            let src = &self.values[f * self.n..(f + 1) * self.n];
            for (s, &r) in rows.iter().enumerate() {
                values[f * n + s] = src[r];
            }
        }
        // Samples drawn from each source row, ascending.
        let mut start = vec![0usize; self.n + 1];
        for &r in rows {
            start[r + 1] += 1;
        }
        for r in 0..self.n {
            start[r + 1] += start[r];
        }
        let mut fill = start.clone();
        let mut members = vec![0u32; n];
        for (s, &r) in rows.iter().enumerate() {
            members[fill[r]] = s as u32;
            fill[r] += 1;
        }
        let mut order = Vec::with_capacity(n * p);
        for f in 0..p {
            for &r in &self.order[f * self.n..(f + 1) * self.n] {
                let r = r as usize;
                order.extend_from_slice(&members[start[r]..start[r + 1]]);
            }
        }
        Presorted {
            n,
            p,
            values,
            order,
        }
    }
}

struct Grower<'a, 'r> {
    pre: &'a Presorted,
    /// Target per sample.
    y: &'a [f64],
    params: CartParams,
    sampler: Option<FeatureSampler<'r>>,
    order: Vec<u32>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    features: Vec<usize>,
}

impl Grower<'_, '_> {
    fn segment(&self, f: usize, lo: usize, hi: usize) -> &[u32] {
        let n = self.pre.n;
        &self.order[f * n + lo..f * n + hi]
    }

    fn best_split(&mut self, lo: usize, hi: usize, total: f64, parent_sse: f64) -> Option<SplitChoice> {
        let n = hi - lo;
        let tolerance = 1e-10 * parent_sse.max(f64::MIN_POSITIVE);
        let base = total * total / n as f64;
        let p = self.pre.p;
        let mut features = std::mem::take(&mut self.features);
        match self.sampler.as_mut() {
            Some(s) => s.draw(p, &mut features),
            None => {
                features.clear();
                features.extend(0..p);
            }
        }
        let min_leaf = self.params.min_leaf;
        let mut best: Option<SplitChoice> = None;
        for &f in &features {
            let sorted = self.segment(f, lo, hi);
            let col = &self.pre.values[f * self.pre.n..(f + 1) * self.pre.n];
            let mut left_sum = 0.0;
            let mut prev = col[sorted[0] as usize];
            for i in 1..n {
                left_sum += self.y[sorted[i - 1] as usize];
                let lo_v = prev;
                let hi_v = col[sorted[i] as usize];
                prev = hi_v;
                if lo_v >= hi_v || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / i as f64
                    + right_sum * right_sum / (n - i) as f64
                    - base;
                if best.is_none_or(|b| gain > b.gain + tolerance) {
                    let mid = lo_v + (hi_v - lo_v) / 2.0;
                    // Adjacent floats: keep `lo_v` on the left side.
                    let threshold = if mid < hi_v { mid } else { lo_v };
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        gain,
                        n_left: i,
                    });
                }
            }
        }
        self.features = features;
        best.filter(|b| b.gain > self.params.min_impurity_decrease && b.gain > tolerance)
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> TreeNode {
        let n = hi - lo;
        let (mut total, mut sum_sq) = (0.0, 0.0);
        let first = self.y[self.segment(0, lo, hi)[0] as usize];
        let mut constant = true;
        for &s in self.segment(0, lo, hi) {
            let v = self.y[s as usize];
            total += v;
            sum_sq += v * v;
            constant &= v == first;
        }
        let leaf = TreeNode::Leaf {
            value: total / n as f64,
            n_samples: n,
        };
        if depth >= self.params.max_depth
            || n < self.params.min_split
            || n < 2 * self.params.min_leaf
            || constant
        {
            return leaf;
        }
        let parent_sse = (sum_sq - total * total / n as f64).max(0.0);
        let Some(split) = self.best_split(lo, hi, total, parent_sse) else {
            return leaf;
        };

        let stride = self.pre.n;
        let mid = lo + split.n_left;
        let f = split.feature;
        for i in lo..hi {
            let s = self.order[f * stride + i] as usize;
            self.goes_left[s] = i < mid;
        }
        for g in 0..self.pre.p {
            let seg = &mut self.order[g * stride + lo..g * stride + hi];
            self.scratch.clear();
            let mut w = 0;
            for i in 0..seg.len() {
                let s = seg[i];
                if self.goes_left[s as usize] {
                    seg[w] = s;
                    w += 1;
                } else {
                    self.scratch.push(s);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
        }
        let left = self.grow(lo, mid, depth + 1);
        let right = self.grow(mid, hi, depth + 1);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

pub(crate) fn check_inputs(x: &FeatureMatrix, y: &[f64]) -> Result<(), ModelError> {
    if x.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteTarget);
    }
    Ok(())
}

/// Grows one tree; `y` is indexed by sample. Inputs are assumed checked.
pub(crate) fn grow_tree(
    pre: &Presorted,
    y: &[f64],
    params: &CartParams,
    sampler: Option<FeatureSampler<'_>>,
) -> TreeNode {
    let n = pre.n;
    if pre.p == 0 {
        return TreeNode::Leaf {
            value: y.iter().sum::<f64>() / n as f64,
            n_samples: n,
        };
    }
    let mut grower = Grower {
        pre,
        y,
        params: *params,
        sampler,
        order: pre.order.clone(),
        goes_left: vec![false; n],
        scratch: Vec::with_capacity(n),
        features: Vec::with_capacity(pre.p),
    };
    grower.grow(0, n, 0)
}

pub fn cart_fit(x: &FeatureMatrix, y: &[f64], params: &CartParams) -> Result<TreeNode, ModelError> {
    check_inputs(x, y)?;
    params.validate()?;
    Ok(grow_tree(&Presorted::new(x), y, params, None))
}
