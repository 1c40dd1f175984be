//! Slow, direct reference implementations used as test oracles.
//! Nothing here calls into the library's numeric code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use fuselearn::models::{CartParams, TreeNode};

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= rel * scale.max(1e-3) || (a - b).abs() < 1e-12
}

fn mean(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

/// Type-7 quantile by explicit rank interpolation.
fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut s = xs.to_vec();
    // Insertion sort keeps the oracle independent of the library's sort call.
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    let pos = p * (s.len() as f64 - 1.0);
    let below = pos.floor() as usize;
    let frac = pos - below as f64;
    if below + 1 < s.len() {
        s[below] * (1.0 - frac) + s[below + 1] * frac
    } else {
        s[below]
    }
}

fn var_n1(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// The statistical battery, in the library's column order.
pub fn stats(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = var_n1(xs);
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let q1 = quantile(xs, 0.25);
    let q3 = quantile(xs, 0.75);
    let moment = |k: i32| xs.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    let skew = if m2 > 0.0 { m3 / (m2 * m2.sqrt()) } else { 0.0 };
    let kurt = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let energy: f64 = xs.iter().map(|x| x * x).sum();
    let mad = xs.iter().map(|x| (x - m).abs()).sum::<f64>() / n;
    let mut crossings = 0.0;
    let mut lag = 0.0;
    let mut diffs = Vec::new();
    for i in 1..xs.len() {
        let (a, b) = (xs[i - 1] - m, xs[i] - m);
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            crossings += 1.0;
        }
        lag += a * b;
        diffs.push(xs[i] - xs[i - 1]);
    }
    let zcr = if xs.len() > 1 { crossings / (n - 1.0) } else { 0.0 };
    let (dmean, dabs) = if diffs.is_empty() {
        (0.0, 0.0)
    } else {
        (mean(&diffs), diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64)
    };
    let acf = if m2 > 0.0 { lag / (m2 * n) } else { 0.0 };
    vec![
        n,
        m,
        var.sqrt(),
        var,
        min,
        max,
        max - min,
        quantile(xs, 0.5),
        q1,
        q3,
        q3 - q1,
        skew,
        kurt,
        (energy / n).sqrt(),
        mad,
        zcr,
        energy,
        dmean,
        var_n1(&diffs).sqrt(),
        dabs,
        acf,
    ]
}

/// Haar analysis by explicit basis inner products at each level, with the
/// odd tail duplicated.
pub fn haar(xs: &[f64], levels: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let r = 0.5f64.sqrt();
    let mut approx = xs.to_vec();
    let mut details = Vec::new();
    for _ in 0..levels {
        if approx.len() < 2 {
            break;
        }
        let mut padded = approx.clone();
        if padded.len() % 2 == 1 {
            padded.push(*padded.last().unwrap());
        }
        let mut a = Vec::new();
        let mut d = Vec::new();
        for pair in padded.chunks(2) {
            a.push(r * pair[0] + r * pair[1]);
            d.push(r * pair[0] - r * pair[1]);
        }
        details.push(d);
        approx = a;
    }
    (approx, details)
}

/// Textbook O(n^2) DFT, returned as (re, im).
pub fn dft(xs: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len();
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, x) in xs.iter().enumerate() {
                let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            (re, im)
        })
        .collect()
}

pub fn one_sided_power(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    dft(xs)
        .iter()
        .take(xs.len() / 2 + 1)
        .map(|(re, im)| (re * re + im * im) / n)
        .collect()
}

/// Spectral features in the library's column order, from the direct DFT.
pub fn spectral(xs: &[f64], rate: f64) -> Vec<f64> {
    let p = one_sided_power(xs);
    let n = xs.len() as f64;
    let f = |k: usize| k as f64 * rate / n;
    let total: f64 = p.iter().sum();
    let mut ac: f64 = p[1..].iter().sum();
    // Power this small relative to the total is roundoff, not signal.
    let floor = 1e-12 * total;
    if ac <= floor {
        ac = 0.0;
    }
    let mut dom = 0;
    if ac > 0.0 {
        let mut peak = 0.0;
        for k in 1..p.len() {
            if p[k] > peak {
                peak = p[k];
            }
        }
        for k in 1..p.len() {
            if p[k] >= peak - floor {
                dom = k;
                break;
            }
        }
    }
    let mut centroid = 0.0;
    let mut entropy = 0.0;
    let mut rolloff = 0.0;
    let mut bands = [0.0; 4];
    if ac > 0.0 {
        for k in 1..p.len() {
            centroid += f(k) * p[k] / ac;
            let q = p[k] / ac;
            if q > 0.0 {
                entropy -= q * q.ln() / 2f64.ln();
            }
        }
        for k in 1..p.len() {
            let cum: f64 = p[1..=k].iter().sum();
            if cum >= 0.85 * ac {
                rolloff = f(k);
                break;
            }
        }
        let ny = rate / 2.0;
        for k in 1..p.len() {
            let b = if f(k) <= ny / 8.0 {
                0
            } else if f(k) <= ny / 4.0 {
                1
            } else if f(k) <= ny / 2.0 {
                2
            } else {
                3
            };
            bands[b] += p[k];
        }
    }
    vec![
        total,
        p[0],
        f(dom),
        if dom == 0 { 0.0 } else { p[dom] },
        centroid,
        entropy,
        rolloff,
        bands[0],
        bands[1],
        bands[2],
        bands[3],
    ]
}

pub fn r2(y: &[f64], pred: &[f64]) -> f64 {
    let m = mean(y);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..y.len() {
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += (y[i] - m) * (y[i] - m);
    }
    1.0 - ss_res / ss_tot
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for i in 0..a.len() {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn sse(ys: &[f64]) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let m = mean(ys);
    ys.iter().map(|y| (y - m) * (y - m)).sum()
}

/// Regression tree by exhaustive search: every feature, every midpoint
/// between distinct sorted values, SSE recomputed from scratch per candidate.
/// Scanning (feature, threshold) ascending with a strict improvement test
/// makes the lowest feature and then the lowest threshold win ties.
pub fn cart(rows: &[Vec<f64>], ys: &[f64], params: &CartParams, depth: usize) -> TreeNode {
    let leaf = TreeNode::Leaf {
        value: mean(ys),
        n_samples: ys.len(),
    };
    let n = ys.len();
    let parent = sse(ys);
    if depth >= params.max_depth
        || n < params.min_split
        || n < 2 * params.min_leaf
        || ys.iter().all(|y| *y == ys[0])
    {
        return leaf;
    }
    let tol = 1e-10 * parent;
    let mut best: Option<(f64, usize, f64)> = None;
    for j in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let mut t = (w[0] + w[1]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let left: Vec<f64> = (0..n).filter(|&i| rows[i][j] <= t).map(|i| ys[i]).collect();
            let right: Vec<f64> = (0..n).filter(|&i| rows[i][j] > t).map(|i| ys[i]).collect();
            if left.len() < params.min_leaf || right.len() < params.min_leaf {
                continue;
            }
            let gain = parent - sse(&left) - sse(&right);
            if best.is_none_or(|(g, _, _)| gain > g + tol) {
                best = Some((gain, j, t));
            }
        }
    }
    match best {
        Some((gain, j, t)) if gain > params.min_impurity_decrease && gain > tol => {
            let (mut lr, mut ly, mut rr, mut ry) = (vec![], vec![], vec![], vec![]);
            for i in 0..n {
                if rows[i][j] <= t {
                    lr.push(rows[i].clone());
                    ly.push(ys[i]);
                } else {
                    rr.push(rows[i].clone());
                    ry.push(ys[i]);
                }
            }
            TreeNode::Split {
                feature: j,
                threshold: t,
                left: Box::new(cart(&lr, &ly, params, depth + 1)),
                right: Box::new(cart(&rr, &ry, params, depth + 1)),
            }
        }
        _ => leaf,
    }
}

/// Structural comparison with values matched to `rel`.
pub fn same_tree(a: &TreeNode, b: &TreeNode, rel: f64) -> bool {
    match (a, b) {
        (
            TreeNode::Leaf {
                value: va,
                n_samples: na,
            },
            TreeNode::Leaf {
                value: vb,
                n_samples: nb,
            },
        ) => na == nb && close(*va, *vb, rel),
        (
            TreeNode::Split {
                feature: fa,
                threshold: ta,
                left: la,
                right: ra,
            },
            TreeNode::Split {
                feature: fb,
                threshold: tb,
                left: lb,
                right: rb,
            },
        ) => fa == fb && close(*ta, *tb, rel) && same_tree(la, lb, rel) && same_tree(ra, rb, rel),
        _ => false,
    }
}

/// Small deterministic generator so oracle inputs need no shared RNG code.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Values on a coarse grid, to force ties.
    pub fn grid(&mut self, levels: u32) -> f64 {
        (self.next_f64() * levels as f64).floor()
    }

    pub fn series(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-5.0, 5.0)).collect()
    }
}
