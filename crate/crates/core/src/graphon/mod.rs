//! Block graphons and the functionals defined on them.

mod cdf;
mod cut;
mod graph;
mod pattern;

pub use cdf::{levy_prokhorov, StepCDF};
pub use cut::{
    cut_metric_upper, cut_metric_upper_with, cut_norm_distance, cut_norm_distance_with_cap,
    AnnealOptions, CutMetricBound, SearchMode, CUT_NORM_BLOCK_CAP, EXACT_PERMUTATION_MAX,
};
pub(crate) use cut::{align_equal_blocks, degree_matching, for_each_permutation};
pub use graph::LabeledGraph;
pub use pattern::{
    homomorphism_count, subgraph_density, subgraph_density_gradient, subgraph_density_with_cap,
    SubgraphPattern, DENSITY_WORK_CAP,
};

use crate::error::{Error, Result};

/// Tolerance used when comparing block boundaries and weight sums.
pub(crate) const PARTITION_TOL: f64 = 1e-12;

/// Default cap on common refinements for the cheap (non cut-norm) operations.
pub const REFINEMENT_CAP: usize = 4096;

/// A symmetric function on `[0,1]²`, constant on the products of finitely
/// many intervals, with values in `[0,1]`.
///
/// Block `i` is the interval of length `weights[i]` that starts at the sum of
/// the preceding weights. Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl StepGraphon {
    /// Validates and builds a graphon. Zero-weight blocks are dropped.
    pub fn new(weights: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if values.len() != k || values.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidGraphon(format!(
                "values must be a {k}x{k} table"
            )));
        }
        let flat = values.into_iter().flatten().collect();
        Self::from_flat(weights, flat)
    }

    /// Same as [`StepGraphon::new`] with a row-major value table.
    pub fn from_flat(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::InvalidGraphon("at least one block is required".into()));
        }
        if values.len() != k * k {
            return Err(Error::InvalidGraphon(format!(
                "expected {} values, got {}",
                k * k,
                values.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidGraphon("block weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PARTITION_TOL {
            return Err(Error::InvalidGraphon(format!("block weights sum to {total}, not 1")));
        }
        for i in 0..k {
            for j in 0..k {
                let v = values[i * k + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidGraphon(format!(
                        "value {v} at ({i}, {j}) is outside [0, 1]"
                    )));
                }
                if (v - values[j * k + i]).abs() > PARTITION_TOL {
                    return Err(Error::InvalidGraphon(format!(
                        "values are not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let keep: Vec<usize> = (0..k).filter(|&i| weights[i] > 0.0).collect();
        let m = keep.len();
        let mut w = Vec::with_capacity(m);
        let mut v = vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            w.push(weights[i]);
            for (b, &j) in keep.iter().enumerate() {
                // exact symmetry after validation
                v[a * m + b] = if a <= b {
                    values[i * k + j]
                } else {
                    values[j * k + i]
                };
            }
        }
        Ok(Self { weights: w, values: v })
    }

    /// `k` equal blocks with the given value table.
    pub fn equal(values: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.len();
        Self::new(vec![1.0 / k as f64; k], values)
    }

    /// `k` equal blocks, value `f(i, j)` on block `(i, j)`. `f` is evaluated for
    /// `i <= j` only and mirrored.
    pub fn equal_from_fn(k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = f(i, j);
                values[i * k + j] = v;
                values[j * k + i] = v;
            }
        }
        Self::from_flat(vec![1.0 / k as f64; k], values)
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::from_flat(vec![1.0], vec![p])
    }

    /// Caller guarantees validity (symmetric, values in range, weights summing to 1).
    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), weights.len() * weights.len());
        Self { weights, values }
    }

    pub fn block_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major value table.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.weights.len() + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.block_count())
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn has_equal_blocks(&self) -> bool {
        let k = self.block_count() as f64;
        self.weights.iter().all(|w| (w - 1.0 / k).abs() <= PARTITION_TOL)
    }

    /// Relabels blocks: block `i` of the result is block `perm[i]` of `self`,
    /// so `W^σ(i, j) = W(σ(i), σ(j))`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.block_count();
        check_permutation(perm, k)?;
        let weights = perm.iter().map(|&p| self.weights[p]).collect();
        let mut values = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                values[i * k + j] = self.value(perm[i], perm[j]);
            }
        }
        Ok(Self { weights, values })
    }

    /// Evaluates the graphon at a point of `[0,1]²`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(self.block_of(x), self.block_of(y))
    }

    fn block_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if x < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }
}

pub(crate) fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    if perm.len() != k {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for {k} blocks",
            perm.len()
        )));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
    }
    Ok(())
}

/// Common refinement of several block partitions of `[0,1]`.
#[derive(Debug, Clone)]
pub(crate) struct Refinement {
    pub weights: Vec<f64>,
    /// `maps[p][t]` is the block of partition `p` containing fine block `t`.
    pub maps: Vec<Vec<usize>>,
}

impl Refinement {
    pub fn len(&self) -> usize {
        self.weights.len()
    }
}

pub(crate) fn refine(partitions: &[&[f64]], cap: usize) -> Result<Refinement> {
    let mut cuts: Vec<f64> = Vec::new();
    for weights in partitions {
        let mut acc = 0.0;
        for w in &weights[..weights.len() - 1] {
            acc += w;
            cuts.push(acc);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut points = vec![0.0];
    for c in cuts {
        if c > PARTITION_TOL && c < 1.0 - PARTITION_TOL && c - points[points.len() - 1] > PARTITION_TOL {
            points.push(c);
        }
    }
    points.push(1.0);
    let m = points.len() - 1;
    if m > cap {
        return Err(Error::BlockCapExceeded { blocks: m, cap });
    }
    let weights: Vec<f64> = points.windows(2).map(|p| p[1] - p[0]).collect();
    let maps = partitions
        .iter()
        .map(|part| {
            let mut map = Vec::with_capacity(m);
            let mut block = 0;
            let mut end = part[0];
            for t in 0..m {
                let mid = 0.5 * (points[t] + points[t + 1]);
                while mid > end && block + 1 < part.len() {
                    block += 1;
                    end += part[block];
                }
                map.push(block);
            }
            map
        })
        .collect();
    Ok(Refinement { weights, maps })
}

/// Values of `w` lifted onto fine blocks of a refinement.
pub(crate) fn lift(w: &StepGraphon, map: &[usize]) -> Vec<f64> {
    let m = map.len();
    let mut out = vec![0.0; m * m];
    for s in 0..m {
        for t in 0..m {
            out[s * m + t] = w.value(map[s], map[t]);
        }
    }
    out
}

/// The empirical graphon: `n` equal blocks, value 1 on edges, 0 elsewhere.
pub fn empirical_graphon(g: &LabeledGraph) -> StepGraphon {
    let n = g.n();
    let mut values = vec![0.0; n * n];
    for (i, j) in g.edges() {
        values[i * n + j] = 1.0;
        values[j * n + i] = 1.0;
    }
    StepGraphon::from_parts_unchecked(vec![1.0 / n as f64; n], values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpNorm {
    L1,
    L2,
}

/// Exact blockwise L1 or L2 distance.
pub fn lp_distance(w1: &StepGraphon, w2: &StepGraphon, p: LpNorm) -> Result<f64> {
    lp_distance_with_cap(w1, w2, p, REFINEMENT_CAP)
}

pub fn lp_distance_with_cap(w1: &StepGraphon, w2: &StepGraphon, p: LpNorm, cap: usize) -> Result<f64> {
    let r = refine(&[w1.weights(), w2.weights()], cap)?;
    let (a, b) = (lift(w1, &r.maps[0]), lift(w2, &r.maps[1]));
    let m = r.len();
    let mut acc = 0.0;
    for s in 0..m {
        for t in 0..m {
            let d = (a[s * m + t] - b[s * m + t]).abs();
            let mass = r.weights[s] * r.weights[t];
            acc += match p {
                LpNorm::L1 => mass * d,
                LpNorm::L2 => mass * d * d,
            };
        }
    }
    Ok(match p {
        LpNorm::L1 => acc,
        LpNorm::L2 => acc.sqrt(),
    })
}

/// Per-block degrees `f_i = Σ_j weights[j] · values[i][j]`.
pub fn degree_function(w: &StepGraphon) -> Vec<f64> {
    let k = w.block_count();
    let equal = w.has_equal_blocks();
    (0..k)
        .map(|i| {
            // one division for equal blocks keeps empirical degrees exactly d_i / n
            let f: f64 = if equal {
                w.values[i * k..(i + 1) * k].iter().sum::<f64>() / k as f64
            } else {
                (0..k).map(|j| w.weights[j] * w.value(i, j)).sum()
            };
            f.clamp(0.0, 1.0)
        })
        .collect()
}

/// `λ ↦ Λ{x : ∫ W(x, y) dy ≤ λ}`.
pub fn degree_distribution(w: &StepGraphon) -> StepCDF {
    StepCDF::from_masses(&degree_function(w), w.weights())
        .expect("block weights form a probability vector")
}

/// True iff `eta < W < 1 - eta` on every block (optionally skipping the
/// diagonal blocks, which are identically 0 for empirical and fitted graphons).
pub fn is_away_from_boundary(w: &StepGraphon, eta: f64, skip_diagonal: bool) -> bool {
    let k = w.block_count();
    (0..k).all(|i| {
        (0..k).all(|j| {
            if skip_diagonal && i == j {
                return true;
            }
            let v = w.value(i, j);
            eta < v && v < 1.0 - eta
        })
    })
}

/// `λ·W1 + (1 − λ)·W2` on the common refinement.
pub fn mix(w1: &StepGraphon, w2: &StepGraphon, lambda: f64) -> Result<StepGraphon> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
    }
    let r = refine(&[w1.weights(), w2.weights()], REFINEMENT_CAP)?;
    let (a, b) = (lift(w1, &r.maps[0]), lift(w2, &r.maps[1]));
    let values = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (lambda * x + (1.0 - lambda) * y).clamp(0.0, 1.0))
        .collect();
    Ok(StepGraphon::from_parts_unchecked(r.weights, values))
}

/// Resamples `w` onto `m` equal blocks by measure-weighted averaging.
/// Exact (no information lost) whenever `w`'s partition is coarser than the
/// target grid.
pub fn regrid(w: &StepGraphon, m: usize) -> Result<StepGraphon> {
    if m == 0 {
        return Err(Error::InvalidArgument("cannot regrid onto zero blocks".into()));
    }
    let k = w.block_count();
    // overlap[a * k + i] = |target block a ∩ source block i|
    let mut overlap = vec![0.0; m * k];
    let mut start = 0.0;
    for (i, wi) in w.weights.iter().enumerate() {
        let end = if i + 1 == k { 1.0 } else { start + wi };
        for a in 0..m {
            let (lo, hi) = (a as f64 / m as f64, (a + 1) as f64 / m as f64);
            let len = hi.min(end) - lo.max(start);
            if len > 0.0 {
                overlap[a * k + i] = len;
            }
        }
        start = end;
    }
    let scale = (m * m) as f64;
    let mut values = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let mut acc = 0.0;
            for i in 0..k {
                let oa = overlap[a * k + i];
                if oa == 0.0 {
                    continue;
                }
                for j in 0..k {
                    acc += oa * overlap[b * k + j] * w.value(i, j);
                }
            }
            let v = (acc * scale).clamp(0.0, 1.0);
            values[a * m + b] = v;
            values[b * m + a] = v;
        }
    }
    Ok(StepGraphon::from_parts_unchecked(vec![1.0 / m as f64; m], values))
}
