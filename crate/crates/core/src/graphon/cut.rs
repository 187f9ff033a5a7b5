//! Cut distance `d_□` and permutation upper bounds on the cut metric `δ_□`.
//!
//! For step graphons `∫_{S×T}(W1 − W2)` is bilinear in the fractions of each
//! fine block covered by `S` and `T`, so the supremum is attained with every
//! block either fully in or fully out. For a fixed `S` the best `T` collects
//! every block whose column sum has the right sign, so an exhaustive scan over
//! `S` (in Gray-code order, one column update per step) is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lift, refine, regrid, StepGraphon};
use crate::error::{Error, Result};

pub const CUT_NORM_BLOCK_CAP: usize = 24;
/// Largest block count for which all permutations are enumerated.
pub const EXACT_PERMUTATION_MAX: usize = 8;

pub fn cut_norm_distance(w1: &StepGraphon, w2: &StepGraphon) -> Result<f64> {
    cut_norm_distance_with_cap(w1, w2, CUT_NORM_BLOCK_CAP)
}

pub fn cut_norm_distance_with_cap(w1: &StepGraphon, w2: &StepGraphon, cap: usize) -> Result<f64> {
    let r = refine(&[w1.weights(), w2.weights()], cap)?;
    let (a, b) = (lift(w1, &r.maps[0]), lift(w2, &r.maps[1]));
    let m = r.len();
    let mut mass = vec![0.0; m * m];
    for s in 0..m {
        for t in 0..m {
            mass[s * m + t] = r.weights[s] * r.weights[t] * (a[s * m + t] - b[s * m + t]);
        }
    }
    Ok(cut_norm_of_masses(&mass, m))
}

/// `max_{S,T} |Σ_{s∈S, t∈T} mass[s][t]|` for a symmetric `m×m` table.
pub(crate) fn cut_norm_of_masses(mass: &[f64], m: usize) -> f64 {
    let mut col = vec![0.0; m];
    let mut best = 0.0_f64;
    let mut in_set = vec![false; m];
    for step in 1_u64..(1_u64 << m) {
        let flip = step.trailing_zeros() as usize;
        let sign = if in_set[flip] { -1.0 } else { 1.0 };
        in_set[flip] = !in_set[flip];
        let row = &mass[flip * m..(flip + 1) * m];
        let (mut pos, mut neg) = (0.0, 0.0);
        for (c, &x) in col.iter_mut().zip(row) {
            *c += sign * x;
            if *c > 0.0 {
                pos += *c;
            } else {
                neg -= *c;
            }
        }
        best = best.max(pos).max(neg);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Enumerate every block permutation.
    Exact,
    /// Seeded simulated annealing; the result is an upper bound on the
    /// permutation minimum.
    Anneal,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AnnealOptions {
    pub seed: u64,
    pub iterations: usize,
    pub start_temperature: f64,
    pub end_temperature: f64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { seed: 0x5eed_cafe, iterations: 20_000, start_temperature: 1e-2, end_temperature: 1e-6 }
    }
}

/// `d_□(W1, W2^φ)` minimized over the block permutations that were examined.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CutMetricBound {
    pub value: f64,
    /// Block permutation `φ` of the (aligned) second argument achieving `value`.
    pub permutation: Vec<usize>,
    /// True if every permutation was examined.
    pub exact: bool,
}

/// Upper bound on `δ_□(W1, W2)` by minimizing `d_□(W1, W2^φ)` over block
/// permutations. Both arguments are first aligned on a common equal-block grid.
pub fn cut_metric_upper(w1: &StepGraphon, w2: &StepGraphon, mode: SearchMode) -> Result<CutMetricBound> {
    cut_metric_upper_with(w1, w2, mode, &AnnealOptions::default())
}

pub fn cut_metric_upper_with(
    w1: &StepGraphon,
    w2: &StepGraphon,
    mode: SearchMode,
    opts: &AnnealOptions,
) -> Result<CutMetricBound> {
    let (a, b) = align_equal_blocks(w1, w2, CUT_NORM_BLOCK_CAP)?;
    let k = a.block_count();
    match mode {
        SearchMode::Exact => {
            if k > EXACT_PERMUTATION_MAX {
                return Err(Error::ExactModeTooLarge { blocks: k, max: EXACT_PERMUTATION_MAX });
            }
            let mut best = CutMetricBound { value: f64::INFINITY, permutation: vec![], exact: true };
            for_each_permutation(k, |perm| {
                let d = cut_norm_equal(&a, &b, perm);
                if d < best.value {
                    best.value = d;
                    best.permutation = perm.to_vec();
                }
            });
            Ok(best)
        }
        SearchMode::Anneal => Ok(anneal_cut(&a, &b, opts)),
    }
}

/// Puts two graphons on the same equal-block grid: the least common multiple
/// of the block counts when both are equal-block (exact), the larger block
/// count otherwise (averaging).
pub(crate) fn align_equal_blocks(w1: &StepGraphon, w2: &StepGraphon, cap: usize) -> Result<(StepGraphon, StepGraphon)> {
    let (k1, k2) = (w1.block_count(), w2.block_count());
    if k1 == k2 && w1.has_equal_blocks() && w2.has_equal_blocks() {
        return Ok((w1.clone(), w2.clone()));
    }
    let m = if w1.has_equal_blocks() && w2.has_equal_blocks() {
        k1 / gcd(k1, k2) * k2
    } else {
        k1.max(k2)
    };
    if m > cap {
        return Err(Error::BlockCountMismatch { left: k1, right: k2 });
    }
    Ok((regrid(w1, m)?, regrid(w2, m)?))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `d_□(a, b^perm)` for equal-block graphons with the same block count.
fn cut_norm_equal(a: &StepGraphon, b: &StepGraphon, perm: &[usize]) -> f64 {
    let k = a.block_count();
    let w = 1.0 / (k * k) as f64;
    let mut mass = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            mass[i * k + j] = w * (a.value(i, j) - b.value(perm[i], perm[j]));
        }
    }
    cut_norm_of_masses(&mass, k)
}

fn l2_equal(a: &StepGraphon, b: &StepGraphon, perm: &[usize]) -> f64 {
    let k = a.block_count();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            let d = a.value(i, j) - b.value(perm[i], perm[j]);
            acc += d * d;
        }
    }
    acc / (k * k) as f64
}

/// Heap's algorithm; the identity is visited first.
pub(crate) fn for_each_permutation(k: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0; k];
    visit(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Matches blocks of `b` to blocks of `a` by rank of their degrees.
pub(crate) fn degree_matching(a: &StepGraphon, b: &StepGraphon) -> Vec<usize> {
    let da = super::degree_function(a);
    let db = super::degree_function(b);
    let k = da.len();
    let mut ra: Vec<usize> = (0..k).collect();
    let mut rb: Vec<usize> = (0..k).collect();
    ra.sort_by(|&x, &y| da[x].total_cmp(&da[y]));
    rb.sort_by(|&x, &y| db[x].total_cmp(&db[y]));
    let mut perm = vec![0; k];
    for (&i, &j) in ra.iter().zip(&rb) {
        perm[i] = j;
    }
    perm
}

/// Simulated annealing over swaps, driven by the cheap L2 objective; the
/// cut norm is evaluated exactly on a few candidates and polished by
/// pairwise-swap hill climbing when the block count is small.
fn anneal_cut(a: &StepGraphon, b: &StepGraphon, opts: &AnnealOptions) -> CutMetricBound {
    let k = a.block_count();
    let identity: Vec<usize> = (0..k).collect();
    let mut candidates = vec![identity, degree_matching(a, b)];
    if k > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut perm = candidates[1].clone();
        let mut cur = l2_equal(a, b, &perm);
        let mut best = (cur, perm.clone());
        let ratio = (opts.end_temperature / opts.start_temperature).ln();
        for it in 0..opts.iterations {
            let temp = opts.start_temperature * (ratio * it as f64 / opts.iterations as f64).exp();
            let i = rng.gen_range(0..k);
            let j = rng.gen_range(0..k);
            if i == j {
                continue;
            }
            perm.swap(i, j);
            let next = l2_equal(a, b, &perm);
            if next <= cur || rng.gen::<f64>() < ((cur - next) / temp).exp() {
                cur = next;
                if cur < best.0 {
                    best = (cur, perm.clone());
                }
            } else {
                perm.swap(i, j);
            }
        }
        candidates.push(best.1);
    }
    let mut best = CutMetricBound { value: f64::INFINITY, permutation: vec![], exact: false };
    for perm in candidates {
        let d = cut_norm_equal(a, b, &perm);
        if d < best.value {
            best.value = d;
            best.permutation = perm;
        }
    }
    if k <= 12 {
        let mut improved = true;
        while improved && best.value > 0.0 {
            improved = false;
            for i in 0..k {
                for j in i + 1..k {
                    let mut p = best.permutation.clone();
                    p.swap(i, j);
                    let d = cut_norm_equal(a, b, &p);
                    if d < best.value - 1e-15 {
                        best.value = d;
                        best.permutation = p;
                        improved = true;
                    }
                }
            }
        }
    }
    best
}
