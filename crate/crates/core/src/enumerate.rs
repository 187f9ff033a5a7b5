//! Exact enumeration of labeled graphs with a given degree sequence.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::degree::{erdos_gallai, erdos_gallai_sorted, DegreeSequence};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::graphon::LabeledGraph;
use crate::sampling::{beta_model_log_likelihood_closed_form, default_burn_in, default_thin, RejectionSampler, SwitchChain};

/// Largest `n` for which graphs are listed one by one.
pub const ENUMERATION_MAX_N: usize = 12;
/// Largest `n` for [`count_graphs`].
pub const COUNT_MAX_N: usize = 16;
/// Largest `n` for which [`verify_deg_partition_identity`] scans every graph.
pub const EXHAUSTIVE_MAX_N: usize = 7;

fn check_enumerable(d: &DegreeSequence) -> Result<()> {
    if d.n() > ENUMERATION_MAX_N {
        return Err(Error::TooLarge { n: d.n(), cap: ENUMERATION_MAX_N });
    }
    Ok(())
}

/// Depth-first search over neighbourhoods: vertex `i` picks its remaining
/// neighbours among the later vertices, and a branch is cut as soon as the
/// residual degrees of the later vertices fail Erdős–Gallai.
struct Search<'a, F: FnMut(&LabeledGraph)> {
    n: usize,
    rem: Vec<usize>,
    g: LabeledGraph,
    visit: &'a mut F,
    scratch: Vec<usize>,
}

impl<F: FnMut(&LabeledGraph)> Search<'_, F> {
    fn vertex(&mut self, i: usize) {
        if i == self.n {
            (self.visit)(&self.g);
            return;
        }
        let need = self.rem[i];
        let cands: Vec<usize> = (i + 1..self.n).filter(|&j| self.rem[j] > 0).collect();
        if need > cands.len() {
            return;
        }
        self.rem[i] = 0;
        self.choose(i, &cands, 0, need);
        self.rem[i] = need;
    }

    fn choose(&mut self, i: usize, cands: &[usize], from: usize, need: usize) {
        if need == 0 {
            if self.tail_graphical(i + 1) {
                self.vertex(i + 1);
            }
            return;
        }
        for idx in from..=cands.len() - need {
            let j = cands[idx];
            self.rem[j] -= 1;
            self.g.add_edge(i, j);
            self.choose(i, cands, idx + 1, need - 1);
            self.g.remove_edge(i, j);
            self.rem[j] += 1;
        }
    }

    fn tail_graphical(&mut self, from: usize) -> bool {
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.rem[from..]);
        let m = self.scratch.len();
        if self.scratch.iter().any(|&r| r >= m.max(1)) && m > 0 {
            return false;
        }
        self.scratch.sort_unstable_by(|a, b| b.cmp(a));
        erdos_gallai_sorted(&self.scratch)
    }
}

/// Calls `visit` once for every labeled graph with degree sequence `d`;
/// returns how many there were.
pub fn enumerate_graphs<F: FnMut(&LabeledGraph)>(d: &DegreeSequence, mut visit: F) -> Result<u64> {
    check_enumerable(d)?;
    let mut count = 0u64;
    let mut counted = |g: &LabeledGraph| {
        count += 1;
        visit(g);
    };
    if erdos_gallai(d) {
        let mut s = Search {
            n: d.n(),
            rem: d.as_slice().to_vec(),
            g: LabeledGraph::new(d.n()),
            visit: &mut counted,
            scratch: Vec::new(),
        };
        s.vertex(0);
    }
    Ok(count)
}

pub fn collect_graphs(d: &DegreeSequence) -> Result<Vec<LabeledGraph>> {
    let mut out = Vec::new();
    enumerate_graphs(d, |g| out.push(g.clone()))?;
    Ok(out)
}

/// Folds over all realizations of `d`, splitting the search on the
/// neighbourhood of vertex 0. Partial results are merged in a fixed order, so
/// the outcome does not depend on scheduling.
pub fn par_fold<A, I, F, M>(d: &DegreeSequence, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &LabeledGraph) + Sync,
    M: Fn(A, A) -> A,
{
    check_enumerable(d)?;
    let n = d.n();
    if !erdos_gallai(d) || n < 2 {
        let mut acc = init();
        if erdos_gallai(d) {
            fold(&mut acc, &LabeledGraph::new(n));
        }
        return Ok(acc);
    }
    // all neighbourhoods of vertex 0
    let need = d.as_slice()[0];
    let cands: Vec<usize> = (1..n).filter(|&j| d.as_slice()[j] > 0).collect();
    let mut firsts: Vec<u32> = Vec::new();
    if need <= cands.len() {
        for mask in 0u32..1 << cands.len() {
            if mask.count_ones() as usize == need {
                firsts.push(mask);
            }
        }
    }
    let parts: Vec<A> = firsts
        .par_iter()
        .map(|&mask| {
            let mut acc = init();
            let mut rem = d.as_slice().to_vec();
            rem[0] = 0;
            let mut g = LabeledGraph::new(n);
            for (b, &j) in cands.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    rem[j] -= 1;
                    g.add_edge(0, j);
                }
            }
            let mut visit = |g: &LabeledGraph| fold(&mut acc, g);
            let mut s = Search { n, rem, g, visit: &mut visit, scratch: Vec::new() };
            if s.tail_graphical(1) {
                s.vertex(1);
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(init(), merge))
}

/// `|G_{n,d}|` by parallel enumeration.
pub fn count_by_enumeration(d: &DegreeSequence) -> Result<u64> {
    par_fold(d, || 0u64, |c, _| *c += 1, |a, b| a + b)
}

/// `|G_{n,d}|` by dynamic programming over residual degree multisets: the
/// vertex of largest residual degree picks how many neighbours it takes from
/// each class of equal residual degree.
pub fn count_graphs(d: &DegreeSequence) -> Result<u128> {
    if d.n() > COUNT_MAX_N {
        return Err(Error::TooLarge { n: d.n(), cap: COUNT_MAX_N });
    }
    if !erdos_gallai(d) {
        return Ok(0);
    }
    let mut memo = HashMap::new();
    let key: Vec<u8> = d.sorted_desc().into_iter().filter(|&x| x > 0).map(|x| x as u8).collect();
    count_rec(key, &mut memo).ok_or(Error::TooLarge { n: d.n(), cap: COUNT_MAX_N })
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// `key`: sorted non-increasing positive residual degrees of the vertices that
/// still have neighbours to pick.
fn count_rec(key: Vec<u8>, memo: &mut HashMap<Vec<u8>, u128>) -> Option<u128> {
    if key.is_empty() {
        return Some(1);
    }
    if let Some(&v) = memo.get(&key) {
        return Some(v);
    }
    let r = key[0] as usize;
    let rest = &key[1..];
    // classes of equal residual degree among the remaining positive vertices;
    // vertices of residual 0 cannot be picked
    let mut classes: Vec<(u8, usize)> = Vec::new();
    for &x in rest {
        match classes.last_mut() {
            Some((v, m)) if *v == x => *m += 1,
            _ => classes.push((x, 1)),
        }
    }
    let mut total: u128 = 0;
    let mut picks = vec![0usize; classes.len()];
    count_choices(&classes, 0, r, &mut picks, &mut |picks| {
        let mut ways: u128 = 1;
        let mut next: Vec<u8> = Vec::with_capacity(rest.len());
        for (&(v, m), &c) in classes.iter().zip(picks.iter()) {
            ways = ways.checked_mul(binomial(m, c))?;
            next.extend(std::iter::repeat(v).take(m - c));
            if v > 1 {
                next.extend(std::iter::repeat(v - 1).take(c));
            }
        }
        next.sort_unstable_by(|a, b| b.cmp(a));
        let sub = count_rec(next, memo)?;
        total = total.checked_add(ways.checked_mul(sub)?)?;
        Some(())
    })?;
    memo.insert(key, total);
    Some(total)
}

fn count_choices(
    classes: &[(u8, usize)],
    idx: usize,
    left: usize,
    picks: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> Option<()>,
) -> Option<()> {
    if idx == classes.len() {
        return if left == 0 { f(picks) } else { Some(()) };
    }
    let avail: usize = classes[idx..].iter().map(|c| c.1).sum();
    if avail < left {
        return Some(());
    }
    for c in 0..=classes[idx].1.min(left) {
        picks[idx] = c;
        count_choices(classes, idx + 1, left - c, picks, f)?;
    }
    picks[idx] = 0;
    Some(())
}

/// `N_{n,τ}(d, r) = #{G ∈ G_{n,d} : τ(G) ≥ r}`.
pub fn count_with_functional(d: &DegreeSequence, tau: &dyn Functional, r: f64) -> Result<u64> {
    let res = par_fold(
        d,
        || Ok(0u64),
        |acc: &mut Result<u64>, g| {
            if let Ok(c) = acc {
                match tau.graph_value(g) {
                    Ok(v) if v >= r => *c += 1,
                    Ok(_) => {}
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |a, b| Ok(a? + b?),
    )?;
    res
}

/// Running `log Σ e^{x}` with a max shift.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub fn merge(self, other: Self) -> Self {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        let max = self.max.max(other.max);
        Self { max, sum: self.sum * (self.max - max).exp() + other.sum * (other.max - max).exp() }
    }

    pub fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// `Z_{n,τ}(d) = (1/n²) log Σ_{G ∈ G_{n,d}} e^{n² τ(G)}`.
pub fn partition_function(d: &DegreeSequence, tau: &dyn Functional) -> Result<f64> {
    let n2 = (d.n() * d.n()) as f64;
    let res = par_fold(
        d,
        || Ok(LogSumExp::new()),
        |acc: &mut Result<LogSumExp>, g| {
            if let Ok(l) = acc {
                match tau.graph_value(g) {
                    Ok(v) => l.push(n2 * v),
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |a, b| Ok(a?.merge(b?)),
    )??;
    if res.max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(res.value() / n2)
}

/// Both sides of the finite-`n` identity
/// `Σ_{G: deg G = d} P_β̂(G) = |G_{n,d}| e^{Σ β̂_i d_i} / Π_{i<j} (1 + e^{β̂_i+β̂_j})`.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub count: u128,
    /// Brute-force sum of β-model probabilities.
    pub lhs: f64,
    pub rhs: f64,
    pub relative_residual: f64,
    /// β̂ on the vertices whose neighbourhoods are not forced.
    pub beta: Option<Vec<f64>>,
    pub forced_vertices: usize,
    /// `(1/n²) log |G_{n,d}|` recovered from the identity as `log LHS − log P_β̂(G)`.
    pub log_count_rate_from_identity: f64,
    /// `exhaustive` (every graph on `n` vertices scanned) or `enumeration`.
    pub method: &'static str,
}

/// Checks the identity for an enumerable `d`.
///
/// Vertices of degree 0 or `n − 1` (after peeling such vertices repeatedly)
/// have forced neighbourhoods, the `β = ±∞` limit of the model; the closed
/// form is applied to the remaining vertices and the forced pairs contribute
/// probability one.
pub fn verify_deg_partition_identity(d: &DegreeSequence) -> Result<IdentityReport> {
    check_enumerable(d)?;
    let n = d.n();
    let model = RejectionSampler::new(d)?;
    let p = model.edge_probabilities();
    let prob = |g: &LabeledGraph| -> f64 {
        let mut acc = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                acc *= if g.has_edge(i, j) { p[i * n + j] } else { 1.0 - p[i * n + j] };
            }
        }
        acc
    };
    let (lhs, method) = if n <= EXHAUSTIVE_MAX_N {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let target = d.as_slice();
        let lhs: f64 = (0u32..1 << pairs.len())
            .into_par_iter()
            .map(|mask| {
                let mut deg = [0usize; EXHAUSTIVE_MAX_N];
                for (b, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        deg[i] += 1;
                        deg[j] += 1;
                    }
                }
                if deg[..n] != *target {
                    return 0.0;
                }
                let mut acc = 1.0;
                for (b, &(i, j)) in pairs.iter().enumerate() {
                    acc *= if mask >> b & 1 == 1 { p[i * n + j] } else { 1.0 - p[i * n + j] };
                }
                acc
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .sum();
        (lhs, "exhaustive")
    } else {
        (par_fold(d, || 0.0, |acc, g| *acc += prob(g), |a, b| a + b)?, "enumeration")
    };
    let count = count_graphs(d)?;
    let log_single = match model.beta() {
        Some(b) => {
            let degs: Vec<usize> = model.free_vertices().iter().map(|&v| residual_degree(d, &model, v)).collect();
            beta_model_log_likelihood_closed_form(b, &degs)
        }
        None => 0.0,
    };
    let rhs = count as f64 * log_single.exp();
    let relative_residual = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs.abs() };
    Ok(IdentityReport {
        n,
        count,
        lhs,
        rhs,
        relative_residual,
        beta: model.beta().map(|b| b.beta.clone()),
        forced_vertices: n - model.free_vertices().len(),
        log_count_rate_from_identity: (lhs.ln() - log_single) / (n * n) as f64,
        method,
    })
}

/// Degree of a free vertex inside the free vertex set.
fn residual_degree(d: &DegreeSequence, model: &RejectionSampler, v: usize) -> usize {
    let n = d.n();
    let p = model.edge_probabilities();
    let forced = (0..n).filter(|&u| u != v && !model.free_vertices().contains(&u) && p[v * n + u] == 1.0).count();
    d.as_slice()[v] - forced
}

/// Result of [`ldp_rate_estimate`].
#[derive(Debug, Clone, Serialize)]
pub struct LdpEstimate {
    /// `(1/n²) log P(τ ≥ r)` under the uniform law on `G_{n,d}`.
    pub estimate: f64,
    /// Interval for the estimate (95% Wilson interval when sampled, the
    /// estimate itself when exact).
    pub lower: f64,
    pub upper: f64,
    pub hits: u64,
    pub samples: u64,
    pub exact: bool,
}

/// Enumerate exactly when `|G_{n,d}|` is at most this.
pub const EXACT_COUNT_LIMIT: u128 = 20_000_000;

const WILSON_Z: f64 = 1.959_963_984_540_054;

fn wilson(hits: u64, total: u64) -> (f64, f64) {
    let (k, n, z) = (hits as f64, total as f64, WILSON_Z);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Rate of the event `τ ≥ r` at this `n`: exact by enumeration when `d` is
/// small enough, otherwise Monte Carlo over `samples` states of the switch
/// chain (default burn-in and thinning).
pub fn ldp_rate_estimate(d: &DegreeSequence, tau: &dyn Functional, r: f64, samples: u64, seed: u64) -> Result<LdpEstimate> {
    let n2 = (d.n() * d.n()) as f64;
    let small = d.n() <= ENUMERATION_MAX_N && count_graphs(d).map(|c| c <= EXACT_COUNT_LIMIT).unwrap_or(false);
    if small {
        let total = count_by_enumeration(d)?;
        if total == 0 {
            return Err(Error::NotGraphical);
        }
        let hits = count_with_functional(d, tau, r)?;
        if hits == 0 {
            return Err(Error::ZeroHits { samples: total, upper_bound: f64::NEG_INFINITY });
        }
        let est = (hits as f64 / total as f64).ln() / n2;
        return Ok(LdpEstimate { estimate: est, lower: est, upper: est, hits, samples: total, exact: true });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = SwitchChain::new(d)?;
    chain.run(&mut rng, default_burn_in(d));
    let thin = default_thin(d);
    let mut hits = 0u64;
    for s in 0..samples {
        if s > 0 {
            chain.run(&mut rng, thin);
        }
        if tau.graph_value(chain.graph())? >= r {
            hits += 1;
        }
    }
    let (lo, hi) = wilson(hits, samples);
    if hits == 0 {
        return Err(Error::ZeroHits { samples, upper_bound: hi.ln() / n2 });
    }
    Ok(LdpEstimate {
        estimate: (hits as f64 / samples as f64).ln() / n2,
        lower: lo.ln() / n2,
        upper: hi.ln() / n2,
        hits,
        samples,
        exact: false,
    })
}
