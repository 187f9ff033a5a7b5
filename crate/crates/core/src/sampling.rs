//! Inhomogeneous random graphs and exactly uniform graphs with given degrees.

use rand::Rng;

use crate::degree::{erdos_gallai, fitted_graphon, havel_hakimi, solve_beta, BetaOptions, BetaVector, DegreeSequence};
use crate::error::{Error, Result};
use crate::graphon::{regrid, LabeledGraph, StepGraphon};

/// Independent edges, `P(ij) = W0(i, j)` on `n` equal blocks (`W0` is
/// regridded first if needed). Loops are never sampled.
pub fn sample_irg<R: Rng + ?Sized>(w0: &StepGraphon, n: usize, rng: &mut R) -> Result<LabeledGraph> {
    let w = if w0.block_count() == n && w0.has_equal_blocks() { w0.clone() } else { regrid(w0, n)? };
    let mut g = LabeledGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < w.value(i, j) {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Rejection sampler from the fitted β-model. Every graph with degree
/// sequence `d` has the same β-model probability, so the accepted graph is
/// uniform on the realizations of `d`.
///
/// Vertices of degree 0 or `n − 1` (repeatedly, after removing them) have
/// forced neighbourhoods; they are fixed and the β-model is fitted on the rest.
pub struct RejectionSampler {
    d: Vec<usize>,
    p: Vec<f64>,
    beta: Option<BetaVector>,
    free: Vec<usize>,
}

impl RejectionSampler {
    pub fn new(d: &DegreeSequence) -> Result<Self> {
        if !erdos_gallai(d) {
            return Err(Error::NotGraphical);
        }
        let n = d.n();
        let mut p = vec![0.0; n * n];
        let mut rem: Vec<usize> = d.as_slice().to_vec();
        let mut free: Vec<usize> = (0..n).collect();
        loop {
            let m = free.len();
            if let Some(pos) = free.iter().position(|&v| rem[v] == 0) {
                free.remove(pos);
            } else if let Some(pos) = free.iter().position(|&v| rem[v] + 1 == m) {
                let v = free.remove(pos);
                for &u in &free {
                    p[v * n + u] = 1.0;
                    p[u * n + v] = 1.0;
                    rem[u] = rem[u].checked_sub(1).ok_or(Error::NotGraphical)?;
                }
            } else {
                break;
            }
        }
        let beta = if free.is_empty() {
            None
        } else {
            let sub = DegreeSequence::new(free.iter().map(|&v| rem[v]).collect())?;
            let b = solve_beta(&sub, &BetaOptions::default())?;
            let w = fitted_graphon(&b);
            let m = free.len();
            for (a, &u) in free.iter().enumerate() {
                for (c, &v) in free.iter().enumerate() {
                    p[u * n + v] = w.values()[a * m + c];
                }
            }
            Some(b)
        };
        Ok(Self { d: d.as_slice().to_vec(), p, beta, free })
    }

    /// The β fitted on the vertices whose neighbourhoods are not forced.
    pub fn beta(&self) -> Option<&BetaVector> {
        self.beta.as_ref()
    }

    /// Vertices covered by [`RejectionSampler::beta`], in order.
    pub fn free_vertices(&self) -> &[usize] {
        &self.free
    }

    /// Edge probabilities, row-major.
    pub fn edge_probabilities(&self) -> &[f64] {
        &self.p
    }

    /// One β-model draw, rejected as soon as some vertex's degree is settled
    /// and wrong. Returns the graph when accepted.
    pub fn try_once<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<LabeledGraph> {
        let n = self.d.len();
        let mut g = LabeledGraph::new(n);
        let mut deg = vec![0usize; n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < self.p[i * n + j] {
                    g.add_edge(i, j);
                    deg[i] += 1;
                    deg[j] += 1;
                    if deg[j] > self.d[j] {
                        return None;
                    }
                }
            }
            // all pairs touching i have been drawn
            if deg[i] != self.d[i] {
                return None;
            }
        }
        Some(g)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_tries: u64) -> Result<(LabeledGraph, u64)> {
        for t in 1..=max_tries {
            if let Some(g) = self.try_once(rng) {
                return Ok((g, t));
            }
        }
        Err(Error::MaxTriesExceeded { tries: max_tries })
    }
}

pub const DEFAULT_MAX_TRIES: u64 = 10_000_000;

pub fn sample_uniform_rejection<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R, max_tries: u64) -> Result<LabeledGraph> {
    Ok(RejectionSampler::new(d)?.sample(rng, max_tries)?.0)
}

/// Double-edge switch chain on the realizations of a degree sequence.
///
/// A step picks two distinct edges `{a, b}`, `{c, e}` uniformly and one of the
/// two rewirings `{a, c}, {b, e}` or `{a, e}, {b, c}`; the move is applied
/// when the four endpoints are distinct and the new edges are absent.
#[derive(Debug, Clone)]
pub struct SwitchChain {
    g: LabeledGraph,
    edges: Vec<(usize, usize)>,
}

impl SwitchChain {
    /// Starts from the Havel–Hakimi realization.
    pub fn new(d: &DegreeSequence) -> Result<Self> {
        if !erdos_gallai(d) {
            return Err(Error::NotGraphical);
        }
        let g = havel_hakimi(d)?;
        Ok(Self::from_graph(g))
    }

    pub fn from_graph(g: LabeledGraph) -> Self {
        let edges = g.edges();
        Self { g, edges }
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.g
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// One proposal; returns whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let m = self.edges.len();
        if m < 2 {
            return false;
        }
        let x = rng.gen_range(0..m);
        let mut y = rng.gen_range(0..m - 1);
        if y >= x {
            y += 1;
        }
        let (a, b) = self.edges[x];
        let (c, e) = if rng.gen::<bool>() { self.edges[y] } else { (self.edges[y].1, self.edges[y].0) };
        if a == c || a == e || b == c || b == e || self.g.has_edge(a, c) || self.g.has_edge(b, e) {
            return false;
        }
        self.g.remove_edge(a, b);
        self.g.remove_edge(c, e);
        self.g.add_edge(a, c);
        self.g.add_edge(b, e);
        self.edges[x] = (a.min(c), a.max(c));
        self.edges[y] = (b.min(e), b.max(e));
        true
    }

    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R, steps: u64) {
        for _ in 0..steps {
            self.step(rng);
        }
    }
}

/// Default burn-in: 100 proposals per edge.
pub fn default_burn_in(d: &DegreeSequence) -> u64 {
    100 * (d.sum() as u64 / 2).max(1)
}

/// Default thinning: 10 proposals per edge.
pub fn default_thin(d: &DegreeSequence) -> u64 {
    10 * (d.sum() as u64 / 2).max(1)
}

/// State of the switch chain after `burn_in` proposals.
pub fn sample_uniform_switch<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R, burn_in: u64) -> Result<LabeledGraph> {
    let mut chain = SwitchChain::new(d)?;
    chain.run(rng, burn_in);
    Ok(chain.g)
}

/// `count` states of one chain: after `burn_in` proposals, then every `thin`.
pub fn switch_samples<R: Rng + ?Sized>(
    d: &DegreeSequence,
    rng: &mut R,
    count: usize,
    burn_in: u64,
    thin: u64,
) -> Result<Vec<LabeledGraph>> {
    let mut chain = SwitchChain::new(d)?;
    chain.run(rng, burn_in);
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        if s > 0 {
            chain.run(rng, thin.max(1));
        }
        out.push(chain.g.clone());
    }
    Ok(out)
}

/// `log P_β(G) = Σ_{i<j} [x_ij log p_ij + (1 − x_ij) log(1 − p_ij)]` computed
/// edge by edge.
pub fn beta_model_log_likelihood(beta: &BetaVector, g: &LabeledGraph) -> f64 {
    let n = beta.beta.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let x = beta.beta[i] + beta.beta[j];
            // log p = x − log(1+e^x), log(1−p) = −log(1+e^x)
            let log1pe = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
            acc += if g.has_edge(i, j) { x - log1pe } else { -log1pe };
        }
    }
    acc
}

/// `log [e^{Σ β_i d_i} / Π_{i<j} (1 + e^{β_i+β_j})]`.
pub fn beta_model_log_likelihood_closed_form(beta: &BetaVector, degrees: &[usize]) -> f64 {
    let n = beta.beta.len();
    let lin: f64 = beta.beta.iter().zip(degrees).map(|(b, &d)| b * d as f64).sum();
    let mut norm = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let x = beta.beta[i] + beta.beta[j];
            norm += if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        }
    }
    lin - norm
}
