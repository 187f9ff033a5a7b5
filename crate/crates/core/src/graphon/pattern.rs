use std::fmt;

use super::{LabeledGraph, StepGraphon};
use crate::error::{Error, Result};

/// Default cap on `blocks^vertices` for [`subgraph_density`].
pub const DENSITY_WORK_CAP: u128 = 100_000_000;

/// A small simple graph `H` whose density in a graphon is measured.
/// Vertices are `0..k` internally; the text form numbers them from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubgraphPattern {
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl SubgraphPattern {
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPattern("pattern needs at least one vertex".into()));
        }
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(Error::InvalidPattern(format!("edge ({u}, {v}) out of range for {k} vertices")));
            }
            if u == v {
                return Err(Error::InvalidPattern(format!("loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if out.contains(&e) {
                return Err(Error::InvalidPattern(format!("repeated edge ({u}, {v})")));
            }
            out.push(e);
        }
        Ok(Self { k, edges: out })
    }

    pub fn edge() -> Self {
        Self { k: 2, edges: vec![(0, 1)] }
    }

    pub fn triangle() -> Self {
        Self::complete(3)
    }

    pub fn complete(k: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                edges.push((i, j));
            }
        }
        Self { k: k.max(1), edges }
    }

    /// Path on `k` vertices.
    pub fn path(k: usize) -> Self {
        Self { k: k.max(1), edges: (1..k).map(|i| (i - 1, i)).collect() }
    }

    /// Cycle on `k >= 3` vertices.
    pub fn cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidPattern("a cycle needs at least 3 vertices".into()));
        }
        let mut edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
        edges.push((0, k - 1));
        Ok(Self { k, edges })
    }

    /// Star with `leaves` leaves around vertex 0.
    pub fn star(leaves: usize) -> Self {
        Self { k: leaves + 1, edges: (1..=leaves).map(|i| (0, i)).collect() }
    }

    /// Parses a named pattern (`edge`, `triangle`, `k4`, `path3`, `cycle5`,
    /// `star3`) or an explicit one written `k:i-j,i-j,...` with 1-based vertices.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        let bad = || Error::InvalidPattern(format!("cannot parse pattern `{text}`"));
        if let Some((k, rest)) = t.split_once(':') {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            let mut edges = Vec::new();
            for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (a, b) = item.split_once('-').ok_or_else(bad)?;
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a == 0 || b == 0 {
                    return Err(bad());
                }
                edges.push((a - 1, b - 1));
            }
            return Self::new(k, &edges);
        }
        let num = |prefix: &str| t.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
        match t.as_str() {
            "edge" => Ok(Self::edge()),
            "triangle" => Ok(Self::triangle()),
            "cherry" => Ok(Self::path(3)),
            _ => {
                if let Some(m) = num("k").filter(|&m| m >= 1) {
                    Ok(Self::complete(m))
                } else if let Some(m) = num("path").filter(|&m| m >= 1) {
                    Ok(Self::path(m))
                } else if let Some(m) = num("cycle") {
                    Self::cycle(m)
                } else if let Some(m) = num("star") {
                    Ok(Self::star(m))
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

impl fmt::Display for SubgraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.k)?;
        for (n, (u, v)) in self.edges.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}-{}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// `t(H, W)`, summing over all assignments of pattern vertices to blocks.
pub fn subgraph_density(h: &SubgraphPattern, w: &StepGraphon) -> Result<f64> {
    subgraph_density_with_cap(h, w, DENSITY_WORK_CAP)
}

pub fn subgraph_density_with_cap(h: &SubgraphPattern, w: &StepGraphon, cap: u128) -> Result<f64> {
    check_work(h, w, cap)?;
    let plan = Plan::new(h);
    let mut assign = vec![0usize; h.k];
    Ok(density_rec(&plan, w, &mut assign, 0, 1.0))
}

/// Edges grouped by their later endpoint, so each edge factor is applied as
/// soon as both endpoints are assigned.
struct Plan {
    back: Vec<Vec<usize>>,
}

impl Plan {
    fn new(h: &SubgraphPattern) -> Self {
        let mut back = vec![Vec::new(); h.k];
        for &(u, v) in &h.edges {
            back[v].push(u);
        }
        Self { back }
    }
}

fn density_rec(plan: &Plan, w: &StepGraphon, assign: &mut [usize], v: usize, acc: f64) -> f64 {
    if v == assign.len() {
        return acc;
    }
    let mut total = 0.0;
    for b in 0..w.block_count() {
        let mut p = acc * w.weights()[b];
        for &u in &plan.back[v] {
            p *= w.value(assign[u], b);
        }
        if p == 0.0 {
            continue;
        }
        assign[v] = b;
        total += density_rec(plan, w, assign, v + 1, p);
    }
    total
}

fn check_work(h: &SubgraphPattern, w: &StepGraphon, cap: u128) -> Result<()> {
    let work = (w.block_count() as u128).checked_pow(h.k as u32).unwrap_or(u128::MAX);
    if work > cap {
        return Err(Error::WorkCapExceeded { work, cap });
    }
    Ok(())
}

/// Gradient of `t(H, ·)` with respect to the block values, normalized by
/// block masses: for symmetric `Δ`,
/// `t(W + εΔ) = t(W) + ε Σ_ab w_a w_b G_ab Δ_ab + O(ε²)`.
/// Returned row-major and symmetric.
pub fn subgraph_density_gradient(h: &SubgraphPattern, w: &StepGraphon) -> Result<Vec<f64>> {
    check_work(h, w, DENSITY_WORK_CAP)?;
    let k = w.block_count();
    let m = h.edges.len();
    let mut grad = vec![0.0; k * k];
    let mut assign = vec![0usize; h.k];
    let mut factors = vec![0.0; m];
    let mut prefix = vec![0.0; m + 1];
    loop {
        let mass: f64 = assign.iter().map(|&b| w.weights()[b]).product();
        if mass > 0.0 {
            for (e, &(u, v)) in h.edges.iter().enumerate() {
                factors[e] = w.value(assign[u], assign[v]);
            }
            prefix[0] = 1.0;
            for e in 0..m {
                prefix[e + 1] = prefix[e] * factors[e];
            }
            let mut suffix = 1.0;
            for e in (0..m).rev() {
                let (u, v) = h.edges[e];
                let (a, b) = (assign[u], assign[v]);
                let c = mass * prefix[e] * suffix / (w.weights()[a] * w.weights()[b]);
                grad[a * k + b] += 0.5 * c;
                grad[b * k + a] += 0.5 * c;
                suffix *= factors[e];
            }
        }
        // odometer over block assignments
        let mut i = 0;
        while i < assign.len() {
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == assign.len() {
            break;
        }
    }
    Ok(grad)
}

/// Number of maps `V(H) → V(G)` sending edges to edges.
pub fn homomorphism_count(h: &SubgraphPattern, g: &LabeledGraph) -> u128 {
    let plan = Plan::new(h);
    let mut assign = vec![0usize; h.k];
    let words = g.n().div_ceil(64).max(1);
    let mut all = vec![u64::MAX; words];
    let tail = g.n() % 64;
    if tail != 0 {
        all[words - 1] = (1u64 << tail) - 1;
    }
    if g.n() == 0 {
        return 0;
    }
    hom_rec(&plan, g, &all, &mut assign, 0)
}

fn hom_rec(plan: &Plan, g: &LabeledGraph, all: &[u64], assign: &mut [usize], v: usize) -> u128 {
    if v == assign.len() {
        return 1;
    }
    let mut cand = all.to_vec();
    for &u in &plan.back[v] {
        for (c, r) in cand.iter_mut().zip(g.row(assign[u])) {
            *c &= r;
        }
    }
    let mut total = 0;
    for (wi, &bits) in cand.iter().enumerate() {
        let mut bits = bits;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            assign[v] = wi * 64 + b;
            total += hom_rec(plan, g, all, assign, v + 1);
        }
    }
    total
}
