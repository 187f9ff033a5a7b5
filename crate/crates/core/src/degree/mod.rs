//! Degree sequences, degree functions and the β-model.

mod beta;

pub use beta::{fitted_graphon, limit_graphon, logistic, solve_beta, BetaOptions, BetaVector, LimitGraphon};

use crate::error::{Error, Result};
use crate::graphon::{LabeledGraph, StepCDF, PARTITION_TOL};

/// Degrees of a labeled graph on `n` vertices, `0 <= d_i <= n - 1`.
///
/// Entries keep their vertex labels and need not be sorted; operations that
/// need the non-increasing order sort a copy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(d: Vec<usize>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidDegreeSequence("empty sequence".into()));
        }
        let n = d.len();
        if let Some(&bad) = d.iter().find(|&&x| x >= n) {
            return Err(Error::InvalidDegreeSequence(format!("degree {bad} impossible on {n} vertices")));
        }
        Ok(Self(d))
    }

    pub fn regular(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn sorted_desc(&self) -> Vec<usize> {
        let mut d = self.0.clone();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    pub fn matches(&self, g: &LabeledGraph) -> bool {
        g.n() == self.n() && (0..self.n()).all(|i| g.degree(i) == self.0[i])
    }
}

/// Erdős–Gallai test: the degree sum is even and for every `k`,
/// `Σ_{i≤k} d_i ≤ k(k−1) + Σ_{i>k} min(d_i, k)` on the sorted sequence.
pub fn erdos_gallai(d: &DegreeSequence) -> bool {
    erdos_gallai_sorted(&d.sorted_desc())
}

pub(crate) fn erdos_gallai_sorted(d: &[usize]) -> bool {
    if d.iter().sum::<usize>() % 2 == 1 {
        return false;
    }
    let n = d.len();
    let mut lhs = 0;
    for k in 1..=n {
        lhs += d[k - 1];
        let rhs = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Realizes `d` greedily: the vertex with the largest remaining degree is
/// joined to the next largest ones.
pub fn havel_hakimi(d: &DegreeSequence) -> Result<LabeledGraph> {
    let n = d.n();
    let mut g = LabeledGraph::new(n);
    let mut rem: Vec<usize> = d.as_slice().to_vec();
    loop {
        let mut order: Vec<usize> = (0..n).filter(|&i| rem[i] > 0).collect();
        if order.is_empty() {
            return Ok(g);
        }
        order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
        let v = order[0];
        let need = rem[v];
        if need > order.len() - 1 {
            return Err(Error::NotGraphical);
        }
        rem[v] = 0;
        for &u in &order[1..=need] {
            g.add_edge(v, u);
            rem[u] -= 1;
        }
    }
}

/// Non-increasing step function `D: [0,1] → (0,1)`: value `values[i]` on
/// `[breakpoints[i], breakpoints[i+1])`. `c1 <= c2` are the declared bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    c1: f64,
    c2: f64,
}

impl DegreeFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_bounds(breakpoints, values, None, None)
    }

    /// Missing bounds default to the extreme values of `D`.
    pub fn with_bounds(breakpoints: Vec<f64>, values: Vec<f64>, c1: Option<f64>, c2: Option<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidDegreeFunction(m.into()));
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return bad("need one more breakpoint than values");
        }
        if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
            return bad("breakpoints must start at 0 and end at 1");
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("breakpoints must be strictly increasing");
        }
        if values.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return bad("values must lie in (0, 1)");
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return bad("values must be non-increasing");
        }
        let lo = values[values.len() - 1];
        let hi = values[0];
        let c1 = c1.unwrap_or(lo);
        let c2 = c2.unwrap_or(hi);
        if !(c1 > 0.0 && c2 < 1.0 && c1 <= c2) {
            return bad("bounds must satisfy 0 < c1 <= c2 < 1");
        }
        Ok(Self { breakpoints, values, c1, c2 })
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![p])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= x).clamp(1, self.values.len());
        self.values[i - 1]
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    /// `∫_a^b g(D(y)) dy`, exact.
    fn integrate(&self, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.pieces()
            .map(|(lo, hi, v)| {
                let len = hi.min(b) - lo.max(a);
                if len > 0.0 {
                    len * g(v)
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integrate(a, b, |v| v)
    }

    /// Averages of `D` over `k` equal blocks.
    pub fn discretize(&self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| self.integral(i as f64 / k as f64, (i + 1) as f64 / k as f64) * k as f64)
            .collect()
    }

    /// Erdős–Gallai slack of the continuum condition at `x`:
    /// `∫_x^1 min{D(y), x} dy + x² − ∫_0^x D(y) dy`.
    pub fn graphical_margin(&self, x: f64) -> f64 {
        self.integrate(x, 1.0, |v| v.min(x)) + x * x - self.integral(0.0, x)
    }
}

/// Result of [`check_assumption`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AssumptionReport {
    pub min_value: f64,
    pub max_value: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c1 <= D <= c2` everywhere.
    pub bounds_ok: bool,
    pub grid: usize,
    /// Smallest [`DegreeFunction::graphical_margin`] over `x = i/grid`, `i = 1..=grid`.
    pub min_margin: f64,
    pub argmin: f64,
    pub margin_ok: bool,
    pub passed: bool,
}

pub fn check_assumption(d: &DegreeFunction, grid: usize) -> AssumptionReport {
    let grid = grid.max(1);
    let min_value = d.values[d.values.len() - 1];
    let max_value = d.values[0];
    let bounds_ok = d.c1 <= min_value && max_value <= d.c2;
    let (mut min_margin, mut argmin) = (f64::INFINITY, 1.0);
    for i in 1..=grid {
        let x = i as f64 / grid as f64;
        let m = d.graphical_margin(x);
        if m < min_margin {
            min_margin = m;
            argmin = x;
        }
    }
    let margin_ok = min_margin > 0.0;
    AssumptionReport {
        min_value,
        max_value,
        c1: d.c1,
        c2: d.c2,
        bounds_ok,
        grid,
        min_margin,
        argmin,
        margin_ok,
        passed: bounds_ok && margin_ok,
    }
}

/// `μ_D([0, λ]) = Λ{x : D(x) ≤ λ}`.
pub fn degree_measure(d: &DegreeFunction) -> StepCDF {
    let lengths: Vec<f64> = d.pieces().map(|(lo, hi, _)| hi - lo).collect();
    StepCDF::from_masses(&d.values, &lengths).expect("pieces have positive length")
}

/// Degree function of a sequence: `D(x) = d_(⌈nx⌉) / n` on the sorted
/// sequence, with equal consecutive values merged.
pub fn degree_function_of_sequence(d: &DegreeSequence) -> Result<DegreeFunction> {
    let n = d.n() as f64;
    let sorted = d.sorted_desc();
    let mut breakpoints = vec![0.0];
    let mut values: Vec<f64> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let v = x as f64 / n;
        if values.last().is_some_and(|&last| (last - v).abs() <= PARTITION_TOL) {
            *breakpoints.last_mut().unwrap() = (i + 1) as f64 / n;
        } else {
            values.push(v);
            breakpoints.push((i + 1) as f64 / n);
        }
    }
    *breakpoints.last_mut().unwrap() = 1.0;
    DegreeFunction::new(breakpoints, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(d: &[usize]) -> DegreeSequence {
        DegreeSequence::new(d.to_vec()).unwrap()
    }

    /// Tries every graph on `n <= 6` vertices.
    fn realizable_by_search(d: &[usize]) -> bool {
        let n = d.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        (0u32..1 << pairs.len()).any(|mask| {
            let mut deg = vec![0; n];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
            deg == d
        })
    }

    #[test]
    fn erdos_gallai_examples() {
        assert!(erdos_gallai(&seq(&[2, 2, 2])));
        assert!(erdos_gallai(&seq(&[3, 1, 1, 1])));
        assert!(!erdos_gallai(&seq(&[3, 3, 1, 1])));
        assert!(!realizable_by_search(&[3, 3, 1, 1]));
    }

    #[test]
    fn erdos_gallai_agrees_with_exhaustive_search() {
        for n in 1..=5usize {
            let total = n.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let d: Vec<usize> = (0..n)
                    .map(|_| {
                        let x = c % n;
                        c /= n;
                        x
                    })
                    .collect();
                let s = seq(&d);
                assert_eq!(erdos_gallai(&s), realizable_by_search(&d), "{d:?}");
                if erdos_gallai(&s) {
                    assert!(s.matches(&havel_hakimi(&s).unwrap()));
                } else {
                    assert!(havel_hakimi(&s).is_err());
                }
            }
        }
    }

    #[test]
    fn constant_degree_function_passes_with_closed_form_margin() {
        for p in [0.1, 0.5, 0.83] {
            let d = DegreeFunction::constant(p).unwrap();
            for i in 1..=50 {
                let x = i as f64 / 50.0;
                let closed = if x < p { x * (1.0 - p) } else { (x - p).powi(2) + p - p * p };
                assert!((d.graphical_margin(x) - closed).abs() < 1e-14);
            }
            assert!(check_assumption(&d, 50).passed);
        }
    }

    #[test]
    fn declared_bounds_are_checked() {
        let d = DegreeFunction::with_bounds(vec![0.0, 0.5, 1.0], vec![0.9, 0.1], Some(0.05), Some(0.85)).unwrap();
        let r = check_assumption(&d, 10);
        assert!(!r.bounds_ok && !r.passed);
        let r1 = check_assumption(&DegreeFunction::constant(0.3).unwrap(), 1);
        assert_eq!(r1.grid, 1);
        assert_eq!(r1.argmin, 1.0);
        assert!((r1.min_margin - (0.49 + 0.3 - 0.09)).abs() < 1e-15);
    }

    #[test]
    fn degree_measure_examples() {
        let f = degree_measure(&DegreeFunction::constant(0.4).unwrap());
        assert_eq!(f.jumps(), &[0.4]);
        let d = DegreeFunction::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.3]).unwrap();
        let f = degree_measure(&d);
        assert_eq!(f.jumps(), &[0.3, 0.6]);
        assert_eq!(f.cdf(), &[0.5, 1.0]);
    }

    #[test]
    fn rejects_malformed_degree_functions() {
        assert!(DegreeFunction::new(vec![0.0, 0.5, 1.0], vec![0.3, 0.6]).is_err());
        assert!(DegreeFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(DegreeFunction::new(vec![0.1, 1.0], vec![0.5]).is_err());
        assert!(DegreeSequence::new(vec![3, 1, 1]).is_err());
    }

    #[test]
    fn sequence_degree_function() {
        let d = degree_function_of_sequence(&seq(&[1, 3, 3, 1])).unwrap();
        assert_eq!(d.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(d.values(), &[0.75, 0.25]);
        assert_eq!(d.eval(0.2), 0.75);
        assert_eq!(d.eval(1.0), 0.25);
    }
}
