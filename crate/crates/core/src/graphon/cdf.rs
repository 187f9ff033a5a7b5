use crate::error::{Error, Result};

use super::PARTITION_TOL;

/// Right-continuous nondecreasing step function on `[0,1]` ending at 1:
/// `F(λ) = cdf[i]` for `jumps[i] <= λ < jumps[i + 1]`, and 0 left of the first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCDF {
    jumps: Vec<f64>,
    cdf: Vec<f64>,
}

impl StepCDF {
    pub fn new(jumps: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if jumps.is_empty() || jumps.len() != cdf.len() {
            return Err(Error::InvalidCdf("need matching, nonempty jump and value lists".into()));
        }
        if jumps.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidCdf("jump points must lie in [0, 1]".into()));
        }
        if jumps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCdf("jump points must be strictly increasing".into()));
        }
        if cdf.iter().any(|x| !(0.0..=1.0 + PARTITION_TOL).contains(x)) || cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidCdf("values must be nondecreasing in [0, 1]".into()));
        }
        let last = cdf[cdf.len() - 1];
        if (last - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCdf(format!("final value {last} is not 1")));
        }
        let mut cdf = cdf;
        let n = cdf.len();
        cdf[n - 1] = 1.0;
        Ok(Self { jumps, cdf })
    }

    /// Distribution of a finite measure given as point locations and masses.
    /// Points closer than 1e-12 are merged.
    pub fn from_masses(points: &[f64], masses: &[f64]) -> Result<Self> {
        if points.len() != masses.len() || points.is_empty() {
            return Err(Error::InvalidCdf("need matching, nonempty points and masses".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).filter(|&i| masses[i] > 0.0).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let total: f64 = masses.iter().sum();
        let mut jumps: Vec<f64> = Vec::new();
        let mut cdf: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for i in order {
            acc += masses[i];
            let x = points[i].clamp(0.0, 1.0);
            match jumps.last() {
                Some(&last) if x - last <= PARTITION_TOL => *cdf.last_mut().unwrap() = acc / total,
                _ => {
                    jumps.push(x);
                    cdf.push(acc / total);
                }
            }
        }
        Self::new(jumps, cdf)
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self.jumps.partition_point(|&x| x <= lambda) {
            0 => 0.0,
            i => self.cdf[i - 1],
        }
    }
}

/// Lévy–Prokhorov distance between two distribution functions on `[0,1]`:
/// the smallest `ε ≥ 0` with `F2(λ − ε) − ε ≤ F1(λ) ≤ F2(λ + ε) + ε` for all
/// `λ ∈ [0, 1]`.
///
/// Feasibility of a given `ε` is decided exactly: both sides are step functions
/// of `λ`, so it suffices to test the left end of every interval on which they
/// are constant. The minimal `ε` is then located by bisection.
pub fn levy_prokhorov(f1: &StepCDF, f2: &StepCDF) -> f64 {
    if lp_feasible(f1, f2, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lp_feasible(f1, f2, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn lp_feasible(f1: &StepCDF, f2: &StepCDF, eps: f64) -> bool {
    // Candidate points are (λ, argument of F2). Where the breakpoint comes from
    // a jump b of F2 the argument is b itself, never (b ± ε) ∓ ε, so rounding
    // cannot step over the jump.
    let left = std::iter::once((0.0, -eps))
        .chain(f1.jumps.iter().map(|&a| (a, a - eps)))
        .chain(f2.jumps.iter().map(|&b| (b + eps, b)));
    for (lambda, x2) in left.filter(|(l, _)| (0.0..=1.0).contains(l)) {
        if f2.eval(x2) - eps > f1.eval(lambda) {
            return false;
        }
    }
    let right = std::iter::once((0.0, eps))
        .chain(f1.jumps.iter().map(|&a| (a, a + eps)))
        .chain(f2.jumps.iter().map(|&b| (b - eps, b)));
    for (lambda, x2) in right.filter(|(l, _)| (0.0..=1.0).contains(l)) {
        if f1.eval(lambda) > f2.eval(x2) + eps {
            return false;
        }
    }
    true
}
