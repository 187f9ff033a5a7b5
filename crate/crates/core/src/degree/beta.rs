use serde::{Deserialize, Serialize};

use super::{check_assumption, erdos_gallai, DegreeFunction, DegreeSequence};
use crate::error::{Error, Result};
use crate::graphon::StepGraphon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BetaOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BetaOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000 }
    }
}

/// Fitted β together with the achieved sup-norm residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVector {
    pub beta: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl BetaVector {
    pub fn sup_norm(&self) -> f64 {
        self.beta.iter().fold(0.0, |m, b| m.max(b.abs()))
    }
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Solves `d_i = Σ_{j≠i} e^{β_i+β_j} / (1 + e^{β_i+β_j})`.
pub fn solve_beta(d: &DegreeSequence, opts: &BetaOptions) -> Result<BetaVector> {
    let n = d.n();
    if !erdos_gallai(d) {
        return Err(Error::NotGraphical);
    }
    if d.as_slice().iter().any(|&x| x == 0 || x + 1 >= n) {
        return Err(Error::NonConvergence { iterations: 0, residual: f64::INFINITY });
    }
    let target: Vec<f64> = d.as_slice().iter().map(|&x| x as f64).collect();
    fixed_point(&target, &vec![1.0; n], false, opts)
}

/// Damped log-space iteration `β_i ← β_i + s(log t_i − log m_i(β))` for
/// `m_i(β) = Σ_j w_j logistic(β_i + β_j)`, the `j = i` term kept only when
/// `self_loops`. The step `s` starts at 1 and is halved while the residual
/// would increase.
pub(crate) fn fixed_point(target: &[f64], w: &[f64], self_loops: bool, opts: &BetaOptions) -> Result<BetaVector> {
    let n = target.len();
    let total: f64 = w.iter().sum();
    let mut beta: Vec<f64> = (0..n)
        .map(|i| {
            let avail = if self_loops { total } else { total - w[i] };
            let q = target[i] / avail;
            0.5 * (q / (1.0 - q)).ln()
        })
        .collect();
    let mut m = vec![0.0; n];
    let mut res = expected(&beta, w, self_loops, target, &mut m);
    let mut trial = vec![0.0; n];
    let mut m_trial = vec![0.0; n];
    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(BetaVector { beta, residual: res, iterations: iter });
        }
        let mut s = 1.0;
        loop {
            for i in 0..n {
                trial[i] = beta[i] + s * (target[i].ln() - m[i].ln());
            }
            let r = expected(&trial, w, self_loops, target, &mut m_trial);
            if r <= res || s < 1e-12 {
                std::mem::swap(&mut beta, &mut trial);
                std::mem::swap(&mut m, &mut m_trial);
                res = r;
                break;
            }
            s *= 0.5;
        }
        if !res.is_finite() {
            break;
        }
    }
    if res <= opts.tol {
        return Ok(BetaVector { beta, residual: res, iterations: opts.max_iter });
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual: res })
}

fn expected(beta: &[f64], w: &[f64], self_loops: bool, target: &[f64], m: &mut [f64]) -> f64 {
    let n = beta.len();
    let mut res = 0.0_f64;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j != i || self_loops {
                acc += w[j] * logistic(beta[i] + beta[j]);
            }
        }
        m[i] = acc;
        res = res.max((target[i] - acc).abs());
    }
    if res.is_nan() {
        f64::INFINITY
    } else {
        res
    }
}

/// `W_{n,d}`: `n` equal blocks, `logistic(β_i + β_j)` off the diagonal, 0 on it.
pub fn fitted_graphon(beta: &BetaVector) -> StepGraphon {
    let n = beta.beta.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let p = logistic(beta.beta[i] + beta.beta[j]);
            values[i * n + j] = p;
            values[j * n + i] = p;
        }
    }
    StepGraphon::from_parts_unchecked(vec![1.0 / n as f64; n], values)
}

/// `W_D` on `k` equal blocks and the block β solving
/// `D_i = (1/k) Σ_j logistic(β_i + β_j)`, `D_i` the block averages of `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitGraphon {
    pub graphon: StepGraphon,
    pub beta: BetaVector,
    /// Block averages of `D` that were matched.
    pub degrees: Vec<f64>,
}

pub fn limit_graphon(d: &DegreeFunction, k: usize, opts: &BetaOptions) -> Result<LimitGraphon> {
    if k == 0 {
        return Err(Error::InvalidArgument("block count must be positive".into()));
    }
    let report = check_assumption(d, k.max(64));
    if !report.passed {
        return Err(Error::AssumptionViolated(format!(
            "bounds ok: {}, minimal graphical margin {:e} at x = {}",
            report.bounds_ok, report.min_margin, report.argmin
        )));
    }
    let degrees = d.discretize(k);
    let beta = fixed_point(&degrees, &vec![1.0 / k as f64; k], true, opts)?;
    let mut values = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let p = logistic(beta.beta[i] + beta.beta[j]);
            values[i * k + j] = p;
            values[j * k + i] = p;
        }
    }
    let graphon = StepGraphon::from_parts_unchecked(vec![1.0 / k as f64; k], values);
    Ok(LimitGraphon { graphon, beta, degrees })
}
