//! Degree-constrained variational problems over equal-block graphons.
//!
//! Minimization runs directly on the `k × k` block values. The linear degree
//! constraint is kept exactly by projecting every search direction onto
//! symmetric matrices with zero row sums; `τ` constraints go through an
//! augmented Lagrangian followed by a Newton restoration. The reported
//! minimizer is a `k`-block graphon; the infimum over all graphons can only
//! be lower.

mod repair;

pub use repair::{
    closed_form_weights, fixed_sum_weights, incidence_sums, repair_degrees, step_approximation, REPAIR_ROUNDS,
    REPAIR_TOL,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{degree_measure, limit_graphon, BetaOptions, DegreeFunction};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::graphon::{degree_distribution, levy_prokhorov, SearchMode, StepCDF, StepGraphon, EXACT_PERMUTATION_MAX};
use crate::rate::{bernoulli_kl, counting_entropy, rate_j};

/// Values are kept inside `[LO, 1 − LO]` during the search.
const LO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationalOptions {
    /// Number of equal blocks.
    pub k: usize,
    /// One random restart per seed, on top of the structured starts.
    pub seeds: Vec<u64>,
    /// Iteration cap per penalty stage.
    pub max_iter: usize,
    /// First trial step, in units of the per-entry gradient.
    pub step_size: f64,
    /// Increasing penalty weights of the augmented Lagrangian.
    pub penalty_schedule: Vec<f64>,
    pub lp_tol: f64,
    pub tau_tol: f64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self {
            k: 16,
            seeds: vec![1, 2, 3, 4],
            max_iter: 3000,
            step_size: 1.0,
            penalty_schedule: vec![1e2, 1e3, 1e4, 1e5],
            lp_tol: 1e-3,
            tau_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    /// Lévy–Prokhorov distance between the degree distribution of the
    /// minimizer and the law of `D`.
    pub degree_lp: f64,
    /// `max(0, r − τ)` for the inequality problem, `|τ − r|` for the equality one.
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalResult {
    pub value: f64,
    pub minimizer: StepGraphon,
    pub constraint_residuals: ConstraintResiduals,
    /// Restarts that ended feasible.
    pub restarts_used: usize,
    /// Block permutation that was applied to the raw optimizer output so
    /// that `value = I_{W_D}(minimizer)`.
    pub certificate: Option<Vec<usize>>,
    pub blocks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Problem {
    /// `τ ≥ r`
    AtLeast(f64),
    /// `τ = r`
    Equal(f64),
    /// maximize `τ − I`
    Partition,
}

/// `φ_τ(D, r) = inf { J_D(W) : τ(W) ≥ r }` over `k`-block graphons.
pub fn solve_phi(d: &DegreeFunction, tau: &dyn Functional, r: f64, opts: &VariationalOptions) -> Result<VariationalResult> {
    solve(d, tau, Problem::AtLeast(r), opts)
}

/// `ψ_τ(D, r) = inf { J_D(W) : τ(W) = r }` over `k`-block graphons, the
/// equality held to `opts.tau_tol`.
pub fn solve_psi(d: &DegreeFunction, tau: &dyn Functional, r: f64, opts: &VariationalOptions) -> Result<VariationalResult> {
    solve(d, tau, Problem::Equal(r), opts)
}

/// `sup_W (τ(W) − J_D(W))` plus the counting exponent of `D`, the limit of
/// `(1/n²) log Σ_{G ∈ G_{n,d}} e^{n² τ(G)}`.
pub fn limit_partition_z(d: &DegreeFunction, tau: &dyn Functional, opts: &VariationalOptions) -> Result<f64> {
    let res = solve(d, tau, Problem::Partition, opts)?;
    let t = tau.value(&res.minimizer)?;
    let count = counting_entropy(d, opts.k)?;
    Ok(t - res.value + count.log_count_rate)
}

/// `−φ_τ(D, r)` plus the counting exponent of `D`, the limit of
/// `(1/n²) log N_{n,τ}(d, r)`.
pub fn count_asymptotic(d: &DegreeFunction, tau: &dyn Functional, r: f64, opts: &VariationalOptions) -> Result<f64> {
    let phi = solve_phi(d, tau, r, opts)?;
    let count = counting_entropy(d, opts.k)?;
    Ok(-phi.value + count.log_count_rate)
}

/// Orthogonal projection onto symmetric `k × k` matrices with zero row sums:
/// `Δ − u1ᵀ − 1uᵀ` with `u_i = (s_i − S/(2k))/k`.
pub fn project_degrees(delta: &mut [f64], k: usize) {
    let s: Vec<f64> = (0..k).map(|i| delta[i * k..(i + 1) * k].iter().sum()).collect();
    let total: f64 = s.iter().sum();
    let kf = k as f64;
    let u: Vec<f64> = s.iter().map(|si| (si - total / (2.0 * kf)) / kf).collect();
    for i in 0..k {
        for j in 0..k {
            delta[i * k + j] -= u[i] + u[j];
        }
    }
}

/// Shifts `x` by the smallest symmetric `u1ᵀ + 1uᵀ` that restores the
/// row means to `target`.
fn restore_rows(x: &mut [f64], target: &[f64]) {
    let k = target.len();
    let kf = k as f64;
    let a: Vec<f64> = (0..k).map(|i| target[i] - x[i * k..(i + 1) * k].iter().sum::<f64>() / kf).collect();
    let total: f64 = a.iter().sum();
    let u: Vec<f64> = a.iter().map(|ai| ai - total / (2.0 * kf)).collect();
    for i in 0..k {
        for j in 0..k {
            x[i * k + j] += u[i] + u[j];
        }
    }
}

struct Setup<'a> {
    k: usize,
    base: Vec<f64>,
    logit_base: Vec<f64>,
    degrees: Vec<f64>,
    tau: &'a dyn Functional,
    problem: Problem,
    opts: &'a VariationalOptions,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Setup<'_> {
    fn graphon(&self, x: &[f64]) -> StepGraphon {
        StepGraphon::from_parts_unchecked(vec![1.0 / self.k as f64; self.k], x.to_vec())
    }

    fn rate(&self, x: &[f64]) -> f64 {
        let sum: f64 = x
            .iter()
            .zip(&self.base)
            .map(|(&v, &b)| bernoulli_kl(v, b).unwrap_or(f64::INFINITY))
            .sum();
        0.5 * sum / (self.k * self.k) as f64
    }

    fn rate_grad(&self, x: &[f64], out: &mut [f64]) {
        let scale = 0.5 / (self.k * self.k) as f64;
        for ((o, &v), lb) in out.iter_mut().zip(x).zip(&self.logit_base) {
            *o = scale * (logit(v) - lb);
        }
    }

    fn tau(&self, x: &[f64]) -> Result<f64> {
        self.tau.value(&self.graphon(x))
    }

    /// `∂τ/∂x_ab` on equal blocks.
    fn tau_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scale = 1.0 / (self.k * self.k) as f64;
        Ok(self.tau.gradient(&self.graphon(x))?.into_iter().map(|g| g * scale).collect())
    }

    /// Merit value and its derivative with respect to `τ`.
    fn merit(&self, i: f64, t: f64, rho: f64, lambda: f64) -> (f64, f64) {
        match self.problem {
            Problem::AtLeast(r) => {
                let m = (lambda - rho * (t - r)).max(0.0);
                (i + (m * m - lambda * lambda) / (2.0 * rho), -m)
            }
            Problem::Equal(r) => {
                let h = t - r;
                (i - lambda * h + 0.5 * rho * h * h, rho * h - lambda)
            }
            Problem::Partition => (i - t, -1.0),
        }
    }

    fn eval(&self, x: &[f64], rho: f64, lambda: f64) -> Result<f64> {
        let t = self.tau(x)?;
        Ok(self.merit(self.rate(x), t, rho, lambda).0)
    }

    /// Projected merit gradient.
    fn direction(&self, x: &[f64], rho: f64, lambda: f64, out: &mut [f64]) -> Result<()> {
        let t = self.tau(x)?;
        let (_, dt) = self.merit(self.rate(x), t, rho, lambda);
        self.rate_grad(x, out);
        if dt != 0.0 {
            for (o, g) in out.iter_mut().zip(self.tau_grad(x)?) {
                *o += dt * g;
            }
        }
        project_degrees(out, self.k);
        Ok(())
    }

    /// Largest `s` with `x + s·d` inside the box.
    fn max_step(x: &[f64], d: &[f64]) -> f64 {
        let mut s = f64::INFINITY;
        for (&v, &dv) in x.iter().zip(d) {
            if dv > 0.0 {
                s = s.min((1.0 - LO - v) / dv);
            } else if dv < 0.0 {
                s = s.min((LO - v) / dv);
            }
        }
        s.max(0.0)
    }

    /// Projected gradient descent with Barzilai–Borwein steps and Armijo
    /// backtracking on the merit function.
    fn descend(&self, x: &mut Vec<f64>, rho: f64, lambda: f64) -> Result<()> {
        let n = x.len();
        let scale = (self.k * self.k) as f64;
        let mut g = vec![0.0; n];
        self.direction(x, rho, lambda, &mut g)?;
        let mut f = self.eval(x, rho, lambda)?;
        let mut step = self.opts.step_size * scale;
        let mut trial = vec![0.0; n];
        let mut g_new = vec![0.0; n];
        let mut d = vec![0.0; n];
        for _ in 0..self.opts.max_iter {
            let gnorm2 = dot(&g, &g);
            if gnorm2.sqrt() * scale < 1e-11 {
                break;
            }
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = -gi;
            }
            let cap = Self::max_step(x, &d) * 0.99;
            let mut s = step.min(cap);
            let mut accepted = false;
            for _ in 0..60 {
                for ((t, xi), di) in trial.iter_mut().zip(x.iter()).zip(&d) {
                    *t = xi + s * di;
                }
                let ft = self.eval(&trial, rho, lambda)?;
                if ft <= f - 1e-4 * s * gnorm2 {
                    f = ft;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
            self.direction(&trial, rho, lambda, &mut g_new)?;
            // BB1 step from the displacement and gradient change
            let mut sy = 0.0;
            let mut ss = 0.0;
            for i in 0..n {
                let sv = trial[i] - x[i];
                sy += sv * (g_new[i] - g[i]);
                ss += sv * sv;
            }
            std::mem::swap(x, &mut trial);
            std::mem::swap(&mut g, &mut g_new);
            step = if sy > 0.0 { (ss / sy).clamp(1e-6 * scale, 1e6 * scale) } else { (2.0 * s).min(1e6 * scale) };
            if ss.sqrt() < 1e-15 {
                break;
            }
        }
        Ok(())
    }

    /// Newton steps on `τ` along the projected gradient until `τ = r`
    /// (`τ ≥ r` for the inequality problem).
    fn restore(&self, x: &mut Vec<f64>, r: f64, at_least: bool) -> Result<()> {
        let goal = 0.01 * self.opts.tau_tol;
        for _ in 0..100 {
            let h = self.tau(x)? - r;
            if (at_least && h >= 0.0) || h.abs() <= goal {
                return Ok(());
            }
            let mut v = self.tau_grad(x)?;
            let full = dot(&v, &v);
            project_degrees(&mut v, self.k);
            let slope = dot(&v, &v);
            // stationary under the degree constraint, e.g. at a constant W_D
            if !(slope > 1e-18 * full) || slope == 0.0 {
                return Ok(());
            }
            // aim a little past r on the feasible side for the inequality
            let aim = if at_least { -h + goal } else { -h };
            let mut s = aim / slope;
            for vi in v.iter_mut() {
                *vi *= s.signum();
            }
            s = s.abs().min(Self::max_step(x, &v) * 0.99);
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi += s * vi;
            }
        }
        Ok(())
    }

    /// `λ` minimizing `‖P(∇I − λ∇τ)‖`.
    fn multiplier(&self, x: &[f64]) -> Result<f64> {
        let mut gi = vec![0.0; x.len()];
        self.rate_grad(x, &mut gi);
        project_degrees(&mut gi, self.k);
        let mut gt = self.tau_grad(x)?;
        project_degrees(&mut gt, self.k);
        let tt = dot(&gt, &gt);
        Ok(if tt > 0.0 { dot(&gi, &gt) / tt } else { 0.0 })
    }

    fn tau_residual(&self, t: f64) -> f64 {
        match self.problem {
            Problem::AtLeast(r) => (r - t).max(0.0),
            Problem::Equal(r) => (t - r).abs(),
            Problem::Partition => 0.0,
        }
    }

    fn run(&self, start: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let mut x = start;
        match self.problem {
            Problem::Partition => self.descend(&mut x, 1.0, 0.0)?,
            Problem::AtLeast(r) | Problem::Equal(r) => {
                let at_least = matches!(self.problem, Problem::AtLeast(_));
                // start from a feasible point with the least-squares multiplier;
                // W_D itself is stationary for every penalty weight
                self.restore(&mut x, r, at_least)?;
                let mut lambda = self.multiplier(&x)?;
                if at_least {
                    lambda = lambda.max(0.0);
                }
                // Near W_D both I and τ − τ(W_D) are quadratic, so a multiplier
                // below the optimal one lets the round slide back to the
                // stationary W_D; such rounds are redone with a larger push.
                let gap = (r - self.tau(&self.base)?).abs();
                for &rho in &self.opts.penalty_schedule {
                    let mut push = 1.0;
                    loop {
                        let mut y = x.clone();
                        self.descend(&mut y, rho, lambda)?;
                        let h = self.tau(&y)? - r;
                        let miss = if at_least { -h } else { h.abs() };
                        let next = lambda - push * rho * h;
                        if miss > 0.25 * gap && push < 1e6 {
                            lambda = next;
                            push *= 2.0;
                            continue;
                        }
                        x = y;
                        lambda = if at_least { next.max(0.0) } else { next };
                        break;
                    }
                }
                self.restore(&mut x, r, at_least)?;
            }
        }
        restore_rows(&mut x, &self.degrees);
        let t = self.tau(&x)?;
        Ok((x, t))
    }

    /// `W_D`, community and anti-community perturbations of it, then one
    /// random degree-preserving perturbation per seed.
    fn starts(&self) -> Vec<Vec<f64>> {
        let k = self.k;
        let room = self.base.iter().fold(f64::INFINITY, |m, &v| m.min(v).min(1.0 - v));
        let scaled = |mut p: Vec<f64>| -> Option<Vec<f64>> {
            project_degrees(&mut p, k);
            let size = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if size < 1e-12 {
                return None;
            }
            let c = 0.5 * room / size;
            Some(self.base.iter().zip(&p).map(|(b, v)| b + c * v).collect())
        };
        let mut out = vec![self.base.clone()];
        for groups in [2, 3] {
            if k < groups {
                continue;
            }
            let label = |i: usize| i * groups / k;
            for sign in [1.0, -1.0] {
                let p: Vec<f64> = (0..k * k).map(|ij| if label(ij / k) == label(ij % k) { sign } else { -sign }).collect();
                out.extend(scaled(p));
            }
        }
        for &seed in &self.opts.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = vec![0.0; k * k];
            for i in 0..k {
                for j in i..k {
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    p[i * k + j] = z;
                    p[j * k + i] = z;
                }
            }
            out.extend(scaled(p));
        }
        out
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

fn check_options(opts: &VariationalOptions) -> Result<()> {
    if opts.k < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 blocks, got {}", opts.k)));
    }
    if !(opts.tau_tol > 0.0) || !(opts.lp_tol >= 0.0) || !(opts.step_size > 0.0) {
        return Err(Error::InvalidArgument("tolerances and step size must be positive".into()));
    }
    if opts.penalty_schedule.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::InvalidArgument("penalty weights must be positive".into()));
    }
    Ok(())
}

fn solve(d: &DegreeFunction, tau: &dyn Functional, problem: Problem, opts: &VariationalOptions) -> Result<VariationalResult> {
    check_options(opts)?;
    let k = opts.k;
    let lim = limit_graphon(d, k, &BetaOptions::default())?;
    let target_law = degree_measure(d);
    let degree_lp = |w: &StepGraphon| -> f64 { levy_prokhorov(&degree_distribution(w), &target_law) };
    let grid_lp = levy_prokhorov(
        &StepCDF::from_masses(&lim.degrees, &vec![1.0 / k as f64; k]).expect("equal masses"),
        &target_law,
    );
    if grid_lp > opts.lp_tol {
        return Err(Error::InvalidArgument(format!(
            "degree function is not resolved on {k} blocks: d_LP = {grid_lp:e} > {}",
            opts.lp_tol
        )));
    }
    let setup = Setup {
        k,
        base: lim.graphon.values().to_vec(),
        logit_base: lim.graphon.values().iter().map(|&v| logit(v)).collect(),
        degrees: lim.degrees.clone(),
        tau,
        problem,
        opts,
    };

    let t0 = setup.tau(&setup.base)?;
    let base_feasible = match problem {
        Problem::AtLeast(r) => t0 >= r - opts.tau_tol,
        Problem::Equal(r) => (t0 - r).abs() <= opts.tau_tol,
        Problem::Partition => false,
    };
    if base_feasible {
        // I ≥ 0 with equality only at W_D
        return Ok(VariationalResult {
            value: 0.0,
            minimizer: lim.graphon.clone(),
            constraint_residuals: ConstraintResiduals { degree_lp: degree_lp(&lim.graphon), tau: setup.tau_residual(t0) },
            restarts_used: 1,
            certificate: Some((0..k).collect()),
            blocks: k,
        });
    }

    let starts = setup.starts();
    let runs: Vec<Result<(Vec<f64>, f64)>> = starts.into_par_iter().map(|s| setup.run(s)).collect();
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut best_tau = f64::NEG_INFINITY;
    let mut feasible = 0;
    let mut first_err = None;
    for run in runs {
        let (x, t) = match run {
            Ok(v) => v,
            Err(e) => {
                first_err.get_or_insert(e);
                continue;
            }
        };
        if setup.tau_residual(t) > opts.tau_tol || x.iter().any(|v| !v.is_finite()) {
            if (t - problem_r(problem)).abs() < (best_tau - problem_r(problem)).abs() {
                best_tau = t;
            }
            continue;
        }
        feasible += 1;
        let obj = match problem {
            Problem::Partition => setup.rate(&x) - t,
            _ => setup.rate(&x),
        };
        let dist = l1(&x, &setup.base);
        let better = match &best {
            None => true,
            Some((bo, bd, _)) => obj < *bo - 1e-12 || (obj <= *bo + 1e-12 && dist < *bd),
        };
        if better {
            best = Some((obj, dist, x));
        }
    }
    let Some((_, _, x)) = best else {
        if let Some(e) = first_err {
            return Err(e);
        }
        return Err(Error::Infeasible { r: problem_r(problem), best: best_tau });
    };

    let raw = setup.graphon(&x);
    let mode = if k <= EXACT_PERMUTATION_MAX { SearchMode::Exact } else { SearchMode::Anneal };
    let j = rate_j(&raw, &lim.graphon, mode)?;
    let (minimizer, value, certificate) = match &j.certificate {
        Some(perm) if j.value < setup.rate(&x) - 1e-14 => (raw.permuted(perm)?, j.value, Some(perm.clone())),
        _ => (raw, setup.rate(&x), Some((0..k).collect())),
    };
    let t = tau.value(&minimizer)?;
    Ok(VariationalResult {
        value,
        constraint_residuals: ConstraintResiduals { degree_lp: degree_lp(&minimizer), tau: setup.tau_residual(t) },
        minimizer,
        restarts_used: feasible,
        certificate,
        blocks: k,
    })
}

fn problem_r(p: Problem) -> f64 {
    match p {
        Problem::AtLeast(r) | Problem::Equal(r) => r,
        Problem::Partition => f64::NAN,
    }
}
