//! Symmetric row-sum corrections on equal-block graphons.
//!
//! A correction is a symmetric `n × n` matrix `w` with zero diagonal; its
//! row sums are `(Mw)_i = Σ_{j≠i} w_ij`, `M` the vertex-pair incidence matrix.

use crate::error::{Error, Result};
use crate::graphon::{degree_function, regrid, StepGraphon};

/// Maximum repair rounds before giving up.
pub const REPAIR_ROUNDS: usize = 100;
/// Sup-norm defect accepted by [`repair_degrees`].
pub const REPAIR_TOL: f64 = 1e-12;

/// `Σ_{j≠i} w_ij` for a row-major symmetric matrix.
pub fn incidence_sums(w: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| w[i * n + j]).sum()).collect()
}

/// Minimum-norm solution of `Mw = a`:
/// `w_ij = y_i + y_j` with `y = (MMᵀ)⁻¹ a`, `(MMᵀ)⁻¹ = I/(n−2) − 11ᵀ/(2(n−1)(n−2))`.
///
/// Its sup norm can reach `3‖a‖∞/(n−1)`; [`fixed_sum_weights`] enforces the
/// smaller `2‖a‖∞/(n−2)`.
pub fn closed_form_weights(a: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("pair corrections need at least 3 blocks, got {n}")));
    }
    let nf = n as f64;
    let total: f64 = a.iter().sum();
    let shift = total / (2.0 * (nf - 1.0) * (nf - 2.0));
    let y: Vec<f64> = a.iter().map(|x| x / (nf - 2.0) - shift).collect();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = y[i] + y[j];
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    Ok(w)
}

/// A solution of `Mw = a` with `‖w‖∞ ≤ 2‖a‖∞/(n−2)`, found by alternating
/// projections between the affine solution set and the sup-norm box,
/// starting from the minimum-norm solution.
pub fn fixed_sum_weights(a: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut w = closed_form_weights(a)?;
    let bound = 2.0 * a.iter().fold(0.0_f64, |m, x| m.max(x.abs())) / (n - 2) as f64;
    // aim slightly inside the box so the last affine step lands within it
    let box_cap = bound * (1.0 - 1e-6);
    for _ in 0..10_000 {
        if sup(&w) <= bound * (1.0 - 1e-9) {
            break;
        }
        for v in &mut w {
            *v = v.clamp(-box_cap, box_cap);
        }
        let defect: Vec<f64> = incidence_sums(&w, n).iter().zip(a).map(|(s, t)| t - s).collect();
        let fix = closed_form_weights(&defect)?;
        for (v, f) in w.iter_mut().zip(&fix) {
            *v += f;
        }
    }
    Ok(w)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn check_equal(w: &StepGraphon) -> Result<()> {
    if !w.has_equal_blocks() {
        return Err(Error::InvalidGraphon("degree repair needs equal blocks".into()));
    }
    Ok(())
}

/// Adds symmetric off-diagonal corrections until the block degrees match
/// `target`, clipping to `[0, 1]` after every round. Diagonal blocks are
/// left untouched.
pub fn repair_degrees(w: &StepGraphon, target: &[f64]) -> Result<StepGraphon> {
    check_equal(w)?;
    let k = w.block_count();
    if target.len() != k {
        return Err(Error::InvalidArgument(format!("{} target degrees for {k} blocks", target.len())));
    }
    if target.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("target degrees must lie in [0, 1]".into()));
    }
    let kf = k as f64;
    let mut values = w.values().to_vec();
    let mut defect = f64::INFINITY;
    for round in 0..=REPAIR_ROUNDS {
        let a: Vec<f64> = (0..k)
            .map(|i| target[i] - values[i * k..(i + 1) * k].iter().sum::<f64>() / kf)
            .collect();
        defect = sup(&a);
        if defect < REPAIR_TOL {
            return Ok(StepGraphon::from_parts_unchecked(vec![1.0 / kf; k], values));
        }
        if round == REPAIR_ROUNDS {
            break;
        }
        // rows change by (1/k) Σ_j Δ_ij, so scale the pair weights by k
        let corr = fixed_sum_weights(&a)?;
        for (v, c) in values.iter_mut().zip(&corr) {
            *v = (*v + kf * c).clamp(0.0, 1.0);
        }
    }
    Err(Error::RepairStalled { rounds: REPAIR_ROUNDS, defect })
}

/// Builds an equal-block graphon with block degrees exactly `f_target`
/// close to `g`: average `g` onto `f_target.len()` blocks, add the rank-one
/// correction `ε(x)ε(y)/∫ε` for the degree error `ε`, zero the diagonal
/// blocks and repair the remaining defect.
///
/// When `∫ε = 0` with `ε ≠ 0`, or the rank-one term would leave `[0, 1]`,
/// only the repair step is applied.
pub fn step_approximation(g: &StepGraphon, f_target: &[f64]) -> Result<StepGraphon> {
    let k = f_target.len();
    if k < 3 {
        return Err(Error::InvalidArgument(format!("step approximation needs at least 3 blocks, got {k}")));
    }
    let avg = regrid(g, k)?;
    let eps: Vec<f64> = degree_function(&avg).iter().zip(f_target).map(|(f, t)| t - f).collect();
    let mean = eps.iter().sum::<f64>() / k as f64;
    let mut values = avg.values().to_vec();
    if sup(&eps) > 0.0 && mean != 0.0 {
        let shifted: Vec<f64> = (0..k * k).map(|ij| values[ij] + eps[ij / k] * eps[ij % k] / mean).collect();
        if shifted.iter().all(|v| (0.0..=1.0).contains(v)) {
            values = shifted;
        }
    }
    for i in 0..k {
        values[i * k + i] = 0.0;
    }
    let out = repair_degrees(&StepGraphon::from_parts_unchecked(vec![1.0 / k as f64; k], values), f_target)?;
    let worst = degree_function(&out).iter().zip(f_target).fold(0.0_f64, |m, (f, t)| m.max((f - t).abs()));
    if worst > 1e-10 {
        return Err(Error::RepairStalled { rounds: REPAIR_ROUNDS, defect: worst });
    }
    Ok(out)
}
