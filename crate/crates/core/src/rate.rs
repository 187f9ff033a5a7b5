//! Relative-entropy rate functions and graphon entropies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::degree::{degree_measure, limit_graphon, BetaOptions, DegreeFunction};
use crate::error::{Error, Result};
use crate::graphon::{
    check_permutation, degree_distribution, levy_prokhorov, lift, refine, AnnealOptions, SearchMode,
    StepGraphon, CUT_NORM_BLOCK_CAP, EXACT_PERMUTATION_MAX, PARTITION_TOL, REFINEMENT_CAP,
};
use crate::graphon::{align_equal_blocks, degree_matching, for_each_permutation};

/// `x log x` with `0 log 0 = 0`.
#[inline]
fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Bernoulli relative entropy `w log(w/w0) + (1−w) log((1−w)/(1−w0))`;
/// `None` when `w0` sits on the boundary and `w` differs from it.
#[inline]
pub(crate) fn bernoulli_kl(w: f64, w0: f64) -> Option<f64> {
    let term = |a: f64, b: f64| -> Option<f64> {
        if a <= 0.0 {
            Some(0.0)
        } else if b <= 0.0 {
            None
        } else {
            Some(a * (a / b).ln())
        }
    };
    Some(term(w, w0)? + term(1.0 - w, 1.0 - w0)?)
}

/// `I_{W0}(W) = ½ ∫∫ [W log(W/W0) + (1−W) log((1−W)/(1−W0))]`.
pub fn relative_entropy_i(w: &StepGraphon, w0: &StepGraphon) -> Result<f64> {
    let r = refine(&[w.weights(), w0.weights()], REFINEMENT_CAP)?;
    let (a, b) = (lift(w, &r.maps[0]), lift(w0, &r.maps[1]));
    let m = r.len();
    let mut acc = 0.0;
    for s in 0..m {
        for t in 0..m {
            let kl = bernoulli_kl(a[s * m + t], b[s * m + t])
                .ok_or(Error::BoundaryW0 { row: r.maps[1][s], col: r.maps[1][t] })?;
            acc += r.weights[s] * r.weights[t] * kl;
        }
    }
    Ok(0.5 * acc)
}

/// `h_e(W) = ½ ∫∫ [W log W + (1−W) log(1−W)]`, a value in `[−½ log 2, 0]`.
pub fn entropy_he(w: &StepGraphon) -> f64 {
    let k = w.block_count();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            let v = w.value(i, j);
            acc += w.weights()[i] * w.weights()[j] * (xlogx(v) + xlogx(1.0 - v));
        }
    }
    0.5 * acc
}

/// A symmetric real-valued step function, the dual variable of `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricStep {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl SymmetricStep {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        let total: f64 = weights.iter().sum();
        if k == 0 || values.len() != k * k || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > PARTITION_TOL {
            return Err(Error::InvalidArgument("malformed step function".into()));
        }
        for i in 0..k {
            for j in 0..k {
                if !values[i * k + j].is_finite() || values[i * k + j] != values[j * k + i] {
                    return Err(Error::InvalidArgument("step function must be finite and symmetric".into()));
                }
            }
        }
        Ok(Self { weights, values })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.weights.len() + j]
    }
}

/// `log(w0 e^a + 1 − w0)` without overflow.
#[inline]
fn log_mgf(w0: f64, a: f64) -> f64 {
    if a > 0.0 {
        a + ((1.0 - w0) * (-a).exp_m1()).ln_1p()
    } else {
        (w0 * a.exp_m1()).ln_1p()
    }
}

/// `½ ∫∫ [a W − log(W0 e^a + 1 − W0)]`, a lower bound on `I_{W0}(W)` for every `a`.
pub fn dual_value(w: &StepGraphon, w0: &StepGraphon, a: &SymmetricStep) -> Result<f64> {
    let r = refine(&[w.weights(), w0.weights(), a.weights()], REFINEMENT_CAP)?;
    let m = r.len();
    let mut acc = 0.0;
    for s in 0..m {
        for t in 0..m {
            let x = w.value(r.maps[0][s], r.maps[0][t]);
            let x0 = w0.value(r.maps[1][s], r.maps[1][t]);
            if bernoulli_kl(x, x0).is_none() {
                return Err(Error::BoundaryW0 { row: r.maps[1][s], col: r.maps[1][t] });
            }
            let av = a.value(r.maps[2][s], r.maps[2][t]);
            acc += r.weights[s] * r.weights[t] * (av * x - log_mgf(x0, av));
        }
    }
    Ok(0.5 * acc)
}

/// The maximizer `a* = logit W − logit W0` of [`dual_value`]; needs both
/// graphons strictly inside `(0, 1)`.
pub fn optimal_dual(w: &StepGraphon, w0: &StepGraphon) -> Result<SymmetricStep> {
    let r = refine(&[w.weights(), w0.weights()], REFINEMENT_CAP)?;
    let (a, b) = (lift(w, &r.maps[0]), lift(w0, &r.maps[1]));
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let mut values = Vec::with_capacity(a.len());
    for (&x, &x0) in a.iter().zip(&b) {
        if !(x > 0.0 && x < 1.0 && x0 > 0.0 && x0 < 1.0) {
            return Err(Error::InvalidArgument("optimal dual needs values strictly inside (0, 1)".into()));
        }
        values.push(logit(x) - logit(x0));
    }
    SymmetricStep::new(r.weights, values)
}

/// A rate value, possibly infinite, with the block permutation achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateValue {
    pub value: f64,
    /// `φ` with `value = I_{W0}(W^φ)`, where `W^φ(i, j) = W(φ(i), φ(j))`.
    pub certificate: Option<Vec<usize>>,
    /// True when every block permutation was examined.
    pub exact: bool,
}

impl RateValue {
    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, certificate: None, exact: true }
    }
}

impl Serialize for RateValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RateValue", 3)?;
        if self.value.is_infinite() {
            st.serialize_field("value", "inf")?;
        } else {
            st.serialize_field("value", &self.value)?;
        }
        st.serialize_field("certificate", &self.certificate)?;
        st.serialize_field("exact", &self.exact)?;
        st.end()
    }
}

/// `min_φ I_{W0}(W^φ)` over block permutations, after aligning both graphons
/// on a common equal-block grid.
pub fn rate_j(w: &StepGraphon, w0: &StepGraphon, mode: SearchMode) -> Result<RateValue> {
    rate_j_with(w, w0, mode, &AnnealOptions::default())
}

pub fn rate_j_with(w: &StepGraphon, w0: &StepGraphon, mode: SearchMode, opts: &AnnealOptions) -> Result<RateValue> {
    let (a, b) = align_equal_blocks(w, w0, REFINEMENT_CAP.max(CUT_NORM_BLOCK_CAP))?;
    let k = a.block_count();
    // kl[(s, t) * k * k + (u, v)] would be k^4; evaluate per permutation instead
    let eval = |perm: &[usize]| -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                let kl = bernoulli_kl(a.value(perm[i], perm[j]), b.value(i, j))
                    .ok_or(Error::BoundaryW0 { row: i, col: j })?;
                acc += kl;
            }
        }
        Ok(0.5 * acc / (k * k) as f64)
    };
    match mode {
        SearchMode::Exact => {
            if k > EXACT_PERMUTATION_MAX {
                return Err(Error::ExactModeTooLarge { blocks: k, max: EXACT_PERMUTATION_MAX });
            }
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut err = None;
            for_each_permutation(k, |perm| match eval(perm) {
                Ok(v) if best.as_ref().map_or(true, |(b, _)| v < *b) => best = Some((v, perm.to_vec())),
                Ok(_) => {}
                Err(e) => {
                    err.get_or_insert(e);
                }
            });
            match best {
                Some((value, perm)) => Ok(RateValue { value, certificate: Some(perm), exact: true }),
                None => Err(err.expect("at least one permutation is visited")),
            }
        }
        SearchMode::Anneal => {
            let mut candidates = vec![(0..k).collect::<Vec<_>>(), degree_matching(&b, &a)];
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut err = None;
            for c in candidates.drain(..) {
                match eval(&c) {
                    Ok(v) if best.as_ref().map_or(true, |(b, _)| v < *b) => best = Some((v, c)),
                    Ok(_) => {}
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            let Some((mut cur, mut perm)) = best else {
                return Err(err.expect("candidates were evaluated"));
            };
            let mut best = (cur, perm.clone());
            if k > 1 {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let ratio = (opts.end_temperature / opts.start_temperature).ln();
                for it in 0..opts.iterations {
                    let temp = opts.start_temperature * (ratio * it as f64 / opts.iterations as f64).exp();
                    let i = rng.gen_range(0..k);
                    let j = rng.gen_range(0..k);
                    if i == j {
                        continue;
                    }
                    perm.swap(i, j);
                    match eval(&perm) {
                        Ok(next) if next <= cur || rng.gen::<f64>() < ((cur - next) / temp).exp() => {
                            cur = next;
                            if cur < best.0 {
                                best = (cur, perm.clone());
                            }
                        }
                        _ => perm.swap(i, j),
                    }
                }
            }
            Ok(RateValue { value: best.0, certificate: Some(best.1), exact: false })
        }
    }
}

/// Rate under a degree constraint: `+∞` when the degree distribution of `W`
/// is farther than `lp_tol` from `μ_D` in Lévy–Prokhorov distance, otherwise
/// [`rate_j`] against `W_D` on `k` blocks.
pub fn rate_j_d(w: &StepGraphon, d: &DegreeFunction, k: usize, lp_tol: f64, mode: SearchMode) -> Result<RateValue> {
    let lp = levy_prokhorov(&degree_distribution(w), &degree_measure(d));
    if lp > lp_tol {
        return Ok(RateValue::infinite());
    }
    let lim = limit_graphon(d, k, &BetaOptions::default())?;
    rate_j(w, &lim.graphon, mode)
}

/// The two forms of the graph-count exponent for a degree function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingEntropy {
    /// `h_e(W_D)`, in `[−½ log 2, 0]`.
    pub entropy_he: f64,
    /// `−∫ β D + ½ ∫∫ log(1 + e^{β(x)+β(y)})`, the limit of `(1/n²) log |G_{n,d}|`;
    /// equal to `−h_e(W_D)` at the fixed point.
    pub log_count_rate: f64,
    pub blocks: usize,
}

pub fn counting_entropy(d: &DegreeFunction, k: usize) -> Result<CountingEntropy> {
    let lim = limit_graphon(d, k, &BetaOptions::default())?;
    let he = entropy_he(&lim.graphon);
    let beta = &lim.beta.beta;
    let kf = k as f64;
    let linear: f64 = beta.iter().zip(&lim.degrees).map(|(b, d)| b * d).sum::<f64>() / kf;
    let mut pair = 0.0;
    for &bi in beta {
        for &bj in beta {
            let x = bi + bj;
            // log(1 + e^x) without overflow
            pair += if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        }
    }
    let rate = -linear + 0.5 * pair / (kf * kf);
    let gap = (rate + he).abs();
    if gap > 1e-8 {
        return Err(Error::NonConvergence { iterations: lim.beta.iterations, residual: gap });
    }
    Ok(CountingEntropy { entropy_he: he, log_count_rate: rate, blocks: k })
}

/// Permutation inverse, used to express certificates.
pub fn inverse_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Ok(inv)
}
