//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every verdict is printed even when an earlier one fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use graphon_ldp::enumerate::{collect_graphs, count_by_enumeration, count_graphs, verify_deg_partition_identity};
use graphon_ldp::functional::SubgraphDensity;
use graphon_ldp::rate::{optimal_dual, SymmetricStep};
use graphon_ldp::sampling::{switch_samples, RejectionSampler};
use graphon_ldp::variational::{fixed_sum_weights, incidence_sums};
use graphon_ldp::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn timed(limit: Duration, start: Instant, v: Verdict) -> Verdict {
    let took = start.elapsed();
    let pass = v.pass && took <= limit;
    verdict(pass, format!("{} ({:.2} s of {} s)", v.detail, took.as_secs_f64(), limit.as_secs()))
}

fn random_graphon(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> StepGraphon {
    let mut v = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let x = rng.gen_range(lo..hi);
            v[i][j] = x;
            v[j][i] = x;
        }
    }
    StepGraphon::equal(v).unwrap()
}

fn random_graphical(rng: &mut ChaCha8Rng, n: usize) -> DegreeSequence {
    // degrees of a G(n, 1/2) draw, resampled until no vertex is forced
    loop {
        let mut deg = vec![0usize; n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        let d = DegreeSequence::new(deg).unwrap();
        if d.as_slice().iter().all(|&x| x > 0 && x + 1 < n) && RejectionSampler::new(&d).is_ok() {
            return d;
        }
    }
}

fn small_sequences() -> Vec<DegreeSequence> {
    (3..=5).map(|n| DegreeSequence::regular(n, 2).unwrap()).collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seqs = small_sequences();
    for _ in 0..3 {
        seqs.push(random_graphical(&mut rng, 6));
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for d in &seqs {
        let r = verify_deg_partition_identity(d).unwrap();
        worst = worst.max(r.relative_residual);
        parts.push(format!("{:?}:{:.1e}", d.as_slice(), r.relative_residual));
    }
    timed(Duration::from_secs(10), start, verdict(worst < 1e-10, format!("worst residual {worst:.2e} [{}]", parts.join(" "))))
}

/// Counts by scanning every labeled graph on `n` vertices.
fn brute_force_count(d: &DegreeSequence) -> u64 {
    let n = d.n();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0u32..1 << pairs.len())
        .filter(|mask| {
            let mut deg = vec![0usize; n];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
            deg == d.as_slice()
        })
        .count() as u64
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let expected = [1u64, 3, 12];
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, &want) in small_sequences().iter().zip(&expected) {
        let brute = brute_force_count(d);
        let enumerated = count_by_enumeration(d).unwrap();
        let dp = count_graphs(d).unwrap();
        ok &= brute == want && enumerated == want && dp == want as u128;
        parts.push(format!("n={}: brute {brute}, enumeration {enumerated}, count {dp}", d.n()));
    }
    timed(Duration::from_secs(5), start, verdict(ok, parts.join("; ")))
}

fn chi_square_p(counts: &HashMap<Vec<(usize, usize)>, u64>, outcomes: usize, total: u64) -> f64 {
    let expected = total as f64 / outcomes as f64;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>()
        + (outcomes - counts.len()) as f64 * expected;
    1.0 - ChiSquared::new((outcomes - 1) as f64).unwrap().cdf(stat)
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let d = DegreeSequence::regular(5, 2).unwrap();
    let outcomes = collect_graphs(&d).unwrap().len();
    let samples = 12_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let sampler = RejectionSampler::new(&d).unwrap();
    let mut rejection: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    let mut matched = 0u64;
    for _ in 0..samples {
        let (g, _) = sampler.sample(&mut rng, 1_000_000).unwrap();
        matched += d.matches(&g) as u64;
        *rejection.entry(g.edges()).or_default() += 1;
    }
    let mut switch: HashMap<Vec<(usize, usize)>, u64> = HashMap::new();
    for g in switch_samples(&d, &mut rng, samples as usize, 1_000, 50).unwrap() {
        matched += d.matches(&g) as u64;
        *switch.entry(g.edges()).or_default() += 1;
    }
    let p_rej = chi_square_p(&rejection, outcomes, samples);
    let p_sw = chi_square_p(&switch, outcomes, samples);
    let ok = outcomes == 12 && p_rej > 0.01 && p_sw > 0.01 && matched == 2 * samples;
    timed(
        Duration::from_secs(60),
        start,
        verdict(ok, format!("{outcomes} outcomes, p rejection {p_rej:.3}, p switch {p_sw:.3}, degree checks {matched}/{}", 2 * samples)),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w0 = random_graphon(&mut rng, 4, 0.05, 0.95);
    let zero = relative_entropy_i(&w0, &w0).unwrap() == 0.0;
    let mut gap: f64 = 0.0;
    for _ in 0..100 {
        let w = random_graphon(&mut rng, 4, 0.01, 0.99);
        let w0 = random_graphon(&mut rng, 4, 0.05, 0.95);
        let a = optimal_dual(&w, &w0).unwrap();
        gap = gap.max((dual_value(&w, &w0, &a).unwrap() - relative_entropy_i(&w, &w0).unwrap()).abs());
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let w = random_graphon(&mut rng, 4, 0.0, 1.0);
        let w0 = random_graphon(&mut rng, 4, 0.05, 0.95);
        let k = rng.gen_range(1..=5);
        let mut vals = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let x = rng.gen_range(-6.0..6.0);
                vals[i * k + j] = x;
                vals[j * k + i] = x;
            }
        }
        let a = SymmetricStep::new(vec![1.0 / k as f64; k], vals).unwrap();
        if dual_value(&w, &w0, &a).unwrap() > relative_entropy_i(&w, &w0).unwrap() + 1e-12 {
            violations += 1;
        }
    }
    timed(
        Duration::from_secs(10),
        start,
        verdict(zero && gap < 1e-10 && violations == 0, format!("I(W0,W0)=0: {zero}, max dual gap {gap:.2e}, weak duality violations {violations}/1000")),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..200 {
        let k = rng.gen_range(1..=6);
        let w1 = random_graphon(&mut rng, k, 0.0, 1.0);
        let w2 = random_graphon(&mut rng, k, 0.0, 1.0);
        let lp = levy_prokhorov(&degree_distribution(&w1), &degree_distribution(&w2));
        let bound = (2.0 * cut_metric_upper(&w1, &w2, SearchMode::Exact).unwrap().value).sqrt();
        tightest = tightest.min(bound - lp);
        if lp > bound + 1e-12 {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("violations {violations}/200, smallest slack {tightest:.3e}"))
}

fn criterion_6() -> Verdict {
    let d = DegreeFunction::constant(0.5).unwrap();
    let lim = limit_graphon(&d, 32, &BetaOptions::default()).unwrap();
    let w_err = lim.graphon.values().iter().fold(0.0f64, |m, v| m.max((v - 0.5).abs()));
    let b_err = lim.beta.sup_norm();
    let ce = counting_entropy(&d, 32).unwrap();
    let target = -0.5 * 2f64.ln();
    let h_err = (ce.entropy_he - target).abs();
    verdict(
        w_err <= 1e-9 && b_err <= 1e-9 && h_err <= 1e-10,
        format!("max |W_D - 1/2| {w_err:.1e}, max |beta| {b_err:.1e}, |h_e + log2/2| {h_err:.1e}, log count rate {:.12}", ce.log_count_rate),
    )
}

fn kl_half(p: f64) -> f64 {
    let x = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    x(p) + x(1.0 - p) + 2f64.ln()
}

/// Lower bound of `KL(·‖½)` over `[lo, hi]`.
fn kl_half_min(lo: f64, hi: f64) -> f64 {
    kl_half(0.5f64.clamp(lo, hi))
}

fn triangle4(a: &[[f64; 4]; 4]) -> f64 {
    let mut t = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for l in 0..4 {
                t += a[i][j] * a[j][l] * a[i][l];
            }
        }
    }
    t / 64.0
}

/// Off-diagonal entries of a 4-block graphon, in the order 01 02 03 12 13 23.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Diagonal intervals implied by row sums of 2 (all degrees ½).
fn diagonals(lo: &[f64; 6], hi: &[f64; 6]) -> Option<[(f64, f64); 4]> {
    let mut out = [(0.0, 0.0); 4];
    for (i, d) in out.iter_mut().enumerate() {
        let (mut sl, mut sh) = (0.0, 0.0);
        for (e, &(u, v)) in PAIRS.iter().enumerate() {
            if u == i || v == i {
                sl += lo[e];
                sh += hi[e];
            }
        }
        let (a, b) = ((2.0 - sh).max(0.0), (2.0 - sl).min(1.0));
        if a > b {
            return None;
        }
        *d = (a, b);
    }
    Some(out)
}

fn matrix(off: &[f64; 6], diag: [f64; 4]) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        a[i][i] = diag[i];
    }
    for (e, &(u, v)) in PAIRS.iter().enumerate() {
        a[u][v] = off[e];
        a[v][u] = off[e];
    }
    a
}

struct Cell {
    lb: f64,
    lo: [f64; 6],
    hi: [f64; 6],
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lb == other.lb
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // reversed, so the heap pops the smallest bound
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.lb.total_cmp(&self.lb)
    }
}

/// Lower bound of `I` over a box, `None` when the box holds no admissible
/// point. The triangle density is increasing in every entry, so its value at
/// the high corner bounds it above; `KL(·‖½)` is bounded below on an interval
/// by its value at the point closest to ½.
fn cell_bound(lo: &[f64; 6], hi: &[f64; 6], r: f64) -> Option<f64> {
    // relabeling blocks moves the largest off-diagonal entry to 01 and then
    // the largest of 02 03 12 13 to 02
    if (1..6).any(|e| hi[0] < lo[e]) || [2, 3, 4].iter().any(|&e| hi[1] < lo[e]) {
        return None;
    }
    let d = diagonals(lo, hi)?;
    if triangle4(&matrix(hi, [d[0].1, d[1].1, d[2].1, d[3].1])) < r {
        return None;
    }
    let mut acc: f64 = d.iter().map(|&(a, b)| kl_half_min(a, b)).sum();
    for e in 0..6 {
        acc += 2.0 * kl_half_min(lo[e], hi[e]);
    }
    Some(acc / 32.0)
}

/// Rigorous lower bound for the triangle upper tail on 4 equal blocks with
/// all degrees ½, by best-first branch and bound over boxes of the six
/// off-diagonal values (row sums pin the diagonal). Runs until `budget` is
/// spent; the smallest open bound is valid at any point. Also returns the
/// best admissible box centre found.
fn branch_and_bound(r: f64, budget: Duration) -> (f64, f64) {
    let start = Instant::now();
    let mut best = f64::INFINITY;
    let mut heap = std::collections::BinaryHeap::new();
    let (lo, hi) = ([0.0; 6], [1.0; 6]);
    if let Some(lb) = cell_bound(&lo, &hi, r) {
        heap.push(Cell { lb, lo, hi });
    }
    while let Some(cell) = heap.pop() {
        if cell.lb >= best || start.elapsed() > budget {
            return (cell.lb.min(best), best);
        }
        let centre: [f64; 6] = std::array::from_fn(|e| 0.5 * (cell.lo[e] + cell.hi[e]));
        if let Some(d) = diagonals(&centre, &centre) {
            let a = matrix(&centre, [d[0].0, d[1].0, d[2].0, d[3].0]);
            if triangle4(&a) >= r {
                best = best.min(a.iter().flatten().map(|&v| kl_half(v)).sum::<f64>() / 32.0);
            }
        }
        let e = (0..6).max_by(|&x, &y| (cell.hi[x] - cell.lo[x]).total_cmp(&(cell.hi[y] - cell.lo[y]))).unwrap();
        let mid = 0.5 * (cell.lo[e] + cell.hi[e]);
        for (l, h) in [(cell.lo[e], mid), (mid, cell.hi[e])] {
            let (mut lo, mut hi) = (cell.lo, cell.hi);
            lo[e] = l;
            hi[e] = h;
            if let Some(lb) = cell_bound(&lo, &hi, r) {
                if lb < best {
                    heap.push(Cell { lb, lo, hi });
                }
            }
        }
    }
    (best, best)
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let d = DegreeFunction::constant(0.5).unwrap();
    let tri = SubgraphDensity(SubgraphPattern::triangle());
    let opts = VariationalOptions::default();
    let w_d = limit_graphon(&d, opts.k, &BetaOptions::default()).unwrap().graphon;

    let low = solve_phi(&d, &tri, 0.1, &opts).unwrap();
    let dist = cut_metric_upper(&low.minimizer, &w_d, SearchMode::Anneal).unwrap().value;
    let below_ok = low.value < 1e-6 && dist <= 1e-3;

    let high = solve_phi(&d, &tri, 0.15, &opts).unwrap();
    let small = VariationalOptions { k: 4, ..opts.clone() };
    let high4 = solve_phi(&d, &tri, 0.15, &small).unwrap();
    let (lower, best_point) = branch_and_bound(0.15, Duration::from_secs(60));
    let above_ok = high.value > 0.0 && high.value >= lower - 1e-3 && high4.value >= lower - 1e-3 && high4.value <= best_point + 1e-3;
    timed(
        Duration::from_secs(300),
        start,
        verdict(
            below_ok && above_ok,
            format!(
                "r=0.1: value {:.1e}, cut distance to W_D {dist:.1e}; r=0.15: value {:.6} at k={}, {:.6} at k=4, \
                 4-block branch-and-bound lower bound {lower:.6}, best box centre {best_point:.6}",
                low.value, high.value, opts.k, high4.value
            ),
        ),
    )
}

fn criterion_8() -> Verdict {
    let d = DegreeFunction::constant(0.5).unwrap();
    let tri = SubgraphDensity(SubgraphPattern::triangle());
    let opts = VariationalOptions::default();
    let rs: Vec<f64> = (0..8).map(|i| 0.125 + 0.005 * i as f64).collect();
    let values: Vec<f64> = rs.iter().map(|&r| solve_phi(&d, &tri, r, &opts).unwrap().value).collect();
    let ok = values.windows(2).all(|p| p[1] >= p[0] - 1e-6);
    let listed: Vec<String> = rs.iter().zip(&values).map(|(r, v)| format!("{r:.3}:{v:.6}")).collect();
    verdict(ok, format!("k={}: {}", opts.k, listed.join(" ")))
}

fn criterion_9() -> Verdict {
    let mut rates = Vec::new();
    let mut parts = Vec::new();
    for n in [6usize, 8, 10] {
        let d = DegreeSequence::regular(n, n / 2).unwrap();
        let count = count_by_enumeration(&d).unwrap();
        assert_eq!(count as u128, count_graphs(&d).unwrap());
        let rate = (count as f64).ln() / (n * n) as f64;
        parts.push(format!("n={n}: {count} graphs, rate {rate:.6}"));
        rates.push(rate);
    }
    let ce = counting_entropy(&DegreeFunction::constant(0.5).unwrap(), 16).unwrap();
    // the count grows like exp(-n² h_e), so the rates approach -h_e = log2/2
    let limit = ce.log_count_rate;
    let gaps: Vec<f64> = rates.iter().map(|r| (limit - r).abs()).collect();
    let literal: Vec<f64> = rates.iter().map(|r| (ce.entropy_he - r).abs()).collect();
    let ok = gaps.windows(2).all(|p| p[1] < p[0]) && rates.windows(2).all(|p| p[1] > p[0]);
    verdict(
        ok,
        format!(
            "{}; limit -h_e = {limit:.6}, gaps {:.4} {:.4} {:.4} (n=10 gap {:.4}); distances to h_e itself {:.4} {:.4} {:.4}",
            parts.join(", "),
            gaps[0],
            gaps[1],
            gaps[2],
            gaps[2],
            literal[0],
            literal[1],
            literal[2]
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_eq: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for n in [5usize, 10, 50] {
        for _ in 0..100 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = fixed_sum_weights(&a).unwrap();
            for (s, x) in incidence_sums(&w, n).iter().zip(&a) {
                worst_eq = worst_eq.max((s - x).abs());
            }
            let bound = 2.0 * a.iter().fold(0.0f64, |m, x| m.max(x.abs())) / (n - 2) as f64;
            worst_ratio = worst_ratio.max(w.iter().fold(0.0f64, |m, x| m.max(x.abs())) / bound);
        }
    }
    verdict(worst_eq <= 1e-12 && worst_ratio <= 1.0, format!("max |Mw - a| {worst_eq:.1e}, max sup/bound {worst_ratio:.6}"))
}

fn main() {
    // `cargo test -- --list` and similar harness probes expect no output
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(usize, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let v = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("criterion {n} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
