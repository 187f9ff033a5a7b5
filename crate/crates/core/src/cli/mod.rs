//! `graphon-ldp` command line.
//!
//! Every command prints one JSON document (or a CSV table) to `--output` or
//! stdout. With `--output`, a manifest `<output>.manifest.json` records the
//! input digests, seed, arguments and version needed to reproduce the run.
//! Module errors are reported on stderr as `{"error": {...}}` with an exit
//! code per error class.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::degree::{
    check_assumption, degree_function_of_sequence, erdos_gallai, havel_hakimi, limit_graphon, solve_beta,
    BetaOptions, BetaVector, DegreeFunction, DegreeSequence,
};
use crate::enumerate::{
    collect_graphs, count_graphs, count_with_functional, ldp_rate_estimate, partition_function,
    verify_deg_partition_identity,
};
use crate::error::{Error, Result};
use crate::functional::FunctionalRegistry;
use crate::graphon::{
    cut_metric_upper_with, cut_norm_distance, AnnealOptions, LabeledGraph, SearchMode, StepGraphon,
};
use crate::io::{parse_degree_sequence, read_json, to_json};
use crate::rate::{counting_entropy, entropy_he, rate_j_d, rate_j_with, relative_entropy_i};
use crate::sampling::{default_burn_in, default_thin, sample_irg, switch_samples, RejectionSampler, DEFAULT_MAX_TRIES};
use crate::variational::{count_asymptotic, limit_partition_z, solve_phi, solve_psi, VariationalOptions};

/// Directory for memoized β fits.
pub const CACHE_ENV: &str = "GRAPHON_LDP_CACHE";

#[derive(Debug, Parser)]
#[command(name = "graphon-ldp", version, about = "Graph limits and large deviations for random graphs with given degrees")]
pub struct Cli {
    /// Input files in the order the command expects (degree sequences as JSON
    /// arrays or one integer per line, graphons and degree functions as JSON).
    #[arg(long, short, global = true)]
    pub input: Vec<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every random choice; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file of option overrides.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides read from `--config`. Command-line flags win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub beta: Option<BetaOptions>,
    pub anneal: Option<AnnealOptions>,
    pub variational: Option<VariationalOptions>,
    pub max_tries: Option<u64>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateKind {
    /// `I_{W0}(W)`
    I,
    /// `J(W)`, minimized over block permutations
    J,
    /// `J_D(W)` against the limit of a degree function
    Jd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutKind {
    /// `d_□` on the given labelling
    Norm,
    /// upper bound on `δ_□` over block permutations
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Anneal,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => SearchMode::Exact,
            Mode::Anneal => SearchMode::Anneal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    Irg,
    Rejection,
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariationalProblem {
    Phi,
    Psi,
    Partition,
    Count,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Erdős–Gallai test plus the interior-condition report of the sequence's degree function.
    CheckDegrees {
        /// Comma-separated degrees instead of an input file.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
    },
    /// β-model fit of a degree sequence.
    FitBeta {
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
    },
    /// Limiting graphon `W_D` of a degree function on equal blocks.
    LimitGraphon {
        #[arg(long, default_value_t = 16)]
        blocks: usize,
        /// Constant degree function instead of an input file.
        #[arg(long)]
        constant: Option<f64>,
        /// Emit a `row,col,value` table.
        #[arg(long)]
        csv: bool,
    },
    /// Rate functions between graphon files (`W` first, then `W0` or a degree function).
    Rate {
        #[arg(long, value_enum, default_value = "i")]
        kind: RateKind,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 16)]
        blocks: usize,
        #[arg(long, default_value_t = 1e-3)]
        lp_tol: f64,
        #[arg(long)]
        constant: Option<f64>,
    },
    /// Cut distance between two graphon files.
    CutDistance {
        #[arg(long, value_enum, default_value = "metric")]
        kind: CutKind,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Random graphs: inhomogeneous (graphon input) or uniform with given degrees.
    Sample {
        #[arg(long, value_enum)]
        method: SampleMethod,
        /// Vertex count for `irg`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Also write each graph as an edge-list file `graph-<i>.txt` here.
        #[arg(long)]
        graph_dir: Option<PathBuf>,
    },
    /// Exact counts of graphs with the given degrees.
    Enumerate {
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Functional for constrained counts and the partition function.
        #[arg(long)]
        functional: Option<String>,
        /// Threshold for the constrained count `#{τ ≥ r}`.
        #[arg(long)]
        r: Option<f64>,
        /// Include every graph as a 1-based edge list.
        #[arg(long)]
        list: bool,
    },
    /// Both sides of the degree/β-model identity at small n.
    VerifyIdentity {
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
    },
    /// `(1/n²) log P(τ ≥ r)` under the uniform law on graphs with the given degrees.
    LdpEstimate {
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        #[arg(long)]
        functional: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Degree-constrained variational problems.
    Variational {
        #[arg(value_enum)]
        problem: VariationalProblem,
        #[arg(long)]
        functional: String,
        #[arg(long)]
        r: Option<f64>,
        /// `start:stop:step` sweep of `r`, written as CSV.
        #[arg(long)]
        r_grid: Option<String>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        constant: Option<f64>,
    },
    /// Counting entropy of a degree function, or `h_e` of a graphon with `--graphon`.
    Entropy {
        #[arg(long, default_value_t = 16)]
        blocks: usize,
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long)]
        graphon: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckDegrees { .. } => "check-degrees",
            Command::FitBeta { .. } => "fit-beta",
            Command::LimitGraphon { .. } => "limit-graphon",
            Command::Rate { .. } => "rate",
            Command::CutDistance { .. } => "cut-distance",
            Command::Sample { .. } => "sample",
            Command::Enumerate { .. } => "enumerate",
            Command::VerifyIdentity { .. } => "verify-identity",
            Command::LdpEstimate { .. } => "ldp-estimate",
            Command::Variational { .. } => "variational",
            Command::Entropy { .. } => "entropy",
        }
    }
}

/// Primary output of a command.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> Result<String> {
        Ok(match self {
            Output::Json(v) => to_json(v)? + "\n",
            Output::Csv(s) => s.clone(),
        })
    }
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: Vec<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    inputs: Vec<FileDigest>,
    config: Option<FileDigest>,
    output: String,
    output_sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest(path: &Path) -> Result<FileDigest> {
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&std::fs::read(path)?) })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let printable: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &printable) {
        Ok(()) => 0,
        Err(e) => {
            let report = json!({ "error": { "class": e.class(), "message": e.to_string(), "exit_code": e.exit_code() } });
            eprintln!("{}", to_json(&report).unwrap_or_else(|_| e.to_string()));
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<()> {
    let config: ExperimentConfig = match &cli.config {
        Some(p) => read_json(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(config.seed);
    let threads = cli.threads.or(config.threads);
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidArgument("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = dispatch(cli, &config, seed)?;
    let text = out.render()?;
    match &cli.output {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, &text)?;
            let manifest = Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: cli.command.name(),
                args: args.to_vec(),
                seed,
                threads,
                inputs: cli.input.iter().map(|p| digest(p)).collect::<Result<_>>()?,
                config: cli.config.as_deref().map(digest).transpose()?,
                output: path.display().to_string(),
                output_sha256: sha256_hex(text.as_bytes()),
            };
            let mut m = path.clone().into_os_string();
            m.push(".manifest.json");
            std::fs::write(PathBuf::from(m), to_json(&manifest)? + "\n")?;
        }
    }
    Ok(())
}

fn input(cli: &Cli, idx: usize, what: &str) -> Result<PathBuf> {
    cli.input
        .get(idx)
        .cloned()
        .ok_or_else(|| Error::InvalidArgument(format!("missing --input #{} ({what})", idx + 1)))
}

fn degrees(cli: &Cli, inline: &Option<Vec<usize>>) -> Result<DegreeSequence> {
    match inline {
        Some(d) => DegreeSequence::new(d.clone()),
        None => parse_degree_sequence(&std::fs::read_to_string(input(cli, 0, "degree sequence")?)?),
    }
}

fn degree_function(cli: &Cli, constant: Option<f64>, idx: usize) -> Result<DegreeFunction> {
    match constant {
        Some(p) => DegreeFunction::constant(p),
        None => read_json(&input(cli, idx, "degree function")?),
    }
}

fn graphon(cli: &Cli, idx: usize) -> Result<StepGraphon> {
    read_json(&input(cli, idx, "graphon")?)
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidArgument(format!("{command} is stochastic and needs --seed")))
}

fn edge_list(g: &LabeledGraph) -> Vec<[usize; 2]> {
    g.edges().into_iter().map(|(i, j)| [i + 1, j + 1]).collect()
}

fn count_value(c: u128) -> Value {
    match u64::try_from(c) {
        Ok(v) => json!(v),
        Err(_) => json!(c.to_string()),
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// `β` fit, memoized under `$GRAPHON_LDP_CACHE` when set.
fn cached_beta(d: &DegreeSequence, opts: &BetaOptions) -> Result<BetaVector> {
    let Some(dir) = std::env::var_os(CACHE_ENV) else {
        return solve_beta(d, opts);
    };
    let key = sha256_hex(format!("beta-v1:{}:{}", to_json(d)?, to_json(opts)?).as_bytes());
    let path = Path::new(&dir).join(format!("beta-{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(b) = serde_json::from_str::<BetaVector>(&text) {
            return Ok(b);
        }
    }
    let b = solve_beta(d, opts)?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(&path, to_json(&b)?)?;
    Ok(b)
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad r grid `{text}`"))))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::Parse(format!("r grid must be start:stop:step, got `{text}`")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Error::InvalidArgument(format!("empty r grid `{text}`")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn dispatch(cli: &Cli, config: &ExperimentConfig, seed: Option<u64>) -> Result<Output> {
    let beta_opts = config.beta.unwrap_or_default();
    let mut anneal = config.anneal.unwrap_or_default();
    if let Some(s) = seed {
        anneal.seed = s;
    }
    let registry = FunctionalRegistry::default();
    Ok(match &cli.command {
        Command::CheckDegrees { degrees: inline } => {
            let d = degrees(cli, inline)?;
            let graphical = erdos_gallai(&d);
            let (assumption, note) = match degree_function_of_sequence(&d) {
                Ok(f) => (to_value(&check_assumption(&f, d.n().max(64)))?, Value::Null),
                Err(e) => (Value::Null, json!(e.to_string())),
            };
            let realization = if graphical { json!(edge_list(&havel_hakimi(&d)?)) } else { Value::Null };
            Output::Json(json!({
                "degrees": d.as_slice(),
                "n": d.n(),
                "sum": d.sum(),
                "graphical": graphical,
                "realization": realization,
                "assumption": assumption,
                "assumption_error": note,
            }))
        }
        Command::FitBeta { degrees: inline } => {
            let d = degrees(cli, inline)?;
            Output::Json(to_value(&cached_beta(&d, &beta_opts)?)?)
        }
        Command::LimitGraphon { blocks, constant, csv } => {
            let d = degree_function(cli, *constant, 0)?;
            let lim = limit_graphon(&d, *blocks, &beta_opts)?;
            if *csv {
                let mut s = String::from("row,col,value\n");
                for i in 0..*blocks {
                    for j in 0..*blocks {
                        s.push_str(&format!("{},{},{:.16e}\n", i + 1, j + 1, lim.graphon.value(i, j)));
                    }
                }
                Output::Csv(s)
            } else {
                Output::Json(to_value(&lim)?)
            }
        }
        Command::Rate { kind, mode, blocks, lp_tol, constant } => {
            let w = graphon(cli, 0)?;
            match kind {
                RateKind::I => Output::Json(json!({ "value": relative_entropy_i(&w, &graphon(cli, 1)?)? })),
                RateKind::J => Output::Json(to_value(&rate_j_with(&w, &graphon(cli, 1)?, (*mode).into(), &anneal)?)?),
                RateKind::Jd => {
                    let d = degree_function(cli, *constant, 1)?;
                    Output::Json(to_value(&rate_j_d(&w, &d, *blocks, *lp_tol, (*mode).into())?)?)
                }
            }
        }
        Command::CutDistance { kind, mode } => {
            let (a, b) = (graphon(cli, 0)?, graphon(cli, 1)?);
            match kind {
                CutKind::Norm => Output::Json(json!({ "value": cut_norm_distance(&a, &b)? })),
                CutKind::Metric => Output::Json(to_value(&cut_metric_upper_with(&a, &b, (*mode).into(), &anneal)?)?),
            }
        }
        Command::Sample { method, n, count, degrees: inline, graph_dir } => {
            let mut rng = ChaCha8Rng::seed_from_u64(require_seed(seed, "sample")?);
            let graphs: Vec<LabeledGraph> = match method {
                SampleMethod::Irg => {
                    let w = graphon(cli, 0)?;
                    let n = n.ok_or_else(|| Error::InvalidArgument("irg sampling needs --n".into()))?;
                    (0..*count).map(|_| sample_irg(&w, n, &mut rng)).collect::<Result<_>>()?
                }
                SampleMethod::Rejection => {
                    let d = degrees(cli, inline)?;
                    let sampler = RejectionSampler::new(&d)?;
                    let tries = config.max_tries.unwrap_or(DEFAULT_MAX_TRIES);
                    (0..*count).map(|_| sampler.sample(&mut rng, tries).map(|(g, _)| g)).collect::<Result<_>>()?
                }
                SampleMethod::Switch => {
                    let d = degrees(cli, inline)?;
                    let burn = config.burn_in.unwrap_or_else(|| default_burn_in(&d));
                    let thin = config.thin.unwrap_or_else(|| default_thin(&d));
                    switch_samples(&d, &mut rng, *count, burn, thin)?
                }
            };
            let mut list: Vec<Value> = graphs.iter().map(|g| json!({ "n": g.n(), "edges": edge_list(g) })).collect();
            if let Some(dir) = graph_dir {
                std::fs::create_dir_all(dir)?;
                let width = graphs.len().to_string().len();
                for (i, (g, entry)) in graphs.iter().zip(list.iter_mut()).enumerate() {
                    let path = dir.join(format!("graph-{:0width$}.txt", i + 1));
                    let text = g.to_edge_list();
                    std::fs::write(&path, &text)?;
                    entry["file"] = json!(path.display().to_string());
                    entry["sha256"] = json!(sha256_hex(text.as_bytes()));
                }
            }
            Output::Json(json!({ "method": format!("{method:?}").to_lowercase(), "graphs": list }))
        }
        Command::Enumerate { degrees: inline, functional, r, list } => {
            let d = degrees(cli, inline)?;
            let mut report = json!({ "degrees": d.as_slice(), "count": count_value(count_graphs(&d)?) });
            if let Some(spec) = functional {
                let tau = registry.resolve(spec)?;
                report["functional"] = json!(tau.name());
                report["partition_function"] = json!(partition_function(&d, tau.as_ref())?);
                if let Some(r) = r {
                    report["r"] = json!(r);
                    report["constrained_count"] = json!(count_with_functional(&d, tau.as_ref(), *r)?);
                }
            } else if r.is_some() {
                return Err(Error::InvalidArgument("--r needs --functional".into()));
            }
            if *list {
                let graphs: Vec<Value> = collect_graphs(&d)?.iter().map(|g| json!(edge_list(g))).collect();
                report["graphs"] = Value::Array(graphs);
            }
            Output::Json(report)
        }
        Command::VerifyIdentity { degrees: inline } => {
            Output::Json(to_value(&verify_deg_partition_identity(&degrees(cli, inline)?)?)?)
        }
        Command::LdpEstimate { degrees: inline, functional, r, samples } => {
            let d = degrees(cli, inline)?;
            let tau = registry.resolve(functional)?;
            let s = require_seed(seed, "ldp-estimate")?;
            Output::Json(to_value(&ldp_rate_estimate(&d, tau.as_ref(), *r, *samples, s)?)?)
        }
        Command::Variational { problem, functional, r, r_grid, blocks, constant } => {
            let d = degree_function(cli, *constant, 0)?;
            let tau = registry.resolve(functional)?;
            let mut opts = config.variational.clone().unwrap_or_default();
            if let Some(k) = blocks {
                opts.k = *k;
            }
            if let Some(s) = seed {
                opts.seeds = (0..opts.seeds.len().max(1) as u64).map(|i| s.wrapping_add(i)).collect();
            }
            let tau = tau.as_ref();
            if let Some(grid) = r_grid {
                if !matches!(problem, VariationalProblem::Phi | VariationalProblem::Psi) {
                    return Err(Error::InvalidArgument("--r-grid applies to phi and psi".into()));
                }
                let mut s = String::from("r,value,tau_residual,degree_lp,restarts_used\n");
                for r in parse_grid(grid)? {
                    let res = match problem {
                        VariationalProblem::Phi => solve_phi(&d, tau, r, &opts)?,
                        _ => solve_psi(&d, tau, r, &opts)?,
                    };
                    s.push_str(&format!(
                        "{r:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                        res.value, res.constraint_residuals.tau, res.constraint_residuals.degree_lp, res.restarts_used
                    ));
                }
                return Ok(Output::Csv(s));
            }
            let need_r = || r.ok_or_else(|| Error::InvalidArgument("this problem needs --r".into()));
            let body = match problem {
                VariationalProblem::Phi => to_value(&solve_phi(&d, tau, need_r()?, &opts)?)?,
                VariationalProblem::Psi => to_value(&solve_psi(&d, tau, need_r()?, &opts)?)?,
                VariationalProblem::Partition => json!({ "value": limit_partition_z(&d, tau, &opts)? }),
                VariationalProblem::Count => json!({ "value": count_asymptotic(&d, tau, need_r()?, &opts)? }),
            };
            Output::Json(json!({
                "problem": format!("{problem:?}").to_lowercase(),
                "functional": tau.name(),
                "r": r,
                "options": to_value(&opts)?,
                "result": body,
            }))
        }
        Command::Entropy { blocks, constant, graphon: as_graphon } => {
            if *as_graphon {
                Output::Json(json!({ "entropy_he": entropy_he(&graphon(cli, 0)?) }))
            } else {
                Output::Json(to_value(&counting_entropy(&degree_function(cli, *constant, 0)?, *blocks)?)?)
            }
        }
    })
}
