use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("common refinement has {blocks} blocks, cap is {cap}")]
    BlockCapExceeded { blocks: usize, cap: usize },
    #[error("block structures cannot be aligned ({left} vs {right} blocks)")]
    BlockCountMismatch { left: usize, right: usize },
    #[error("exact permutation search supports at most {max} blocks, got {blocks}")]
    ExactModeTooLarge { blocks: usize, max: usize },
    #[error("homomorphism density needs {work} block assignments, cap is {cap}")]
    WorkCapExceeded { work: u128, cap: u128 },

    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid distribution function: {0}")]
    InvalidCdf(String),
    #[error("invalid subgraph pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid degree sequence: {0}")]
    InvalidDegreeSequence(String),
    #[error("invalid degree function: {0}")]
    InvalidDegreeFunction(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree sequence is not graphical")]
    NotGraphical,
    #[error("degree function violates the interior condition: {0}")]
    AssumptionViolated(String),
    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("base graphon touches the boundary at block ({row}, {col}) where the argument differs")]
    BoundaryW0 { row: usize, col: usize },

    #[error("rejection sampler hit no realization in {tries} tries")]
    MaxTriesExceeded { tries: u64 },
    #[error("enumeration limited to n <= {cap}, got n = {n}")]
    TooLarge { n: usize, cap: usize },
    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),
    #[error("event never observed in {samples} samples; rate upper bound {upper_bound}")]
    ZeroHits { samples: u64, upper_bound: f64 },

    #[error("degree repair stalled after {rounds} rounds (defect {defect:e})")]
    RepairStalled { rounds: usize, defect: f64 },
    #[error("no feasible point with functional >= {r} (best reached {best})")]
    Infeasible { r: f64, best: f64 },

    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable class name; the CLI maps each class to an exit code.
    pub fn class(&self) -> &'static str {
        use Error::*;
        match self {
            BlockCapExceeded { .. } | ExactModeTooLarge { .. } | WorkCapExceeded { .. } | TooLarge { .. } => {
                "capacity"
            }
            BlockCountMismatch { .. }
            | InvalidGraphon(_)
            | InvalidGraph(_)
            | InvalidCdf(_)
            | InvalidPattern(_)
            | InvalidDegreeSequence(_)
            | InvalidDegreeFunction(_)
            | InvalidArgument(_)
            | UnknownFunctional(_) => "invalid_input",
            NotGraphical | AssumptionViolated(_) | BoundaryW0 { .. } => "domain",
            NonConvergence { .. } | RepairStalled { .. } => "numerical",
            Infeasible { .. } => "infeasible",
            MaxTriesExceeded { .. } | ZeroHits { .. } => "sampling",
            Parse(_) | Json(_) => "parse",
            Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "invalid_input" => 3,
            "parse" => 4,
            "io" => 5,
            "domain" => 6,
            "numerical" => 7,
            "capacity" => 8,
            "infeasible" => 9,
            "sampling" => 10,
            _ => 1,
        }
    }
}
