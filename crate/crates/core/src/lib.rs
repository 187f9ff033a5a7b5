//! Dense graph limits for uniform random graphs with a prescribed degree
//! sequence.
//!
//! The crate works with block (step) graphons throughout. It provides
//!
//! * graphon arithmetic: exact cut norm, permutation upper bounds on the cut
//!   metric, L1/L2 distances, degree functions and degree distributions,
//!   homomorphism densities ([`graphon`]);
//! * degree-sequence tooling: Erdős–Gallai, the β-model fixed point and the
//!   limiting graphon of a degree function ([`degree`]);
//! * relative-entropy rate functions and graph entropies ([`rate`]);
//! * samplers for inhomogeneous and exactly uniform degree-constrained graphs
//!   ([`sampling`]);
//! * brute-force ground truth at small `n` ([`enumerate`]);
//! * numerical solvers for the degree-constrained variational problems
//!   ([`variational`]).

pub mod cli;
pub mod degree;
pub mod enumerate;
pub mod error;
pub mod functional;
pub mod graphon;
pub mod io;
pub mod rate;
pub mod sampling;
pub mod variational;

pub use degree::{
    check_assumption, degree_measure, erdos_gallai, fitted_graphon, limit_graphon, solve_beta,
    AssumptionReport, BetaOptions, BetaVector, DegreeFunction, DegreeSequence, LimitGraphon,
};
pub use error::{Error, Result};
pub use functional::{Functional, FunctionalRegistry};
pub use graphon::{
    cut_metric_upper, cut_norm_distance, degree_distribution, degree_function,
    empirical_graphon, is_away_from_boundary, levy_prokhorov, lp_distance, mix, regrid,
    subgraph_density, CutMetricBound, LabeledGraph, LpNorm, SearchMode, StepCDF, StepGraphon,
    SubgraphPattern,
};
pub use rate::{
    counting_entropy, dual_value, entropy_he, rate_j, rate_j_d, relative_entropy_i,
    CountingEntropy, RateValue,
};
pub use variational::{
    count_asymptotic, limit_partition_z, repair_degrees, solve_phi, solve_psi, VariationalOptions,
    VariationalResult,
};
