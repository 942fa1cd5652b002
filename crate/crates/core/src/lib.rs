//! Outbreak sizes of two-type information epidemics on random networks, and
//! the linear programs that allocate spreading incentives by degree.
//!
//! The analytic modules are generic over the scalar type ([`Scalar`] for
//! `f32`/`f64`; the simplex in [`lp`] also runs over exact rationals).
//! Double-precision aliases are exported at the crate root.

// `!(x > y)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degree_dist;
pub mod error;
pub mod lp;
pub mod optimizer;
pub mod percolation;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Infeasibility, Result};
pub use lp::{lp_solve, LpScalar};
pub use optimizer::{solve_cost_min, solve_cost_min_for_q, solve_size_max, BindingConstraint, OptimizationMode};
pub use percolation::{
    branching_factor, invert_outreach, mean_component_size, mixture, outbreak_analysis,
    solve_fixed_point, transmissibility,
};
pub use scalar::Scalar;
pub use simulator::{
    build_network, percolation_trial, run_campaign, sir_trial, Network, NodeType, Process,
    SimulationReport, SirRates, TrialOutcome,
};

pub type DegreeDistribution = degree_dist::DegreeDistribution<f64>;
pub type IncentivePolicy = percolation::IncentivePolicy<f64>;
pub type PercolationParams = percolation::PercolationParams<f64>;
pub type PercolationModel = percolation::PercolationModel<f64>;
pub type TwoTypeMixture = percolation::TwoTypeMixture<f64>;
pub type OutbreakAnalysis = percolation::OutbreakAnalysis<f64>;
pub type ComponentStats = percolation::ComponentStats<f64>;
pub type CostModel = optimizer::CostModel<f64>;
pub type OptimizationSpec = optimizer::OptimizationSpec<f64>;
pub type OptimizationResult = optimizer::OptimizationResult<f64>;
pub type LinearProgram = lp::LinearProgram<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type DegreeDistribution = crate::degree_dist::DegreeDistribution<f32>;
    pub type IncentivePolicy = crate::percolation::IncentivePolicy<f32>;
    pub type PercolationParams = crate::percolation::PercolationParams<f32>;
    pub type PercolationModel = crate::percolation::PercolationModel<f32>;
    pub type CostModel = crate::optimizer::CostModel<f32>;
    pub type OptimizationSpec = crate::optimizer::OptimizationSpec<f32>;
}

/// Exact-arithmetic linear programs.
pub type RationalProgram = lp::LinearProgram<num_rational::BigRational>;
