use thiserror::Error;

/// Why a cost-minimization problem has no solution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    /// The outreach target exceeds the outbreak size reached when every
    /// node is incentivized.
    #[error("outreach target {gamma} is unreachable: largest achievable outbreak size is {max_size}")]
    OutreachUnreachable { gamma: f64, max_size: f64 },
    /// The type-2 budget `B` cannot buy the link fraction `q*` needed.
    #[error("type-2 budget B = {budget_b} is too small: q* = {q_star} needed, at most {max_q} attainable")]
    BudgetTooSmall {
        budget_b: f64,
        q_star: f64,
        max_q: f64,
    },
    /// A linear program with no feasible point.
    #[error("linear program has no feasible point")]
    Lp,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate degree distribution: mean degree is zero")]
    DegenerateDistribution,

    #[error("support mismatch: {what} has {got} classes, distribution has {expected}")]
    SupportMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last iterate {last})")]
    NotConverged { iterations: usize, last: f64 },

    #[error("mean small-component size diverges: branching factor {nu_tilde} is not below 1")]
    Supercritical { nu_tilde: f64 },

    #[error("outbreak size is not monotone in q unless T2 > T1 (got T1 = {t1}, T2 = {t2})")]
    NotMonotone { t1: f64, t2: f64 },

    #[error(transparent)]
    Infeasible(#[from] Infeasibility),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
