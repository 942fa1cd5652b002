//! Incentive allocation as linear programs over `φ(k)`.
//!
//! With `T2 > T1` the outbreak size is strictly increasing in the link
//! fraction `q`, so an outreach guarantee `1 − ψ ≥ γ` becomes the linear
//! row `Σ k φ(k) P(k) / ⟨k⟩ ≥ q*`, and maximizing the outbreak size is
//! maximizing `Σ k φ(k) P(k)`.

use std::fmt;
use std::io::Read;

use serde::Deserialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{invalid, Error, Infeasibility, Result};
use crate::lp::{Direction, LinearProgram, LpError, LpScalar, Sense, TieBreak};
use crate::percolation::{IncentivePolicy, PercolationModel, PercolationParams};
use crate::scalar::Scalar;

/// Tolerance of the `q*` bisection.
pub const Q_STAR_TOL: f64 = 1e-12;
/// A constraint whose slack is below this is reported as binding.
pub const BINDING_TOL: f64 = 1e-9;

/// Per-node incentive cost `c(k)` for each degree class.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<S> {
    cost: Vec<S>,
}

impl<S: Scalar> CostModel<S> {
    pub fn table(cost: Vec<S>) -> Result<Self> {
        if let Some((k, c)) = cost
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < S::zero())
        {
            return Err(invalid(format!("cost c({k}) = {c} must be finite and non-negative")));
        }
        Ok(Self { cost })
    }

    /// `c(k) = k`.
    pub fn linear(classes: usize) -> Self {
        Self {
            cost: (0..classes).map(S::from_usize_exact).collect(),
        }
    }

    /// `c(k) = k²`.
    pub fn quadratic(classes: usize) -> Self {
        Self {
            cost: (0..classes).map(|k| S::from_usize_exact(k * k)).collect(),
        }
    }

    pub fn constant(value: S, classes: usize) -> Result<Self> {
        Self::table(vec![value; classes])
    }

    /// Reads a `k,cost` CSV. Every class of the `classes`-long support must
    /// be listed.
    pub fn from_csv<R: Read>(reader: R, classes: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            k: usize,
            cost: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut cost: Vec<Option<S>> = vec![None; classes];
        for row in rdr.deserialize() {
            let row: Row = row?;
            if row.k >= classes {
                return Err(invalid(format!("cost table lists k = {} beyond k_max = {}", row.k, classes - 1)));
            }
            cost[row.k] = Some(S::c(row.cost));
        }
        let cost = cost
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| invalid(format!("cost table misses k = {k}"))))
            .collect::<Result<Vec<S>>>()?;
        Self::table(cost)
    }

    pub fn costs(&self) -> &[S] {
        &self.cost
    }

    /// Expected spend `Σ c(k) φ(k) P(k)`.
    pub fn expected_cost(&self, dist: &DegreeDistribution<S>, policy: &IncentivePolicy<S>) -> S {
        let phi = policy.phi();
        dist.expectation(|k, p| self.cost[k] * phi[k] * p)
    }

    /// Multiplies every class cost by `factor`.
    pub fn scaled(&self, factor: S) -> Result<Self> {
        Self::table(self.cost.iter().map(|&c| c * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizationMode<S> {
    /// Minimize expected cost subject to outbreak size `≥ gamma`.
    CostMin { gamma: S },
    /// Maximize outbreak size subject to expected cost `≤ budget_c`.
    SizeMax { budget_c: S },
}

#[derive(Debug, Clone)]
pub struct OptimizationSpec<S> {
    pub mode: OptimizationMode<S>,
    /// Cap on the fraction of incentivized nodes.
    pub budget_b: S,
    pub cost: CostModel<S>,
    pub dist: DegreeDistribution<S>,
    pub params: PercolationParams<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingConstraint {
    /// `q ≥ q*`.
    Outreach,
    /// `p ≤ B`.
    TypeTwoBudget,
    /// Expected cost `≤ C`.
    CostBudget,
}

impl fmt::Display for BindingConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BindingConstraint::Outreach => "outreach",
            BindingConstraint::TypeTwoBudget => "type2_budget",
            BindingConstraint::CostBudget => "cost_budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult<S> {
    pub phi: IncentivePolicy<S>,
    /// Expected cost (cost minimization) or `Σ k φ(k) P(k)` (size maximization).
    pub objective: S,
    /// Link fraction required by the outreach target; cost minimization only.
    pub q_star: Option<S>,
    pub q_achieved: S,
    pub p_achieved: S,
    pub cost_achieved: S,
    /// Outbreak size `1 − ψ` at the optimal policy.
    pub size_achieved: S,
    pub binding: Vec<BindingConstraint>,
}

impl<S: Scalar + LpScalar> OptimizationSpec<S> {
    pub fn solve(&self) -> Result<OptimizationResult<S>> {
        match self.mode {
            OptimizationMode::CostMin { .. } => solve_cost_min(self),
            OptimizationMode::SizeMax { .. } => solve_size_max(self),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.budget_b >= S::zero() && self.budget_b <= S::one()) {
            return Err(invalid(format!("type-2 budget B = {} is outside [0, 1]", self.budget_b)));
        }
        if self.cost.costs().len() != self.dist.len() {
            return Err(Error::SupportMismatch {
                what: "cost model",
                expected: self.dist.len(),
                got: self.cost.costs().len(),
            });
        }
        Ok(())
    }
}

fn lp_err(e: LpError) -> Error {
    match e {
        LpError::Infeasible => Infeasibility::Lp.into(),
        LpError::Unbounded => Error::Unbounded,
        LpError::Malformed(m) => Error::InvalidParameter(m),
    }
}

/// Scatters LP values on `classes` back onto the full degree support.
fn expand<S: Scalar>(len: usize, classes: &[usize], x: &[S], fill: S) -> Vec<S> {
    let mut phi = vec![fill; len];
    for (&k, &v) in classes.iter().zip(x) {
        phi[k] = v.max(S::zero()).min(S::one());
    }
    phi
}

fn finish<S: Scalar + LpScalar>(
    spec: &OptimizationSpec<S>,
    model: &PercolationModel<S>,
    phi: Vec<S>,
    objective: S,
    q_star: Option<S>,
) -> Result<OptimizationResult<S>> {
    let phi = IncentivePolicy::new(phi)?;
    let mix = model.mixture(&phi)?;
    let cost_achieved = spec.cost.expected_cost(&spec.dist, &phi);
    let size_achieved = model.analyze_at(mix.q, &spec.params)?.size;
    let tol = S::tol(BINDING_TOL);
    let mut binding = Vec::new();
    if let Some(q_star) = q_star {
        if q_star > S::zero() && (mix.q - q_star).abs() <= tol {
            binding.push(BindingConstraint::Outreach);
        }
    }
    if (spec.budget_b - mix.p).abs() <= tol {
        binding.push(BindingConstraint::TypeTwoBudget);
    }
    if let OptimizationMode::SizeMax { budget_c } = spec.mode {
        if (budget_c - cost_achieved).abs() <= tol {
            binding.push(BindingConstraint::CostBudget);
        }
    }
    Ok(OptimizationResult {
        phi,
        objective,
        q_star,
        q_achieved: mix.q,
        p_achieved: mix.p,
        cost_achieved,
        size_achieved,
        binding,
    })
}

/// Cheapest policy whose outbreak size reaches `gamma` with at most a
/// fraction `B` of nodes incentivized.
///
/// Degree classes that cannot raise `q` (`k = 0` or `P(k) = 0`) are left
/// at zero. Ties are broken towards incentivizing higher degrees.
pub fn solve_cost_min<S: Scalar + LpScalar>(spec: &OptimizationSpec<S>) -> Result<OptimizationResult<S>> {
    let OptimizationMode::CostMin { gamma } = spec.mode else {
        return Err(invalid("solve_cost_min needs a cost-minimization spec"));
    };
    spec.validate()?;
    let model = PercolationModel::new(&spec.dist)?;
    let q_star = model.invert_outreach(&spec.params, gamma, S::tol(Q_STAR_TOL))?;
    cost_min_lp(spec, &model, q_star)
}

/// The cost-minimization LP with the link-fraction target `q*` given
/// directly instead of through `γ`. The `γ` in `spec` is ignored.
pub fn solve_cost_min_for_q<S: Scalar + LpScalar>(
    spec: &OptimizationSpec<S>,
    q_star: S,
) -> Result<OptimizationResult<S>> {
    spec.validate()?;
    if !(q_star >= S::zero() && q_star <= S::one()) {
        return Err(invalid(format!("link fraction q* = {q_star} is outside [0, 1]")));
    }
    let model = PercolationModel::new(&spec.dist)?;
    cost_min_lp(spec, &model, q_star)
}

fn cost_min_lp<S: Scalar + LpScalar>(
    spec: &OptimizationSpec<S>,
    model: &PercolationModel<S>,
    q_star: S,
) -> Result<OptimizationResult<S>> {
    let mean = spec.dist.mean();
    let classes: Vec<usize> = (1..spec.dist.len())
        .filter(|&k| spec.dist.prob(k) > S::zero())
        .collect();
    let costs = spec.cost.costs();
    let n = classes.len();
    let row = |f: &dyn Fn(usize) -> S| classes.iter().map(|&k| f(k)).collect::<Vec<S>>();
    let q_row = row(&|k| S::from_usize_exact(k) * spec.dist.prob(k) / mean);
    let p_row = row(&|k| spec.dist.prob(k));

    let lp = LinearProgram::new(
        Direction::Minimize,
        row(&|k| costs[k] * spec.dist.prob(k)),
        vec![S::zero(); n],
        vec![S::one(); n],
    )
    .with_constraint(q_row.clone(), Sense::Ge, q_star)
    .with_constraint(p_row.clone(), Sense::Le, spec.budget_b)
    .with_tie_break(TieBreak::HighIndexFirst);

    let solution = match lp.solve() {
        Ok(s) => s,
        Err(LpError::Infeasible) => {
            let max_q = LinearProgram::new(Direction::Maximize, q_row, vec![S::zero(); n], vec![S::one(); n])
                .with_constraint(p_row, Sense::Le, spec.budget_b)
                .with_tie_break(TieBreak::None)
                .solve()
                .map_err(lp_err)?
                .objective;
            return Err(if max_q < q_star {
                Infeasibility::BudgetTooSmall {
                    budget_b: spec.budget_b.as_f64(),
                    q_star: q_star.as_f64(),
                    max_q: max_q.as_f64(),
                }
                .into()
            } else {
                Infeasibility::Lp.into()
            });
        }
        Err(e) => return Err(lp_err(e)),
    };

    let phi = expand(spec.dist.len(), &classes, &solution.x, S::zero());
    finish(spec, model, phi, solution.objective, Some(q_star))
}

/// Policy maximizing the outbreak size under cost budget `C` and type-2
/// budget `B`.
///
/// Among optimal policies, classes are filled from the highest degree down
/// as far as the budgets allow. Empty classes (`P(k) = 0`) are left at zero.
pub fn solve_size_max<S: Scalar + LpScalar>(spec: &OptimizationSpec<S>) -> Result<OptimizationResult<S>> {
    let OptimizationMode::SizeMax { budget_c } = spec.mode else {
        return Err(invalid("solve_size_max needs a size-maximization spec"));
    };
    spec.validate()?;
    if !(budget_c >= S::zero()) || !budget_c.is_finite() {
        return Err(invalid(format!("cost budget C = {budget_c} must be finite and non-negative")));
    }
    if !(spec.params.t2 > spec.params.t1) {
        return Err(Error::NotMonotone {
            t1: spec.params.t1.as_f64(),
            t2: spec.params.t2.as_f64(),
        });
    }
    let model = PercolationModel::new(&spec.dist)?;
    let len = spec.dist.len();
    let costs = spec.cost.costs();
    let probs = spec.dist.probs();

    let classes: Vec<usize> = (0..len).filter(|&k| probs[k] > S::zero()).collect();
    let row = |f: &dyn Fn(usize) -> S| classes.iter().map(|&k| f(k)).collect::<Vec<S>>();
    let n = classes.len();

    let lp = LinearProgram::new(
        Direction::Maximize,
        row(&|k| S::from_usize_exact(k) * probs[k]),
        vec![S::zero(); n],
        vec![S::one(); n],
    )
    .with_constraint(row(&|k| costs[k] * probs[k]), Sense::Le, budget_c)
    .with_constraint(row(&|k| probs[k]), Sense::Le, spec.budget_b)
    .with_tie_break(TieBreak::HighIndexFirst);

    let solution = lp.solve().map_err(lp_err)?;
    let phi = expand(len, &classes, &solution.x, S::zero());
    finish(spec, &model, phi, solution.objective, None)
}
