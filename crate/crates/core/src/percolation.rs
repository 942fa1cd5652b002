//! Bond-percolation analytics for the two-type SIR information epidemic.
//!
//! Type-1 (ordinary) nodes pass the message along a link with probability
//! `T1`, type-2 (incentivized) nodes with `T2`. On a configuration-model
//! network with incentive policy `φ(k)`, the joint distribution of type-1
//! and type-2 neighbours is a binomial thinning of `P(k)` with parameter
//! `q`, the probability that a random link ends at a type-2 node. Every
//! double sum over `(k1, k2)` therefore collapses onto a single sum over
//! `k` with the link-averaged transmissibility `(1 − q) T1 + q T2`:
//!
//! ```text
//! Σ a^k1 b^k2 C(k1+k2, k2) q^k2 (1−q)^k1 P(k1+k2) = Σ ((1−q) a + q b)^k P(k)
//! ```
//!
//! All evaluations below use that collapse.

use crate::degree_dist::DegreeDistribution;
use crate::error::{invalid, Error, Infeasibility, Result};
use crate::scalar::Scalar;

/// Residual tolerance of the fixed-point solve.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Iteration cap before falling back to bisection.
pub const FIXED_POINT_MAX_ITER: usize = 1_000_000;
/// `|ν̃ − 1|` below this is classified as critical (outbreak size zero).
pub const CRITICAL_BAND: f64 = 1e-9;
/// Upper end of the bisection bracket for the fixed point.
const BISECTION_UPPER_GAP: f64 = 1e-9;
/// Iteration cap of the outreach-inversion bisection.
pub const INVERT_MAX_ITER: usize = 200;

/// Probability that an infected node passes the message along one link
/// before it stops spreading: `β / (β + μ)`.
pub fn transmissibility<S: Scalar>(beta: S, mu: S) -> Result<S> {
    if !(beta >= S::zero()) || !(mu >= S::zero()) || !beta.is_finite() || !mu.is_finite() {
        return Err(invalid(format!("rates must be finite and non-negative, got β = {beta}, μ = {mu}")));
    }
    if beta + mu == S::zero() {
        return Err(invalid("spreading and recovery rates are both zero"));
    }
    Ok(beta / (beta + mu))
}

/// Per-type link occupation probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercolationParams<S> {
    pub t1: S,
    pub t2: S,
}

impl<S: Scalar> PercolationParams<S> {
    pub fn new(t1: S, t2: S) -> Result<Self> {
        for (name, t) in [("T1", t1), ("T2", t2)] {
            if !(t >= S::zero() && t <= S::one()) {
                return Err(invalid(format!("{name} = {t} is not a probability")));
            }
        }
        Ok(Self { t1, t2 })
    }

    /// Both types spread with the same probability.
    pub fn uniform(t: S) -> Result<Self> {
        Self::new(t, t)
    }

    pub fn from_rates(beta1: S, mu1: S, beta2: S, mu2: S) -> Result<Self> {
        Self::new(transmissibility(beta1, mu1)?, transmissibility(beta2, mu2)?)
    }

    /// Transmissibility of a link whose far end is type 2 with probability `q`.
    #[inline]
    pub fn link_average(&self, q: S) -> S {
        (S::one() - q) * self.t1 + q * self.t2
    }

    fn require_monotone(&self) -> Result<()> {
        if self.t2 > self.t1 {
            Ok(())
        } else {
            Err(Error::NotMonotone {
                t1: self.t1.as_f64(),
                t2: self.t2.as_f64(),
            })
        }
    }
}

/// Fraction `φ(k)` of degree-`k` nodes that are incentivized (type 2).
#[derive(Debug, Clone, PartialEq)]
pub struct IncentivePolicy<S> {
    phi: Vec<S>,
}

impl<S: Scalar> IncentivePolicy<S> {
    pub fn new(phi: Vec<S>) -> Result<Self> {
        if let Some((k, v)) = phi
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= S::zero() && **v <= S::one()))
        {
            return Err(invalid(format!("φ({k}) = {v} is outside [0, 1]")));
        }
        Ok(Self { phi })
    }

    pub fn constant(value: S, classes: usize) -> Result<Self> {
        Self::new(vec![value; classes])
    }

    pub fn zeros(classes: usize) -> Self {
        Self {
            phi: vec![S::zero(); classes],
        }
    }

    pub fn phi(&self) -> &[S] {
        &self.phi
    }

    /// `φ(k)`; degrees beyond the table use the last entry.
    pub fn get(&self, k: usize) -> S {
        match self.phi.get(k) {
            Some(&v) => v,
            None => self.phi.last().copied().unwrap_or_else(S::zero),
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub(crate) fn check_support(&self, dist: &DegreeDistribution<S>) -> Result<()> {
        if self.phi.len() == dist.len() {
            Ok(())
        } else {
            Err(Error::SupportMismatch {
                what: "incentive policy",
                expected: dist.len(),
                got: self.phi.len(),
            })
        }
    }
}

/// Link-level (`q`) and node-level (`p`) type-2 fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTypeMixture<S> {
    pub q: S,
    pub p: S,
}

/// Solution of the outbreak problem at a fixed mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutbreakAnalysis<S> {
    pub nu_tilde: S,
    pub u_star: S,
    pub psi: S,
    pub size: S,
    pub supercritical: bool,
}

/// Mean size and composition of the small component containing a random
/// seed, valid below threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats<S> {
    pub s_mean: S,
    pub s1_mean: S,
    pub s2_mean: S,
    pub k_tilde_1: S,
    pub k_tilde_2: S,
}

/// A degree distribution together with its precomputed excess distribution.
///
/// Construct once and reuse across many `q` evaluations (outreach
/// inversion, sweeps).
#[derive(Debug, Clone)]
pub struct PercolationModel<S> {
    dist: DegreeDistribution<S>,
    excess: DegreeDistribution<S>,
    mean: S,
    mean_excess: S,
}

impl<S: Scalar> PercolationModel<S> {
    pub fn new(dist: &DegreeDistribution<S>) -> Result<Self> {
        let excess = dist.excess_distribution()?;
        Ok(Self {
            mean: dist.mean(),
            mean_excess: dist.mean_excess_degree()?,
            dist: dist.clone(),
            excess,
        })
    }

    pub fn distribution(&self) -> &DegreeDistribution<S> {
        &self.dist
    }

    pub fn excess(&self) -> &DegreeDistribution<S> {
        &self.excess
    }

    /// `q = Σ k φ(k) P(k) / ⟨k⟩`, `p = Σ φ(k) P(k)`.
    pub fn mixture(&self, policy: &IncentivePolicy<S>) -> Result<TwoTypeMixture<S>> {
        policy.check_support(&self.dist)?;
        let phi = policy.phi();
        let weighted = self
            .dist
            .expectation(|k, p| S::from_usize_exact(k) * phi[k] * p);
        let p = self.dist.expectation(|k, p| phi[k] * p);
        Ok(TwoTypeMixture {
            q: (weighted / self.mean).min(S::one()),
            p: p.min(S::one()),
        })
    }

    /// `ν̃ = ((1 − q) T1 + q T2) · E_Q[k]`.
    pub fn branching_factor(&self, q: S, params: &PercolationParams<S>) -> S {
        params.link_average(q) * self.mean_excess
    }

    /// Right-hand side `f(u)` of the fixed-point equation.
    pub fn fixed_point_map(&self, u: S, q: S, params: &PercolationParams<S>) -> S {
        if u == S::one() {
            return S::one();
        }
        self.excess
            .pgf(S::one() + (u - S::one()) * params.link_average(q))
    }

    /// `ψ` evaluated at `u`: probability a random node is outside the
    /// giant component when `u` is the fixed point.
    pub fn non_outbreak_probability(&self, u: S, q: S, params: &PercolationParams<S>) -> S {
        if u == S::one() {
            return S::one();
        }
        self.dist
            .pgf(S::one() + (u - S::one()) * params.link_average(q))
    }

    /// Smallest fixed point `u* ∈ [0, 1]` of `u = f(u)`, with `|u − f(u)| ≤ tol`.
    ///
    /// Iterates `u ← f(u)` from zero; `f` is increasing and convex so the
    /// iterates climb monotonically to the smallest root. Bisection on
    /// `f(u) − u` over `[0, 1 − 1e-9]` takes over if the iteration cap is
    /// reached.
    pub fn solve_fixed_point(&self, q: S, params: &PercolationParams<S>, tol: S) -> Result<S> {
        if !(tol > S::zero()) {
            return Err(invalid("fixed-point tolerance must be positive"));
        }
        let nu = self.branching_factor(q, params);
        if nu < S::one() + S::tol(CRITICAL_BAND) {
            return Ok(S::one());
        }
        let f = |u: S| self.fixed_point_map(u, q, params);

        let mut u = S::zero();
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = f(u);
            if (next - u).abs() <= tol {
                return Ok(next);
            }
            u = next;
        }

        let g = |u: S| f(u) - u;
        let mut lo = S::zero();
        let mut hi = S::one() - S::tol(BISECTION_UPPER_GAP);
        if g(hi) >= S::zero() {
            return Err(Error::NotConverged {
                iterations: FIXED_POINT_MAX_ITER,
                last: u.as_f64(),
            });
        }
        let half = S::c(0.5);
        let mut mid = u;
        for _ in 0..INVERT_MAX_ITER {
            mid = (lo + hi) * half;
            let r = g(mid);
            if r.abs() <= tol {
                return Ok(mid);
            }
            if r > S::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NotConverged {
            iterations: FIXED_POINT_MAX_ITER + INVERT_MAX_ITER,
            last: mid.as_f64(),
        })
    }

    /// Branching factor, fixed point, `ψ` and outbreak size `1 − ψ` at link
    /// fraction `q`.
    pub fn analyze_at(&self, q: S, params: &PercolationParams<S>) -> Result<OutbreakAnalysis<S>> {
        let nu_tilde = self.branching_factor(q, params);
        let u_star = self.solve_fixed_point(q, params, S::tol(FIXED_POINT_TOL))?;
        let psi = self.non_outbreak_probability(u_star, q, params).min(S::one());
        Ok(OutbreakAnalysis {
            nu_tilde,
            u_star,
            psi,
            size: S::one() - psi,
            supercritical: nu_tilde >= S::one(),
        })
    }

    pub fn analyze(
        &self,
        policy: &IncentivePolicy<S>,
        params: &PercolationParams<S>,
    ) -> Result<OutbreakAnalysis<S>> {
        let mix = self.mixture(policy)?;
        self.analyze_at(mix.q, params)
    }

    /// Outbreak size `1 − ψ` at link fraction `q`.
    pub fn outbreak_size(&self, q: S, params: &PercolationParams<S>) -> Result<S> {
        Ok(self.analyze_at(q, params)?.size)
    }

    /// Mean small-component size and its per-type split at mixture `mix`.
    pub fn component_stats_at(
        &self,
        mix: TwoTypeMixture<S>,
        params: &PercolationParams<S>,
    ) -> Result<ComponentStats<S>> {
        let TwoTypeMixture { q, p } = mix;
        let nu = self.branching_factor(q, params);
        if nu >= S::one() - S::tol(CRITICAL_BAND) {
            return Err(Error::Supercritical {
                nu_tilde: nu.as_f64(),
            });
        }
        let one = S::one();
        // Mean excess neighbours of each type along a link.
        let kbar_1 = (one - q) * self.mean_excess;
        let kbar_2 = q * self.mean_excess;
        // Mean occupied links to each type out of a random node.
        let k_tilde_1 = params.t1 * (one - q) * self.mean;
        let k_tilde_2 = params.t2 * q * self.mean;
        let a = params.t1 * kbar_1;
        let b = params.t2 * kbar_2;
        let denom = one - a - b;
        let s1_mean = (one - p) + (k_tilde_1 * (one - b) + k_tilde_2 * a) / denom;
        let s2_mean = p + (k_tilde_1 * b + k_tilde_2 * (one - a)) / denom;
        Ok(ComponentStats {
            s_mean: one + (k_tilde_1 + k_tilde_2) / denom,
            s1_mean,
            s2_mean,
            k_tilde_1,
            k_tilde_2,
        })
    }

    pub fn component_stats(
        &self,
        policy: &IncentivePolicy<S>,
        params: &PercolationParams<S>,
    ) -> Result<ComponentStats<S>> {
        let mix = self.mixture(policy)?;
        self.component_stats_at(mix, params)
    }

    /// Smallest `q*` with outbreak size `≥ gamma`, by bisection on the
    /// monotone map `q ↦ 1 − ψ(q)`. Requires `T2 > T1`.
    pub fn invert_outreach(&self, params: &PercolationParams<S>, gamma: S, tol: S) -> Result<S> {
        params.require_monotone()?;
        if !(gamma >= S::zero() && gamma <= S::one()) {
            return Err(invalid(format!("outreach target γ = {gamma} is outside [0, 1]")));
        }
        if !(tol > S::zero()) {
            return Err(invalid("bisection tolerance must be positive"));
        }
        if gamma == S::zero() {
            return Ok(S::zero());
        }
        let max_size = self.outbreak_size(S::one(), params)?;
        if max_size < gamma {
            return Err(Infeasibility::OutreachUnreachable {
                gamma: gamma.as_f64(),
                max_size: max_size.as_f64(),
            }
            .into());
        }
        if self.outbreak_size(S::zero(), params)? >= gamma {
            return Ok(S::zero());
        }
        let (mut lo, mut hi) = (S::zero(), S::one());
        let half = S::c(0.5);
        for _ in 0..INVERT_MAX_ITER {
            if hi - lo < tol {
                break;
            }
            let mid = (lo + hi) * half;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.outbreak_size(mid, params)? >= gamma {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// `(q, p)` induced by `policy` on `dist`.
pub fn mixture<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
) -> Result<TwoTypeMixture<S>> {
    PercolationModel::new(dist)?.mixture(policy)
}

/// Branching factor `ν̃`; an outbreak is possible iff `ν̃ ≥ 1`.
pub fn branching_factor<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
    params: &PercolationParams<S>,
) -> Result<S> {
    let model = PercolationModel::new(dist)?;
    let mix = model.mixture(policy)?;
    Ok(model.branching_factor(mix.q, params))
}

/// Smallest fixed point `u*` of the excess-degree map.
pub fn solve_fixed_point<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
    params: &PercolationParams<S>,
    tol: S,
) -> Result<S> {
    let model = PercolationModel::new(dist)?;
    let mix = model.mixture(policy)?;
    model.solve_fixed_point(mix.q, params, tol)
}

pub fn outbreak_analysis<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
    params: &PercolationParams<S>,
) -> Result<OutbreakAnalysis<S>> {
    PercolationModel::new(dist)?.analyze(policy, params)
}

pub fn mean_component_size<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
    params: &PercolationParams<S>,
) -> Result<ComponentStats<S>> {
    PercolationModel::new(dist)?.component_stats(policy, params)
}

/// Smallest link fraction `q*` whose outbreak size reaches `gamma`.
pub fn invert_outreach<S: Scalar>(
    dist: &DegreeDistribution<S>,
    params: &PercolationParams<S>,
    gamma: S,
    tol: S,
) -> Result<S> {
    PercolationModel::new(dist)?.invert_outreach(params, gamma, tol)
}
