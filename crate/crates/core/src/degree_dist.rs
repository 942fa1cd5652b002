//! Finite degree distributions `P(k)` on `k = 0..=k_max`.

use std::io::Read;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Absolute tolerance on the total mass of a pmf.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability mass function over degrees `0..=k_max`.
///
/// Sums over the support are accumulated in descending-mass order with
/// compensated summation; the ordering is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution<S> {
    probs: Vec<S>,
    order: Vec<usize>,
}

impl<S: Scalar> DegreeDistribution<S> {
    /// Validates an explicit pmf indexed by degree. Masses must be finite,
    /// non-negative and sum to one within [`NORMALIZATION_TOL`].
    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid("a degree distribution needs k_max >= 1"));
        }
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < S::zero())
        {
            return Err(invalid(format!("P({k}) = {p} is not a probability")));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - S::one()).abs() > S::tol(NORMALIZATION_TOL) {
            return Err(invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(Self::new_unchecked(probs))
    }

    /// Normalizes non-negative weights into a pmf (the `empirical`
    /// constructor). Trailing zero-weight degrees are kept.
    pub fn from_weights(weights: Vec<S>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(invalid("a degree distribution needs k_max >= 1"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < S::zero()) {
            return Err(invalid("weights must be finite and non-negative"));
        }
        let total = compensated_sum(weights.iter().copied());
        if total <= S::zero() {
            return Err(invalid("weights sum to zero"));
        }
        Ok(Self::new_unchecked(
            weights.into_iter().map(|w| w / total).collect(),
        ))
    }

    fn new_unchecked(probs: Vec<S>) -> Self {
        let mut order: Vec<usize> = (0..probs.len()).collect();
        // Stable: equal masses keep ascending degree order.
        order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).expect("finite masses"));
        Self { probs, order }
    }

    /// `P(k) ∝ k^-alpha` on `k_min..=k_max`, zero elsewhere.
    pub fn power_law(alpha: S, k_min: usize, k_max: usize) -> Result<Self> {
        if !(alpha > S::one()) || !alpha.is_finite() {
            return Err(invalid(format!("power-law exponent must exceed 1, got {alpha}")));
        }
        if k_min < 1 || k_min > k_max {
            return Err(invalid(format!(
                "power-law support needs 1 <= k_min <= k_max, got {k_min}..={k_max}"
            )));
        }
        let mut weights = vec![S::zero(); k_max + 1];
        for (k, w) in weights.iter_mut().enumerate().skip(k_min) {
            *w = S::from_usize_exact(k).powf(-alpha);
        }
        Self::from_weights(weights)
    }

    /// Poisson(`lambda`) truncated at `k_max` and renormalized.
    pub fn poisson(lambda: S, k_max: usize) -> Result<Self> {
        if !(lambda > S::zero()) || !lambda.is_finite() {
            return Err(invalid(format!("Poisson mean must be positive, got {lambda}")));
        }
        if k_max < 1 {
            return Err(invalid("Poisson truncation needs k_max >= 1"));
        }
        let ln_lambda = lambda.ln();
        let mut ln_fact = S::zero();
        let weights = (0..=k_max)
            .map(|k| {
                if k > 0 {
                    ln_fact += S::from_usize_exact(k).ln();
                }
                (S::from_usize_exact(k) * ln_lambda - lambda - ln_fact).exp()
            })
            .collect();
        Self::from_weights(weights)
    }

    /// Every node has degree `degree`.
    pub fn regular(degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(invalid("regular degree must be at least 1"));
        }
        let mut probs = vec![S::zero(); degree + 1];
        probs[degree] = S::one();
        Ok(Self::new_unchecked(probs))
    }

    /// Reads a two-column `k,prob` CSV with a header row. Missing degrees
    /// get zero mass; the masses are normalized.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            k: usize,
            prob: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "prob"] {
            return Err(invalid(format!(
                "degree CSV header must be `k,prob`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut weights: Vec<S> = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            if weights.len() <= row.k {
                weights.resize(row.k + 1, S::zero());
            }
            weights[row.k] = S::c(row.prob);
        }
        if weights.len() < 2 {
            weights.resize(2, S::zero());
        }
        Self::from_weights(weights)
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, k: usize) -> S {
        self.probs.get(k).copied().unwrap_or_else(S::zero)
    }

    /// Number of degree classes, `k_max + 1`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Compensated `Σ_k term(k, P(k))`, visiting degrees by descending mass.
    pub fn expectation<F>(&self, mut term: F) -> S
    where
        F: FnMut(usize, S) -> S,
    {
        compensated_sum(self.order.iter().map(|&k| term(k, self.probs[k])))
    }

    /// `Σ_k k^order P(k)`.
    pub fn moment(&self, order: u32) -> S {
        self.expectation(|k, p| {
            if p == S::zero() {
                S::zero()
            } else {
                S::from_usize_exact(k).powi(order as i32) * p
            }
        })
    }

    /// Mean degree `⟨k⟩`.
    pub fn mean(&self) -> S {
        self.moment(1)
    }

    /// Probability generating function `Σ_k P(k) x^k`.
    pub fn pgf(&self, x: S) -> S {
        self.expectation(|k, p| p * x.powi(k as i32))
    }

    /// Excess-degree distribution `Q(k) = (k+1) P(k+1) / ⟨k⟩` on
    /// `0..=k_max-1`.
    pub fn excess_distribution(&self) -> Result<Self> {
        let mean = self.mean();
        if mean <= S::zero() {
            return Err(Error::DegenerateDistribution);
        }
        let mut q: Vec<S> = (0..self.k_max())
            .map(|k| S::from_usize_exact(k + 1) * self.probs[k + 1] / mean)
            .collect();
        // Excess support of a 1-regular graph is the single class k = 0.
        if q.len() < 2 {
            q.push(S::zero());
        }
        let total = compensated_sum(q.iter().copied());
        if total != S::one() {
            q.iter_mut().for_each(|x| *x /= total);
        }
        Ok(Self::new_unchecked(q))
    }

    /// Mean excess degree `(⟨k²⟩ − ⟨k⟩) / ⟨k⟩`.
    pub fn mean_excess_degree(&self) -> Result<S> {
        let mean = self.mean();
        if mean <= S::zero() {
            return Err(Error::DegenerateDistribution);
        }
        Ok((self.moment(2) - mean) / mean)
    }

    /// `n` independent degrees drawn from `P(k)`. When the stub total is
    /// odd, one uniformly chosen node receives an extra stub.
    pub fn sample_degree_sequence(&self, n: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_degree_sequence_with(n, &mut rng)
    }

    pub fn sample_degree_sequence_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let weights: Vec<f64> = self.probs.iter().map(|p| p.as_f64()).collect();
        let sampler = WeightedIndex::new(&weights).expect("validated pmf has positive mass");
        let mut degrees: Vec<usize> = (0..n).map(|_| sampler.sample(rng)).collect();
        let stubs: usize = degrees.iter().sum();
        if stubs % 2 == 1 {
            let i = rng.random_range(0..n);
            degrees[i] += 1;
        }
        degrees
    }
}
