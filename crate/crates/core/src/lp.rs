//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Every structural variable carries a finite box `[lower, upper]`; general
//! rows are few. The solver works over any ordered field through
//! [`LpScalar`]: `f64`/`f32` with pivot tolerances, or `BigRational` with
//! exact arithmetic. Bland's rule is used for both the entering and the
//! leaving choice, so degenerate problems cannot cycle.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumAssign, ToPrimitive};
use thiserror::Error;

/// Ordered field the simplex runs over.
///
/// Method names avoid `num_traits::Float`/`Signed` so that a type can be
/// bounded by both this trait and [`crate::Scalar`].
pub trait LpScalar:
    NumAssign + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    /// Magnitudes at or below this are treated as zero in pivoting and
    /// optimality tests.
    fn pivot_tol() -> Self;
    /// Largest total infeasibility accepted at the end of phase one.
    fn feasibility_tol() -> Self;
    fn lp_from_f64(x: f64) -> Option<Self>;
    fn lp_to_f64(&self) -> f64;

    fn magnitude(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl LpScalar for f64 {
    fn pivot_tol() -> Self {
        1e-11
    }
    fn feasibility_tol() -> Self {
        1e-9
    }
    fn lp_from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn lp_to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for f32 {
    fn pivot_tol() -> Self {
        1e-5
    }
    fn feasibility_tol() -> Self {
        1e-4
    }
    fn lp_from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }
    fn lp_to_f64(&self) -> f64 {
        *self as f64
    }
}

impl LpScalar for BigRational {
    fn pivot_tol() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn feasibility_tol() -> Self {
        Self::pivot_tol()
    }
    fn lp_from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn lp_to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Selection among alternative optima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Whatever vertex the pivoting reaches first.
    None,
    /// Lexicographically maximize `(x[n-1], x[n-2], ..., x[0])` over the
    /// optimal face.
    #[default]
    HighIndexFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub direction: Direction,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// `a_i · x` for each general row.
    pub activity: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

impl<T: LpScalar> LinearProgram<T> {
    /// A program over the box `[lower, upper]` with no general rows.
    pub fn new(direction: Direction, objective: Vec<T>, lower: Vec<T>, upper: Vec<T>) -> Self {
        Self {
            direction,
            objective,
            constraints: Vec::new(),
            lower,
            upper,
            tie_break: TieBreak::default(),
        }
    }

    pub fn with_constraint(mut self, coeffs: Vec<T>, sense: Sense, rhs: T) -> Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed(format!(
                "{n} variables but {} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some(i) = self.constraints.iter().position(|c| c.coeffs.len() != n) {
            return Err(LpError::Malformed(format!("row {i} has the wrong length")));
        }
        if let Some(j) = (0..n).find(|&j| self.lower[j] > self.upper[j]) {
            return Err(LpError::Malformed(format!("variable {j} has lower > upper")));
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        lp_solve(self)
    }
}

/// Solves `lp` to a vertex optimum.
pub fn lp_solve<T: LpScalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let mut tableau = Tableau::new(lp);

    // Phase one: drive the artificials to zero.
    let mut cost = vec![T::zero(); tableau.width];
    for c in cost.iter_mut().skip(n + tableau.m) {
        *c = T::one();
    }
    tableau.optimize(&cost)?;
    let infeasibility = tableau.objective_value(&cost);
    if infeasibility > T::feasibility_tol() {
        return Err(LpError::Infeasible);
    }
    for a in n + tableau.m..tableau.width {
        tableau.lo[a] = Some(T::zero());
        tableau.hi[a] = Some(T::zero());
    }

    // Phase two.
    let mut cost = vec![T::zero(); tableau.width];
    for (c, o) in cost.iter_mut().zip(&lp.objective) {
        *c = match lp.direction {
            Direction::Minimize => o.clone(),
            Direction::Maximize => -o.clone(),
        };
    }
    tableau.optimize(&cost)?;

    if lp.tie_break == TieBreak::HighIndexFirst {
        tableau.fix_nonbasic_with_nonzero_reduced_cost(&cost);
        for j in (0..n).rev() {
            let mut secondary = vec![T::zero(); tableau.width];
            secondary[j] = -T::one();
            tableau.optimize(&secondary)?;
            tableau.fix_nonbasic_with_nonzero_reduced_cost(&secondary);
        }
    }

    let mut x: Vec<T> = tableau.value[..n].to_vec();
    for (j, v) in x.iter_mut().enumerate() {
        snap(v, &lp.lower[j]);
        snap(v, &lp.upper[j]);
    }
    let objective = dot(&lp.objective, &x);
    let activity = lp.constraints.iter().map(|c| dot(&c.coeffs, &x)).collect();
    Ok(LpSolution {
        x,
        objective,
        activity,
    })
}

fn snap<T: LpScalar>(v: &mut T, bound: &T) {
    if (v.clone() - bound.clone()).magnitude() <= T::pivot_tol() {
        *v = bound.clone();
    }
}

fn dot<T: LpScalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Columns: structural `0..n`, slacks `n..n+m`, artificials `n+m..n+2m`.
struct Tableau<T> {
    m: usize,
    width: usize,
    /// `B⁻¹ [A | I | Σ]`, row-major.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    value: Vec<T>,
    lo: Vec<Option<T>>,
    hi: Vec<Option<T>>,
}

impl<T: LpScalar> Tableau<T> {
    fn new(lp: &LinearProgram<T>) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let width = n + 2 * m;

        let mut lo: Vec<Option<T>> = lp.lower.iter().cloned().map(Some).collect();
        let mut hi: Vec<Option<T>> = lp.upper.iter().cloned().map(Some).collect();
        for c in &lp.constraints {
            let (l, h) = match c.sense {
                Sense::Le => (Some(T::zero()), None),
                Sense::Ge => (None, Some(T::zero())),
                Sense::Eq => (Some(T::zero()), Some(T::zero())),
            };
            lo.push(l);
            hi.push(h);
        }
        for _ in 0..m {
            lo.push(Some(T::zero()));
            hi.push(None);
        }

        let mut value = vec![T::zero(); width];
        value[..n].clone_from_slice(&lp.lower);

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut is_basic = vec![false; width];
        for (i, c) in lp.constraints.iter().enumerate() {
            let residual = c.rhs.clone() - dot(&c.coeffs, &lp.lower);
            let flip = residual < T::zero();
            let mut row = vec![T::zero(); width];
            for (r, a) in row.iter_mut().zip(&c.coeffs) {
                *r = if flip { -a.clone() } else { a.clone() };
            }
            row[n + i] = if flip { -T::one() } else { T::one() };
            row[n + m + i] = T::one();
            rows.push(row);
            let art = n + m + i;
            value[art] = residual.magnitude();
            basis.push(art);
            is_basic[art] = true;
        }

        Self {
            m,
            width,
            rows,
            basis,
            is_basic,
            value,
            lo,
            hi,
        }
    }

    fn objective_value(&self, cost: &[T]) -> T {
        dot(cost, &self.value)
    }

    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, tij) in d.iter_mut().zip(row) {
                *dj -= cb.clone() * tij.clone();
            }
        }
        d
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lo[j], &self.hi[j]), (Some(l), Some(h)) if l == h)
    }

    fn can_increase(&self, j: usize) -> bool {
        self.hi[j].as_ref().is_none_or(|h| self.value[j] < *h)
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.lo[j].as_ref().is_none_or(|l| self.value[j] > *l)
    }

    fn optimize(&mut self, cost: &[T]) -> Result<(), LpError> {
        let eps = T::pivot_tol();
        loop {
            let d = self.reduced_costs(cost);
            // Bland: lowest-index improving nonbasic column.
            let entering = (0..self.width).find_map(|j| {
                if self.is_basic[j] || self.is_fixed(j) {
                    return None;
                }
                if d[j] < -eps.clone() && self.can_increase(j) {
                    Some((j, true))
                } else if d[j] > eps && self.can_decrease(j) {
                    Some((j, false))
                } else {
                    None
                }
            });
            let Some((j, increase)) = entering else {
                return Ok(());
            };
            self.step(j, increase)?;
        }
    }

    /// Moves nonbasic `j` up (`increase`) or down until a bound blocks.
    fn step(&mut self, j: usize, increase: bool) -> Result<(), LpError> {
        let eps = T::pivot_tol();
        // (step length, blocking variable, blocking row or None for a flip)
        let mut best: Option<(T, usize, Option<usize>)> = None;
        let consider = |t: T, var: usize, row: Option<usize>, best: &mut Option<(T, usize, Option<usize>)>| {
            let t = if t < T::zero() { T::zero() } else { t };
            let better = match best {
                None => true,
                Some((bt, bv, _)) => t < *bt || (t == *bt && var < *bv),
            };
            if better {
                *best = Some((t, var, row));
            }
        };

        if let (Some(l), Some(h)) = (&self.lo[j], &self.hi[j]) {
            consider(h.clone() - l.clone(), j, None, &mut best);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let alpha = &row[j];
            if alpha.magnitude() <= eps {
                continue;
            }
            // Basic i moves by -alpha per unit increase of x_j.
            let delta = if increase { -alpha.clone() } else { alpha.clone() };
            let b = self.basis[i];
            let limit = if delta < T::zero() {
                self.lo[b]
                    .as_ref()
                    .map(|l| (self.value[b].clone() - l.clone()) / -delta.clone())
            } else {
                self.hi[b]
                    .as_ref()
                    .map(|h| (h.clone() - self.value[b].clone()) / delta.clone())
            };
            if let Some(t) = limit {
                consider(t, b, Some(i), &mut best);
            }
        }

        let Some((t, _, row)) = best else {
            return Err(LpError::Unbounded);
        };

        let signed_t = if increase { t.clone() } else { -t.clone() };
        for (i, r) in self.rows.iter().enumerate() {
            let b = self.basis[i];
            let change = r[j].clone() * signed_t.clone();
            self.value[b] -= change;
        }
        self.value[j] += signed_t;

        match row {
            None => {
                // Bound flip: land exactly on the opposite bound.
                self.value[j] = if increase {
                    self.hi[j].clone().expect("flip needs a finite bound")
                } else {
                    self.lo[j].clone().expect("flip needs a finite bound")
                };
            }
            Some(p) => {
                let leaving = self.basis[p];
                let moved_down = {
                    let alpha = &self.rows[p][j];
                    (alpha > &T::zero()) == increase
                };
                self.value[leaving] = if moved_down {
                    self.lo[leaving].clone().expect("blocked at a finite bound")
                } else {
                    self.hi[leaving].clone().expect("blocked at a finite bound")
                };
                self.pivot(p, j);
            }
        }
        Ok(())
    }

    fn pivot(&mut self, p: usize, j: usize) {
        let piv = self.rows[p][j].clone();
        for x in self.rows[p].iter_mut() {
            *x /= piv.clone();
        }
        let pivot_row = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let factor = row[j].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= factor.clone() * y.clone();
            }
            row[j] = T::zero();
        }
        let leaving = self.basis[p];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[p] = j;
    }

    /// Pins nonbasic variables whose reduced cost is nonzero at their
    /// current value: every optimum of `cost` has them there.
    fn fix_nonbasic_with_nonzero_reduced_cost(&mut self, cost: &[T]) {
        let d = self.reduced_costs(cost);
        let eps = T::pivot_tol();
        for j in 0..self.width {
            if !self.is_basic[j] && d[j].magnitude() > eps {
                self.lo[j] = Some(self.value[j].clone());
                self.hi[j] = Some(self.value[j].clone());
            }
        }
    }
}

/// Converts an `f64` program into another field, e.g. exact rationals.
pub fn convert_program<T: LpScalar>(lp: &LinearProgram<f64>) -> Option<LinearProgram<T>> {
    let conv = |v: &[f64]| v.iter().map(|&x| T::lp_from_f64(x)).collect::<Option<Vec<T>>>();
    Some(LinearProgram {
        direction: lp.direction,
        objective: conv(&lp.objective)?,
        constraints: lp
            .constraints
            .iter()
            .map(|c| {
                Some(Constraint {
                    coeffs: conv(&c.coeffs)?,
                    sense: c.sense,
                    rhs: T::lp_from_f64(c.rhs)?,
                })
            })
            .collect::<Option<Vec<_>>>()?,
        lower: conv(&lp.lower)?,
        upper: conv(&lp.upper)?,
        tie_break: lp.tie_break,
    })
}

/// Exact rational from a small integer ratio; handy in tests and configs.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(
        BigInt::from_i64(num).expect("i64 fits"),
        BigInt::from_i64(den).expect("i64 fits"),
    )
}
