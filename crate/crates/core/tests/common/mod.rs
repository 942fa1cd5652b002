//! Independent reference computations used as test oracles. None of these
//! call into the code paths they check.
#![allow(dead_code)]

/// Binomial coefficient as f64 by the multiplicative formula.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact-ish sum using double-double accumulation (Knuth two-sum).
pub fn dd_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for x in terms {
        let s = hi + x;
        let bp = s - hi;
        let err = (hi - (s - bp)) + (x - bp);
        hi = s;
        lo += err;
    }
    hi + lo
}

/// Excess distribution `Q(k) = (k+1) P(k+1) / ⟨k⟩` by direct evaluation.
pub fn excess(probs: &[f64]) -> Vec<f64> {
    let mean: f64 = dd_sum(probs.iter().enumerate().map(|(k, p)| k as f64 * p));
    (0..probs.len() - 1)
        .map(|k| (k + 1) as f64 * probs[k + 1] / mean)
        .collect()
}

/// `Σ_{k1,k2} w(k1, k2) C(k1+k2, k2) q^k2 (1−q)^k1 D(k1+k2)`.
pub fn double_sum(dist: &[f64], q: f64, w: impl Fn(usize, usize) -> f64) -> f64 {
    let mut terms = Vec::new();
    for (k, &d) in dist.iter().enumerate() {
        for k2 in 0..=k {
            let k1 = k - k2;
            let joint = binom(k, k2) * q.powi(k2 as i32) * (1.0 - q).powi(k1 as i32) * d;
            terms.push(w(k1, k2) * joint);
        }
    }
    dd_sum(terms)
}

/// Branching factor `T1 Σ k1 Q(k1,k2) + T2 Σ k2 Q(k1,k2)`.
pub fn nu_tilde(probs: &[f64], q: f64, t1: f64, t2: f64) -> f64 {
    let qd = excess(probs);
    double_sum(&qd, q, |k1, k2| t1 * k1 as f64 + t2 * k2 as f64)
}

/// Fixed-point map `f(u)` as the explicit double sum over `Q(k1, k2)`.
pub fn fixed_point_map(probs: &[f64], u: f64, q: f64, t1: f64, t2: f64) -> f64 {
    let qd = excess(probs);
    let a = 1.0 + (u - 1.0) * t1;
    let b = 1.0 + (u - 1.0) * t2;
    double_sum(&qd, q, |k1, k2| a.powi(k1 as i32) * b.powi(k2 as i32))
}

/// `ψ(u)` as the explicit double sum over `P(k1, k2)`.
pub fn psi(probs: &[f64], u: f64, q: f64, t1: f64, t2: f64) -> f64 {
    let a = 1.0 + (u - 1.0) * t1;
    let b = 1.0 + (u - 1.0) * t2;
    double_sum(probs, q, |k1, k2| a.powi(k1 as i32) * b.powi(k2 as i32))
}

/// Left side of the combinatorial identity: for `f` on `0..=n`,
/// `Σ f(k1+k2) C(k1+k2,k2) [k2 a^(k2−1) b^k1 − k1 a^k2 b^(k1−1)]`.
pub fn binomial_derivative_identity(f: &[f64], a: f64, b: f64, n: usize) -> f64 {
    let mut total = Vec::new();
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            let c = binom(k1 + k2, k2) * f[k1 + k2];
            let left = if k2 == 0 {
                0.0
            } else {
                k2 as f64 * a.powi(k2 as i32 - 1) * b.powi(k1 as i32)
            };
            let right = if k1 == 0 {
                0.0
            } else {
                k1 as f64 * a.powi(k2 as i32) * b.powi(k1 as i32 - 1)
            };
            total.push(c * left);
            total.push(-c * right);
        }
    }
    dd_sum(total)
}

/// A small LP for the vertex-enumeration oracle:
/// optimize `c·x` over `lo ≤ x ≤ hi` and rows `a_i·x (≤|≥) b_i`.
#[derive(Debug, Clone)]
pub struct SmallLp {
    pub maximize: bool,
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, bool, f64)>, // (coeffs, is_le, rhs)
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// Best objective over all basic feasible points: pick a subset of rows to
/// hold with equality, as many basic variables, and put every other
/// variable at one of its bounds. `None` when no point is feasible.
pub fn vertex_enumeration(lp: &SmallLp) -> Option<f64> {
    let n = lp.c.len();
    let m = lp.rows.len();
    let feas_tol = 1e-9;
    let mut best: Option<f64> = None;
    for row_mask in 0u32..(1 << m) {
        let tight: Vec<usize> = (0..m).filter(|i| row_mask & (1 << i) != 0).collect();
        let r = tight.len();
        if r > n {
            continue;
        }
        for basic in combinations(n, r) {
            let nonbasic: Vec<usize> = (0..n).filter(|j| !basic.contains(j)).collect();
            for bound_mask in 0u64..(1 << nonbasic.len()) {
                let mut x = vec![0.0; n];
                for (t, &j) in nonbasic.iter().enumerate() {
                    x[j] = if bound_mask & (1 << t) != 0 { lp.hi[j] } else { lp.lo[j] };
                }
                if r > 0 {
                    let mat: Vec<Vec<f64>> = tight
                        .iter()
                        .map(|&i| basic.iter().map(|&j| lp.rows[i].0[j]).collect())
                        .collect();
                    let rhs: Vec<f64> = tight
                        .iter()
                        .map(|&i| {
                            lp.rows[i].2
                                - nonbasic.iter().map(|&j| lp.rows[i].0[j] * x[j]).sum::<f64>()
                        })
                        .collect();
                    let Some(sol) = solve_dense(mat, rhs) else { continue };
                    for (&j, v) in basic.iter().zip(sol) {
                        x[j] = v;
                    }
                }
                let in_box = (0..n).all(|j| x[j] >= lp.lo[j] - feas_tol && x[j] <= lp.hi[j] + feas_tol);
                let rows_ok = lp.rows.iter().all(|(a, le, b)| {
                    let act: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
                    if *le {
                        act <= b + feas_tol
                    } else {
                        act >= b - feas_tol
                    }
                });
                if in_box && rows_ok {
                    let obj: f64 = lp.c.iter().zip(&x).map(|(p, q)| p * q).sum();
                    best = Some(match best {
                        None => obj,
                        Some(b) if lp.maximize => b.max(obj),
                        Some(b) => b.min(obj),
                    });
                }
            }
        }
    }
    best
}

pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}
