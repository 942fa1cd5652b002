//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{vertex_enumeration, SmallLp};
use outreach_cli::commands;
use outreach_cli::config::RunConfig;
use outreach_core::lp::{ratio, Direction, Sense};
use outreach_core::optimizer::OptimizationMode;
use outreach_core::simulator::{network_seed, DEFAULT_THETA};
use outreach_core::{
    build_network, outbreak_analysis, run_campaign, solve_cost_min_for_q, CostModel, DegreeDistribution,
    IncentivePolicy, LinearProgram, OptimizationSpec, PercolationModel, PercolationParams, Process,
    RationalProgram, SirRates,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLOSED_FORM_TOL: f64 = 1e-9;
const CLOSED_FORM_MAX_TIME: Duration = Duration::from_millis(1);
const MC_SIZE_TOL: f64 = 0.01;
const MC_MAX_TIME: Duration = Duration::from_secs(60);
const LEMMA_TOL: f64 = 1e-10;
const LP_TOL: f64 = 1e-9;
const TARGET_SLACK: f64 = 1e-6;
const POOLED_SE_FACTOR: f64 = 2.0;
const COMPONENT_REL_TOL: f64 = 0.1;

const N_LARGE: usize = 100_000;
const N_SIR: usize = 10_000;
const TRIALS: usize = 200;
const SUBCRITICAL_TRIALS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn regular3() -> DegreeDistribution {
    DegreeDistribution::regular(3).unwrap()
}

fn power_law() -> DegreeDistribution {
    DegreeDistribution::power_law(2.5, 1, 100).unwrap()
}

fn zeros(dist: &DegreeDistribution) -> IncentivePolicy {
    IncentivePolicy::zeros(dist.len())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let dist = regular3();
    let a = outbreak_analysis(&dist, &zeros(&dist), &PercolationParams::uniform(0.75).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let err = (a.size - 26.0 / 27.0).abs();
    outcome(
        err <= CLOSED_FORM_TOL && elapsed < CLOSED_FORM_MAX_TIME,
        format!("size = {:.12}, |size - 26/27| = {err:.1e}, {elapsed:?}", a.size),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let dist = regular3();
    let net = build_network(&dist, &zeros(&dist), N_LARGE, network_seed(2)).unwrap();
    let process = Process::Percolation(PercolationParams::uniform(0.75).unwrap());
    let r = run_campaign(&net, &process, TRIALS, DEFAULT_THETA, 2).unwrap();
    let elapsed = start.elapsed();
    let Some(size) = r.mean_outbreak_size else {
        return outcome(false, "no outbreaks");
    };
    let err = (size - 26.0 / 27.0).abs();
    outcome(
        err <= MC_SIZE_TOL && elapsed < MC_MAX_TIME,
        format!("simulated {size:.6} over {} outbreaks, |diff| = {err:.2e}, {elapsed:.2?}", r.outbreaks),
    )
}

fn criterion_3() -> Outcome {
    let dist = regular3();
    let params = PercolationParams::new(0.0, 1.0).unwrap();
    let at = |q: f64| outbreak_analysis(&dist, &IncentivePolicy::constant(q, dist.len()).unwrap(), &params).unwrap();
    let (crit, above) = (at(0.5), at(0.51));
    outcome(
        crit.nu_tilde == 1.0 && crit.size == 0.0 && above.nu_tilde > 1.0 && above.size > 0.0,
        format!(
            "q = 0.5: nu = {}, size = {}; q = 0.51: nu = {}, size = {:.6}",
            crit.nu_tilde, crit.size, above.nu_tilde, above.size
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(0..=10);
        let f: Vec<f64> = (0..=n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let r = common::binomial_derivative_identity(&f, a, b, n).abs();
        worst = worst.max(r);
        failures += usize::from(r > LEMMA_TOL);
    }
    outcome(failures == 0, format!("1000 instances, worst |sum| = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let dist = power_law();
    let model = PercolationModel::new(&dist).unwrap();
    let grid: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let mut bad = Vec::new();
    let mut size_checks = 0;
    for t1 in [0.3, 0.45] {
        let params = PercolationParams::new(t1, 0.6).unwrap();
        let nu: Vec<f64> = grid.iter().map(|&q| model.branching_factor(q, &params)).collect();
        let psi: Vec<f64> = grid.iter().map(|&q| model.analyze_at(q, &params).unwrap().psi).collect();
        for i in 1..grid.len() - 1 {
            if nu[i + 1] - nu[i - 1] <= 0.0 {
                bad.push(format!("nu at T1 = {t1}, q = {:.3}", grid[i]));
            }
            let inside = |p: f64| p > 0.0 && p < 1.0;
            if inside(psi[i - 1]) && inside(psi[i + 1]) {
                size_checks += 1;
                if (1.0 - psi[i + 1]) - (1.0 - psi[i - 1]) <= 0.0 {
                    bad.push(format!("size at T1 = {t1}, q = {:.3}", grid[i]));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("96 nu differences, {size_checks} size differences, violations: {bad:?}"),
    )
}

fn random_lp(rng: &mut ChaCha8Rng) -> SmallLp {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=2);
    let coef = |rng: &mut ChaCha8Rng| -> f64 {
        if rng.random_bool(0.5) {
            rng.random_range(-3i32..=3) as f64
        } else {
            rng.random_range(-2.0..2.0)
        }
    };
    let c = (0..n).map(|_| coef(rng)).collect();
    let rows = (0..m)
        .map(|_| ((0..n).map(|_| coef(rng)).collect(), rng.random_bool(0.5), coef(rng)))
        .collect();
    let lo: Vec<f64> = (0..n).map(|_| rng.random_range(-2i32..=0) as f64).collect();
    let hi = lo.iter().map(|l| l + rng.random_range(0..=3) as f64).collect();
    SmallLp {
        maximize: rng.random_bool(0.5),
        c,
        rows,
        lo,
        hi,
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let lp = random_lp(&mut rng);
        let dir = if lp.maximize { Direction::Maximize } else { Direction::Minimize };
        let program = lp.rows.iter().fold(
            LinearProgram::new(dir, lp.c.clone(), lp.lo.clone(), lp.hi.clone()),
            |p, (a, le, b)| p.with_constraint(a.clone(), if *le { Sense::Le } else { Sense::Ge }, *b),
        );
        match (program.solve(), vertex_enumeration(&lp)) {
            (Ok(s), Some(best)) => {
                worst = worst.max((s.objective - best).abs());
                mismatches += usize::from((s.objective - best).abs() > LP_TOL);
            }
            (Err(_), None) => {}
            _ => mismatches += 1,
        }
    }

    let spec = OptimizationSpec {
        mode: OptimizationMode::CostMin { gamma: 0.0 },
        budget_b: 1.0,
        cost: CostModel::quadratic(4),
        dist: DegreeDistribution::from_probs(vec![0.0, 0.5, 0.0, 0.5]).unwrap(),
        params: PercolationParams::new(0.3, 0.6).unwrap(),
    };
    let hand = solve_cost_min_for_q(&spec, 0.5).unwrap();
    let (phi1, phi3) = (hand.phi.get(1), hand.phi.get(3));
    let float_ok = (hand.objective - 2.0).abs() <= LP_TOL && phi1 == 1.0 && (phi3 - 1.0 / 3.0).abs() <= LP_TOL;

    // The same LP in exact arithmetic: min ½x₁ + 9/2 x₃, ¼x₁ + ¾x₃ ≥ ½, ½x₁ + ½x₃ ≤ 1.
    let exact = RationalProgram::new(
        Direction::Minimize,
        vec![ratio(1, 2), ratio(9, 2)],
        vec![ratio(0, 1), ratio(0, 1)],
        vec![ratio(1, 1), ratio(1, 1)],
    )
    .with_constraint(vec![ratio(1, 4), ratio(3, 4)], Sense::Ge, ratio(1, 2))
    .with_constraint(vec![ratio(1, 2), ratio(1, 2)], Sense::Le, ratio(1, 1))
    .solve()
    .unwrap();
    let exact_ok = exact.objective == ratio(2, 1) && exact.x == vec![ratio(1, 1), ratio(1, 3)];

    outcome(
        mismatches == 0 && float_ok && exact_ok,
        format!(
            "random: {mismatches} mismatches, worst |diff| = {worst:.1e}; hand: cost {}, phi(1) = {phi1}, phi(3) = {phi3:.15}; exact: cost {}, x = [{}, {}]",
            hand.objective, exact.objective, exact.x[0], exact.x[1]
        ),
    )
}

fn config(json: &str) -> RunConfig {
    RunConfig::from_json(json).unwrap()
}

fn criterion_7() -> Outcome {
    let cfg = config(
        r#"{
            "degree_distribution": {"kind": "power_law", "alpha": 2.5, "k_min": 1, "k_max": 100},
            "percolation": {"t1": 0.3, "t2": 0.6},
            "optimization": {"mode": "cost_min", "gamma": 0.2, "budget_b": 0.7, "cost": {"kind": "linear"}},
            "sweep": {"variable": "T1", "start": 0.30, "stop": 0.47, "steps": 18}
        }"#,
    );
    let out = tempfile::TempDir::new().unwrap();
    let points = match commands::sweep(&cfg, out.path(), &mut std::io::sink()) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let dist = power_law();
    let mut problems = Vec::new();
    let mut p_prev = f64::INFINITY;
    let mut min_size = f64::INFINITY;
    for pt in &points {
        let Some(r) = &pt.result else {
            problems.push(format!("T1 = {:.2}: {}", pt.x, pt.status));
            continue;
        };
        if r.p_achieved > p_prev + 1e-12 {
            problems.push(format!("p rises at T1 = {:.2}", pt.x));
        }
        p_prev = r.p_achieved;
        // independent re-analysis of the returned policy
        let params = PercolationParams::new(pt.x, 0.6).unwrap();
        let size = outbreak_analysis(&dist, &r.phi, &params).unwrap().size;
        min_size = min_size.min(size);
        if size < 0.2 - TARGET_SLACK {
            problems.push(format!("size {size} at T1 = {:.2}", pt.x));
        }
        // high degrees first: φ non-decreasing in k over the support
        let phi: Vec<f64> = (1..dist.len()).map(|k| r.phi.get(k)).collect();
        if phi.windows(2).any(|w| w[1] < w[0]) || phi.iter().filter(|&&v| v > 0.0 && v < 1.0).count() > 1 {
            problems.push(format!("φ is not a high-degree threshold at T1 = {:.2}", pt.x));
        }
    }

    // Brute-force cross-check of the LP on a coarsened 10-class distribution,
    // with the link-fraction target of the full problem at T1 = 0.35.
    let coarse = DegreeDistribution::power_law(2.5, 1, 10).unwrap();
    let q_star = outreach_core::invert_outreach(&dist, &PercolationParams::new(0.35, 0.6).unwrap(), 0.2, 1e-12).unwrap();
    let spec = OptimizationSpec {
        mode: OptimizationMode::CostMin { gamma: 0.2 },
        budget_b: 0.7,
        cost: CostModel::linear(coarse.len()),
        dist: coarse.clone(),
        params: PercolationParams::new(0.35, 0.6).unwrap(),
    };
    let mean = coarse.mean();
    let oracle = vertex_enumeration(&SmallLp {
        maximize: false,
        c: (1..=10).map(|k| k as f64 * coarse.prob(k)).collect(),
        rows: vec![
            ((1..=10).map(|k| k as f64 * coarse.prob(k) / mean).collect(), false, q_star),
            ((1..=10).map(|k| coarse.prob(k)).collect(), true, 0.7),
        ],
        lo: vec![0.0; 10],
        hi: vec![1.0; 10],
    });
    match (solve_cost_min_for_q(&spec, q_star), oracle) {
        (Ok(r), Some(best)) if (r.objective - best).abs() <= LP_TOL => {}
        (r, best) => problems.push(format!(
            "10-class LP {:?} vs brute force {best:?}",
            r.map(|r| r.objective)
        )),
    }

    let first = points.first().and_then(|p| p.result.as_ref()).map(|r| r.p_achieved);
    let last = points.last().and_then(|p| p.result.as_ref()).map(|r| r.p_achieved);
    outcome(
        problems.is_empty(),
        format!(
            "{} points, p from {:.4} to {:.4}, min verified size {min_size:.9}; problems: {problems:?}",
            points.len(),
            first.unwrap_or(f64::NAN),
            last.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = config(
        r#"{
            "degree_distribution": {"kind": "power_law", "alpha": 2.5, "k_min": 1, "k_max": 100},
            "percolation": {"t1": 0.3, "t2": 0.6},
            "optimization": {"mode": "size_max", "budget_c": 0, "budget_b": 0.7, "cost": {"kind": "linear"}},
            "sweep": {"variable": "C", "start": 0, "stop": 3, "steps": 31}
        }"#,
    );
    let out = tempfile::TempDir::new().unwrap();
    let points = match commands::sweep(&cfg, out.path(), &mut std::io::sink()) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let results: Vec<_> = points.iter().filter_map(|p| p.result.as_ref().map(|r| (p.x, r))).collect();
    if results.len() != points.len() {
        return outcome(false, "some sweep points failed");
    }
    let monotone = results.windows(2).all(|w| w[1].1.size_achieved >= w[0].1.size_achieved);
    // Saturation: first C at which the cost budget no longer binds.
    let Some(sat) = results.iter().position(|(c, r)| r.cost_achieved < c - 1e-9) else {
        return outcome(false, "cost budget binds over the whole grid");
    };
    let plateau = results[sat].1.size_achieved;
    let flat = results[sat..].iter().all(|(_, r)| r.size_achieved == plateau);
    let rising = results[..sat].windows(2).all(|w| w[1].1.size_achieved > w[0].1.size_achieved);
    outcome(
        monotone && flat && rising,
        format!(
            "size {:.6} at C = 0 rising to {plateau:.6}, constant from C = {:.2} (p = {:.3}, budget B binding)",
            results[0].1.size_achieved, results[sat].0, results[sat].1.p_achieved
        ),
    )
}

fn criterion_9() -> Outcome {
    let dist = regular3();
    let net = build_network(&dist, &zeros(&dist), N_SIR, network_seed(9)).unwrap();
    let rates = SirRates::new(3.0, 1.0, 3.0, 1.0).unwrap();
    let sir = run_campaign(&net, &Process::Sir(rates), TRIALS, DEFAULT_THETA, 91).unwrap();
    let perc = run_campaign(&net, &Process::Percolation(rates.transmissibilities()), TRIALS, DEFAULT_THETA, 92).unwrap();
    let (Some(a), Some(b)) = (sir.mean_outbreak_size, perc.mean_outbreak_size) else {
        return outcome(false, "no outbreaks");
    };
    let pooled = (sir.se_mean_outbreak_size.unwrap().powi(2) + perc.se_mean_outbreak_size.unwrap().powi(2)).sqrt();
    let diff = (a - b).abs();
    outcome(
        diff <= POOLED_SE_FACTOR * pooled,
        format!("SIR {a:.6} vs percolation {b:.6}, |diff| = {diff:.2e}, 2 pooled SE = {:.2e}", 2.0 * pooled),
    )
}

fn criterion_10() -> Outcome {
    let dist = regular3();
    let params = PercolationParams::uniform(0.25).unwrap();
    let stats = PercolationModel::new(&dist).unwrap().component_stats(&zeros(&dist), &params).unwrap();
    let net = build_network(&dist, &zeros(&dist), N_LARGE, network_seed(10)).unwrap();
    let r = run_campaign(&net, &Process::Percolation(params), SUBCRITICAL_TRIALS, DEFAULT_THETA, 10).unwrap();
    let Some(sim) = r.mean_small_component else {
        return outcome(false, "every trial was an outbreak");
    };
    let rel = (sim - stats.s_mean).abs() / stats.s_mean;
    outcome(
        stats.s_mean == 2.5 && rel <= COMPONENT_REL_TOL,
        format!(
            "analytic <s> = {}, simulated {sim:.4} ± {:.4} over {} trials, relative error {:.2}%",
            stats.s_mean,
            r.se_mean_small_component.unwrap_or(0.0),
            r.trials - r.outbreaks,
            100.0 * rel
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("closed-form outbreak size", criterion_1),
        ("theory vs Monte Carlo", criterion_2),
        ("two-type criticality", criterion_3),
        ("binomial derivative identity", criterion_4),
        ("monotonicity in q", criterion_5),
        ("LP exactness", criterion_6),
        ("T1 sweep regime", criterion_7),
        ("cost budget sweep regime", criterion_8),
        ("SIR vs percolation", criterion_9),
        ("subcritical component size", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
