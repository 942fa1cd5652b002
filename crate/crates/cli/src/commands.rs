//! The four subcommands. Each reads a [`RunConfig`], writes CSV into the
//! output directory, prints a short summary and returns what it computed.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use outreach_core::optimizer::OptimizationMode;
use outreach_core::percolation::CRITICAL_BAND;
use outreach_core::simulator::network_seed;
use outreach_core::{
    build_network, run_campaign, ComponentStats, DegreeDistribution, Error as CoreError,
    IncentivePolicy, Infeasibility, OptimizationResult, OptimizationSpec, OutbreakAnalysis,
    PercolationModel, PercolationParams, Process, SimulationReport, TwoTypeMixture,
};
use serde::Serialize;

use crate::config::{Method, Mode, RunConfig, SweepVariable};
use crate::error::CliError;

/// Theory and simulation agree when the simulated outbreak size is within
/// `max(SIZE_ABS_TOL, SIZE_SE_FACTOR · SE)` of `1 − ψ` (for `ν̃ > SUPERCRITICAL_MIN`)
/// or the small-component size within `COMPONENT_REL_TOL` of `⟨s⟩`
/// (for `ν̃ ≤ SUBCRITICAL_MAX`).
pub const SIZE_ABS_TOL: f64 = 0.02;
pub const SIZE_SE_FACTOR: f64 = 3.0;
pub const COMPONENT_REL_TOL: f64 = 0.1;
pub const SUPERCRITICAL_MIN: f64 = 1.1;
pub const SUBCRITICAL_MAX: f64 = 0.9;

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvOut {
    fn create(dir: &Path, name: &str) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        Ok(Self {
            writer: csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(file),
            path,
        })
    }

    fn fail(&self, e: impl Into<std::io::Error>) -> CliError {
        CliError::Output {
            path: self.path.clone(),
            source: e.into(),
        }
    }

    fn row<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        self.writer.serialize(row).map_err(|e| self.fail(e))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| self.fail(e))?;
        Ok(self.path)
    }
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

fn say(console: &mut dyn Write, line: std::fmt::Arguments<'_>) {
    // A closed stdout is not worth failing a run over.
    let _ = writeln!(console, "{line}");
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub mixture: TwoTypeMixture,
    pub analysis: OutbreakAnalysis,
    pub components: Option<ComponentStats>,
}

#[derive(Serialize)]
struct AnalysisRow {
    q: f64,
    p: f64,
    nu_tilde: f64,
    u_star: f64,
    psi: f64,
    size: f64,
    supercritical: bool,
    s_mean: Option<f64>,
    s1_mean: Option<f64>,
    s2_mean: Option<f64>,
}

fn analyze_policy(
    dist: &DegreeDistribution,
    policy: &IncentivePolicy,
    params: &PercolationParams,
) -> Result<AnalyzeReport, CliError> {
    let model = PercolationModel::new(dist).map_err(|e| CliError::from_core("degree_distribution", e))?;
    let mixture = model.mixture(policy).map_err(|e| CliError::from_core("policy", e))?;
    let analysis = model
        .analyze_at(mixture.q, params)
        .map_err(|e| CliError::from_core("percolation", e))?;
    let components = if analysis.nu_tilde < 1.0 - CRITICAL_BAND {
        Some(
            model
                .component_stats_at(mixture, params)
                .map_err(|e| CliError::from_core("percolation", e))?,
        )
    } else {
        None
    };
    Ok(AnalyzeReport {
        mixture,
        analysis,
        components,
    })
}

/// Threshold, fixed point, outbreak size and (when subcritical) mean
/// component size. Writes `analysis.csv`.
pub fn analyze(cfg: &RunConfig, out: &Path, console: &mut dyn Write) -> Result<AnalyzeReport, CliError> {
    let dist = cfg.distribution()?;
    let params = cfg.params()?;
    let policy = cfg.policy(&dist)?;
    let report = analyze_policy(&dist, &policy, &params)?;
    prepare_out(out)?;
    let mut csv = CsvOut::create(out, "analysis.csv")?;
    let a = &report.analysis;
    csv.row(&AnalysisRow {
        q: report.mixture.q,
        p: report.mixture.p,
        nu_tilde: a.nu_tilde,
        u_star: a.u_star,
        psi: a.psi,
        size: a.size,
        supercritical: a.supercritical,
        s_mean: report.components.map(|c| c.s_mean),
        s1_mean: report.components.map(|c| c.s1_mean),
        s2_mean: report.components.map(|c| c.s2_mean),
    })?;
    let path = csv.finish()?;
    say(console, format_args!("q = {:.6}, p = {:.6}", report.mixture.q, report.mixture.p));
    say(
        console,
        format_args!(
            "nu_tilde = {:.9}, u* = {:.9}, psi = {:.9}, size = {:.9} ({})",
            a.nu_tilde,
            a.u_star,
            a.psi,
            a.size,
            if a.supercritical { "supercritical" } else { "subcritical" }
        ),
    );
    if let Some(c) = report.components {
        say(
            console,
            format_args!("<s> = {:.9} (type 1: {:.9}, type 2: {:.9})", c.s_mean, c.s1_mean, c.s2_mean),
        );
    }
    say(console, format_args!("wrote {}", path.display()));
    Ok(report)
}

/// Short machine-readable status of an optimization attempt.
pub fn status_of(result: &Result<OptimizationResult, CoreError>) -> &'static str {
    match result {
        Ok(_) => "optimal",
        Err(CoreError::Infeasible(Infeasibility::OutreachUnreachable { .. })) => "infeasible_outreach",
        Err(CoreError::Infeasible(Infeasibility::BudgetTooSmall { .. })) => "infeasible_budget",
        Err(CoreError::Infeasible(Infeasibility::Lp)) => "infeasible",
        Err(CoreError::NotMonotone { .. }) => "not_monotone",
        Err(CoreError::NotConverged { .. } | CoreError::Unbounded | CoreError::Supercritical { .. }) => {
            "numerical_failure"
        }
        Err(_) => "invalid",
    }
}

/// Classes with positive mass, the rows of every φ table we write.
fn support(dist: &DegreeDistribution) -> impl Iterator<Item = usize> + '_ {
    (0..dist.len()).filter(|&k| dist.prob(k) > 0.0)
}

#[derive(Serialize)]
struct PhiRow {
    k: usize,
    phi: f64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    mode: &'a str,
    status: &'a str,
    objective: Option<f64>,
    q_star: Option<f64>,
    q_achieved: Option<f64>,
    p_achieved: Option<f64>,
    cost_achieved: Option<f64>,
    size_achieved: Option<f64>,
    binding: String,
    message: String,
}

fn mode_name(spec: &OptimizationSpec) -> &'static str {
    match spec.mode {
        OptimizationMode::CostMin { .. } => "cost_min",
        OptimizationMode::SizeMax { .. } => "size_max",
    }
}

/// Solves the optimization block. Writes `phi.csv` (optimal only) and
/// `summary.csv`; infeasibility is reported in the summary and as an
/// [`CliError::Infeasible`].
pub fn optimize(cfg: &RunConfig, out: &Path, console: &mut dyn Write) -> Result<OptimizationResult, CliError> {
    let spec = cfg.optimization_spec()?;
    let result = spec.solve();
    let status = status_of(&result);
    let result = match result {
        Err(e) if !matches!(e, CoreError::Infeasible(_)) => return Err(CliError::from_core("optimization", e)),
        r => r,
    };
    prepare_out(out)?;
    let mut summary = CsvOut::create(out, "summary.csv")?;
    let row = match &result {
        Ok(r) => SummaryRow {
            mode: mode_name(&spec),
            status,
            objective: Some(r.objective),
            q_star: r.q_star,
            q_achieved: Some(r.q_achieved),
            p_achieved: Some(r.p_achieved),
            cost_achieved: Some(r.cost_achieved),
            size_achieved: Some(r.size_achieved),
            binding: r.binding.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            message: String::new(),
        },
        Err(e) => SummaryRow {
            mode: mode_name(&spec),
            status,
            objective: None,
            q_star: None,
            q_achieved: None,
            p_achieved: None,
            cost_achieved: None,
            size_achieved: None,
            binding: String::new(),
            message: e.to_string(),
        },
    };
    summary.row(&row)?;
    let summary_path = summary.finish()?;

    let r = match result {
        Ok(r) => r,
        Err(e) => {
            say(console, format_args!("status: {status}"));
            say(console, format_args!("wrote {}", summary_path.display()));
            return Err(CliError::from_core("optimization", e));
        }
    };
    let mut phi = CsvOut::create(out, "phi.csv")?;
    for k in support(&spec.dist) {
        phi.row(&PhiRow { k, phi: r.phi.get(k) })?;
    }
    let phi_path = phi.finish()?;
    say(console, format_args!("status: optimal ({})", mode_name(&spec)));
    if let Some(q_star) = r.q_star {
        say(console, format_args!("q* = {q_star:.9}"));
    }
    say(
        console,
        format_args!(
            "objective = {:.9}, q = {:.9}, p = {:.9}, cost = {:.9}, size = {:.9}",
            r.objective, r.q_achieved, r.p_achieved, r.cost_achieved, r.size_achieved
        ),
    );
    say(console, format_args!("binding: {}", row.binding));
    say(console, format_args!("wrote {} and {}", phi_path.display(), summary_path.display()));
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub x: f64,
    pub status: &'static str,
    pub result: Option<OptimizationResult>,
}

#[derive(Serialize)]
struct SweepRow {
    x: f64,
    objective: Option<f64>,
    size: Option<f64>,
    p: Option<f64>,
    cost: Option<f64>,
    status: &'static str,
}

#[derive(Serialize)]
struct SweepPhiRow {
    x: f64,
    k: usize,
    phi: f64,
}

/// Re-solves the optimization block along one variable. Writes
/// `sweep.csv` (one row per grid point, failures recorded in `status`)
/// and `sweep_phi.csv` (`x,k,phi` for every optimal point).
pub fn sweep(cfg: &RunConfig, out: &Path, console: &mut dyn Write) -> Result<Vec<SweepPoint>, CliError> {
    let block = cfg.sweep()?;
    let grid = block.grid()?;
    let base = cfg.optimization_spec()?;
    let mode = cfg.optimization.as_ref().map(|o| o.mode);
    match (block.variable, mode) {
        (SweepVariable::C, Some(Mode::CostMin)) => {
            return Err(CliError::config("sweep.variable: C needs optimization.mode = size_max"))
        }
        (SweepVariable::Gamma, Some(Mode::SizeMax)) => {
            return Err(CliError::config("sweep.variable: gamma needs optimization.mode = cost_min"))
        }
        _ => {}
    }

    let points: Vec<SweepPoint> = grid
        .iter()
        .map(|&x| {
            let mut spec = base.clone();
            let result = match block.variable {
                SweepVariable::T1 => PercolationParams::new(x, spec.params.t2).map(|p| spec.params = p),
                SweepVariable::C => {
                    spec.mode = OptimizationMode::SizeMax { budget_c: x };
                    Ok(())
                }
                SweepVariable::Gamma => {
                    spec.mode = OptimizationMode::CostMin { gamma: x };
                    Ok(())
                }
                SweepVariable::B => {
                    spec.budget_b = x;
                    Ok(())
                }
            }
            .and_then(|()| spec.solve());
            SweepPoint {
                x,
                status: status_of(&result),
                result: result.ok(),
            }
        })
        .collect();

    prepare_out(out)?;
    let mut csv = CsvOut::create(out, "sweep.csv")?;
    let mut phi_csv = CsvOut::create(out, "sweep_phi.csv")?;
    for pt in &points {
        let r = pt.result.as_ref();
        csv.row(&SweepRow {
            x: pt.x,
            objective: r.map(|r| r.objective),
            size: r.map(|r| r.size_achieved),
            p: r.map(|r| r.p_achieved),
            cost: r.map(|r| r.cost_achieved),
            status: pt.status,
        })?;
        if let Some(r) = r {
            for k in support(&base.dist) {
                phi_csv.row(&SweepPhiRow { x: pt.x, k, phi: r.phi.get(k) })?;
            }
        }
    }
    let path = csv.finish()?;
    let phi_path = phi_csv.finish()?;
    let solved = points.iter().filter(|p| p.result.is_some()).count();
    say(
        console,
        format_args!("swept {} over {} points, {solved} optimal", block.variable.name(), points.len()),
    );
    say(console, format_args!("wrote {} and {}", path.display(), phi_path.display()));
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Pass,
    Fail,
    /// Too close to the threshold for either check.
    NotApplicable,
}

/// Compares a simulation report with the analytic prediction.
pub fn agreement(report: &SimulationReport, theory: &AnalyzeReport) -> Agreement {
    let nu = theory.analysis.nu_tilde;
    if nu > SUPERCRITICAL_MIN {
        match (report.mean_outbreak_size, report.se_mean_outbreak_size) {
            (Some(m), Some(se)) if (m - theory.analysis.size).abs() <= SIZE_ABS_TOL.max(SIZE_SE_FACTOR * se) => {
                Agreement::Pass
            }
            _ => Agreement::Fail,
        }
    } else if nu <= SUBCRITICAL_MAX {
        match (report.mean_small_component, theory.components) {
            (Some(m), Some(c)) if (m - c.s_mean).abs() <= COMPONENT_REL_TOL * c.s_mean => Agreement::Pass,
            _ => Agreement::Fail,
        }
    } else {
        Agreement::NotApplicable
    }
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: &'static str,
    pub report: SimulationReport,
    pub agreement: Agreement,
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub theory: AnalyzeReport,
    pub runs: Vec<MethodRun>,
    /// Percolation vs SIR mean outbreak sizes within two pooled standard
    /// errors (`method = both` with outbreaks in both runs).
    pub cross_method: Option<bool>,
}

#[derive(Serialize)]
struct SimRow<'a> {
    method: &'a str,
    trials: usize,
    nodes: usize,
    theta: f64,
    outbreaks: usize,
    outbreak_fraction: f64,
    se_outbreak_fraction: f64,
    mean_outbreak_size: Option<f64>,
    se_mean_outbreak_size: Option<f64>,
    mean_small_component: Option<f64>,
    se_mean_small_component: Option<f64>,
    theory_nu_tilde: f64,
    theory_size: f64,
    theory_s_mean: Option<f64>,
    agreement: Agreement,
}

/// Monte Carlo on one configuration-model network. Writes `sim.csv` with
/// one row per method next to the theory it is checked against.
pub fn simulate(
    cfg: &RunConfig,
    out: &Path,
    seed: Option<u64>,
    console: &mut dyn Write,
) -> Result<SimulateReport, CliError> {
    let sim = cfg.simulation(seed)?;
    let dist = cfg.distribution()?;
    let params = cfg.params()?;
    let policy = cfg.policy(&dist)?;
    let mut processes = Vec::new();
    if matches!(sim.method, Method::Percolation | Method::Both) {
        processes.push(("percolation", Process::Percolation(params)));
    }
    if matches!(sim.method, Method::Sir | Method::Both) {
        processes.push(("sir", Process::Sir(cfg.rates()?)));
    }
    let theory = analyze_policy(&dist, &policy, &params)?;
    prepare_out(out)?;

    let net = build_network(&dist, &policy, sim.n, network_seed(sim.master_seed))
        .map_err(|e| CliError::from_core("simulation", e))?;
    if sim.export_network {
        for (name, result) in [
            ("edges.csv", File::create(out.join("edges.csv")).map(|f| net.write_edge_list(f))),
            ("nodes.csv", File::create(out.join("nodes.csv")).map(|f| net.write_node_types(f))),
        ] {
            let fail = |source| CliError::Output {
                path: out.join(name),
                source,
            };
            match result {
                Ok(Ok(())) => {}
                Ok(Err(CoreError::Io(e))) | Err(e) => return Err(fail(e)),
                Ok(Err(e)) => return Err(fail(std::io::Error::other(e.to_string()))),
            }
        }
    }

    let mut runs = Vec::new();
    for (method, process) in processes {
        let report = run_campaign(&net, &process, sim.trials, sim.theta, sim.master_seed)
            .map_err(|e| CliError::from_core("simulation", e))?;
        let agreement = agreement(&report, &theory);
        runs.push(MethodRun {
            method,
            report,
            agreement,
        });
    }
    let cross_method = match runs.as_slice() {
        [a, b] => match (
            a.report.mean_outbreak_size.zip(a.report.se_mean_outbreak_size),
            b.report.mean_outbreak_size.zip(b.report.se_mean_outbreak_size),
        ) {
            (Some((ma, sa)), Some((mb, sb))) => Some((ma - mb).abs() <= 2.0 * (sa * sa + sb * sb).sqrt()),
            _ => None,
        },
        _ => None,
    };

    let mut csv = CsvOut::create(out, "sim.csv")?;
    for run in &runs {
        let r = &run.report;
        csv.row(&SimRow {
            method: run.method,
            trials: r.trials,
            nodes: r.nodes,
            theta: r.theta,
            outbreaks: r.outbreaks,
            outbreak_fraction: r.outbreak_fraction,
            se_outbreak_fraction: r.se_outbreak_fraction,
            mean_outbreak_size: r.mean_outbreak_size,
            se_mean_outbreak_size: r.se_mean_outbreak_size,
            mean_small_component: r.mean_small_component,
            se_mean_small_component: r.se_mean_small_component,
            theory_nu_tilde: theory.analysis.nu_tilde,
            theory_size: theory.analysis.size,
            theory_s_mean: theory.components.map(|c| c.s_mean),
            agreement: run.agreement,
        })?;
    }
    let path = csv.finish()?;

    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    say(
        console,
        format_args!(
            "theory: nu_tilde = {:.6}, size = {:.6}, <s> = {}",
            theory.analysis.nu_tilde,
            theory.analysis.size,
            fmt(theory.components.map(|c| c.s_mean))
        ),
    );
    for run in &runs {
        let r = &run.report;
        say(
            console,
            format_args!(
                "{}: {} trials on n = {}, outbreak fraction {:.4} ± {:.4}, size {} ± {}, small component {} ± {}, agreement {}",
                run.method,
                r.trials,
                r.nodes,
                r.outbreak_fraction,
                r.se_outbreak_fraction,
                fmt(r.mean_outbreak_size),
                fmt(r.se_mean_outbreak_size),
                fmt(r.mean_small_component),
                fmt(r.se_mean_small_component),
                match run.agreement {
                    Agreement::Pass => "pass",
                    Agreement::Fail => "fail",
                    Agreement::NotApplicable => "n/a",
                }
            ),
        );
    }
    if let Some(ok) = cross_method {
        say(
            console,
            format_args!("percolation vs sir: {}", if ok { "pass" } else { "fail" }),
        );
    }
    say(console, format_args!("wrote {}", path.display()));
    Ok(SimulateReport {
        theory,
        runs,
        cross_method,
    })
}
