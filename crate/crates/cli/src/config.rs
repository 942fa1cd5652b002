//! JSON run configuration.
//!
//! ```json
//! {
//!   "degree_distribution": { "kind": "power_law", "alpha": 2.5, "k_min": 1, "k_max": 100 },
//!   "percolation": { "t1": 0.35, "t2": 0.6 },
//!   "policy": { "kind": "constant", "value": 0.2 },
//!   "optimization": { "mode": "cost_min", "gamma": 0.2, "budget_b": 0.7, "cost": { "kind": "linear" } },
//!   "simulation": { "n": 100000, "trials": 200, "theta": 0.01, "master_seed": 1, "method": "percolation" },
//!   "sweep": { "variable": "T1", "start": 0.30, "stop": 0.47, "steps": 18 }
//! }
//! ```
//!
//! Only the blocks a command needs have to be present. Relative paths are
//! resolved against the directory of the config file.

use std::fs::File;
use std::path::{Path, PathBuf};

use outreach_core::optimizer::OptimizationMode;
use outreach_core::simulator::DEFAULT_THETA;
use outreach_core::{
    CostModel, DegreeDistribution, IncentivePolicy, OptimizationSpec, PercolationParams, SirRates,
};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_K_MAX: usize = 100;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub degree_distribution: Option<DistributionConfig>,
    pub percolation: Option<PercolationConfig>,
    pub policy: Option<PolicyConfig>,
    pub optimization: Option<OptimizationConfig>,
    pub simulation: Option<SimulationConfig>,
    pub sweep: Option<SweepConfig>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    PowerLaw {
        alpha: f64,
        #[serde(default = "one")]
        k_min: usize,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    Poisson {
        lambda: f64,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    Regular {
        degree: usize,
    },
    /// Nonnegative weights (counts or probabilities) for k = 0, 1, ...
    Empirical {
        weights: Vec<f64>,
    },
    /// `k,prob` CSV.
    Csv {
        path: PathBuf,
    },
}

fn one() -> usize {
    1
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

/// Either `t1`/`t2` or all four rates.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolationConfig {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub beta1: Option<f64>,
    pub mu1: Option<f64>,
    pub beta2: Option<f64>,
    pub mu2: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    Constant { value: f64 },
    /// φ(k) for k = 0..=k_max.
    Table { phi: Vec<f64> },
    /// `k,phi` CSV; unlisted classes get 0.
    Csv { path: PathBuf },
    /// Solve the `optimization` block and use its φ.
    FromOptimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CostMin,
    SizeMax,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationConfig {
    pub mode: Mode,
    pub gamma: Option<f64>,
    pub budget_c: Option<f64>,
    pub budget_b: f64,
    #[serde(default)]
    pub cost: CostConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostConfig {
    /// `c(k) = k`
    #[default]
    Linear,
    /// `c(k) = k²`
    Quadratic,
    Constant { value: f64 },
    Table { cost: Vec<f64> },
    /// `k,cost` CSV covering every class.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Percolation,
    Sir,
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub method: Method,
    /// Also write `edges.csv` and `nodes.csv`.
    #[serde(default)]
    pub export_network: bool,
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepVariable {
    T1,
    C,
    #[serde(rename = "gamma")]
    Gamma,
    B,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::T1 => "T1",
            Self::C => "C",
            Self::Gamma => "gamma",
            Self::B => "B",
        }
    }
}

/// Grid given either as `values` or as `start`, `stop`, `steps`
/// (inclusive, evenly spaced).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            _ => {
                return Err(CliError::config(
                    "sweep: give either `values` or all of `start`, `stop`, `steps`",
                ))
            }
        };
        if grid.is_empty() {
            return Err(CliError::config("sweep: grid is empty"));
        }
        if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
            return Err(CliError::config(format!("sweep: grid value {x} is not finite")));
        }
        Ok(grid)
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses a config document; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    fn open(&self, field: &str, path: &Path) -> Result<File, CliError> {
        let full = self.resolve(path);
        File::open(&full).map_err(|e| CliError::config(format!("{field}.path: cannot open {}: {e}", full.display())))
    }

    pub fn distribution(&self) -> Result<DegreeDistribution, CliError> {
        let block = self
            .degree_distribution
            .as_ref()
            .ok_or_else(|| CliError::config("missing block `degree_distribution`"))?;
        let field = "degree_distribution";
        let wrap = |e| CliError::from_core(field, e);
        let dist = match block {
            DistributionConfig::PowerLaw { alpha, k_min, k_max } => {
                DegreeDistribution::power_law(*alpha, *k_min, *k_max).map_err(wrap)?
            }
            DistributionConfig::Poisson { lambda, k_max } => {
                DegreeDistribution::poisson(*lambda, *k_max).map_err(wrap)?
            }
            DistributionConfig::Regular { degree } => DegreeDistribution::regular(*degree).map_err(wrap)?,
            DistributionConfig::Empirical { weights } => {
                DegreeDistribution::from_weights(weights.clone()).map_err(wrap)?
            }
            DistributionConfig::Csv { path } => {
                DegreeDistribution::from_csv(self.open(field, path)?).map_err(wrap)?
            }
        };
        if dist.mean() <= 0.0 {
            return Err(CliError::config(format!("{field}: mean degree is zero")));
        }
        Ok(dist)
    }

    pub fn params(&self) -> Result<PercolationParams, CliError> {
        let p = self
            .percolation
            .as_ref()
            .ok_or_else(|| CliError::config("missing block `percolation`"))?;
        let wrap = |e| CliError::from_core("percolation", e);
        match (p.t1, p.t2, p.beta1, p.mu1, p.beta2, p.mu2) {
            (Some(t1), Some(t2), None, None, None, None) => {
                check_unit("percolation.t1", t1)?;
                check_unit("percolation.t2", t2)?;
                PercolationParams::new(t1, t2).map_err(wrap)
            }
            (None, None, Some(b1), Some(m1), Some(b2), Some(m2)) => {
                PercolationParams::from_rates(b1, m1, b2, m2).map_err(wrap)
            }
            _ => Err(CliError::config(
                "percolation: give either `t1` and `t2`, or all of `beta1`, `mu1`, `beta2`, `mu2`",
            )),
        }
    }

    /// SIR rates; with only `t1`/`t2` given, `β_i = T_i`, `μ_i = 1 − T_i`
    /// (any rates with the same ratio give the same final size).
    pub fn rates(&self) -> Result<SirRates, CliError> {
        let p = self
            .percolation
            .as_ref()
            .ok_or_else(|| CliError::config("missing block `percolation`"))?;
        let wrap = |e| CliError::from_core("percolation", e);
        match (p.beta1, p.mu1, p.beta2, p.mu2) {
            (Some(b1), Some(m1), Some(b2), Some(m2)) => SirRates::new(b1, m1, b2, m2).map_err(wrap),
            _ => {
                let t = self.params()?;
                SirRates::new(t.t1, 1.0 - t.t1, t.t2, 1.0 - t.t2).map_err(wrap)
            }
        }
    }

    pub fn cost(&self, classes: usize) -> Result<CostModel, CliError> {
        let o = self.optimization_block()?;
        let field = "optimization.cost";
        let wrap = |e| CliError::from_core(field, e);
        match &o.cost {
            CostConfig::Linear => Ok(CostModel::linear(classes)),
            CostConfig::Quadratic => Ok(CostModel::quadratic(classes)),
            CostConfig::Constant { value } => CostModel::constant(*value, classes).map_err(wrap),
            CostConfig::Table { cost } => {
                if cost.len() != classes {
                    return Err(CliError::config(format!(
                        "{field}.cost: {} entries given, the distribution has {classes} classes",
                        cost.len()
                    )));
                }
                CostModel::table(cost.clone()).map_err(wrap)
            }
            CostConfig::Csv { path } => CostModel::from_csv(self.open(field, path)?, classes).map_err(wrap),
        }
    }

    fn optimization_block(&self) -> Result<&OptimizationConfig, CliError> {
        self.optimization
            .as_ref()
            .ok_or_else(|| CliError::config("missing block `optimization`"))
    }

    pub fn optimization_spec(&self) -> Result<OptimizationSpec, CliError> {
        let o = self.optimization_block()?;
        let dist = self.distribution()?;
        let params = self.params()?;
        check_unit("optimization.budget_b", o.budget_b)?;
        let mode = match (o.mode, o.gamma, o.budget_c) {
            (Mode::CostMin, Some(gamma), None) => {
                check_unit("optimization.gamma", gamma)?;
                OptimizationMode::CostMin { gamma }
            }
            (Mode::SizeMax, None, Some(budget_c)) => {
                if !(budget_c >= 0.0 && budget_c.is_finite()) {
                    return Err(CliError::config(format!(
                        "optimization.budget_c: must be finite and ≥ 0 (got {budget_c})"
                    )));
                }
                OptimizationMode::SizeMax { budget_c }
            }
            (Mode::CostMin, _, _) => {
                return Err(CliError::config("optimization: mode cost_min needs `gamma` and no `budget_c`"))
            }
            (Mode::SizeMax, _, _) => {
                return Err(CliError::config("optimization: mode size_max needs `budget_c` and no `gamma`"))
            }
        };
        Ok(OptimizationSpec {
            mode,
            budget_b: o.budget_b,
            cost: self.cost(dist.len())?,
            dist,
            params,
        })
    }

    /// The policy block, with `from_optimizer` resolved by solving the LP.
    pub fn policy(&self, dist: &DegreeDistribution) -> Result<IncentivePolicy, CliError> {
        let block = self.policy.as_ref().ok_or_else(|| CliError::config("missing block `policy`"))?;
        let field = "policy";
        let wrap = |e| CliError::from_core(field, e);
        let len = dist.len();
        match block {
            PolicyConfig::Constant { value } => {
                check_unit("policy.value", *value)?;
                IncentivePolicy::constant(*value, len).map_err(wrap)
            }
            PolicyConfig::Table { phi } => {
                if phi.len() != len {
                    return Err(CliError::config(format!(
                        "policy.phi: {} entries given, the distribution has {len} classes",
                        phi.len()
                    )));
                }
                IncentivePolicy::new(phi.clone()).map_err(wrap)
            }
            PolicyConfig::Csv { path } => {
                #[derive(Deserialize)]
                struct Row {
                    k: usize,
                    phi: f64,
                }
                let mut rdr = csv::ReaderBuilder::new()
                    .trim(csv::Trim::All)
                    .from_reader(self.open(field, path)?);
                let mut phi = vec![0.0; len];
                for row in rdr.deserialize() {
                    let row: Row = row.map_err(|e| CliError::config(format!("policy.path: {e}")))?;
                    if row.k >= len {
                        return Err(CliError::config(format!(
                            "policy.path: k = {} is beyond k_max = {}",
                            row.k,
                            len - 1
                        )));
                    }
                    phi[row.k] = row.phi;
                }
                IncentivePolicy::new(phi).map_err(wrap)
            }
            PolicyConfig::FromOptimizer => {
                let spec = self.optimization_spec()?;
                spec.solve()
                    .map(|r| r.phi)
                    .map_err(|e| CliError::from_core("optimization", e))
            }
        }
    }

    pub fn simulation(&self, seed_override: Option<u64>) -> Result<SimulationConfig, CliError> {
        let mut s = self
            .simulation
            .clone()
            .ok_or_else(|| CliError::config("missing block `simulation`"))?;
        if s.n < 2 {
            return Err(CliError::config(format!("simulation.n: need at least 2 nodes (got {})", s.n)));
        }
        if u32::try_from(s.n).is_err() {
            return Err(CliError::config(format!("simulation.n: {} nodes is too many", s.n)));
        }
        if s.trials < 1 {
            return Err(CliError::config("simulation.trials: need at least one trial"));
        }
        if !(s.theta > 0.0 && s.theta < 1.0) {
            return Err(CliError::config(format!("simulation.theta: must lie in (0, 1) (got {})", s.theta)));
        }
        if let Some(seed) = seed_override {
            s.master_seed = seed;
        }
        Ok(s)
    }

    pub fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.sweep.as_ref().ok_or_else(|| CliError::config("missing block `sweep`"))
    }
}

fn check_unit(field: &str, x: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(CliError::config(format!("{field}: must lie in [0, 1] (got {x})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn power_law_defaults() {
        let c = parse(r#"{"degree_distribution": {"kind": "power_law", "alpha": 2.5}}"#);
        assert_eq!(c.distribution().unwrap().k_max(), 100);
    }

    #[test]
    fn unknown_field_reports_position() {
        let err = RunConfig::from_json("{\n  \"percolation\": {\"t1\": 0.1, \"t3\": 0.2}\n}").unwrap_err();
        assert_eq!(err.line(), 2);
        assert!(err.to_string().contains("t3"));
    }

    #[test]
    fn validation_names_the_field() {
        let c = parse(r#"{"percolation": {"t1": 1.5, "t2": 0.2}}"#);
        let msg = c.params().unwrap_err().to_string();
        assert!(msg.contains("percolation.t1"), "{msg}");
        let c = parse(r#"{"percolation": {"t1": 0.5}}"#);
        assert_eq!(c.params().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn rates_are_mapped() {
        let c = parse(r#"{"percolation": {"beta1": 3, "mu1": 1, "beta2": 1, "mu2": 1}}"#);
        let p = c.params().unwrap();
        assert_eq!((p.t1, p.t2), (0.75, 0.5));
        let c = parse(r#"{"percolation": {"t1": 0.25, "t2": 1.0}}"#);
        assert_eq!(c.rates().unwrap().transmissibilities(), PercolationParams::new(0.25, 1.0).unwrap());
    }

    #[test]
    fn sweep_grids() {
        let s: SweepConfig = serde_json::from_str(r#"{"variable": "T1", "start": 0.3, "stop": 0.5, "steps": 3}"#).unwrap();
        let g = s.grid().unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.4).abs() < 1e-15);
        let s: SweepConfig = serde_json::from_str(r#"{"variable": "gamma", "values": [0.1]}"#).unwrap();
        assert_eq!(s.grid().unwrap(), vec![0.1]);
        let s: SweepConfig = serde_json::from_str(r#"{"variable": "B", "values": [0.1], "steps": 2}"#).unwrap();
        assert!(s.grid().is_err());
    }

    #[test]
    fn mode_fields_are_exclusive() {
        let c = parse(
            r#"{"degree_distribution": {"kind": "regular", "degree": 3},
                "percolation": {"t1": 0.1, "t2": 0.6},
                "optimization": {"mode": "size_max", "gamma": 0.2, "budget_b": 1}}"#,
        );
        assert!(c.optimization_spec().unwrap_err().to_string().contains("budget_c"));
    }
}
