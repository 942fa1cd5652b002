//! Monte Carlo ground truth on configuration-model networks.
//!
//! Two trial kinds share one traversal: directed bond percolation, where
//! the link `u → v` is open with probability `T_type(u)`, and the
//! continuous-time SIR process, simulated exactly for its final size by
//! racing each link's exponential transmission clock against the
//! spreader's exponential recovery clock.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{invalid, Result};
use crate::percolation::{transmissibility, IncentivePolicy, PercolationParams};
use crate::scalar::{CompensatedSum, Scalar};

/// Default outbreak cutoff as a fraction of the network size.
pub const DEFAULT_THETA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NodeType {
    /// Type 1.
    Ordinary,
    /// Type 2.
    Incentivized,
}

impl NodeType {
    pub fn index(self) -> usize {
        match self {
            NodeType::Ordinary => 0,
            NodeType::Incentivized => 1,
        }
    }

    /// `1` or `2`.
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// Undirected multigraph in adjacency-array form. Self-loops and parallel
/// edges are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    node_type: Vec<NodeType>,
}

impl Network {
    /// Builds from an explicit edge list; `node_type.len()` is the node count.
    pub fn from_edges(node_type: Vec<NodeType>, edges: Vec<(u32, u32)>) -> Result<Self> {
        let n = node_type.len();
        if n > u32::MAX as usize {
            return Err(invalid("network too large for 32-bit node ids"));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u as usize >= n || v as usize >= n) {
            return Err(invalid(format!("edge ({u}, {v}) references a node beyond {n}")));
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0u32; offsets[n]];
        for &(u, v) in &edges {
            adjacency[fill[u as usize]] = v;
            fill[u as usize] += 1;
            adjacency[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Ok(Self {
            edges,
            offsets,
            adjacency,
            node_type,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_type.len()
    }

    /// Edge count, parallel edges and self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbour stubs of `v`; a self-loop lists `v` twice.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn node_type(&self, v: usize) -> NodeType {
        self.node_type[v]
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_type
    }

    /// Writes `u,v` rows, one per edge.
    pub fn write_edge_list<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["u", "v"])?;
        for &(u, v) in &self.edges {
            w.write_record([u.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `node,degree,type` rows with type `1` or `2`.
    pub fn write_node_types<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "degree", "type"])?;
        for v in 0..self.node_count() {
            w.write_record([
                v.to_string(),
                self.degree(v).to_string(),
                self.node_type[v].label().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Configuration-model network: degrees drawn from `dist`, stubs matched
/// uniformly at random, and each degree-`k` node made type 2 with
/// probability `φ(k)`.
pub fn build_network<S: Scalar>(
    dist: &DegreeDistribution<S>,
    policy: &IncentivePolicy<S>,
    n: usize,
    seed: u64,
) -> Result<Network> {
    if n < 2 {
        return Err(invalid("a network needs at least two nodes"));
    }
    policy.check_support(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = dist.sample_degree_sequence_with(n, &mut rng);
    let node_type: Vec<NodeType> = degrees
        .iter()
        .map(|&k| {
            if rng.random::<f64>() < policy.get(k).as_f64() {
                NodeType::Incentivized
            } else {
                NodeType::Ordinary
            }
        })
        .collect();
    let mut stubs: Vec<u32> = Vec::with_capacity(degrees.iter().sum());
    for (v, &k) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, k));
    }
    stubs.shuffle(&mut rng);
    let edges = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    Network::from_edges(node_type, edges)
}

/// Per-type spreading and recovery rates of the SIR process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirRates {
    pub beta1: f64,
    pub mu1: f64,
    pub beta2: f64,
    pub mu2: f64,
}

impl SirRates {
    pub fn new(beta1: f64, mu1: f64, beta2: f64, mu2: f64) -> Result<Self> {
        transmissibility(beta1, mu1)?;
        transmissibility(beta2, mu2)?;
        Ok(Self {
            beta1,
            mu1,
            beta2,
            mu2,
        })
    }

    /// Transmissibilities `β_i / (β_i + μ_i)` the process maps onto.
    pub fn transmissibilities(&self) -> PercolationParams<f64> {
        PercolationParams::from_rates(self.beta1, self.mu1, self.beta2, self.mu2)
            .expect("validated rates")
    }

    fn of(&self, t: NodeType) -> (f64, f64) {
        match t {
            NodeType::Ordinary => (self.beta1, self.mu1),
            NodeType::Incentivized => (self.beta2, self.mu2),
        }
    }
}

/// What spreads and how.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Process {
    Percolation(PercolationParams<f64>),
    Sir(SirRates),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    /// Informed nodes, seed included.
    pub reached: usize,
    /// Informed nodes by type (type 1, type 2).
    pub reached_by_type: [usize; 2],
}

impl TrialOutcome {
    /// `reached ≥ θ n`.
    pub fn is_outbreak(&self, theta: f64, n: usize) -> bool {
        self.reached as f64 >= theta * n as f64
    }
}

/// Reusable traversal buffers.
#[derive(Debug, Default)]
pub struct TrialScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl TrialScratch {
    fn reset(&mut self, n: usize) {
        if self.stamp.len() != n || self.epoch == u32::MAX {
            self.stamp = vec![0; n];
            self.epoch = 0;
        }
        self.epoch += 1;
        self.queue.clear();
    }
}

fn exp_time<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate > 0.0 {
        let e: f64 = Exp1.sample(rng);
        e / rate
    } else {
        f64::INFINITY
    }
}

/// Spread from `source`. Each informed node `u` draws once for every
/// incident link; the per-node state returned by `begin` lets the SIR
/// race share one recovery time across a node's links.
fn spread<R, B, T>(
    net: &Network,
    source: usize,
    rng: &mut R,
    scratch: &mut TrialScratch,
    mut begin: B,
    mut transmits: T,
) -> TrialOutcome
where
    R: Rng + ?Sized,
    B: FnMut(NodeType, &mut R) -> f64,
    T: FnMut(NodeType, f64, &mut R) -> bool,
{
    scratch.reset(net.node_count());
    let epoch = scratch.epoch;
    let mut by_type = [0usize; 2];
    scratch.stamp[source] = epoch;
    scratch.queue.push(source as u32);
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head] as usize;
        head += 1;
        let ty = net.node_type(u);
        by_type[ty.index()] += 1;
        let state = begin(ty, rng);
        for &v in net.neighbors(u) {
            let v = v as usize;
            if v == u {
                continue;
            }
            if transmits(ty, state, rng) && scratch.stamp[v] != epoch {
                scratch.stamp[v] = epoch;
                scratch.queue.push(v as u32);
            }
        }
    }
    TrialOutcome {
        reached: scratch.queue.len(),
        reached_by_type: by_type,
    }
}

/// Directed bond percolation from `source`.
pub fn percolation_trial_from<R: Rng + ?Sized>(
    net: &Network,
    params: &PercolationParams<f64>,
    source: usize,
    rng: &mut R,
    scratch: &mut TrialScratch,
) -> TrialOutcome {
    let t = [params.t1, params.t2];
    spread(
        net,
        source,
        rng,
        scratch,
        |_, _| 0.0,
        |ty, _, rng| rng.random::<f64>() < t[ty.index()],
    )
}

/// SIR final size from `source`.
pub fn sir_trial_from<R: Rng + ?Sized>(
    net: &Network,
    rates: &SirRates,
    source: usize,
    rng: &mut R,
    scratch: &mut TrialScratch,
) -> TrialOutcome {
    spread(
        net,
        source,
        rng,
        scratch,
        |ty, rng| exp_time(rates.of(ty).1, rng),
        |ty, recovery, rng| exp_time(rates.of(ty).0, rng) < recovery,
    )
}

fn run_trial<R: Rng + ?Sized>(net: &Network, process: &Process, rng: &mut R, scratch: &mut TrialScratch) -> TrialOutcome {
    let source = rng.random_range(0..net.node_count());
    match process {
        Process::Percolation(params) => percolation_trial_from(net, params, source, rng, scratch),
        Process::Sir(rates) => sir_trial_from(net, rates, source, rng, scratch),
    }
}

/// One percolation trial from a uniformly random seed node.
pub fn percolation_trial(net: &Network, params: &PercolationParams<f64>, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_trial(net, &Process::Percolation(*params), &mut rng, &mut TrialScratch::default())
}

/// One SIR trial from a uniformly random seed node.
pub fn sir_trial(net: &Network, rates: &SirRates, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_trial(net, &Process::Sir(*rates), &mut rng, &mut TrialScratch::default())
}

/// Generator for trial `index` of a campaign: a pure function of
/// `(master_seed, index)`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Generator used to build the campaign network from `master_seed`.
pub fn network_seed(master_seed: u64) -> u64 {
    trial_rng(master_seed, u64::MAX).random()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub nodes: usize,
    pub theta: f64,
    pub outbreaks: usize,
    pub outbreak_fraction: f64,
    pub se_outbreak_fraction: f64,
    /// Mean of `reached / n` over outbreak trials.
    pub mean_outbreak_size: Option<f64>,
    pub se_mean_outbreak_size: Option<f64>,
    /// Mean `reached` (in nodes) over non-outbreak trials.
    pub mean_small_component: Option<f64>,
    pub se_mean_small_component: Option<f64>,
}

fn mean_and_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let len = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum<f64>>().value() / len;
    if xs.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let ss = xs
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<CompensatedSum<f64>>()
        .value();
    let var = ss / (len - 1.0);
    (Some(mean), Some((var / len).sqrt()))
}

/// Aggregates per-trial outcomes in trial order.
pub fn summarize(outcomes: &[TrialOutcome], nodes: usize, theta: f64) -> SimulationReport {
    let mut large = Vec::new();
    let mut small = Vec::new();
    for o in outcomes {
        if o.is_outbreak(theta, nodes) {
            large.push(o.reached as f64 / nodes as f64);
        } else {
            small.push(o.reached as f64);
        }
    }
    let trials = outcomes.len();
    let frac = large.len() as f64 / trials as f64;
    let (mean_outbreak_size, se_mean_outbreak_size) = mean_and_se(&large);
    let (mean_small_component, se_mean_small_component) = mean_and_se(&small);
    SimulationReport {
        trials,
        nodes,
        theta,
        outbreaks: large.len(),
        outbreak_fraction: frac,
        se_outbreak_fraction: (frac * (1.0 - frac) / trials as f64).sqrt(),
        mean_outbreak_size,
        se_mean_outbreak_size,
        mean_small_component,
        se_mean_small_component,
    }
}

/// Runs `trials` independent trials on `net` (in parallel) and aggregates
/// them. The report depends only on the arguments, not on scheduling.
pub fn run_campaign(
    net: &Network,
    process: &Process,
    trials: usize,
    theta: f64,
    master_seed: u64,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(invalid("a campaign needs at least one trial"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("outbreak cutoff θ = {theta} is outside (0, 1)")));
    }
    if let Process::Percolation(p) = process {
        PercolationParams::new(p.t1, p.t2)?;
    }
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map_init(TrialScratch::default, |scratch, i| {
            let mut rng = trial_rng(master_seed, i);
            run_trial(net, process, &mut rng, scratch)
        })
        .collect();
    Ok(summarize(&outcomes, net.node_count(), theta))
}
