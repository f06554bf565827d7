//! Slot-based simulator over an explicit routing tree.
//!
//! Every node owns a reserved slot (idealized TDMA): no collisions, no
//! overhearing, no losses. Each slot every node draws one jointly Gaussian
//! measurement; its prediction is the true mean, so a node mispredicts with
//! probability exactly `1 - α` and the analytical model can be checked
//! against counted packets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlation::{mvn_box_probability, prob_no_transmission, CorrelationSpec, MvnOptions};
use crate::error::{domain, Error, Result};
use crate::normal;
use crate::prediction::{threshold_from_accuracy, DpsConfig};
use crate::traffic::{DisseminationMode, TrafficReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub ring: u32,
    /// `None` for first-ring nodes, whose parent is the gateway.
    pub parent: Option<usize>,
}

/// Integer realization of the ring model: `C` branches, ring `d` of each
/// branch holding `2d - 1` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeInstance {
    pub neighbors: u32,
    pub rings: u32,
    pub nodes: Vec<TreeNode>,
    children: Vec<Vec<usize>>,
    subtree: Vec<usize>,
}

impl TreeInstance {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Nodes in the sub-tree rooted at `node`, itself included.
    pub fn subtree_len(&self, node: usize) -> usize {
        self.subtree[node]
    }

    pub fn ring_nodes(&self, ring: u32) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(move |n| n.ring == ring).map(|n| n.id)
    }

    /// Node ids sorted from the outermost ring inwards, so children come
    /// before their parents.
    fn leaves_first(&self) -> impl Iterator<Item = &TreeNode> {
        // ids are assigned ring by ring
        self.nodes.iter().rev()
    }
}

/// Builds the tree ring by ring. Each new node picks a parent among the nodes
/// of the previous ring in its branch that still have fewer than their fair
/// share of children, preferring the one whose second-ring ancestor has the
/// smallest sub-tree so far, then the one with fewest children. Remaining
/// ties are broken by a seeded permutation.
pub fn build_tree(neighbors: u32, rings: u32, seed: u64) -> Result<TreeInstance> {
    if neighbors == 0 || rings == 0 {
        return domain(format!("tree needs C >= 1 and D >= 1, got C={neighbors}, D={rings}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = neighbors as usize;
    let mut nodes = Vec::new();
    // branch -> ring -> node ids
    let mut layout: Vec<Vec<Vec<usize>>> = vec![Vec::new(); c];
    let mut child_count: Vec<usize> = Vec::new();
    // second-ring ancestor of each node (itself for ring 2), if any
    let mut anchor: Vec<Option<usize>> = Vec::new();
    let mut anchor_size: HashMap<usize, usize> = HashMap::new();

    for ring in 1..=rings {
        let per_branch = 2 * ring as usize - 1;
        for rings_of_branch in layout.iter_mut() {
            let mut ids = Vec::with_capacity(per_branch);
            let mut order: Vec<usize> = rings_of_branch
                .last()
                .cloned()
                .unwrap_or_default();
            order.shuffle(&mut rng);
            let cap = per_branch.div_ceil(order.len().max(1));
            for _ in 0..per_branch {
                let id = nodes.len();
                let parent = if ring == 1 {
                    None
                } else {
                    let best = *order
                        .iter()
                        .min_by_key(|&&p| {
                            let size = anchor[p].map_or(0, |a| anchor_size[&a]);
                            (child_count[p] >= cap, size, child_count[p])
                        })
                        .expect("previous ring is non-empty");
                    Some(best)
                };
                let own_anchor = match (ring, parent) {
                    (2, _) => Some(id),
                    (_, Some(p)) => anchor[p],
                    _ => None,
                };
                if let Some(p) = parent {
                    child_count[p] += 1;
                }
                if let Some(a) = own_anchor {
                    *anchor_size.entry(a).or_insert(0) += 1;
                }
                nodes.push(TreeNode { id, ring, parent });
                child_count.push(0);
                anchor.push(own_anchor);
                ids.push(id);
            }
            rings_of_branch.push(ids);
        }
    }

    let n = nodes.len();
    let mut children = vec![Vec::new(); n];
    for node in &nodes {
        if let Some(p) = node.parent {
            children[p].push(node.id);
        }
    }
    let mut subtree = vec![1usize; n];
    for node in nodes.iter().rev() {
        if let Some(p) = node.parent {
            subtree[p] += subtree[node.id];
        }
    }
    Ok(TreeInstance {
        neighbors,
        rings,
        nodes,
        children,
        subtree,
    })
}

/// Dense jointly Gaussian measurements, one row per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTrace {
    pub f: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    values: Vec<f64>,
    slots: usize,
}

impl GaussianTrace {
    pub fn nodes(&self) -> usize {
        self.means.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn slot(&self, s: usize) -> &[f64] {
        let n = self.nodes();
        &self.values[s * n..(s + 1) * n]
    }

    /// Long-format readings, timestamps in seconds from zero.
    pub fn to_measurement_trace(&self) -> crate::validation::MeasurementTrace {
        let mut readings = Vec::with_capacity(self.values.len());
        for s in 0..self.slots {
            let t = s as f64 / self.f;
            for (node, &v) in self.slot(s).iter().enumerate() {
                readings.push(crate::validation::Reading {
                    timestamp: t,
                    node: node as u32,
                    value: v,
                });
            }
        }
        crate::validation::MeasurementTrace::new(readings, "synthetic-gaussian", "value")
    }
}

/// Draws `f * duration` slots of correlated Gaussian measurements.
///
/// Equicorrelated specs use the one-factor form `√ρ z₀ + √(1-ρ) zᵢ`; full
/// matrices use the symmetric square root of the (repaired, if needed)
/// correlation matrix.
pub fn generate_measurements(
    spec: &CorrelationSpec,
    means: &[f64],
    stds: &[f64],
    f: f64,
    duration: f64,
    seed: u64,
) -> Result<GaussianTrace> {
    let n = means.len();
    if stds.len() != n {
        return Err(Error::Dimension { expected: n, got: stds.len() });
    }
    if n == 0 {
        return domain("no nodes to generate measurements for");
    }
    if let Some(s) = stds.iter().find(|s| !(**s >= 0.0)) {
        return domain(format!("standard deviation must be >= 0, got {s}"));
    }
    if !(f > 0.0 && duration > 0.0) {
        return domain("measurement rate and duration must be > 0");
    }
    let slots = (f * duration + 1e-9).floor() as usize;
    if slots == 0 {
        return domain(format!("duration {duration}s at rate {f}/s holds no measurement"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(slots * n);
    match spec {
        CorrelationSpec::Rho(rho) => {
            if !(0.0..=1.0).contains(rho) {
                return domain(format!("equicorrelation for the generator must lie in [0, 1], got {rho}"));
            }
            let (common, own) = (rho.sqrt(), (1.0 - rho).sqrt());
            for _ in 0..slots {
                let z0: f64 = rng.sample(StandardNormal);
                for i in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    values.push(means[i] + stds[i] * (common * z0 + own * z));
                }
            }
        }
        CorrelationSpec::Matrix(m) => {
            if m.dim() != n {
                return Err(Error::Dimension { expected: n, got: m.dim() });
            }
            let m = if m.is_psd() {
                m.clone()
            } else {
                log::warn!("generator correlation matrix is not PSD; repairing");
                m.repaired()?
            };
            let root = symmetric_sqrt(m.as_matrix());
            let mut z = DVector::<f64>::zeros(n);
            for _ in 0..slots {
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let x = &root * &z;
                for i in 0..n {
                    values.push(means[i] + stds[i] * x[i]);
                }
            }
        }
    }
    Ok(GaussianTrace {
        f,
        means: means.to_vec(),
        stds: stds.to_vec(),
        values,
        slots,
    })
}

fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Every measurement is sent and forwarded unmodified.
    None,
    /// Only mispredicted measurements are sent, forwarded one by one.
    PredictionOnly,
    /// Every node merges its own and its children's data into one packet.
    AggregationOnly,
    /// One merged packet iff any prediction in the sub-tree failed.
    #[serde(rename = "prediction+aggregation", alias = "combined")]
    PredictionAggregation,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::None,
        Scheme::PredictionOnly,
        Scheme::AggregationOnly,
        Scheme::PredictionAggregation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::PredictionOnly => "prediction-only",
            Scheme::AggregationOnly => "aggregation-only",
            Scheme::PredictionAggregation => "prediction+aggregation",
        }
    }

    pub fn uses_prediction(&self) -> bool {
        matches!(self, Scheme::PredictionOnly | Scheme::PredictionAggregation)
    }

    pub fn aggregates(&self) -> bool {
        matches!(self, Scheme::AggregationOnly | Scheme::PredictionAggregation)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combined" => Ok(Scheme::PredictionAggregation),
            _ => Scheme::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
                Error::Config(format!(
                    "unknown scheme '{s}' (expected none, prediction-only, aggregation-only, prediction+aggregation)"
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounter {
    pub node: usize,
    pub ring: u32,
    pub tx: u64,
    pub rx: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scheme: Scheme,
    pub slots: u64,
    /// Completed prediction periods, each charged one dissemination round.
    pub periods: u64,
    pub seed: u64,
    /// Packets delivered to the gateway.
    pub gw_rx: u64,
    pub counters: Vec<NodeCounter>,
}

impl SimResult {
    /// Mean counters over the first-ring nodes.
    pub fn first_ring_mean(&self) -> TrafficReport {
        let first: Vec<_> = self.counters.iter().filter(|c| c.ring == 1).collect();
        let k = first.len() as f64;
        TrafficReport::new(
            first.iter().map(|c| c.tx as f64).sum::<f64>() / k,
            first.iter().map(|c| c.rx as f64).sum::<f64>() / k,
        )
    }
}

/// Per-node acceptance thresholds for a configuration.
pub fn thresholds(cfg: &DpsConfig, trace: &GaussianTrace) -> Result<Vec<f64>> {
    if let Some(eps) = cfg.epsilon {
        return Ok(vec![eps; trace.nodes()]);
    }
    (0..trace.nodes())
        .map(|i| {
            let alpha = cfg
                .accuracy
                .of(i as u32)
                .ok_or_else(|| Error::Config(format!("no accuracy configured for node {i}")))?;
            if alpha >= 1.0 {
                Ok(f64::INFINITY)
            } else {
                threshold_from_accuracy(alpha, trace.stds[i])
            }
        })
        .collect()
}

/// Per-node `(tx, rx)` for one slot.
pub fn simulate_slot(
    scheme: Scheme,
    tree: &TreeInstance,
    values: &[f64],
    means: &[f64],
    eps: &[f64],
    out: &mut [(u64, u64)],
) {
    let n = tree.len();
    debug_assert_eq!(values.len(), n);
    // packets originating in each sub-tree
    let mut pending = vec![0u64; n];
    for node in tree.leaves_first() {
        let i = node.id;
        let own = match scheme {
            Scheme::None | Scheme::AggregationOnly => 1,
            _ => u64::from((values[i] - means[i]).abs() > eps[i]),
        };
        // packets arriving from children; merged ones count once each
        let below = pending[i];
        let (tx, rx, up) = match scheme {
            Scheme::None | Scheme::PredictionOnly => (own + below, below, own + below),
            Scheme::AggregationOnly => (1, tree.children(i).len() as u64, 1),
            Scheme::PredictionAggregation => {
                let rx = below;
                let send = u64::from(own + rx > 0);
                (send, rx, send)
            }
        };
        out[i] = (tx, rx);
        if let Some(p) = node.parent {
            pending[p] += up;
        }
    }
}

/// Dissemination `(tx, rx)` per node for one period, on the realized tree.
pub fn dissemination_on_tree(mode: DisseminationMode, tree: &TreeInstance, node: usize) -> (u64, u64) {
    let m = tree.subtree_len(node) as u64;
    let kids = tree.children(node).len() as u64;
    match mode {
        DisseminationMode::Independent => (0, 0),
        DisseminationMode::GwUnicast => (m - 1, m),
        DisseminationMode::SensorChosen => (m, m - 1),
        DisseminationMode::GwUnicastAggregated => (kids, 1),
        DisseminationMode::GwBroadcast => (0, 1),
    }
}

/// Runs one scheme over the whole trace.
pub fn run(scheme: Scheme, tree: &TreeInstance, trace: &GaussianTrace, cfg: &DpsConfig, seed: u64) -> Result<SimResult> {
    if trace.nodes() != tree.len() {
        return Err(Error::Dimension {
            expected: tree.len(),
            got: trace.nodes(),
        });
    }
    cfg.validate()?;
    let eps = thresholds(cfg, trace)?;
    let n = tree.len();
    let mut totals = vec![(0u64, 0u64); n];
    let mut slot = vec![(0u64, 0u64); n];
    let mut gw_rx = 0u64;
    for s in 0..trace.slots() {
        simulate_slot(scheme, tree, trace.slot(s), &trace.means, &eps, &mut slot);
        for (t, x) in totals.iter_mut().zip(&slot) {
            t.0 += x.0;
            t.1 += x.1;
        }
        gw_rx += tree.ring_nodes(1).map(|i| slot[i].0).sum::<u64>();
    }
    let slots_per_period = cfg.slots().round().max(1.0) as u64;
    let periods = if scheme.uses_prediction() {
        trace.slots() as u64 / slots_per_period
    } else {
        0
    };
    let counters = tree
        .nodes
        .iter()
        .map(|node| {
            let (dtx, drx) = dissemination_on_tree(cfg.mode, tree, node.id);
            NodeCounter {
                node: node.id,
                ring: node.ring,
                tx: totals[node.id].0 + periods * dtx,
                rx: totals[node.id].1 + periods * drx,
            }
        })
        .collect();
    Ok(SimResult {
        scheme,
        slots: trace.slots() as u64,
        periods,
        seed,
        gw_rx,
        counters,
    })
}

/// Expected per-slot traffic of one node and the standard deviation of its
/// per-slot counts, from the multivariate-normal model applied to the
/// realized tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    pub node: usize,
    pub ring: u32,
    pub per_slot: TrafficReport,
    pub per_slot_sd: TrafficReport,
    /// Monte Carlo error of `per_slot`.
    pub model_stderr: TrafficReport,
    pub per_period: TrafficReport,
}

/// Memoized no-transmission probabilities for equicorrelated groups.
struct GroupProb {
    alpha: f64,
    rho: f64,
    opts: MvnOptions,
    cache: HashMap<usize, (f64, f64)>,
}

impl GroupProb {
    fn get(&mut self, n: usize) -> Result<(f64, f64)> {
        if let Some(v) = self.cache.get(&n) {
            return Ok(*v);
        }
        let est = prob_no_transmission(n, self.alpha, self.rho, self.opts)?;
        self.cache.insert(n, (est.p, est.stderr));
        Ok((est.p, est.stderr))
    }

    /// Probability that two given nodes both mispredict.
    fn both_miss(&self) -> Result<f64> {
        let p = 1.0 - self.alpha;
        if self.alpha == 0.0 || self.alpha == 1.0 || self.rho == 0.0 {
            return Ok(p * p);
        }
        let q = normal::quantile((1.0 - self.alpha) / 2.0).abs();
        let sigma = crate::correlation::build_equicorrelation_matrix(2, self.rho)?;
        let both_in = mvn_box_probability(&sigma, &[-q, -q], &[q, q], self.opts.samples, self.opts.seed)?.p;
        // P(A^c ∩ B^c) = 1 - P(A) - P(B) + P(A ∩ B)
        Ok((1.0 - 2.0 * self.alpha + both_in).max(0.0))
    }
}

/// Model expectations for every node of `tree` under `scheme`, with uniform
/// accuracy `alpha` and equicorrelation `rho` across all nodes.
pub fn analytical_expectations(
    scheme: Scheme,
    tree: &TreeInstance,
    alpha: f64,
    rho: f64,
    mode: DisseminationMode,
    opts: MvnOptions,
) -> Result<Vec<NodeModel>> {
    let mut probs = GroupProb {
        alpha,
        rho,
        opts,
        cache: HashMap::new(),
    };
    let miss = 1.0 - alpha;
    let pair_miss = if scheme == Scheme::PredictionOnly { probs.both_miss()? } else { 0.0 };
    // variance of the number of misses among m nodes
    let count_var = |m: f64| m * miss * alpha + m * (m - 1.0) * (pair_miss - miss * miss);

    tree.nodes
        .iter()
        .map(|node| {
            let i = node.id;
            let m = tree.subtree_len(i);
            let kids = tree.children(i);
            let zero = TrafficReport::default();
            let (per_slot, sd, err) = match scheme {
                Scheme::None => (TrafficReport::new(m as f64, (m - 1) as f64), zero, zero),
                Scheme::AggregationOnly => (TrafficReport::new(1.0, kids.len() as f64), zero, zero),
                Scheme::PredictionOnly => {
                    let m = m as f64;
                    (
                        TrafficReport::new(m * miss, (m - 1.0) * miss),
                        TrafficReport::new(count_var(m).max(0.0).sqrt(), count_var(m - 1.0).max(0.0).sqrt()),
                        zero,
                    )
                }
                Scheme::PredictionAggregation => {
                    let (p_node, e_node) = probs.get(m)?;
                    let mut rx = 0.0;
                    let mut rx_err = 0.0;
                    let mut rx_var = 0.0;
                    let child_p: Vec<(usize, f64)> = kids
                        .iter()
                        .map(|&c| probs.get(tree.subtree_len(c)).map(|(p, e)| {
                            rx += 1.0 - p;
                            rx_err += e;
                            rx_var += p * (1.0 - p);
                            (tree.subtree_len(c), p)
                        }))
                        .collect::<Result<_>>()?;
                    for (a, &(ma, pa)) in child_p.iter().enumerate() {
                        for &(mb, pb) in &child_p[a + 1..] {
                            let (p_joint, _) = probs.get(ma + mb)?;
                            rx_var += 2.0 * (p_joint - pa * pb);
                        }
                    }
                    (
                        TrafficReport::new(1.0 - p_node, rx),
                        TrafficReport::new((p_node * (1.0 - p_node)).max(0.0).sqrt(), rx_var.max(0.0).sqrt()),
                        TrafficReport::new(e_node, rx_err),
                    )
                }
            };
            let (dtx, drx) = if scheme.uses_prediction() {
                dissemination_on_tree(mode, tree, i)
            } else {
                (0, 0)
            };
            Ok(NodeModel {
                node: i,
                ring: node.ring,
                per_slot,
                per_slot_sd: sd,
                model_stderr: err,
                per_period: TrafficReport::new(dtx as f64, drx as f64),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub simulated: f64,
    pub expected: f64,
    /// Half-width of the acceptance interval (3σ plus model error).
    pub tolerance: f64,
}

impl Deviation {
    fn new(simulated: f64, expected: f64, sd: f64, slots: f64, model_err: f64) -> Self {
        let tolerance = 3.0 * sd * slots.sqrt() + 3.0 * model_err * slots + 1e-9 * expected.abs().max(1.0);
        Self {
            simulated,
            expected,
            tolerance,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.expected == 0.0 {
            if self.simulated == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.simulated - self.expected) / self.expected
        }
    }

    pub fn within(&self) -> bool {
        (self.simulated - self.expected).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeComparison {
    pub node: usize,
    pub ring: u32,
    pub tx: Deviation,
    pub rx: Deviation,
}

impl NodeComparison {
    pub fn flagged(&self) -> bool {
        !(self.tx.within() && self.rx.within())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub scheme: Scheme,
    pub nodes: Vec<NodeComparison>,
    /// First-ring mean counters against the first-ring mean expectation.
    pub first_ring: NodeComparison,
}

impl ModelComparison {
    pub fn flagged(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.flagged()).map(|n| n.node).collect()
    }
}

/// Compares simulated counters with model expectations scaled to the run
/// length. Nodes outside a 3σ interval (σ from the per-slot count variance
/// over `slots` independent slots) are flagged.
pub fn compare_with_model(result: &SimResult, model: &[NodeModel]) -> Result<ModelComparison> {
    if model.len() != result.counters.len() {
        return Err(Error::Dimension {
            expected: result.counters.len(),
            got: model.len(),
        });
    }
    let slots = result.slots as f64;
    let periods = result.periods as f64;
    let compare = |sim: (f64, f64), m: &NodeModel| {
        let exp = m.per_slot * slots + m.per_period * periods;
        (
            Deviation::new(sim.0, exp.tx, m.per_slot_sd.tx, slots, m.model_stderr.tx),
            Deviation::new(sim.1, exp.rx, m.per_slot_sd.rx, slots, m.model_stderr.rx),
        )
    };
    let nodes: Vec<NodeComparison> = result
        .counters
        .iter()
        .zip(model)
        .map(|(c, m)| {
            let (tx, rx) = compare((c.tx as f64, c.rx as f64), m);
            NodeComparison {
                node: c.node,
                ring: c.ring,
                tx,
                rx,
            }
        })
        .collect();

    // Var(mean) <= max Var(node) for any correlation between first-ring nodes.
    let first: Vec<&NodeModel> = model.iter().filter(|m| m.ring == 1).collect();
    let k = first.len() as f64;
    let mean_of = |f: &dyn Fn(&NodeModel) -> TrafficReport| {
        first.iter().fold(TrafficReport::default(), |acc, m| acc + f(m)) * (1.0 / k)
    };
    let max_sd = first.iter().fold(TrafficReport::default(), |acc, m| {
        TrafficReport::new(acc.tx.max(m.per_slot_sd.tx), acc.rx.max(m.per_slot_sd.rx))
    });
    let pooled = NodeModel {
        node: usize::MAX,
        ring: 1,
        per_slot: mean_of(&|m| m.per_slot),
        per_slot_sd: max_sd,
        model_stderr: mean_of(&|m| m.model_stderr),
        per_period: mean_of(&|m| m.per_period),
    };
    let sim_mean = result.first_ring_mean();
    let (tx, rx) = compare((sim_mean.tx, sim_mean.rx), &pooled);
    Ok(ModelComparison {
        scheme: result.scheme,
        nodes,
        first_ring: NodeComparison {
            node: usize::MAX,
            ring: 1,
            tx,
            rx,
        },
    })
}
