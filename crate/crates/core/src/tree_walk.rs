//! The Markov chain on the sample tree.
//!
//! Vertices of the sample tree are partial runs of the pinning loop, keyed by
//! the random transcript of each step. Plain pinning reaches a leaf `v` with
//! its natural probability `ω(v)`; the Gibbs state needs leaves weighted by
//! `κ(v) = tr σ(v) · ω(v)`. The walk below moves to a fresh child with
//! probability 0.01 and to the parent with probability `0.01 r̂_parent / r̂_v`,
//! where `r̂` estimates `κ/ω`. Its stationary measure is `π_v ∝ r̂_v ω_v`, so
//! conditioned on being at a leaf (where `r̂` is exact) it is `κ`.

use crate::choice::{Recording, Replay, Source};
use crate::cluster::{log_partition_estimate, EstimateOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{CriticalMode, Hamiltonian};
use crate::monomial::Horizon;
use crate::pinning::{check_beta, pin_step, Configuration, PinState};
use crate::stabilizer::{sample_state, ProductState};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

/// Probability of attempting a move to a child per step.
pub const DOWN_PROBABILITY: f64 = 0.01;

/// Largest parent/child ratio the chain accepts.
pub const MAX_RATIO: f64 = 10.0;

/// Log-partition estimates keyed by the active term set. Shared between walks.
#[derive(Debug, Default)]
pub struct LogPartitionMemo {
    map: RwLock<HashMap<Vec<usize>, f64>>,
    computed: AtomicU64,
}

impl LogPartitionMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of estimates actually computed (cache misses).
    pub fn computed(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    fn get_or_compute(
        &self,
        h: &Hamiltonian,
        active: Vec<usize>,
        beta: f64,
        eta: f64,
        allow: bool,
    ) -> Result<f64> {
        if let Some(&z) = self.map.read().expect("memo lock").get(&active) {
            return Ok(z);
        }
        let sub = h.subset(&active);
        let opts = EstimateOptions {
            allow_above_threshold: allow,
            ..EstimateOptions::default()
        };
        let z = log_partition_estimate(&sub, beta, eta, opts)?.z_hat;
        self.computed.fetch_add(1, Ordering::Relaxed);
        self.map.write().expect("memo lock").insert(active, z);
        Ok(z)
    }
}

/// Exact `tr σ` of a finished run.
pub fn leaf_ratio(state: &PinState) -> Result<f64> {
    if !state.is_done() {
        return Err(Error::InvalidInput(
            "leaf_ratio called on a node with active terms".into(),
        ));
    }
    state.config.ln_trace()?;
    Ok(state.config.trace())
}

/// Computes `ln r̂` for tree nodes.
pub struct RatioOracle<'a> {
    h: &'a Hamiltonian,
    beta: f64,
    eta: f64,
    allow_above_threshold: bool,
    memo: &'a LogPartitionMemo,
}

impl<'a> RatioOracle<'a> {
    /// Rejects `β` above `1/(200ΔK)` unless `allow_above_threshold`.
    pub fn new(
        h: &'a Hamiltonian,
        beta: f64,
        eta: f64,
        allow_above_threshold: bool,
        memo: &'a LogPartitionMemo,
    ) -> Result<Self> {
        check_beta(h, beta, CriticalMode::Sampling, allow_above_threshold)?;
        Ok(RatioOracle {
            h,
            beta,
            eta,
            allow_above_threshold,
            memo,
        })
    }

    /// `ln r̂` of a node.
    ///
    /// Leaves get the exact `ln tr σ`. Internal nodes get the exact trace
    /// factors of blocks that no longer neighbour an active term, times
    /// `exp ẑ` for the Hamiltonian of the active terms.
    pub fn ln_ratio(&self, state: &PinState) -> Result<f64> {
        if state.is_done() {
            return state.config.ln_trace();
        }
        let h = self.h;
        let mut acc = 0.0;
        for b in &state.config.blocks {
            let open = b.x.terms.iter().any(|&t| {
                std::iter::once(t)
                    .chain(h.neighbors(t).iter().copied())
                    .any(|a| state.is_active(a))
            });
            if open {
                continue;
            }
            let f = 1.0 + b.identity_weight();
            if f <= 0.0 {
                return Err(Error::Invariant(format!(
                    "block trace factor {f} is not positive"
                )));
            }
            acc += f.ln();
        }
        let z = self.memo.get_or_compute(
            h,
            state.active_terms(),
            self.beta,
            self.eta,
            self.allow_above_threshold,
        )?;
        Ok(acc + z)
    }
}

/// `r̂` of a node; exact for leaves.
pub fn estimate_ratio(
    h: &Hamiltonian,
    state: &PinState,
    beta: f64,
    eta: f64,
    memo: &LogPartitionMemo,
) -> Result<f64> {
    Ok(RatioOracle::new(h, beta, eta, false, memo)?.ln_ratio(state)?.exp())
}

/// `(P(up), P(down))` at a node with log-ratio `ln_r`.
pub fn move_probabilities(parent_ln_ratio: Option<f64>, ln_r: f64, is_leaf: bool) -> Result<(f64, f64)> {
    let up = match parent_ln_ratio {
        None => 0.0,
        Some(lp) => {
            let ratio = (lp - ln_r).exp();
            if !(ratio <= MAX_RATIO) {
                return Err(Error::Invariant(format!(
                    "parent/child ratio {ratio} exceeds {MAX_RATIO}"
                )));
            }
            DOWN_PROBABILITY * ratio
        }
    };
    let down = if is_leaf { 0.0 } else { DOWN_PROBABILITY };
    Ok((up, down))
}

/// A realized vertex of the sample tree.
#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: PinState,
    pub parent: Option<usize>,
    children: HashMap<Vec<u32>, usize>,
    pub ln_ratio: f64,
    pub depth: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.state.is_done()
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }
}

/// The part of the sample tree a walk has visited.
pub struct SampleTree<'a> {
    h: &'a Hamiltonian,
    oracle: RatioOracle<'a>,
    nodes: Vec<TreeNode>,
    ratio_queries: u64,
}

impl<'a> SampleTree<'a> {
    pub fn new(h: &'a Hamiltonian, oracle: RatioOracle<'a>, horizon: Horizon) -> Result<Self> {
        let state = PinState::new(h, oracle.beta, horizon);
        let mut tree = SampleTree {
            h,
            oracle,
            nodes: Vec::new(),
            ratio_queries: 0,
        };
        tree.push(state, None, 0)?;
        Ok(tree)
    }

    fn push(&mut self, state: PinState, parent: Option<usize>, depth: usize) -> Result<usize> {
        let ln_ratio = self.oracle.ln_ratio(&state)?;
        self.ratio_queries += 1;
        self.nodes.push(TreeNode {
            state,
            parent,
            children: HashMap::new(),
            ln_ratio,
            depth,
        });
        Ok(self.nodes.len() - 1)
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of `r̂` evaluations so far; equals the node count.
    pub fn ratio_queries(&self) -> u64 {
        self.ratio_queries
    }

    /// Runs one pinning step from node `i` and returns the child it lands in,
    /// reusing an existing child when the transcript matches.
    pub fn child<S: Source + ?Sized>(&mut self, i: usize, src: &mut S) -> Result<usize> {
        let mut state = self.nodes[i].state.clone();
        let mut rec = Recording::new(src);
        pin_step(self.h, &mut state, &mut rec)?;
        let key = rec.into_transcript();
        if let Some(&c) = self.nodes[i].children.get(&key) {
            return Ok(c);
        }
        let depth = self.nodes[i].depth + 1;
        let c = self.push(state, Some(i), depth)?;
        self.nodes[i].children.insert(key, c);
        Ok(c)
    }

    pub fn move_probabilities(&self, i: usize) -> Result<(f64, f64)> {
        let v = &self.nodes[i];
        move_probabilities(v.parent.map(|p| self.nodes[p].ln_ratio), v.ln_ratio, v.is_leaf())
    }
}

/// Step and epoch budgets of the walk.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WalkParams {
    pub epsilon: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Accuracy of the log-partition estimates behind `r̂`.
    pub eta_ratio: f64,
    /// Overrides the default `⌈c₁ n³ ln(n k/ε)⌉`.
    pub steps_per_epoch: Option<u64>,
    /// Overrides the default `⌈c₂ n ln(1/δ)⌉`.
    pub max_epochs: Option<u64>,
    pub allow_above_threshold: bool,
}

impl WalkParams {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        WalkParams {
            epsilon,
            delta,
            c1: 4.0,
            c2: 8.0,
            eta_ratio: 0.01,
            steps_per_epoch: None,
            max_epochs: None,
            allow_above_threshold: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.delta > 0.0
            && self.delta < 1.0
            && self.c1 > 0.0
            && self.c2 > 0.0
            && self.eta_ratio > 0.0
            && self.eta_ratio < 1.0
            && self.steps_per_epoch != Some(0)
            && self.max_epochs != Some(0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid walk parameters {self:?}")))
        }
    }

    /// `ln k` for the branching bound `k = (40 ln(n/ε)(Δ+1))^{20 ln(n/ε)}`.
    pub fn ln_branching(&self, h: &Hamiltonian) -> f64 {
        let l = (h.n().max(2) as f64 / self.epsilon).ln().max(1.0);
        20.0 * l * (40.0 * l * (h.degree() as f64 + 1.0)).ln()
    }

    pub fn resolved_steps_per_epoch(&self, h: &Hamiltonian) -> u64 {
        self.steps_per_epoch.unwrap_or_else(|| {
            let n = h.n().max(1) as f64;
            let log_term = n.ln() + self.ln_branching(h) - self.epsilon.ln();
            (self.c1 * n.powi(3) * log_term).ceil().max(1.0) as u64
        })
    }

    pub fn resolved_max_epochs(&self, h: &Hamiltonian) -> u64 {
        self.max_epochs.unwrap_or_else(|| {
            let n = h.n().max(1) as f64;
            (self.c2 * n * (1.0 / self.delta).ln()).ceil().max(1.0) as u64
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Up,
    Down,
}

/// One non-trivial transition of the walk.
#[derive(Clone, Debug, Serialize)]
pub struct MoveRecord {
    /// Step index within the whole walk.
    pub step: u64,
    /// Depth after the move.
    pub depth: usize,
    #[serde(rename = "move")]
    pub mv: Move,
    /// `r̂_parent / r̂_child` across the traversed edge.
    pub r_hat_ratio: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct WalkSummary {
    pub epochs_used: u64,
    pub leaf_depth: Option<usize>,
    pub ratio_queries: u64,
    pub nodes: usize,
    pub moves: u64,
}

#[derive(Clone, Debug)]
pub struct WalkOutcome {
    /// The final configuration, or `None` if no epoch ended at a leaf.
    pub leaf: Option<Configuration>,
    pub summary: WalkSummary,
    pub moves: Vec<MoveRecord>,
}

/// Number of steps up to and including the first success of a `p`-coin.
fn holding_time<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let u = 1.0 - rng.random::<f64>();
    let k = (u.ln() / (1.0 - p).ln()).floor();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64 + 1
    }
}

/// Runs the walk from the root, checking for a leaf at the end of each epoch.
///
/// Self-loops are skipped in one draw through geometric holding times, so the
/// cost is proportional to the number of actual moves. The position carries
/// over between epochs.
pub fn run_walk<R: Rng + ?Sized>(
    h: &Hamiltonian,
    beta: f64,
    horizon: Horizon,
    params: &WalkParams,
    memo: &LogPartitionMemo,
    telemetry: bool,
    rng: &mut R,
) -> Result<WalkOutcome> {
    params.validate()?;
    let oracle = RatioOracle::new(h, beta, params.eta_ratio, params.allow_above_threshold, memo)?;
    let mut tree = SampleTree::new(h, oracle, horizon)?;
    let steps = params.resolved_steps_per_epoch(h);
    let epochs = params.resolved_max_epochs(h);
    let mut summary = WalkSummary::default();
    let mut moves = Vec::new();
    let mut pos = 0usize;
    let mut total_steps = 0u64;
    let finish = |tree: &SampleTree, pos: usize, mut summary: WalkSummary, moves, found: bool| {
        summary.ratio_queries = tree.ratio_queries();
        summary.nodes = tree.len();
        let leaf = if found {
            summary.leaf_depth = Some(tree.node(pos).depth);
            Some(tree.node(pos).state.config.clone())
        } else {
            None
        };
        WalkOutcome {
            leaf,
            summary,
            moves,
        }
    };
    if tree.node(0).is_leaf() {
        return Ok(finish(&tree, 0, summary, moves, true));
    }
    for epoch in 1..=epochs {
        summary.epochs_used = epoch;
        let mut clock = 0u64;
        loop {
            let (up, down) = tree.move_probabilities(pos)?;
            let p = up + down;
            let wait = holding_time(p, rng);
            if wait > steps - clock {
                total_steps += steps - clock;
                break;
            }
            clock += wait;
            total_steps += wait;
            let going_up = rng.random::<f64>() * p < up;
            let (next, mv) = if going_up {
                (tree.node(pos).parent.expect("root never moves up"), Move::Up)
            } else {
                (tree.child(pos, rng)?, Move::Down)
            };
            summary.moves += 1;
            if telemetry {
                let (parent, child) = if going_up { (next, pos) } else { (pos, next) };
                moves.push(MoveRecord {
                    step: total_steps,
                    depth: tree.node(next).depth,
                    mv,
                    r_hat_ratio: (tree.node(parent).ln_ratio - tree.node(child).ln_ratio).exp(),
                });
            }
            pos = next;
        }
        if tree.node(pos).is_leaf() {
            return Ok(finish(&tree, pos, summary, moves, true));
        }
    }
    Ok(finish(&tree, pos, summary, moves, false))
}

/// Result of [`sample_gibbs_state`].
#[derive(Clone, Debug)]
pub struct GibbsSample {
    /// `None` when the walk failed within its budget.
    pub state: Option<ProductState>,
    pub walk: WalkOutcome,
}

/// Draws one product state whose distribution approximates `e^{−βH}/tr e^{−βH}`.
///
/// The walk runs at accuracy `ε/4` with the series horizon chosen for `ε/4`;
/// `params.epsilon` is ignored in favour of `epsilon / 4`.
pub fn sample_gibbs_state<R: Rng + ?Sized>(
    h: &Hamiltonian,
    beta: f64,
    epsilon: f64,
    params: &WalkParams,
    memo: &LogPartitionMemo,
    telemetry: bool,
    rng: &mut R,
) -> Result<GibbsSample> {
    check_beta(h, beta, CriticalMode::Sampling, params.allow_above_threshold)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let walk_params = WalkParams {
        epsilon: epsilon / 4.0,
        ..*params
    };
    let horizon = Horizon::from_epsilon(h.n(), epsilon / 4.0);
    let walk = run_walk(h, beta, horizon, &walk_params, memo, telemetry, rng)?;
    let state = match &walk.leaf {
        Some(config) => Some(sample_state(config, rng)?),
        None => None,
    };
    Ok(GibbsSample { state, walk })
}

/// One output of an indexed sampling run.
#[derive(Clone, Debug, Serialize)]
pub struct IndexedSample {
    pub index: u64,
    /// Seed of this sample's private RNG stream.
    pub seed: u64,
    pub state: ProductState,
    /// Walks that ended without reaching a leaf before this one succeeded.
    pub failures: u64,
    pub summary: WalkSummary,
    /// Moves of the successful walk, when telemetry was requested.
    pub moves: Vec<MoveRecord>,
}

/// Sample `index` of a run with master seed `master`.
///
/// The sample's RNG is seeded with [`crate::derive_seed`]`(master, index)`,
/// so it can be reproduced on its own. Failed walks are retried on the same
/// stream, up to `max_attempts` walks in total.
#[allow(clippy::too_many_arguments)]
pub fn draw_indexed_sample(
    h: &Hamiltonian,
    beta: f64,
    epsilon: f64,
    params: &WalkParams,
    memo: &LogPartitionMemo,
    master: u64,
    index: u64,
    max_attempts: u64,
    telemetry: bool,
) -> Result<IndexedSample> {
    let seed = crate::derive_seed(master, index);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for failures in 0..max_attempts {
        let out = sample_gibbs_state(h, beta, epsilon, params, memo, telemetry, &mut rng)?;
        if let Some(state) = out.state {
            return Ok(IndexedSample {
                index,
                seed,
                state,
                failures,
                summary: out.walk.summary,
                moves: out.walk.moves,
            });
        }
        log::debug!("sample {index}: walk {failures} ended away from a leaf");
    }
    Err(Error::Resource(format!(
        "sample {index}: no walk reached a leaf in {max_attempts} attempts"
    )))
}

/// A fully enumerated sample tree, for exact checks on tiny instances.
#[derive(Clone, Debug)]
pub struct EnumeratedTree {
    pub nodes: Vec<EnumeratedNode>,
}

#[derive(Clone, Debug)]
pub struct EnumeratedNode {
    pub parent: Option<usize>,
    /// Probability of the transcript leading here from the parent.
    pub branch_probability: f64,
    /// Natural weight `ω`: product of branch probabilities from the root.
    pub omega: f64,
    pub ln_ratio: f64,
    pub is_leaf: bool,
    pub config: Configuration,
}

impl EnumeratedTree {
    /// Every node of the sample tree at a finite horizon. Errors when the tree
    /// has more than `max_nodes` nodes.
    pub fn build(
        h: &Hamiltonian,
        beta: f64,
        t_max: usize,
        eta: f64,
        memo: &LogPartitionMemo,
        max_nodes: usize,
    ) -> Result<Self> {
        let oracle = RatioOracle::new(h, beta, eta, false, memo)?;
        let root = PinState::new(h, beta, Horizon::Finite(t_max));
        let mut states = vec![root];
        let mut nodes = vec![EnumeratedNode {
            parent: None,
            branch_probability: 1.0,
            omega: 1.0,
            ln_ratio: oracle.ln_ratio(&states[0])?,
            is_leaf: states[0].is_done(),
            config: states[0].config.clone(),
        }];
        let mut i = 0;
        while i < nodes.len() {
            if !nodes[i].is_leaf {
                let parent_state = states[i].clone();
                let branches = Replay::enumerate(max_nodes, |r| {
                    let mut st = parent_state.clone();
                    pin_step(h, &mut st, r).map(|_| st)
                })
                .ok_or_else(|| Error::Resource(format!("more than {max_nodes} branches")))?;
                for (p, st) in branches {
                    let st = st?;
                    nodes.push(EnumeratedNode {
                        parent: Some(i),
                        branch_probability: p,
                        omega: nodes[i].omega * p,
                        ln_ratio: oracle.ln_ratio(&st)?,
                        is_leaf: st.is_done(),
                        config: st.config.clone(),
                    });
                    states.push(st);
                    if nodes.len() > max_nodes {
                        return Err(Error::Resource(format!("more than {max_nodes} tree nodes")));
                    }
                }
            }
            i += 1;
        }
        Ok(EnumeratedTree { nodes })
    }

    /// Row-stochastic matrix of the walk: `P[u][v]` is the one-step probability `u → v`.
    pub fn transition_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.nodes.len();
        let mut p = DMatrix::zeros(m, m);
        for (v, node) in self.nodes.iter().enumerate() {
            let parent_ln = node.parent.map(|u| self.nodes[u].ln_ratio);
            let (up, _) = move_probabilities(parent_ln, node.ln_ratio, node.is_leaf)?;
            if let Some(u) = node.parent {
                p[(v, u)] += up;
                p[(u, v)] += DOWN_PROBABILITY * node.branch_probability;
            }
        }
        for v in 0..m {
            let out: f64 = p.row(v).sum();
            p[(v, v)] += 1.0 - out;
        }
        Ok(p)
    }

    /// `κ(v) = tr σ(v) · ω(v)` for leaves, 0 elsewhere.
    pub fn true_weights(&self) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .map(|n| {
                if n.is_leaf {
                    Ok(n.config.trace() * n.omega)
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    }
}

/// The stationary distribution of a row-stochastic matrix, by solving
/// `(Pᵀ − I)π = 0` with one equation replaced by `Σπ = 1`.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(m, m);
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    a.lu()
        .solve(&b)
        .ok_or_else(|| Error::Invariant("transition matrix has no unique stationary vector".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Term;
    use crate::models;
    use crate::pauli::Axis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_hamiltonian_returns_root() {
        let h = Hamiltonian::build(3, 1, vec![]).unwrap();
        let memo = LogPartitionMemo::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_walk(&h, 0.0, Horizon::Finite(3), &WalkParams::new(0.1, 0.01), &memo, false, &mut rng)
            .unwrap();
        assert_eq!(out.leaf.unwrap().trace(), 8.0);
        assert_eq!(out.summary.leaf_depth, Some(0));
    }

    #[test]
    fn leaf_ratio_rejects_internal_nodes() {
        let h = models::chain_tfim(3).unwrap();
        let st = PinState::new(&h, 0.0, Horizon::Finite(2));
        assert!(leaf_ratio(&st).is_err());
        let done = PinState::new(&Hamiltonian::build(3, 1, vec![]).unwrap(), 0.0, Horizon::Finite(2));
        assert_eq!(leaf_ratio(&done).unwrap(), 8.0);
    }

    #[test]
    fn root_ratio_matches_dense_partition_function() {
        let h = models::chain_tfim(4).unwrap();
        let beta = h.critical_beta(CriticalMode::Sampling);
        let memo = LogPartitionMemo::new();
        let st = PinState::new(&h, beta, Horizon::Finite(5));
        let r = estimate_ratio(&h, &st, beta, 0.01, &memo).unwrap();
        let exact = crate::oracle::log_partition(&h, beta).unwrap();
        assert!((r.ln() - exact).abs() <= 0.01);
    }

    #[test]
    fn every_node_is_queried_once() {
        let h = models::chain_tfim(3).unwrap();
        let beta = h.critical_beta(CriticalMode::Sampling) / 2.0;
        let memo = LogPartitionMemo::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut params = WalkParams::new(0.1, 0.01);
        params.steps_per_epoch = Some(2000);
        let out = run_walk(&h, beta, Horizon::Finite(8), &params, &memo, true, &mut rng).unwrap();
        assert_eq!(out.summary.ratio_queries, out.summary.nodes as u64);
        assert_eq!(out.summary.moves as usize, out.moves.len());
        assert!(out.moves.iter().all(|m| m.depth <= h.n()));
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let h = models::chain_tfim(3).unwrap();
        let beta = h.critical_beta(CriticalMode::Sampling) / 2.0;
        let mut params = WalkParams::new(0.1, 0.01);
        params.steps_per_epoch = Some(3000);
        let draw = |seed| {
            let memo = LogPartitionMemo::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_gibbs_state(&h, beta, 0.1, &params, &memo, false, &mut rng)
                .unwrap()
                .state
        };
        assert_eq!(draw(5), draw(5));
    }

    #[test]
    fn single_term_tree_is_reversible() {
        let h = Hamiltonian::build(
            3,
            2,
            vec![Term::from_sparse(3, 0.8, &[(0, Axis::X), (1, Axis::Z)]).unwrap()],
        )
        .unwrap();
        let beta = h.critical_beta(CriticalMode::Sampling) / 2.0;
        let memo = LogPartitionMemo::new();
        let tree = EnumeratedTree::build(&h, beta, 1, 0.01, &memo, 10_000).unwrap();
        let p = tree.transition_matrix().unwrap();
        let pi = stationary_distribution(&p).unwrap();
        for (v, node) in tree.nodes.iter().enumerate() {
            if let Some(u) = node.parent {
                assert!((p[(u, v)] * pi[u] - p[(v, u)] * pi[v]).abs() < 1e-12);
            }
        }
    }
}
