//! Cluster-expansion estimate of `ln tr e^{−βH}`.
//!
//! `tr e^{−βH} / 2^n` is the partition function of a polymer model whose
//! polymers are connected multisets of terms, two polymers being compatible
//! when they are at dual-graph distance at least two. The logarithm is the
//! sum over clusters (multisets of polymers with connected incompatibility
//! graph) of the Ursell function times the product of polymer weights.

use crate::error::{Error, Result};
use crate::hamiltonian::{CriticalMode, Hamiltonian};
use crate::pauli::PauliString;
use num_rational::Rational64;
use std::collections::{HashMap, HashSet};

/// Largest polymer size whose weight is evaluated by permutation enumeration.
pub const DEFAULT_MAX_POLYMER_SIZE: usize = 8;

/// Largest incompatibility graph accepted by [`ursell`].
pub const MAX_URSELL_VERTICES: usize = 9;

/// A nonempty multiset of terms, stored sorted with repetition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer {
    pub terms: Vec<usize>,
}

impl Polymer {
    pub fn new(mut terms: Vec<usize>) -> Self {
        terms.sort_unstable();
        Polymer { terms }
    }

    /// Total multiplicity `|γ|`.
    pub fn size(&self) -> usize {
        self.terms.len()
    }

    pub fn distinct(&self) -> Vec<usize> {
        let mut d = self.terms.clone();
        d.dedup();
        d
    }

    /// Whether the distinct terms form a connected subgraph of the dual graph.
    pub fn is_connected(&self, h: &Hamiltonian) -> bool {
        let d = self.distinct();
        if d.is_empty() {
            return false;
        }
        let mut seen = vec![false; d.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, &b) in d.iter().enumerate() {
                if !seen[j] && h.neighbors(d[i]).binary_search(&b).is_ok() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// All connected sets of distinct terms with at most `max_size` elements,
/// each sorted ascending, ordered by size then lexicographically.
pub fn connected_term_sets(h: &Hamiltonian, max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    if max_size == 0 {
        return out;
    }
    let mut layer: Vec<Vec<usize>> = (0..h.num_terms()).map(|a| vec![a]).collect();
    while !layer.is_empty() {
        out.extend(layer.iter().cloned());
        if layer[0].len() == max_size {
            break;
        }
        let mut next: HashSet<Vec<usize>> = HashSet::new();
        for set in &layer {
            for &a in set {
                for &b in h.neighbors(a) {
                    if let Err(pos) = set.binary_search(&b) {
                        let mut grown = set.clone();
                        grown.insert(pos, b);
                        next.insert(grown);
                    }
                }
            }
        }
        let mut next: Vec<Vec<usize>> = next.into_iter().collect();
        next.sort_unstable();
        layer = next;
    }
    out
}

/// Visits every multiplicity vector `m_i ≥ 1` with `Σ m_i = total`.
fn for_each_composition(parts: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, parts: usize, f: &mut impl FnMut(&[usize])) {
        if i + 1 == parts {
            cur.push(left);
            f(cur);
            cur.pop();
            return;
        }
        let remaining_parts = parts - i - 1;
        for m in 1..=left - remaining_parts {
            cur.push(m);
            rec(i + 1, left - m, cur, parts, f);
            cur.pop();
        }
    }
    if parts == 0 || total < parts {
        return;
    }
    let mut cur = Vec::with_capacity(parts);
    rec(0, total, &mut cur, parts, f);
}

/// Every polymer with `|γ| ≤ max_size`, ordered by size then lexicographically.
pub fn enumerate_polymers(h: &Hamiltonian, max_size: usize) -> Vec<Polymer> {
    let sets = connected_term_sets(h, max_size);
    let mut out = Vec::new();
    for set in &sets {
        for total in set.len()..=max_size {
            for_each_composition(set.len(), total, &mut |mult| {
                let mut terms = Vec::with_capacity(total);
                for (&a, &m) in set.iter().zip(mult) {
                    terms.extend(std::iter::repeat_n(a, m));
                }
                out.push(Polymer { terms });
            });
        }
    }
    out.sort_unstable_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.terms.cmp(&b.terms)));
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of polymers of size exactly `w` that contain term `a`.
pub fn count_rooted_polymers(h: &Hamiltonian, a: usize, w: usize) -> u64 {
    connected_term_sets(h, w)
        .iter()
        .filter(|s| s.binary_search(&a).is_ok())
        .map(|s| binomial(w as u64 - 1, s.len() as u64 - 1))
        .sum()
}

/// `e(1 + e(Δ−1))^{w−1}`.
pub fn polymer_count_bound(degree: usize, w: usize) -> f64 {
    let e = std::f64::consts::E;
    e * (1.0 + e * (degree as f64 - 1.0)).powi(w as i32 - 1)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `Σ ntr(E_{σ(1)} ⋯ E_{σ(w)})` over the distinct orderings of the multiset,
/// as an exact Gaussian integer `(re, im)`.
pub fn symmetrized_trace(h: &Hamiltonian, gamma: &Polymer) -> (i64, i64) {
    let n = h.n();
    // A product is traceless unless the X and Z parts cancel, whatever the order.
    let mut total = PauliString::identity(n);
    for &a in &gamma.terms {
        total = total.mul_unchecked(h.term(a).string());
    }
    if !total.is_identity_string() {
        return (0, 0);
    }
    let mut counts = [0i64; 4];
    let mut order = gamma.terms.clone();
    loop {
        let mut p = PauliString::identity(n);
        for &a in &order {
            p = p.mul_unchecked(h.term(a).string());
        }
        counts[p.phase_exp() as usize] += 1;
        if !next_permutation(&mut order) {
            break;
        }
    }
    (counts[0] - counts[2], counts[1] - counts[3])
}

/// `w_γ = (−β)^{|γ|}/|γ|! · λ^γ · Σ_{distinct orderings} ntr(Π E)`.
///
/// Summing over distinct orderings of the multiset is the full
/// permutation sum divided by `γ!`.
pub fn polymer_weight(h: &Hamiltonian, gamma: &Polymer, beta: f64) -> Result<f64> {
    polymer_weight_capped(h, gamma, beta, DEFAULT_MAX_POLYMER_SIZE)
}

pub fn polymer_weight_capped(
    h: &Hamiltonian,
    gamma: &Polymer,
    beta: f64,
    max_size: usize,
) -> Result<f64> {
    let w = gamma.size();
    if w > max_size {
        return Err(Error::Resource(format!(
            "polymer of size {w} exceeds the limit {max_size}"
        )));
    }
    let (re, im) = symmetrized_trace(h, gamma);
    if im != 0 {
        return Err(Error::Invariant(format!(
            "symmetrized trace of {:?} has imaginary part {im}",
            gamma.terms
        )));
    }
    if re == 0 {
        return Ok(0.0);
    }
    let mut scale = 1.0;
    for (i, &a) in gamma.terms.iter().enumerate() {
        scale *= -beta * h.term(a).coeff / (i + 1) as f64;
    }
    Ok(scale * re as f64)
}

/// Terms of `p` together with their dual-graph neighbours, as a mask.
fn closed_mask(h: &Hamiltonian, p: &Polymer) -> Vec<bool> {
    let mut m = vec![false; h.num_terms()];
    for &a in &p.terms {
        m[a] = true;
        for &b in h.neighbors(a) {
            m[b] = true;
        }
    }
    m
}

/// Polymers are incompatible when their dual-graph distance is at most one.
pub fn incompatible(h: &Hamiltonian, p: &Polymer, q: &Polymer) -> bool {
    let m = closed_mask(h, p);
    q.terms.iter().any(|&a| m[a])
}

/// A simple undirected graph on at most 16 vertices, as adjacency bitmasks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmallGraph {
    adj: Vec<u16>,
}

impl SmallGraph {
    pub fn new(vertices: usize) -> Self {
        assert!(vertices <= 16, "SmallGraph holds at most 16 vertices");
        SmallGraph {
            adj: vec![0; vertices],
        }
    }

    pub fn vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "no self-loops");
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for u in 0..self.adj.len() {
            for v in u + 1..self.adj.len() {
                if self.has_edge(u, v) {
                    e.push((u, v));
                }
            }
        }
        e
    }

    pub fn is_connected(&self) -> bool {
        let k = self.adj.len();
        if k == 0 {
            return false;
        }
        let full: u16 = if k == 16 { u16::MAX } else { (1 << k) - 1 };
        let mut seen: u16 = 1;
        let mut frontier: u16 = 1;
        while frontier != 0 {
            let mut next = 0;
            for v in 0..k {
                if frontier >> v & 1 == 1 {
                    next |= self.adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen & full == full
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// The Ursell function `φ(G) = (1/|V|!) Σ_{A ⊆ E spanning connected} (−1)^{|A|}`.
///
/// Computed by the subset recursion
/// `c(S) = g(S) − Σ_{v₀ ∈ T ⊊ S} c(T) g(S∖T)`, where `g(S) = Σ_{A ⊆ E(S)} (−1)^{|A|}`
/// is 1 when `S` spans no edge and 0 otherwise.
pub fn ursell(g: &SmallGraph) -> Result<Rational64> {
    let k = g.vertices();
    if k == 0 {
        return Err(Error::InvalidInput("Ursell function of the empty graph".into()));
    }
    if k > MAX_URSELL_VERTICES {
        return Err(Error::Resource(format!(
            "Ursell function limited to {MAX_URSELL_VERTICES} vertices, got {k}"
        )));
    }
    let size = 1usize << k;
    let independent: Vec<bool> = (0..size)
        .map(|s| (0..k).all(|v| s >> v & 1 == 0 || (g.adj[v] as usize) & s == 0))
        .collect();
    let mut conn = vec![0i64; size];
    for s in 1..size {
        let low = s & s.wrapping_neg();
        let mut acc = i64::from(independent[s]);
        // Proper subsets T of S containing the lowest vertex of S.
        let rest = s ^ low;
        let mut sub = rest;
        loop {
            let t = sub | low;
            if t != s && independent[s ^ t] {
                acc -= conn[t];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        conn[s] = acc;
    }
    Ok(Rational64::new(conn[size - 1], factorial(k)))
}

/// A multiset of polymers (by index into a polymer list) with a connected
/// incompatibility graph, and the number of ordered tuples it stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub polymers: Vec<usize>,
    pub size: usize,
    pub orderings: u64,
}

fn orderings(sorted: &[usize]) -> u64 {
    let mut count = factorial(sorted.len()) as u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        count /= factorial(j - i) as u64;
        i = j;
    }
    count
}

/// Incompatibility graph of a polymer multiset (repeated polymers are adjacent).
pub fn incompatibility_graph(incompat: &[Vec<bool>], cluster: &[usize]) -> SmallGraph {
    let mut g = SmallGraph::new(cluster.len());
    for i in 0..cluster.len() {
        for j in i + 1..cluster.len() {
            if incompat[cluster[i]][cluster[j]] {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Every cluster of `polymers` with total size at most `d`.
///
/// Clusters are grown one polymer at a time, always attaching the new
/// polymer to an existing member, so every connected multiset is reached.
/// Errors with [`Error::ClusterBudget`] if more than `budget` clusters exist;
/// `achieved_k` is the largest total size that was fully enumerated.
pub fn enumerate_clusters_of(
    h: &Hamiltonian,
    polymers: &[Polymer],
    d: usize,
    budget: usize,
) -> Result<(Vec<Cluster>, Vec<Vec<bool>>)> {
    let np = polymers.len();
    let masks: Vec<Vec<bool>> = polymers.iter().map(|p| closed_mask(h, p)).collect();
    let incompat: Vec<Vec<bool>> = (0..np)
        .map(|i| {
            (0..np)
                .map(|j| polymers[j].terms.iter().any(|&a| masks[i][a]))
                .collect()
        })
        .collect();
    let neighbors: Vec<Vec<usize>> = incompat
        .iter()
        .map(|row| (0..np).filter(|&j| row[j]).collect())
        .collect();
    let mut buckets: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); d + 1];
    for (i, p) in polymers.iter().enumerate() {
        if p.size() <= d {
            buckets[p.size()].insert(vec![i]);
        }
    }
    let mut out = Vec::new();
    for s in 1..=d {
        let mut current: Vec<Vec<usize>> = std::mem::take(&mut buckets[s]).into_iter().collect();
        current.sort_unstable();
        if out.len() + current.len() > budget {
            return Err(Error::ClusterBudget { achieved_k: s - 1 });
        }
        for c in &current {
            let mut tried: HashSet<usize> = HashSet::new();
            for &member in c {
                for &j in &neighbors[member] {
                    let t = s + polymers[j].size();
                    if t > d || !tried.insert(j) {
                        continue;
                    }
                    let mut grown = c.clone();
                    let pos = grown.partition_point(|&x| x <= j);
                    grown.insert(pos, j);
                    buckets[t].insert(grown);
                }
            }
        }
        let pending: usize = buckets.iter().map(HashSet::len).sum();
        if out.len() + current.len() + pending > budget.saturating_mul(4) {
            return Err(Error::ClusterBudget { achieved_k: s });
        }
        for c in current {
            let o = orderings(&c);
            out.push(Cluster {
                polymers: c,
                size: s,
                orderings: o,
            });
        }
    }
    Ok((out, incompat))
}

/// Every polymer of size ≤ `d` and every cluster of them of total size ≤ `d`.
pub fn enumerate_clusters(h: &Hamiltonian, d: usize) -> Result<(Vec<Polymer>, Vec<Cluster>)> {
    let polymers = enumerate_polymers(h, d);
    let (clusters, _) = enumerate_clusters_of(h, &polymers, d, usize::MAX / 8)?;
    Ok((polymers, clusters))
}

/// `β_* = 1/(e(e+1)(1 + e(Δ−1)))`, with `Δ = 0` treated as 1.
pub fn beta_star(h: &Hamiltonian) -> f64 {
    let e = std::f64::consts::E;
    let d = h.effective_degree() as f64;
    1.0 / (e * (e + 1.0) * (1.0 + e * (d - 1.0)))
}

/// `⌊ln(n/((1−β/β_*)η)) / ln(β_*/β)⌋`, clamped at 0.
pub fn truncation_order(n: usize, beta: f64, eta: f64, beta_star: f64) -> usize {
    if beta <= 0.0 {
        return 0;
    }
    let r = beta / beta_star;
    let k = (n as f64 / ((1.0 - r) * eta)).ln() / (1.0 / r).ln();
    if k <= 0.0 {
        0
    } else {
        k.floor() as usize
    }
}

/// `n (β/β_*)^{k+1} / (1 − β/β_*)`.
pub fn truncation_error_bound(n: usize, beta: f64, k: usize, beta_star: f64) -> f64 {
    let r = beta / beta_star;
    n as f64 * r.powi(k as i32 + 1) / (1.0 - r)
}

#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions {
    pub max_polymer_size: usize,
    pub cluster_budget: usize,
    pub allow_above_threshold: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            max_polymer_size: DEFAULT_MAX_POLYMER_SIZE,
            cluster_budget: 2_000_000,
            allow_above_threshold: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogZEstimate {
    pub z_hat: f64,
    /// Truncation order actually summed.
    pub k_used: usize,
    /// Truncation order required by `η`.
    pub k_required: usize,
    /// True when `k_required` exceeded the polymer-size cap.
    pub capped: bool,
    pub cluster_count: usize,
    pub polymer_count: usize,
    /// `n (β/β_*)^{k+1}/(1 − β/β_*)` at `k_used`.
    pub truncation_bound: f64,
}

/// Estimates `ln tr e^{−βH}` to additive accuracy `η`.
pub fn log_partition_estimate(
    h: &Hamiltonian,
    beta: f64,
    eta: f64,
    opts: EstimateOptions,
) -> Result<LogZEstimate> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    let threshold = h.critical_beta(CriticalMode::Cluster);
    if beta >= threshold && !opts.allow_above_threshold {
        return Err(Error::BetaAboveThreshold {
            beta,
            threshold,
            mode: CriticalMode::Cluster.name(),
        });
    }
    let base = h.n() as f64 * std::f64::consts::LN_2;
    let bs = beta_star(h);
    if beta == 0.0 || h.num_terms() == 0 {
        return Ok(LogZEstimate {
            z_hat: base,
            k_used: 0,
            k_required: 0,
            capped: false,
            cluster_count: 0,
            polymer_count: 0,
            truncation_bound: 0.0,
        });
    }
    if beta >= bs && !opts.allow_above_threshold {
        return Err(Error::BetaAboveThreshold {
            beta,
            threshold: bs,
            mode: "cluster convergence",
        });
    }
    let k_required = if beta < bs {
        truncation_order(h.n(), beta, eta, bs)
    } else {
        opts.max_polymer_size
    };
    let capped = k_required > opts.max_polymer_size;
    if capped {
        log::warn!(
            "truncation order {k_required} exceeds the polymer-size cap {}; summing to the cap",
            opts.max_polymer_size
        );
    }
    let k = k_required.min(opts.max_polymer_size);
    let mut polymers = Vec::new();
    let mut weights = Vec::new();
    for p in enumerate_polymers(h, k) {
        let w = polymer_weight_capped(h, &p, beta, opts.max_polymer_size)?;
        if w != 0.0 {
            polymers.push(p);
            weights.push(w);
        }
    }
    let (clusters, incompat) = enumerate_clusters_of(h, &polymers, k, opts.cluster_budget)?;
    let mut ursell_cache: HashMap<SmallGraph, f64> = HashMap::new();
    let mut sum = 0.0;
    for c in &clusters {
        let g = incompatibility_graph(&incompat, &c.polymers);
        let phi = match ursell_cache.get(&g) {
            Some(&v) => v,
            None => {
                let r = ursell(&g)?;
                let v = *r.numer() as f64 / *r.denom() as f64;
                ursell_cache.insert(g, v);
                v
            }
        };
        let prod: f64 = c.polymers.iter().map(|&i| weights[i]).product();
        sum += c.orderings as f64 * phi * prod;
    }
    Ok(LogZEstimate {
        z_hat: base + sum,
        k_used: k,
        k_required,
        capped,
        cluster_count: clusters.len(),
        polymer_count: polymers.len(),
        truncation_bound: if beta < bs {
            truncation_error_bound(h.n(), beta, k, bs)
        } else {
            f64::INFINITY
        },
    })
}

/// Numerical check of the convergence condition for single-term roots:
/// for each term `a`, `Σ_{γ incompatible with {a}} |w_γ| (β_*/β)^{|γ|} e^{|γ|}`
/// over polymers up to `max_size`, plus the geometric tail `(e+1)^{−max_size}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Largest partial sum plus tail over all root terms.
    pub worst: f64,
    pub holds: bool,
}

pub fn convergence_check(h: &Hamiltonian, beta: f64, max_size: usize) -> Result<ConvergenceReport> {
    let bs = beta_star(h);
    let e = std::f64::consts::E;
    let polymers = enumerate_polymers(h, max_size);
    let mut weights = Vec::with_capacity(polymers.len());
    for p in &polymers {
        weights.push(polymer_weight_capped(h, p, beta, max_size.max(DEFAULT_MAX_POLYMER_SIZE))?);
    }
    let tail = (e + 1.0).powi(-(max_size as i32));
    let mut worst: f64 = 0.0;
    for a in 0..h.num_terms() {
        let root = Polymer::new(vec![a]);
        let mut s = 0.0;
        for (p, &w) in polymers.iter().zip(&weights) {
            if incompatible(h, &root, p) {
                let size = p.size() as i32;
                s += w.abs() * (bs / beta).powi(size) * e.powi(size);
            }
        }
        worst = worst.max(s + tail);
    }
    Ok(ConvergenceReport {
        worst,
        holds: worst <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Term;
    use crate::pauli::Axis;

    fn ursell_brute(g: &SmallGraph) -> Rational64 {
        let edges = g.edges();
        let k = g.vertices();
        let mut total = 0i64;
        for mask in 0u32..(1 << edges.len()) {
            let mut sub = SmallGraph::new(k);
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sub.add_edge(u, v);
                }
            }
            if sub.is_connected() {
                total += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        Rational64::new(total, factorial(k))
    }

    #[test]
    fn ursell_small_graphs() {
        assert_eq!(ursell(&SmallGraph::new(1)).unwrap(), Rational64::from_integer(1));
        let mut edge = SmallGraph::new(2);
        edge.add_edge(0, 1);
        assert_eq!(ursell(&edge).unwrap(), Rational64::new(-1, 2));
        let mut tri = SmallGraph::new(3);
        tri.add_edge(0, 1);
        tri.add_edge(1, 2);
        tri.add_edge(0, 2);
        assert_eq!(ursell(&tri).unwrap(), Rational64::new(1, 3));
        assert_eq!(ursell(&SmallGraph::new(2)).unwrap(), Rational64::from_integer(0));
        assert!(ursell(&SmallGraph::new(10)).is_err());
    }

    #[test]
    fn ursell_matches_edge_subset_sum() {
        // Every graph on 4 vertices, and a few on 5.
        for mask in 0u32..64 {
            let mut g = SmallGraph::new(4);
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    g.add_edge(u, v);
                }
            }
            assert_eq!(ursell(&g).unwrap(), ursell_brute(&g), "mask {mask}");
        }
        let mut k5 = SmallGraph::new(5);
        for u in 0..5 {
            for v in u + 1..5 {
                k5.add_edge(u, v);
            }
        }
        assert_eq!(ursell(&k5).unwrap(), ursell_brute(&k5));
    }

    fn single_term() -> Hamiltonian {
        Hamiltonian::build(2, 2, vec![Term::from_sparse(2, 0.7, &[(0, Axis::X), (1, Axis::X)]).unwrap()])
            .unwrap()
    }

    #[test]
    fn singleton_and_doubleton_weights() {
        let h = single_term();
        let beta = 0.01;
        assert_eq!(polymer_weight(&h, &Polymer::new(vec![0]), beta).unwrap(), 0.0);
        let w2 = polymer_weight(&h, &Polymer::new(vec![0, 0]), beta).unwrap();
        assert!((w2 - beta * beta * 0.49 / 2.0).abs() < 1e-18);
        assert!(polymer_weight(&h, &Polymer::new(vec![0; 9]), beta).is_err());
    }

    #[test]
    fn single_term_polymers_and_clusters() {
        let h = single_term();
        let (polymers, clusters) = enumerate_clusters(&h, 4).unwrap();
        let sizes: Vec<usize> = polymers.iter().map(Polymer::size).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4]);
        // Multisets of {1,2,3,4}-sized copies with total ≤ 4: partitions of 1..=4.
        assert_eq!(clusters.len(), 1 + 2 + 3 + 5);
        let d1 = enumerate_clusters(&h, 1).unwrap().1;
        assert_eq!(d1.len(), 1);
    }

    #[test]
    fn two_term_chain_counts_match_brute_force() {
        let h = Hamiltonian::build(
            3,
            2,
            vec![
                Term::from_sparse(3, 1.0, &[(0, Axis::Z), (1, Axis::Z)]).unwrap(),
                Term::from_sparse(3, 1.0, &[(1, Axis::Z), (2, Axis::Z)]).unwrap(),
            ],
        )
        .unwrap();
        let polymers = enumerate_polymers(&h, 2);
        // Brute force: all multisets of size ≤ 2 whose distinct terms are connected.
        let mut brute = Vec::new();
        for a in 0..2 {
            brute.push(Polymer::new(vec![a]));
            for b in a..2 {
                let p = Polymer::new(vec![a, b]);
                if p.is_connected(&h) {
                    brute.push(p);
                }
            }
        }
        brute.sort_unstable_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.terms.cmp(&b.terms)));
        assert_eq!(polymers, brute);
    }

    #[test]
    fn zero_terms_give_n_ln_2() {
        let h = Hamiltonian::build(5, 1, vec![]).unwrap();
        let est = log_partition_estimate(&h, 0.001, 0.01, EstimateOptions::default()).unwrap();
        assert_eq!(est.z_hat, 5.0 * std::f64::consts::LN_2);
    }

    #[test]
    fn single_term_matches_log_cosh() {
        let h = single_term();
        let beta = 0.004;
        let est = log_partition_estimate(&h, beta, 0.001, EstimateOptions::default()).unwrap();
        let exact = 2.0 * std::f64::consts::LN_2 + (beta * 0.7f64).cosh().ln();
        assert!((est.z_hat - exact).abs() <= est.truncation_bound.max(1e-15));
    }

    #[test]
    fn truncation_order_is_monotone_in_eta() {
        let bs = 0.01;
        assert!(truncation_order(6, 0.001, 0.1, bs) <= truncation_order(6, 0.001, 0.01, bs));
    }
}
