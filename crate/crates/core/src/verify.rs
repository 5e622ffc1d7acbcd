//! Self-checks that compare the samplers and estimators with the dense oracle.
//!
//! Each suite returns a [`SuiteReport`] with a case count, a failure count and
//! named margins. The CLI `verify` command and the acceptance tests both run
//! these.

use crate::choice::Replay;
use crate::cluster::{self, convergence_check, count_rooted_polymers, polymer_count_bound, EstimateOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{CriticalMode, Hamiltonian};
use crate::models;
use crate::monomial::{
    f_k_coeff_bound, propagator_coeff_bound, sample_f_k, sample_propagator, term_product, Horizon,
    Scope,
};
use crate::oracle::{self, Dense};
use crate::pauli::{Axis, PauliString};
use crate::pinning::{
    check_final_bound, pin_step, Block, Configuration, HermitianMonomial, MonomialValue, PinState,
};
use crate::sites::SiteSet;
use crate::stabilizer::{sample_state, ProductState};
use crate::tree_walk::{
    draw_indexed_sample, stationary_distribution, EnumeratedTree, LogPartitionMemo, WalkParams,
};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one verification suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub cases: u64,
    pub failures: u64,
    pub margins: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            cases: 0,
            failures: 0,
            margins: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn case(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn set(&mut self, key: &str, value: f64) {
        self.margins.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }

    pub fn margin(&self, key: &str) -> Option<f64> {
        self.margins.get(key).copied()
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> Result<PauliString> {
    let mut ops = Vec::new();
    for site in 0..n {
        let k = rng.random_range(0..4);
        if k > 0 {
            ops.push((site, Axis::ALL[k - 1]));
        }
    }
    Ok(PauliString::from_sparse(n, &ops)?.with_phase(rng.random_range(0..4)))
}

/// Pauli products against dense matrix products: every single-qubit pair,
/// then `random_cases` random products on up to three qubits. The dense
/// entries are exact, so any phase error shows up as a nonzero difference.
pub fn algebra(random_cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("algebra");
    let mut worst: f64 = 0.0;
    let singles: Vec<PauliString> = std::iter::once(PauliString::identity(1))
        .chain(Axis::ALL.iter().map(|&a| PauliString::single(1, 0, a).expect("site 0")))
        .collect();
    let mut check = |a: &PauliString, b: &PauliString, rep: &mut SuiteReport| -> Result<()> {
        let prod = a.mul(b)?;
        let dense = oracle::pauli_dense(a)? * oracle::pauli_dense(b)?;
        let diff = oracle::max_abs_diff(&dense, &oracle::pauli_dense(&prod)?);
        worst = worst.max(diff);
        rep.case(diff == 0.0);
        Ok(())
    };
    for a in &singles {
        for b in &singles {
            check(a, b, &mut rep)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_cases {
        let n = rng.random_range(1..=3);
        let a = random_pauli(n, &mut rng)?;
        let b = random_pauli(n, &mut rng)?;
        check(&a, &b, &mut rep)?;
    }
    rep.set("max_abs_diff", worst);
    Ok(rep)
}

fn monomial_dense(h: &Hamiltonian, terms: &[usize]) -> Result<Dense> {
    let (lambda, p) = term_product(h, terms);
    Ok(oracle::pauli_dense(&p)? * c(lambda))
}

fn random_subset<R: Rng>(m: usize, rng: &mut R) -> Vec<usize> {
    let size = rng.random_range(1..=m);
    let mut v = sample(rng, m, size).into_vec();
    v.sort_unstable();
    v
}

/// Exhaustive branch sums of the `f_k` and propagator samplers against the
/// dense recurrence and truncated series.
pub fn unbiased(instances: usize, max_k: usize, t_max: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("unbiased");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_fk: f64 = 0.0;
    let mut worst_prop: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(1..=2);
        let h = models::random_klocal(n, m, 2, -1.0, 1.0, rng.random())?;
        let q = random_subset(m, &mut rng);
        let full = oracle::hamiltonian_dense(&h)?;
        let hq = oracle::terms_dense(&h, &q)?;
        let fs = oracle::f_sequence(&full, &hq, max_k);
        for (k, target) in fs.iter().enumerate() {
            let branches = Replay::enumerate(1 << 20, |r| sample_f_k(&h, Scope::All, &q, k, r))
                .ok_or_else(|| Error::Resource("too many sampler branches".into()))?;
            let mut acc = Dense::zeros(1 << n, 1 << n);
            for (p, s) in branches {
                let s = s?;
                acc += monomial_dense(&h, &s.terms)? * c(p * s.coeff);
            }
            let diff = oracle::max_abs_diff(&acc, target);
            worst_fk = worst_fk.max(diff);
            rep.case(diff <= 1e-10);
        }
        let beta = rng.random_range(0.05..0.5);
        let branches = Replay::enumerate(1 << 20, |r| {
            sample_propagator(&h, Scope::All, &q, beta, Horizon::Finite(t_max), r)
        })
        .ok_or_else(|| Error::Resource("too many sampler branches".into()))?;
        let mut acc = oracle::identity(n);
        for (p, s) in branches {
            let s = s?;
            if s.coeff != 0.0 {
                acc += monomial_dense(&h, &s.terms)? * c(p * s.coeff);
            }
        }
        let target = oracle::truncated_series_dense(&h, None, &q, beta, t_max)?;
        let diff = oracle::max_abs_diff(&acc, &target);
        worst_prop = worst_prop.max(diff);
        rep.case(diff <= 1e-10);
    }
    rep.set("f_k_max_abs_diff", worst_fk);
    rep.set("propagator_max_abs_diff", worst_prop);
    Ok(rep)
}

/// Coefficient bounds for `f_k` and propagator samples over random instances.
pub fn bounds(draws: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("bounds");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let per_instance = 1000;
    let mut done = 0;
    while done < draws {
        let n = rng.random_range(3..=6);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(1..=3);
        let h = models::random_klocal(n, m, k, -1.0, 1.0, rng.random())?;
        let q = random_subset(m, &mut rng);
        let beta = rng.random_range(0.0..=h.critical_beta(CriticalMode::Sampling));
        for _ in 0..per_instance.min(draws - done) {
            let t = rng.random_range(1..=6);
            let s = sample_f_k(&h, Scope::All, &q, t, &mut rng)?;
            let ratio = s.coeff.abs() / f_k_coeff_bound(&h, q.len(), t);
            worst = worst.max(ratio);
            rep.case(ratio <= 1.0 + 1e-12);
            let s = sample_propagator(&h, Scope::All, &q, beta, Horizon::Unbounded, &mut rng)?;
            let bound = propagator_coeff_bound(&h, q.len(), beta, s.degree());
            let ratio = if s.coeff == 0.0 { 0.0 } else { s.coeff.abs() / bound };
            worst = worst.max(ratio);
            rep.case(ratio <= 1.0 + 1e-12);
            done += 1;
        }
    }
    rep.set("max_coeff_over_bound", worst);
    Ok(rep)
}

/// Running mean and entrywise second moment of dense samples.
struct DenseMoments {
    sum: Dense,
    sum_sq: nalgebra::DMatrix<f64>,
    count: usize,
}

impl DenseMoments {
    fn new(dim: usize) -> Self {
        DenseMoments {
            sum: Dense::zeros(dim, dim),
            sum_sq: nalgebra::DMatrix::zeros(dim, dim),
            count: 0,
        }
    }

    fn push(&mut self, x: &Dense) {
        self.sum += x;
        self.sum_sq += x.map(|z| z.norm_sqr());
        self.count += 1;
    }

    fn mean(&self) -> Dense {
        &self.sum * c(1.0 / self.count as f64)
    }

    /// Frobenius norm of the entrywise standard error of the mean.
    fn standard_error(&self) -> f64 {
        let n = self.count as f64;
        let mean = self.mean();
        let mut var_sum = 0.0;
        for (s2, m) in self.sum_sq.iter().zip(mean.iter()) {
            let var = (s2 / n - m.norm_sqr()).max(0.0) * n / (n - 1.0);
            var_sum += var;
        }
        (var_sum / n).sqrt()
    }
}

/// Mean of `runs` separability samples against dense `e^{−βH}`: passes when
/// the Frobenius distance is at most `5×` the standard error of the mean.
pub fn separability_mean(h: &Hamiltonian, beta: f64, runs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("mean");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moments = DenseMoments::new(1 << h.n());
    for _ in 0..runs {
        let config =
            crate::pinning::run_separability(h, beta, Default::default(), &mut rng)?;
        moments.push(&config.to_dense()?);
    }
    let target = oracle::gibbs_operator(h, beta)?;
    let dist = oracle::frobenius(&(moments.mean() - target));
    let se = moments.standard_error();
    rep.set("frobenius_distance", dist);
    rep.set("standard_error", se);
    rep.case(dist <= 5.0 * se);
    Ok(rep)
}

/// `runs` full pinning runs with the per-step potential assertion and the
/// final coefficient bound; every violation is counted.
pub fn potential(h: &Hamiltonian, beta: f64, runs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("potential");
    if beta > h.potential_beta() {
        return Err(Error::InvalidInput(format!(
            "potential check needs beta ≤ {}",
            h.potential_beta()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..runs {
        let mut state = PinState::new(h, beta, Horizon::Unbounded);
        let mut ok = true;
        while !state.is_done() {
            match pin_step(h, &mut state, &mut rng) {
                Ok(_) => {
                    let b = state.config.blocks.last().expect("a block exists");
                    worst = worst.max(b.c.abs() / state.potential_bound(h, b));
                }
                Err(Error::Invariant(_)) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            ok = check_final_bound(h, beta, &state.config).is_ok();
        }
        rep.case(ok);
    }
    rep.set("max_coeff_over_potential", worst);
    Ok(rep)
}

/// Exact branch sums of [`sample_state`] for random single-block configurations.
pub fn emission(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("emission");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let support = random_subset(n, &mut rng);
        let ops: Vec<(usize, Axis)> = support
            .iter()
            .map(|&s| (s, Axis::ALL[rng.random_range(0..3)]))
            .collect();
        let pauli = PauliString::from_sparse(n, &ops)?;
        let r: f64 = rng.random_range(-1.0..=1.0);
        let cval: f64 = rng.random_range(-1.0..=1.0);
        let zero = rng.random_bool(0.1);
        let value = if zero {
            MonomialValue::Zero
        } else {
            MonomialValue::Pauli {
                r,
                pauli: pauli.clone(),
            }
        };
        let config = Configuration {
            n,
            blocks: vec![Block {
                c: cval,
                x: HermitianMonomial {
                    value,
                    terms: Vec::new(),
                    formal_support: SiteSet::from_sites(n, support.iter().copied()),
                },
            }],
        };
        let branches = Replay::enumerate(1 << 16, |s| sample_state(&config, s))
            .ok_or_else(|| Error::Resource("too many emission branches".into()))?;
        let mut acc = Dense::zeros(1 << n, 1 << n);
        for (p, st) in branches {
            acc += st?.to_dense()? * c(p);
        }
        let sigma = config.to_dense()?;
        let target = &sigma * c(1.0 / config.trace());
        let diff = oracle::max_abs_diff(&acc, &target);
        worst = worst.max(diff);
        rep.case(diff <= 1e-12);
    }
    rep.set("max_abs_diff", worst);
    Ok(rep)
}

/// The instances used by the cluster suite: `n ≤ 8`, `Δ ≤ 4`.
pub fn cluster_instances() -> Result<Vec<Hamiltonian>> {
    let mut out = Vec::new();
    for n in 3..=8 {
        out.push(models::chain_tfim(n)?);
    }
    out.push(models::grid_zz(2, 2)?);
    out.push(models::grid_zz(2, 3)?);
    let mut seed = 1000;
    while out.len() < 10 {
        let h = models::random_klocal(6, 6, 2, -1.0, 1.0, seed)?;
        if h.degree() <= 4 {
            out.push(h);
        }
        seed += 1;
    }
    Ok(out)
}

/// Cluster-expansion estimates at `β = 1/(200Δ)` against the dense log-partition function.
pub fn cluster_accuracy(instances: &[Hamiltonian], etas: &[f64]) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("cluster");
    let mut worst_ratio: f64 = 0.0;
    let mut worst_kp: f64 = 0.0;
    for h in instances {
        let beta = 1.0 / (200.0 * h.effective_degree() as f64);
        let exact = oracle::log_partition(h, beta)?;
        for &eta in etas {
            let est = cluster::log_partition_estimate(h, beta, eta, EstimateOptions::default())?;
            let err = (est.z_hat - exact).abs();
            worst_ratio = worst_ratio.max(err / eta);
            rep.case(err <= eta);
            if est.capped {
                rep.notes.push(format!("n={}: truncation order capped", h.n()));
            }
        }
        let kp = convergence_check(h, beta, 4)?;
        worst_kp = worst_kp.max(kp.worst);
        rep.case(kp.holds);
    }
    rep.set("max_error_over_eta", worst_ratio);
    rep.set("max_convergence_sum", worst_kp);
    Ok(rep)
}

/// A random Hermitian matrix with spectrum spread over `[0.5, 2]`.
fn random_bounded_operator<R: Rng>(n: usize, rng: &mut R) -> Result<Dense> {
    let dim = 1 << n;
    let a = Dense::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let herm = (&a + a.adjoint()) * c(0.5);
    let spectrum = oracle::eigenvalues(&herm);
    let (lo, hi) = (spectrum[0], spectrum[spectrum.len() - 1]);
    oracle::hermitian_fn(&herm, |x| 0.5 + 1.5 * (x - lo) / (hi - lo))
}

/// Spectral-sandwich and peeling checks at `C = big_c` and `β` just below
/// `1/(2C(Δ+1))`, plus a negative check at ten times that `β`.
pub fn sandwich(corpus: &[Hamiltonian], big_c: f64, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("sandwich");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    let mut negatives_flagged = 0;
    for h in corpus {
        let beta = 0.999 * oracle::sandwich_beta_bound(h, big_c);
        for a in 0..h.num_terms() {
            let s = oracle::check_spectral_sandwich(h, a, beta, big_c)?;
            min_margin = min_margin.min(s.margin());
            rep.case(s.passed());
            for t in [0, 1, 2] {
                let p = random_bounded_operator(h.n(), &mut rng)?;
                let r = oracle::check_peeling(h, a, &p, t, beta, big_c)?;
                min_margin = min_margin.min(r.margin());
                rep.case(r.passed());
            }
        }
        let neg = oracle::check_spectral_sandwich(h, 0, 10.0 * beta, big_c)?;
        let flagged = !neg.passed();
        if flagged {
            negatives_flagged += 1;
        }
        rep.case(flagged);
    }
    rep.set("min_eigenvalue_margin", min_margin);
    rep.set("negatives_flagged", negatives_flagged as f64);
    Ok(rep)
}

/// Summary of an end-to-end sampling run.
#[derive(Clone, Debug, Serialize)]
pub struct EndToEnd {
    pub trace_distance: f64,
    pub bootstrap_se: f64,
    pub failures: u64,
    pub attempts: u64,
    pub samples: usize,
}

/// Trace distance between the empirical mean of product states (given by
/// their base-6 codes) and `rho`, with a bootstrap standard error.
pub fn empirical_trace_distance(
    n: usize,
    codes: &[usize],
    rho: &Dense,
    bootstrap: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut dense_of: HashMap<usize, Dense> = HashMap::new();
    for &code in codes {
        if let std::collections::hash_map::Entry::Vacant(e) = dense_of.entry(code) {
            e.insert(ProductState::from_code(n, code).to_dense()?);
        }
    }
    let mean_of = |counts: &HashMap<usize, usize>| -> Dense {
        let mut acc = Dense::zeros(1 << n, 1 << n);
        for (code, &k) in counts {
            acc += &dense_of[code] * c(k as f64 / codes.len() as f64);
        }
        acc
    };
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &code in codes {
        *counts.entry(code).or_default() += 1;
    }
    let td = oracle::trace_distance(&mean_of(&counts), rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for _ in 0..codes.len() {
            *counts.entry(codes[rng.random_range(0..codes.len())]).or_default() += 1;
        }
        reps.push(oracle::trace_distance(&mean_of(&counts), rho)?);
    }
    let mean = reps.iter().sum::<f64>() / reps.len().max(1) as f64;
    let var = reps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps.len().max(2) - 1) as f64;
    Ok((td, var.sqrt()))
}

/// `samples` outputs of the Gibbs sampler compared with the dense Gibbs state.
#[allow(clippy::too_many_arguments)]
pub fn end_to_end(
    h: &Hamiltonian,
    beta: f64,
    epsilon: f64,
    params: &WalkParams,
    samples: usize,
    bootstrap: usize,
    seed: u64,
) -> Result<(SuiteReport, EndToEnd)> {
    let mut rep = SuiteReport::new("end2end");
    let memo = LogPartitionMemo::new();
    let mut codes = Vec::with_capacity(samples);
    let mut failures = 0;
    for i in 0..samples {
        let s = draw_indexed_sample(h, beta, epsilon, params, &memo, seed, i as u64, 1000, false)?;
        failures += s.failures;
        codes.push(s.state.code());
    }
    let rho = oracle::gibbs_density(h, beta)?;
    let (td, se) = empirical_trace_distance(h.n(), &codes, &rho, bootstrap, seed ^ 0xB007)?;
    let attempts = samples as u64 + failures;
    let rate = failures as f64 / attempts.max(1) as f64;
    rep.set("trace_distance", td);
    rep.set("bootstrap_se", se);
    rep.set("tolerance", epsilon + 3.0 * se);
    rep.set("failure_rate", rate);
    rep.case(td <= epsilon + 3.0 * se);
    rep.case(rate <= 2.0 * params.delta);
    Ok((
        rep,
        EndToEnd {
            trace_distance: td,
            bootstrap_se: se,
            failures,
            attempts,
            samples,
        },
    ))
}

/// The `n = 3` single-term instance used by the tree suite.
pub fn tree_instance() -> Result<Hamiltonian> {
    Hamiltonian::build(
        3,
        2,
        vec![crate::hamiltonian::Term::from_sparse(3, 0.9, &[(0, Axis::X), (1, Axis::Z)])?],
    )
}

/// Reversibility and stationary leaf marginals of the explicit transition
/// matrix on a fully enumerated sample tree.
pub fn tree(h: &Hamiltonian, beta: f64, t_max: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("tree");
    let memo = LogPartitionMemo::new();
    let tree = EnumeratedTree::build(h, beta, t_max, 0.01, &memo, 10_000)?;
    let p = tree.transition_matrix()?;
    let pi = stationary_distribution(&p)?;
    let mut rev: f64 = 0.0;
    for (v, node) in tree.nodes.iter().enumerate() {
        if let Some(u) = node.parent {
            rev = rev.max((p[(u, v)] * pi[u] - p[(v, u)] * pi[v]).abs());
        }
    }
    let kappa = tree.true_weights()?;
    let kappa_sum: f64 = kappa.iter().sum();
    let leaf_mass: f64 = tree
        .nodes
        .iter()
        .zip(pi.iter())
        .filter(|(n, _)| n.is_leaf)
        .map(|(_, &x)| x)
        .sum();
    let mut stat: f64 = 0.0;
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.is_leaf {
            stat = stat.max((pi[i] / leaf_mass - kappa[i] / kappa_sum).abs());
        }
    }
    let min_pi = pi.iter().copied().fold(f64::INFINITY, f64::min);
    rep.set("nodes", tree.nodes.len() as f64);
    rep.set("reversibility_defect", rev);
    rep.set("leaf_marginal_defect", stat);
    rep.set("min_stationary_mass", min_pi);
    rep.case(rev <= 1e-10);
    rep.case(stat <= 1e-8);
    rep.case(min_pi > 0.0);
    Ok(rep)
}

/// Instances with `Δ ≥ 2` for the polymer-count check.
pub fn polymer_instances() -> Result<Vec<Hamiltonian>> {
    let mut out = vec![
        models::chain_tfim(4)?,
        models::chain_tfim(6)?,
        models::grid_zz(2, 2)?,
        models::grid_zz(3, 3)?,
        models::heisenberg_chain(4)?,
    ];
    out.extend(models::regression_corpus().into_iter().filter(|h| h.degree() >= 2));
    Ok(out)
}

/// Polymers of size `w ≤ max_w` containing each term, against `e(1+e(Δ−1))^{w−1}`.
pub fn polymer_counts(instances: &[Hamiltonian], max_w: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("polymers");
    let mut worst: f64 = 0.0;
    for h in instances {
        if h.degree() < 2 {
            rep.notes.push(format!(
                "skipped an instance with degree {}: the bound needs degree ≥ 2",
                h.degree()
            ));
            continue;
        }
        for a in 0..h.num_terms() {
            for w in 1..=max_w {
                let count = count_rooted_polymers(h, a, w) as f64;
                let ratio = count / polymer_count_bound(h.degree(), w);
                worst = worst.max(ratio);
                rep.case(ratio <= 1.0);
            }
        }
    }
    rep.set("max_count_over_bound", worst);
    Ok(rep)
}
