//! Configurations of disjoint blocks and the site-pinning sampler.
//!
//! A configuration is a list of blocks `(c_i, X_i)` with pairwise disjoint
//! supports and represents the product operator `σ = Π_i (I + c_i X_i)`. The
//! pinning loop repeatedly picks a term, draws two propagator monomials for
//! it, and folds them into the last block through one of seven symmetrized
//! updates. Averaged over all randomness the final `σ` equals `e^{−βH}`
//! (exactly with an unbounded horizon, up to truncation otherwise).

use crate::choice::{Draw, Source};
use crate::error::{Error, Result};
use crate::hamiltonian::{CriticalMode, Hamiltonian};
use crate::monomial::{sample_propagator, term_product, Horizon, MonomialSample, Scope};
use crate::oracle::{self, Dense};
use crate::pauli::{hermitian_part, HermitianPart, PauliString};
use crate::sites::SiteSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Evaluated value of a Hermitian monomial: zero or `r · P` with `P` an
/// unsigned Pauli string and `|r| ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum MonomialValue {
    Zero,
    Pauli { r: f64, pauli: PauliString },
}

impl MonomialValue {
    fn from_part(part: HermitianPart) -> Self {
        match part {
            HermitianPart::Zero => MonomialValue::Zero,
            HermitianPart::Term { coeff, pauli } => {
                if coeff == 0.0 {
                    return MonomialValue::Zero;
                }
                let r = coeff * pauli.sign();
                MonomialValue::Pauli {
                    r,
                    pauli: pauli.into_string().unsigned(),
                }
            }
        }
    }

    /// `r` if the value is a multiple of the identity, else 0.
    pub fn identity_component(&self) -> f64 {
        match self {
            MonomialValue::Pauli { r, pauli } if pauli.is_identity_string() => *r,
            _ => 0.0,
        }
    }
}

/// A Hermitian monomial together with the terms consumed to build it.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMonomial {
    pub value: MonomialValue,
    /// Term indices with multiplicity, sorted ascending.
    pub terms: Vec<usize>,
    /// Union of the supports of `terms`.
    pub formal_support: SiteSet,
}

impl HermitianMonomial {
    pub fn identity(n: usize) -> Self {
        HermitianMonomial {
            value: MonomialValue::Pauli {
                r: 1.0,
                pauli: PauliString::identity(n),
            },
            terms: Vec::new(),
            formal_support: SiteSet::empty(n),
        }
    }

    /// Number of Hamiltonian terms consumed, with multiplicity.
    pub fn degree(&self) -> usize {
        self.terms.len()
    }
}

/// One factor `I + c X` of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub c: f64,
    pub x: HermitianMonomial,
}

impl Block {
    /// `c · r` when the block is a multiple of the identity, else 0.
    pub fn identity_weight(&self) -> f64 {
        self.c * self.x.value.identity_component()
    }
}

/// A product of disjoint-support blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub n: usize,
    pub blocks: Vec<Block>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration {
            n,
            blocks: Vec::new(),
        }
    }

    /// Errors if two blocks have overlapping formal supports.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = SiteSet::empty(self.n);
        for (i, b) in self.blocks.iter().enumerate() {
            if seen.intersects(&b.x.formal_support) {
                return Err(Error::Invariant(format!(
                    "block {i} overlaps an earlier block"
                )));
            }
            if let MonomialValue::Pauli { pauli, .. } = &b.x.value {
                if !pauli.support().is_subset(&b.x.formal_support) {
                    return Err(Error::Invariant(format!(
                        "block {i}: Pauli support exceeds formal support"
                    )));
                }
            }
            seen.union_with(&b.x.formal_support);
        }
        Ok(())
    }

    /// `tr σ = 2^n Π_i (1 + c_i r_i [P_i = I])`.
    pub fn trace(&self) -> f64 {
        let mut t = 2f64.powi(self.n as i32);
        for b in &self.blocks {
            t *= 1.0 + b.identity_weight();
        }
        t
    }

    /// `ln tr σ`; errors if some factor is not positive.
    pub fn ln_trace(&self) -> Result<f64> {
        let mut acc = self.n as f64 * std::f64::consts::LN_2;
        for b in &self.blocks {
            let f = 1.0 + b.identity_weight();
            if f <= 0.0 {
                return Err(Error::Invariant(format!(
                    "block trace factor {f} is not positive"
                )));
            }
            acc += f.ln();
        }
        Ok(acc)
    }

    /// Dense `σ = Π_i (I + c_i X_i)`.
    pub fn to_dense(&self) -> Result<Dense> {
        self.check_disjoint()?;
        let mut out = oracle::identity(self.n);
        for b in &self.blocks {
            if let MonomialValue::Pauli { r, pauli } = &b.x.value {
                let f = oracle::identity(self.n)
                    + oracle::pauli_dense(pauli)? * Complex64::new(b.c * r, 0.0);
                out = out * f;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<BlockRecord> = self
            .blocks
            .iter()
            .map(|b| BlockRecord {
                c: b.c,
                degree: b.x.degree(),
                terms: b.x.terms.clone(),
                value: match &b.x.value {
                    MonomialValue::Zero => ValueRecord::Zero { zero: true },
                    MonomialValue::Pauli { r, pauli } => ValueRecord::Pauli {
                        r: *r,
                        pauli: pauli.to_string(),
                    },
                },
            })
            .collect();
        serde_json::to_value(blocks).expect("plain data serializes")
    }

    /// Inverse of [`Configuration::to_json`]; formal supports are rebuilt from `h`.
    pub fn from_json(h: &Hamiltonian, v: &serde_json::Value) -> Result<Configuration> {
        let recs: Vec<BlockRecord> = serde_json::from_value(v.clone())?;
        let mut blocks = Vec::with_capacity(recs.len());
        for rec in recs {
            if rec.terms.len() != rec.degree {
                return Err(Error::Parse("degree does not match term count".into()));
            }
            let mut fs = SiteSet::empty(h.n());
            for &a in &rec.terms {
                if a >= h.num_terms() {
                    return Err(Error::TermOutOfRange {
                        index: a,
                        m: h.num_terms(),
                    });
                }
                fs.union_with(h.term(a).support());
            }
            let value = match rec.value {
                ValueRecord::Zero { .. } => MonomialValue::Zero,
                ValueRecord::Pauli { r, pauli } => MonomialValue::Pauli {
                    r,
                    pauli: PauliString::parse(h.n(), &pauli)?,
                },
            };
            blocks.push(Block {
                c: rec.c,
                x: HermitianMonomial {
                    value,
                    terms: rec.terms,
                    formal_support: fs,
                },
            });
        }
        let config = Configuration { n: h.n(), blocks };
        config.check_disjoint()?;
        Ok(config)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    c: f64,
    degree: usize,
    terms: Vec<usize>,
    value: ValueRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRecord {
    Zero { zero: bool },
    Pauli { r: f64, pauli: String },
}

/// The evolving state of the pinning loop.
#[derive(Clone, Debug)]
pub struct PinState {
    /// Sites not yet pinned.
    pub unpinned: SiteSet,
    pub config: Configuration,
    /// `active[a]` iff term `a` is supported inside `unpinned`.
    active: Vec<bool>,
    active_count: usize,
    pub gamma: f64,
    pub beta: f64,
    pub horizon: Horizon,
    /// Whether [`pin_step`] asserts the coefficient potential.
    pub check_potential: bool,
}

impl PinState {
    pub fn new(h: &Hamiltonian, beta: f64, horizon: Horizon) -> Self {
        PinState {
            unpinned: SiteSet::full(h.n()),
            config: Configuration::empty(h.n()),
            active: vec![true; h.num_terms()],
            active_count: h.num_terms(),
            gamma: 3.0 / (5.0 * h.locality() as f64),
            beta,
            horizon,
            check_potential: beta <= h.potential_beta(),
        }
    }

    /// No term lies inside the unpinned sites.
    pub fn is_done(&self) -> bool {
        self.active_count == 0
    }

    pub fn is_active(&self, a: usize) -> bool {
        self.active[a]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    /// Ascending list of terms supported inside the unpinned sites.
    pub fn active_terms(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&a| self.active[a]).collect()
    }

    /// Number of steps taken so far is not stored; this is the count of pinned sites.
    pub fn pinned_count(&self) -> usize {
        self.unpinned.universe() - self.unpinned.len()
    }

    /// The term the next step will pin.
    ///
    /// The smallest active term in the closed neighbourhood of the last
    /// block's terms, or the smallest active term if there is none (in which
    /// case the step opens a fresh block). Returns `(a*, opens_block)`.
    pub fn next_term(&self, h: &Hamiltonian) -> Option<(usize, bool)> {
        if self.is_done() {
            return None;
        }
        if let Some(last) = self.config.blocks.last() {
            let mut best: Option<usize> = None;
            for &b in &last.x.terms {
                for a in std::iter::once(b).chain(h.neighbors(b).iter().copied()) {
                    if self.active[a] && best.is_none_or(|x| a < x) {
                        best = Some(a);
                    }
                }
            }
            if let Some(a) = best {
                return Some((a, false));
            }
        }
        let a = self.active.iter().position(|&x| x).expect("not done");
        Some((a, true))
    }

    /// `(1−γ)^{|S ∩ formal support|} (β/β_pot)^t` for a block.
    pub fn potential_bound(&self, h: &Hamiltonian, block: &Block) -> f64 {
        let overlap = self.unpinned.intersection_len(&block.x.formal_support);
        (1.0 - self.gamma).powi(overlap as i32)
            * (self.beta / h.potential_beta()).powi(block.x.degree() as i32)
    }

    /// Checks the structural invariants: disjoint blocks, and no block other
    /// than the last touching an active term.
    pub fn check_invariants(&self, h: &Hamiltonian) -> Result<()> {
        self.config.check_disjoint()?;
        let nb = self.config.blocks.len();
        for (i, b) in self.config.blocks.iter().enumerate().take(nb.saturating_sub(1)) {
            for &t in &b.x.terms {
                let touches = std::iter::once(t)
                    .chain(h.neighbors(t).iter().copied())
                    .any(|a| self.active[a]);
                if touches {
                    return Err(Error::Invariant(format!(
                        "block {i} neighbours an active term"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn merge_terms(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v.sort_unstable();
    v
}

fn support_of(h: &Hamiltonian, terms: &[usize]) -> SiteSet {
    let mut s = SiteSet::empty(h.n());
    for &a in terms {
        s.union_with(h.term(a).support());
    }
    s
}

/// The two monomials and the case index drawn by one pinning step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDraws {
    pub a_star: usize,
    pub first: MonomialSample,
    pub second: MonomialSample,
    pub case: usize,
}

/// One pinning step: folds two propagator monomials for the chosen term into
/// the last block and removes that term's support from the unpinned sites.
pub fn pin_step<S: Source + ?Sized>(
    h: &Hamiltonian,
    state: &mut PinState,
    src: &mut S,
) -> Result<StepDraws> {
    let (a_star, opens) = state
        .next_term(h)
        .ok_or_else(|| Error::InvalidInput("no term left inside the unpinned sites".into()))?;
    if opens {
        state.config.blocks.push(Block {
            c: 0.0,
            x: HermitianMonomial::identity(h.n()),
        });
    }
    let q: Vec<usize> = std::iter::once(a_star)
        .chain(h.neighbors(a_star).iter().copied())
        .filter(|&a| state.active[a])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let scope = Scope::Active(&state.active);
    let half = state.beta / 2.0;
    let first = sample_propagator(h, scope, &q, half, state.horizon, src)?;
    let second = sample_propagator(h, scope, &q, half, state.horizon, src)?;
    let g = state.gamma;
    let probs = [1.0 - g, g / 6.0, g / 6.0, g / 6.0, g / 6.0, g / 6.0, g / 6.0];
    let case = src.draw(Draw::Weighted(&probs));

    let last = state.config.blocks.last_mut().expect("a block exists");
    let (c, x) = (last.c, &last.x);
    let (l1, e1) = term_product(h, &first.terms);
    let (l2, e2) = term_product(h, &second.terms);
    let (b1, b2) = (first.coeff, second.coeff);
    // Scalar and Pauli of the current block value, if nonzero.
    let xv = match &x.value {
        MonomialValue::Zero => None,
        MonomialValue::Pauli { r, pauli } => Some((*r, pauli)),
    };
    let w = 6.0 / g;
    let fold = |coeff: f64, p: Option<PauliString>, terms: Vec<usize>| -> HermitianMonomial {
        let value = match p {
            None => MonomialValue::Zero,
            Some(p) => MonomialValue::from_part(hermitian_part(coeff, &p)),
        };
        let formal_support = support_of(h, &terms);
        HermitianMonomial {
            value,
            terms,
            formal_support,
        }
    };
    let (new_c, new_x) = match case {
        0 => (c / (1.0 - g), x.clone()),
        1 => (w * b1, fold(l1, Some(e1), first.terms.clone())),
        2 => (w * b2, fold(l2, Some(e2), second.terms.clone())),
        3 | 4 => {
            let (b, l, e, terms) = if case == 3 {
                (b1, l1, &e1, &first.terms)
            } else {
                (b2, l2, &e2, &second.terms)
            };
            // (E† X + X E)/2 is the Hermitian part of X·E.
            let (coeff, p) = match xv {
                Some((r, px)) => (r * l, Some(px.mul_unchecked(e))),
                None => (0.0, None),
            };
            (w * c * b, fold(coeff, p, merge_terms(&x.terms, terms)))
        }
        5 => {
            // (E₂† E₁ + E₁† E₂)/2 is the Hermitian part of E₂†·E₁.
            let p = e2.dagger().mul_unchecked(&e1);
            (
                w * b1 * b2,
                fold(l1 * l2, Some(p), merge_terms(&first.terms, &second.terms)),
            )
        }
        _ => {
            let (coeff, p) = match xv {
                Some((r, px)) => (
                    r * l1 * l2,
                    Some(e2.dagger().mul_unchecked(px).mul_unchecked(&e1)),
                ),
                None => (0.0, None),
            };
            let terms = merge_terms(&merge_terms(&x.terms, &first.terms), &second.terms);
            (w * c * b1 * b2, fold(coeff, p, terms))
        }
    };
    if !new_c.is_finite() {
        return Err(Error::Overflow {
            degree: new_x.degree(),
        });
    }
    *last = Block { c: new_c, x: new_x };

    // Every active term meeting supp(a*) is exactly Q.
    for &a in &q {
        state.active[a] = false;
    }
    state.active_count -= q.len();
    state.unpinned.difference_with(h.term(a_star).support());

    if state.check_potential {
        let block = state.config.blocks.last().expect("a block exists");
        let bound = state.potential_bound(h, block);
        if block.c.abs() > bound * (1.0 + 1e-9) {
            return Err(Error::Invariant(format!(
                "coefficient {} exceeds potential bound {bound} at degree {}",
                block.c,
                block.x.degree()
            )));
        }
    }
    Ok(StepDraws {
        a_star,
        first,
        second,
        case,
    })
}

/// Runs pinning steps until no term lies inside the unpinned sites.
pub fn run_pinning<S: Source + ?Sized>(
    h: &Hamiltonian,
    beta: f64,
    horizon: Horizon,
    src: &mut S,
) -> Result<Configuration> {
    let mut state = PinState::new(h, beta, horizon);
    while !state.is_done() {
        pin_step(h, &mut state, src)?;
    }
    Ok(state.config)
}

/// Options for [`run_separability`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SeparabilityOptions {
    /// Skip the `β ≤ 1/(100ΔK)` gate.
    pub allow_above_threshold: bool,
}

/// Gate shared by the separability entry points.
pub fn check_beta(h: &Hamiltonian, beta: f64, mode: CriticalMode, allow: bool) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    let threshold = h.critical_beta(mode);
    if beta > threshold && !allow {
        return Err(Error::BetaAboveThreshold {
            beta,
            threshold,
            mode: mode.name(),
        });
    }
    if beta == threshold && mode == CriticalMode::Separability {
        log::warn!("beta equals the separability threshold {threshold}; the guarantee is stated for beta strictly below it");
    }
    Ok(())
}

/// Samples a configuration with `E[σ] = e^{−βH}` using the exact (untruncated) series.
///
/// Also checks that every final block satisfies `|c| ≤ (β/β_c)^t` with
/// `β_c = 1/(100ΔK)`.
pub fn run_separability<S: Source + ?Sized>(
    h: &Hamiltonian,
    beta: f64,
    opts: SeparabilityOptions,
    src: &mut S,
) -> Result<Configuration> {
    check_beta(h, beta, CriticalMode::Separability, opts.allow_above_threshold)?;
    let config = run_pinning(h, beta, Horizon::Unbounded, src)?;
    if beta <= h.critical_beta(CriticalMode::Separability) {
        check_final_bound(h, beta, &config)?;
    }
    Ok(config)
}

/// `|c_i| ≤ (β/β_c)^{t_i}` for every block, with `β_c = 1/(100ΔK)`.
pub fn check_final_bound(h: &Hamiltonian, beta: f64, config: &Configuration) -> Result<()> {
    let bc = h.critical_beta(CriticalMode::Separability);
    for (i, b) in config.blocks.iter().enumerate() {
        let bound = (beta / bc).powi(b.x.degree() as i32);
        if b.c.abs() > bound * (1.0 + 1e-9) {
            return Err(Error::Invariant(format!(
                "block {i}: |c| = {} exceeds (β/β_c)^t = {bound}",
                b.c.abs()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_hamiltonian_gives_empty_configuration() {
        let h = Hamiltonian::build(3, 1, vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = run_separability(&h, 0.001, SeparabilityOptions::default(), &mut rng).unwrap();
        assert!(c.blocks.is_empty());
        assert_eq!(c.trace(), 8.0);
    }

    #[test]
    fn trace_of_simple_configs() {
        assert_eq!(Configuration::empty(5).trace(), 32.0);
        let n = 2;
        let block = Block {
            c: 0.5,
            x: HermitianMonomial {
                value: MonomialValue::Pauli {
                    r: 1.0,
                    pauli: PauliString::parse(n, "Z0 Z1").unwrap(),
                },
                terms: vec![0],
                formal_support: SiteSet::full(n),
            },
        };
        let config = Configuration {
            n,
            blocks: vec![block],
        };
        assert_eq!(config.trace(), 4.0);
        let dense = config.to_dense().unwrap();
        assert!((dense.trace().re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_block_dense_value() {
        let config = Configuration {
            n: 1,
            blocks: vec![Block {
                c: 0.5,
                x: HermitianMonomial {
                    value: MonomialValue::Pauli {
                        r: 1.0,
                        pauli: PauliString::parse(1, "Z0").unwrap(),
                    },
                    terms: vec![0],
                    formal_support: SiteSet::full(1),
                },
            }],
        };
        let d = config.to_dense().unwrap();
        assert!((d[(0, 0)].re - 1.5).abs() < 1e-15);
        assert!((d[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sites_shrink_every_step() {
        let h = models::chain_tfim(5).unwrap();
        let beta = h.critical_beta(CriticalMode::Separability) / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut st = PinState::new(&h, beta, Horizon::Unbounded);
            let mut steps = 0;
            while !st.is_done() {
                let before = st.unpinned.len();
                pin_step(&h, &mut st, &mut rng).unwrap();
                assert!(st.unpinned.len() < before);
                st.check_invariants(&h).unwrap();
                steps += 1;
            }
            assert!(steps <= h.n());
        }
    }

    #[test]
    fn above_threshold_is_rejected() {
        let h = models::chain_tfim(3).unwrap();
        let beta = 2.0 * h.critical_beta(CriticalMode::Separability);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = run_separability(&h, beta, SeparabilityOptions::default(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::BetaAboveThreshold { .. }));
        let opts = SeparabilityOptions {
            allow_above_threshold: true,
        };
        assert!(run_separability(&h, beta, opts, &mut rng).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let h = models::chain_tfim(4).unwrap();
        let beta = h.critical_beta(CriticalMode::Separability);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c = run_separability(&h, beta, SeparabilityOptions::default(), &mut rng).unwrap();
            let back = Configuration::from_json(&h, &c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let n = 2;
        let mk = |sites: &[usize]| Block {
            c: 0.1,
            x: HermitianMonomial {
                value: MonomialValue::Zero,
                terms: vec![],
                formal_support: SiteSet::from_sites(n, sites.iter().copied()),
            },
        };
        let config = Configuration {
            n,
            blocks: vec![mk(&[0, 1]), mk(&[1])],
        };
        assert!(config.to_dense().is_err());
    }
}
