//! Unbiased single-monomial estimators for the propagator series.
//!
//! With `f_0 = I` and `f_{t+1} = −[H, f_t] − f_t H_Q`, the truncated series
//! `T_{t_max,β} = Σ_{t ≤ t_max} β^t/t! f_t` converges to `e^{−βH} e^{β(H − H_Q)}`.
//! The samplers below return a scalar `c` and a term list `b` such that
//! `E[c · H_{b_1} ⋯ H_{b_t}]` equals `f_k` (resp. `E[I + cE] = T`).

use crate::choice::{Draw, Source};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use serde::Serialize;

/// The set of terms making up the "full" Hamiltonian of a sampler call.
#[derive(Clone, Copy, Debug)]
pub enum Scope<'a> {
    /// Every term of the Hamiltonian.
    All,
    /// Only terms `a` with `mask[a] == true`.
    Active(&'a [bool]),
}

impl Scope<'_> {
    #[inline]
    pub fn contains(&self, a: usize) -> bool {
        match self {
            Scope::All => true,
            Scope::Active(mask) => mask[a],
        }
    }

    /// Explicit ascending term list.
    pub fn terms(&self, h: &Hamiltonian) -> Vec<usize> {
        (0..h.num_terms()).filter(|&a| self.contains(a)).collect()
    }
}

/// Truncation order of the propagator series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Horizon {
    Finite(usize),
    Unbounded,
}

impl Horizon {
    /// `⌈10 ln(n/ε)⌉` (at least 1), or unbounded for `ε = 0`.
    pub fn from_epsilon(n: usize, eps: f64) -> Horizon {
        if eps <= 0.0 {
            Horizon::Unbounded
        } else {
            let t = (10.0 * (n.max(1) as f64 / eps).ln()).ceil();
            Horizon::Finite((t.max(1.0)) as usize)
        }
    }
}

/// A scalar times an ordered product of Hamiltonian terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialSample {
    pub coeff: f64,
    pub terms: Vec<usize>,
}

impl MonomialSample {
    pub fn degree(&self) -> usize {
        self.terms.len()
    }
}

/// `Π λ_b` and the Pauli product `E_{b_1} ⋯ E_{b_t}` for a term list.
pub fn term_product(h: &Hamiltonian, terms: &[usize]) -> (f64, PauliString) {
    let mut coeff = 1.0;
    let mut p = PauliString::identity(h.n());
    for &b in terms {
        let t = h.term(b);
        coeff *= t.coeff;
        p = p.mul_unchecked(t.string());
    }
    (coeff, p)
}

/// Closed dual-graph neighbourhood of a growing term multiset, kept sorted.
struct Neighborhood {
    members: Vec<usize>,
    seen: Vec<bool>,
}

impl Neighborhood {
    fn new(m: usize) -> Self {
        Neighborhood {
            members: Vec::new(),
            seen: vec![false; m],
        }
    }

    fn add_term(&mut self, h: &Hamiltonian, scope: Scope<'_>, a: usize) {
        for b in std::iter::once(a).chain(h.neighbors(a).iter().copied()) {
            if scope.contains(b) && !self.seen[b] {
                self.seen[b] = true;
                let pos = self.members.binary_search(&b).unwrap_err();
                self.members.insert(pos, b);
            }
        }
    }
}

/// Draws `(c, b)` with `E[c · H_{b_1} ⋯ H_{b_k}] = f_k(H, H_Q)`.
///
/// `scope` selects the terms of `H`; `q` must be a subset of it.
pub fn sample_f_k<S: Source + ?Sized>(
    h: &Hamiltonian,
    scope: Scope<'_>,
    q: &[usize],
    k: usize,
    src: &mut S,
) -> Result<MonomialSample> {
    if k >= 1 && q.is_empty() {
        return Err(Error::InvalidInput(
            "f_k with k ≥ 1 needs a nonempty Q".into(),
        ));
    }
    let mut coeff = 1.0f64;
    let mut terms: Vec<usize> = Vec::with_capacity(k);
    let mut hood = Neighborhood::new(h.num_terms());
    for t in 0..k {
        let heads = t > 0 && src.draw(Draw::Coin(t as f64 / (t + 1) as f64)) == 1;
        let a;
        if heads {
            let r = hood.members.len();
            a = hood.members[src.draw(Draw::Uniform(r))];
            let prepend = src.draw(Draw::Uniform(2)) == 1;
            let sign = if prepend { -1.0 } else { 1.0 };
            coeff *= (t + 1) as f64 * 2.0 * r as f64 / t as f64 * sign;
            if prepend {
                terms.insert(0, a);
            } else {
                terms.push(a);
            }
        } else {
            a = q[src.draw(Draw::Uniform(q.len()))];
            coeff *= -((t + 1) as f64) * q.len() as f64;
            terms.push(a);
        }
        hood.add_term(h, scope, a);
        if !coeff.is_finite() {
            return Err(Error::Overflow { degree: t + 1 });
        }
    }
    Ok(MonomialSample { coeff, terms })
}

/// Draws `(c, b)` with `E[I + c · H_{b_1} ⋯ H_{b_t}] = T_{t_max,β}(H, H_Q)`.
///
/// The degree `t` is drawn with `P(t) = 2^{-t}` for `1 ≤ t ≤ t_max` and the
/// leftover mass `2^{-t_max}` on `t = 0`, which contributes `c = 0`.
pub fn sample_propagator<S: Source + ?Sized>(
    h: &Hamiltonian,
    scope: Scope<'_>,
    q: &[usize],
    beta: f64,
    horizon: Horizon,
    src: &mut S,
) -> Result<MonomialSample> {
    let t = match horizon {
        Horizon::Finite(0) => {
            return Err(Error::InvalidInput("t_max must be at least 1".into()));
        }
        Horizon::Finite(t_max) => src.draw(Draw::Truncated(t_max)),
        Horizon::Unbounded => src.draw(Draw::Geometric),
    };
    if t == 0 {
        return Ok(MonomialSample {
            coeff: 0.0,
            terms: Vec::new(),
        });
    }
    let mut s = sample_f_k(h, scope, q, t, src)?;
    // 1/P(t) · β^t/t! = Π_{s=1}^t 2β/s
    for j in 1..=t {
        s.coeff *= 2.0 * beta / j as f64;
    }
    if !s.coeff.is_finite() {
        return Err(Error::Overflow { degree: t });
    }
    Ok(s)
}

/// True when every dual-graph connected component of `terms` contains an element of `q`.
pub fn components_touch(h: &Hamiltonian, terms: &[usize], q: &[usize]) -> bool {
    let mut distinct: Vec<usize> = terms.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let k = distinct.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..k {
        for &nb in h.neighbors(distinct[i]) {
            if let Ok(j) = distinct.binary_search(&nb) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut touched = vec![false; k];
    for (i, &a) in distinct.iter().enumerate() {
        if q.contains(&a) {
            let r = find(&mut parent, i);
            touched[r] = true;
        }
    }
    (0..k).all(|i| {
        let r = find(&mut parent, i);
        touched[r]
    })
}

/// `(t!)·max(2(Δ+1), |Q|)^t`, the bound on `|c|` for an `f_t` sample.
pub fn f_k_coeff_bound(h: &Hamiltonian, q_len: usize, t: usize) -> f64 {
    let base = (2.0 * (h.degree() as f64 + 1.0)).max(q_len as f64);
    (1..=t).map(|s| s as f64 * base).product()
}

/// `(2β·max(2(Δ+1), |Q|))^t`, the bound on `|c|` for a propagator sample.
pub fn propagator_coeff_bound(h: &Hamiltonian, q_len: usize, beta: f64, t: usize) -> f64 {
    let base = (2.0 * (h.degree() as f64 + 1.0)).max(q_len as f64);
    (2.0 * beta * base).powi(t as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Term;
    use crate::pauli::Axis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_term_chain() -> Hamiltonian {
        let terms = vec![
            Term::from_sparse(3, 1.0, &[(0, Axis::Z), (1, Axis::Z)]).unwrap(),
            Term::from_sparse(3, 0.5, &[(1, Axis::X), (2, Axis::X)]).unwrap(),
        ];
        Hamiltonian::build(3, 2, terms).unwrap()
    }

    #[test]
    fn degree_zero_is_identity() {
        let h = two_term_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_f_k(&h, Scope::All, &[0], 0, &mut rng).unwrap();
        assert_eq!(s.coeff, 1.0);
        assert!(s.terms.is_empty());
    }

    #[test]
    fn degree_one_is_minus_q_weighted() {
        let h = two_term_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = sample_f_k(&h, Scope::All, &[0, 1], 1, &mut rng).unwrap();
            assert_eq!(s.coeff, -2.0);
            assert_eq!(s.terms.len(), 1);
        }
    }

    #[test]
    fn empty_q_is_rejected() {
        let h = two_term_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_f_k(&h, Scope::All, &[], 1, &mut rng).is_err());
        assert!(sample_f_k(&h, Scope::All, &[], 0, &mut rng).is_ok());
    }

    #[test]
    fn zero_beta_gives_zero_coefficient() {
        let h = two_term_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let s = sample_propagator(&h, Scope::All, &[0], 0.0, Horizon::Finite(5), &mut rng)
                .unwrap();
            assert_eq!(s.coeff, 0.0);
        }
    }

    #[test]
    fn scope_limits_neighbourhood() {
        let h = two_term_chain();
        let mask = [true, false];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = sample_f_k(&h, Scope::Active(&mask), &[0], 4, &mut rng).unwrap();
            assert!(s.terms.iter().all(|&a| a == 0));
        }
    }

    #[test]
    fn horizon_from_epsilon() {
        assert_eq!(Horizon::from_epsilon(4, 0.0), Horizon::Unbounded);
        // 10 ln 40 = 36.89
        assert_eq!(Horizon::from_epsilon(4, 0.1), Horizon::Finite(37));
    }

    #[test]
    fn component_check() {
        let h = two_term_chain();
        assert!(components_touch(&h, &[0, 1, 1], &[1]));
        let apart = Hamiltonian::build(
            4,
            2,
            vec![
                Term::from_sparse(4, 1.0, &[(0, Axis::Z), (1, Axis::Z)]).unwrap(),
                Term::from_sparse(4, 1.0, &[(2, Axis::Z), (3, Axis::Z)]).unwrap(),
            ],
        )
        .unwrap();
        assert!(!components_touch(&apart, &[0, 1], &[0]));
        assert!(components_touch(&apart, &[0, 1], &[0, 1]));
    }
}
