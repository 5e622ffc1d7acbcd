//! Dense-matrix ground truth for small systems.
//!
//! Site 0 is the most significant bit of the computational-basis index, so a
//! product `A_0 ⊗ A_1 ⊗ …` matches the usual Kronecker ordering.

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{i_pow, PauliString};
use crate::sites::SiteSet;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Dense = DMatrix<Complex64>;

/// Largest system the dense routines accept.
pub const MAX_DENSE_SITES: usize = 12;

/// Eigenvalue slack used by every PSD comparison.
pub const PSD_SLACK: f64 = -1e-10;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_DENSE_SITES {
        return Err(Error::Resource(format!(
            "dense oracle limited to {MAX_DENSE_SITES} sites, got {n}"
        )));
    }
    Ok(())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> Dense {
    Dense::identity(1 << n, 1 << n)
}

/// Dense matrix of a phased Pauli string.
pub fn pauli_dense(p: &PauliString) -> Result<Dense> {
    let n = p.n();
    check_size(n)?;
    let dim = 1usize << n;
    let mut flip = 0usize;
    let mut zmask = 0usize;
    let mut ycount = 0u8;
    for (site, axis) in p.ops() {
        let bit = 1 << (n - 1 - site);
        match axis {
            crate::pauli::Axis::X => flip |= bit,
            crate::pauli::Axis::Z => zmask |= bit,
            crate::pauli::Axis::Y => {
                flip |= bit;
                zmask |= bit;
                ycount += 1;
            }
        }
    }
    // σ_y|b⟩ = i(-1)^b |1-b⟩, σ_z|b⟩ = (-1)^b |b⟩, σ_x|b⟩ = |1-b⟩.
    let base = p.phase() * i_pow(ycount % 4);
    let mut m = Dense::zeros(dim, dim);
    for col in 0..dim {
        let sign = if (col & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[(col ^ flip, col)] = base * sign;
    }
    Ok(m)
}

/// `Σ_{a ∈ terms} λ_a E_a`.
pub fn terms_dense(h: &Hamiltonian, terms: &[usize]) -> Result<Dense> {
    check_size(h.n())?;
    let mut m = Dense::zeros(1 << h.n(), 1 << h.n());
    for &a in terms {
        let t = h.term(a);
        m += pauli_dense(t.string())? * c(t.coeff);
    }
    Ok(m)
}

pub fn hamiltonian_dense(h: &Hamiltonian) -> Result<Dense> {
    let all: Vec<usize> = (0..h.num_terms()).collect();
    terms_dense(h, &all)
}

/// `‖A − A†‖_max`.
pub fn hermiticity_defect(a: &Dense) -> f64 {
    let d = a - a.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_fn(a: &Dense, f: impl Fn(f64) -> f64) -> Result<Dense> {
    let defect = hermiticity_defect(a);
    if defect > 1e-9 {
        return Err(Error::Invariant(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let eig = a.clone().symmetric_eigen();
    let vals = Dense::from_diagonal(&eig.eigenvalues.map(|l| c(f(l))));
    Ok(&eig.eigenvectors * vals * eig.eigenvectors.adjoint())
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigenvalues(a: &Dense) -> Vec<f64> {
    let sym = (a + a.adjoint()) * c(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    v
}

pub fn min_eigenvalue(a: &Dense) -> f64 {
    eigenvalues(a)[0]
}

/// `e^{s·A}` for Hermitian `A`.
pub fn exp_hermitian(a: &Dense, s: f64) -> Result<Dense> {
    hermitian_fn(a, |l| (s * l).exp())
}

/// `e^{-βH}`.
pub fn gibbs_operator(h: &Hamiltonian, beta: f64) -> Result<Dense> {
    exp_hermitian(&hamiltonian_dense(h)?, -beta)
}

/// `e^{-βH} / tr e^{-βH}`.
pub fn gibbs_density(h: &Hamiltonian, beta: f64) -> Result<Dense> {
    let hd = hamiltonian_dense(h)?;
    let eig = hd.symmetric_eigen();
    let shift = eig
        .eigenvalues
        .iter()
        .map(|&l| -beta * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let w = eig.eigenvalues.map(|l| (-beta * l - shift).exp());
    let z: f64 = w.iter().sum();
    let vals = Dense::from_diagonal(&w.map(|x| c(x / z)));
    Ok(&eig.eigenvectors * vals * eig.eigenvectors.adjoint())
}

/// `ln tr e^{-βH}` via a stable log-sum-exp over the spectrum.
pub fn log_partition(h: &Hamiltonian, beta: f64) -> Result<f64> {
    let hd = hamiltonian_dense(h)?;
    let vals = hd.symmetric_eigenvalues();
    let xs: Vec<f64> = vals.iter().map(|&l| -beta * l).collect();
    let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln())
}

/// Half the sum of singular values of `a − b`.
pub fn trace_distance(a: &Dense, b: &Dense) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let d = a - b;
    Ok(0.5 * d.singular_values().iter().sum::<f64>())
}

pub fn trace(a: &Dense) -> Complex64 {
    a.trace()
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn operator_norm(a: &Dense) -> f64 {
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// The `f_k` sequence: `f_0 = I`, `f_{t+1} = −[H, f_t] − f_t H_Q`.
///
/// `h_full` and `h_q` are dense matrices of the full and the `Q`-restricted
/// Hamiltonian. Returns `f_0 … f_k`.
pub fn f_sequence(h_full: &Dense, h_q: &Dense, k: usize) -> Vec<Dense> {
    let dim = h_full.nrows();
    let mut out = vec![Dense::identity(dim, dim)];
    for t in 0..k {
        let f = &out[t];
        let next = -(h_full * f - f * h_full) - f * h_q;
        out.push(next);
    }
    out
}

/// `T_{t_max,β} = Σ_{t ≤ t_max} β^t/t! f_t` for the Hamiltonian made of
/// `scope` (all terms if `None`) and the sub-Hamiltonian made of `q`.
pub fn truncated_series_dense(
    h: &Hamiltonian,
    scope: Option<&[usize]>,
    q: &[usize],
    beta: f64,
    t_max: usize,
) -> Result<Dense> {
    let full = match scope {
        Some(s) => terms_dense(h, s)?,
        None => hamiltonian_dense(h)?,
    };
    let hq = terms_dense(h, q)?;
    let fs = f_sequence(&full, &hq, t_max);
    let mut out = Dense::zeros(full.nrows(), full.ncols());
    let mut scale = 1.0;
    for (t, f) in fs.iter().enumerate() {
        if t > 0 {
            scale *= beta / t as f64;
        }
        out += f * c(scale);
    }
    Ok(out)
}

/// `e^{-βH} e^{β(H − H_Q)}` from two Hermitian exponentials.
pub fn propagator_dense(
    h: &Hamiltonian,
    scope: Option<&[usize]>,
    q: &[usize],
    beta: f64,
) -> Result<Dense> {
    let full = match scope {
        Some(s) => terms_dense(h, s)?,
        None => hamiltonian_dense(h)?,
    };
    let hq = terms_dense(h, q)?;
    let rest = &full - &hq;
    Ok(exp_hermitian(&full, -beta)? * exp_hermitian(&rest, beta)?)
}

/// Outcome of a two-sided PSD sandwich check.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    /// Whether `β` and `C` satisfy the stated preconditions.
    pub precondition_ok: bool,
    /// Minimum eigenvalue of `middle − lower_factor · outer`.
    pub lower_margin: f64,
    /// Minimum eigenvalue of `upper_factor · outer − middle`.
    pub upper_margin: f64,
    /// Both margins are above the PSD slack.
    pub holds: bool,
}

impl SandwichReport {
    /// Preconditions met and the inequality holds.
    pub fn passed(&self) -> bool {
        self.precondition_ok && self.holds
    }

    pub fn margin(&self) -> f64 {
        self.lower_margin.min(self.upper_margin)
    }
}

fn sandwich(lower: &Dense, middle: &Dense, upper: &Dense, precondition_ok: bool) -> SandwichReport {
    let lower_margin = min_eigenvalue(&(middle - lower));
    let upper_margin = min_eigenvalue(&(upper - middle));
    SandwichReport {
        precondition_ok,
        lower_margin,
        upper_margin,
        holds: lower_margin >= PSD_SLACK && upper_margin >= PSD_SLACK,
    }
}

/// Largest `β` allowed by the spectral-sandwich precondition `β < 1/(2C(Δ+1))`.
pub fn sandwich_beta_bound(h: &Hamiltonian, big_c: f64) -> f64 {
    1.0 / (2.0 * big_c * (h.degree() as f64 + 1.0))
}

/// Checks `(1 − 15/C) e^{−βH} ⪯ e^{−β(H − H_S)} ⪯ (1 + 15/C) e^{−βH}` where
/// `S = supp(E_{a*})` and `H_S` collects the terms touching `S`.
pub fn check_spectral_sandwich(
    h: &Hamiltonian,
    a_star: usize,
    beta: f64,
    big_c: f64,
) -> Result<SandwichReport> {
    check_size(h.n())?;
    if a_star >= h.num_terms() {
        return Err(Error::TermOutOfRange {
            index: a_star,
            m: h.num_terms(),
        });
    }
    let precondition_ok = big_c > 5.0 && beta < sandwich_beta_bound(h, big_c);
    let local = h.localized_terms(h.term(a_star).support());
    let full = hamiltonian_dense(h)?;
    let rest = &full - terms_dense(h, &local)?;
    let outer = exp_hermitian(&full, -beta)?;
    let middle = exp_hermitian(&rest, -beta)?;
    let lo = &outer * c(1.0 - 15.0 / big_c);
    let hi = &outer * c(1.0 + 15.0 / big_c);
    Ok(sandwich(&lo, &middle, &hi, precondition_ok))
}

/// Checks `(1 − 100/C^t) M ⪯ N ⪯ (1 + 100/C^t) M` with
/// `M = e^{−βH/2} P e^{−βH/2}` and
/// `N = e^{−β(H−H_S)/2} T† P T e^{−β(H−H_S)/2}`, `T = T_{t,β/2}(H, H_S)`.
pub fn check_peeling(
    h: &Hamiltonian,
    a_star: usize,
    p: &Dense,
    t: usize,
    beta: f64,
    big_c: f64,
) -> Result<SandwichReport> {
    check_size(h.n())?;
    if a_star >= h.num_terms() {
        return Err(Error::TermOutOfRange {
            index: a_star,
            m: h.num_terms(),
        });
    }
    let dim = 1usize << h.n();
    if p.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.nrows(),
        });
    }
    let spectrum = eigenvalues(p);
    let p_ok = spectrum[0] >= 0.5 - 1e-12 && spectrum[spectrum.len() - 1] <= 2.0 + 1e-12;
    let precondition_ok = p_ok && big_c > 5.0 && beta < sandwich_beta_bound(h, big_c);
    let local = h.localized_terms(h.term(a_star).support());
    let full = hamiltonian_dense(h)?;
    let rest = &full - terms_dense(h, &local)?;
    let half_full = exp_hermitian(&full, -beta / 2.0)?;
    let half_rest = exp_hermitian(&rest, -beta / 2.0)?;
    let tt = truncated_series_dense(h, None, &local, beta / 2.0, t)?;
    let m = &half_full * p * &half_full;
    let nn = &half_rest * tt.adjoint() * p * &tt * &half_rest;
    let eps = 100.0 / big_c.powi(t as i32);
    let lo = &m * c(1.0 - eps);
    let hi = &m * c(1.0 + eps);
    Ok(sandwich(&lo, &nn, &hi, precondition_ok))
}

/// Embeds an operator on the sites `s` (ascending) into the full space by
/// tensoring with identity. `local` is indexed with `s[0]` most significant.
pub fn embed(local: &Dense, s: &SiteSet, n: usize) -> Result<Dense> {
    check_size(n)?;
    let sites = s.to_vec();
    let k = sites.len();
    if local.nrows() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            got: local.nrows(),
        });
    }
    let dim = 1usize << n;
    let sub = |idx: usize| -> usize {
        sites
            .iter()
            .fold(0usize, |acc, &site| (acc << 1) | ((idx >> (n - 1 - site)) & 1))
    };
    let mask: usize = sites.iter().map(|&site| 1usize << (n - 1 - site)).sum();
    let mut out = Dense::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            if row & !mask == col & !mask {
                out[(row, col)] = local[(sub(row), sub(col))];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Term;
    use crate::pauli::Axis;

    fn kron_pauli(p: &PauliString) -> Dense {
        let one = c(1.0);
        let zero = c(0.0);
        let i = Complex64::new(0.0, 1.0);
        let mut m = Dense::from_element(1, 1, p.phase());
        for site in 0..p.n() {
            let f = match p.axis_at(site) {
                None => Dense::from_row_slice(2, 2, &[one, zero, zero, one]),
                Some(Axis::X) => Dense::from_row_slice(2, 2, &[zero, one, one, zero]),
                Some(Axis::Y) => Dense::from_row_slice(2, 2, &[zero, -i, i, zero]),
                Some(Axis::Z) => Dense::from_row_slice(2, 2, &[one, zero, zero, -one]),
            };
            m = m.kronecker(&f);
        }
        m
    }

    #[test]
    fn pauli_dense_matches_kronecker() {
        for s in ["+X0 Y1 Z2", "-iY0 Y2", "+iZ1", "+I", "-X0 X1 X2"] {
            let p = PauliString::parse(3, s).unwrap();
            assert_eq!(pauli_dense(&p).unwrap(), kron_pauli(&p), "{s}");
        }
    }

    #[test]
    fn single_z_gibbs_state_closed_form() {
        let h = Hamiltonian::build(1, 1, vec![Term::from_sparse(1, 1.0, &[(0, Axis::Z)]).unwrap()])
            .unwrap();
        let beta = 0.7;
        let rho = gibbs_density(&h, beta).unwrap();
        let z = 2.0 * beta.cosh();
        assert!((rho[(0, 0)].re - (-beta).exp() / z).abs() < 1e-14);
        assert!((rho[(1, 1)].re - beta.exp() / z).abs() < 1e-14);
        assert!(rho[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn zero_hamiltonian_gives_maximally_mixed() {
        let h = Hamiltonian::build(3, 1, vec![]).unwrap();
        let rho = gibbs_density(&h, 1.0).unwrap();
        assert!(max_abs_diff(&rho, &(identity(3) * c(1.0 / 8.0))) < 1e-14);
        assert!((log_partition(&h, 1.0).unwrap() - 8f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_basics() {
        let mut a = Dense::zeros(2, 2);
        a[(0, 0)] = c(1.0);
        let mut b = Dense::zeros(2, 2);
        b[(1, 1)] = c(1.0);
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &identity(2)).is_err());
    }

    #[test]
    fn embed_places_operator_on_sites() {
        let z = pauli_dense(&PauliString::parse(1, "Z0").unwrap()).unwrap();
        let full = embed(&z, &SiteSet::from_sites(3, [1]), 3).unwrap();
        let direct = pauli_dense(&PauliString::parse(3, "Z1").unwrap()).unwrap();
        assert_eq!(full, direct);
        let xz = pauli_dense(&PauliString::parse(2, "X0 Z1").unwrap()).unwrap();
        let full = embed(&xz, &SiteSet::from_sites(3, [0, 2]), 3).unwrap();
        let direct = pauli_dense(&PauliString::parse(3, "X0 Z2").unwrap()).unwrap();
        assert_eq!(full, direct);
    }
}
