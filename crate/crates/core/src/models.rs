//! Standard benchmark Hamiltonians.

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Term};
use crate::pauli::Axis;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Open transverse-field Ising chain: `Z_i Z_{i+1}` on every bond, then `X_i` on every site.
pub fn chain_tfim(n: usize) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidInput("chain needs at least 2 sites".into()));
    }
    let mut terms = Vec::with_capacity(2 * n - 1);
    for i in 0..n - 1 {
        terms.push(Term::from_sparse(n, 1.0, &[(i, Axis::Z), (i + 1, Axis::Z)])?);
    }
    for i in 0..n {
        terms.push(Term::from_sparse(n, 1.0, &[(i, Axis::X)])?);
    }
    Hamiltonian::build(n, 2, terms)
}

/// Nearest-neighbour `ZZ` couplings on an open `rows × cols` grid (row-major sites).
pub fn grid_zz(rows: usize, cols: usize) -> Result<Hamiltonian> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 sites".into()));
    }
    let n = rows * cols;
    let mut terms = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let s = r * cols + c;
            if c + 1 < cols {
                terms.push(Term::from_sparse(n, 1.0, &[(s, Axis::Z), (s + 1, Axis::Z)])?);
            }
            if r + 1 < rows {
                terms.push(Term::from_sparse(n, 1.0, &[(s, Axis::Z), (s + cols, Axis::Z)])?);
            }
        }
    }
    Hamiltonian::build(n, 2, terms)
}

/// Open Heisenberg chain with separate `XX`, `YY`, `ZZ` terms on every bond.
pub fn heisenberg_chain(n: usize) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidInput("chain needs at least 2 sites".into()));
    }
    let mut terms = Vec::with_capacity(3 * (n - 1));
    for i in 0..n - 1 {
        for axis in Axis::ALL {
            terms.push(Term::from_sparse(n, 1.0, &[(i, axis), (i + 1, axis)])?);
        }
    }
    Hamiltonian::build(n, 2, terms)
}

/// `m` random terms, each on `1..=k` uniformly chosen distinct sites with uniform
/// random axes and a coefficient uniform in `[lo, hi]`.
pub fn random_klocal(n: usize, m: usize, k: usize, lo: f64, hi: f64, seed: u64) -> Result<Hamiltonian> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("locality {k} must be in 1..={n}")));
    }
    if !(-1.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "coefficient range [{lo}, {hi}] must lie inside [-1, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(m);
    for _ in 0..m {
        let size = rng.random_range(1..=k);
        let mut sites = sample(&mut rng, n, size).into_vec();
        sites.sort_unstable();
        let ops: Vec<(usize, Axis)> = sites
            .into_iter()
            .map(|s| (s, Axis::ALL[rng.random_range(0..3)]))
            .collect();
        let coeff = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        terms.push(Term::from_sparse(n, coeff, &ops)?);
    }
    Hamiltonian::build(n, k, terms)
}

/// Seeds of the fixed regression corpus.
pub const REGRESSION_SEEDS: [u64; 20] = [
    11, 23, 37, 41, 53, 67, 71, 89, 97, 101, 113, 127, 131, 149, 157, 163, 179, 181, 191, 199,
];

/// Twenty small random instances (`n = 5`, 2-local, 4–6 terms) used by the structural checks.
pub fn regression_corpus() -> Vec<Hamiltonian> {
    REGRESSION_SEEDS
        .iter()
        .map(|&seed| {
            let m = 4 + (seed % 3) as usize;
            random_klocal(5, m, 2, -1.0, 1.0, seed).expect("valid corpus parameters")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_chain_counts() {
        let h = chain_tfim(4).unwrap();
        assert_eq!(h.num_terms(), 7);
        assert_eq!(h.degree(), 4);
        assert_eq!(h.locality(), 2);
    }

    #[test]
    fn small_grid_counts() {
        let h = grid_zz(2, 2).unwrap();
        assert_eq!(h.num_terms(), 4);
        assert_eq!(h.degree(), 2);
    }

    #[test]
    fn heisenberg_terms_per_bond() {
        let h = heisenberg_chain(3).unwrap();
        assert_eq!(h.num_terms(), 6);
        // Each bond term touches the two other terms on its bond and the three on the next.
        assert_eq!(h.degree(), 5);
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_klocal(6, 5, 3, -0.5, 0.5, 9).unwrap();
        let b = random_klocal(6, 5, 3, -0.5, 0.5, 9).unwrap();
        assert_eq!(a.to_jsonl_string(), b.to_jsonl_string());
        assert!(a.terms().iter().all(|t| t.coeff.abs() <= 0.5 && t.support().len() <= 3));
        let one_local = random_klocal(4, 3, 1, 1.0, 1.0, 0).unwrap();
        assert!(one_local.terms().iter().all(|t| t.support().len() == 1));
        assert!(random_klocal(3, 2, 4, 0.0, 1.0, 0).is_err());
        assert!(random_klocal(3, 2, 2, 0.0, 1.5, 0).is_err());
    }
}
