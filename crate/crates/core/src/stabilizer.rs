//! Random stabilizer product states with a prescribed mean.
//!
//! For a configuration `σ = Π_i (I + c_i X_i)` with `|c_i r_i| ≤ 1`,
//! [`sample_state`] returns a product of single-qubit Pauli eigenstates whose
//! expected density matrix is `σ / tr σ`.

use crate::choice::{Draw, Source};
use crate::error::{Error, Result};
use crate::oracle::{self, Dense};
use crate::pauli::{Axis, PauliString};
use crate::pinning::{Configuration, MonomialValue};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One qubit in the `sign` eigenstate of `σ_axis`, i.e. `(I + sign·σ_axis)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteState {
    pub axis: Axis,
    pub sign: i8,
}

impl SiteState {
    /// The six single-qubit stabilizer states, indexed `0..6`.
    pub fn from_index(i: usize) -> SiteState {
        SiteState {
            axis: Axis::ALL[i / 2],
            sign: if i % 2 == 0 { 1 } else { -1 },
        }
    }

    pub fn index(&self) -> usize {
        let a = match self.axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        2 * a + usize::from(self.sign < 0)
    }
}

impl std::fmt::Display for SiteState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{sign}{}", self.axis.as_char())
    }
}

/// A tensor product of single-qubit stabilizer states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductState {
    pub sites: Vec<SiteState>,
}

impl ProductState {
    pub fn n(&self) -> usize {
        self.sites.len()
    }

    /// Dense density matrix `⊗_j (I + s_j σ_j)/2`.
    pub fn to_dense(&self) -> Result<Dense> {
        let n = self.n();
        let mut out = oracle::identity(n);
        let half = Complex64::new(0.5, 0.0);
        for (j, s) in self.sites.iter().enumerate() {
            let p = oracle::pauli_dense(&PauliString::single(n, j, s.axis)?)?;
            let f = (oracle::identity(n) + p * Complex64::new(s.sign as f64, 0.0)) * half;
            out *= f;
        }
        Ok(out)
    }

    /// Space-separated site labels such as `+X -Z +Y`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.sites.iter().map(ToString::to_string).collect();
        parts.join(" ")
    }

    /// Base-6 code of the state with site 0 most significant.
    pub fn code(&self) -> usize {
        self.sites.iter().fold(0, |acc, s| acc * 6 + s.index())
    }

    pub fn from_code(n: usize, mut code: usize) -> ProductState {
        let mut sites = vec![SiteState::from_index(0); n];
        for j in (0..n).rev() {
            sites[j] = SiteState::from_index(code % 6);
            code /= 6;
        }
        ProductState { sites }
    }
}

/// Draws a product state with `E[ρ] = σ / tr σ`.
///
/// A block `I + q P` with `P` a non-identity Pauli string and `q = c·r` is
/// emitted, with probability `|q|`, as a uniformly random sign string on
/// `supp(P)` with parity `sign(q)` in the eigenbases of `P`; otherwise its
/// sites are maximally mixed. Every remaining site is a uniform draw from
/// the six stabilizer states.
pub fn sample_state<S: Source + ?Sized>(
    config: &Configuration,
    src: &mut S,
) -> Result<ProductState> {
    let n = config.n;
    let mut sites: Vec<Option<SiteState>> = vec![None; n];
    for (i, b) in config.blocks.iter().enumerate() {
        let (r, pauli) = match &b.x.value {
            MonomialValue::Pauli { r, pauli } if !pauli.is_identity_string() => (*r, pauli),
            _ => continue,
        };
        let q = b.c * r;
        if q.abs() > 1.0 + 1e-12 {
            return Err(Error::Invariant(format!(
                "block {i}: |c·r| = {} exceeds 1",
                q.abs()
            )));
        }
        if src.draw(Draw::Coin(q.abs().min(1.0))) == 0 {
            continue;
        }
        let ops: Vec<(usize, Axis)> = pauli.ops().collect();
        let mut parity_negative = q < 0.0;
        let last = ops.len() - 1;
        for (k, &(site, axis)) in ops.iter().enumerate() {
            let negative = if k < last {
                let bit = src.draw(Draw::Uniform(2)) == 1;
                parity_negative ^= bit;
                bit
            } else {
                parity_negative
            };
            sites[site] = Some(SiteState {
                axis,
                sign: if negative { -1 } else { 1 },
            });
        }
    }
    let sites = sites
        .into_iter()
        .map(|s| match s {
            Some(s) => s,
            None => SiteState::from_index(src.draw(Draw::Uniform(6))),
        })
        .collect();
    Ok(ProductState { sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::Replay;
    use crate::pinning::{Block, HermitianMonomial};
    use crate::sites::SiteSet;

    fn expected_density(config: &Configuration) -> Dense {
        let mut acc = Dense::zeros(1 << config.n, 1 << config.n);
        let branches =
            Replay::enumerate(1 << 20, |s| sample_state(config, s).unwrap()).unwrap();
        for (p, st) in branches {
            acc += st.to_dense().unwrap() * Complex64::new(p, 0.0);
        }
        acc
    }

    fn zz_block(c: f64) -> Configuration {
        Configuration {
            n: 2,
            blocks: vec![Block {
                c,
                x: HermitianMonomial {
                    value: MonomialValue::Pauli {
                        r: 1.0,
                        pauli: PauliString::parse(2, "Z0 Z1").unwrap(),
                    },
                    terms: vec![0],
                    formal_support: SiteSet::full(2),
                },
            }],
        }
    }

    #[test]
    fn empty_configuration_is_maximally_mixed() {
        let config = Configuration::empty(2);
        let rho = expected_density(&config);
        let target = oracle::identity(2) * Complex64::new(0.25, 0.0);
        assert!(oracle::max_abs_diff(&rho, &target) < 1e-14);
    }

    #[test]
    fn zz_block_gives_correlated_mixture() {
        let config = zz_block(1.0);
        let rho = expected_density(&config);
        let zz = oracle::pauli_dense(&PauliString::parse(2, "Z0 Z1").unwrap()).unwrap();
        let target = (oracle::identity(2) + zz) * Complex64::new(0.25, 0.0);
        assert!(oracle::max_abs_diff(&rho, &target) < 1e-14);
    }

    #[test]
    fn correlated_signs_have_even_parity() {
        let config = zz_block(1.0);
        let branches = Replay::enumerate(100, |s| sample_state(&config, s).unwrap()).unwrap();
        for (_, st) in branches {
            assert_eq!(st.sites[0].sign * st.sites[1].sign, 1);
        }
    }

    #[test]
    fn zero_block_is_maximally_mixed() {
        let mut config = zz_block(0.3);
        config.blocks[0].x.value = MonomialValue::Zero;
        let rho = expected_density(&config);
        let target = oracle::identity(2) * Complex64::new(0.25, 0.0);
        assert!(oracle::max_abs_diff(&rho, &target) < 1e-14);
    }

    #[test]
    fn labels() {
        assert_eq!(ProductState::from_code(2, 5).label(), "+X -Z");
    }

    #[test]
    fn codes_round_trip() {
        for code in [0, 1, 35, 200, 1295] {
            assert_eq!(ProductState::from_code(4, code).code(), code);
        }
    }

    #[test]
    fn oversized_coefficient_is_rejected() {
        use rand::SeedableRng;
        let config = zz_block(1.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(sample_state(&config, &mut rng).is_err());
    }
}
