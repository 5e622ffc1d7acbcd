//! Phased Pauli strings in the symplectic (x, z) bit representation.
//!
//! A [`PauliString`] on `n` qubits stores one X bit and one Z bit per site and
//! a global phase `i^phase_exp`. A site with both bits set carries `σ_y`, so a
//! string with an even phase exponent is Hermitian and one with an odd phase
//! exponent is anti-Hermitian. All products are exact: the phase is tracked as
//! an integer mod 4 by a single rule, [`PauliString::mul`].

use crate::error::{Error, Result};
use crate::sites::{word_count, SiteSet, Words};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A single-qubit Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    fn bits(self) -> (bool, bool) {
        match self {
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    #[inline]
    fn from_bits(x: bool, z: bool) -> Option<Axis> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis with a global phase in `{1, i, -1, -i}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Words,
    z: Words,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        PauliString {
            n,
            x: smallvec::smallvec![0; w],
            z: smallvec::smallvec![0; w],
            phase: 0,
        }
    }

    /// `σ_axis` on one site, identity elsewhere.
    pub fn single(n: usize, site: usize, axis: Axis) -> Result<Self> {
        Self::from_sparse(n, &[(site, axis)])
    }

    /// Builds a positively signed string from `(site, axis)` pairs.
    pub fn from_sparse(n: usize, ops: &[(usize, Axis)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(site, axis) in ops {
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n });
            }
            if p.axis_at(site).is_some() {
                return Err(Error::DuplicateSite { site });
            }
            let (xb, zb) = axis.bits();
            if xb {
                p.x[site / 64] |= 1 << (site % 64);
            }
            if zb {
                p.z[site / 64] |= 1 << (site % 64);
            }
        }
        Ok(p)
    }

    /// Builds a string from dense per-site labels (`None` = identity).
    pub fn from_labels(labels: &[Option<Axis>]) -> Self {
        let ops: Vec<(usize, Axis)> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|a| (i, a)))
            .collect();
        Self::from_sparse(labels.len(), &ops).expect("labels are in range and unique")
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp % 4;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the global phase `i^k`, in `0..4`.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> Complex64 {
        i_pow(self.phase)
    }

    #[inline]
    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        let (w, b) = (site / 64, site % 64);
        Axis::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    /// Sites acted on non-trivially.
    pub fn support(&self) -> SiteSet {
        let words: Words = self.x.iter().zip(&self.z).map(|(a, b)| a | b).collect();
        SiteSet::from_words(self.n, words)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// True when every site carries the identity (the phase may be anything).
    pub fn is_identity_string(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// The represented operator is Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Non-identity sites in ascending order with their axes.
    pub fn ops(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.support()
            .iter()
            .map(|s| (s, self.axis_at(s).expect("site in support")))
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// Exact operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    /// Product without the length check.
    ///
    /// Writing `σ(x, z) = i^{x·z} X^x Z^z` per site, the product phase is
    /// `p₁ + p₂ + |x₁∧z₁| + |x₂∧z₂| + 2|z₁∧x₂| − |x₃∧z₃|  (mod 4)`.
    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        debug_assert_eq!(self.n, other.n);
        let mut acc: u32 = self.phase as u32 + other.phase as u32;
        let mut x: Words = Words::with_capacity(self.x.len());
        let mut z: Words = Words::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            acc += (x1 & z1).count_ones();
            acc += (x2 & z2).count_ones();
            acc += 2 * (z1 & x2).count_ones();
            // Subtracting c is adding 3c mod 4.
            acc += 3 * (x3 & z3).count_ones();
            x.push(x3);
            z.push(z3);
        }
        PauliString {
            n: self.n,
            x,
            z,
            phase: (acc % 4) as u8,
        }
    }

    /// Operator adjoint: the same string with a conjugated phase.
    pub fn dagger(&self) -> PauliString {
        let mut p = self.clone();
        p.phase = (4 - p.phase) % 4;
        p
    }

    /// `tr(P) / 2^n`.
    pub fn normalized_trace(&self) -> Complex64 {
        if self.is_identity_string() {
            i_pow(self.phase)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// The same string with phase exponent 0.
    pub fn unsigned(&self) -> PauliString {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    /// Renders e.g. `+X0 Z3 Y4`; the identity renders as `+I`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Parses the format produced by [`PauliString::label`].
    pub fn parse(n: usize, s: &str) -> Result<PauliString> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let rest = rest.trim();
        if rest == "I" || rest.is_empty() {
            return Ok(PauliString::identity(n).with_phase(phase));
        }
        let mut ops = Vec::new();
        for tok in rest.split_whitespace() {
            let mut chars = tok.chars();
            let axis = match chars.next() {
                Some('X') => Axis::X,
                Some('Y') => Axis::Y,
                Some('Z') => Axis::Z,
                _ => return Err(Error::Parse(format!("bad Pauli token {tok:?}"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site in token {tok:?}")))?;
            ops.push((site, axis));
        }
        Ok(PauliString::from_sparse(n, &ops)?.with_phase(phase))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        if self.is_identity_string() {
            return f.write_str("I");
        }
        let mut first = true;
        for (site, axis) in self.ops() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}{}", axis.as_char(), site)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

#[inline]
pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A Hermitian Pauli string with sign ±1 (phase exponent 0 or 2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPauli(PauliString);

impl SignedPauli {
    /// Accepts `p` only if its phase is real.
    pub fn new(p: PauliString) -> Option<Self> {
        p.is_hermitian().then_some(SignedPauli(p))
    }

    pub fn identity(n: usize) -> Self {
        SignedPauli(PauliString::identity(n))
    }

    pub fn sign(&self) -> f64 {
        if self.0.phase == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_positive(&self) -> bool {
        self.0.phase == 0
    }

    pub fn string(&self) -> &PauliString {
        &self.0
    }

    pub fn into_string(self) -> PauliString {
        self.0
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedPauli({})", self.0)
    }
}

/// Result of symmetrizing `αP`: either exactly zero or `coeff · pauli`.
#[derive(Clone, Debug, PartialEq)]
pub enum HermitianPart {
    Zero,
    Term { coeff: f64, pauli: SignedPauli },
}

/// Computes `(αP + (αP)†)/2` for real `α`.
///
/// With `P = i^k Q` for a bare string `Q`, this is `α·Re(i^k)·Q`: zero when
/// `k` is odd, `±α Q` otherwise. The sign lives on the returned [`SignedPauli`].
pub fn hermitian_part(alpha: f64, p: &PauliString) -> HermitianPart {
    if !p.is_hermitian() {
        return HermitianPart::Zero;
    }
    HermitianPart::Term {
        coeff: alpha,
        pauli: SignedPauli(p.clone()),
    }
}

/// Free-function form of [`PauliString::mul`].
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.mul(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: &str) -> PauliString {
        PauliString::parse(n, s).unwrap()
    }

    #[test]
    fn x_times_y_is_i_z() {
        let x = p(1, "X0");
        let y = p(1, "Y0");
        assert_eq!(x.mul(&y).unwrap(), p(1, "+iZ0"));
        assert_eq!(y.mul(&x).unwrap(), p(1, "-iZ0"));
        assert_eq!(p(1, "Y0").mul(&p(1, "Z0")).unwrap(), p(1, "+iX0"));
        assert_eq!(p(1, "Z0").mul(&p(1, "X0")).unwrap(), p(1, "+iY0"));
    }

    #[test]
    fn identity_is_neutral() {
        let a = p(4, "-X0 Y2 Z3");
        let id = PauliString::identity(4);
        assert_eq!(a.mul(&id).unwrap(), a);
        assert_eq!(id.mul(&a).unwrap(), a);
    }

    #[test]
    fn xz_squared_is_identity() {
        let a = p(2, "X0 Z1");
        let sq = a.mul(&a).unwrap();
        assert!(sq.is_identity_string());
        assert_eq!(sq.phase_exp(), 0);
        assert!(sq.support().is_empty());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let err = p(2, "X0").mul(&p(3, "X0")).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 3
            }
        );
    }

    #[test]
    fn supports_and_traces() {
        assert!(PauliString::identity(5).support().is_empty());
        assert_eq!(p(5, "X3").support().to_vec(), vec![3]);
        assert_eq!(PauliString::identity(3).normalized_trace(), i_pow(0));
        assert_eq!(p(3, "Z1").normalized_trace(), Complex64::new(0.0, 0.0));
        assert_eq!(
            PauliString::identity(3).with_phase(2).normalized_trace(),
            Complex64::new(-1.0, 0.0)
        );
    }

    #[test]
    fn hermitian_part_cases() {
        let a = p(2, "X0 Y1");
        match hermitian_part(1.0, &a) {
            HermitianPart::Term { coeff, pauli } => {
                assert_eq!(coeff, 1.0);
                assert_eq!(pauli.string(), &a);
            }
            HermitianPart::Zero => panic!("expected a term"),
        }
        assert_eq!(hermitian_part(1.0, &a.clone().with_phase(1)), HermitianPart::Zero);
        assert_eq!(hermitian_part(0.5, &a.clone().with_phase(3)), HermitianPart::Zero);
        match hermitian_part(0.5, &a.clone().with_phase(2)) {
            HermitianPart::Term { coeff, pauli } => assert_eq!(coeff * pauli.sign(), -0.5),
            HermitianPart::Zero => panic!("expected a term"),
        }
    }

    #[test]
    fn label_round_trip() {
        for s in ["+X0 Z3 Y4", "-Y1", "+iZ0 Z1", "-iX2", "+I", "-I"] {
            assert_eq!(p(5, s).to_string(), s);
        }
        assert!(PauliString::parse(2, "Q0").is_err());
        assert!(PauliString::parse(2, "X0 X0").is_err());
        assert!(PauliString::parse(2, "X5").is_err());
    }

    #[test]
    fn wide_strings_cross_word_boundaries() {
        let a = p(130, "X0 Y64 Z129");
        let b = p(130, "Z0 Y64 X129");
        let ab = a.mul(&b).unwrap();
        // X·Z = -iY, Y·Y = I, Z·X = iY  → (-i)(i) = 1
        assert_eq!(ab, p(130, "Y0 Y129"));
        assert_eq!(a.weight(), 3);
    }
}
