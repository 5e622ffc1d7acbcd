//! Local Hamiltonians with Pauli terms and their dual interaction graph.

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString, SignedPauli};
use crate::sites::SiteSet;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// One term `λ · E` with `|λ| ≤ 1` and `E` a positively signed Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub pauli: SignedPauli,
    support: SiteSet,
}

impl Term {
    /// Validates that `pauli` is Hermitian with sign `+1`.
    pub fn new(coeff: f64, pauli: PauliString) -> Result<Term> {
        if pauli.phase_exp() != 0 {
            return Err(Error::NonHermitianTerm { index: 0 });
        }
        let support = pauli.support();
        Ok(Term {
            coeff,
            pauli: SignedPauli::new(pauli).expect("phase checked"),
            support,
        })
    }

    pub fn from_sparse(n: usize, coeff: f64, ops: &[(usize, Axis)]) -> Result<Term> {
        Term::new(coeff, PauliString::from_sparse(n, ops)?)
    }

    pub fn support(&self) -> &SiteSet {
        &self.support
    }

    pub fn string(&self) -> &PauliString {
        self.pauli.string()
    }
}

/// Which critical inverse temperature to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalMode {
    /// `1/(100ΔK)`: the separability sampler.
    Separability,
    /// `1/(200ΔK)`: the tree-walk sampler, where every block coefficient stays ≤ 1/2.
    Sampling,
    /// `1/(100Δ)`: the cluster-expansion estimator.
    Cluster,
}

impl CriticalMode {
    pub fn name(self) -> &'static str {
        match self {
            CriticalMode::Separability => "separability",
            CriticalMode::Sampling => "sampling",
            CriticalMode::Cluster => "cluster",
        }
    }
}

/// A `K`-local Hamiltonian `H = Σ_a λ_a E_a` on `n` qubits.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    n: usize,
    locality: usize,
    terms: Vec<Term>,
    adjacency: Vec<Vec<usize>>,
    site_index: Vec<Vec<usize>>,
    degree: usize,
}

impl Hamiltonian {
    /// Validates the terms and precomputes the dual interaction graph.
    pub fn build(n: usize, locality: usize, terms: Vec<Term>) -> Result<Hamiltonian> {
        if locality == 0 {
            return Err(Error::InvalidInput("locality must be at least 1".into()));
        }
        let mut site_index = vec![Vec::new(); n];
        for (index, term) in terms.iter().enumerate() {
            if term.pauli.string().n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: term.pauli.string().n(),
                });
            }
            if !(term.coeff.abs() <= 1.0) {
                return Err(Error::CoefficientOutOfRange {
                    index,
                    coeff: term.coeff,
                });
            }
            if !term.pauli.is_positive() {
                return Err(Error::NonHermitianTerm { index });
            }
            let size = term.support.len();
            if size == 0 {
                return Err(Error::InvalidInput(format!(
                    "term {index} is a multiple of the identity"
                )));
            }
            if size > locality {
                return Err(Error::LocalityExceeded {
                    index,
                    size,
                    locality,
                });
            }
            for s in term.support.iter() {
                site_index[s].push(index);
            }
        }
        let m = terms.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); m];
        for touching in &site_index {
            for (i, &a) in touching.iter().enumerate() {
                for &b in &touching[i + 1..] {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        let degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Hamiltonian {
            n,
            locality,
            terms,
            adjacency,
            site_index,
            degree,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Declared locality `K`.
    pub fn locality(&self) -> usize {
        self.locality
    }

    /// Dual-graph degree `Δ`, computed from the terms.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, a: usize) -> &Term {
        &self.terms[a]
    }

    /// Terms whose support intersects that of `a`, excluding `a`, ascending.
    pub fn neighbors(&self, a: usize) -> &[usize] {
        &self.adjacency[a]
    }

    /// Terms acting on `site`, ascending.
    pub fn terms_at(&self, site: usize) -> &[usize] {
        &self.site_index[site]
    }

    /// Terms supported inside `s`.
    pub fn restricted_terms(&self, s: &SiteSet) -> Vec<usize> {
        (0..self.terms.len())
            .filter(|&a| self.terms[a].support.is_subset(s))
            .collect()
    }

    /// Terms whose support meets `s`.
    pub fn localized_terms(&self, s: &SiteSet) -> Vec<usize> {
        let mut out: Vec<usize> = s
            .iter()
            .flat_map(|site| self.site_index[site].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `Δ` with zero replaced by one, for thresholds that divide by it.
    pub fn effective_degree(&self) -> usize {
        self.degree.max(1)
    }

    pub fn critical_beta(&self, mode: CriticalMode) -> f64 {
        let d = self.effective_degree() as f64;
        let k = self.locality as f64;
        match mode {
            CriticalMode::Separability => 1.0 / (100.0 * d * k),
            CriticalMode::Sampling => 1.0 / (200.0 * d * k),
            CriticalMode::Cluster => 1.0 / (100.0 * d),
        }
    }

    /// `1/(50(Δ+1)K)`, the scale in the per-step coefficient potential.
    pub fn potential_beta(&self) -> f64 {
        1.0 / (50.0 * (self.degree as f64 + 1.0) * self.locality as f64)
    }

    /// The Hamiltonian made of the listed terms only, on the same sites.
    pub fn subset(&self, terms: &[usize]) -> Hamiltonian {
        let ts = terms.iter().map(|&a| self.terms[a].clone()).collect();
        Hamiltonian::build(self.n, self.locality, ts).expect("subset of a valid Hamiltonian")
    }

    /// Checks a declared degree against the computed one.
    pub fn validate_degree(&self, declared: usize) -> Result<()> {
        if declared != self.degree {
            return Err(Error::DegreeMismatch {
                declared,
                computed: self.degree,
            });
        }
        Ok(())
    }

    /// Writes the line-oriented JSON format: a header, then one line per term.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = FileHeader {
            n: self.n,
            locality: self.locality,
            degree: Some(self.degree),
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for t in &self.terms {
            let rec = TermRecord {
                coeff: t.coeff,
                paulis: t
                    .string()
                    .ops()
                    .map(|(site, axis)| SiteOp { site, axis })
                    .collect(),
            };
            writeln!(w, "{}", serde_json::to_string(&rec)?)?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// Parses the format written by [`Hamiltonian::write_jsonl`].
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Hamiltonian> {
        let mut lines = r.lines();
        let header_line = loop {
            match lines.next() {
                None => return Err(Error::Parse("missing header line".into())),
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
            }
        };
        let header: FileHeader = serde_json::from_str(&header_line)?;
        let mut terms = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let index = terms.len();
            let rec: TermRecord = serde_json::from_str(&line)?;
            for pair in rec.paulis.windows(2) {
                if pair[0].site == pair[1].site {
                    return Err(Error::DuplicateSite { site: pair[0].site });
                }
                if pair[0].site > pair[1].site {
                    return Err(Error::Parse(format!(
                        "term {index}: Pauli list is not sorted by site"
                    )));
                }
            }
            let ops: Vec<(usize, Axis)> = rec.paulis.iter().map(|p| (p.site, p.axis)).collect();
            let pauli = PauliString::from_sparse(header.n, &ops)?;
            terms.push(Term::new(rec.coeff, pauli)?);
        }
        let h = Hamiltonian::build(header.n, header.locality, terms)?;
        if let Some(d) = header.degree {
            h.validate_degree(d)?;
        }
        Ok(h)
    }

    pub fn from_jsonl_str(s: &str) -> Result<Hamiltonian> {
        Hamiltonian::read_jsonl(s.as_bytes())
    }
}

#[derive(Serialize, Deserialize)]
struct FileHeader {
    n: usize,
    locality: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct SiteOp {
    site: usize,
    axis: Axis,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coeff: f64,
    paulis: Vec<SiteOp>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz_chain(n: usize) -> Hamiltonian {
        let terms = (0..n - 1)
            .map(|i| Term::from_sparse(n, 1.0, &[(i, Axis::Z), (i + 1, Axis::Z)]).unwrap())
            .collect();
        Hamiltonian::build(n, 2, terms).unwrap()
    }

    #[test]
    fn three_site_chain_graph() {
        let h = zz_chain(3);
        assert_eq!(h.neighbors(0), &[1]);
        assert_eq!(h.neighbors(1), &[0]);
        assert_eq!(h.degree(), 1);
        assert_eq!(h.terms_at(1), &[0, 1]);
    }

    #[test]
    fn single_term_has_no_neighbors() {
        let h = Hamiltonian::build(
            2,
            1,
            vec![Term::from_sparse(2, 0.5, &[(1, Axis::X)]).unwrap()],
        )
        .unwrap();
        assert_eq!(h.degree(), 0);
        assert!(h.neighbors(0).is_empty());
    }

    #[test]
    fn restricted_and_localized() {
        let h = zz_chain(3);
        assert_eq!(h.restricted_terms(&SiteSet::full(3)), vec![0, 1]);
        assert!(h.restricted_terms(&SiteSet::empty(3)).is_empty());
        assert_eq!(h.restricted_terms(&SiteSet::from_sites(3, [0, 1])), vec![0]);
        assert!(h.localized_terms(&SiteSet::empty(3)).is_empty());
        assert_eq!(h.localized_terms(&SiteSet::from_sites(3, [1])), vec![0, 1]);
    }

    #[test]
    fn critical_betas() {
        // Δ = 2, K = 2: a 4-site ZZ chain has middle term degree 2.
        let h = zz_chain(4);
        assert_eq!(h.degree(), 2);
        assert_eq!(h.critical_beta(CriticalMode::Separability), 1.0 / 400.0);
        assert_eq!(h.critical_beta(CriticalMode::Sampling), 1.0 / 800.0);
        assert_eq!(h.critical_beta(CriticalMode::Cluster), 1.0 / 200.0);
    }

    #[test]
    fn rejects_invalid_terms() {
        let t = Term::from_sparse(2, 1.5, &[(0, Axis::Z)]).unwrap();
        assert!(matches!(
            Hamiltonian::build(2, 1, vec![t]),
            Err(Error::CoefficientOutOfRange { .. })
        ));
        let t = Term::from_sparse(3, 1.0, &[(0, Axis::Z), (2, Axis::X)]).unwrap();
        assert!(matches!(
            Hamiltonian::build(3, 1, vec![t]),
            Err(Error::LocalityExceeded { .. })
        ));
        assert!(Term::from_sparse(2, 1.0, &[(2, Axis::Z)]).is_err());
        assert!(Term::new(1.0, PauliString::parse(2, "-Z0").unwrap()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let h = zz_chain(4);
        let s = h.to_jsonl_string();
        let back = Hamiltonian::from_jsonl_str(&s).unwrap();
        assert_eq!(back.to_jsonl_string(), s);
        let bad = s.replace("\"degree\":2", "\"degree\":3");
        assert!(matches!(
            Hamiltonian::from_jsonl_str(&bad),
            Err(Error::DegreeMismatch { .. })
        ));
        let dup = "{\"n\":2,\"locality\":2}\n{\"coeff\":1.0,\"paulis\":[{\"site\":0,\"axis\":\"X\"},{\"site\":0,\"axis\":\"Z\"}]}\n";
        assert!(matches!(
            Hamiltonian::from_jsonl_str(dup),
            Err(Error::DuplicateSite { site: 0 })
        ));
        let unsorted = "{\"n\":2,\"locality\":2}\n{\"coeff\":1.0,\"paulis\":[{\"site\":1,\"axis\":\"X\"},{\"site\":0,\"axis\":\"Z\"}]}\n";
        assert!(Hamiltonian::from_jsonl_str(unsorted).is_err());
    }
}
