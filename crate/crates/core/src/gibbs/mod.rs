//! Finite Gibbs structures: per-vertex alphabets plus local energy tables.
//!
//! Energies are in nats of negative log-weight: a configuration `ω` has
//! weight `exp(−Σ_T Φ_T(ω))`. Pinning a vertex restricts its admissible
//! symbols to one but keeps the original alphabet, so measures of a pinned
//! structure still live on the original configuration space.

mod kernel;
mod random;
mod table;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

pub use self::kernel::site_conditional;
pub use self::random::{random_structure, RandomShape};
pub use self::table::{MixedRadix, ProbTable};
use crate::{Error, Result};

/// Ordered finite list of distinct symbol labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Structure("alphabet must not be empty".into()));
        }
        for (i, a) in symbols.iter().enumerate() {
            if symbols[..i].contains(a) {
                return Err(Error::Structure(alloc::format!("duplicate symbol `{a}`")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// `{-1, +1}` with `-1` at index 0.
    pub fn ising() -> Self {
        Alphabet {
            symbols: alloc::vec!["-1".to_string(), "+1".to_string()],
        }
    }

    /// Symbols `0 .. size-1`.
    pub fn indexed(size: usize) -> Self {
        Alphabet {
            symbols: (0..size.max(1)).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

/// Spin value `±1` of an Ising symbol index.
#[inline]
pub fn spin(index: usize) -> f64 {
    if index == 0 {
        -1.0
    } else {
        1.0
    }
}

/// A local energy `Φ_T` stored as a row-major table over `∏_{v∈T} A_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTerm {
    support: Vec<usize>,
    table: Vec<f64>,
}

impl EnergyTerm {
    /// Size and finiteness are checked when the term joins a structure.
    pub fn new(support: Vec<usize>, table: Vec<f64>) -> Self {
        EnergyTerm { support, table }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&x| x == 0.0)
    }

    /// Same term with `c` added to every entry.
    pub fn shifted(&self, c: f64) -> EnergyTerm {
        EnergyTerm {
            support: self.support.clone(),
            table: self.table.iter().map(|x| x + c).collect(),
        }
    }
}

/// A full assignment of symbol indices, one per vertex of some vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn new(values: Vec<usize>) -> Self {
        Configuration(values)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Configuration {
    type Target = Vec<usize>;

    fn deref(&self) -> &Vec<usize> {
        &self.0
    }
}

impl DerefMut for Configuration {
    fn deref_mut(&mut self) -> &mut Vec<usize> {
        &mut self.0
    }
}

impl From<Vec<usize>> for Configuration {
    fn from(v: Vec<usize>) -> Self {
        Configuration(v)
    }
}

#[derive(Clone, Debug)]
struct TermLayout {
    strides: Vec<usize>,
}

/// Vertex set `0..n`, per-vertex alphabets, and a finite list of energy terms.
#[derive(Clone, Debug)]
pub struct GibbsStructure {
    alphabets: Vec<Alphabet>,
    pinned: Vec<Option<usize>>,
    terms: Vec<EnergyTerm>,
    layouts: Vec<TermLayout>,
    incident: Vec<Vec<usize>>,
}

impl PartialEq for GibbsStructure {
    fn eq(&self, other: &Self) -> bool {
        self.alphabets == other.alphabets
            && self.pinned == other.pinned
            && self.terms == other.terms
    }
}

impl GibbsStructure {
    pub fn new(alphabets: Vec<Alphabet>, terms: Vec<EnergyTerm>) -> Result<Self> {
        let n = alphabets.len();
        Self::build(alphabets, alloc::vec![None; n], terms)
    }

    /// Every vertex gets the same alphabet.
    pub fn uniform(n: usize, alphabet: Alphabet, terms: Vec<EnergyTerm>) -> Result<Self> {
        Self::new(alloc::vec![alphabet; n], terms)
    }

    fn build(
        alphabets: Vec<Alphabet>,
        pinned: Vec<Option<usize>>,
        terms: Vec<EnergyTerm>,
    ) -> Result<Self> {
        let n = alphabets.len();
        let mut layouts = Vec::with_capacity(terms.len());
        let mut incident = alloc::vec![Vec::new(); n];
        for (t, term) in terms.iter().enumerate() {
            for (k, &v) in term.support.iter().enumerate() {
                if v >= n {
                    return Err(Error::Structure(alloc::format!(
                        "term {t} references vertex {v} outside 0..{n}"
                    )));
                }
                if term.support[..k].contains(&v) {
                    return Err(Error::Structure(alloc::format!(
                        "term {t} lists vertex {v} twice"
                    )));
                }
            }
            let radices: Vec<usize> = term.support.iter().map(|&v| alphabets[v].len()).collect();
            let layout = MixedRadix::new(radices);
            if layout.len() != term.table.len() {
                return Err(Error::Structure(alloc::format!(
                    "term {t} has {} entries, support needs {}",
                    term.table.len(),
                    layout.len()
                )));
            }
            if term.table.iter().any(|x| !x.is_finite()) {
                return Err(Error::Structure(alloc::format!("term {t} has a non-finite entry")));
            }
            for &v in &term.support {
                incident[v].push(t);
            }
            layouts.push(TermLayout {
                strides: layout.strides().to_vec(),
            });
        }
        Ok(GibbsStructure {
            alphabets,
            pinned,
            terms,
            layouts,
            incident,
        })
    }

    pub fn len(&self) -> usize {
        self.alphabets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabets.is_empty()
    }

    pub fn alphabet(&self, v: usize) -> &Alphabet {
        &self.alphabets[v]
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.alphabets
    }

    /// Size of the original alphabet at `v` (pinning does not change it).
    pub fn radix(&self, v: usize) -> usize {
        self.alphabets[v].len()
    }

    pub fn radices(&self) -> Vec<usize> {
        self.alphabets.iter().map(Alphabet::len).collect()
    }

    pub fn pinned(&self, v: usize) -> Option<usize> {
        self.pinned[v]
    }

    /// Whether symbol `a` is admissible at `v`.
    #[inline]
    pub fn allows(&self, v: usize, a: usize) -> bool {
        match self.pinned[v] {
            Some(p) => p == a,
            None => a < self.alphabets[v].len(),
        }
    }

    /// Number of admissible symbols at `v`.
    pub fn allowed_count(&self, v: usize) -> usize {
        if self.pinned[v].is_some() {
            1
        } else {
            self.alphabets[v].len()
        }
    }

    pub fn terms(&self) -> &[EnergyTerm] {
        &self.terms
    }

    /// Indices of the terms whose support contains `v`.
    pub fn incident_terms(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    #[inline]
    pub(crate) fn term_index(&self, t: usize, omega: &[usize]) -> usize {
        self.terms[t]
            .support
            .iter()
            .zip(&self.layouts[t].strides)
            .map(|(&v, s)| omega[v] * s)
            .sum()
    }

    #[inline]
    pub(crate) fn term_stride_of(&self, t: usize, v: usize) -> usize {
        let k = self.terms[t].support.iter().position(|&u| u == v).unwrap();
        self.layouts[t].strides[k]
    }

    /// `Φ_T(ω)` for term `t` and a full configuration.
    #[inline]
    pub fn term_value(&self, t: usize, omega: &[usize]) -> f64 {
        self.terms[t].table[self.term_index(t, omega)]
    }

    /// Checks that `omega` assigns every vertex an admissible symbol.
    pub fn check_configuration(&self, omega: &[usize]) -> Result<()> {
        if omega.len() != self.len() {
            return Err(Error::Argument(alloc::format!(
                "configuration has {} entries, structure has {} vertices",
                omega.len(),
                self.len()
            )));
        }
        for (v, &a) in omega.iter().enumerate() {
            if a >= self.radix(v) {
                return Err(Error::Argument(alloc::format!(
                    "symbol {a} out of range at vertex {v}"
                )));
            }
        }
        Ok(())
    }

    /// Boundary `∂Λ`: union of `T \ Λ` over non-zero terms meeting `Λ`.
    pub fn boundary(&self, lambda: &[usize]) -> Vec<usize> {
        let inside = |v: &usize| lambda.contains(v);
        let mut out: Vec<usize> = lambda
            .iter()
            .flat_map(|&v| self.incident[v].iter())
            .filter(|&&t| !self.terms[t].is_zero())
            .flat_map(|&t| self.terms[t].support.iter().copied())
            .filter(|v| !inside(v))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Connected components of the graph joining vertices that share a
    /// non-zero term, each sorted, listed by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for t in self.terms.iter().filter(|t| !t.is_zero()) {
            if let Some((&first, rest)) = t.support.split_first() {
                for &u in rest {
                    let (a, b) = (root(&mut parent, first), root(&mut parent, u));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = alloc::vec![usize::MAX; n];
        for v in 0..n {
            let r = root(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(v);
        }
        groups
    }

    /// Sub-structure on `vertices`, relabelled `0..k` in the given order,
    /// keeping pins and the terms whose support lies inside.
    pub fn restricted(&self, vertices: &[usize]) -> Result<GibbsStructure> {
        let mut label = alloc::vec![usize::MAX; self.len()];
        for (k, &v) in vertices.iter().enumerate() {
            if v >= self.len() || label[v] != usize::MAX {
                return Err(Error::Argument(alloc::format!("vertex {v} out of range or repeated")));
            }
            label[v] = k;
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| t.support.iter().all(|&v| label[v] != usize::MAX))
            .map(|t| EnergyTerm::new(t.support.iter().map(|&v| label[v]).collect(), t.table.clone()))
            .collect();
        Self::build(
            vertices.iter().map(|&v| self.alphabets[v].clone()).collect(),
            vertices.iter().map(|&v| self.pinned[v]).collect(),
            terms,
        )
    }

    /// Pins every vertex of `set` to its value in `omega` (`Γ_{S,ω}`).
    pub fn pin(&self, set: &[usize], omega: &[usize]) -> Result<GibbsStructure> {
        let mut pinned = self.pinned.clone();
        for &v in set {
            if v >= self.len() {
                return Err(Error::Argument(alloc::format!("vertex {v} out of range")));
            }
            let a = omega[v];
            if a >= self.radix(v) {
                return Err(Error::Argument(alloc::format!(
                    "symbol {a} out of range at vertex {v}"
                )));
            }
            pinned[v] = Some(a);
        }
        Ok(GibbsStructure {
            pinned,
            ..self.clone()
        })
    }

    /// The same structure with no pins.
    pub fn unpinned(&self) -> GibbsStructure {
        GibbsStructure {
            pinned: alloc::vec![None; self.len()],
            ..self.clone()
        }
    }

    /// Copy with term `t` replaced.
    pub fn with_term(&self, t: usize, term: EnergyTerm) -> Result<GibbsStructure> {
        let mut terms = self.terms.clone();
        terms[t] = term;
        Self::build(self.alphabets.clone(), self.pinned.clone(), terms)
    }

    /// Total energy `U(ω) = Σ_T Φ_T(ω)`.
    pub fn energy(&self, omega: &[usize]) -> f64 {
        (0..self.terms.len()).map(|t| self.term_value(t, omega)).sum()
    }

    /// Base-e log of the number of admissible configurations.
    pub fn log_state_count(&self) -> f64 {
        (0..self.len())
            .map(|v| crate::math::ln(self.allowed_count(v) as f64))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ising_edge(beta: f64) -> GibbsStructure {
        let table = alloc::vec![-beta, beta, beta, -beta];
        GibbsStructure::uniform(2, Alphabet::ising(), alloc::vec![EnergyTerm::new(alloc::vec![0, 1], table)])
            .unwrap()
    }

    #[test]
    fn energy_examples() {
        let empty = GibbsStructure::uniform(3, Alphabet::ising(), Vec::new()).unwrap();
        assert_eq!(empty.energy(&[0, 1, 1]), 0.0);

        let g = ising_edge(0.5);
        assert_eq!(g.energy(&[1, 1]), -0.5);

        let two = GibbsStructure::uniform(
            3,
            Alphabet::ising(),
            alloc::vec![
                EnergyTerm::new(alloc::vec![0, 1], alloc::vec![1.0, 2.0, 3.0, 4.0]),
                EnergyTerm::new(alloc::vec![1, 2], alloc::vec![10.0, 20.0, 30.0, 40.0]),
            ],
        )
        .unwrap();
        // (0,1) -> 2.0 ; (1,0) -> 30.0
        assert_eq!(two.energy(&[0, 1, 0]), 32.0);
    }

    #[test]
    fn rejects_malformed_terms() {
        let a = alloc::vec![Alphabet::ising(); 2];
        assert!(GibbsStructure::new(a.clone(), alloc::vec![EnergyTerm::new(alloc::vec![0, 2], alloc::vec![0.0; 4])]).is_err());
        assert!(GibbsStructure::new(a.clone(), alloc::vec![EnergyTerm::new(alloc::vec![0, 0], alloc::vec![0.0; 4])]).is_err());
        assert!(GibbsStructure::new(a.clone(), alloc::vec![EnergyTerm::new(alloc::vec![0, 1], alloc::vec![0.0; 3])]).is_err());
        assert!(GibbsStructure::new(a, alloc::vec![EnergyTerm::new(alloc::vec![0], alloc::vec![0.0, f64::NAN])]).is_err());
        assert!(Alphabet::new(alloc::vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn boundary_skips_zero_terms() {
        let g = GibbsStructure::uniform(
            3,
            Alphabet::ising(),
            alloc::vec![
                EnergyTerm::new(alloc::vec![0, 1], alloc::vec![1.0, 0.0, 0.0, 1.0]),
                EnergyTerm::new(alloc::vec![0, 2], alloc::vec![0.0; 4]),
            ],
        )
        .unwrap();
        assert_eq!(g.boundary(&[0]), alloc::vec![1]);
        assert_eq!(g.boundary(&[0, 1]), Vec::<usize>::new());
    }

    #[test]
    fn components_follow_nonzero_terms() {
        let g = GibbsStructure::uniform(
            5,
            Alphabet::ising(),
            alloc::vec![
                EnergyTerm::new(alloc::vec![3, 1], alloc::vec![1.0, 0.0, 0.0, 1.0]),
                EnergyTerm::new(alloc::vec![0, 2], alloc::vec![0.0; 4]),
                EnergyTerm::new(alloc::vec![4], alloc::vec![0.5, 0.0]),
            ],
        )
        .unwrap();
        assert_eq!(g.components(), alloc::vec![alloc::vec![0], alloc::vec![1, 3], alloc::vec![2], alloc::vec![4]]);
        let sub = g.restricted(&[3, 1]).unwrap();
        assert_eq!(sub.terms().len(), 1);
        assert_eq!(sub.terms()[0].support(), &[0, 1]);
        assert!(g.restricted(&[1, 1]).is_err());
    }

    #[test]
    fn pinning_with_empty_set_is_identity() {
        let g = ising_edge(0.3);
        assert_eq!(g.pin(&[], &[0, 0]).unwrap(), g);
        let p = g.pin(&[1], &[0, 1]).unwrap();
        assert!(p.allows(1, 1) && !p.allows(1, 0));
        assert_eq!(p.allowed_count(0), 2);
    }
}
