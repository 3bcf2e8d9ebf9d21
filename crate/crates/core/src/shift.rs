//! Shift-invariant potentials on the free group and their finite restrictions.
//!
//! A potential `φ` is an energy table over configurations of a support window
//! `D ∋ e`. The shift-invariant structure on `G` carries one term on every
//! right translate `D·g`, evaluating `φ` at `d ↦ x(d·g)`.

use alloc::vec::Vec;

use crate::gibbs::{Alphabet, EnergyTerm, GibbsStructure, MixedRadix};
use crate::group::{potential_boundary, FiniteWindow, GroupWord};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftPotential {
    rank: usize,
    support: FiniteWindow,
    alphabet: Alphabet,
    table: Vec<f64>,
}

impl ShiftPotential {
    /// `table` is row-major over the support in canonical window order.
    pub fn new(rank: usize, support: FiniteWindow, alphabet: Alphabet, table: Vec<f64>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Structure("group rank must be at least 1".into()));
        }
        if !support.contains(&GroupWord::identity()) {
            return Err(Error::Structure("potential support must contain e".into()));
        }
        if support.rank_used() > rank {
            return Err(Error::Structure("support uses generators beyond the group rank".into()));
        }
        let expect = MixedRadix::new(alloc::vec![alphabet.len(); support.len()]).len();
        if table.len() != expect {
            return Err(Error::Structure(alloc::format!(
                "potential table has {} entries, support needs {expect}",
                table.len()
            )));
        }
        if table.iter().any(|x| !x.is_finite()) {
            return Err(Error::Structure("potential table has a non-finite entry".into()));
        }
        Ok(ShiftPotential {
            rank,
            support,
            alphabet,
            table,
        })
    }

    /// Nearest-neighbour Ising potential `−β Σ_i x_e x_{s_i}` on `D = {e, s1..sm}`.
    pub fn ising(beta: f64, rank: usize) -> Self {
        let support = FiniteWindow::new(
            core::iter::once(GroupWord::identity()).chain((0..rank).map(GroupWord::generator)),
        );
        let e = support.index_of(&GroupWord::identity()).unwrap();
        let gens: Vec<usize> = (0..rank)
            .map(|i| support.index_of(&GroupWord::generator(i)).unwrap())
            .collect();
        let layout = MixedRadix::new(alloc::vec![2; support.len()]);
        let mut digits = alloc::vec![0; support.len()];
        let table = (0..layout.len())
            .map(|i| {
                layout.decode(i, &mut digits);
                let xe = crate::gibbs::spin(digits[e]);
                -beta * gens.iter().map(|&k| xe * crate::gibbs::spin(digits[k])).sum::<f64>()
            })
            .collect();
        ShiftPotential {
            rank: rank.max(1),
            support,
            alphabet: Alphabet::ising(),
            table,
        }
    }

    /// Single-site potential with energy `energies[a]` for symbol `a`.
    pub fn single_site(rank: usize, alphabet: Alphabet, energies: Vec<f64>) -> Result<Self> {
        ShiftPotential::new(rank, FiniteWindow::identity(), alphabet, energies)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn support(&self) -> &FiniteWindow {
        &self.support
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `t·φ`.
    pub fn scaled(&self, t: f64) -> ShiftPotential {
        ShiftPotential {
            table: self.table.iter().map(|x| t * x).collect(),
            ..self.clone()
        }
    }

    /// `φ` at a configuration given in support order.
    pub fn value(&self, config: &[usize]) -> f64 {
        let q = self.alphabet.len();
        let idx = config.iter().fold(0, |acc, &a| acc * q + a);
        self.table[idx]
    }

    /// The boundary `∂F` of a window under this potential.
    pub fn boundary(&self, window: &FiniteWindow) -> FiniteWindow {
        potential_boundary(window, &self.support)
    }

    fn term_at(&self, g: &GroupWord, vertices: &FiniteWindow) -> Option<EnergyTerm> {
        let support = self
            .support
            .iter()
            .map(|d| vertices.index_of(&d.multiply(g)))
            .collect::<Option<Vec<usize>>>()?;
        Some(EnergyTerm::new(support, self.table.clone()))
    }

    fn structure_from(&self, vertices: &FiniteWindow, translates: &FiniteWindow) -> Result<GibbsStructure> {
        let terms = translates
            .iter()
            .filter_map(|g| self.term_at(g, vertices))
            .filter(|t| !t.is_zero())
            .collect();
        GibbsStructure::uniform(vertices.len(), self.alphabet.clone(), terms)
    }

    /// Finite structure on `window` keeping every translate `D·g ⊆ window`.
    /// Vertex `k` is the `k`-th element of `window` in canonical order.
    pub fn restrict_to(&self, window: &FiniteWindow) -> Result<GibbsStructure> {
        let translates = self.support.inverse().product(window);
        self.structure_from(window, &translates)
    }

    /// Structure on `F ∪ ∂F` carrying exactly the translates that meet `F`;
    /// its kernels on subsets of `F` equal those of the infinite structure.
    pub fn local_structure(&self, window: &FiniteWindow) -> Result<(FiniteWindow, GibbsStructure)> {
        let vertices = window.union(&self.boundary(window));
        let translates = self.support.inverse().product(window);
        let g = self.structure_from(&vertices, &translates)?;
        Ok((vertices, g))
    }
}
