//! Sofic approximations of free groups by random permutations.
//!
//! Generator `s_i` acts on `V = {0..n-1}` by a permutation `σ_i`; a reduced
//! word acts by composing letters right to left, so `σ^{gh} = σ^g ∘ σ^h`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::gibbs::{Alphabet, EnergyTerm, GibbsStructure, MixedRadix, ProbTable};
use crate::group::{FiniteWindow, GroupWord, Letter};
use crate::seed::rng_from_seed;
use crate::shift::ShiftPotential;
use crate::{par, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoficMap {
    n: usize,
    perms: Vec<Vec<u32>>,
    inverses: Vec<Vec<u32>>,
}

fn invert(p: &[u32]) -> Vec<u32> {
    let mut inv = alloc::vec![0u32; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j as usize] = i as u32;
    }
    inv
}

impl SoficMap {
    /// Builds a map from explicit generator permutations, checking bijectivity.
    pub fn from_permutations(perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = perms.first().map_or(0, Vec::len);
        if perms.is_empty() || n == 0 {
            return Err(Error::Argument("need at least one permutation of a nonempty set".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Argument("vertex count too large".into()));
        }
        let mut out = Vec::with_capacity(perms.len());
        for (i, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Argument(alloc::format!("permutation {} has length {}", i + 1, p.len())));
            }
            let mut seen = alloc::vec![false; n];
            for &j in p {
                if j >= n || seen[j] {
                    return Err(Error::Argument(alloc::format!("permutation {} is not a bijection", i + 1)));
                }
                seen[j] = true;
            }
            out.push(p.iter().map(|&j| j as u32).collect::<Vec<u32>>());
        }
        let inverses = out.iter().map(|p| invert(p)).collect();
        Ok(SoficMap {
            n,
            perms: out,
            inverses,
        })
    }

    /// `rank` independent uniform permutations of `{0..n-1}`, determined by `seed`.
    pub fn random(rank: usize, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || rank == 0 {
            return Err(Error::Argument("random sofic map needs n ≥ 1 and rank ≥ 1".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Argument("vertex count too large".into()));
        }
        let mut rng = rng_from_seed(seed);
        let perms: Vec<Vec<u32>> = (0..rank)
            .map(|_| {
                let mut p: Vec<u32> = (0..n as u32).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let inverses = perms.iter().map(|p| invert(p)).collect();
        Ok(SoficMap { n, perms, inverses })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank(&self) -> usize {
        self.perms.len()
    }

    /// Permutation of generator `i` (0-based) as a vertex list.
    pub fn permutation(&self, i: usize) -> Vec<usize> {
        self.perms[i].iter().map(|&j| j as usize).collect()
    }

    #[inline]
    fn act_letter(&self, l: Letter, v: usize) -> usize {
        let table = if l.is_inverse() {
            &self.inverses[l.generator()]
        } else {
            &self.perms[l.generator()]
        };
        table[v] as usize
    }

    /// `σ^g(v)`.
    pub fn act(&self, g: &GroupWord, v: usize) -> usize {
        g.letters().iter().rev().fold(v, |w, &l| self.act_letter(l, w))
    }

    /// The unique `t` with `σ^g(t) = w`.
    pub fn act_preimage(&self, g: &GroupWord, w: usize) -> usize {
        g.letters().iter().fold(w, |t, &l| self.act_letter(l.inverse(), t))
    }

    /// Whether `v` is `S`-good: `g ↦ σ^g(v)` is injective on `S`, and on the
    /// orbit points `σ^S(v)` the action is multiplicative, inverse-compatible
    /// and has the expected preimages.
    pub fn is_good(&self, s: &FiniteWindow, v: usize) -> bool {
        GoodnessTest::new(s).check(self, v)
    }

    /// Fraction of `S`-good vertices.
    pub fn good_fraction(&self, s: &FiniteWindow) -> f64 {
        const CHUNK: usize = 512;
        let test = GoodnessTest::new(s);
        let starts: Vec<usize> = (0..self.n).step_by(CHUNK).collect();
        let counts = par::map(starts, |a| {
            (a..(a + CHUNK).min(self.n))
                .filter(|&v| test.check(self, v))
                .count()
        });
        counts.iter().sum::<usize>() as f64 / self.n as f64
    }

    /// `θ_v(τ)` restricted to `F`, listed in window order.
    pub fn pullback(&self, v: usize, window: &FiniteWindow, tau: &[usize]) -> Vec<usize> {
        window.iter().map(|g| tau[self.act(g, v)]).collect()
    }

    /// Induced finite structure `Γ^i` on `V`: one copy of `φ` per vertex `v`,
    /// supported on `σ^D(v)` and evaluated on the pulled-back configuration.
    /// Copies with the same support are merged by adding their tables; copies
    /// whose support collapses (`|σ^D(v)| < |D|`) read repeated points once.
    pub fn induced_structure(&self, potential: &ShiftPotential) -> Result<GibbsStructure> {
        if potential.rank() > self.rank() {
            return Err(Error::Argument("potential uses more generators than the sofic map".into()));
        }
        let q = potential.alphabet().len();
        let d = potential.support();
        let mut merged: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        let mut points = alloc::vec![0usize; d.len()];
        let mut local = Vec::new();
        for v in 0..self.n {
            for (k, g) in d.iter().enumerate() {
                points[k] = self.act(g, v);
            }
            let mut support = points.clone();
            support.sort_unstable();
            support.dedup();
            let layout = MixedRadix::new(alloc::vec![q; support.len()]);
            let slot: Vec<usize> = points
                .iter()
                .map(|p| support.binary_search(p).unwrap())
                .collect();
            let entry = merged
                .entry(support.clone())
                .or_insert_with(|| alloc::vec![0.0; layout.len()]);
            let mut digits = alloc::vec![0; support.len()];
            for (i, e) in entry.iter_mut().enumerate() {
                layout.decode(i, &mut digits);
                local.clear();
                local.extend(slot.iter().map(|&s| digits[s]));
                *e += potential.value(&local);
            }
        }
        let terms = merged
            .into_iter()
            .map(|(support, table)| EnergyTerm::new(support, table))
            .filter(|t| !t.is_zero())
            .collect();
        GibbsStructure::uniform(self.n, potential.alphabet().clone(), terms)
    }

    /// Empirical law of the pulled-back window patterns, `1/n Σ_v δ_{θ_v(τ)|F}`.
    pub fn empirical_pullback(&self, window: &FiniteWindow, tau: &[usize], alphabet: &Alphabet) -> Result<ProbTable> {
        let q = alphabet.len();
        if let Some(&a) = tau.iter().find(|&&a| a >= q) {
            return Err(Error::Argument(alloc::format!("symbol {a} outside the alphabet")));
        }
        if tau.len() != self.n {
            return Err(Error::Argument("configuration length differs from the vertex count".into()));
        }
        let radices = alloc::vec![q; window.len()];
        let layout = MixedRadix::new(radices.clone());
        let mut probs = alloc::vec![0.0; layout.len()];
        let w = 1.0 / self.n as f64;
        for v in 0..self.n {
            probs[layout.index(&self.pullback(v, window, tau))] += w;
        }
        ProbTable::new((0..window.len()).collect(), radices, probs)
    }
}

/// Precomputed word bookkeeping for repeated `S`-goodness checks.
///
/// `closure` is the suffix closure of `S ∪ S⁻¹ ∪ S·S` in shortlex order, so
/// the image of every word under `σ` at a base point is one lookup away from
/// the image of its suffix.
struct GoodnessTest {
    rank: usize,
    words: Vec<GroupWord>,
    closure: Vec<(Option<usize>, Option<Letter>)>,
    word_slot: Vec<usize>,
    inverse_slot: Vec<usize>,
    product_slot: Vec<usize>,
}

impl GoodnessTest {
    fn new(s: &FiniteWindow) -> Self {
        let words: Vec<GroupWord> = s.iter().cloned().collect();
        let mut all: Vec<GroupWord> = Vec::new();
        for g in &words {
            all.push(g.clone());
            all.push(g.inverse());
            for h in &words {
                all.push(g.multiply(h));
            }
        }
        let mut suffixes = Vec::new();
        for g in &all {
            let l = g.letters();
            for k in 0..=l.len() {
                suffixes.push(GroupWord::from_letters(l[k..].iter().copied()));
            }
        }
        let closure_words = FiniteWindow::new(suffixes);
        let slot = |g: &GroupWord| closure_words.index_of(g).unwrap();
        let closure = closure_words
            .iter()
            .map(|g| match g.tree_parent() {
                Some((parent, l)) => (Some(slot(&parent)), Some(l)),
                None => (None, None),
            })
            .collect();
        let word_slot = words.iter().map(slot).collect();
        let inverse_slot = words.iter().map(|g| slot(&g.inverse())).collect();
        let product_slot = words
            .iter()
            .flat_map(|g| words.iter().map(move |h| g.multiply(h)))
            .map(|g| slot(&g))
            .collect();
        GoodnessTest {
            rank: s.rank_used(),
            words,
            closure,
            word_slot,
            inverse_slot,
            product_slot,
        }
    }

    fn images(&self, sigma: &SoficMap, base: usize, out: &mut Vec<usize>) {
        out.clear();
        for &(parent, letter) in &self.closure {
            let x = match (parent, letter) {
                (Some(p), Some(l)) => sigma.act_letter(l, out[p]),
                _ => base,
            };
            out.push(x);
        }
    }

    fn check(&self, sigma: &SoficMap, v: usize) -> bool {
        if self.rank > sigma.rank() {
            return false;
        }
        let k = self.words.len();
        let mut at_v = Vec::with_capacity(self.closure.len());
        self.images(sigma, v, &mut at_v);
        let mut orbit: Vec<usize> = self.word_slot.iter().map(|&i| at_v[i]).collect();
        let image = orbit.clone();
        orbit.sort_unstable();
        if orbit.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        let mut at_w = Vec::with_capacity(self.closure.len());
        for &w in &image {
            self.images(sigma, w, &mut at_w);
            for (a, g1) in self.words.iter().enumerate() {
                let inv = &self.words[a].inverse();
                for b in 0..k {
                    let u = at_w[self.word_slot[b]];
                    if sigma.act(g1, u) != at_w[self.product_slot[a * k + b]] {
                        return false;
                    }
                }
                if sigma.act(inv, at_w[self.word_slot[a]]) != w {
                    return false;
                }
                if sigma.act_preimage(g1, w) != at_w[self.inverse_slot[a]] {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> GroupWord {
        s.parse().unwrap()
    }

    fn example() -> SoficMap {
        SoficMap::from_permutations(alloc::vec![
            alloc::vec![1, 2, 3, 4, 0],
            alloc::vec![0, 2, 4, 1, 3],
        ])
        .unwrap()
    }

    #[test]
    fn action_composes_right_to_left() {
        let s = example();
        assert_eq!(s.act(&GroupWord::identity(), 3), 3);
        assert_eq!(s.act(&w("s1 s1^-1"), 3), 3);
        // perm1(perm2(3)) = perm1(1) = 2
        assert_eq!(s.act(&w("s1 s2"), 3), 2);
        for v in 0..5 {
            let g = w("s1 s2^-1 s1");
            assert_eq!(s.act_preimage(&g, s.act(&g, v)), v);
        }
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(SoficMap::from_permutations(alloc::vec![alloc::vec![0, 0, 1]]).is_err());
        assert!(SoficMap::from_permutations(alloc::vec![alloc::vec![0, 1], alloc::vec![0]]).is_err());
    }

    #[test]
    fn random_is_deterministic_and_trivial_at_one() {
        assert_eq!(SoficMap::random(2, 50, 9).unwrap(), SoficMap::random(2, 50, 9).unwrap());
        assert_ne!(SoficMap::random(2, 50, 9).unwrap(), SoficMap::random(2, 50, 10).unwrap());
        let one = SoficMap::random(3, 1, 4).unwrap();
        assert!((0..3).all(|i| one.permutation(i) == alloc::vec![0]));
    }

    #[test]
    fn identity_window_is_always_good() {
        let s = SoficMap::random(2, 10, 1).unwrap();
        assert!((0..10).all(|v| s.is_good(&FiniteWindow::identity(), v)));
    }

    #[test]
    fn pullback_hand_example() {
        let s = SoficMap::from_permutations(alloc::vec![
            alloc::vec![1, 2, 3, 4, 5, 0],
            alloc::vec![3, 4, 5, 0, 1, 2],
        ])
        .unwrap();
        let tau = [0, 1, 1, 0, 1, 0];
        let f = FiniteWindow::ball(2, 1); // e, s1, s1^-1, s2, s2^-1
        assert_eq!(s.pullback(0, &f, &tau), alloc::vec![0, 1, 0, 0, 0]);
        assert_eq!(s.pullback(2, &f, &tau), alloc::vec![1, 0, 1, 0, 0]);
        assert_eq!(s.pullback(4, &FiniteWindow::identity(), &tau), alloc::vec![1]);
    }

    #[test]
    fn empirical_pullback_examples() {
        let s = SoficMap::from_permutations(alloc::vec![alloc::vec![1, 0]]).unwrap();
        let f = FiniteWindow::ball(1, 1);
        let c = s.empirical_pullback(&f, &[1, 1], &Alphabet::ising()).unwrap();
        assert_eq!(c.prob(&[1, 1, 1]), 1.0);
        let t = s.empirical_pullback(&FiniteWindow::new([GroupWord::identity(), w("s1")]), &[0, 1], &Alphabet::ising()).unwrap();
        assert_eq!(t.prob(&[0, 1]), 0.5);
        assert_eq!(t.prob(&[1, 0]), 0.5);
    }

    #[test]
    fn single_vertex_collapse() {
        let beta = 0.4;
        let s = SoficMap::random(2, 1, 0).unwrap();
        let g = s.induced_structure(&ShiftPotential::ising(beta, 2)).unwrap();
        assert_eq!(g.terms().len(), 1);
        assert_eq!(g.terms()[0].support(), &[0]);
        for &x in g.terms()[0].table() {
            assert!((x + 2.0 * beta).abs() < 1e-15);
        }
    }

    #[test]
    fn single_site_potential_gives_product_structure() {
        let s = SoficMap::random(2, 6, 3).unwrap();
        let p = ShiftPotential::single_site(2, Alphabet::ising(), alloc::vec![0.2, -0.3]).unwrap();
        let g = s.induced_structure(&p).unwrap();
        assert_eq!(g.terms().len(), 6);
        assert!(g.terms().iter().all(|t| t.support().len() == 1));
    }
}
