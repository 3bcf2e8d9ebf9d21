use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use super::{Alphabet, EnergyTerm, GibbsStructure};

/// Shape of a random structure drawn by [`random_structure`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomShape {
    pub vertices: usize,
    pub alphabet: usize,
    /// Pair terms on distinct random vertex pairs (capped at `n(n−1)/2`).
    pub pairs: usize,
    /// Whether to add one single-site field per vertex.
    pub fields: bool,
    /// Entries are uniform on `[−scale, scale]`.
    pub scale: f64,
}

/// Structure on `0..n` with i.i.d. uniform pair tables and optional fields.
pub fn random_structure<R: Rng + ?Sized>(shape: &RandomShape, rng: &mut R) -> GibbsStructure {
    let n = shape.vertices;
    let q = shape.alphabet.max(1);
    let mut entry = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..=1.0) * shape.scale).collect()
    };
    let mut terms = Vec::new();
    if shape.fields {
        terms.extend((0..n).map(|v| EnergyTerm::new(alloc::vec![v], entry(q))));
    }
    let all = n * n.saturating_sub(1) / 2;
    let tables: Vec<Vec<f64>> = (0..shape.pairs.min(all)).map(|_| entry(q * q)).collect();
    if !tables.is_empty() {
        let picks = index::sample(rng, all, tables.len());
        let mut pairs: Vec<(usize, usize)> = picks.iter().map(|k| unrank_pair(k, n)).collect();
        pairs.sort_unstable();
        terms.extend(pairs.into_iter().zip(tables).map(|((u, v), t)| EnergyTerm::new(alloc::vec![u, v], t)));
    }
    GibbsStructure::uniform(n, Alphabet::indexed(q), terms).expect("random structure is well formed")
}

/// The `k`-th pair `u < v` in lexicographic order.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut u = 0;
    while k >= n - 1 - u {
        k -= n - 1 - u;
        u += 1;
    }
    (u, u + 1 + k)
}
