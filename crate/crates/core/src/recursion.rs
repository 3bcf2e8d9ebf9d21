//! Max/min boundary recursions on the `2m`-regular tree and the uniqueness
//! verdict they support for attractive nearest-neighbour models.
//!
//! A [`TreePairModel`] has a site energy `h(a)` and, per generator, a pair
//! energy `J_i(x_g, x_{s_i g})` on every tree edge. Pinning the sphere of
//! radius `r` to the greatest (least) symbol and eliminating inwards gives
//! the root marginal of the finite-ball Gibbs measure; messages only depend
//! on the distance to the pinned sphere, so all radii up to `r_max` cost one
//! pass.

use alloc::vec::Vec;
use core::fmt;

use crate::gibbs::{Alphabet, EnergyTerm, GibbsStructure};
use crate::group::Letter;
use crate::markov::MarkovTreeSpec;
use crate::order::{is_attractive_at, SiteOrder};
use crate::{math, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TreePairModel {
    alphabet: Alphabet,
    site: Vec<f64>,
    pair: Vec<Vec<f64>>,
}

impl TreePairModel {
    pub fn new(alphabet: Alphabet, site: Vec<f64>, pair: Vec<Vec<f64>>) -> Result<Self> {
        let q = alphabet.len();
        if site.len() != q || pair.is_empty() || pair.iter().any(|p| p.len() != q * q) {
            return Err(Error::Structure("site needs q entries and each pair table q² entries".into()));
        }
        if site.iter().chain(pair.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Structure("tree model energies must be finite".into()));
        }
        Ok(TreePairModel { alphabet, site, pair })
    }

    /// Ising model `−β Σ x_g x_{s_i g}` with `m` generators.
    pub fn ising(beta: f64, rank: usize) -> Self {
        TreePairModel {
            alphabet: Alphabet::ising(),
            site: alloc::vec![0.0; 2],
            pair: alloc::vec![alloc::vec![-beta, beta, beta, -beta]; rank.max(1)],
        }
    }

    /// Gibbs form of a tree Markov measure: `J_i = −ln(ρ(a)P_i(a,b))` and
    /// site energy `(2m−1)·ln ρ(a)`. Needs strictly positive pair laws.
    pub fn from_markov(spec: &MarkovTreeSpec) -> Result<Self> {
        let m = spec.rank();
        let mut pair = Vec::with_capacity(m);
        for i in 0..m {
            let law = spec.pair_law(i);
            if law.iter().any(|&p| p <= 0.0) {
                return Err(Error::Spec("Gibbs form needs strictly positive pair laws".into()));
            }
            pair.push(law.iter().map(|&p| -math::ln(p)).collect());
        }
        let site = spec
            .rho()
            .iter()
            .map(|&r| (2 * m - 1) as f64 * math::ln(r))
            .collect();
        TreePairModel::new(spec.alphabet().clone(), site, pair)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.pair.len()
    }

    /// Energy of the edge between a parent and the child `l·parent`.
    fn edge(&self, l: Letter, parent: usize, child: usize) -> f64 {
        let q = self.alphabet.len();
        let j = &self.pair[l.generator()];
        if l.is_inverse() {
            j[child * q + parent]
        } else {
            j[parent * q + child]
        }
    }

    /// The root with its `2m` neighbours: vertex 0 is `e`, vertex `1 + k` is
    /// the `k`-th letter in canonical order.
    pub fn star_structure(&self) -> Result<GibbsStructure> {
        let q = self.alphabet.len();
        let mut terms = alloc::vec![EnergyTerm::new(alloc::vec![0], self.site.clone())];
        for (k, l) in Letter::all(self.rank()).enumerate() {
            let n = 1 + k;
            let support = if l.is_inverse() {
                alloc::vec![n, 0]
            } else {
                alloc::vec![0, n]
            };
            terms.push(EnergyTerm::new(support, self.pair[l.generator()].clone()));
            debug_assert_eq!(self.pair[l.generator()].len(), q * q);
        }
        GibbsStructure::uniform(1 + 2 * self.rank(), self.alphabet.clone(), terms)
    }

    /// Whether the single-site kernel at the root is monotone for `order`.
    pub fn is_attractive(&self, order: &SiteOrder) -> Result<bool> {
        let star = self.star_structure()?;
        let orders = alloc::vec![order.clone(); star.len()];
        Ok(is_attractive_at(&star, &orders, &[0])?.attractive)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Max,
    Min,
}

fn pinned_symbol(order: &SiteOrder, boundary: Boundary) -> Result<usize> {
    match boundary {
        Boundary::Max => order.top(),
        Boundary::Min => order.bottom(),
    }
    .ok_or_else(|| Error::Order("boundary recursion needs a greatest and a least symbol".into()))
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Root marginals for pinned-sphere radii `0..=r_max` (radius 0 pins the root).
pub fn boundary_sequence(
    model: &TreePairModel,
    order: &SiteOrder,
    r_max: usize,
    boundary: Boundary,
) -> Result<Vec<Vec<f64>>> {
    let q = model.alphabet.len();
    if order.len() != q {
        return Err(Error::Order("order and model use different alphabets".into()));
    }
    let b = pinned_symbol(order, boundary)?;
    let letters: Vec<Letter> = Letter::all(model.rank()).collect();
    let site_w: Vec<f64> = model.site.iter().map(|&h| math::exp(-h)).collect();
    let edge_w: Vec<Vec<f64>> = letters
        .iter()
        .map(|&l| {
            (0..q * q)
                .map(|k| math::exp(-model.edge(l, k / q, k % q)))
                .collect()
        })
        .collect();

    let mut point = alloc::vec![0.0; q];
    point[b] = 1.0;
    let mut out = alloc::vec![point];
    // msgs[k][x_parent]: message from a vertex reached by letter k whose
    // subtree is pinned `depth` steps below it.
    let mut msgs: Vec<Vec<f64>> = edge_w
        .iter()
        .map(|w| {
            let mut m: Vec<f64> = (0..q).map(|p| w[p * q + b]).collect();
            normalize(&mut m);
            m
        })
        .collect();
    for _ in 1..=r_max {
        let mut root: Vec<f64> = site_w.clone();
        for m in &msgs {
            root.iter_mut().zip(m).for_each(|(r, x)| *r *= x);
        }
        normalize(&mut root);
        out.push(root);

        let next = letters
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let mut inner = site_w.clone();
                for (k2, &l2) in letters.iter().enumerate() {
                    if l2 != l.inverse() {
                        inner.iter_mut().zip(&msgs[k2]).for_each(|(r, x)| *r *= x);
                    }
                }
                let mut m: Vec<f64> = (0..q)
                    .map(|p| (0..q).map(|c| edge_w[k][p * q + c] * inner[c]).sum())
                    .collect();
                normalize(&mut m);
                m
            })
            .collect();
        msgs = next;
    }
    Ok(out)
}

/// Root marginal of the ball of radius `depth` with pinned sphere.
pub fn tree_boundary_recursion(
    model: &TreePairModel,
    order: &SiteOrder,
    depth: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    Ok(boundary_sequence(model, order, depth, boundary)?.pop().unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    NonUnique,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Unique => "unique",
            Verdict::NonUnique => "non_unique",
            Verdict::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub verdict: Verdict,
    /// Radius at which the verdict was reached (or `r_max`).
    pub radius: usize,
    /// Total-variation gap between the max and min root marginals at `radius`.
    pub gap: f64,
    /// Geometric-tail estimate of the limiting gap.
    pub limit_gap: f64,
    pub max_marginal: Vec<f64>,
    pub min_marginal: Vec<f64>,
}

/// Default tolerance and radius budget for verdicts.
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_R_MAX: usize = 200;

/// Compares max- and min-boundary root marginals as the radius grows.
///
/// * `unique` once the gap drops to `tol`;
/// * `non_unique` once, for three consecutive radii, the gap changes by less
///   than `tol`, its extrapolated geometric tail is below `tol`, and the
///   extrapolated limit exceeds `10·tol`;
/// * `undecided` if neither happens by `r_max`.
///
/// Fails with [`Error::NotAttractive`] when the root kernel is not monotone.
pub fn uniqueness_verdict(
    model: &TreePairModel,
    order: &SiteOrder,
    tol: f64,
    r_max: usize,
) -> Result<UniquenessReport> {
    if !model.is_attractive(order)? {
        return Err(Error::NotAttractive { vertex: 0 });
    }
    let hi = boundary_sequence(model, order, r_max, Boundary::Max)?;
    let lo = boundary_sequence(model, order, r_max, Boundary::Min)?;
    let gap = |r: usize| 0.5 * hi[r].iter().zip(&lo[r]).map(|(a, b)| math::abs(a - b)).sum::<f64>();
    let make = |verdict, r: usize, limit| UniquenessReport {
        verdict,
        radius: r,
        gap: gap(r),
        limit_gap: limit,
        max_marginal: hi[r].clone(),
        min_marginal: lo[r].clone(),
    };
    let mut streak = 0;
    for r in 1..=r_max {
        let d = gap(r);
        if d <= tol {
            return Ok(make(Verdict::Unique, r, d));
        }
        if r < 2 {
            continue;
        }
        let prev = gap(r - 1);
        let change = prev - d;
        let tail = if change <= 0.0 {
            0.0
        } else {
            let lambda = d / prev;
            d * lambda / (1.0 - lambda)
        };
        let limit = d - tail;
        if math::abs(change) < tol && tail < tol && limit > 10.0 * tol {
            streak += 1;
            if streak >= 3 {
                return Ok(make(Verdict::NonUnique, r, limit));
            }
        } else {
            streak = 0;
        }
    }
    let d = gap(r_max);
    Ok(make(Verdict::Undecided, r_max, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Effective-field recursion for Ising on the `2m`-regular tree.
    fn scalar_oracle(beta: f64, m: usize, r: usize, sign: f64) -> f64 {
        if r == 0 {
            return if sign > 0.0 { 1.0 } else { 0.0 };
        }
        let t = math::tanh(beta);
        let mut h = sign * f64::INFINITY;
        for _ in 1..r {
            h = (2 * m - 1) as f64 * math::atanh(t * math::tanh(h));
        }
        let root = 2.0 * m as f64 * math::atanh(t * math::tanh(h));
        (1.0 + math::tanh(root)) / 2.0
    }

    #[test]
    fn matches_scalar_oracle() {
        let o = SiteOrder::ising();
        for beta in [0.1, 0.3466, 0.6] {
            let model = TreePairModel::ising(beta, 2);
            let hi = boundary_sequence(&model, &o, 40, Boundary::Max).unwrap();
            let lo = boundary_sequence(&model, &o, 40, Boundary::Min).unwrap();
            for r in 0..=40 {
                assert!((hi[r][1] - scalar_oracle(beta, 2, r, 1.0)).abs() < 1e-12);
                assert!((lo[r][1] - scalar_oracle(beta, 2, r, -1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coupling_is_uniform() {
        let o = SiteOrder::ising();
        let model = TreePairModel::ising(0.0, 2);
        for r in 1..5 {
            let m = tree_boundary_recursion(&model, &o, r, Boundary::Max).unwrap();
            assert!((m[0] - 0.5).abs() < 1e-15);
        }
        assert_eq!(uniqueness_verdict(&model, &o, DEFAULT_TOL, DEFAULT_R_MAX).unwrap().verdict, Verdict::Unique);
    }

    #[test]
    fn verdicts_away_from_threshold() {
        let o = SiteOrder::ising();
        let v = |b| uniqueness_verdict(&TreePairModel::ising(b, 2), &o, DEFAULT_TOL, DEFAULT_R_MAX).unwrap();
        assert_eq!(v(0.2).verdict, Verdict::Unique);
        let hot = v(0.6);
        assert_eq!(hot.verdict, Verdict::NonUnique);
        assert!(hot.limit_gap > 0.1);
    }

    #[test]
    fn antiferromagnet_is_rejected() {
        let o = SiteOrder::ising();
        let r = uniqueness_verdict(&TreePairModel::ising(-0.3, 2), &o, DEFAULT_TOL, 50);
        assert!(matches!(r, Err(Error::NotAttractive { .. })));
    }

    #[test]
    fn markov_gibbs_form_reproduces_ising_recursion() {
        let o = SiteOrder::ising();
        let spec = MarkovTreeSpec::ising(0.45, 2);
        let a = boundary_sequence(&TreePairModel::from_markov(&spec).unwrap(), &o, 30, Boundary::Max).unwrap();
        let b = boundary_sequence(&TreePairModel::ising(0.45, 2), &o, 30, Boundary::Max).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x[1] - y[1]).abs() < 1e-12);
        }
    }
}
