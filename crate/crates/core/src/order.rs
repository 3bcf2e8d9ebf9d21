//! Partial orders on alphabets, stochastic dominance under the product
//! order, and attractiveness of single-site kernels.

use alloc::vec::Vec;

use crate::flow::FlowNetwork;
use crate::gibbs::{Alphabet, GibbsStructure, MixedRadix, ProbTable};
use crate::{Error, Result, DEFAULT_BUDGET};

/// Flow slack below which a coupling still counts as complete.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// A partial order `⪯` on the symbols of one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteOrder {
    alphabet: Alphabet,
    relation: Vec<bool>,
    top: Option<usize>,
    bottom: Option<usize>,
}

impl SiteOrder {
    /// `relation[a * q + b]` is `a ⪯ b`. Checks reflexivity, antisymmetry and
    /// transitivity.
    pub fn new(alphabet: Alphabet, relation: Vec<bool>) -> Result<Self> {
        let q = alphabet.len();
        if relation.len() != q * q {
            return Err(Error::Order(alloc::format!("relation needs {} entries", q * q)));
        }
        let le = |a: usize, b: usize| relation[a * q + b];
        for a in 0..q {
            if !le(a, a) {
                return Err(Error::Order(alloc::format!("not reflexive at `{}`", alphabet.symbol(a))));
            }
            for b in 0..q {
                if a != b && le(a, b) && le(b, a) {
                    return Err(Error::Order("not antisymmetric".into()));
                }
                for c in 0..q {
                    if le(a, b) && le(b, c) && !le(a, c) {
                        return Err(Error::Order("not transitive".into()));
                    }
                }
            }
        }
        let top = (0..q).find(|&t| (0..q).all(|a| le(a, t)));
        let bottom = (0..q).find(|&b| (0..q).all(|a| le(b, a)));
        Ok(SiteOrder {
            alphabet,
            relation,
            top,
            bottom,
        })
    }

    /// The chain `0 ≺ 1 ≺ … ≺ q−1` in index order.
    pub fn chain(alphabet: Alphabet) -> Self {
        let q = alphabet.len();
        let relation = (0..q * q).map(|k| k / q <= k % q).collect();
        SiteOrder {
            alphabet,
            relation,
            top: Some(q - 1),
            bottom: Some(0),
        }
    }

    /// `−1 ≺ +1`.
    pub fn ising() -> Self {
        SiteOrder::chain(Alphabet::ising())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    #[inline]
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.relation[a * self.alphabet.len() + b]
    }

    /// Greatest element, if any.
    pub fn top(&self) -> Option<usize> {
        self.top
    }

    /// Least element, if any.
    pub fn bottom(&self) -> Option<usize> {
        self.bottom
    }

    /// Symbols `b` covering `a`: `a ≺ b` with nothing strictly between.
    pub fn covers(&self, a: usize) -> Vec<usize> {
        let q = self.len();
        (0..q)
            .filter(|&b| b != a && self.le(a, b))
            .filter(|&b| !(0..q).any(|c| c != a && c != b && self.le(a, c) && self.le(c, b)))
            .collect()
    }
}

fn product_le(orders: &[&SiteOrder], x: &[usize], y: &[usize]) -> bool {
    orders.iter().zip(x.iter().zip(y)).all(|(o, (&a, &b))| o.le(a, b))
}

/// Whether `μ2` stochastically dominates `μ1` under the product of the
/// per-coordinate `orders`, decided by max-flow feasibility of a coupling
/// supported on `{(x, y) : x ⪯ y}`.
pub fn dominates(orders: &[SiteOrder], mu1: &ProbTable, mu2: &ProbTable) -> Result<bool> {
    let refs: Vec<&SiteOrder> = orders.iter().collect();
    dominates_by(&refs, mu1, mu2)
}

fn dominates_by(orders: &[&SiteOrder], mu1: &ProbTable, mu2: &ProbTable) -> Result<bool> {
    if mu1.domain() != mu2.domain() || mu1.radices() != mu2.radices() {
        return Err(Error::Domain("tables have different domains".into()));
    }
    if orders.len() != mu1.domain().len()
        || orders.iter().zip(mu1.radices()).any(|(o, &r)| o.len() != r)
    {
        return Err(Error::Order("one order per coordinate, sized to its alphabet".into()));
    }
    let support = |mu: &ProbTable| -> Vec<(Vec<usize>, f64)> {
        mu.probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (mu.config_at(i), p))
            .collect()
    };
    let xs = support(mu1);
    let ys = support(mu2);
    let (s, t) = (0, 1 + xs.len() + ys.len());
    let mut net = FlowNetwork::new(t + 1);
    for (i, (x, p)) in xs.iter().enumerate() {
        net.add_edge(s, 1 + i, *p);
        for (j, (y, _)) in ys.iter().enumerate() {
            if product_le(orders, x, y) {
                net.add_edge(1 + i, 1 + xs.len() + j, f64::INFINITY);
            }
        }
    }
    for (j, (_, p)) in ys.iter().enumerate() {
        net.add_edge(1 + xs.len() + j, t, *p);
    }
    Ok(net.max_flow(s, t) >= 1.0 - DOMINANCE_SLACK)
}

/// Boundary configurations `ω ⪯ ω'` on `∂{v}` at which the single-site kernel
/// at `v` fails to be monotone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractivenessWitness {
    pub vertex: usize,
    pub boundary: Vec<usize>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractivenessReport {
    pub attractive: bool,
    pub witness: Option<AttractivenessWitness>,
}

/// Checks that every single-site kernel is monotone: `ω ⪯ ω'` on `∂{v}`
/// implies `π_{Γ,{v}}(ω) ⪯ π_{Γ,{v}}(ω')`. Covering pairs suffice because
/// dominance is transitive.
pub fn is_attractive(g: &GibbsStructure, orders: &[SiteOrder]) -> Result<AttractivenessReport> {
    is_attractive_at(g, orders, &(0..g.len()).collect::<Vec<_>>())
}

/// As [`is_attractive`], restricted to the listed vertices.
pub fn is_attractive_at(
    g: &GibbsStructure,
    orders: &[SiteOrder],
    vertices: &[usize],
) -> Result<AttractivenessReport> {
    if orders.len() != g.len() || orders.iter().enumerate().any(|(v, o)| o.len() != g.radix(v)) {
        return Err(Error::Order("one order per vertex, sized to its alphabet".into()));
    }
    for &v in vertices {
        if g.pinned(v).is_some() {
            continue;
        }
        let bd = g.boundary(&[v]);
        let choices: Vec<Vec<usize>> = bd
            .iter()
            .map(|&u| (0..g.radix(u)).filter(|&a| g.allows(u, a)).collect())
            .collect();
        let radices: Vec<usize> = choices.iter().map(Vec::len).collect();
        let size = MixedRadix::size_f64(&radices);
        if size > DEFAULT_BUDGET as f64 {
            return Err(Error::Budget {
                what: "boundary configurations",
                required: size,
                budget: DEFAULT_BUDGET,
            });
        }
        let layout = MixedRadix::new(radices);
        let mut omega = alloc::vec![0usize; g.len()];
        for (u, c) in bd.iter().zip(&choices) {
            omega[*u] = c[0];
        }
        for w in 0..g.len() {
            if let Some(a) = g.pinned(w) {
                omega[w] = a;
            }
        }
        let kernels: Vec<ProbTable> = (0..layout.len())
            .map(|i| {
                let mut digits = alloc::vec![0; bd.len()];
                layout.decode(i, &mut digits);
                let mut w = omega.clone();
                for (k, &u) in bd.iter().enumerate() {
                    w[u] = choices[k][digits[k]];
                }
                g.local_kernel(&[v], &w)
            })
            .collect::<Result<_>>()?;
        let site = [&orders[v]];
        let mut digits = alloc::vec![0; bd.len()];
        for i in 0..layout.len() {
            layout.decode(i, &mut digits);
            for k in 0..bd.len() {
                let u = bd[k];
                let a = choices[k][digits[k]];
                for b in orders[u].covers(a) {
                    let Some(pos) = choices[k].iter().position(|&c| c == b) else {
                        continue;
                    };
                    let mut up = digits.clone();
                    up[k] = pos;
                    let j = layout.index(&up);
                    if !dominates_by(&site, &kernels[i], &kernels[j])? {
                        let symbols = |d: &[usize]| d.iter().enumerate().map(|(k, &x)| choices[k][x]).collect();
                        return Ok(AttractivenessReport {
                            attractive: false,
                            witness: Some(AttractivenessWitness {
                                vertex: v,
                                boundary: bd.clone(),
                                lower: symbols(&digits),
                                upper: symbols(&up),
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(AttractivenessReport {
        attractive: true,
        witness: None,
    })
}
