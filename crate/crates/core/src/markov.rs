//! Shift-invariant Markov measures on the free-group Cayley tree.
//!
//! The measure draws `X_e` from a root law `ρ` and propagates along tree
//! edges `g ~ s_i·g` with the transition matrix `P_i`. Detailed balance
//! `ρ(a)P_i(a,b) = ρ(b)P_i(b,a)` makes the pair law of every `s_i`-edge the
//! same in both directions, which is what makes the measure shift invariant.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::gibbs::{Alphabet, MixedRadix, ProbTable};
use crate::group::{FiniteWindow, GroupWord};
use crate::shift::ShiftPotential;
use crate::{math, Error, Result, DEFAULT_BUDGET};

const SPEC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovTreeSpec {
    alphabet: Alphabet,
    rho: Vec<f64>,
    transitions: Vec<Vec<f64>>,
}

impl MarkovTreeSpec {
    /// `transitions[i]` is `P_{i+1}`, row-major `q × q`. Rows must be
    /// stochastic, `ρ` normalized, and each `P_i` reversible for `ρ`, all to `1e-12`.
    pub fn new(alphabet: Alphabet, rho: Vec<f64>, transitions: Vec<Vec<f64>>) -> Result<Self> {
        let q = alphabet.len();
        if rho.len() != q {
            return Err(Error::Spec(alloc::format!("root law needs {q} entries")));
        }
        if rho.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Spec("root law has a negative or non-finite entry".into()));
        }
        if math::abs(rho.iter().sum::<f64>() - 1.0) > SPEC_TOL {
            return Err(Error::Spec("root law is not normalized".into()));
        }
        if transitions.is_empty() {
            return Err(Error::Spec("need at least one transition matrix".into()));
        }
        for (i, p) in transitions.iter().enumerate() {
            let name = i + 1;
            if p.len() != q * q {
                return Err(Error::Spec(alloc::format!("P_{name} needs {} entries", q * q)));
            }
            if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Spec(alloc::format!("P_{name} has a negative or non-finite entry")));
            }
            for a in 0..q {
                let row: f64 = p[a * q..(a + 1) * q].iter().sum();
                if math::abs(row - 1.0) > SPEC_TOL {
                    return Err(Error::Spec(alloc::format!("row {a} of P_{name} sums to {row}")));
                }
                let pushed: f64 = (0..q).map(|b| rho[b] * p[b * q + a]).sum();
                if math::abs(pushed - rho[a]) > SPEC_TOL {
                    return Err(Error::Spec(alloc::format!("ρ is not invariant under P_{name}")));
                }
                for b in 0..q {
                    if math::abs(rho[a] * p[a * q + b] - rho[b] * p[b * q + a]) > SPEC_TOL {
                        return Err(Error::Spec(alloc::format!("P_{name} is not reversible for ρ")));
                    }
                }
            }
        }
        Ok(MarkovTreeSpec {
            alphabet,
            rho,
            transitions,
        })
    }

    /// Uniform root law and `P_i(a,b) = e^{2β}/(1+e^{2β})` if `a = b`, else
    /// `1/(1+e^{2β})`, for every generator.
    pub fn ising(beta: f64, rank: usize) -> Self {
        let flip = if beta >= 0.0 {
            let t = math::exp(-2.0 * beta);
            t / (1.0 + t)
        } else {
            1.0 / (1.0 + math::exp(2.0 * beta))
        };
        let stay = 1.0 - flip;
        MarkovTreeSpec {
            alphabet: Alphabet::ising(),
            rho: alloc::vec![0.5, 0.5],
            transitions: alloc::vec![alloc::vec![stay, flip, flip, stay]; rank.max(1)],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.transitions.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `P_{i+1}` row-major.
    pub fn transition(&self, i: usize) -> &[f64] {
        &self.transitions[i]
    }

    /// Joint law `ρ(a)P_i(a,b)` of an `s_{i+1}`-edge, row-major.
    pub fn pair_law(&self, i: usize) -> Vec<f64> {
        let q = self.alphabet.len();
        (0..q * q)
            .map(|k| self.rho[k / q] * self.transitions[i][k])
            .collect()
    }

    /// Steiner tree of `W ∪ {e}`: every suffix of every word of `W`.
    pub fn span(window: &FiniteWindow) -> FiniteWindow {
        let mut words = alloc::vec![GroupWord::identity()];
        for g in window {
            let l = g.letters();
            for k in 0..l.len() {
                words.push(GroupWord::from_letters(l[k..].iter().copied()));
            }
        }
        FiniteWindow::new(words)
    }

    fn check_window(&self, window: &FiniteWindow) -> Result<()> {
        if window.rank_used() > self.rank() {
            return Err(Error::Argument("window uses generators beyond the Markov rank".into()));
        }
        Ok(())
    }

    /// Exact joint law on `W`, as a table over window positions `0..|W|`.
    pub fn marginal(&self, window: &FiniteWindow) -> Result<ProbTable> {
        self.marginal_with_budget(window, DEFAULT_BUDGET)
    }

    /// Leaf-to-root elimination over the Steiner tree; intermediate tables
    /// never exceed `q^{1+|W|}` entries, which must fit in `budget`.
    pub fn marginal_with_budget(&self, window: &FiniteWindow, budget: usize) -> Result<ProbTable> {
        self.check_window(window)?;
        let q = self.alphabet.len();
        let needed = MixedRadix::size_f64(&alloc::vec![q; window.len() + 1]);
        if needed > budget as f64 {
            return Err(Error::Budget {
                what: "window marginal",
                required: needed,
                budget,
            });
        }
        let tree = SpanTree::new(window);
        let mut factors: Vec<Option<Factor>> = (0..tree.len()).map(|_| None).collect();
        for v in (0..tree.len()).rev() {
            let mut f = Factor::ones(v, q);
            for &c in &tree.children[v] {
                let child = factors[c].take().unwrap();
                let p = &self.transitions[tree.generator[c]];
                f = f.outer(&child.message(p, q, tree.observed[c]), q);
            }
            factors[v] = Some(f);
        }
        let root = factors[0].take().unwrap();
        let root = root.weight_first(&self.rho, q).finish(q, tree.observed[0]);
        Ok(root.into_window_table(&tree, window.len(), q))
    }

    /// Exact sample of `(X_g)_{g ∈ W}`, listed in window order.
    pub fn sample_window<R: Rng + ?Sized>(&self, window: &FiniteWindow, rng: &mut R) -> Result<Vec<usize>> {
        self.check_window(window)?;
        let q = self.alphabet.len();
        let tree = SpanTree::new(window);
        let mut x = alloc::vec![0usize; tree.len()];
        x[0] = draw(&self.rho, rng);
        for v in 1..tree.len() {
            let p = &self.transitions[tree.generator[v]];
            let a = x[tree.parent[v]];
            x[v] = draw(&p[a * q..(a + 1) * q], rng);
        }
        Ok(window.iter().map(|g| x[tree.words.index_of(g).unwrap()]).collect())
    }

    /// Whether `X_e` given the `2m`-neighbourhood (more generally, given
    /// `∂{e}` of `potential`) has exactly the potential's single-site kernel,
    /// for every boundary configuration of positive probability.
    pub fn gibbs_consistency(&self, potential: &ShiftPotential, tol: f64) -> Result<bool> {
        if potential.alphabet().len() != self.alphabet.len() {
            return Err(Error::Argument("potential and spec use different alphabets".into()));
        }
        let e = GroupWord::identity();
        let (window, g) = potential.local_structure(&FiniteWindow::identity())?;
        if window.rank_used() > self.rank() {
            return Err(Error::Argument("potential uses generators beyond the Markov rank".into()));
        }
        let joint = self.marginal(&window)?;
        let pos = window.index_of(&e).unwrap();
        let q = self.alphabet.len();
        let stride = joint.layout().strides()[pos];
        let mut omega = alloc::vec![0usize; window.len()];
        for i in 0..joint.len() {
            joint.layout().decode(i, &mut omega);
            if omega[pos] != 0 {
                continue;
            }
            let column: Vec<f64> = (0..q).map(|a| joint.probs()[i + a * stride]).collect();
            let total: f64 = column.iter().sum();
            if total <= 0.0 {
                continue;
            }
            let kernel = g.local_kernel(&[pos], &omega)?;
            for a in 0..q {
                if math::abs(column[a] / total - kernel.probs()[a]) > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `H(X_e | X_C)` in nats, exactly, for a finite observed set `C`.
    ///
    /// Every observed subtree reaches the root only through the likelihood
    /// message it sends up; messages are kept as lists of vectors and those
    /// with the same direction are merged, which is exact because the root
    /// posterior is invariant under rescaling each message.
    pub fn root_conditional_entropy(&self, observed: &FiniteWindow) -> Result<f64> {
        self.check_window(observed)?;
        if observed.contains(&GroupWord::identity()) {
            return Ok(0.0);
        }
        let q = self.alphabet.len();
        let tree = SpanTree::new(observed);
        let mut lists: Vec<Vec<Vec<f64>>> = alloc::vec![Vec::new(); tree.len()];
        for v in (0..tree.len()).rev() {
            let local: Vec<Vec<f64>> = if tree.observed[v] {
                (0..q)
                    .map(|a| (0..q).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
                    .collect()
            } else {
                let mut acc = alloc::vec![alloc::vec![1.0; q]];
                for &c in &tree.children[v] {
                    let msgs = core::mem::take(&mut lists[c]);
                    let mut next = Vec::with_capacity(acc.len() * msgs.len());
                    for a in &acc {
                        for m in &msgs {
                            next.push(a.iter().zip(m).map(|(x, y)| x * y).collect());
                        }
                    }
                    acc = merge_directions(next);
                }
                acc
            };
            if v == 0 {
                let mut h = 0.0;
                for lam in &local {
                    let joint: Vec<f64> = self.rho.iter().zip(lam).map(|(r, l)| r * l).collect();
                    let w: f64 = joint.iter().sum();
                    if w > 0.0 {
                        h += w * joint.iter().map(|&p| math::neg_xlogx(p / w)).sum::<f64>();
                    }
                }
                return Ok(h);
            }
            let p = &self.transitions[tree.generator[v]];
            let up = local
                .iter()
                .map(|lam| {
                    (0..q)
                        .map(|a| (0..q).map(|b| p[a * q + b] * lam[b]).sum())
                        .collect()
                })
                .collect();
            lists[v] = merge_directions(up);
        }
        unreachable!("the span always contains the identity")
    }
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = a;
            if u < acc {
                return a;
            }
        }
    }
    last
}

fn merge_directions(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    const SCALE: f64 = (1u64 << 40) as f64;
    let mut merged: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for v in vectors {
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let key = v.iter().map(|x| math::round(x / total * SCALE) as i64).collect();
        merged
            .entry(key)
            .and_modify(|acc| acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b))
            .or_insert(v);
    }
    merged.into_values().collect()
}

/// Steiner tree of a window and `e`, indexed in shortlex order so parents
/// precede children.
struct SpanTree {
    words: FiniteWindow,
    parent: Vec<usize>,
    generator: Vec<usize>,
    children: Vec<Vec<usize>>,
    observed: Vec<bool>,
    window_pos: Vec<Option<usize>>,
}

impl SpanTree {
    fn new(window: &FiniteWindow) -> Self {
        let words = MarkovTreeSpec::span(window);
        let n = words.len();
        let mut parent = alloc::vec![0; n];
        let mut generator = alloc::vec![0; n];
        let mut children = alloc::vec![Vec::new(); n];
        for (v, g) in words.iter().enumerate() {
            if let Some((p, l)) = g.tree_parent() {
                let p = words.index_of(&p).unwrap();
                parent[v] = p;
                generator[v] = l.generator();
                children[p].push(v);
            }
        }
        let window_pos: Vec<Option<usize>> = words.iter().map(|g| window.index_of(g)).collect();
        SpanTree {
            words,
            parent,
            generator,
            children,
            observed: window_pos.iter().map(Option::is_some).collect(),
            window_pos,
        }
    }

    fn len(&self) -> usize {
        self.words.len()
    }
}

/// A nonnegative table over tree nodes `vars`, all with `q` symbols.
/// `vars[0]` is the node currently being eliminated towards the root.
struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn ones(v: usize, q: usize) -> Self {
        Factor {
            vars: alloc::vec![v],
            table: alloc::vec![1.0; q],
        }
    }

    fn rest_len(&self, q: usize) -> usize {
        self.table.len() / q
    }

    /// `Σ_{x_c} P(x_p, x_c) f(x_c, r)`, keeping `x_c` as a variable when `keep`.
    /// The parent slot is left as a placeholder in `vars[0]`.
    fn message(&self, p: &[f64], q: usize, keep: bool) -> Factor {
        let rest = self.rest_len(q);
        if keep {
            let mut table = alloc::vec![0.0; q * q * rest];
            for xp in 0..q {
                for xc in 0..q {
                    let w = p[xp * q + xc];
                    let dst = &mut table[(xp * q + xc) * rest..(xp * q + xc + 1) * rest];
                    let src = &self.table[xc * rest..(xc + 1) * rest];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d = w * s);
                }
            }
            let mut vars = alloc::vec![usize::MAX];
            vars.extend_from_slice(&self.vars);
            Factor { vars, table }
        } else {
            let mut table = alloc::vec![0.0; q * rest];
            for xp in 0..q {
                let dst = &mut table[xp * rest..(xp + 1) * rest];
                for xc in 0..q {
                    let w = p[xp * q + xc];
                    let src = &self.table[xc * rest..(xc + 1) * rest];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += w * s);
                }
            }
            let mut vars = alloc::vec![usize::MAX];
            vars.extend_from_slice(&self.vars[1..]);
            Factor { vars, table }
        }
    }

    /// Product of two factors sharing their first variable.
    fn outer(&self, other: &Factor, q: usize) -> Factor {
        let (a, b) = (self.rest_len(q), other.rest_len(q));
        let mut table = alloc::vec![0.0; q * a * b];
        for x in 0..q {
            for i in 0..a {
                let f = self.table[x * a + i];
                let base = (x * a + i) * b;
                for j in 0..b {
                    table[base + j] = f * other.table[x * b + j];
                }
            }
        }
        let mut vars = self.vars.clone();
        vars.extend_from_slice(&other.vars[1..]);
        Factor { vars, table }
    }

    fn weight_first(mut self, w: &[f64], q: usize) -> Factor {
        let rest = self.rest_len(q);
        for x in 0..q {
            self.table[x * rest..(x + 1) * rest].iter_mut().for_each(|t| *t *= w[x]);
        }
        self
    }

    /// Drops the first variable by summation unless it is kept.
    fn finish(self, q: usize, keep: bool) -> Factor {
        if keep {
            return self;
        }
        let rest = self.rest_len(q);
        let mut table = alloc::vec![0.0; rest];
        for x in 0..q {
            table
                .iter_mut()
                .zip(&self.table[x * rest..(x + 1) * rest])
                .for_each(|(d, s)| *d += s);
        }
        Factor {
            vars: self.vars[1..].to_vec(),
            table,
        }
    }

    fn into_window_table(self, tree: &SpanTree, n: usize, q: usize) -> ProbTable {
        let positions: Vec<usize> = self.vars.iter().map(|&v| tree.window_pos[v].unwrap()).collect();
        let out_layout = MixedRadix::new(alloc::vec![q; n]);
        let mut out = alloc::vec![0.0; out_layout.len()];
        let in_layout = MixedRadix::new(alloc::vec![q; self.vars.len()]);
        let mut digits = alloc::vec![0; self.vars.len()];
        let strides = out_layout.strides();
        for (i, &p) in self.table.iter().enumerate() {
            in_layout.decode(i, &mut digits);
            let j: usize = digits.iter().zip(&positions).map(|(d, &k)| d * strides[k]).sum();
            out[j] += p;
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        ProbTable::new((0..n).collect(), alloc::vec![q; n], out).expect("normalized by construction")
    }
}
