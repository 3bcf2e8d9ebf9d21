//! Entropies of tables and Gibbs measures, the sofic-entropy estimator, the
//! random-past conditional-entropy bound, and the f-invariant.
//!
//! All values are in nats.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::gibbs::{GibbsStructure, MixedRadix, ProbTable};
use crate::group::{potential_boundary, FiniteWindow, GroupWord};
use crate::markov::MarkovTreeSpec;
use crate::seed::{derive_seed, task_rng};
use crate::shift::ShiftPotential;
use crate::sofic::SoficMap;
use crate::{math, par, Error, Result, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Thermodynamic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Thermodynamic => "thermodynamic",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
}

impl EntropyEstimate {
    pub fn exact(value: f64) -> Self {
        EntropyEstimate {
            value,
            stderr: 0.0,
            method: Method::Exact,
        }
    }

    /// Same estimate divided by `n` (for per-vertex entropies).
    pub fn per(self, n: usize) -> Self {
        EntropyEstimate {
            value: self.value / n as f64,
            stderr: self.stderr / n as f64,
            method: self.method,
        }
    }
}

/// `H(μ) = −Σ p ln p`.
pub fn shannon(mu: &ProbTable) -> f64 {
    mu.entropy()
}

/// `H(X_target | X_given) = H(target ∪ given) − H(given)`.
pub fn conditional(mu: &ProbTable, target: &[usize], given: &[usize]) -> Result<f64> {
    if target.iter().any(|t| given.contains(t)) {
        return Err(Error::Argument("target and conditioning sets overlap".into()));
    }
    let joint: Vec<usize> = target.iter().chain(given).copied().collect();
    Ok(mu.marginal(&joint)?.entropy() - mu.marginal(given)?.entropy())
}

/// Entropy of the Gibbs measure of a finite structure, by enumeration.
pub fn gibbs_entropy_exact(g: &GibbsStructure) -> Result<EntropyEstimate> {
    gibbs_entropy_exact_with_budget(g, DEFAULT_BUDGET)
}

pub fn gibbs_entropy_exact_with_budget(g: &GibbsStructure, budget: usize) -> Result<EntropyEstimate> {
    Ok(EntropyEstimate::exact(g.exact_gibbs_with_budget(budget)?.entropy()))
}

/// Exact entropy as a sum over interaction components, or `None` when some
/// component has more than `budget` configurations.
pub fn gibbs_entropy_components(g: &GibbsStructure, budget: usize) -> Result<Option<EntropyEstimate>> {
    let comps = g.components();
    let fits = comps
        .iter()
        .all(|c| MixedRadix::size_f64(&c.iter().map(|&v| g.radix(v)).collect::<Vec<_>>()) <= budget as f64);
    if !fits {
        return Ok(None);
    }
    let mut total = 0.0;
    for c in &comps {
        let sub = g.restricted(c)?;
        total += sub.exact_gibbs_with_budget(budget)?.entropy();
    }
    Ok(Some(EntropyEstimate::exact(total)))
}

/// Thermodynamic-integration settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TiParams {
    /// Odd number of Simpson nodes on `s ∈ [0, 1]`.
    pub grid_points: usize,
    /// Sweeps discarded at each node.
    pub burn_in: usize,
    /// Recorded sweeps at each node.
    pub sweeps: usize,
    /// Batches for the batch-means variance.
    pub batches: usize,
}

impl Default for TiParams {
    fn default() -> Self {
        TiParams {
            grid_points: 11,
            burn_in: 200,
            sweeps: 2000,
            batches: 20,
        }
    }
}

impl TiParams {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return Err(Error::Argument("grid_points must be odd and at least 3".into()));
        }
        if self.batches < 2 || self.sweeps < self.batches {
            return Err(Error::Argument("need at least 2 batches and one sweep per batch".into()));
        }
        Ok(())
    }
}

/// Mean of `U` under the uniform law on admissible configurations.
fn uniform_mean_energy(g: &GibbsStructure) -> f64 {
    g.terms()
        .iter()
        .map(|t| {
            let radices: Vec<usize> = t.support().iter().map(|&v| g.radix(v)).collect();
            let layout = MixedRadix::new(radices);
            let mut digits = alloc::vec![0; t.support().len()];
            let (mut sum, mut count) = (0.0, 0usize);
            for (i, &x) in t.table().iter().enumerate() {
                layout.decode(i, &mut digits);
                if t.support().iter().zip(&digits).all(|(&v, &a)| g.allows(v, a)) {
                    sum += x;
                    count += 1;
                }
            }
            sum / count as f64
        })
        .sum()
}

/// Mean energy at scale `s` and the variance of that mean, from one chain.
fn chain_energy(g: &GibbsStructure, s: f64, p: &TiParams, seed: u64, k: u64) -> (f64, f64) {
    let mut rng = task_rng(seed, &[k]);
    let mut omega = g.random_configuration(&mut rng);
    let mut buf = Vec::new();
    for _ in 0..p.burn_in {
        g.glauber_sweep(&mut omega, s, &mut buf, &mut rng);
    }
    let per = p.sweeps / p.batches;
    let mut means = Vec::with_capacity(p.batches);
    for _ in 0..p.batches {
        let mut acc = 0.0;
        for _ in 0..per {
            g.glauber_sweep(&mut omega, s, &mut buf, &mut rng);
            acc += g.energy(&omega);
        }
        means.push(acc / per as f64);
    }
    let b = p.batches as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (mean, var / b)
}

/// `H(η) = ln Z + E_η[U]` with `ln Z = Σ_v ln|A_v| − ∫₀¹ E_{η_s}[U] ds`,
/// where `η_s ∝ e^{−sU}`. The integral uses Simpson's rule; each interior
/// node runs its own Glauber chain with an independent derived seed.
pub fn gibbs_entropy_ti(g: &GibbsStructure, params: &TiParams, seed: u64) -> Result<EntropyEstimate> {
    params.validate()?;
    let k = params.grid_points;
    let w = math::simpson_weights(k);
    let nodes: Vec<usize> = (1..k).collect();
    let mut stats = alloc::vec![(uniform_mean_energy(g), 0.0)];
    if g.terms().is_empty() {
        stats.resize(k, (0.0, 0.0));
    } else {
        let h = 1.0 / (k - 1) as f64;
        stats.extend(par::map(nodes, |j| chain_energy(g, j as f64 * h, params, seed, j as u64)));
    }
    let integral: f64 = w.iter().zip(&stats).map(|(w, (u, _))| w * u).sum();
    let last = k - 1;
    let value = g.log_state_count() - integral + stats[last].0;
    let var: f64 = (0..last).map(|j| w[j] * w[j] * stats[j].1).sum::<f64>()
        + (1.0 - w[last]) * (1.0 - w[last]) * stats[last].1;
    Ok(EntropyEstimate {
        value,
        stderr: math::sqrt(var),
        method: if g.terms().is_empty() {
            Method::Exact
        } else {
            Method::Thermodynamic
        },
    })
}

/// Settings for [`sofic_entropy_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoficParams {
    pub ti: TiParams,
    /// Use exact enumeration when every interaction component has at most
    /// `2^exact_bits` configurations.
    pub exact_bits: f64,
}

impl Default for SoficParams {
    fn default() -> Self {
        SoficParams {
            ti: TiParams {
                grid_points: 11,
                burn_in: 100,
                sweeps: 400,
                batches: 20,
            },
            exact_bits: 24.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoficRun {
    pub n: usize,
    pub seed: u64,
    /// `H(η_i)/n`.
    pub estimate: EntropyEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoficSizeSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub spread: f64,
    pub runs: Vec<SoficRun>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoficReport {
    pub sizes: Vec<SoficSizeSummary>,
    /// Mean over seeds at the largest size, with the Monte Carlo error of that mean.
    pub estimate: EntropyEstimate,
}

/// Per-vertex entropy of one induced structure.
pub fn sofic_run(potential: &ShiftPotential, n: usize, seed: u64, params: &SoficParams, master: u64) -> Result<SoficRun> {
    let sigma = SoficMap::random(potential.rank(), n, seed)?;
    let g = sigma.induced_structure(potential)?;
    let budget = math::exp2(params.exact_bits.min(62.0)) as usize;
    let total = match gibbs_entropy_components(&g, budget)? {
        Some(exact) => exact,
        None => gibbs_entropy_ti(&g, &params.ti, derive_seed(master, &[n as u64, seed]))?,
    };
    Ok(SoficRun {
        n,
        seed,
        estimate: total.per(n),
    })
}

/// `H(η_i)/|V_i|` over random sofic approximations of each size and seed.
pub fn sofic_entropy_estimate(
    potential: &ShiftPotential,
    sizes: &[usize],
    seeds: &[u64],
    params: &SoficParams,
    master: u64,
) -> Result<SoficReport> {
    if sizes.is_empty() || seeds.is_empty() {
        return Err(Error::Argument("need at least one size and one seed".into()));
    }
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let runs = seeds
            .iter()
            .map(|&s| sofic_run(potential, n, s, params, master))
            .collect::<Result<Vec<_>>>()?;
        let k = runs.len() as f64;
        let mean = runs.iter().map(|r| r.estimate.value).sum::<f64>() / k;
        let spread = if runs.len() > 1 {
            math::sqrt(runs.iter().map(|r| (r.estimate.value - mean) * (r.estimate.value - mean)).sum::<f64>() / (k - 1.0))
        } else {
            0.0
        };
        out.push(SoficSizeSummary { n, mean, spread, runs });
    }
    let last = out.iter().max_by_key(|s| s.n).unwrap();
    let k = last.runs.len() as f64;
    let var: f64 = last.runs.iter().map(|r| r.estimate.stderr * r.estimate.stderr).sum::<f64>() / (k * k);
    let method = if last.runs.iter().all(|r| r.estimate.method == Method::Exact) {
        Method::Exact
    } else {
        Method::Thermodynamic
    };
    let estimate = EntropyEstimate {
        value: last.mean,
        stderr: math::sqrt(var),
        method,
    };
    Ok(SoficReport { sizes: out, estimate })
}

/// Support `{e, s1, .., sm}` of the nearest-neighbour interaction of a tree Markov measure.
fn markov_support(rank: usize) -> FiniteWindow {
    FiniteWindow::new(core::iter::once(GroupWord::identity()).chain((0..rank).map(GroupWord::generator)))
}

/// What the site `e` is conditioned on besides its past inside the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Conditioning {
    /// Only `P = {g ∈ W : g before e}`. Nonincreasing in the window and
    /// bounded below by the infinite-window value.
    #[default]
    Past,
    /// `P ∪ ∂W`. Nondecreasing in the window and bounded above by the
    /// infinite-window value.
    PastAndBoundary,
}

impl Conditioning {
    pub fn as_str(self) -> &'static str {
        match self {
            Conditioning::Past => "past",
            Conditioning::PastAndBoundary => "past_and_boundary",
        }
    }
}

/// The window actually ordered: `F ∪ {e}`, with its boundary under the
/// nearest-neighbour support.
pub fn seward_window(rank: usize, window: &FiniteWindow) -> (FiniteWindow, FiniteWindow) {
    let w = window.union(&FiniteWindow::identity());
    let bd = potential_boundary(&w, &markov_support(rank));
    (w, bd)
}

/// `H(X_e | X_{P ∪ extra})` for the past `P` of one ordering.
pub fn seward_term(spec: &MarkovTreeSpec, past: &FiniteWindow, extra: &FiniteWindow) -> Result<f64> {
    spec.root_conditional_entropy(&past.union(extra))
}

/// Monte Carlo estimate of `E_ξ H(X_e | X_{L_ξ ∩ W})` over `samples` uniform
/// orderings of `W = F ∪ {e}`, where `L_ξ ∩ W` is the set of elements that
/// precede `e`. Each term is computed exactly.
pub fn seward_bound(spec: &MarkovTreeSpec, window: &FiniteWindow, samples: usize, seed: u64) -> Result<EntropyEstimate> {
    seward_bound_with(spec, window, samples, seed, Conditioning::Past)
}

pub fn seward_bound_with(
    spec: &MarkovTreeSpec,
    window: &FiniteWindow,
    samples: usize,
    seed: u64,
    conditioning: Conditioning,
) -> Result<EntropyEstimate> {
    if samples == 0 {
        return Err(Error::Argument("need at least one ordering".into()));
    }
    if window.rank_used() > spec.rank() {
        return Err(Error::Argument("window uses generators beyond the Markov rank".into()));
    }
    let (w, bd) = seward_window(spec.rank(), window);
    let extra = match conditioning {
        Conditioning::Past => FiniteWindow::new(core::iter::empty()),
        Conditioning::PastAndBoundary => bd,
    };
    let elements: Vec<GroupWord> = w.iter().cloned().collect();
    const CHUNK: usize = 64;
    let chunks: Vec<usize> = (0..samples).step_by(CHUNK).collect();
    let values = par::map(chunks, |start| -> Result<Vec<f64>> {
        let mut rng = task_rng(seed, &[start as u64]);
        let mut order = elements.clone();
        (start..(start + CHUNK).min(samples))
            .map(|_| {
                order.shuffle(&mut rng);
                let pos = order.iter().position(GroupWord::is_identity).unwrap();
                let past = FiniteWindow::new(order[..pos].iter().cloned());
                seward_term(spec, &past, &extra)
            })
            .collect()
    });
    let mut all = Vec::with_capacity(samples);
    for v in values {
        all.extend(v?);
    }
    let k = all.len() as f64;
    let mean = all.iter().sum::<f64>() / k;
    let stderr = if all.len() > 1 {
        math::sqrt(all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0) / k)
    } else {
        0.0
    };
    Ok(EntropyEstimate {
        value: mean,
        stderr,
        method: Method::MonteCarlo,
    })
}

/// Ball formula `(1−2m)·H(X_{C_r}) + Σ_i H(X_{C_r ∪ C_r·s_i})` for
/// `r = 0..=r_max`, from exact window marginals. `C_r·s_i` is the ball of
/// radius `r` around the tree neighbour `s_i`.
pub fn f_invariant_ball(spec: &MarkovTreeSpec, r_max: usize) -> Result<Vec<f64>> {
    if is_product(spec) {
        return Ok(alloc::vec![entropy_of(spec.rho()); r_max + 1]);
    }
    let m = spec.rank();
    (0..=r_max)
        .map(|r| {
            let c = FiniteWindow::ball(m, r);
            let mut f = (1.0 - 2.0 * m as f64) * spec.marginal(&c)?.entropy();
            for i in 0..m {
                let pair = c.union(&c.translate(&GroupWord::generator(i)));
                f += spec.marginal(&pair)?.entropy();
            }
            Ok(f)
        })
        .collect()
}

fn entropy_of(p: &[f64]) -> f64 {
    p.iter().map(|&x| math::neg_xlogx(x)).sum()
}

/// Every row of every `P_i` equals `ρ`: the measure is i.i.d.
fn is_product(spec: &MarkovTreeSpec) -> bool {
    let q = spec.rho().len();
    (0..spec.rank()).all(|i| spec.transition(i).chunks(q).all(|row| row == spec.rho()))
}

/// Closed form `(1−2m)·H(ρ) + Σ_i H(ρ(a)P_i(a,b))`; exactly `H(ρ)` for
/// i.i.d. measures.
pub fn f_invariant_markov(spec: &MarkovTreeSpec) -> f64 {
    if is_product(spec) {
        return entropy_of(spec.rho());
    }
    let m = spec.rank();
    (1.0 - 2.0 * m as f64) * entropy_of(spec.rho())
        + (0..m).map(|i| entropy_of(&spec.pair_law(i))).sum::<f64>()
}

/// `f` for the Ising measure: `(1−m)·ln 2 + m·H_b(1/(1+e^{2β}))`.
pub fn ising_f(beta: f64, rank: usize) -> f64 {
    let t = math::exp(-2.0 * math::abs(beta));
    let m = rank as f64;
    (1.0 - m) * core::f64::consts::LN_2 + m * math::binary_entropy(t / (1.0 + t))
}

/// `(f, f ≤ 0)`; a nonpositive f-invariant forces more than one Gibbs measure.
pub fn phase_transition_criterion(spec: &MarkovTreeSpec) -> (f64, bool) {
    let f = f_invariant_markov(spec);
    (f, f <= 0.0)
}

/// Smallest `β > 0` with `f_{β,m} = 0`, by bisection; `None` when `f` stays positive.
pub fn ising_sign_change(rank: usize) -> Option<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    while ising_f(hi, rank) > 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ising_f(mid, rank) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let (flo, fhi) = (ising_f(lo, rank), ising_f(hi, rank));
    Some(if math::abs(flo) < math::abs(fhi) { lo } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{Alphabet, EnergyTerm};

    const LN2: f64 = core::f64::consts::LN_2;

    fn edge_table() -> ProbTable {
        ProbTable::new(alloc::vec![0, 1], alloc::vec![2, 2], alloc::vec![0.4, 0.1, 0.1, 0.4]).unwrap()
    }

    #[test]
    fn shannon_examples() {
        let u = ProbTable::uniform(alloc::vec![0], alloc::vec![2]).unwrap();
        assert!((shannon(&u) - LN2).abs() < 1e-15);
        let d = ProbTable::point_mass(alloc::vec![0], alloc::vec![3], &[2]).unwrap();
        assert_eq!(shannon(&d), 0.0);
        let h = -(0.8 * math::ln(0.4) + 0.2 * math::ln(0.1));
        assert!((shannon(&edge_table()) - h).abs() < 1e-15);
        assert!((h - 1.193_550).abs() < 1e-6);
    }

    #[test]
    fn conditional_examples() {
        let c = conditional(&edge_table(), &[0], &[1]).unwrap();
        assert!((c - 0.500_402).abs() < 1e-6);
        assert!((c - math::binary_entropy(0.2)).abs() < 1e-15);
        assert!(conditional(&edge_table(), &[0], &[0]).is_err());
        let copy = ProbTable::new(alloc::vec![0, 1], alloc::vec![2, 2], alloc::vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        assert!(conditional(&copy, &[0], &[1]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ti_on_zero_potential_is_exact() {
        let g = GibbsStructure::uniform(5, Alphabet::ising(), Vec::new()).unwrap();
        let e = gibbs_entropy_ti(&g, &TiParams::default(), 1).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert!((e.value - 5.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn ti_on_an_edge() {
        let b = math::ln(2.0);
        let g = GibbsStructure::uniform(
            2,
            Alphabet::ising(),
            alloc::vec![EnergyTerm::new(alloc::vec![0, 1], alloc::vec![-b, b, b, -b])],
        )
        .unwrap();
        let exact = gibbs_entropy_exact(&g).unwrap().value;
        let est = gibbs_entropy_ti(&g, &TiParams::default(), 11).unwrap();
        assert!(est.stderr > 0.0);
        assert!((est.value - exact).abs() < 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn closed_form_examples() {
        for m in 1..4 {
            assert!((ising_f(0.0, m) - LN2).abs() < 1e-15);
        }
        let f = ising_f(2.0, 2);
        let expect = -LN2 + 2.0 * math::binary_entropy(1.0 / (1.0 + math::exp(4.0)));
        assert!((f - expect).abs() < 1e-14);
        assert!(f < -0.5 && f > -0.53);
        let beta = 0.7;
        let alt = LN2 + 3.0 * (math::ln(math::cosh(beta)) - beta * math::tanh(beta));
        assert!((ising_f(beta, 3) - alt).abs() < 1e-14);
        assert!(ising_sign_change(1).is_none());
        for beta in [0.0, 0.3, 1.7] {
            for m in 1..4 {
                let spec = MarkovTreeSpec::ising(beta, m);
                assert!((ising_f(beta, m) - f_invariant_markov(&spec)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sign_change_is_a_root() {
        let b = ising_sign_change(2).unwrap();
        assert!(ising_f(b, 2).abs() <= 1e-10);
        assert!(phase_transition_criterion(&MarkovTreeSpec::ising(b + 1e-6, 2)).1);
        assert!(!phase_transition_criterion(&MarkovTreeSpec::ising(0.0, 2)).1);
    }

    #[test]
    fn ball_formula_matches_closed_form() {
        for beta in [0.0, 0.2, 0.5] {
            let spec = MarkovTreeSpec::ising(beta, 2);
            let f = f_invariant_markov(&spec);
            for v in f_invariant_ball(&spec, 1).unwrap() {
                assert!((v - f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn seward_window_uses_the_identity() {
        let (w, bd) = seward_window(1, &FiniteWindow::new(["s1".parse().unwrap()]));
        assert_eq!(w.len(), 2);
        assert_eq!(bd.len(), 2);
        assert!(!bd.contains(&GroupWord::identity()));
    }

    #[test]
    fn seward_two_site_window() {
        let spec = MarkovTreeSpec::ising(math::ln(2.0), 1);
        let f = FiniteWindow::new(["s1".parse().unwrap()]);
        let exact = 0.5 * (LN2 + math::binary_entropy(0.2));
        let b = seward_bound(&spec, &f, 4000, 5).unwrap();
        assert!((b.value - exact).abs() < 4.0 * b.stderr, "{b:?} vs {exact}");
        let e_first = seward_term(&spec, &FiniteWindow::new(core::iter::empty()), &FiniteWindow::new(core::iter::empty())).unwrap();
        assert!((e_first - LN2).abs() < 1e-12);
        let lower = seward_bound_with(&spec, &f, 4000, 5, Conditioning::PastAndBoundary).unwrap();
        assert!(lower.value < b.value);
    }

    #[test]
    fn seward_is_seed_deterministic() {
        let spec = MarkovTreeSpec::ising(0.3, 2);
        let f = FiniteWindow::ball(2, 1);
        let a = seward_bound(&spec, &f, 300, 9).unwrap();
        let b = seward_bound(&spec, &f, 300, 9).unwrap();
        assert_eq!(a, b);
    }
}
