//! Runtime oracle suite: each check recomputes a quantity by an independent
//! route (hand formula, brute force, transfer matrix, scalar recursion) and
//! compares it with the library.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;
use std::fmt;

use gibbsent::dobrushin::{dobrushin, dobrushin_shift};
use gibbsent::entropy::{
    conditional, f_invariant_ball, f_invariant_markov, gibbs_entropy_exact, gibbs_entropy_ti, ising_f,
    ising_sign_change, phase_transition_criterion, seward_bound, sofic_entropy_estimate, SoficParams, TiParams,
};
use gibbsent::gibbs::{random_structure, RandomShape};
use gibbsent::group::{ball_size, potential_boundary};
use gibbsent::order::{dominates, is_attractive};
use gibbsent::recursion::{boundary_sequence, uniqueness_verdict, Boundary, TreePairModel, Verdict};
use gibbsent::seed::task_rng;
use gibbsent::{
    Alphabet, EnergyTerm, FiniteWindow, GibbsStructure, GroupWord, Letter, MarkovTreeSpec, ProbTable,
    ShiftPotential, SiteOrder, SoficMap,
};
use rand::Rng;
use serde_json::json;

use crate::commands::Report;
use crate::output::Table;

struct Fail(String);

impl<E: fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Outcome = Result<(), Fail>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(Fail(format!($($fmt)+)));
        }
    };
}

struct Check {
    name: &'static str,
    slow: bool,
    run: fn() -> Outcome,
}

const fn check(name: &'static str, run: fn() -> Outcome) -> Check {
    Check { name, slow: false, run }
}

const fn slow(name: &'static str, run: fn() -> Outcome) -> Check {
    Check { name, slow: true, run }
}

fn w(s: &str) -> GroupWord {
    s.parse().expect("literal word parses")
}

fn window(words: &[&str]) -> FiniteWindow {
    FiniteWindow::new(words.iter().map(|s| w(s)))
}

fn ising_table(beta: f64) -> Vec<f64> {
    vec![-beta, beta, beta, -beta]
}

fn edge(beta: f64) -> GibbsStructure {
    GibbsStructure::uniform(2, Alphabet::ising(), vec![EnergyTerm::new(vec![0, 1], ising_table(beta))])
        .expect("edge structure is valid")
}

fn spin(a: usize) -> f64 {
    if a == 1 {
        1.0
    } else {
        -1.0
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Boltzmann weights of an Ising structure on `n` spins with the given edges,
/// enumerated with vertex 0 as the most significant digit.
fn brute_ising(n: usize, edges: &[(usize, usize)], beta: f64) -> Vec<f64> {
    let mut weights: Vec<f64> = (0..1usize << n)
        .map(|i| {
            let x = |v: usize| spin((i >> (n - 1 - v)) & 1);
            (beta * edges.iter().map(|&(a, b)| x(a) * x(b)).sum::<f64>()).exp()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|p| *p /= z);
    weights
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn word_product() -> Outcome {
    let got = w("s1 s2").multiply(&w("s2^-1 s1"));
    ensure!(got == w("s1 s1"), "got {got}");
    Ok(())
}

fn ball_count() -> Outcome {
    let mut layer = vec![Vec::<Letter>::new()];
    let mut total = 1;
    for _ in 0..2 {
        layer = layer
            .iter()
            .flat_map(|word| {
                Letter::all(2)
                    .filter(move |l| word.last().map_or(true, |last| *last != l.inverse()))
                    .map(move |l| {
                        let mut next = word.clone();
                        next.push(l);
                        next
                    })
            })
            .collect();
        total += layer.len();
    }
    ensure!(total == 17, "breadth-first count {total}");
    ensure!(FiniteWindow::ball(2, 2).len() == 17 && ball_size(2, 2) == 17, "library ball size differs");
    Ok(())
}

fn window_product() -> Outcome {
    let got = window(&["e", "s1"]).product(&window(&["s1"]));
    ensure!(got == window(&["s1", "s1 s1"]), "got {got}");
    Ok(())
}

/// `∂F = ⋃_{g ∈ D⁻¹F} D·g \ F`, enumerated directly.
fn boundary_oracle(f: &FiniteWindow, d: &FiniteWindow) -> FiniteWindow {
    let mut out = BTreeSet::new();
    for x in f.iter() {
        for dd in d.iter() {
            let g = dd.inverse().multiply(x);
            for e in d.iter() {
                let y = e.multiply(&g);
                if !f.contains(&y) {
                    out.insert(y);
                }
            }
        }
    }
    FiniteWindow::new(out)
}

fn potential_boundaries() -> Outcome {
    let f = FiniteWindow::identity();
    let d1 = window(&["e", "s1"]);
    ensure!(potential_boundary(&f, &d1) == window(&["s1", "s1^-1"]), "D = {{e, s1}}");
    let d2 = window(&["e", "s1", "s2"]);
    let got = potential_boundary(&f, &d2);
    ensure!(got == boundary_oracle(&f, &d2), "library {got} vs enumeration");
    ensure!(got.len() == 6, "|∂{{e}}| = {}", got.len());
    Ok(())
}

fn overlapping_energy() -> Outcome {
    let g = GibbsStructure::uniform(
        3,
        Alphabet::indexed(2),
        vec![
            EnergyTerm::new(vec![0, 1], vec![0.1, 0.2, 0.3, 0.4]),
            EnergyTerm::new(vec![1, 2], vec![1.0, 2.0, 3.0, 4.0]),
        ],
    )?;
    let e = g.energy(&[1, 0, 1]);
    ensure!((e - (0.3 + 2.0)).abs() < 1e-15, "energy {e}");
    Ok(())
}

fn pinned_neighbour_kernel() -> Outcome {
    for beta in [0.1, 0.7, 2.0] {
        let k = edge(beta).local_kernel(&[0], &[0, 1])?;
        let expect = beta.exp() / (beta.exp() + (-beta).exp());
        ensure!((k.probs()[1] - expect).abs() < 1e-14, "β {beta}: {:?}", k.probs());
    }
    Ok(())
}

fn edge_at_ln2() -> Outcome {
    let g = edge(LN_2);
    let expect = [0.4, 0.1, 0.1, 0.4];
    let mu = g.exact_gibbs()?;
    ensure!(max_diff(mu.probs(), &expect) < 1e-14, "exact {:?}", mu.probs());
    let k = g.local_kernel(&[0, 1], &[0, 0])?;
    ensure!(max_diff(k.probs(), &expect) < 1e-14, "kernel {:?}", k.probs());
    Ok(())
}

fn pinned_kernel_is_conditional() -> Outcome {
    let beta = 0.8;
    let mu = edge(beta).exact_gibbs()?;
    for a in 0..2 {
        let row = [mu.prob(&[a, 0]), mu.prob(&[a, 1])];
        let s = row[0] + row[1];
        let k = edge(beta).local_kernel(&[1], &[a, 0])?;
        ensure!(max_diff(k.probs(), &[row[0] / s, row[1] / s]) < 1e-14, "pin {a}");
    }
    Ok(())
}

fn triangle_table() -> Outcome {
    let beta = 0.45;
    let terms = [(0, 1), (1, 2), (0, 2)]
        .iter()
        .map(|&(a, b)| EnergyTerm::new(vec![a, b], ising_table(beta)))
        .collect();
    let g = GibbsStructure::uniform(3, Alphabet::ising(), terms)?;
    let expect = brute_ising(3, &[(0, 1), (1, 2), (0, 2)], beta);
    let got = g.exact_gibbs()?;
    ensure!(max_diff(got.probs(), &expect) < 1e-14, "{:?}", got.probs());
    Ok(())
}

fn random_structures(count: u64) -> Vec<GibbsStructure> {
    (0..count)
        .map(|seed| {
            let mut rng = task_rng(2024, &[seed]);
            random_structure(
                &RandomShape {
                    vertices: 6,
                    alphabet: 2 + (seed as usize % 2),
                    pairs: 7,
                    fields: true,
                    scale: 1.0,
                },
                &mut rng,
            )
        })
        .collect()
}

fn gibbs_is_fixed_point() -> Outcome {
    for g in random_structures(5) {
        let mu = g.exact_gibbs()?;
        for mask in 1u32..(1 << g.len()) {
            let lambda: Vec<usize> = (0..g.len()).filter(|v| mask >> v & 1 == 1).collect();
            let tv = g.apply_kernel(&lambda, &mu)?.total_variation(&mu)?;
            ensure!(tv < 1e-12, "Λ {lambda:?}: TV {tv}");
        }
    }
    Ok(())
}

fn kernels_compose() -> Outcome {
    for g in random_structures(5) {
        let mut rng = task_rng(7, &[g.len() as u64]);
        let n = g.len();
        let probs: Vec<f64> = (0..g.radices().iter().product::<usize>()).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = probs.iter().sum();
        let mu = ProbTable::new((0..n).collect(), g.radices(), probs.iter().map(|p| p / s).collect())?;
        let (inner, outer) = (vec![1, 3], vec![0, 1, 3, 4]);
        let lhs = g.apply_kernel(&outer, &g.apply_kernel(&inner, &mu)?)?;
        let rhs = g.apply_kernel(&outer, &mu)?;
        let tv = lhs.total_variation(&rhs)?;
        ensure!(tv < 1e-12, "TV {tv}");
    }
    Ok(())
}

fn uniform_is_not_admissible() -> Outcome {
    let g = edge(0.5);
    let mu = ProbTable::uniform(vec![0, 1], vec![2, 2])?;
    ensure!(!g.is_admissible(&[0, 1], &mu, 1e-3)?, "uniform accepted");
    Ok(())
}

fn ground_state_is_admissible() -> Outcome {
    let beta = 25.0;
    let chain = GibbsStructure::uniform(
        3,
        Alphabet::ising(),
        vec![EnergyTerm::new(vec![0, 1], ising_table(beta)), EnergyTerm::new(vec![1, 2], ising_table(beta))],
    )?;
    let g = chain.pin(&[0], &[1, 0, 0])?;
    let mu = ProbTable::point_mass(vec![0, 1, 2], vec![2, 2, 2], &[1, 1, 1])?;
    ensure!(g.is_admissible(&[1, 2], &mu, 1e-9)?, "ground state rejected");
    Ok(())
}

fn glauber_site_law() -> Outcome {
    let beta = 0.6;
    let g = edge(beta);
    let exact = g.local_kernel(&[0], &[0, 1])?.probs()[1];
    let steps = 100_000;
    let mut rng = task_rng(11, &[]);
    let mut omega = vec![0, 1];
    let mut ones = 0usize;
    for _ in 0..steps {
        g.glauber_step(0, &mut omega, &mut rng);
        ensure!(omega[1] == 1, "boundary site changed");
        ones += omega[0];
    }
    let p = ones as f64 / steps as f64;
    let se = (exact * (1.0 - exact) / steps as f64).sqrt();
    ensure!((p - exact).abs() <= 3.0 * se, "{p} vs {exact} (se {se})");
    Ok(())
}

fn sofic_goodness() -> Outcome {
    let s = FiniteWindow::ball(2, 2);
    let mut medians = Vec::new();
    for n in [100, 1000, 10_000] {
        let mut fr: Vec<f64> = (0..20).map(|seed| SoficMap::random(2, n, seed).map(|m| m.good_fraction(&s))).collect::<Result<_, _>>()?;
        fr.sort_by(f64::total_cmp);
        medians.push((fr[9] + fr[10]) / 2.0);
    }
    ensure!(medians.windows(2).all(|p| p[0] <= p[1]), "medians {medians:?}");
    ensure!(medians[2] >= 0.9, "median at 10^4 is {}", medians[2]);
    Ok(())
}

fn five_point_action() -> Outcome {
    let p1 = vec![1, 2, 3, 4, 0];
    let p2 = vec![0, 2, 4, 1, 3];
    let sigma = SoficMap::from_permutations(vec![p1.clone(), p2.clone()])?;
    for v in 0..5 {
        ensure!(sigma.act(&w("s1 s2"), v) == p1[p2[v]], "vertex {v}");
    }
    Ok(())
}

fn truncated_regular_action() -> Outcome {
    let ball = FiniteWindow::ball(2, 5);
    let perms = (0..2)
        .map(|i| {
            let s = GroupWord::generator(i);
            let mut perm = vec![usize::MAX; ball.len()];
            let mut hit = vec![false; ball.len()];
            for (k, x) in ball.iter().enumerate() {
                if let Some(j) = ball.index_of(&s.multiply(x)) {
                    perm[k] = j;
                    hit[j] = true;
                }
            }
            let mut free = (0..ball.len()).filter(|&j| !hit[j]);
            for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
                *p = free.next().expect("free slots match unassigned points");
            }
            perm
        })
        .collect();
    let sigma = SoficMap::from_permutations(perms)?;
    let s = FiniteWindow::ball(2, 1);
    for (k, x) in ball.iter().enumerate().filter(|(_, x)| x.len() <= 2) {
        ensure!(sigma.is_good(&s, k), "interior word {x} is not good");
    }
    Ok(())
}

fn four_conditions(sigma: &SoficMap, s: &FiniteWindow, v: usize) -> bool {
    let n = sigma.len();
    let images: Vec<usize> = s.iter().map(|g| sigma.act(g, v)).collect();
    let distinct = images.iter().collect::<BTreeSet<_>>().len() == images.len();
    let mult = s.iter().all(|a| {
        s.iter().all(|b| images.iter().all(|&x| sigma.act(a, sigma.act(b, x)) == sigma.act(&a.multiply(b), x)))
    });
    let inv = s.iter().all(|g| images.iter().all(|&x| sigma.act(&g.inverse(), sigma.act(g, x)) == x));
    let pre = s
        .iter()
        .all(|g| images.iter().all(|&x| (0..n).filter(|&t| sigma.act(g, t) == x).all(|t| t == sigma.act(&g.inverse(), x))));
    distinct && mult && inv && pre
}

fn goodness_evaluator() -> Outcome {
    let windows = [FiniteWindow::ball(2, 1), FiniteWindow::ball(2, 2), window(&["s1", "s2 s1", "s1^-1 s2^-1"])];
    for seed in 0..50 {
        let sigma = SoficMap::random(2, 10, seed)?;
        for s in &windows {
            for v in 0..10 {
                ensure!(sigma.is_good(s, v) == four_conditions(&sigma, s, v), "seed {seed} vertex {v} window {s}");
            }
        }
    }
    Ok(())
}

fn six_point_pullback() -> Outcome {
    let sigma = SoficMap::from_permutations(vec![vec![1, 2, 0, 4, 5, 3], vec![3, 4, 5, 0, 1, 2]])?;
    let tau = [1, 0, 0, 1, 1, 0];
    let f = window(&["e", "s1", "s2"]);
    let emp = sigma.empirical_pullback(&f, &tau, &Alphabet::ising())?;
    let mut expect = vec![0.0; 8];
    for v in 0..6 {
        let p1 = [1, 2, 0, 4, 5, 3][v];
        let p2 = [3, 4, 5, 0, 1, 2][v];
        let pattern: Vec<usize> = f
            .iter()
            .map(|g| match g.to_string().as_str() {
                "e" => tau[v],
                "s1" => tau[p1],
                _ => tau[p2],
            })
            .collect();
        expect[pattern[0] * 4 + pattern[1] * 2 + pattern[2]] += 1.0 / 6.0;
    }
    ensure!(max_diff(emp.probs(), &expect) < 1e-15, "{:?} vs {expect:?}", emp.probs());
    Ok(())
}

fn single_vertex_collapse() -> Outcome {
    let beta = 0.7;
    let sigma = SoficMap::from_permutations(vec![vec![0], vec![0]])?;
    let g = sigma.induced_structure(&ShiftPotential::ising(beta, 2))?;
    for a in 0..2 {
        let e = g.energy(&[a]);
        ensure!((e + 2.0 * beta).abs() < 1e-14, "symbol {a}: energy {e}");
    }
    Ok(())
}

fn cycle(n: usize) -> Result<SoficMap, Fail> {
    Ok(SoficMap::from_permutations(vec![(0..n).map(|i| (i + 1) % n).collect()])?)
}

/// Cycle law `∏ T(x_i, x_{i+1}) / tr Tⁿ` for the Ising transfer matrix.
fn transfer_cycle(beta: f64, n: usize) -> Vec<f64> {
    let t = |a: usize, b: usize| (beta * spin(a) * spin(b)).exp();
    let (l1, l2) = (2.0 * beta.cosh(), 2.0 * beta.sinh());
    let z = l1.powi(n as i32) + l2.powi(n as i32);
    (0..1usize << n)
        .map(|i| {
            let x = |v: usize| (i >> (n - 1 - v)) & 1;
            (0..n).map(|v| t(x(v), x((v + 1) % n))).product::<f64>() / z
        })
        .collect()
}

fn eight_cycle() -> Outcome {
    let beta = 0.35;
    let g = cycle(8)?.induced_structure(&ShiftPotential::ising(beta, 1))?;
    let oracle = transfer_cycle(beta, 8);
    let mu = g.exact_gibbs()?;
    ensure!(max_diff(mu.probs(), &oracle) < 1e-13, "measure differs");
    let hx = gibbs_entropy_exact(&g)?.value;
    ensure!((hx - h(&oracle)).abs() < 1e-12, "entropy {hx} vs {}", h(&oracle));
    Ok(())
}

fn window_statistics() -> Outcome {
    let beta = 0.15;
    let p = ShiftPotential::ising(beta, 2);
    let f = FiniteWindow::ball(2, 1);
    let tree = MarkovTreeSpec::ising(beta, 2).marginal(&f)?;
    let mut medians = Vec::new();
    for n in [100, 1000, 10_000] {
        let mut tvs = Vec::new();
        for seed in 0..5u64 {
            let sigma = SoficMap::random(2, n, seed)?;
            let g = sigma.induced_structure(&p)?;
            let mut rng = task_rng(77, &[n as u64, seed]);
            let mut tau = g.random_configuration(&mut rng);
            let mut buf = Vec::new();
            for _ in 0..60 {
                g.glauber_sweep(&mut tau, 1.0, &mut buf, &mut rng);
            }
            tvs.push(sigma.empirical_pullback(&f, &tau, p.alphabet())?.total_variation(&tree)?);
        }
        tvs.sort_by(f64::total_cmp);
        medians.push(tvs[2]);
    }
    ensure!(medians[0] > medians[1] && medians[1] > medians[2], "medians {medians:?}");
    Ok(())
}

fn dominance_counterexample() -> Outcome {
    let orders = [SiteOrder::ising(), SiteOrder::ising()];
    let mu1 = ProbTable::new(vec![0, 1], vec![2, 2], vec![0.0, 0.5, 0.5, 0.0])?;
    let mu2 = ProbTable::new(vec![0, 1], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5])?;
    ensure!(mu1.marginal(&[0])? == mu2.marginal(&[0])?, "marginals differ");
    ensure!(!dominates(&orders, &mu1, &mu2)?, "dominance claimed");
    Ok(())
}

fn antiferromagnet_witness() -> Outcome {
    let g = edge(-0.5);
    let r = is_attractive(&g, &[SiteOrder::ising(), SiteOrder::ising()])?;
    ensure!(!r.attractive, "antiferromagnet reported attractive");
    let wit = r.witness.ok_or_else(|| Fail("no witness".into()))?;
    let lo = g.local_kernel(&[wit.vertex], &boundary_config(&g, &wit.boundary, &wit.lower))?;
    let hi = g.local_kernel(&[wit.vertex], &boundary_config(&g, &wit.boundary, &wit.upper))?;
    ensure!(hi.probs()[1] < lo.probs()[1], "witness does not break monotonicity");
    Ok(())
}

fn boundary_config(g: &GibbsStructure, boundary: &[usize], values: &[usize]) -> Vec<usize> {
    let mut omega = vec![0; g.len()];
    for (&u, &a) in boundary.iter().zip(values) {
        omega[u] = a;
    }
    omega
}

fn edge_coefficient() -> Outcome {
    for beta in [0.2, 0.9, -0.4] {
        let g = edge(beta);
        let mut best: f64 = 0.0;
        for (a, b) in [(0, 1), (1, 0)] {
            let ka = g.local_kernel(&[0], &[0, a])?;
            let kb = g.local_kernel(&[0], &[0, b])?;
            best = best.max(0.5 * ka.probs().iter().zip(kb.probs()).map(|(x, y)| (x - y).abs()).sum::<f64>());
        }
        let r = dobrushin(&g)?;
        ensure!((r.b(0, 1) - best).abs() < 1e-12, "β {beta}: {} vs {best}", r.b(0, 1));
        ensure!((best - beta.abs().tanh()).abs() < 1e-12, "β {beta}: tanh");
    }
    Ok(())
}

fn induced_dobrushin() -> Outcome {
    let sigma = SoficMap::random(2, 300, 4)?;
    let small = dobrushin(&sigma.induced_structure(&ShiftPotential::ising(0.05, 2))?)?.b_star();
    let large = dobrushin(&sigma.induced_structure(&ShiftPotential::ising(0.8, 2))?)?.b_star();
    ensure!(small < 1.0 && large >= 1.0, "b* {small} and {large}");
    Ok(())
}

fn b_star_grid() -> Outcome {
    let values: Vec<f64> = (0..=40)
        .map(|k| dobrushin_shift(&ShiftPotential::ising(k as f64 * 0.05, 2)).map(|r| r.b_star))
        .collect::<Result<_, _>>()?;
    ensure!(values[0] == 0.0, "b*(0) = {}", values[0]);
    ensure!(values.windows(2).all(|p| p[1] >= p[0]), "not monotone");
    ensure!(values.windows(2).all(|p| p[1] - p[0] < 0.25), "jump on the grid");
    Ok(())
}

fn scaled_potential() -> Outcome {
    let mut rng = task_rng(5, &[]);
    let support = window(&["e", "s1", "s2^-1 s1"]);
    let table: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p = ShiftPotential::new(2, support, Alphabet::indexed(3), table)?;
    let mut last = f64::INFINITY;
    for t in [1.0, 0.1, 0.01, 0.001] {
        let b = dobrushin_shift(&p.scaled(t))?.b_star;
        ensure!(b <= last, "b* grew at t = {t}");
        last = b;
    }
    ensure!(last < 0.05, "b*(0.001 φ) = {last}");
    Ok(())
}

/// Cavity field of the root under an all-plus (or all-minus) sphere.
fn scalar_marginal(beta: f64, m: usize, r: usize, sign: f64) -> f64 {
    if r == 0 {
        return if sign > 0.0 { 1.0 } else { 0.0 };
    }
    let t = beta.tanh();
    let mut hh = sign * f64::INFINITY;
    for _ in 1..r {
        hh = (2 * m - 1) as f64 * (t * hh.tanh()).atanh();
    }
    let root = (2 * m) as f64 * (t * hh.tanh()).atanh();
    1.0 / (1.0 + (-2.0 * root).exp())
}

fn recursion_oracle() -> Outcome {
    let order = SiteOrder::ising();
    for (beta, r_max) in [(0.2, 60), (0.6, 200)] {
        let model = TreePairModel::ising(beta, 2);
        let hi = boundary_sequence(&model, &order, r_max, Boundary::Max)?;
        let lo = boundary_sequence(&model, &order, r_max, Boundary::Min)?;
        for r in 1..=r_max {
            let (a, b) = (scalar_marginal(beta, 2, r, 1.0), scalar_marginal(beta, 2, r, -1.0));
            ensure!((hi[r][1] - a).abs() < 1e-9 && (lo[r][1] - b).abs() < 1e-9, "β {beta} r {r}");
            let gap = hi[r][1] - lo[r][1];
            if beta > 0.5 {
                ensure!(gap >= 0.1, "β {beta} r {r}: gap {gap}");
            } else if r == r_max {
                ensure!(gap <= 1e-6, "β {beta}: gap {gap} at r {r}");
            }
        }
    }
    Ok(())
}

fn verdicts() -> Outcome {
    let order = SiteOrder::ising();
    let lo = uniqueness_verdict(&TreePairModel::ising(0.2, 2), &order, 1e-6, 200)?.verdict;
    let hi = uniqueness_verdict(&TreePairModel::ising(0.6, 2), &order, 1e-6, 200)?.verdict;
    ensure!(lo == Verdict::Unique && hi == Verdict::NonUnique, "{lo} and {hi}");
    Ok(())
}

fn markov_edge() -> Outcome {
    let spec = MarkovTreeSpec::ising(LN_2, 2);
    let mu = spec.marginal(&window(&["e", "s1"]))?;
    ensure!(max_diff(mu.probs(), &[0.4, 0.1, 0.1, 0.4]) < 1e-14, "{:?}", mu.probs());
    Ok(())
}

fn markov_two_step() -> Outcome {
    let beta = 0.4;
    let spec = MarkovTreeSpec::ising(beta, 2);
    let f = window(&["s1", "s1^-1"]);
    let got = spec.marginal(&f)?;
    let chain = brute_ising(3, &[(0, 1), (1, 2)], beta);
    let mut expect = [0.0; 4];
    for (i, p) in chain.iter().enumerate() {
        expect[(i >> 2) * 2 + (i & 1)] += p;
    }
    ensure!(max_diff(got.probs(), &expect) < 1e-14, "{:?} vs {expect:?}", got.probs());
    Ok(())
}

fn markov_consistency() -> Outcome {
    let spec = MarkovTreeSpec::ising(0.5, 2);
    ensure!(spec.gibbs_consistency(&ShiftPotential::ising(0.5, 2), 1e-10)?, "consistent spec rejected");
    ensure!(!spec.gibbs_consistency(&ShiftPotential::ising(0.6, 2), 1e-10)?, "mismatched spec accepted");
    for m in 1..=3 {
        for beta in [0.0, 0.25, 0.5, 1.0] {
            let ok = MarkovTreeSpec::ising(beta, m).gibbs_consistency(&ShiftPotential::ising(beta, m), 1e-10)?;
            ensure!(ok, "m {m} β {beta}");
        }
    }
    Ok(())
}

fn markov_sampling() -> Outcome {
    let draws = 100_000;
    let spec = MarkovTreeSpec::ising(1.3, 2);
    let mut rng = task_rng(3, &[]);
    let (mut ones, mut agree) = (0usize, 0usize);
    let pair = window(&["e", "s1"]);
    for _ in 0..draws {
        ones += spec.sample_window(&FiniteWindow::identity(), &mut rng)?[0];
        let x = spec.sample_window(&pair, &mut rng)?;
        agree += (x[0] == x[1]) as usize;
    }
    let p = ones as f64 / draws as f64;
    let se = (0.25 / draws as f64).sqrt();
    ensure!((p - 0.5).abs() <= 3.0 * se, "P(+) = {p}");
    let q = (2.0 * 1.3f64).exp() / (1.0 + (2.0 * 1.3f64).exp());
    let a = agree as f64 / draws as f64;
    let se = (q * (1.0 - q) / draws as f64).sqrt();
    ensure!((a - q).abs() <= 3.0 * se, "agreement {a} vs {q}");
    Ok(())
}

const EDGE_ENTROPY: f64 = 1.193_549_604_098_133;

fn table_entropy() -> Outcome {
    let direct = -(0.8 * 0.4f64.ln() + 0.2 * 0.1f64.ln());
    ensure!((direct - EDGE_ENTROPY).abs() < 1e-12 && (direct - 1.193_550).abs() < 1e-6, "{direct}");
    let mu = ProbTable::new(vec![0, 1], vec![2, 2], vec![0.4, 0.1, 0.1, 0.4])?;
    ensure!((mu.entropy() - direct).abs() < 1e-14, "table entropy");
    let c = conditional(&mu, &[0], &[1])?;
    ensure!((c - (direct - LN_2)).abs() < 1e-14 && (c - 0.500_402).abs() < 1e-6, "conditional {c}");
    let exact = gibbs_entropy_exact(&edge(LN_2))?.value;
    ensure!((exact - direct).abs() < 1e-14, "exact {exact}");
    Ok(())
}

fn ti_calibration() -> Outcome {
    let est = gibbs_entropy_ti(&edge(LN_2), &TiParams::default(), 9)?;
    ensure!((est.value - EDGE_ENTROPY).abs() < 3.0 * est.stderr, "edge {est:?}");
    let sigma = SoficMap::random(2, 12, 1)?;
    let g = sigma.induced_structure(&ShiftPotential::ising(0.15, 2))?;
    let exact = gibbs_entropy_exact(&g)?.value;
    let est = gibbs_entropy_ti(&g, &TiParams::default(), 10)?;
    ensure!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
    Ok(())
}

fn sofic_equality() -> Outcome {
    let beta = 0.2;
    let rep = sofic_entropy_estimate(&ShiftPotential::ising(beta, 2), &[10_000], &[1], &SoficParams::default(), 4)?;
    let f = f_invariant_markov(&MarkovTreeSpec::ising(beta, 2));
    ensure!((rep.estimate.value - f).abs() <= 0.02, "{} vs {f}", rep.estimate.value);
    Ok(())
}

fn seward_hand_average() -> Outcome {
    let spec = MarkovTreeSpec::ising(LN_2, 1);
    let est = seward_bound(&spec, &window(&["s1"]), 400, 1)?;
    let first = LN_2;
    let second = EDGE_ENTROPY - LN_2;
    let expect = 0.5 * (first + second);
    ensure!((est.value - expect).abs() <= 3.0 * est.stderr + 1e-12, "{est:?} vs {expect}");
    Ok(())
}

fn seward_window() -> Outcome {
    let beta = 0.2;
    let spec = MarkovTreeSpec::ising(beta, 2);
    let f = f_invariant_markov(&spec);
    let punct = |r| FiniteWindow::ball(2, r).difference(&FiniteWindow::identity());
    let b1 = seward_bound(&spec, &punct(1), 2000, 1)?;
    let b2 = seward_bound(&spec, &punct(2), 2000, 2)?;
    ensure!(b2.value >= f - 3.0 * b2.stderr, "bound {} below f {f}", b2.value);
    ensure!(b2.value - f <= 0.02 + 3.0 * b2.stderr, "bound {} far from f {f}", b2.value);
    let se = (b1.stderr.powi(2) + b2.stderr.powi(2)).sqrt();
    ensure!(b2.value <= b1.value + 3.0 * se, "{} then {}", b1.value, b2.value);
    Ok(())
}

fn f_coherence() -> Outcome {
    for beta in [0.0, 0.2, 0.5] {
        let spec = MarkovTreeSpec::ising(beta, 2);
        let f = f_invariant_markov(&spec);
        let ball = f_invariant_ball(&spec, 1)?;
        ensure!(ball.iter().all(|b| (b - f).abs() <= 1e-10), "β {beta}: {ball:?} vs {f}");
        ensure!((ising_f(beta, 2) - f).abs() <= 1e-12, "β {beta}: closed form");
    }
    ensure!(f_invariant_markov(&MarkovTreeSpec::ising(0.0, 3)) == LN_2, "Bernoulli case");
    Ok(())
}

fn phase_criterion() -> Outcome {
    for beta in [0.1, 1.0, 3.0] {
        let (f, forced) = phase_transition_criterion(&MarkovTreeSpec::ising(beta, 1));
        let q = 1.0 / (1.0 + (2.0 * beta).exp());
        let hb = -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
        ensure!((f - hb).abs() < 1e-12 && !forced, "m 1 β {beta}: {f}");
    }
    let (f, forced) = phase_transition_criterion(&MarkovTreeSpec::ising(2.0, 2));
    let q = 1.0 / (1.0 + 4f64.exp());
    let expect = -LN_2 + 2.0 * -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
    ensure!((f - expect).abs() < 1e-12 && forced && (f + 0.515).abs() < 0.01, "m 2 β 2: {f}");
    let root = ising_sign_change(2).ok_or_else(|| Fail("no sign change".into()))?;
    ensure!(ising_f(root, 2).abs() <= 1e-10, "f at root {}", ising_f(root, 2));
    Ok(())
}

fn shift_dobrushin_record() -> Outcome {
    let r = dobrushin_shift(&ShiftPotential::ising(0.1, 2))?;
    let tanh = (2.0 * 0.1f64).tanh();
    ensure!(r.b_star < 1.0 && (r.b_star - 2.0 * tanh).abs() < 1e-12, "b* {}", r.b_star);
    Ok(())
}

fn checks() -> Vec<Check> {
    vec![
        check("word product reduces", word_product),
        check("ball(2,2) has 17 elements", ball_count),
        check("window product", window_product),
        check("potential boundary of {e}", potential_boundaries),
        check("overlapping terms add", overlapping_energy),
        check("pinned neighbour kernel", pinned_neighbour_kernel),
        check("edge kernel and measure at beta ln 2", edge_at_ln2),
        check("pinned kernel equals conditional", pinned_kernel_is_conditional),
        check("triangle matches brute force", triangle_table),
        check("exact Gibbs is a kernel fixed point", gibbs_is_fixed_point),
        check("nested kernels compose", kernels_compose),
        check("uniform edge measure is not admissible", uniform_is_not_admissible),
        check("ground state is admissible", ground_state_is_admissible),
        check("Glauber site law", glauber_site_law),
        slow("sofic goodness grows with n", sofic_goodness),
        check("five-point word action", five_point_action),
        check("truncated regular action is good inside", truncated_regular_action),
        check("goodness matches four conditions", goodness_evaluator),
        check("six-point pullback table", six_point_pullback),
        check("single vertex collapse", single_vertex_collapse),
        check("eight-cycle transfer matrix", eight_cycle),
        slow("window statistics approach tree marginal", window_statistics),
        check("dominance needs a coupling", dominance_counterexample),
        check("antiferromagnet witness", antiferromagnet_witness),
        check("edge Dobrushin coefficient", edge_coefficient),
        check("induced graph Dobrushin", induced_dobrushin),
        check("b* monotone on a grid", b_star_grid),
        check("scaled potential satisfies Dobrushin", scaled_potential),
        check("boundary recursion matches scalar oracle", recursion_oracle),
        check("verdicts at 0.2 and 0.6", verdicts),
        check("Markov edge marginal", markov_edge),
        check("Markov two-step law", markov_two_step),
        check("Markov Gibbs consistency", markov_consistency),
        check("Markov sampling frequencies", markov_sampling),
        check("table entropies", table_entropy),
        check("thermodynamic integration calibration", ti_calibration),
        slow("sofic entropy at n = 10^4", sofic_equality),
        check("two-ordering random past average", seward_hand_average),
        slow("random past bound on ball(2,2)", seward_window),
        check("f-invariant coherence", f_coherence),
        check("phase criterion values", phase_criterion),
        check("check-dobrushin record", shift_dobrushin_record),
    ]
}

/// Runs every check (skipping slow ones when `quick`) and reports one line each.
pub fn report(quick: bool) -> Report {
    let mut table = Table::new(["check", "status", "detail"]);
    let mut lines = Vec::new();
    let mut failed = 0;
    let mut skipped = 0;
    for c in checks() {
        if quick && c.slow {
            skipped += 1;
            lines.push(format!("SKIP {}", c.name));
            table.push(vec![c.name.into(), "skip".into(), "".into()]);
            continue;
        }
        match (c.run)() {
            Ok(()) => {
                lines.push(format!("PASS {}", c.name));
                table.push(vec![c.name.into(), "pass".into(), "".into()]);
            }
            Err(Fail(msg)) => {
                failed += 1;
                lines.push(format!("FAIL {}: {msg}", c.name));
                table.push(vec![c.name.into(), "fail".into(), msg.into()]);
            }
        }
    }
    let total = table.rows.len();
    lines.push(format!("{} passed, {failed} failed, {skipped} skipped", total - failed - skipped));
    let mut r = Report {
        fields: json!({"quantity": "selftest", "passed": total - failed - skipped, "failed": failed, "skipped": skipped})
            .as_object()
            .cloned()
            .unwrap_or_default(),
        table: Some(table),
        lines: Some(lines),
        ..Report::default()
    };
    r.failed = failed > 0;
    r
}
