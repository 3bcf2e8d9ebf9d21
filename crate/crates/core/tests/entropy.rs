use gibbsent::entropy::{
    conditional, f_invariant_ball, f_invariant_markov, gibbs_entropy_components, gibbs_entropy_exact, seward_bound,
    seward_bound_with, shannon, sofic_entropy_estimate, Conditioning, Method, SoficParams,
};
use gibbsent::gibbs::{random_structure, MixedRadix, RandomShape};
use gibbsent::seed::rng_from_seed;
use gibbsent::{Alphabet, FiniteWindow, MarkovTreeSpec, ProbTable, ShiftPotential};
use proptest::prelude::*;
use rand::Rng;

const LN2: f64 = std::f64::consts::LN_2;

fn random_table(radices: Vec<usize>, seed: u64) -> ProbTable {
    let mut rng = rng_from_seed(seed);
    let len = MixedRadix::new(radices.clone()).len();
    let w: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen() }).collect();
    let s: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let probs = if s > 0.0 { w.iter().map(|x| x / s).collect() } else { vec![1.0 / len as f64; len] };
    ProbTable::new((0..radices.len()).collect(), radices, probs).unwrap()
}

fn split(n: usize, mask: u32) -> (Vec<usize>, Vec<usize>) {
    (0..n).partition(|&v| mask & (1 << v) != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn chain_rule(radices in prop::collection::vec(2usize..=3, 2..=5), seed in any::<u64>(), mask in any::<u32>()) {
        let mu = random_table(radices.clone(), seed);
        let (target, given) = split(radices.len(), mask);
        prop_assume!(!target.is_empty());
        let lhs = shannon(&mu);
        let rhs = shannon(&mu.marginal(&given).unwrap()) + conditional(&mu, &target, &given).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn conditioning_never_increases_entropy(radices in prop::collection::vec(2usize..=3, 3..=5), seed in any::<u64>(), a in any::<u32>(), b in any::<u32>()) {
        let mu = random_table(radices.clone(), seed);
        let n = radices.len();
        let target = vec![0];
        let g1: Vec<usize> = (1..n).filter(|v| a & (1 << v) != 0).collect();
        let g2: Vec<usize> = (1..n).filter(|v| a & (1 << v) != 0 || b & (1 << v) != 0).collect();
        let h1 = conditional(&mu, &target, &g1).unwrap();
        let h2 = conditional(&mu, &target, &g2).unwrap();
        prop_assert!(h2 <= h1 + 1e-12);
        prop_assert!(h2 >= -1e-12);
    }

    #[test]
    fn component_sum_is_exact(seed in any::<u64>(), pairs in 0usize..6) {
        let shape = RandomShape { vertices: 8, alphabet: 2, pairs, fields: true, scale: 1.0 };
        let g = random_structure(&shape, &mut rng_from_seed(seed));
        let whole = gibbs_entropy_exact(&g).unwrap().value;
        let parts = gibbs_entropy_components(&g, 1 << 20).unwrap().unwrap();
        prop_assert!((whole - parts.value).abs() < 1e-10);
        prop_assert_eq!(parts.method, Method::Exact);
    }
}

#[test]
fn product_measures_give_the_base_entropy() {
    let rho = vec![0.2, 0.5, 0.3];
    let p: Vec<f64> = (0..9).map(|k| rho[k % 3]).collect();
    let spec = MarkovTreeSpec::new(Alphabet::indexed(3), rho.clone(), vec![p.clone(), p]).unwrap();
    let h: f64 = rho.iter().map(|x| -x * x.ln()).sum();
    assert!((f_invariant_markov(&spec) - h).abs() < 1e-14);
    for v in f_invariant_ball(&spec, 1).unwrap() {
        assert!((v - h).abs() < 1e-12);
    }
    assert_eq!(f_invariant_markov(&MarkovTreeSpec::ising(0.0, 2)), LN2);
}

#[test]
fn single_site_potentials_are_exact_at_every_size() {
    let energies = vec![0.3, -0.2, 0.9];
    let p = ShiftPotential::single_site(2, Alphabet::indexed(3), energies.clone()).unwrap();
    let w: Vec<f64> = energies.iter().map(|e| (-e).exp()).collect();
    let z: f64 = w.iter().sum();
    let h: f64 = w.iter().map(|x| -(x / z) * (x / z).ln()).sum();
    let report = sofic_entropy_estimate(&p, &[10, 100, 5000], &[1, 2], &SoficParams::default(), 0).unwrap();
    for size in &report.sizes {
        for run in &size.runs {
            assert_eq!(run.estimate.method, Method::Exact);
            assert!((run.estimate.value - h).abs() < 1e-12, "n={}", size.n);
        }
    }
    assert_eq!(report.estimate.stderr, 0.0);
}

#[test]
fn random_past_bound_shrinks_along_nested_windows() {
    let spec = MarkovTreeSpec::ising(0.2, 2);
    let f = f_invariant_markov(&spec);
    let mut prev: Option<(f64, f64)> = None;
    for r in 1..=3 {
        let w = FiniteWindow::ball(2, r).difference(&FiniteWindow::identity());
        let b = seward_bound(&spec, &w, 2000, 40 + r as u64).unwrap();
        assert!(b.value >= f - 3.0 * b.stderr, "r={r}: {b:?} vs {f}");
        if let Some((v, s)) = prev {
            let tol = 3.0 * (s * s + b.stderr * b.stderr).sqrt();
            assert!(b.value <= v + tol, "r={r}: {} after {v}", b.value);
        }
        prev = Some((b.value, b.stderr));
    }
}

#[test]
fn boundary_conditioning_sits_below_the_past_bound() {
    let spec = MarkovTreeSpec::ising(0.3, 2);
    let f = f_invariant_markov(&spec);
    let w = FiniteWindow::ball(2, 1);
    let upper = seward_bound(&spec, &w, 1000, 3).unwrap();
    let lower = seward_bound_with(&spec, &w, 1000, 3, Conditioning::PastAndBoundary).unwrap();
    assert!(lower.value < f && f < upper.value);
}

#[test]
fn ti_matches_enumeration_on_an_induced_graph() {
    use gibbsent::entropy::{gibbs_entropy_ti, TiParams};
    use gibbsent::SoficMap;
    let g = SoficMap::random(2, 12, 6).unwrap().induced_structure(&ShiftPotential::ising(0.15, 2)).unwrap();
    let exact = gibbs_entropy_exact(&g).unwrap().value;
    let est = gibbs_entropy_ti(&g, &TiParams::default(), 19).unwrap();
    assert!((est.value - exact).abs() <= 3.0 * est.stderr, "{est:?} vs {exact}");
}
