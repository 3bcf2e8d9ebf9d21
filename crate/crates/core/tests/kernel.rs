use gibbsent::gibbs::{random_structure, site_conditional, MixedRadix, RandomShape};
use gibbsent::seed::rng_from_seed;
use gibbsent::{GibbsStructure, ProbTable};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-12;

fn structure(seed: u64, n: usize, q: usize) -> GibbsStructure {
    let shape = RandomShape {
        vertices: n,
        alphabet: q,
        pairs: n + 2,
        fields: true,
        scale: 1.0,
    };
    random_structure(&shape, &mut rng_from_seed(seed))
}

/// Small structures with at most 2^12 configurations.
fn small() -> impl Strategy<Value = GibbsStructure> {
    (any::<u64>(), 2usize..=4)
        .prop_flat_map(|(seed, q)| {
            let max_n = match q {
                2 => 8usize,
                3 => 6,
                _ => 5,
            };
            (Just(seed), 2..=max_n, Just(q))
        })
        .prop_map(|(seed, n, q)| structure(seed, n, q))
}

fn all_configs(g: &GibbsStructure) -> Vec<Vec<usize>> {
    let layout = MixedRadix::new(g.radices());
    let mut digits = vec![0; g.len()];
    (0..layout.len())
        .map(|i| {
            layout.decode(i, &mut digits);
            digits.clone()
        })
        .collect()
}

fn random_table(g: &GibbsStructure, seed: u64) -> ProbTable {
    let mut rng = rng_from_seed(seed);
    let n = MixedRadix::new(g.radices()).len();
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    ProbTable::new((0..g.len()).collect(), g.radices(), w.iter().map(|x| x / s).collect()).unwrap()
}

/// Conditional law on `lambda` given `omega` off `lambda`, from full energies.
fn kernel_oracle(g: &GibbsStructure, lambda: &[usize], omega: &[usize]) -> Vec<(Vec<usize>, f64)> {
    let mut out: Vec<(Vec<usize>, f64)> = all_configs(g)
        .into_iter()
        .filter(|x| (0..g.len()).all(|v| lambda.contains(&v) || x[v] == omega[v]))
        .map(|x| {
            let u = g.energy(&x);
            (x, u)
        })
        .collect();
    let min = out.iter().map(|(_, u)| *u).fold(f64::INFINITY, f64::min);
    let z: f64 = out.iter().map(|(_, u)| (-(u - min)).exp()).sum();
    for (_, u) in &mut out {
        *u = (-(*u - min)).exp() / z;
    }
    out
}

fn subset(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|&v| mask & (1 << v) != 0).collect()
}

fn tv(a: &ProbTable, b: &ProbTable) -> f64 {
    a.total_variation(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_kernel_matches_energy_oracle(g in small(), mask in 1u32..256, seed in any::<u64>()) {
        let lambda = subset(g.len(), mask);
        prop_assume!(!lambda.is_empty());
        let omega = g.random_configuration(&mut rng_from_seed(seed));
        let k = g.local_kernel(&lambda, &omega).unwrap();
        for (x, p) in kernel_oracle(&g, &lambda, &omega) {
            let sub: Vec<usize> = lambda.iter().map(|&v| x[v]).collect();
            prop_assert!((k.prob(&sub) - p).abs() < TOL);
        }
    }

    #[test]
    fn kernel_reads_only_the_boundary(g in small(), mask in 1u32..256, s1 in any::<u64>(), s2 in any::<u64>()) {
        let lambda = subset(g.len(), mask);
        prop_assume!(!lambda.is_empty());
        let bd = g.boundary(&lambda);
        let w1 = g.random_configuration(&mut rng_from_seed(s1));
        let mut w2 = g.random_configuration(&mut rng_from_seed(s2));
        for &v in &bd {
            w2[v] = w1[v];
        }
        prop_assert_eq!(g.local_kernel(&lambda, &w1).unwrap(), g.local_kernel(&lambda, &w2).unwrap());
    }

    #[test]
    fn nested_kernels_compose(g in small(), inner in 1u32..256, extra in 0u32..256, seed in any::<u64>()) {
        let small_set = subset(g.len(), inner);
        let big_set = subset(g.len(), inner | extra);
        prop_assume!(!small_set.is_empty());
        let mu = random_table(&g, seed);
        let big = g.apply_kernel(&big_set, &mu).unwrap();
        let a = g.apply_kernel(&small_set, &big).unwrap();
        let b = g.apply_kernel(&big_set, &g.apply_kernel(&small_set, &mu).unwrap()).unwrap();
        prop_assert!(tv(&a, &big) < TOL);
        prop_assert!(tv(&b, &big) < TOL);
        prop_assert!(tv(&g.apply_kernel(&big_set, &big).unwrap(), &big) < TOL);
    }

    #[test]
    fn exact_gibbs_is_fixed_by_every_kernel(g in small(), mask in 1u32..256) {
        let lambda = subset(g.len(), mask);
        prop_assume!(!lambda.is_empty());
        let eta = g.exact_gibbs().unwrap();
        prop_assert!(tv(&g.apply_kernel(&lambda, &eta).unwrap(), &eta) < TOL);
        prop_assert!(g.is_admissible(&lambda, &eta, 1e-10).unwrap());
    }

    #[test]
    fn exact_gibbs_matches_boltzmann_weights(g in small()) {
        let eta = g.exact_gibbs().unwrap();
        let all: Vec<usize> = (0..g.len()).collect();
        let omega = vec![0; g.len()];
        for (x, p) in kernel_oracle(&g, &all, &omega) {
            prop_assert!((eta.prob(&x) - p).abs() < TOL);
        }
    }

    #[test]
    fn energy_shifts_leave_kernels_unchanged(g in small(), c in -5.0f64..5.0, mask in 1u32..256, seed in any::<u64>()) {
        let t = (seed as usize) % g.terms().len();
        let h = g.with_term(t, g.terms()[t].shifted(c)).unwrap();
        prop_assert!(tv(&g.exact_gibbs().unwrap(), &h.exact_gibbs().unwrap()) < TOL);
        let lambda = subset(g.len(), mask);
        prop_assume!(!lambda.is_empty());
        let omega = g.random_configuration(&mut rng_from_seed(seed));
        let a = g.local_kernel(&lambda, &omega).unwrap();
        let b = h.local_kernel(&lambda, &omega).unwrap();
        prop_assert!(tv(&a, &b) < TOL);
    }

    #[test]
    fn glauber_transition_matrix_fixes_gibbs(g in small()) {
        let configs = all_configs(&g);
        let layout = MixedRadix::new(g.radices());
        let eta = g.exact_gibbs().unwrap();
        let pi: Vec<f64> = configs.iter().map(|x| eta.prob(x)).collect();
        let mut next = vec![0.0; configs.len()];
        let mut cond = Vec::new();
        let n = g.len() as f64;
        for (i, x) in configs.iter().enumerate() {
            for v in 0..g.len() {
                site_conditional(&g, v, x, 1.0, &mut cond);
                let mut y = x.clone();
                for (a, p) in cond.iter().enumerate() {
                    y[v] = a;
                    next[layout.index(&y)] += pi[i] * p / n;
                }
            }
        }
        for (a, b) in next.iter().zip(&pi) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn glauber_chain_visits_states_in_gibbs_proportion() {
    let g = structure(17, 3, 2);
    let eta = g.exact_gibbs().unwrap();
    let mut rng = rng_from_seed(4);
    let mut omega = g.random_configuration(&mut rng);
    let layout = MixedRadix::new(g.radices());
    let mut counts = vec![0usize; layout.len()];
    let steps = 200_000;
    for _ in 0..steps {
        let v = rng.gen_range(0..g.len());
        g.glauber_step(v, &mut omega, &mut rng);
        counts[layout.index(&omega)] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = eta.prob(&eta.config_at(i));
        assert!((c as f64 / steps as f64 - p).abs() < 0.01, "state {i}");
    }
}

#[test]
fn pinned_vertices_hold_their_value() {
    let g = structure(5, 4, 3);
    let omega = vec![2, 1, 0, 2];
    let p = g.pin(&[1, 3], &omega).unwrap();
    let eta = p.exact_gibbs().unwrap();
    let m = eta.marginal(&[1, 3]).unwrap();
    assert!((m.prob(&[1, 2]) - 1.0).abs() < TOL);
    let free = g.local_kernel(&[0, 2], &omega).unwrap();
    assert!(tv(&eta.marginal(&[0, 2]).unwrap(), &free) < TOL);
}
