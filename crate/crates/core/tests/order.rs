use gibbsent::dobrushin::{dobrushin, dobrushin_shift};
use gibbsent::gibbs::{random_structure, MixedRadix, RandomShape};
use gibbsent::order::{dominates, is_attractive};
use gibbsent::recursion::{boundary_sequence, Boundary, TreePairModel};
use gibbsent::seed::rng_from_seed;
use gibbsent::{Alphabet, EnergyTerm, FiniteWindow, GibbsStructure, GroupWord, ProbTable, ShiftPotential, SiteOrder};
use proptest::prelude::*;
use rand::Rng;

fn random_law(radices: &[usize], rng: &mut impl Rng) -> ProbTable {
    let n = MixedRadix::new(radices.to_vec()).len();
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = w.iter().sum();
    ProbTable::new((0..radices.len()).collect(), radices.to_vec(), w.iter().map(|x| x / s).collect()).unwrap()
}

/// Moves a random share of each atom to a random configuration above it.
fn push_up(mu: &ProbTable, rng: &mut impl Rng) -> ProbTable {
    let layout = mu.layout().clone();
    let mut out = mu.probs().to_vec();
    for i in 0..out.len() {
        let x = mu.config_at(i);
        let y: Vec<usize> = x.iter().zip(mu.radices()).map(|(&a, &r)| rng.gen_range(a..r)).collect();
        let moved = mu.probs()[i] * rng.gen::<f64>();
        out[i] -= moved;
        out[layout.index(&y)] += moved;
    }
    ProbTable::new(mu.domain().to_vec(), mu.radices().to_vec(), out).unwrap()
}

fn chains(radices: &[usize]) -> Vec<SiteOrder> {
    radices.iter().map(|&q| SiteOrder::chain(Alphabet::indexed(q))).collect()
}

fn shape() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dominance_is_reflexive(radices in shape(), seed in any::<u64>()) {
        let mu = random_law(&radices, &mut rng_from_seed(seed));
        prop_assert!(dominates(&chains(&radices), &mu, &mu).unwrap());
    }

    #[test]
    fn dominance_is_transitive(radices in shape(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let o = chains(&radices);
        let a = random_law(&radices, &mut rng);
        let b = push_up(&a, &mut rng);
        let c = push_up(&b, &mut rng);
        prop_assert!(dominates(&o, &a, &b).unwrap());
        prop_assert!(dominates(&o, &b, &c).unwrap());
        prop_assert!(dominates(&o, &a, &c).unwrap());
    }

    #[test]
    fn mutual_dominance_forces_equality(radices in shape(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let o = chains(&radices);
        let a = random_law(&radices, &mut rng);
        let b = if rng.gen() { push_up(&a, &mut rng) } else { random_law(&radices, &mut rng) };
        if dominates(&o, &a, &b).unwrap() && dominates(&o, &b, &a).unwrap() {
            prop_assert!(a.total_variation(&b).unwrap() < 1e-10);
        }
    }
}

#[test]
fn chain_dominance_is_cumulative_mass_comparison() {
    let mut rng = rng_from_seed(11);
    for k in 0..1000 {
        let q = 2 + k % 3;
        let o = chains(&[q]);
        let a = random_law(&[q], &mut rng);
        let b = if k % 2 == 0 { push_up(&a, &mut rng) } else { random_law(&[q], &mut rng) };
        let mut ca = 0.0;
        let mut cb = 0.0;
        let mut expect = true;
        for s in 0..q {
            ca += a.probs()[s];
            cb += b.probs()[s];
            if cb > ca + 1e-12 {
                expect = false;
            }
        }
        assert_eq!(dominates(&o, &a, &b).unwrap(), expect, "pair {k}");
    }
}

fn ferromagnet(seed: u64, n: usize) -> GibbsStructure {
    let mut rng = rng_from_seed(seed);
    let mut terms: Vec<EnergyTerm> = (0..n)
        .map(|v| {
            let h = rng.gen_range(-1.0..1.0);
            EnergyTerm::new(vec![v], vec![h, -h])
        })
        .collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                let j = rng.gen_range(0.0..1.0);
                terms.push(EnergyTerm::new(vec![u, v], vec![-j, j, j, -j]));
            }
        }
    }
    GibbsStructure::uniform(n, Alphabet::ising(), terms).unwrap()
}

fn product(ps: &[f64]) -> ProbTable {
    let radices = vec![2; ps.len()];
    let layout = MixedRadix::new(radices.clone());
    let probs = (0..layout.len())
        .map(|i| {
            let mut d = vec![0; ps.len()];
            layout.decode(i, &mut d);
            d.iter().zip(ps).map(|(&a, &p)| if a == 1 { p } else { 1.0 - p }).product()
        })
        .collect();
    ProbTable::new((0..ps.len()).collect(), radices, probs).unwrap()
}

#[test]
fn attractive_kernels_preserve_dominance() {
    let mut rng = rng_from_seed(21);
    for seed in 0..20 {
        let n = 5;
        let g = ferromagnet(seed, n);
        let orders = vec![SiteOrder::ising(); n];
        assert!(is_attractive(&g, &orders).unwrap().attractive);
        for _ in 0..10 {
            let lo: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let hi: Vec<f64> = lo.iter().map(|&p| p + (1.0 - p) * rng.gen::<f64>()).collect();
            let (a, b) = (product(&lo), product(&hi));
            assert!(dominates(&orders, &a, &b).unwrap());
            let lambda: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if lambda.is_empty() {
                continue;
            }
            let ka = g.apply_kernel(&lambda, &a).unwrap();
            let kb = g.apply_kernel(&lambda, &b).unwrap();
            assert!(dominates(&orders, &ka, &kb).unwrap(), "seed {seed} lambda {lambda:?}");
        }
    }
}

#[test]
fn antiferromagnet_has_a_valid_witness() {
    let g = GibbsStructure::uniform(
        3,
        Alphabet::ising(),
        vec![
            EnergyTerm::new(vec![0, 1], vec![0.5, -0.5, -0.5, 0.5]),
            EnergyTerm::new(vec![1, 2], vec![-0.2, 0.2, 0.2, -0.2]),
        ],
    )
    .unwrap();
    let orders = vec![SiteOrder::ising(); 3];
    let report = is_attractive(&g, &orders).unwrap();
    assert!(!report.attractive);
    let w = report.witness.unwrap();
    let o = SiteOrder::ising();
    assert!(w.lower.iter().zip(&w.upper).all(|(&a, &b)| o.le(a, b)));
    let mut lo = vec![0; 3];
    let mut hi = vec![0; 3];
    for (k, &u) in w.boundary.iter().enumerate() {
        lo[u] = w.lower[k];
        hi[u] = w.upper[k];
    }
    let a = g.local_kernel(&[w.vertex], &lo).unwrap();
    let b = g.local_kernel(&[w.vertex], &hi).unwrap();
    assert!(!dominates(&[o], &a, &b).unwrap());
}

#[test]
fn boundary_recursions_sandwich() {
    let o = SiteOrder::ising();
    let one = |p: &[f64]| ProbTable::new(vec![0], vec![2], p.to_vec()).unwrap();
    let mut rng = rng_from_seed(8);
    for _ in 0..12 {
        let m = rng.gen_range(1..=3);
        let beta = rng.gen_range(0.0..1.0);
        let h = rng.gen_range(-0.3..0.3);
        let pair = vec![vec![-beta, beta, beta, -beta]; m];
        let model = TreePairModel::new(Alphabet::ising(), vec![h, -h], pair).unwrap();
        let hi = boundary_sequence(&model, &o, 60, Boundary::Max).unwrap();
        let lo = boundary_sequence(&model, &o, 60, Boundary::Min).unwrap();
        for r in 0..=60 {
            assert!(dominates(&[o.clone()], &one(&lo[r]), &one(&hi[r])).unwrap(), "r={r}");
            if r > 0 {
                assert!(dominates(&[o.clone()], &one(&hi[r]), &one(&hi[r - 1])).unwrap(), "max r={r}");
                assert!(dominates(&[o.clone()], &one(&lo[r - 1]), &one(&lo[r])).unwrap(), "min r={r}");
            }
        }
    }
}

#[test]
fn zero_potential_has_zero_interdependence() {
    let g = GibbsStructure::uniform(
        4,
        Alphabet::indexed(3),
        vec![EnergyTerm::new(vec![0, 1], vec![0.0; 9]), EnergyTerm::new(vec![2], vec![0.0; 3])],
    )
    .unwrap();
    let r = dobrushin(&g).unwrap();
    assert_eq!(r.b_star(), 0.0);
    assert!(r.b_row().iter().all(|&b| b == 0.0));
    let s = dobrushin_shift(&ShiftPotential::ising(0.0, 2)).unwrap();
    assert_eq!(s.b_star, 0.0);
}

#[test]
fn dobrushin_coefficients_are_bounded_and_local() {
    for seed in 0..10 {
        let shape = RandomShape {
            vertices: 5,
            alphabet: 3,
            pairs: 4,
            fields: true,
            scale: 1.5,
        };
        let g = random_structure(&shape, &mut rng_from_seed(seed));
        let r = dobrushin(&g).unwrap();
        for v in 0..g.len() {
            let bd = g.boundary(&[v]);
            for u in 0..g.len() {
                let b = r.b(v, u);
                assert!((0.0..=1.0).contains(&b));
                if !bd.contains(&u) {
                    assert_eq!(b, 0.0);
                }
            }
        }
    }
}

#[test]
fn shift_interdependence_grows_with_beta() {
    let grid: Vec<f64> = (0..=40).map(|k| 0.025 * k as f64).collect();
    let b: Vec<f64> = grid.iter().map(|&beta| dobrushin_shift(&ShiftPotential::ising(beta, 2)).unwrap().b_star).collect();
    assert_eq!(b[0], 0.0);
    for k in 1..b.len() {
        assert!(b[k] >= b[k - 1], "beta {}", grid[k]);
        assert!(b[k] - b[k - 1] < 0.11, "jump at beta {}", grid[k]);
    }
}

#[test]
fn scaled_potentials_eventually_satisfy_dobrushin() {
    let support = FiniteWindow::new(["e", "s1", "s2 s1^-1"].map(|w| w.parse::<GroupWord>().unwrap()));
    let mut rng = rng_from_seed(2);
    let table: Vec<f64> = (0..27).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let phi = ShiftPotential::new(2, support, Alphabet::indexed(3), table).unwrap();
    let b: Vec<f64> = [1.0, 0.3, 0.1, 0.03, 0.01, 0.0]
        .iter()
        .map(|&t| dobrushin_shift(&phi.scaled(t)).unwrap().b_star)
        .collect();
    for w in b.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{b:?}");
    }
    assert!(b[4] < 0.1 && b[5] == 0.0, "{b:?}");
}

fn root_gap(beta: f64, r: usize) -> Vec<f64> {
    let model = TreePairModel::ising(beta, 2);
    let o = SiteOrder::ising();
    let hi = boundary_sequence(&model, &o, r, Boundary::Max).unwrap();
    let lo = boundary_sequence(&model, &o, r, Boundary::Min).unwrap();
    hi.iter().zip(&lo).map(|(a, b)| (a[1] - b[1]).abs()).collect()
}

/// Root magnetisation under the `+` boundary from the scalar field recursion
/// `h ← 3·atanh(tanh β · tanh h)`, root field `4·atanh(tanh β · tanh h)`.
fn scalar_oracle(beta: f64, r: usize) -> f64 {
    let t = beta.tanh();
    let mut h = f64::INFINITY;
    for _ in 1..r {
        h = 3.0 * (t * h.tanh()).atanh();
    }
    let root = 4.0 * (t * h.tanh()).atanh();
    (root.exp() / (root.exp() + (-root).exp()) - 0.5) * 2.0
}

#[test]
fn recursions_agree_with_the_scalar_oracle() {
    for &beta in &[0.2, 0.6] {
        let model = TreePairModel::ising(beta, 2);
        let hi = boundary_sequence(&model, &SiteOrder::ising(), 80, Boundary::Max).unwrap();
        for r in 1..=80 {
            let m = hi[r][1] - hi[r][0];
            assert!((m - scalar_oracle(beta, r)).abs() < 1e-12, "beta {beta} r {r}");
        }
    }
    let below = root_gap(0.2, 60);
    assert!(below[60] < 1e-6, "{}", below[60]);
    let above = root_gap(0.6, 200);
    assert!(above[1..].iter().all(|&g| g >= 0.1));
}
