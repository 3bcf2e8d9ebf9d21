use gibbsent::entropy::{gibbs_entropy_exact, gibbs_entropy_ti, ising_f, TiParams};
use gibbsent::{FiniteWindow, GroupWord, Letter, ShiftPotential, SoficMap};
use proptest::prelude::*;

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len).prop_map(|ls| {
        GroupWord::from_letters(ls.into_iter().map(|(g, inv)| if inv { Letter::neg(g) } else { Letter::pos(g) }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_word_acts_bijectively(n in 1usize..200, seed in any::<u64>(), g in word(2, 6)) {
        let sigma = SoficMap::random(2, n, seed).unwrap();
        let mut seen = vec![false; n];
        for v in 0..n {
            let w = sigma.act(&g, v);
            prop_assert!(!seen[w]);
            seen[w] = true;
            prop_assert_eq!(sigma.act_preimage(&g, w), v);
            prop_assert_eq!(sigma.act(&g.inverse(), w), v);
        }
    }

    #[test]
    fn action_is_a_homomorphism(n in 1usize..100, seed in any::<u64>(), g in word(2, 4), h in word(2, 4)) {
        let sigma = SoficMap::random(2, n, seed).unwrap();
        for v in 0..n {
            prop_assert_eq!(sigma.act(&g.multiply(&h), v), sigma.act(&g, sigma.act(&h, v)));
            prop_assert_eq!(sigma.act(&GroupWord::identity(), v), v);
        }
    }

    #[test]
    fn goodness_is_monotone_in_the_window(n in 20usize..400, seed in any::<u64>(), r in 1usize..=3) {
        let sigma = SoficMap::random(2, n, seed).unwrap();
        let big = FiniteWindow::ball(2, r);
        let small = FiniteWindow::ball(2, r - 1);
        let odd = FiniteWindow::new(big.iter().filter(|g| g.len() % 2 == 1).cloned());
        for v in 0..n {
            if sigma.is_good(&big, v) {
                prop_assert!(sigma.is_good(&small, v));
                prop_assert!(sigma.is_good(&odd, v));
            }
        }
    }

    #[test]
    fn induced_supports_respect_the_degree_bound(n in 3usize..300, seed in any::<u64>(), beta in 0.05f64..1.0) {
        let p = ShiftPotential::ising(beta, 2);
        let sigma = SoficMap::random(2, n, seed).unwrap();
        let g = sigma.induced_structure(&p).unwrap();
        for v in 0..n {
            prop_assert!(g.incident_terms(v).len() <= p.support().len());
        }
    }
}

#[test]
fn good_vertices_carry_the_window_boundary() {
    let p = ShiftPotential::ising(0.4, 2);
    let f = FiniteWindow::ball(2, 1);
    let bd = p.boundary(&f);
    let s = FiniteWindow::ball(2, 3);
    let sigma = SoficMap::random(2, 4000, 12).unwrap();
    let g = sigma.induced_structure(&p).unwrap();
    let mut checked = 0;
    for v in (0..4000).filter(|&v| sigma.is_good(&s, v)).take(300) {
        let image: Vec<usize> = f.iter().map(|h| sigma.act(h, v)).collect();
        let mut expect: Vec<usize> = bd.iter().map(|h| sigma.act(h, v)).collect();
        expect.sort_unstable();
        assert_eq!(g.boundary(&image), expect, "vertex {v}");
        checked += 1;
    }
    assert_eq!(checked, 300);
}

fn cycle(n: usize) -> SoficMap {
    SoficMap::from_permutations(vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap()
}

/// Entropy of the Ising ring `exp(β Σ x_i x_{i+1})` from its transfer matrix.
fn ring_entropy(beta: f64, n: usize) -> f64 {
    let (c, s) = (2.0 * beta.cosh(), 2.0 * beta.sinh());
    let nf = n as f64;
    let ratio = (s / c).powf(nf);
    let log_z = nf * c.ln() + ratio.ln_1p();
    let d_log_z = nf * (s / c + ratio * c / s) / (1.0 + ratio);
    log_z - beta * d_log_z
}

#[test]
fn ring_entropy_matches_transfer_matrix() {
    for &beta in &[0.0, 0.3, 0.8] {
        for n in [3, 7, 12] {
            let g = cycle(n).induced_structure(&ShiftPotential::ising(beta, 1)).unwrap();
            let exact = gibbs_entropy_exact(&g).unwrap().value;
            let oracle = if beta == 0.0 { n as f64 * 2f64.ln() } else { ring_entropy(beta, n) };
            assert!((exact - oracle).abs() < 1e-10, "beta {beta} n {n}: {exact} vs {oracle}");
        }
    }
}

#[test]
fn long_rings_approach_the_closed_form() {
    let beta = 0.5;
    let n = 400;
    let per_site = ring_entropy(beta, n) / n as f64;
    assert!((per_site - ising_f(beta, 1)).abs() < 1e-9);
    let g = cycle(n).induced_structure(&ShiftPotential::ising(beta, 1)).unwrap();
    let est = gibbs_entropy_ti(&g, &TiParams::default(), 3).unwrap();
    assert!((est.value - ring_entropy(beta, n)).abs() < 4.0 * est.stderr + 1e-9, "{est:?}");
}

/// Left multiplication on `ball(2, radius)`, completed to bijections by
/// matching the leftover words in canonical order.
fn truncated_left_regular(radius: usize) -> (FiniteWindow, SoficMap) {
    let ball = FiniteWindow::ball(2, radius);
    let perms = (0..2)
        .map(|i| {
            let s = GroupWord::generator(i);
            let mut perm = vec![usize::MAX; ball.len()];
            let mut hit = vec![false; ball.len()];
            for (k, w) in ball.iter().enumerate() {
                if let Some(j) = ball.index_of(&s.multiply(w)) {
                    perm[k] = j;
                    hit[j] = true;
                }
            }
            let mut free = (0..ball.len()).filter(|&j| !hit[j]);
            for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
                *p = free.next().unwrap();
            }
            perm
        })
        .collect();
    (ball.clone(), SoficMap::from_permutations(perms).unwrap())
}

#[test]
fn interior_of_a_truncated_regular_action_is_good() {
    let (ball, sigma) = truncated_left_regular(5);
    let s = FiniteWindow::ball(2, 1);
    for (k, w) in ball.iter().enumerate() {
        if w.len() <= 2 {
            assert!(sigma.is_good(&s, k), "{w}");
            assert_eq!(sigma.act(&"s1 s2^-1".parse().unwrap(), k), ball.index_of(&"s1 s2^-1".parse::<GroupWord>().unwrap().multiply(w)).unwrap());
        }
    }
}

/// Direct transcription of the four goodness conditions.
fn four_conditions(sigma: &SoficMap, s: &FiniteWindow, v: usize) -> bool {
    let n = sigma.len();
    let images: Vec<usize> = s.iter().map(|g| sigma.act(g, v)).collect();
    let distinct = images.iter().collect::<std::collections::BTreeSet<_>>().len() == images.len();
    let orbit = &images;
    let mult = s.iter().all(|g1| {
        s.iter().all(|g2| orbit.iter().all(|&w| sigma.act(g1, sigma.act(g2, w)) == sigma.act(&g1.multiply(g2), w)))
    });
    let inv = s.iter().all(|g| orbit.iter().all(|&w| sigma.act(&g.inverse(), sigma.act(g, w)) == w));
    let pre = s.iter().all(|g| {
        orbit.iter().all(|&w| (0..n).filter(|&t| sigma.act(g, t) == w).all(|t| t == sigma.act(&g.inverse(), w)))
    });
    distinct && mult && inv && pre
}

#[test]
fn goodness_matches_the_four_condition_evaluator() {
    let windows = [
        FiniteWindow::identity(),
        FiniteWindow::ball(2, 1),
        FiniteWindow::ball(2, 2),
        FiniteWindow::new(["s1", "s2 s1", "s1^-1 s2^-1"].map(|w| w.parse::<GroupWord>().unwrap())),
    ];
    let mut agree_good = 0;
    for seed in 0..200 {
        let sigma = SoficMap::random(2, 10, seed).unwrap();
        for s in &windows {
            for v in 0..10 {
                let expect = four_conditions(&sigma, s, v);
                assert_eq!(sigma.is_good(s, v), expect, "seed {seed} v {v} S {s:?}");
                agree_good += expect as usize;
            }
        }
    }
    assert!(agree_good > 2000);
}

#[test]
fn induced_graphs_meet_dobrushin_only_at_small_beta() {
    use gibbsent::dobrushin::dobrushin;
    let sigma = SoficMap::random(2, 300, 4).unwrap();
    let small = dobrushin(&sigma.induced_structure(&ShiftPotential::ising(0.05, 2)).unwrap()).unwrap();
    assert!(small.b_star() < 1.0, "{}", small.b_star());
    let large = dobrushin(&sigma.induced_structure(&ShiftPotential::ising(0.8, 2)).unwrap()).unwrap();
    assert!(large.b_star() >= 1.0, "{}", large.b_star());
}

#[test]
fn window_statistics_approach_the_tree_marginal() {
    use gibbsent::seed::task_rng;
    use gibbsent::MarkovTreeSpec;
    let beta = 0.15;
    let p = ShiftPotential::ising(beta, 2);
    let window = FiniteWindow::ball(2, 1);
    let tree = MarkovTreeSpec::ising(beta, 2).marginal(&window).unwrap();
    let mut medians = Vec::new();
    for n in [100, 1000, 10_000] {
        let mut tvs: Vec<f64> = (0..5)
            .map(|seed| {
                let sigma = SoficMap::random(2, n, seed).unwrap();
                let g = sigma.induced_structure(&p).unwrap();
                let mut rng = task_rng(77, &[n as u64, seed]);
                let mut tau = g.random_configuration(&mut rng);
                let mut buf = Vec::new();
                for _ in 0..60 {
                    g.glauber_sweep(&mut tau, 1.0, &mut buf, &mut rng);
                }
                let emp = sigma.empirical_pullback(&window, &tau, p.alphabet()).unwrap();
                emp.total_variation(&tree).unwrap()
            })
            .collect();
        tvs.sort_by(f64::total_cmp);
        medians.push(tvs[2]);
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    assert!(medians[2] < 0.05, "{medians:?}");
}
