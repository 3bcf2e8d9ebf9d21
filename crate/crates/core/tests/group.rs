use std::collections::{BTreeSet, VecDeque};

use gibbsent::group::{ball_size, potential_boundary};
use gibbsent::{FiniteWindow, GroupWord, Letter};
use proptest::prelude::*;

fn letter(rank: usize) -> impl Strategy<Value = Letter> {
    (0..rank, any::<bool>()).prop_map(|(g, inv)| if inv { Letter::neg(g) } else { Letter::pos(g) })
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec(letter(rank), 0..=max_len).prop_map(GroupWord::from_letters)
}

fn window(rank: usize) -> impl Strategy<Value = FiniteWindow> {
    prop::collection::vec(word(rank, 3), 1..6).prop_map(FiniteWindow::new)
}

fn bfs_ball(rank: usize, radius: usize) -> usize {
    let mut seen = BTreeSet::from([GroupWord::identity()]);
    let mut queue = VecDeque::from([(GroupWord::identity(), 0)]);
    while let Some((g, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for l in Letter::all(rank) {
            let h = g.multiply(&GroupWord::letter(l));
            if seen.insert(h.clone()) {
                queue.push_back((h, d + 1));
            }
        }
    }
    seen.len()
}

#[test]
fn ball_sizes_match_breadth_first_search() {
    for m in 1..=3 {
        for r in 0..=5 {
            let bfs = bfs_ball(m, r);
            assert_eq!(ball_size(m, r), bfs, "m={m} r={r}");
            assert_eq!(FiniteWindow::ball(m, r).len(), bfs, "m={m} r={r}");
        }
    }
}

#[test]
fn ball_and_sphere_examples() {
    assert_eq!(FiniteWindow::ball(2, 1).len(), 5);
    assert_eq!(FiniteWindow::ball(2, 2).len(), 17);
    assert_eq!(FiniteWindow::sphere(2, 2).len(), 12);
    assert_eq!(FiniteWindow::ball(1, 3).len(), 7);
}

proptest! {
    #[test]
    fn words_stay_reduced(w in word(3, 12)) {
        for pair in w.letters().windows(2) {
            prop_assert!(pair[0] != pair[1].inverse());
        }
    }

    #[test]
    fn multiplication_is_associative(a in word(3, 6), b in word(3, 6), c in word(3, 6)) {
        prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
    }

    #[test]
    fn identity_and_inverses(a in word(3, 8)) {
        let e = GroupWord::identity();
        prop_assert_eq!(a.multiply(&e), a.clone());
        prop_assert_eq!(e.multiply(&a), a.clone());
        prop_assert!(a.multiply(&a.inverse()).is_identity());
        prop_assert!(a.inverse().multiply(&a).is_identity());
    }

    #[test]
    fn words_round_trip_through_text(a in word(3, 8)) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<GroupWord>().unwrap(), a);
    }

    #[test]
    fn boundary_is_disjoint_from_window(f in window(2), d in window(2)) {
        let d = d.union(&FiniteWindow::identity());
        let bd = potential_boundary(&f, &d);
        prop_assert!(!bd.intersects(&f));
    }

    #[test]
    fn translation_is_invertible(f in window(3), g in word(3, 5)) {
        prop_assert_eq!(f.translate(&g).translate(&g.inverse()), f);
    }
}
