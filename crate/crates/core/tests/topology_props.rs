use proptest::prelude::*;
use ultragen::{delinearize, first_divergence_level, linearize, TreeTopology};

fn topology() -> impl Strategy<Value = TreeTopology> {
    prop::collection::vec(1usize..=6, 1..=5).prop_filter_map("leaf count <= 1e4", |p| {
        let n = p.len();
        let t = TreeTopology::new(p, vec![1.0; n]).ok()?;
        (t.leaf_count() <= 10_000).then_some(t)
    })
}

fn level_or_inf(l: Option<usize>) -> usize {
    l.unwrap_or(usize::MAX)
}

proptest! {
    #[test]
    fn linearize_round_trips_over_all_leaves(t in topology()) {
        for i in 0..t.leaf_count() {
            let leaf = delinearize(i, &t).unwrap();
            prop_assert_eq!(linearize(&leaf.path, &t).unwrap(), i);
        }
    }

    #[test]
    fn divergence_is_symmetric_and_tree_like(t in topology(), picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let n = t.leaf_count();
        let leaf = |k: usize| delinearize(picks[k].index(n), &t).unwrap().path;
        let (a, b, c) = (leaf(0), leaf(1), leaf(2));
        let ab = first_divergence_level(&a, &b).unwrap();
        prop_assert_eq!(ab, first_divergence_level(&b, &a).unwrap());
        let bc = first_divergence_level(&b, &c).unwrap();
        let ac = first_divergence_level(&a, &c).unwrap();
        prop_assert!(level_or_inf(ac) >= level_or_inf(ab).min(level_or_inf(bc)));
    }
}

#[test]
fn row_major_formula() {
    let t = TreeTopology::new(vec![3, 4, 2], vec![1.0; 3]).unwrap();
    for a1 in 1..=3 {
        for a2 in 1..=4 {
            for a3 in 1..=2 {
                let expected = (a1 - 1) * 8 + (a2 - 1) * 2 + (a3 - 1);
                assert_eq!(linearize(&[a1, a2, a3], &t).unwrap(), expected);
            }
        }
    }
}
