mod common;

use std::collections::BTreeSet;

use common::*;
use scs_core::generate::{grid_tree, path as gen_path};
use scs_core::geometry::Instance;
use scs_core::resilience::{
    k_resilience_general, one_resilience_fast, tie_count_lower_bound, tree_k_resilience, tree_one_resilience,
    tree_resilience, tree_two_resilience, ResilienceError, ResilienceValue, TieSummary, DEFAULT_BUDGET,
};
use scs_core::Analysis;

/// Tie lengths of a tree: each edge splits the circles into parts of size `a` and `n − a`.
fn cut_sizes(inst: &Instance) -> BTreeSet<u64> {
    let g = inst.graph();
    let n = g.node_count();
    let mut out = BTreeSet::new();
    for &(i, j) in g.edges() {
        let mut seen = vec![false; n];
        seen[i] = true;
        let mut stack = vec![j];
        seen[j] = true;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.insert(size as u64);
        out.insert((n - size) as u64);
    }
    out
}

fn trees() -> Vec<Instance> {
    let mut rng = rng(21);
    let mut out: Vec<Instance> = (1..=12).map(path).collect();
    for a in 2..=3 {
        out.push(grid_tree(a).unwrap().to_instance().unwrap());
    }
    for round in 0..40 {
        out.push(Instance::new(EPS, &random_tree(&mut rng, 2 + round % 11)).unwrap());
    }
    out
}

#[test]
fn single_ring_of_n_slots() {
    for inst in trees() {
        let a = Analysis::new(inst).unwrap();
        assert_eq!(a.decomposition.rings.len(), 1);
        assert_eq!(a.decomposition.ring_length(0), a.len() as u64);
    }
}

#[test]
fn ties_are_cut_sizes() {
    for inst in trees() {
        let expected: Vec<u64> = cut_sizes(&inst).into_iter().collect();
        let a = Analysis::new(inst).unwrap();
        assert_eq!(a.ties.distinct_for(0), expected.as_slice());
    }
}

#[test]
fn tie_count_bounds() {
    for inst in trees() {
        let n = inst.len();
        let t = Analysis::new(inst).unwrap().ties.distinct_for(0).len();
        assert!(t as f64 >= tie_count_lower_bound(n), "n={n} t={t}");
        assert!(t <= n.saturating_sub(1));
    }
}

#[test]
fn tree_algorithms_match_general_search() {
    for inst in trees() {
        let a = Analysis::new(inst).unwrap();
        let s = TieSummary::from_analysis(&a).unwrap();
        assert_eq!(
            ResilienceValue::Finite(tree_one_resilience(&s)),
            k_resilience_general(&a.meeting, 1, DEFAULT_BUDGET).unwrap().value
        );
        assert_eq!(one_resilience_fast(&a).value, ResilienceValue::Finite(s.t));
        assert_eq!(
            tree_two_resilience(&s).value,
            k_resilience_general(&a.meeting, 2, DEFAULT_BUDGET).unwrap().value,
            "n={}",
            a.len()
        );
        for k in 3..=4 {
            assert_eq!(
                tree_k_resilience(&s, k, DEFAULT_BUDGET).unwrap().value,
                k_resilience_general(&a.meeting, k, DEFAULT_BUDGET).unwrap().value,
                "n={} k={k}",
                a.len()
            );
        }
    }
}

#[test]
fn tree_witnesses_starve_their_robots() {
    for inst in trees() {
        let a = Analysis::new(inst).unwrap();
        let s = TieSummary::from_analysis(&a).unwrap();
        for k in 1..=4 {
            let r = tree_resilience(&s, k, DEFAULT_BUDGET).unwrap();
            if let Some(w) = r.witness {
                let removed: BTreeSet<usize> = w.removed.iter().copied().collect();
                let starving = scs_core::meeting::count_starving(&a.meeting, &removed);
                assert!(w.starving.iter().all(|r| starving.contains(r)), "k={k}");
                assert_eq!(w.starving.len(), k);
            }
        }
    }
}

#[test]
fn full_tie_set_is_never_two_resilient() {
    // a path of three circles has L = {1, 2} = {1, …, n − 1}
    let a = analysis(gen_path(3).unwrap().to_instance().unwrap());
    let s = TieSummary::from_analysis(&a).unwrap();
    assert_eq!(s.ties, vec![1, 2]);
    assert!(tree_two_resilience(&s).value.is_infinite());
    assert!(tree_k_resilience(&s, 3, DEFAULT_BUDGET).unwrap().value.is_infinite());
}

#[test]
fn star_one_resilience() {
    let centers = [(0.0, 0.0), (2.15, 0.0), (-2.15, 0.0), (0.0, 2.15), (0.0, -2.15)]
        .map(|(x, y)| scs_core::geometry::Point::new(x, y));
    let a = analysis(Instance::new(EPS, &centers).unwrap());
    let s = TieSummary::from_analysis(&a).unwrap();
    assert_eq!(s.ties, vec![1, 4]);
    assert_eq!(tree_one_resilience(&s), 2);
}

#[test]
fn grid_tree_tie_sets() {
    // comb with a teeth of a circles: {1..a-1} ∪ {a, 2a, …, (a-1)a} ∪ {n-a+1..n-1}
    for a in 2..=4usize {
        let n = a * a;
        let an = analysis(grid_tree(a).unwrap().to_instance().unwrap());
        let mut expected: BTreeSet<u64> = (1..a as u64).collect();
        expected.extend((1..a as u64).map(|k| k * a as u64));
        expected.extend((n - a + 1) as u64..n as u64);
        let found: BTreeSet<u64> = an.ties.distinct_for(0).iter().copied().collect();
        assert_eq!(found, expected, "a={a}");
        assert_eq!(found.len(), 3 * a - 3);
    }
}

#[test]
fn non_trees_are_rejected() {
    let a = analysis(scs_core::generate::cycle(4).unwrap().to_instance().unwrap());
    assert_eq!(
        TieSummary::from_analysis(&a).unwrap_err(),
        ResilienceError::NotATree { nodes: 4, edges: 4 }
    );
}
