mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use scs_core::meeting::{brute_force_meet, count_starving, prevention_test, MeetingGraph};
use scs_core::resilience::{k_resilience_general, one_resilience_fast, starvation_number, ResilienceValue, DEFAULT_BUDGET};
use scs_core::simulate::{detect_starving, occupancy_invariant_check, simulate, Horizon, Outcome, SimConfig};
use scs_core::Analysis;

/// Least removal set starving at least `k` robots, trying every subset.
fn exhaustive_resilience(g: &MeetingGraph, k: usize) -> ResilienceValue {
    let n = g.node_count();
    (0u32..1 << n)
        .filter_map(|mask| {
            let removed: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            (count_starving(g, &removed).len() >= k).then_some(removed.len())
        })
        .min()
        .map_or(ResilienceValue::Infinite, ResilienceValue::Finite)
}

fn check_pairs(a: &Analysis) {
    let n = a.len();
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let (fast, certs) = prevention_test(a, u, v).unwrap();
                assert_eq!(fast, brute_force_meet(a, u, v).unwrap(), "pair ({u},{v})");
                assert_eq!(fast, !certs.is_empty());
                assert_eq!(a.meeting.has_edge(u, v), a.meeting.has_edge(v, u));
            }
        }
    }
}

#[test]
fn random_instances_meet_as_the_oracle_says() {
    let mut rng = rng(11);
    for round in 0..60 {
        let n = 1 + round % 12;
        let a = analysis(random_instance(&mut rng, n));
        check_pairs(&a);
    }
}

#[test]
fn simulation_agrees_with_counting() {
    let mut rng = rng(13);
    for round in 0..40 {
        let n = 1 + round % 10;
        let a = analysis(random_instance(&mut rng, n));
        for _ in 0..10 {
            let removed = random_removal(&mut rng, n);
            let report = simulate(&a, &SimConfig::removing(removed.iter().copied())).unwrap();
            assert_eq!(detect_starving(&report).unwrap(), count_starving(&a.meeting, &removed), "removed {removed:?}");
            assert!(occupancy_invariant_check(&report));
        }
    }
}

#[test]
fn full_system_never_shifts() {
    let mut rng = rng(14);
    for round in 0..30 {
        let a = analysis(random_instance(&mut rng, 1 + round % 12));
        let report = simulate(&a, &SimConfig::default()).unwrap();
        assert!(report.events.iter().all(|e| e.outcome == Outcome::Met));
        let expected: Vec<usize> = (0..a.decomposition.rings.len())
            .map(|r| a.decomposition.ring_length(r) as usize)
            .collect();
        assert_eq!(report.occupancy[0].counts, expected);
    }
}

#[test]
fn two_periods_repeat_and_show_no_transients() {
    let mut rng = rng(15);
    for round in 0..20 {
        let n = 2 + round % 9;
        let a = analysis(random_instance(&mut rng, n));
        let removed = random_removal(&mut rng, n);
        let cfg = SimConfig {
            removed: removed.clone(),
            horizon: Horizon::Slots(2 * a.ring_lcm()),
            ..Default::default()
        };
        let report = simulate(&a, &cfg).unwrap();
        assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
        let p = report.period as f64;
        let count = |lo: f64, hi: f64| report.events.iter().filter(|e| e.time >= lo - 1e-9 && e.time < hi - 1e-9).count();
        assert_eq!(count(0.0, p), count(p, 2.0 * p));
    }
}

#[test]
fn fast_one_resilience_is_min_degree() {
    let mut rng = rng(16);
    for round in 0..60 {
        let a = analysis(random_instance(&mut rng, 1 + round % 12));
        let fast = one_resilience_fast(&a);
        let general = k_resilience_general(&a.meeting, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(fast.value, ResilienceValue::Finite(a.meeting.min_degree().unwrap()));
        assert_eq!(fast.value, general.value);
        let w = fast.witness.unwrap();
        let removed: BTreeSet<usize> = w.removed.iter().copied().collect();
        assert!(count_starving(&a.meeting, &removed).contains(&w.starving[0]));
    }
}

#[test]
fn general_resilience_matches_subset_search() {
    let mut rng = rng(17);
    for round in 0..25 {
        let a = analysis(random_instance(&mut rng, 2 + round % 9));
        for k in 1..=3 {
            let r = k_resilience_general(&a.meeting, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.value, exhaustive_resilience(&a.meeting, k), "k={k}");
            if let Some(w) = r.witness {
                assert_eq!(w.starving.len(), k);
                let removed: BTreeSet<usize> = w.removed.iter().copied().collect();
                assert!(w.starving.iter().all(|s| count_starving(&a.meeting, &removed).contains(s)));
            }
        }
    }
}

#[test]
fn starvation_number_identity() {
    let mut rng = rng(18);
    for round in 0..30 {
        let a = analysis(random_instance(&mut rng, 1 + round % 12));
        let n = a.len();
        let s = starvation_number(&a.meeting, DEFAULT_BUDGET).unwrap().size;
        assert_eq!(k_resilience_general(&a.meeting, s, DEFAULT_BUDGET).unwrap().value, ResilienceValue::Finite(n - s));
        assert!(k_resilience_general(&a.meeting, s + 1, DEFAULT_BUDGET).unwrap().value.is_infinite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_ring_adjacency_is_rotation_invariant(seed in any::<u64>(), n in 1usize..12) {
        let a = analysis(random_instance(&mut rng(seed), n));
        for (ring, members) in a.placements.ring_members.iter().enumerate() {
            let len = members.len();
            let same: BTreeSet<(usize, usize)> = scs_core::meeting::same_ring_edges(ring, &a.ties, &a.placements)
                .into_iter()
                .map(|(u, v, _)| (a.placements.robots[u].index, a.placements.robots[v].index))
                .collect();
            for &(i, j) in &same {
                prop_assert!(same.contains(&((i + 1) % len, (j + 1) % len)));
            }
        }
    }

    #[test]
    fn resilience_grows_with_k(seed in any::<u64>(), n in 2usize..10) {
        let a = analysis(random_instance(&mut rng(seed), n));
        let mut last = 0;
        for k in 1..=n {
            match k_resilience_general(&a.meeting, k, DEFAULT_BUDGET).unwrap().value {
                ResilienceValue::Finite(v) => {
                    prop_assert!(v >= last);
                    last = v;
                }
                ResilienceValue::Infinite => break,
            }
        }
    }
}
