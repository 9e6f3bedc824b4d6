//! k-resilience and starvation numbers.
//!
//! The k-resilience is the least number of robots whose removal starves at
//! least `k` survivors. Starving robots form an independent set of the
//! meeting graph and the cheapest way to starve a set `S` is to remove its
//! neighborhood, so the general algorithm searches independent k-sets.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use num_integer::Integer;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::meeting::MeetingGraph;
use crate::rings::{as_integer, distance_to_crossing};
use crate::Analysis;

/// Default cap on search-node expansions.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResilienceError {
    #[error("search budget of {budget} expansions exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("instance is not a tree ({edges} edges on {nodes} circles)")]
    NotATree { nodes: usize, edges: usize },
    #[error("k must be at least {min}, got {k}")]
    InvalidK { k: usize, min: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResilienceValue {
    Finite(usize),
    Infinite,
}

impl ResilienceValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            ResilienceValue::Finite(v) => Some(v),
            ResilienceValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ResilienceValue::Infinite
    }
}

impl std::fmt::Display for ResilienceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResilienceValue::Finite(v) => write!(f, "{v}"),
            ResilienceValue::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for ResilienceValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ResilienceValue::Finite(v) => s.serialize_u64(*v as u64),
            ResilienceValue::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// Robots that starve and the robots removed to starve them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub starving: Vec<usize>,
    pub removed: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResilienceResult {
    pub k: usize,
    pub value: ResilienceValue,
    pub witness: Option<Witness>,
}

impl ResilienceResult {
    fn infinite(k: usize) -> Self {
        ResilienceResult {
            k,
            value: ResilienceValue::Infinite,
            witness: None,
        }
    }

    fn finite(k: usize, starving: Vec<usize>, removed: Vec<usize>) -> Self {
        ResilienceResult {
            k,
            value: ResilienceValue::Finite(removed.len()),
            witness: Some(Witness { starving, removed }),
        }
    }
}

struct Counter {
    used: u64,
    budget: u64,
}

impl Counter {
    fn new(budget: u64) -> Self {
        Counter { used: 0, budget }
    }

    fn tick(&mut self) -> Result<(), ResilienceError> {
        self.used += 1;
        if self.used > self.budget {
            Err(ResilienceError::BudgetExceeded { budget: self.budget })
        } else {
            Ok(())
        }
    }
}

fn neighborhood(graph: &MeetingGraph, set: &[usize]) -> Vec<usize> {
    let mut nb = FixedBitSet::with_capacity(graph.node_count());
    for &u in set {
        nb.union_with(graph.neighbor_set(u));
    }
    nb.ones().collect()
}

/// Exact k-resilience by lexicographic search over independent k-sets.
pub fn k_resilience_general(graph: &MeetingGraph, k: usize, budget: u64) -> Result<ResilienceResult, ResilienceError> {
    if k == 0 {
        return Err(ResilienceError::InvalidK { k, min: 1 });
    }
    let n = graph.node_count();
    if k > n {
        return Ok(ResilienceResult::infinite(k));
    }

    struct Search<'a> {
        graph: &'a MeetingGraph,
        k: usize,
        chosen: Vec<usize>,
        best: Option<(usize, Vec<usize>)>,
        counter: Counter,
    }

    impl Search<'_> {
        fn run(&mut self, available: &FixedBitSet, covered: &FixedBitSet) -> Result<(), ResilienceError> {
            self.counter.tick()?;
            let cost = covered.count_ones(..);
            if let Some((b, _)) = &self.best {
                if cost >= *b {
                    return Ok(());
                }
            }
            if self.chosen.len() == self.k {
                self.best = Some((cost, self.chosen.clone()));
                return Ok(());
            }
            let need = self.k - self.chosen.len();
            let candidates: Vec<usize> = available.ones().collect();
            for (pos, &v) in candidates.iter().enumerate() {
                if candidates.len() - pos < need {
                    break;
                }
                let mut next = available.clone();
                next.difference_with(self.graph.neighbor_set(v));
                // only later robots stay available, keeping the order lexicographic
                next.set_range(..v + 1, false);
                let mut cov = covered.clone();
                cov.union_with(self.graph.neighbor_set(v));
                self.chosen.push(v);
                self.run(&next, &cov)?;
                self.chosen.pop();
            }
            Ok(())
        }
    }

    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    let mut search = Search {
        graph,
        k,
        chosen: Vec::with_capacity(k),
        best: None,
        counter: Counter::new(budget),
    };
    search.run(&all, &FixedBitSet::with_capacity(n))?;
    Ok(match search.best {
        None => ResilienceResult::infinite(k),
        Some((_, set)) => {
            let removed = neighborhood(graph, &set);
            ResilienceResult::finite(k, set, removed)
        }
    })
}

/// 1-resilience from ring structure alone: the number of robots preventing a
/// representative robot of each ring from starving, minimized over rings.
pub fn one_resilience_fast(analysis: &Analysis) -> ResilienceResult {
    let d = &analysis.decomposition;
    let p = &analysis.placements;
    let tol = analysis.instance.tolerances().slot;
    let mut best: Option<(usize, usize, Vec<usize>)> = None;

    for ring in 0..d.rings.len() {
        let members = &p.ring_members[ring];
        let len = members.len();
        let u = members[0];
        let mut preventers: BTreeSet<usize> = analysis
            .ties
            .distinct_for(ring)
            .iter()
            .map(|&l| members[l as usize % len])
            .collect();

        // residues of d_c(u) - d_c(v0) modulo gcd, per neighboring ring
        let mut residues: BTreeMap<usize, (u64, BTreeSet<i64>)> = BTreeMap::new();
        for c in d.crossings.iter().filter(|c| !c.is_self_crossing()) {
            let Some(side) = c.side_on(ring) else { continue };
            let other = c.direction(side.other()).ring;
            let v0 = p.ring_members[other][0];
            let du = distance_to_crossing(d, &p.robots[u], c, side, tol).expect("side lies on the ring of u");
            let dv = distance_to_crossing(d, &p.robots[v0], c, side.other(), tol).expect("side lies on the other ring");
            let g = d.ring_length(ring).gcd(&d.ring_length(other));
            let s = as_integer(du - dv, tol).unwrap_or((du - dv).round() as i64);
            residues
                .entry(other)
                .or_insert_with(|| (g, BTreeSet::new()))
                .1
                .insert(s.rem_euclid(g as i64));
        }

        let mut rho = preventers.len();
        for (other, (g, res)) in &residues {
            let other_members = &p.ring_members[*other];
            let li = other_members.len() as u64;
            rho += res.len() * (li / g) as usize;
            for &r in res {
                let first = (-r).rem_euclid(*g as i64) as usize;
                preventers.extend(other_members.iter().skip(first).step_by(*g as usize).copied());
            }
        }
        debug_assert_eq!(rho, preventers.len());
        if best.as_ref().is_none_or(|(b, _, _)| rho < *b) {
            best = Some((rho, u, preventers.into_iter().collect()));
        }
    }

    let (_, u, removed) = best.expect("every instance has a ring");
    ResilienceResult::finite(1, vec![u], removed)
}

/// Maximum independent set size with a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Starvation {
    pub size: usize,
    pub witness: Vec<usize>,
}

/// Exact maximum independent set of a graph given by adjacency bitsets.
pub fn maximum_independent_set(adjacency: &[FixedBitSet], budget: u64) -> Result<Starvation, ResilienceError> {
    let n = adjacency.len();

    fn greedy(adjacency: &[FixedBitSet], mut pool: FixedBitSet) -> Vec<usize> {
        let mut set = Vec::new();
        while let Some(v) = pool
            .ones()
            .min_by_key(|&v| (adjacency[v].intersection(&pool).count(), v))
        {
            set.push(v);
            pool.set(v, false);
            pool.difference_with(&adjacency[v]);
        }
        set
    }

    // number of cliques in a greedy clique cover bounds the independent set size
    fn clique_cover(adjacency: &[FixedBitSet], pool: &FixedBitSet) -> usize {
        let mut rest = pool.clone();
        let mut cliques = 0;
        while let Some(v) = rest.ones().next() {
            cliques += 1;
            rest.set(v, false);
            let mut cand = rest.clone();
            cand.intersect_with(&adjacency[v]);
            while let Some(w) = cand.ones().next() {
                rest.set(w, false);
                cand.set(w, false);
                cand.intersect_with(&adjacency[w]);
            }
        }
        cliques
    }

    struct Search<'a> {
        adjacency: &'a [FixedBitSet],
        current: Vec<usize>,
        best: Vec<usize>,
        counter: Counter,
    }

    impl Search<'_> {
        fn run(&mut self, pool: FixedBitSet) -> Result<(), ResilienceError> {
            self.counter.tick()?;
            let mut pool = pool;
            let mut forced = 0;
            // vertices of degree at most one can always be taken
            loop {
                let low = pool
                    .ones()
                    .find(|&v| self.adjacency[v].intersection(&pool).count() <= 1);
                match low {
                    Some(v) => {
                        self.current.push(v);
                        forced += 1;
                        pool.set(v, false);
                        pool.difference_with(&self.adjacency[v]);
                    }
                    None => break,
                }
            }
            if pool.is_clear() {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else if self.current.len() + clique_cover(self.adjacency, &pool) > self.best.len() {
                let v = pool
                    .ones()
                    .max_by_key(|&v| (self.adjacency[v].intersection(&pool).count(), std::cmp::Reverse(v)))
                    .expect("pool is non-empty");
                let mut with = pool.clone();
                with.set(v, false);
                with.difference_with(&self.adjacency[v]);
                self.current.push(v);
                self.run(with)?;
                self.current.pop();
                let mut without = pool;
                without.set(v, false);
                self.run(without)?;
            }
            self.current.truncate(self.current.len() - forced);
            Ok(())
        }
    }

    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    let mut search = Search {
        adjacency,
        current: Vec::new(),
        best: greedy(adjacency, all.clone()),
        counter: Counter::new(budget),
    };
    search.run(all)?;
    let mut witness = search.best;
    witness.sort_unstable();
    Ok(Starvation {
        size: witness.len(),
        witness,
    })
}

/// Largest number of robots that can starve simultaneously.
pub fn starvation_number(graph: &MeetingGraph, budget: u64) -> Result<Starvation, ResilienceError> {
    let adjacency: Vec<FixedBitSet> = (0..graph.node_count()).map(|u| graph.neighbor_set(u).clone()).collect();
    maximum_independent_set(&adjacency, budget)
}

/// Tie data of a tree instance, whose single ring carries every robot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TieSummary {
    /// Sorted distinct tie lengths.
    pub ties: Vec<u64>,
    pub t: usize,
    pub n: usize,
    /// Robot id at each ring index.
    pub ring_order: Vec<usize>,
}

impl TieSummary {
    pub fn new(n: usize, ties: Vec<u64>) -> Self {
        TieSummary {
            t: ties.len(),
            ring_order: (0..n).collect(),
            ties,
            n,
        }
    }

    pub fn from_analysis(analysis: &Analysis) -> Result<Self, ResilienceError> {
        let graph = analysis.instance.graph();
        let n = graph.node_count();
        if graph.edges().len() + 1 != n {
            return Err(ResilienceError::NotATree {
                nodes: n,
                edges: graph.edges().len(),
            });
        }
        let ties = analysis.ties.distinct_for(0).to_vec();
        Ok(TieSummary {
            t: ties.len(),
            ties,
            n,
            ring_order: analysis.placements.ring_members[0].clone(),
        })
    }

    fn is_tie(&self, d: u64) -> bool {
        self.ties.binary_search(&d).is_ok()
    }

    /// Ring indices adjacent to index `i`.
    fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.ties.iter().map(move |&l| (i + l as usize) % self.n)
    }

    fn result(&self, k: usize, starving: &[usize]) -> ResilienceResult {
        let removed: BTreeSet<usize> = starving
            .iter()
            .flat_map(|&i| self.neighbors(i))
            .map(|i| self.ring_order[i])
            .collect();
        let mut s: Vec<usize> = starving.iter().map(|&i| self.ring_order[i]).collect();
        s.sort_unstable();
        ResilienceResult::finite(k, s, removed.into_iter().collect())
    }
}

pub fn tree_one_resilience(summary: &TieSummary) -> usize {
    summary.t
}

/// Most frequent value of a multiset of differences or sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeResult {
    /// Smallest value reaching the top frequency; `None` for an empty multiset.
    pub candidate: Option<u64>,
    pub frequency: usize,
    pub plus_size: usize,
    pub minus_size: usize,
}

/// Naive mode of the positive pairwise differences of `values`.
pub fn mode_of_differences(values: &[u64], n: u64) -> ModeResult {
    debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(values.iter().all(|&v| v > 0 && v < n));
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            *counts.entry(b - a).or_default() += 1;
        }
    }
    let (candidate, frequency) = top(&counts);
    ModeResult {
        candidate,
        frequency,
        plus_size: 0,
        minus_size: counts.values().sum(),
    }
}

fn top(counts: &BTreeMap<u64, usize>) -> (Option<u64>, usize) {
    counts
        .iter()
        .fold((None, 0), |(c, f), (&v, &n)| if n > f { (Some(v), n) } else { (c, f) })
}

/// Mode of sums and positive differences of tie lengths over the separations
/// `d ∉ L`. The frequency of `d` is how many removals two robots `d` apart share.
/// Returns `None` when every separation is a tie.
pub fn separation_mode(summary: &TieSummary) -> Option<ModeResult> {
    let n = summary.n as u64;
    let valid: Vec<u64> = (1..n).filter(|&d| !summary.is_tie(d)).collect();
    if valid.is_empty() {
        return None;
    }
    let mut plus: BTreeMap<u64, usize> = BTreeMap::new();
    let mut minus: BTreeMap<u64, usize> = BTreeMap::new();
    for &a in &summary.ties {
        for &b in &summary.ties {
            if a + b < n && !summary.is_tie(a + b) {
                *plus.entry(a + b).or_default() += 1;
            }
            if a > b && !summary.is_tie(a - b) {
                *minus.entry(a - b).or_default() += 1;
            }
        }
    }
    let plus_size = plus.values().sum();
    let minus_size = minus.values().sum();
    let mut counts: BTreeMap<u64, usize> = valid.iter().map(|&d| (d, 0)).collect();
    for (d, c) in plus.into_iter().chain(minus) {
        *counts.get_mut(&d).expect("only valid separations are counted") += c;
    }
    // f = 0 still yields a valid separation
    let (candidate, frequency) = match top(&counts) {
        (None, _) => (Some(valid[0]), 0),
        found => found,
    };
    Some(ModeResult {
        candidate,
        frequency,
        plus_size,
        minus_size,
    })
}

pub fn tree_two_resilience(summary: &TieSummary) -> ResilienceResult {
    match separation_mode(summary) {
        None => ResilienceResult::infinite(2),
        Some(mode) => {
            let d = mode.candidate.expect("a valid separation exists") as usize;
            let result = summary.result(2, &[0, d]);
            debug_assert_eq!(result.value, ResilienceValue::Finite(2 * summary.t - mode.frequency));
            result
        }
    }
}

/// k-resilience of a tree for `k ≥ 3`. Robot index 0 is fixed in the starving
/// set since every rotation of the ring maps the meeting graph onto itself.
pub fn tree_k_resilience(summary: &TieSummary, k: usize, budget: u64) -> Result<ResilienceResult, ResilienceError> {
    if k < 3 {
        return Err(ResilienceError::InvalidK { k, min: 3 });
    }
    let n = summary.n;
    if k > n {
        return Ok(ResilienceResult::infinite(k));
    }
    let mut counter = Counter::new(budget);
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut chosen = vec![0usize];

    fn blocked(summary: &TieSummary, set: &[usize]) -> (FixedBitSet, FixedBitSet) {
        let mut f = FixedBitSet::with_capacity(summary.n);
        for &i in set {
            f.extend(summary.neighbors(i));
        }
        let mut used = f.clone();
        used.extend(set.iter().copied());
        (f, used)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        summary: &TieSummary,
        k: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        best: &mut Option<(usize, Vec<usize>)>,
        counter: &mut Counter,
    ) -> Result<(), ResilienceError> {
        counter.tick()?;
        let n = summary.n;
        let (f, used) = blocked(summary, chosen);
        if chosen.len() == k - 1 {
            let mut top: Option<(usize, usize)> = None;
            for x in (0..n).filter(|&x| !used.contains(x)) {
                let freq: usize = summary
                    .ties
                    .iter()
                    .map(|&l| {
                        let l = l as usize;
                        usize::from(x >= l && f.contains(x - l)) + usize::from(x + l < n && f.contains(x + l))
                    })
                    .sum();
                if top.is_none_or(|(_, tf)| freq > tf) {
                    top = Some((x, freq));
                }
            }
            if let Some((x, freq)) = top {
                let rho = f.count_ones(..) + summary.t - freq;
                if best.as_ref().is_none_or(|(b, _)| rho < *b) {
                    let mut set = chosen.clone();
                    set.push(x);
                    *best = Some((rho, set));
                }
            }
            return Ok(());
        }
        for v in start..n {
            if used.contains(v) {
                continue;
            }
            chosen.push(v);
            rec(summary, k, v + 1, chosen, best, counter)?;
            chosen.pop();
        }
        Ok(())
    }

    rec(summary, k, 1, &mut chosen, &mut best, &mut counter)?;
    Ok(match best {
        None => ResilienceResult::infinite(k),
        Some((rho, set)) => {
            let result = summary.result(k, &set);
            debug_assert_eq!(result.value, ResilienceValue::Finite(rho));
            result
        }
    })
}

/// Dispatches to the tree algorithm matching `k`.
pub fn tree_resilience(summary: &TieSummary, k: usize, budget: u64) -> Result<ResilienceResult, ResilienceError> {
    match k {
        0 => Err(ResilienceError::InvalidK { k, min: 1 }),
        1 => Ok(summary.result(1, &[0])),
        2 => Ok(tree_two_resilience(summary)),
        _ => tree_k_resilience(summary, k, budget),
    }
}

/// `√(πn)/2 − 1`, a lower bound on the distinct tie count of any tree on `n` circles.
pub fn tie_count_lower_bound(n: usize) -> f64 {
    (std::f64::consts::PI * n as f64).sqrt() / 2.0 - 1.0
}
