//! The meeting graph: robots joined by an edge when they prevent each other
//! from starving.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::rings::{as_integer, distance_to_crossing, Decomposition, Placements, RingError, Side, TieReport};
use crate::Analysis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeetingError {
    #[error("a robot cannot be tested against itself ({0})")]
    SameRobot(usize),
    #[error("unknown robot {0}")]
    UnknownRobot(usize),
    #[error("crossing {crossing}: distance difference {value} is not integral")]
    NonIntegralOffset { crossing: usize, value: f64 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Why two robots prevent each other from starving.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PreventionCertificate {
    /// Robots on one ring whose index distance equals a tie length.
    SameRing { ring: usize, tie_length: u64 },
    /// Robots on two rings sharing `crossing`, with `gcd` dividing `s`.
    CrossRing { crossing: usize, s: i64, gcd: u64 },
}

/// An edge together with its justification.
pub type CertifiedEdge = (usize, usize, PreventionCertificate);

#[derive(Clone, Debug, PartialEq)]
pub struct MeetingGraph {
    adjacency: Vec<FixedBitSet>,
    certificates: BTreeMap<(usize, usize), Vec<PreventionCertificate>>,
}

impl MeetingGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = CertifiedEdge>) -> Self {
        let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
        let mut certificates: BTreeMap<(usize, usize), Vec<PreventionCertificate>> = BTreeMap::new();
        for (u, v, cert) in edges {
            debug_assert_ne!(u, v);
            adjacency[u].insert(v);
            adjacency[v].insert(u);
            let list = certificates.entry((u.min(v), u.max(v))).or_default();
            if !list.contains(&cert) {
                list.push(cert);
                list.sort();
            }
        }
        MeetingGraph {
            adjacency,
            certificates,
        }
    }

    /// Graph without certificates, from plain adjacency lists.
    pub fn from_adjacency(adjacency: Vec<FixedBitSet>) -> Self {
        MeetingGraph {
            adjacency,
            certificates: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adjacency.len() && self.adjacency[u].contains(v)
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].ones()
    }

    pub fn neighbor_set(&self, u: usize) -> &FixedBitSet {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].count_ones(..)
    }

    pub fn min_degree(&self) -> Option<usize> {
        (0..self.node_count()).map(|u| self.degree(u)).min()
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count())
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn certificates(&self, u: usize, v: usize) -> &[PreventionCertificate] {
        self.certificates
            .get(&(u.min(v), u.max(v)))
            .map_or(&[], Vec::as_slice)
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.node_count()).map(|u| self.neighbors(u).collect()).collect()
    }
}

/// Robot `i` of a ring is adjacent to robot `i + l` for every distinct tie length `l`.
pub fn same_ring_edges(ring: usize, ties: &TieReport, placements: &Placements) -> Vec<CertifiedEdge> {
    let members = &placements.ring_members[ring];
    let len = members.len();
    let mut edges = Vec::new();
    for &l in ties.distinct_for(ring) {
        for i in 0..len {
            let j = (i + l as usize) % len;
            edges.push((
                members[i],
                members[j],
                PreventionCertificate::SameRing {
                    ring,
                    tie_length: l,
                },
            ));
        }
    }
    edges
}

/// Edges through crossing points shared by two distinct rings: robots at
/// distances `d` and `d'` from the crossing meet iff `gcd(l, l')` divides `d - d'`.
pub fn cross_ring_edges(
    decomposition: &Decomposition,
    placements: &Placements,
    slot_tolerance: f64,
) -> Result<Vec<CertifiedEdge>, MeetingError> {
    let mut edges = Vec::new();
    for c in decomposition.crossings.iter().filter(|c| !c.is_self_crossing()) {
        let (r1, r2) = (c.forward.ring, c.backward.ring);
        let g = decomposition.ring_length(r1).gcd(&decomposition.ring_length(r2));
        for &u in &placements.ring_members[r1] {
            let d = distance_to_crossing(decomposition, &placements.robots[u], c, Side::Forward, slot_tolerance)?;
            for &v in &placements.ring_members[r2] {
                let d2 =
                    distance_to_crossing(decomposition, &placements.robots[v], c, Side::Backward, slot_tolerance)?;
                let s = as_integer(d - d2, slot_tolerance).ok_or(MeetingError::NonIntegralOffset {
                    crossing: c.id,
                    value: d - d2,
                })?;
                if s.rem_euclid(g as i64) == 0 {
                    edges.push((u, v, PreventionCertificate::CrossRing { crossing: c.id, s, gcd: g }));
                }
            }
        }
    }
    Ok(edges)
}

pub fn build_meeting_graph(
    decomposition: &Decomposition,
    ties: &TieReport,
    placements: &Placements,
    slot_tolerance: f64,
) -> Result<MeetingGraph, MeetingError> {
    let n = placements.robots.len();
    let mut edges = Vec::new();
    for ring in 0..decomposition.rings.len() {
        edges.extend(same_ring_edges(ring, ties, placements));
    }
    edges.extend(cross_ring_edges(decomposition, placements, slot_tolerance)?);
    Ok(MeetingGraph::from_edges(n, edges))
}

fn check_pair(analysis: &Analysis, u: usize, v: usize) -> Result<(), MeetingError> {
    let n = analysis.instance.len();
    if u >= n {
        return Err(MeetingError::UnknownRobot(u));
    }
    if v >= n {
        return Err(MeetingError::UnknownRobot(v));
    }
    if u == v {
        return Err(MeetingError::SameRobot(u));
    }
    Ok(())
}

/// Whether `u` and `v` prevent each other from starving, with the reasons.
pub fn prevention_test(
    analysis: &Analysis,
    u: usize,
    v: usize,
) -> Result<(bool, Vec<PreventionCertificate>), MeetingError> {
    check_pair(analysis, u, v)?;
    let certs = analysis.meeting.certificates(u, v).to_vec();
    Ok((analysis.meeting.has_edge(u, v), certs))
}

/// Enumerates arrival times `d + i·l` and `d' + j·l'` at every crossing the two
/// robots approach from opposite directions, looking for a coincidence.
pub fn brute_force_meet(analysis: &Analysis, u: usize, v: usize) -> Result<bool, MeetingError> {
    check_pair(analysis, u, v)?;
    let tol = analysis.instance.tolerances().slot;
    let d = &analysis.decomposition;
    let pu = &analysis.placements.robots[u];
    let pv = &analysis.placements.robots[v];
    let lu = d.ring_length(pu.ring);
    let lv = d.ring_length(pv.ring);
    for c in &d.crossings {
        for side in [Side::Forward, Side::Backward] {
            if c.direction(side).ring != pu.ring || c.direction(side.other()).ring != pv.ring {
                continue;
            }
            let au = distance_to_crossing(d, pu, c, side, tol)?;
            let av = distance_to_crossing(d, pv, c, side.other(), tol)?;
            for i in 0..=lv {
                for j in 0..=lu {
                    let tu = au + (i * lu) as f64;
                    let tv = av + (j * lv) as f64;
                    if (tu - tv).abs() <= tol {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Live robots all of whose meeting-graph neighbors have been removed.
pub fn count_starving(graph: &MeetingGraph, removed: &BTreeSet<usize>) -> BTreeSet<usize> {
    (0..graph.node_count())
        .filter(|u| !removed.contains(u))
        .filter(|&u| graph.neighbors(u).all(|v| removed.contains(&v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Instance, Point};

    fn analysis(centers: &[(f64, f64)]) -> Analysis {
        let pts: Vec<Point> = centers.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Analysis::new(Instance::new(0.3, &pts).unwrap()).unwrap()
    }

    fn square() -> Analysis {
        let s = 2.15;
        analysis(&[(0.0, 0.0), (s, 0.0), (s, s), (0.0, s)])
    }

    #[test]
    fn nine_slot_fixture_ring() {
        // one ring of 9 robots with tie lengths {2, 4, 5, 7}
        let placements = Placements {
            robots: (0..9)
                .map(|i| crate::rings::RobotPlacement {
                    robot: i,
                    ring: 0,
                    offset_slots: i as f64,
                    index: i,
                })
                .collect(),
            ring_members: vec![(0..9).collect()],
        };
        let ties = TieReport {
            ties: vec![],
            distinct: vec![vec![2, 4, 5, 7]],
        };
        let g = MeetingGraph::from_edges(9, same_ring_edges(0, &ties, &placements));
        for i in 0..9 {
            let expected: BTreeSet<usize> = [2, 4, 5, 7].iter().map(|l| (i + l) % 9).collect();
            let got: BTreeSet<usize> = g.neighbors(i).collect();
            assert_eq!(got, expected, "robot {i}");
        }
    }

    #[test]
    fn two_slot_ring_single_edge() {
        let a = analysis(&[(0.0, 0.0), (2.2, 0.0)]);
        assert_eq!(a.meeting.edges(), vec![(0, 1)]);
        assert_eq!(
            a.meeting.certificates(0, 1),
            &[PreventionCertificate::SameRing {
                ring: 0,
                tie_length: 1
            }]
        );
    }

    #[test]
    fn ring_without_self_crossings_has_no_same_ring_edges() {
        let a = square();
        for ring in 0..a.decomposition.rings.len() {
            assert!(same_ring_edges(ring, &a.ties, &a.placements).is_empty());
        }
    }

    #[test]
    fn gcd_rule() {
        // the divisibility test used by cross_ring_edges
        let divides = |s: i64, l1: u64, l2: u64| s.rem_euclid(l1.gcd(&l2) as i64) == 0;
        assert!(!divides(1, 4, 6));
        assert!(divides(2, 4, 6));
        assert!(divides(0, 5, 7));
        assert!(divides(-2, 4, 6));
    }

    #[test]
    fn single_circle_has_empty_graph() {
        let a = analysis(&[(0.0, 0.0)]);
        assert_eq!(a.meeting.node_count(), 1);
        assert!(a.meeting.edges().is_empty());
        assert_eq!(count_starving(&a.meeting, &BTreeSet::new()), BTreeSet::from([0]));
    }

    #[test]
    fn square_meeting_graph_is_the_four_cycle() {
        let a = square();
        assert_eq!(a.meeting.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        for (u, v) in a.meeting.edges() {
            assert!(a
                .meeting
                .certificates(u, v)
                .iter()
                .all(|c| matches!(c, PreventionCertificate::CrossRing { gcd: 2, .. })));
        }
    }

    #[test]
    fn prevention_matches_oracle_on_small_cases() {
        for a in [
            square(),
            analysis(&[(0.0, 0.0), (2.15, 0.0), (4.3, 0.0), (6.45, 0.0)]),
            analysis(&[(0.0, 0.0), (2.15, 0.0), (2.15, 2.15), (4.3, 0.0)]),
        ] {
            let n = a.instance.len();
            for u in 0..n {
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    let (meet, _) = prevention_test(&a, u, v).unwrap();
                    assert_eq!(meet, brute_force_meet(&a, u, v).unwrap(), "pair ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn same_robot_is_rejected() {
        let a = square();
        assert_eq!(prevention_test(&a, 1, 1).unwrap_err(), MeetingError::SameRobot(1));
        assert_eq!(brute_force_meet(&a, 2, 2).unwrap_err(), MeetingError::SameRobot(2));
        assert_eq!(prevention_test(&a, 0, 9).unwrap_err(), MeetingError::UnknownRobot(9));
    }

    #[test]
    fn path_pair_outside_tie_set_does_not_meet() {
        // 4-circle path: ties {1, 3} and {2, 2}; index distance 2 is a tie, but
        // on a 5-path the distance-2 pair with L = {1,2,3,4} always meets, so use a star
        let a = analysis(&[(0.0, 0.0), (2.15, 0.0), (-2.15, 0.0), (0.0, 2.15), (0.0, -2.15)]);
        // star with 4 leaves: every edge splits 1 | 4, so L = {1, 4}
        assert_eq!(a.ties.distinct[0], vec![1, 4]);
        let ring = &a.placements.ring_members[0];
        let (u, v) = (ring[0], ring[2]);
        assert!(!prevention_test(&a, u, v).unwrap().0);
        assert!(!brute_force_meet(&a, u, v).unwrap());
    }

    #[test]
    fn starving_counts() {
        let a = analysis(&[(0.0, 0.0), (2.2, 0.0)]);
        assert!(count_starving(&a.meeting, &BTreeSet::new()).is_empty());
        assert_eq!(count_starving(&a.meeting, &BTreeSet::from([1])), BTreeSet::from([0]));

        let sq = square();
        assert_eq!(
            count_starving(&sq.meeting, &BTreeSet::from([1, 3])),
            BTreeSet::from([0, 2])
        );
    }
}
