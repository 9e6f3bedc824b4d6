//! Rings, crossing points, ties and robot placement.
//!
//! All combinatorial lengths are measured in slots: one slot is `2π` of arc,
//! which a robot covers in one time unit.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::TAU;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{sweep, Direction, Instance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("ring {ring} has non-integral length {length} slots")]
    NonIntegralRingLength { ring: usize, length: f64 },
    #[error("tie at crossing {crossing} has non-integral length {length} slots")]
    NonIntegralTieLength { crossing: usize, length: f64 },
    #[error("robots on ring {ring} are not spaced one slot apart")]
    PlacementSpacingViolation { ring: usize },
    #[error("ring {ring} of length {length} holds {robots} robots")]
    CapacityMismatch {
        ring: usize,
        length: u64,
        robots: usize,
    },
    #[error("crossing {crossing} has no direction on ring {ring}")]
    DirectionNotOnRing { crossing: usize, ring: usize },
    #[error("unknown robot {0}")]
    UnknownRobot(usize),
    #[error("unknown crossing {0}")]
    UnknownCrossing(usize),
}

/// Returns `Some(k)` when `x` is within `tol` of the integer `k`.
pub fn as_integer(x: f64, tol: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= tol).then_some(r as i64)
}

/// Reduces `x` modulo `len` into `[0, len)`, snapping values within `tol` of `len` to 0.
pub fn wrap_slots(x: f64, len: f64, tol: f64) -> f64 {
    let r = x.rem_euclid(len);
    if r >= len - tol {
        0.0
    } else {
        r
    }
}

/// Section of a circle between two consecutive link positions, in travel order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectedArc {
    pub circle: usize,
    pub from_angle: f64,
    pub to_angle: f64,
    pub direction: Direction,
    /// Radians.
    pub length: f64,
    /// Neighbor whose link position starts the arc (`None` on isolated circles).
    pub from_neighbor: Option<usize>,
    /// Neighbor whose link position ends the arc.
    pub to_neighbor: Option<usize>,
}

impl DirectedArc {
    pub fn length_slots(&self) -> f64 {
        self.length / TAU
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ring {
    pub id: usize,
    /// Arc ids in travel order, starting at the ring's origin arc.
    pub arcs: Vec<usize>,
    /// Start offset of each arc of `arcs`, in slots.
    pub arc_offsets: Vec<f64>,
    pub length_slots: u64,
}

/// Which way a crossing point is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    /// From the lower circle id of the edge to the higher one.
    Forward,
    Backward,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Forward => Side::Backward,
            Side::Backward => Side::Forward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingDirection {
    pub from: usize,
    pub to: usize,
    pub ring: usize,
    /// Ring offset of the crossing along this direction, in `[0, length_slots)`.
    pub position: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingPoint {
    /// Index of the edge in the communication graph.
    pub id: usize,
    pub edge: (usize, usize),
    pub forward: CrossingDirection,
    pub backward: CrossingDirection,
}

impl CrossingPoint {
    pub fn direction(&self, side: Side) -> &CrossingDirection {
        match side {
            Side::Forward => &self.forward,
            Side::Backward => &self.backward,
        }
    }

    pub fn is_self_crossing(&self) -> bool {
        self.forward.ring == self.backward.ring
    }

    /// Side of this crossing lying on `ring`, if any (forward first).
    pub fn side_on(&self, ring: usize) -> Option<Side> {
        if self.forward.ring == ring {
            Some(Side::Forward)
        } else if self.backward.ring == ring {
            Some(Side::Backward)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub arcs: Vec<DirectedArc>,
    pub rings: Vec<Ring>,
    /// Ring of each arc.
    pub arc_ring: Vec<usize>,
    /// Ring offset of the start of each arc, in slots.
    pub arc_offset: Vec<f64>,
    /// One per communication edge, in edge order.
    pub crossings: Vec<CrossingPoint>,
    #[serde(skip)]
    circle_arcs: Vec<Vec<usize>>,
}

impl Decomposition {
    /// Arc ids lying on `circle`.
    pub fn circle_arcs(&self, circle: usize) -> &[usize] {
        &self.circle_arcs[circle]
    }

    pub fn ring_length(&self, ring: usize) -> u64 {
        self.rings[ring].length_slots
    }

    /// Ring of the arc on `circle` containing `angle`. A point exactly on a link
    /// belongs to the arc that starts there when `departing` is set, and to the
    /// arc that ends there otherwise.
    pub fn locate(&self, circle: usize, angle: f64, departing: bool, tol: f64) -> (usize, f64) {
        let snap = |d: f64| if d >= TAU - tol { 0.0 } else { d };
        // (arc, distance from the arc start, distance to the arc end)
        let (arc, along, _) = self.circle_arcs[circle]
            .iter()
            .map(|&a| {
                let arc = &self.arcs[a];
                if departing {
                    let along = snap(sweep(arc.from_angle, angle, arc.direction));
                    (a, along, arc.length - along)
                } else {
                    let back = snap(sweep(angle, arc.to_angle, arc.direction));
                    (a, arc.length - back, back)
                }
            })
            .min_by(|x, y| {
                if departing {
                    x.1.total_cmp(&y.1)
                } else {
                    x.2.total_cmp(&y.2)
                }
            })
            .expect("every circle carries at least one arc");
        let ring = self.arc_ring[arc];
        let len = self.rings[ring].length_slots as f64;
        (ring, wrap_slots(self.arc_offset[arc] + along / TAU, len, 1e-9))
    }
}

/// Splits the directed arcs of an instance into rings.
pub fn decompose_rings(instance: &Instance) -> Result<Decomposition, RingError> {
    let n = instance.len();
    let tol = instance.tolerances();
    let mut arcs = Vec::new();
    let mut circle_arcs = vec![Vec::new(); n];
    let mut arc_by_start: HashMap<(usize, usize), usize> = HashMap::new();
    let mut arc_by_end: HashMap<(usize, usize), usize> = HashMap::new();

    for (i, own_arcs) in circle_arcs.iter_mut().enumerate() {
        let dir = instance.direction(i);
        let mut links: Vec<(f64, usize)> = instance
            .graph()
            .neighbors(i)
            .iter()
            .map(|&j| (instance.link_angle(i, j), j))
            .collect();
        links.sort_by(|a, b| a.0.total_cmp(&b.0));
        let d = links.len();
        if d == 0 {
            own_arcs.push(arcs.len());
            arcs.push(DirectedArc {
                circle: i,
                from_angle: 0.0,
                to_angle: 0.0,
                direction: dir,
                length: TAU,
                from_neighbor: None,
                to_neighbor: None,
            });
            continue;
        }
        for k in 0..d {
            let next = match dir {
                Direction::Ccw => (k + 1) % d,
                Direction::Cw => (k + d - 1) % d,
            };
            let (from_angle, from_n) = links[k];
            let (to_angle, to_n) = links[next];
            let length = if d == 1 {
                TAU
            } else {
                sweep(from_angle, to_angle, dir)
            };
            let id = arcs.len();
            arc_by_start.insert((i, from_n), id);
            arc_by_end.insert((i, to_n), id);
            own_arcs.push(id);
            arcs.push(DirectedArc {
                circle: i,
                from_angle,
                to_angle,
                direction: dir,
                length,
                from_neighbor: Some(from_n),
                to_neighbor: Some(to_n),
            });
        }
    }

    let successor: Vec<usize> = arcs
        .iter()
        .enumerate()
        .map(|(id, arc)| match arc.to_neighbor {
            Some(j) => arc_by_start[&(j, arc.circle)],
            None => id,
        })
        .collect();

    // visiting arcs in (circle, from_angle) order makes each ring start at its origin
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by(|&a, &b| {
        arcs[a]
            .circle
            .cmp(&arcs[b].circle)
            .then(arcs[a].from_angle.total_cmp(&arcs[b].from_angle))
    });
    let mut arc_ring = vec![usize::MAX; arcs.len()];
    let mut arc_offset = vec![0.0; arcs.len()];
    let mut rings = Vec::new();
    for &origin in &order {
        if arc_ring[origin] != usize::MAX {
            continue;
        }
        let id = rings.len();
        let mut ring_arcs = Vec::new();
        let mut offsets = Vec::new();
        let mut total = 0.0;
        let mut a = origin;
        loop {
            arc_ring[a] = id;
            arc_offset[a] = total / TAU;
            ring_arcs.push(a);
            offsets.push(total / TAU);
            total += arcs[a].length;
            a = successor[a];
            if a == origin {
                break;
            }
        }
        let slots = total / TAU;
        let length_slots = match as_integer(slots, tol.slot) {
            Some(l) if l >= 1 => l as u64,
            _ => return Err(RingError::NonIntegralRingLength { ring: id, length: slots }),
        };
        rings.push(Ring {
            id,
            arcs: ring_arcs,
            arc_offsets: offsets,
            length_slots,
        });
    }

    let crossing_direction = |from: usize, to: usize| {
        let a = arc_by_end[&(from, to)];
        let ring = arc_ring[a];
        let len = rings[ring].length_slots as f64;
        CrossingDirection {
            from,
            to,
            ring,
            position: wrap_slots(arc_offset[a] + arcs[a].length_slots(), len, tol.slot),
        }
    };
    let crossings = instance
        .graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(id, &(i, j))| CrossingPoint {
            id,
            edge: (i, j),
            forward: crossing_direction(i, j),
            backward: crossing_direction(j, i),
        })
        .collect();

    Ok(Decomposition {
        arcs,
        rings,
        arc_ring,
        arc_offset,
        crossings,
        circle_arcs,
    })
}

/// Closed path that leaves a self-crossing along `entry` and returns to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tie {
    pub crossing: usize,
    pub ring: usize,
    pub entry: Side,
    pub length_slots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieReport {
    /// Two ties per self-crossing, in crossing order.
    pub ties: Vec<Tie>,
    /// Sorted distinct tie lengths of every ring.
    pub distinct: Vec<Vec<u64>>,
}

impl TieReport {
    pub fn distinct_for(&self, ring: usize) -> &[u64] {
        &self.distinct[ring]
    }
}

pub fn compute_ties(decomposition: &Decomposition, slot_tolerance: f64) -> Result<TieReport, RingError> {
    let mut ties = Vec::new();
    let mut distinct = vec![BTreeSet::new(); decomposition.rings.len()];
    for c in decomposition.crossings.iter().filter(|c| c.is_self_crossing()) {
        let ring = c.forward.ring;
        let len = decomposition.ring_length(ring);
        let raw = (c.backward.position - c.forward.position).rem_euclid(len as f64);
        let forward_len = match as_integer(raw, slot_tolerance) {
            Some(l) if l >= 1 && (l as u64) < len => l as u64,
            _ => {
                return Err(RingError::NonIntegralTieLength {
                    crossing: c.id,
                    length: raw,
                })
            }
        };
        for (entry, length_slots) in [(Side::Forward, forward_len), (Side::Backward, len - forward_len)] {
            ties.push(Tie {
                crossing: c.id,
                ring,
                entry,
                length_slots,
            });
            distinct[ring].insert(length_slots);
        }
    }
    Ok(TieReport {
        ties,
        distinct: distinct.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobotPlacement {
    /// Robot id, equal to its home circle.
    pub robot: usize,
    pub ring: usize,
    /// Slots ahead of the ring origin, in `[0, length_slots)`.
    pub offset_slots: f64,
    /// Position in the ring's robot sequence, counted along the travel direction.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Placements {
    /// Indexed by robot id.
    pub robots: Vec<RobotPlacement>,
    /// Robot ids of every ring, in ring-index order.
    pub ring_members: Vec<Vec<usize>>,
}

impl Placements {
    pub fn get(&self, robot: usize) -> Result<&RobotPlacement, RingError> {
        self.robots.get(robot).ok_or(RingError::UnknownRobot(robot))
    }

    /// Robot sitting `index` positions into `ring` (taken modulo its length).
    pub fn at_index(&self, ring: usize, index: usize) -> usize {
        let members = &self.ring_members[ring];
        members[index % members.len()]
    }
}

/// Places robot `i` at its start angle on circle `i` at time zero. A robot sitting
/// exactly on a link position counts as arriving there.
pub fn place_robots(instance: &Instance, decomposition: &Decomposition) -> Result<Placements, RingError> {
    let tol = instance.tolerances();
    let mut robots: Vec<RobotPlacement> = (0..instance.len())
        .map(|i| {
            let (ring, offset_slots) =
                decomposition.locate(i, instance.schedule().starts[i], false, tol.angle);
            RobotPlacement {
                robot: i,
                ring,
                offset_slots,
                index: 0,
            }
        })
        .collect();

    let mut ring_members = vec![Vec::new(); decomposition.rings.len()];
    for p in &robots {
        ring_members[p.ring].push(p.robot);
    }
    for (ring, members) in ring_members.iter_mut().enumerate() {
        let len = decomposition.ring_length(ring);
        if members.len() as u64 != len {
            return Err(RingError::CapacityMismatch {
                ring,
                length: len,
                robots: members.len(),
            });
        }
        members.sort_by(|&a, &b| robots[a].offset_slots.total_cmp(&robots[b].offset_slots));
        let base = robots[members[0]].offset_slots;
        for (k, &r) in members.iter().enumerate() {
            if (robots[r].offset_slots - base - k as f64).abs() > tol.slot {
                return Err(RingError::PlacementSpacingViolation { ring });
            }
            robots[r].index = k;
        }
    }
    Ok(Placements {
        robots,
        ring_members,
    })
}

/// Slots a robot travels along its ring before reaching `crossing` along `side`.
pub fn distance_to_crossing(
    decomposition: &Decomposition,
    placement: &RobotPlacement,
    crossing: &CrossingPoint,
    side: Side,
    slot_tolerance: f64,
) -> Result<f64, RingError> {
    let dir = crossing.direction(side);
    if dir.ring != placement.ring {
        return Err(RingError::DirectionNotOnRing {
            crossing: crossing.id,
            ring: placement.ring,
        });
    }
    let len = decomposition.ring_length(dir.ring) as f64;
    Ok(wrap_slots(dir.position - placement.offset_slots, len, slot_tolerance))
}
