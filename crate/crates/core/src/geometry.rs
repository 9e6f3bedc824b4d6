//! Trajectory sets, communication graphs and synchronized schedules.
//!
//! Every trajectory is a unit circle. A robot on circle `i` sits at angle
//! `start_i + 2π·dir_i·t` at time `t`, where one full lap takes one time unit.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for angle congruences, in radians.
pub const ANGLE_TOLERANCE: f64 = 1e-9;
/// Default tolerance for integrality of lengths measured in slots.
pub const SLOT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Radians.
    pub angle: f64,
    /// Slots (one slot is 2π of arc, or one time unit).
    pub slot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            angle: ANGLE_TOLERANCE,
            slot: SLOT_TOLERANCE,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("communication range must lie in (0, 0.5), got {0}")]
    InvalidEpsilon(f64),
    #[error("an instance needs at least one circle")]
    Empty,
    #[error("circle {0} has a non-finite coordinate")]
    NonFiniteCoordinate(usize),
    #[error("circles {i} and {j} overlap (center distance {distance:.6} <= 2)")]
    OverlappingCircles { i: usize, j: usize, distance: f64 },
    #[error("edge {{{i},{j}}} is out of communication range (center distance {distance:.6})")]
    EdgeOutOfRange { i: usize, j: usize, distance: f64 },
    #[error("self-loop at circle {0}")]
    SelfLoop(usize),
    #[error("unknown circle {0}")]
    UnknownCircle(usize),
    #[error("{{{0},{1}}} is not an edge of the communication graph")]
    UnknownEdge(usize, usize),
    #[error("communication graph is disconnected (circle {0} unreachable from circle 0)")]
    Disconnected(usize),
    #[error("communication graph is not bipartite (odd cycle {cycle:?})")]
    NotBipartite { cycle: Vec<usize> },
    #[error("directions of circles {0} and {1} do not alternate")]
    DirectionsNotAlternating(usize, usize),
    #[error("edge {{{0},{1}}} cannot be synchronized")]
    NotSynchronizable(usize, usize),
    #[error("{what}: expected {expected} entries, found {found}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction from `self` toward `other`, in `[0, 2π)`.
    pub fn angle_to(&self, other: &Point) -> f64 {
        normalize_angle((other.y - self.y).atan2(other.x - self.x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub center: Point,
}

/// Travel direction on a circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Counterclockwise, `+1`.
    Ccw,
    /// Clockwise, `-1`.
    Cw,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Ccw => 1.0,
            Direction::Cw => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Ccw => 1,
            Direction::Cw => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Direction::Ccw),
            -1 => Some(Direction::Cw),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Ccw => Direction::Cw,
            Direction::Cw => Direction::Ccw,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on the circle, in `[0, π]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// Angle swept when travelling from `from` to `to` in direction `dir`, in `[0, 2π)`.
pub fn sweep(from: f64, to: f64, dir: Direction) -> f64 {
    match dir {
        Direction::Ccw => normalize_angle(to - from),
        Direction::Cw => normalize_angle(from - to),
    }
}

/// Simple undirected graph on circle ids `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunicationGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl CommunicationGraph {
    /// Builds the graph, normalizing every edge to `(min, max)` and dropping duplicates.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GeometryError::SelfLoop(a));
            }
            if a >= n {
                return Err(GeometryError::UnknownCircle(a));
            }
            if b >= n {
                return Err(GeometryError::UnknownCircle(b));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(CommunicationGraph {
            n,
            edges: normalized,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Position of `{i, j}` in [`edges`](Self::edges).
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.edges.len() == self.n - 1 && self.is_connected()
    }

    pub fn is_connected(&self) -> bool {
        self.first_unreachable().is_none()
    }

    fn first_unreachable(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Link positions of an edge `{i, j}` on both circles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Link {
    pub edge: (usize, usize),
    /// Position on circle `edge.0`, pointing toward circle `edge.1`.
    pub phi_ij: f64,
    /// Position on circle `edge.1`, pointing toward circle `edge.0`.
    pub phi_ji: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    /// Start angle per circle, in `[0, 2π)`.
    pub starts: Vec<f64>,
    pub directions: Vec<Direction>,
}

impl Schedule {
    /// Angle of the scheduled robot on circle `i` at time `t` (in slots).
    pub fn angle_at(&self, i: usize, t: f64) -> f64 {
        normalize_angle(self.starts[i] + TAU * self.directions[i].sign() * t)
    }
}

/// A validated synchronized communication system.
#[derive(Clone, Debug)]
pub struct Instance {
    epsilon: f64,
    trajectories: Vec<Trajectory>,
    graph: CommunicationGraph,
    schedule: Schedule,
    tolerances: Tolerances,
}

/// Optional parts of an instance; missing pieces get derived during validation.
#[derive(Clone, Debug, Default)]
pub struct InstanceOptions {
    /// Communication edges; defaults to every potential link.
    pub edges: Option<Vec<(usize, usize)>>,
    /// Defaults to the canonical two-coloring.
    pub directions: Option<Vec<Direction>>,
    /// Defaults to the synthesized schedule.
    pub starts: Option<Vec<f64>>,
    pub tolerances: Option<Tolerances>,
}

impl Instance {
    /// Instance with all potential links as edges and a synthesized schedule.
    pub fn new(epsilon: f64, centers: &[Point]) -> Result<Self> {
        Self::with_options(epsilon, centers, InstanceOptions::default())
    }

    pub fn with_edges(epsilon: f64, centers: &[Point], edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_options(
            epsilon,
            centers,
            InstanceOptions {
                edges: Some(edges.to_vec()),
                ..Default::default()
            },
        )
    }

    pub fn with_options(epsilon: f64, centers: &[Point], options: InstanceOptions) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(GeometryError::InvalidEpsilon(epsilon));
        }
        if centers.is_empty() {
            return Err(GeometryError::Empty);
        }
        let potential = potential_links(centers, epsilon)?;
        let n = centers.len();
        let graph = match options.edges {
            None => CommunicationGraph::new(n, &potential)?,
            Some(edges) => {
                let graph = CommunicationGraph::new(n, &edges)?;
                for &(i, j) in graph.edges() {
                    if potential.binary_search(&(i, j)).is_err() {
                        return Err(GeometryError::EdgeOutOfRange {
                            i,
                            j,
                            distance: centers[i].distance(&centers[j]),
                        });
                    }
                }
                graph
            }
        };
        if let Some(v) = graph.first_unreachable() {
            return Err(GeometryError::Disconnected(v));
        }
        let trajectories: Vec<Trajectory> = centers
            .iter()
            .enumerate()
            .map(|(id, &center)| Trajectory { id, center })
            .collect();
        let tolerances = options.tolerances.unwrap_or_default();

        let directions = match options.directions {
            None => two_color_directions(&graph)?,
            Some(dirs) => {
                if dirs.len() != n {
                    return Err(GeometryError::WrongLength {
                        what: "directions",
                        expected: n,
                        found: dirs.len(),
                    });
                }
                for &(i, j) in graph.edges() {
                    if dirs[i] == dirs[j] {
                        return Err(GeometryError::DirectionsNotAlternating(i, j));
                    }
                }
                dirs
            }
        };

        let schedule = match options.starts {
            None => synthesize_schedule(&trajectories, &graph, &directions, tolerances.angle)?,
            Some(starts) => {
                if starts.len() != n {
                    return Err(GeometryError::WrongLength {
                        what: "starts",
                        expected: n,
                        found: starts.len(),
                    });
                }
                let schedule = Schedule {
                    starts: starts.into_iter().map(normalize_angle).collect(),
                    directions,
                };
                for &(i, j) in graph.edges() {
                    if !edge_synchronized(&trajectories, &schedule, i, j, tolerances.angle) {
                        return Err(GeometryError::NotSynchronizable(i, j));
                    }
                }
                schedule
            }
        };

        Ok(Instance {
            epsilon,
            trajectories,
            graph,
            schedule,
            tolerances,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn centers(&self) -> Vec<Point> {
        self.trajectories.iter().map(|t| t.center).collect()
    }

    pub fn graph(&self) -> &CommunicationGraph {
        &self.graph
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn direction(&self, i: usize) -> Direction {
        self.schedule.directions[i]
    }

    /// Link position on circle `i` toward circle `j` (no edge check).
    pub fn link_angle(&self, i: usize, j: usize) -> f64 {
        self.trajectories[i]
            .center
            .angle_to(&self.trajectories[j].center)
    }

    /// Same instance with every robot advanced by `dt` slots along its schedule.
    pub fn time_shifted(&self, dt: f64) -> Instance {
        let starts = (0..self.len()).map(|i| self.schedule.angle_at(i, dt)).collect();
        Instance {
            schedule: Schedule {
                starts,
                directions: self.schedule.directions.clone(),
            },
            ..self.clone()
        }
    }
}

/// All pairs of circles whose centers are within `2 + epsilon`.
pub fn potential_links(centers: &[Point], epsilon: f64) -> Result<Vec<(usize, usize)>> {
    for (id, c) in centers.iter().enumerate() {
        if !c.x.is_finite() || !c.y.is_finite() {
            return Err(GeometryError::NonFiniteCoordinate(id));
        }
    }
    let mut links = Vec::new();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let distance = centers[i].distance(&centers[j]);
            if distance <= 2.0 {
                return Err(GeometryError::OverlappingCircles { i, j, distance });
            }
            if distance <= 2.0 + epsilon {
                links.push((i, j));
            }
        }
    }
    Ok(links)
}

pub fn link_angles(instance: &Instance, edge: (usize, usize)) -> Result<Link> {
    let (i, j) = edge;
    if i == j {
        return Err(GeometryError::SelfLoop(i));
    }
    if !instance.graph.has_edge(i, j) {
        return Err(GeometryError::UnknownEdge(i, j));
    }
    Ok(Link {
        edge,
        phi_ij: instance.link_angle(i, j),
        phi_ji: instance.link_angle(j, i),
    })
}

/// Canonical proper two-coloring: circle 0 travels counterclockwise.
pub fn two_color_directions(graph: &CommunicationGraph) -> Result<Vec<Direction>> {
    let n = graph.node_count();
    let mut color: Vec<Option<Direction>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(Direction::Ccw);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &v in graph.neighbors(u) {
                match color[v] {
                    None => {
                        color[v] = Some(cu.opposite());
                        parent[v] = u;
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => {
                        return Err(GeometryError::NotBipartite {
                            cycle: odd_cycle(&parent, u, v),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(color.into_iter().map(Option::unwrap).collect())
}

/// Closes the BFS-tree paths from `u` and `v` at their lowest common ancestor.
fn odd_cycle(parent: &[usize], u: usize, v: usize) -> Vec<usize> {
    let path_to_root = |mut x: usize| {
        let mut path = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            path.push(x);
        }
        path
    };
    let pu = path_to_root(u);
    let pv = path_to_root(v);
    let lca = *pu.iter().find(|x| pv.contains(x)).expect("same BFS tree");
    let mut cycle: Vec<usize> = pu.iter().copied().take_while(|&x| x != lca).collect();
    cycle.push(lca);
    let tail: Vec<usize> = pv.iter().copied().take_while(|&x| x != lca).collect();
    cycle.extend(tail.into_iter().rev());
    cycle
}

/// Whether both robots of `edge` reach their link positions at the same time.
pub fn is_synchronized(instance: &Instance, edge: (usize, usize)) -> Result<bool> {
    let (i, j) = edge;
    if i == j {
        return Err(GeometryError::SelfLoop(i));
    }
    if i >= instance.len() {
        return Err(GeometryError::UnknownCircle(i));
    }
    if j >= instance.len() {
        return Err(GeometryError::UnknownCircle(j));
    }
    Ok(edge_synchronized(
        &instance.trajectories,
        &instance.schedule,
        i,
        j,
        instance.tolerances.angle,
    ))
}

fn edge_synchronized(
    trajectories: &[Trajectory],
    schedule: &Schedule,
    i: usize,
    j: usize,
    tol: f64,
) -> bool {
    let phi_ij = trajectories[i].center.angle_to(&trajectories[j].center);
    let phi_ji = trajectories[j].center.angle_to(&trajectories[i].center);
    // arrival phase of each robot at its link, as an angle
    let arrive_i = schedule.directions[i].sign() * (phi_ij - schedule.starts[i]);
    let arrive_j = schedule.directions[j].sign() * (phi_ji - schedule.starts[j]);
    angle_gap(arrive_i, arrive_j) <= tol
}

/// Propagates start angles along a BFS tree from circle 0 (start 0), then checks
/// every remaining edge.
pub fn synthesize_schedule(
    trajectories: &[Trajectory],
    graph: &CommunicationGraph,
    directions: &[Direction],
    angle_tolerance: f64,
) -> Result<Schedule> {
    let n = trajectories.len();
    if directions.len() != n {
        return Err(GeometryError::WrongLength {
            what: "directions",
            expected: n,
            found: directions.len(),
        });
    }
    let mut starts: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if starts[root].is_some() {
            continue;
        }
        starts[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let fi = starts[i].unwrap();
            for &j in graph.neighbors(i) {
                if starts[j].is_some() {
                    continue;
                }
                let phi_ij = trajectories[i].center.angle_to(&trajectories[j].center);
                let phi_ji = trajectories[j].center.angle_to(&trajectories[i].center);
                let gi = directions[i].sign();
                let gj = directions[j].sign();
                starts[j] = Some(normalize_angle(phi_ji - gj * gi * (phi_ij - fi)));
                queue.push_back(j);
            }
        }
    }
    let schedule = Schedule {
        starts: starts.into_iter().map(Option::unwrap).collect(),
        directions: directions.to_vec(),
    };
    for &(i, j) in graph.edges() {
        if !edge_synchronized(trajectories, &schedule, i, j, angle_tolerance) {
            return Err(GeometryError::NotSynchronizable(i, j));
        }
    }
    Ok(schedule)
}
