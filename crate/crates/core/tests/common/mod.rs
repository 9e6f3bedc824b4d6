//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use scs_core::geometry::{Direction, Instance, InstanceOptions, Point};
use scs_core::Analysis;

pub const EPS: f64 = 0.3;
pub const SPACING: f64 = 2.15;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Tree grown by attaching circles at random angles, each new circle in range
/// of its parent only.
pub fn random_tree(rng: &mut StdRng, n: usize) -> Vec<Point> {
    let mut centers = vec![Point::new(0.0, 0.0)];
    while centers.len() < n {
        let parent = centers[rng.gen_range(0..centers.len())];
        let d = rng.gen_range(2.03..2.27);
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = Point::new(parent.x + d * a.cos(), parent.y + d * a.sin());
        let clear = centers
            .iter()
            .all(|c| *c == parent || c.distance(&p) > 2.0 + EPS + 0.03);
        if clear {
            centers.push(p);
        }
    }
    centers
}

/// Connected set of cells on the square lattice of spacing 2.15.
pub fn random_polyomino(rng: &mut StdRng, n: usize) -> Vec<Point> {
    let mut cells: Vec<(i32, i32)> = vec![(0, 0)];
    let mut seen: BTreeSet<(i32, i32)> = cells.iter().copied().collect();
    while cells.len() < n {
        let (x, y) = cells[rng.gen_range(0..cells.len())];
        let (dx, dy) = [(1, 0), (-1, 0), (0, 1), (0, -1)][rng.gen_range(0..4)];
        let cell = (x + dx, y + dy);
        if seen.insert(cell) {
            cells.push(cell);
        }
    }
    cells
        .into_iter()
        .map(|(x, y)| Point::new(SPACING * x as f64, SPACING * y as f64))
        .collect()
}

/// Random spanning tree of the potential links plus each other link with probability `extra`.
pub fn random_edge_subset(rng: &mut StdRng, centers: &[Point], extra: f64) -> Vec<(usize, usize)> {
    let mut links = scs_core::geometry::potential_links(centers, EPS).unwrap();
    links.shuffle(rng);
    let mut parent: Vec<usize> = (0..centers.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut edges = Vec::new();
    for &(i, j) in &links {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            edges.push((i, j));
        } else if rng.gen_bool(extra) {
            edges.push((i, j));
        }
    }
    edges
}

/// A random valid instance with `n` circles: tree, grid or grid subgraph,
/// optionally with reversed directions and a global time shift.
pub fn random_instance(rng: &mut StdRng, n: usize) -> Instance {
    let kind = rng.gen_range(0..3);
    let centers = match kind {
        0 => random_tree(rng, n),
        _ => random_polyomino(rng, n),
    };
    let edges = match kind {
        2 => Some(random_edge_subset(rng, &centers, 0.5)),
        _ => None,
    };
    let flip = rng.gen_bool(0.5);
    let base = Instance::with_options(
        EPS,
        &centers,
        InstanceOptions {
            edges: edges.clone(),
            ..Default::default()
        },
    )
    .unwrap();
    let inst = if flip {
        let directions: Vec<Direction> = (0..n).map(|i| base.direction(i).opposite()).collect();
        Instance::with_options(
            EPS,
            &centers,
            InstanceOptions {
                edges,
                directions: Some(directions),
                ..Default::default()
            },
        )
        .unwrap()
    } else {
        base
    };
    if rng.gen_bool(0.5) {
        inst.time_shifted(rng.gen_range(0.0..1.0))
    } else {
        inst
    }
}

pub fn analysis(inst: Instance) -> Analysis {
    Analysis::new(inst).unwrap()
}

pub fn path(n: usize) -> Instance {
    let centers: Vec<Point> = (0..n).map(|i| Point::new(SPACING * i as f64, 0.0)).collect();
    Instance::new(EPS, &centers).unwrap()
}

/// Random subset of robots leaving at least one survivor.
pub fn random_removal(rng: &mut StdRng, n: usize) -> BTreeSet<usize> {
    let size = rng.gen_range(0..n);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.into_iter().take(size).collect()
}
