//! Circulant graphs and their embedding as caterpillar-shaped systems.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{potential_links, GeometryError, Instance, Point};
use crate::resilience::{maximum_independent_set, starvation_number, ResilienceError, Starvation};
use crate::Analysis;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("invalid circulant graph: {0}")]
    InvalidCirculant(String),
    #[error("C_{n} is not an augmented circulant: odd jump {missing} is missing")]
    NotAugmented { n: usize, missing: usize },
    #[error("layout links differ from the caterpillar (unexpected {unexpected:?}, missing {missing:?})")]
    LayoutCollision {
        unexpected: Vec<(usize, usize)>,
        missing: Vec<(usize, usize)>,
    },
    #[error("system has {0} rings, expected one")]
    NotSingleRing(usize),
    #[error(
        "reduction mismatch: tie jumps {found_ties:?} vs {expected_ties:?}, starvation number {found_mis} vs {expected_mis}"
    )]
    ReductionMismatch {
        expected_ties: Vec<usize>,
        found_ties: Vec<usize>,
        expected_mis: usize,
        found_mis: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Resilience(#[from] ResilienceError),
    #[error("analysis failed: {0}")]
    Analysis(Box<crate::Error>),
}

/// `C_n S`: vertex `i` is adjacent to `i ± d (mod n)` for every jump `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CirculantGraph {
    pub n: usize,
    pub jumps: BTreeSet<usize>,
}

impl CirculantGraph {
    pub fn new(n: usize, jumps: impl IntoIterator<Item = usize>) -> Result<Self, ReductionError> {
        if n == 0 {
            return Err(ReductionError::InvalidCirculant("n must be positive".into()));
        }
        let jumps: BTreeSet<usize> = jumps.into_iter().collect();
        if let Some(&d) = jumps.iter().find(|&&d| d == 0 || d > n / 2) {
            return Err(ReductionError::InvalidCirculant(format!(
                "jump {d} outside 1..={}",
                n / 2
            )));
        }
        Ok(CirculantGraph { n, jumps })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let d = (u + self.n - v) % self.n;
        self.jumps.contains(&d.min(self.n - d))
    }

    pub fn adjacency(&self) -> Vec<FixedBitSet> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                for &d in &self.jumps {
                    row.insert((i + d) % n);
                    row.insert((i + n - d) % n);
                }
                row
            })
            .collect()
    }
}

impl fmt::Display for CirculantGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let jumps: Vec<String> = self.jumps.iter().map(usize::to_string).collect();
        write!(f, "{};{}", self.n, jumps.join(","))
    }
}

impl FromStr for CirculantGraph {
    type Err = ReductionError;

    /// Parses `"n;d1,d2,..."`; the jump list may be empty.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ReductionError::InvalidCirculant(format!("expected \"n;d1,d2,...\", got {s:?}"));
        let (n, rest) = s.split_once(';').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let jumps = rest
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        CirculantGraph::new(n, jumps)
    }
}

/// `C_n S ↦ C_2n Ō` with `Ō = {2d : d ∈ S} ∪ {1, 3, 5, …}`.
pub fn knn_augmentation(g: &CirculantGraph) -> CirculantGraph {
    let n = g.n;
    let jumps = g
        .jumps
        .iter()
        .map(|d| 2 * d)
        .chain((1..=n.div_ceil(2)).map(|i| 2 * i - 1).filter(|&d| d <= n))
        .collect();
    CirculantGraph { n: 2 * n, jumps }
}

pub fn circulant_mis(g: &CirculantGraph, budget: u64) -> Result<Starvation, ReductionError> {
    Ok(maximum_independent_set(&g.adjacency(), budget)?)
}

/// Circulant graph formed by the robots of an `l`-slot ring with the given ties.
pub fn circulant_from_ring(ring_length: u64, ties: &[u64]) -> CirculantGraph {
    let l = ring_length as usize;
    CirculantGraph {
        n: l,
        jumps: ties
            .iter()
            .map(|&t| (t as usize).min(l - t as usize))
            .filter(|&d| d > 0)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mirror {
    /// About the vertical line between the last two spine circles.
    BetweenSpine,
    /// About the vertical line through the last spine circle.
    ThroughSpine,
    /// Point reflection about the midpoint of the last two spine circles.
    Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaterpillarLayout {
    pub centers: Vec<Point>,
    /// -1, 0 or 1: the horizontal line each circle is centered on.
    pub lines: Vec<i8>,
    pub edges: Vec<(usize, usize)>,
    pub mirror: Mirror,
    pub h: f64,
    pub spacing: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayoutParams {
    pub h: f64,
    pub spacing: f64,
    pub epsilon: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            h: 2.0,
            spacing: 2.15,
            epsilon: 0.3,
        }
    }
}

/// Places the circles of an augmented circulant `C_2n Ō` on three horizontal lines.
pub fn caterpillar_layout(augmented: &CirculantGraph, params: LayoutParams) -> Result<CaterpillarLayout, ReductionError> {
    if augmented.n < 4 || !augmented.n.is_multiple_of(2) {
        return Err(ReductionError::InvalidCirculant(format!(
            "augmented circulant needs an even order of at least 4, got {}",
            augmented.n
        )));
    }
    let n = augmented.n / 2;
    if let Some(missing) = (1..=n).step_by(2).find(|d| !augmented.jumps.contains(d)) {
        return Err(ReductionError::NotAugmented { n: augmented.n, missing });
    }
    let in_set = |i: usize| augmented.jumps.contains(&i);
    let LayoutParams { h, spacing: s, .. } = params;
    let dx = (s * s - h * h).max(0.0).sqrt();

    let mut centers = vec![Point::new(0.0, 0.0)];
    let mut lines = vec![0i8];
    let mut edges = Vec::new();
    let mut last_spine = 0;
    let mut next_leaf_line = 1i8;
    for i in 1..=n {
        let anchor = centers[last_spine];
        edges.push((last_spine, i));
        if in_set(i) {
            centers.push(Point::new(anchor.x + s, 0.0));
            lines.push(0);
            last_spine = i;
        } else {
            centers.push(Point::new(anchor.x + dx, f64::from(next_leaf_line) * h));
            lines.push(next_leaf_line);
            next_leaf_line = -next_leaf_line;
        }
    }

    // image of each placed circle under the reflection; None when it is not mirrored
    let mut image: Vec<Option<usize>> = vec![None; n + 1];
    let (mirror, mirrored): (Mirror, Vec<usize>) = if lines[n - 1] == 0 && lines[n] == 0 {
        image[n - 1] = Some(n);
        image[n] = Some(n - 1);
        (Mirror::BetweenSpine, (0..n - 1).rev().collect())
    } else if lines[n - 1] == 0 {
        image[n - 1] = Some(n - 1);
        (Mirror::ThroughSpine, (0..n - 1).rev().collect())
    } else {
        image[n - 2] = Some(n);
        image[n] = Some(n - 2);
        let mut m = vec![n - 1];
        m.extend((0..n - 2).rev());
        (Mirror::Point, m)
    };
    let axis = match mirror {
        Mirror::BetweenSpine => centers[n - 1].x + centers[n].x,
        Mirror::ThroughSpine => 2.0 * centers[n - 1].x,
        Mirror::Point => centers[n - 2].x + centers[n].x,
    };
    let reflect = |p: Point| match mirror {
        Mirror::Point => Point::new(axis - p.x, -p.y),
        _ => Point::new(axis - p.x, p.y),
    };
    for &k in &mirrored {
        image[k] = Some(centers.len());
        let p = reflect(centers[k]);
        centers.push(p);
        lines.push(if mirror == Mirror::Point { -lines[k] } else { lines[k] });
    }
    let original = edges.clone();
    for (a, b) in original {
        if let (Some(x), Some(y)) = (image[a], image[b]) {
            edges.push((x.min(y), x.max(y)));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    Ok(CaterpillarLayout {
        centers,
        lines,
        edges,
        mirror,
        h,
        spacing: s,
        epsilon: params.epsilon,
    })
}

/// Checks that the layout links exactly the intended caterpillar.
pub fn validate_layout(layout: &CaterpillarLayout) -> Result<(), ReductionError> {
    let links: BTreeSet<(usize, usize)> = potential_links(&layout.centers, layout.epsilon)?.into_iter().collect();
    let intended: BTreeSet<(usize, usize)> = layout.edges.iter().copied().collect();
    if links != intended {
        return Err(ReductionError::LayoutCollision {
            unexpected: links.difference(&intended).copied().collect(),
            missing: intended.difference(&links).copied().collect(),
        });
    }
    Ok(())
}

/// Caterpillar-shaped system whose distinct ties, folded to `min(l, 2n − l)`,
/// are exactly the jumps of the augmented circulant.
pub fn build_caterpillar_scs(augmented: &CirculantGraph) -> Result<Instance, ReductionError> {
    build_caterpillar_scs_with(augmented, LayoutParams::default())
}

pub fn build_caterpillar_scs_with(augmented: &CirculantGraph, params: LayoutParams) -> Result<Instance, ReductionError> {
    let layout = caterpillar_layout(augmented, params)?;
    validate_layout(&layout)?;
    Ok(Instance::with_edges(layout.epsilon, &layout.centers, &layout.edges)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub original: String,
    pub augmented: String,
    /// Distinct tie lengths of the single ring.
    pub ties: Vec<u64>,
    /// Ties folded to `min(l, N − l)`.
    pub tie_jumps: Vec<usize>,
    pub starvation_number: usize,
    pub starvation_witness: Vec<usize>,
    pub mis: usize,
    pub mis_witness: Vec<usize>,
}

/// Checks a constructed system against the circulant it came from.
pub fn verify_reduction(original: &CirculantGraph, scs: &Instance, budget: u64) -> Result<ReductionReport, ReductionError> {
    let augmented = knn_augmentation(original);
    let analysis = Analysis::new(scs.clone()).map_err(|e| ReductionError::Analysis(Box::new(e)))?;
    verify_analysis(original, &augmented, &analysis, budget)
}

pub fn verify_analysis(
    original: &CirculantGraph,
    augmented: &CirculantGraph,
    analysis: &Analysis,
    budget: u64,
) -> Result<ReductionReport, ReductionError> {
    let rings = analysis.decomposition.rings.len();
    if rings != 1 {
        return Err(ReductionError::NotSingleRing(rings));
    }
    let ties = analysis.ties.distinct_for(0).to_vec();
    let folded = circulant_from_ring(analysis.decomposition.ring_length(0), &ties);
    let starving = starvation_number(&analysis.meeting, budget)?;
    let mis = circulant_mis(original, budget)?;
    if folded.jumps != augmented.jumps || starving.size != mis.size {
        return Err(ReductionError::ReductionMismatch {
            expected_ties: augmented.jumps.iter().copied().collect(),
            found_ties: folded.jumps.iter().copied().collect(),
            expected_mis: mis.size,
            found_mis: starving.size,
        });
    }
    Ok(ReductionReport {
        original: original.to_string(),
        augmented: augmented.to_string(),
        ties,
        tie_jumps: folded.jumps.into_iter().collect(),
        starvation_number: starving.size,
        starvation_witness: starving.witness,
        mis: mis.size,
        mis_witness: mis.witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resilience::DEFAULT_BUDGET;

    fn c(s: &str) -> CirculantGraph {
        s.parse().unwrap()
    }

    fn brute_mis(g: &CirculantGraph) -> usize {
        (0u32..1 << g.n)
            .filter(|m| {
                (0..g.n).all(|u| (u + 1..g.n).all(|v| m >> u & 1 == 0 || m >> v & 1 == 0 || !g.has_edge(u, v)))
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(c("6;2"), CirculantGraph::new(6, [2]).unwrap());
        assert_eq!(c("12; 1, 3,4,5").to_string(), "12;1,3,4,5");
        assert_eq!(c("5;").jumps.len(), 0);
        assert!("6;4".parse::<CirculantGraph>().is_err());
        assert!("6;0".parse::<CirculantGraph>().is_err());
        assert!("6".parse::<CirculantGraph>().is_err());
        assert!("x;1".parse::<CirculantGraph>().is_err());
    }

    #[test]
    fn augmentation_fixtures() {
        assert_eq!(knn_augmentation(&c("6;2")), c("12;1,3,4,5"));
        assert_eq!(knn_augmentation(&c("4;2")), c("8;1,3,4"));
        assert_eq!(knn_augmentation(&c("9;3")), c("18;1,3,5,6,7,9"));
    }

    #[test]
    fn augmentation_keeps_mis() {
        for n in 2..=6 {
            for mask in 0u32..1 << (n / 2) {
                let g = CirculantGraph::new(n, (1..=n / 2).filter(|d| mask >> (d - 1) & 1 == 1)).unwrap();
                let aug = knn_augmentation(&g);
                assert!((1..=n).step_by(2).all(|d| aug.jumps.contains(&d)));
                assert_eq!(brute_mis(&g), brute_mis(&aug), "{g}");
            }
        }
    }

    #[test]
    fn mis_examples() {
        assert_eq!(circulant_mis(&c("6;2"), DEFAULT_BUDGET).unwrap().size, 2);
        assert_eq!(circulant_mis(&c("12;1,3,4,5"), DEFAULT_BUDGET).unwrap().size, 2);
        assert_eq!(circulant_mis(&c("7;"), DEFAULT_BUDGET).unwrap().size, 7);
    }

    #[test]
    fn ring_to_circulant() {
        assert_eq!(circulant_from_ring(9, &[2, 4, 5, 7]), c("9;2,4"));
        assert_eq!(circulant_from_ring(5, &[]), c("5;"));
        assert_eq!(circulant_from_ring(2, &[1]), c("2;1"));
    }

    #[test]
    fn layout_cases() {
        // n = 6, 6 not in Ō
        assert_eq!(caterpillar_layout(&c("12;1,3,4,5"), LayoutParams::default()).unwrap().mirror, Mirror::ThroughSpine);
        // n = 4, 4 in Ō
        assert_eq!(caterpillar_layout(&c("8;1,3,4"), LayoutParams::default()).unwrap().mirror, Mirror::BetweenSpine);
        // n = 5, 4 not in Ō
        assert_eq!(caterpillar_layout(&c("10;1,3,5"), LayoutParams::default()).unwrap().mirror, Mirror::Point);
        // n = 9, 8 not in Ō
        assert_eq!(caterpillar_layout(&c("18;1,3,5,6,7,9"), LayoutParams::default()).unwrap().mirror, Mirror::Point);
    }

    #[test]
    fn small_examples_produce_expected_ties() {
        for (original, jumps) in [("6;2", vec![1, 3, 4, 5]), ("4;2", vec![1, 3, 4]), ("9;3", vec![1, 3, 5, 6, 7, 9])] {
            let g = c(original);
            let inst = build_caterpillar_scs(&knn_augmentation(&g)).unwrap();
            assert_eq!(inst.len(), 2 * g.n);
            assert!(inst.graph().is_tree());
            let report = verify_reduction(&g, &inst, DEFAULT_BUDGET).unwrap();
            assert_eq!(report.tie_jumps, jumps, "{original}");
        }
    }

    #[test]
    fn rejects_non_augmented_input() {
        assert!(matches!(
            build_caterpillar_scs(&c("8;1,4")),
            Err(ReductionError::NotAugmented { missing: 3, .. })
        ));
        assert!(build_caterpillar_scs(&c("7;1,3")).is_err());
    }

    #[test]
    fn squeezed_layout_collides() {
        let params = LayoutParams {
            // leaves land within range of the following spine circle
            h: 1.9,
            ..Default::default()
        };
        assert!(matches!(
            build_caterpillar_scs_with(&c("12;1,3,4,5"), params),
            Err(ReductionError::LayoutCollision { .. })
        ));
    }

    #[test]
    fn wrong_original_is_a_mismatch() {
        let scs = build_caterpillar_scs(&knn_augmentation(&c("6;2"))).unwrap();
        assert!(matches!(
            verify_reduction(&c("6;1"), &scs, DEFAULT_BUDGET),
            Err(ReductionError::ReductionMismatch { .. })
        ));
    }
}
