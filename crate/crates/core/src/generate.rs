//! Deterministic instance families.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::document::InstanceDocument;
use crate::geometry::Point;
use crate::reduction::{caterpillar_layout, validate_layout, CirculantGraph, LayoutParams, ReductionError};

pub const DEFAULT_EPSILON: f64 = 0.3;
/// Center distance of neighboring circles: disjoint, yet within range.
pub const DEFAULT_SPACING: f64 = 2.15;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `n` collinear circles.
    Path(usize),
    /// Regular polygon with an even number of circles.
    Cycle(usize),
    /// Comb on an `a × a` grid: `a` vertical teeth of `a` circles hanging off the bottom row.
    GridTree(usize),
    /// Caterpillar built from an augmented circulant graph.
    Caterpillar(CirculantGraph),
}

impl Family {
    pub fn parse(kind: &str, param: &str) -> Result<Self, GenerateError> {
        let count = || {
            param
                .trim()
                .parse::<usize>()
                .map_err(|_| GenerateError::InvalidParams(format!("{kind} expects a positive integer, got {param:?}")))
        };
        match kind {
            "path" => Ok(Family::Path(count()?)),
            "cycle" => Ok(Family::Cycle(count()?)),
            "grid-tree" => Ok(Family::GridTree(count()?)),
            "caterpillar" => Ok(Family::Caterpillar(CirculantGraph::from_str(param)?)),
            other => Err(GenerateError::InvalidParams(format!(
                "unknown kind {other:?} (path, cycle, grid-tree, caterpillar)"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Path(n) => write!(f, "path({n})"),
            Family::Cycle(n) => write!(f, "cycle({n})"),
            Family::GridTree(a) => write!(f, "grid-tree({a})"),
            Family::Caterpillar(g) => write!(f, "caterpillar({g})"),
        }
    }
}

pub fn path(n: usize) -> Result<InstanceDocument, GenerateError> {
    if n == 0 {
        return Err(GenerateError::InvalidParams("path needs at least one circle".into()));
    }
    let centers: Vec<Point> = (0..n).map(|i| Point::new(DEFAULT_SPACING * i as f64, 0.0)).collect();
    Ok(InstanceDocument::from_centers(DEFAULT_EPSILON, &centers))
}

pub fn cycle(n: usize) -> Result<InstanceDocument, GenerateError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(GenerateError::InvalidParams(format!("cycle needs an even length of at least 4, got {n}")));
    }
    let radius = DEFAULT_SPACING / (2.0 * (PI / n as f64).sin());
    let centers: Vec<Point> = (0..n)
        .map(|i| {
            // start at a corner so that the square is axis-aligned
            let a = 2.0 * PI * i as f64 / n as f64 - PI / 2.0 - PI / n as f64;
            Point::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    Ok(InstanceDocument::from_centers(DEFAULT_EPSILON, &centers))
}

pub fn grid_tree(a: usize) -> Result<InstanceDocument, GenerateError> {
    if a < 2 {
        return Err(GenerateError::InvalidParams(format!("grid-tree needs a >= 2, got {a}")));
    }
    let s = DEFAULT_SPACING;
    let id = |col: usize, row: usize| col * a + row;
    let mut centers = Vec::with_capacity(a * a);
    let mut edges = Vec::new();
    for col in 0..a {
        for row in 0..a {
            centers.push(Point::new(s * col as f64, s * row as f64));
            if row > 0 {
                edges.push([id(col, row - 1), id(col, row)]);
            }
        }
        if col > 0 {
            edges.push([id(col - 1, 0), id(col, 0)]);
        }
    }
    let mut doc = InstanceDocument::from_centers(DEFAULT_EPSILON, &centers);
    doc.edges = Some(edges);
    Ok(doc)
}

pub fn caterpillar(augmented: &CirculantGraph) -> Result<InstanceDocument, GenerateError> {
    let layout = caterpillar_layout(augmented, LayoutParams::default())?;
    validate_layout(&layout)?;
    let mut doc = InstanceDocument::from_centers(layout.epsilon, &layout.centers);
    doc.edges = Some(layout.edges.iter().map(|&(i, j)| [i, j]).collect());
    Ok(doc)
}

pub fn generate(family: &Family) -> Result<InstanceDocument, GenerateError> {
    match family {
        Family::Path(n) => path(*n),
        Family::Cycle(n) => cycle(*n),
        Family::GridTree(a) => grid_tree(*a),
        Family::Caterpillar(g) => caterpillar(g),
    }
}
