//! JSON form of an instance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Direction, GeometryError, Instance, InstanceOptions, Point, Tolerances};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Parse(#[from] serde_json::Error),
    #[error("circle ids must be 0..{n} without gaps or repeats (problem at id {id})")]
    BadIds { n: usize, id: usize },
    #[error("{field}: unknown circle id {id}")]
    UnknownId { field: &'static str, id: usize },
    #[error("{field}: missing entry for circle {id}")]
    MissingEntry { field: &'static str, id: usize },
    #[error("directions: circle {id} has {value}, expected +1 or -1")]
    BadDirection { id: usize, value: i8 },
    #[error(transparent)]
    Validation(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleEntry {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub epsilon: f64,
    pub circles: Vec<CircleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<BTreeMap<usize, i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<BTreeMap<usize, f64>>,
}

impl InstanceDocument {
    pub fn from_centers(epsilon: f64, centers: &[Point]) -> Self {
        InstanceDocument {
            epsilon,
            circles: centers
                .iter()
                .enumerate()
                .map(|(id, p)| CircleEntry { id, x: p.x, y: p.y })
                .collect(),
            edges: None,
            directions: None,
            starts: None,
        }
    }

    pub fn to_instance(&self) -> Result<Instance, DocumentError> {
        self.to_instance_with(Tolerances::default())
    }

    pub fn to_instance_with(&self, tolerances: Tolerances) -> Result<Instance, DocumentError> {
        let n = self.circles.len();
        let mut centers = vec![None; n];
        for c in &self.circles {
            match centers.get_mut(c.id) {
                Some(slot @ None) => *slot = Some(Point::new(c.x, c.y)),
                _ => return Err(DocumentError::BadIds { n, id: c.id }),
            }
        }
        let centers: Vec<Point> = centers.into_iter().map(|p| p.expect("every id seen once")).collect();

        let per_circle = |field: &'static str, keys: Vec<usize>| -> Result<(), DocumentError> {
            if let Some(&id) = keys.iter().find(|&&id| id >= n) {
                return Err(DocumentError::UnknownId { field, id });
            }
            if let Some(id) = (0..n).find(|id| !keys.contains(id)) {
                return Err(DocumentError::MissingEntry { field, id });
            }
            Ok(())
        };
        let directions = match &self.directions {
            None => None,
            Some(map) => {
                per_circle("directions", map.keys().copied().collect())?;
                Some(
                    map.iter()
                        .map(|(&id, &v)| Direction::from_i8(v).ok_or(DocumentError::BadDirection { id, value: v }))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };
        let starts = match &self.starts {
            None => None,
            Some(map) => {
                per_circle("starts", map.keys().copied().collect())?;
                Some(map.values().copied().collect())
            }
        };
        let options = InstanceOptions {
            edges: self.edges.as_ref().map(|e| e.iter().map(|&[i, j]| (i, j)).collect()),
            directions,
            starts,
            tolerances: Some(tolerances),
        };
        Ok(Instance::with_options(self.epsilon, &centers, options)?)
    }
}

/// Parses and validates an instance, filling in defaults for omitted fields.
pub fn parse_instance(text: &str) -> Result<Instance, DocumentError> {
    let doc: InstanceDocument = serde_json::from_str(text)?;
    doc.to_instance()
}

/// Complete document of an instance, including derived edges, directions and starts.
pub fn to_document(instance: &Instance) -> InstanceDocument {
    let mut doc = InstanceDocument::from_centers(instance.epsilon(), &instance.centers());
    doc.edges = Some(instance.graph().edges().iter().map(|&(i, j)| [i, j]).collect());
    doc.directions = Some((0..instance.len()).map(|i| (i, instance.direction(i).as_i8())).collect());
    doc.starts = Some(instance.schedule().starts.iter().copied().enumerate().collect());
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let inst = parse_instance(r#"{"epsilon": 0.3, "circles": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 2.2, "y": 0}]}"#)
            .unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.graph().edges(), &[(0, 1)]);
    }

    #[test]
    fn ids_may_come_in_any_order() {
        let inst = parse_instance(r#"{"epsilon": 0.3, "circles": [{"id": 1, "x": 2.2, "y": 0}, {"id": 0, "x": 0, "y": 0}]}"#)
            .unwrap();
        assert_eq!(inst.centers()[1], Point::new(2.2, 0.0));
    }

    #[test]
    fn large_epsilon_is_invalid() {
        let err = parse_instance(r#"{"epsilon": 0.6, "circles": [{"id": 0, "x": 0, "y": 0}]}"#).unwrap_err();
        assert!(matches!(err, DocumentError::Validation(GeometryError::InvalidEpsilon(_))));
    }

    #[test]
    fn triangle_is_not_bipartite() {
        let h = 2.15 * 3f64.sqrt() / 2.0;
        let text = format!(
            r#"{{"epsilon": 0.3, "circles": [{{"id": 0, "x": 0, "y": 0}}, {{"id": 1, "x": 2.15, "y": 0}}, {{"id": 2, "x": 1.075, "y": {h}}}],
               "edges": [[0, 1], [1, 2], [0, 2]]}}"#
        );
        assert!(matches!(
            parse_instance(&text).unwrap_err(),
            DocumentError::Validation(GeometryError::NotBipartite { .. })
        ));
    }

    #[test]
    fn malformed_and_bad_fields() {
        assert!(matches!(parse_instance("{").unwrap_err(), DocumentError::Parse(_)));
        assert!(matches!(
            parse_instance(r#"{"epsilon": 0.3, "circles": [{"id": 1, "x": 0, "y": 0}]}"#).unwrap_err(),
            DocumentError::BadIds { id: 1, .. }
        ));
        assert!(matches!(
            parse_instance(r#"{"epsilon": 0.3, "circles": [{"id": 0, "x": 0, "y": 0}], "directions": {"0": 2}}"#)
                .unwrap_err(),
            DocumentError::BadDirection { id: 0, value: 2 }
        ));
        assert!(matches!(
            parse_instance(r#"{"epsilon": 0.3, "circles": [{"id": 0, "x": 0, "y": 0}], "starts": {"3": 0.0}}"#)
                .unwrap_err(),
            DocumentError::UnknownId { field: "starts", id: 3 }
        ));
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"{"epsilon": 0.3, "circles": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 2.15, "y": 0}, {"id": 2, "x": 2.15, "y": 2.15}]}"#;
        let inst = parse_instance(text).unwrap();
        let doc = to_document(&inst);
        let json = serde_json::to_string(&doc).unwrap();
        let again = parse_instance(&json).unwrap();
        assert_eq!(again.graph().edges(), inst.graph().edges());
        assert_eq!(again.schedule().starts, inst.schedule().starts);
        assert_eq!(to_document(&again), doc);
    }
}
