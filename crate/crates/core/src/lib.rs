//! Synchronized communication systems of robots on unit-circle trajectories:
//! rings and ties, the meeting graph, k-resilience, a shifting-protocol
//! simulator and the circulant-to-caterpillar reduction.

pub mod document;
pub mod generate;
pub mod geometry;
pub mod meeting;
pub mod reduction;
pub mod resilience;
pub mod rings;
pub mod simulate;

use thiserror::Error;

use geometry::{GeometryError, Instance};
use meeting::{build_meeting_graph, MeetingError, MeetingGraph};
use rings::{compute_ties, decompose_rings, place_robots, Decomposition, Placements, RingError, TieReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Meeting(#[from] MeetingError),
    #[error(transparent)]
    Resilience(#[from] resilience::ResilienceError),
    #[error(transparent)]
    Simulation(#[from] simulate::SimError),
    #[error(transparent)]
    Reduction(#[from] reduction::ReductionError),
    #[error(transparent)]
    Document(#[from] document::DocumentError),
}

/// An instance together with its rings, ties, robot placement and meeting graph.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub instance: Instance,
    pub decomposition: Decomposition,
    pub ties: TieReport,
    pub placements: Placements,
    pub meeting: MeetingGraph,
}

impl Analysis {
    pub fn new(instance: Instance) -> Result<Self, Error> {
        let slot = instance.tolerances().slot;
        let decomposition = decompose_rings(&instance)?;
        let ties = compute_ties(&decomposition, slot)?;
        let placements = place_robots(&instance, &decomposition)?;
        let meeting = build_meeting_graph(&decomposition, &ties, &placements, slot)?;
        Ok(Analysis {
            instance,
            decomposition,
            ties,
            placements,
            meeting,
        })
    }

    pub fn len(&self) -> usize {
        self.instance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance.is_empty()
    }

    /// Least common multiple of the ring lengths.
    pub fn ring_lcm(&self) -> u64 {
        use num_integer::Integer;
        self.decomposition
            .rings
            .iter()
            .fold(1u64, |acc, r| acc.lcm(&r.length_slots))
    }
}
