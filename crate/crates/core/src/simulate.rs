//! Event-driven simulation of a partial system under the shifting protocol.
//!
//! Robots are tracked on trajectories. Whenever the schedule brings two
//! neighboring circles to their shared link position, occupants of both
//! circles meet and keep their trajectories; a lone occupant shifts to the
//! neighboring circle.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::Analysis;

pub const DEFAULT_EVENT_CAP: usize = 10_000_000;
pub const DEFAULT_MAX_HORIZON: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("unknown robot {0}")]
    UnknownRobot(usize),
    #[error("at least one robot must remain")]
    NoSurvivors,
    #[error("horizon must be at least one slot")]
    ZeroHorizon,
    #[error("period of {lcm} slots exceeds the horizon cap of {cap}")]
    HorizonOverflow { lcm: u64, cap: u64 },
    #[error("more than {cap} events")]
    EventCapExceeded { cap: usize },
    #[error("horizon {horizon} is shorter than the period {lcm}")]
    InsufficientHorizon { horizon: u64, lcm: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Horizon {
    /// One full period: the lcm of the ring lengths.
    #[default]
    Auto,
    Slots(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub removed: BTreeSet<usize>,
    pub horizon: Horizon,
    pub event_cap: usize,
    /// Largest period accepted for an automatic horizon.
    pub max_horizon: u64,
    /// Coincidence tolerance for event times, in slots.
    pub tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            removed: BTreeSet::new(),
            horizon: Horizon::Auto,
            event_cap: DEFAULT_EVENT_CAP,
            max_horizon: DEFAULT_MAX_HORIZON,
            tolerance: crate::geometry::SLOT_TOLERANCE,
        }
    }
}

impl SimConfig {
    pub fn removing(removed: impl IntoIterator<Item = usize>) -> Self {
        SimConfig {
            removed: removed.into_iter().collect(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Met,
    Shifted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimEvent {
    pub time: f64,
    pub crossing: usize,
    pub edge: (usize, usize),
    pub robots: Vec<usize>,
    pub outcome: Outcome,
}

/// Live robots per ring from some time onwards.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancySample {
    pub time: f64,
    pub counts: Vec<usize>,
}

/// A robot whose meetings all fall in the first period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransientDiagnostic {
    pub robot: usize,
    pub meetings_in_first_period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub horizon: u64,
    /// Lcm of the ring lengths.
    pub period: u64,
    pub removed: BTreeSet<usize>,
    pub events: Vec<SimEvent>,
    /// MET events per robot, indexed by robot id.
    pub meetings_per_robot: Vec<usize>,
    /// Live robots with no MET event over the horizon.
    pub starving: BTreeSet<usize>,
    /// Occupancy at time zero followed by every change.
    pub occupancy: Vec<OccupancySample>,
    pub occupancy_samples: usize,
    pub diagnostics: Vec<TransientDiagnostic>,
}

/// Link firing once per slot at `base + m`.
struct LinkClock {
    base: f64,
    crossing: usize,
    edge: (usize, usize),
}

fn link_clocks(analysis: &Analysis, tol: f64) -> Vec<LinkClock> {
    let inst = &analysis.instance;
    let mut clocks: Vec<LinkClock> = inst
        .graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(crossing, &(i, j))| {
            let raw = inst.direction(i).sign() * (inst.link_angle(i, j) - inst.schedule().starts[i]) / TAU;
            let mut base = raw.rem_euclid(1.0);
            if base >= 1.0 - tol {
                base = 0.0;
            }
            LinkClock { base, crossing, edge: (i, j) }
        })
        .collect();
    clocks.sort_by(|a, b| a.base.total_cmp(&b.base).then(a.crossing.cmp(&b.crossing)));
    clocks
}

fn ring_counts(analysis: &Analysis, occupant: &[Option<usize>], time: f64, departing: bool) -> Vec<usize> {
    let inst = &analysis.instance;
    let mut counts = vec![0; analysis.decomposition.rings.len()];
    for (circle, occ) in occupant.iter().enumerate() {
        if occ.is_some() {
            let angle = inst.schedule().angle_at(circle, time);
            let (ring, _) = analysis
                .decomposition
                .locate(circle, angle, departing, inst.tolerances().angle * 1e3);
            counts[ring] += 1;
        }
    }
    counts
}

pub fn simulate(analysis: &Analysis, config: &SimConfig) -> Result<SimReport, SimError> {
    let n = analysis.len();
    if let Some(&bad) = config.removed.iter().find(|&&r| r >= n) {
        return Err(SimError::UnknownRobot(bad));
    }
    if config.removed.len() >= n {
        return Err(SimError::NoSurvivors);
    }
    let period = analysis.ring_lcm();
    let horizon = match config.horizon {
        Horizon::Slots(0) => return Err(SimError::ZeroHorizon),
        Horizon::Slots(h) => h,
        Horizon::Auto if period > config.max_horizon => {
            return Err(SimError::HorizonOverflow {
                lcm: period,
                cap: config.max_horizon,
            })
        }
        Horizon::Auto => period,
    };
    let tol = config.tolerance;

    let mut occupant: Vec<Option<usize>> = (0..n).map(|i| (!config.removed.contains(&i)).then_some(i)).collect();
    let mut events = Vec::new();
    let mut meetings = vec![0usize; n];
    let mut met_times: Vec<Vec<f64>> = vec![Vec::new(); n];
    let initial = ring_counts(analysis, &occupant, 0.0, false);
    let mut occupancy = vec![OccupancySample {
        time: 0.0,
        counts: initial,
    }];
    let mut samples = 1;

    let clocks = link_clocks(analysis, tol);
    for m in 0..horizon {
        let mut k = 0;
        while k < clocks.len() {
            // one batch: links firing together
            let start = k;
            while k < clocks.len() && clocks[k].base - clocks[start].base <= tol {
                k += 1;
            }
            let time = m as f64 + clocks[start].base;
            let mut any = false;
            for clock in &clocks[start..k] {
                let (i, j) = clock.edge;
                let event = match (occupant[i], occupant[j]) {
                    (Some(a), Some(b)) => {
                        meetings[a] += 1;
                        meetings[b] += 1;
                        met_times[a].push(time);
                        met_times[b].push(time);
                        Some((vec![a.min(b), a.max(b)], Outcome::Met))
                    }
                    (Some(a), None) => {
                        occupant[j] = Some(a);
                        occupant[i] = None;
                        Some((vec![a], Outcome::Shifted))
                    }
                    (None, Some(b)) => {
                        occupant[i] = Some(b);
                        occupant[j] = None;
                        Some((vec![b], Outcome::Shifted))
                    }
                    (None, None) => None,
                };
                if let Some((robots, outcome)) = event {
                    if events.len() >= config.event_cap {
                        return Err(SimError::EventCapExceeded { cap: config.event_cap });
                    }
                    any = true;
                    events.push(SimEvent {
                        time,
                        crossing: clock.crossing,
                        edge: clock.edge,
                        robots,
                        outcome,
                    });
                }
            }
            if any {
                samples += 1;
                let counts = ring_counts(analysis, &occupant, time, true);
                if counts != occupancy.last().expect("initial sample").counts {
                    occupancy.push(OccupancySample { time, counts });
                }
            }
        }
    }

    let live = || (0..n).filter(|r| !config.removed.contains(r));
    let starving = live().filter(|&r| meetings[r] == 0).collect();
    let mut diagnostics = Vec::new();
    if horizon >= 2 * period {
        let p = period as f64 - tol;
        for r in live() {
            let first = met_times[r].iter().filter(|&&t| t < p).count();
            if first > 0 && first == met_times[r].len() {
                diagnostics.push(TransientDiagnostic {
                    robot: r,
                    meetings_in_first_period: first,
                });
            }
        }
    }

    Ok(SimReport {
        horizon,
        period,
        removed: config.removed.clone(),
        events,
        meetings_per_robot: meetings,
        starving,
        occupancy,
        occupancy_samples: samples,
        diagnostics,
    })
}

/// Live robots with no meeting during the first full period.
pub fn detect_starving(report: &SimReport) -> Result<BTreeSet<usize>, SimError> {
    if report.horizon < report.period {
        return Err(SimError::InsufficientHorizon {
            horizon: report.horizon,
            lcm: report.period,
        });
    }
    let limit = report.period as f64 - 1e-9;
    let mut met = vec![false; report.meetings_per_robot.len()];
    for e in report.events.iter().filter(|e| e.outcome == Outcome::Met && e.time < limit) {
        for &r in &e.robots {
            met[r] = true;
        }
    }
    Ok((0..met.len())
        .filter(|r| !report.removed.contains(r) && !met[*r])
        .collect())
}

/// True iff every ring holds the same number of live robots throughout.
pub fn occupancy_invariant_check(report: &SimReport) -> bool {
    report.occupancy.windows(2).all(|w| w[0].counts == w[1].counts)
}

/// Writes one JSON object per event.
pub fn write_events_jsonl<W: Write>(report: &SimReport, mut out: W) -> io::Result<()> {
    for e in &report.events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
