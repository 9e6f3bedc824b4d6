//! Command layer of the `scs` binary, kept as a library so tests can drive it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Number, Value};

use scs_core::document::{to_document, InstanceDocument};
use scs_core::generate::{generate, Family};
use scs_core::geometry::Tolerances;
use scs_core::meeting::MeetingGraph;
use scs_core::reduction::{build_caterpillar_scs, circulant_mis, knn_augmentation, verify_reduction, CirculantGraph};
use scs_core::resilience::{
    k_resilience_general, one_resilience_fast, starvation_number, tree_resilience, ResilienceError, TieSummary,
    DEFAULT_BUDGET,
};
use scs_core::simulate::{
    detect_starving, occupancy_invariant_check, simulate, write_events_jsonl, Horizon, Outcome, SimConfig, SimError,
    DEFAULT_EVENT_CAP, DEFAULT_MAX_HORIZON,
};
use scs_core::Analysis;

pub const BUDGET_ENV: &str = "RESILIENCE_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "scs", version, about = "Analyze synchronized robot systems on unit-circle trajectories")]
struct Cli {
    /// Tolerance for integrality of slot lengths.
    #[arg(long, global = true, default_value_t = scs_core::geometry::SLOT_TOLERANCE)]
    slot_tol: f64,
    /// Tolerance for angle comparisons, in radians.
    #[arg(long, global = true, default_value_t = scs_core::geometry::ANGLE_TOLERANCE)]
    angle_tol: f64,
    /// Search expansion budget (default 10^8, or $RESILIENCE_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance and print its communication graph and schedule.
    Validate { instance: PathBuf },
    /// Ring decomposition and crossing points.
    Rings { instance: PathBuf },
    /// Tie lengths per ring.
    Ties { instance: PathBuf },
    /// Meeting graph with certificates.
    MeetingGraph { instance: PathBuf },
    /// k-resilience.
    Resilience {
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
    },
    /// Starvation number (maximum independent set of the meeting graph).
    Starvation { instance: PathBuf },
    /// Run the shifting protocol with some robots removed.
    Simulate {
        instance: PathBuf,
        /// Comma-separated robot ids; may be empty.
        #[arg(long, default_value = "")]
        remove: String,
        /// Horizon in slots (default: lcm of the ring lengths).
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
        event_cap: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
        max_horizon: u64,
        /// Write the event log as JSON lines.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Circulant graph to caterpillar system, with verification.
    Reduce {
        #[arg(long)]
        circulant: String,
    },
    /// Augmented circulant of a circulant graph.
    Augment {
        #[arg(long)]
        circulant: String,
    },
    /// Maximum independent set of a circulant graph.
    Mis {
        #[arg(long)]
        circulant: String,
    },
    /// Print a generated instance document (path N, cycle N, grid-tree A, caterpillar "n;S").
    Gen { kind: String, param: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    General,
    Tree,
    Fast1,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::General => "general",
            Method::Tree => "tree",
            Method::Fast1 => "fast1",
        }
    }
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command. Exit codes: 0 success, 1 input or validation error,
/// 2 search budget or horizon exceeded.
pub fn run_command<I, T>(argv: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Invocation { code, stdout: text, stderr: String::new() }
            } else {
                Invocation { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, echo) {
        Ok(doc) => Invocation {
            code: 0,
            stdout: format!("{}\n", serde_json::to_string_pretty(&round_floats(doc)).expect("JSON values serialize")),
            stderr: String::new(),
        },
        Err(e) => Invocation {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e:#}\n"),
        },
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(r) = cause.downcast_ref::<ResilienceError>() {
            if matches!(r, ResilienceError::BudgetExceeded { .. }) {
                return 2;
            }
        }
        if let Some(s) = cause.downcast_ref::<SimError>() {
            if matches!(
                s,
                SimError::HorizonOverflow { .. } | SimError::EventCapExceeded { .. } | SimError::InsufficientHorizon { .. }
            ) {
                return 2;
            }
        }
        if let Some(scs_core::reduction::ReductionError::Resilience(ResilienceError::BudgetExceeded { .. })) =
            cause.downcast_ref::<scs_core::reduction::ReductionError>()
        {
            return 2;
        }
    }
    1
}

fn budget(cli: &Cli) -> Result<u64> {
    if let Some(b) = cli.budget {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{BUDGET_ENV}={v:?} is not a non-negative integer")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Analysis> {
    let text = read_text(path)?;
    let doc: InstanceDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let tolerances = Tolerances {
        angle: cli.angle_tol,
        slot: cli.slot_tol,
    };
    let instance = doc
        .to_instance_with(tolerances)
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(Analysis::new(instance)?)
}

fn circulant(text: &str) -> Result<CirculantGraph> {
    Ok(text.parse::<CirculantGraph>()?)
}

fn execute(cli: &Cli, echo: Vec<String>) -> Result<Value> {
    let budget = budget(cli)?;
    let result = match &cli.command {
        Command::Gen { kind, param } => {
            // bare document so the output can be fed back in
            return Ok(serde_json::to_value(generate(&Family::parse(kind, param)?)?)?);
        }
        Command::Validate { instance } => {
            let a = load(cli, instance)?;
            json!({
                "valid": true,
                "circles": a.len(),
                "edges": a.instance.graph().edges(),
                "is_tree": a.instance.graph().is_tree(),
                "instance": to_document(&a.instance),
            })
        }
        Command::Rings { instance } => rings(&load(cli, instance)?),
        Command::Ties { instance } => {
            let a = load(cli, instance)?;
            json!({
                "rings": (0..a.decomposition.rings.len()).map(|r| json!({
                    "ring": r,
                    "length_slots": a.decomposition.ring_length(r),
                    "distinct": a.ties.distinct_for(r),
                })).collect::<Vec<_>>(),
                "ties": a.ties.ties,
            })
        }
        Command::MeetingGraph { instance } => meeting_graph(&load(cli, instance)?.meeting),
        Command::Resilience { instance, k, method } => {
            let a = load(cli, instance)?;
            let result = match method {
                Method::General => k_resilience_general(&a.meeting, *k, budget)?,
                Method::Tree => tree_resilience(&TieSummary::from_analysis(&a)?, *k, budget)?,
                Method::Fast1 => {
                    if *k != 1 {
                        bail!("--method fast1 computes 1-resilience only (got --k {k})");
                    }
                    one_resilience_fast(&a)
                }
            };
            let mut v = serde_json::to_value(&result)?;
            v["method"] = json!(method.name());
            v
        }
        Command::Starvation { instance } => {
            let a = load(cli, instance)?;
            let s = starvation_number(&a.meeting, budget)?;
            json!({ "starvation_number": s.size, "witness": s.witness })
        }
        Command::Simulate {
            instance,
            remove,
            horizon,
            event_cap,
            max_horizon,
            events,
        } => {
            let a = load(cli, instance)?;
            let removed = parse_ids(remove)?;
            let config = SimConfig {
                removed,
                horizon: horizon.map_or(Horizon::Auto, Horizon::Slots),
                event_cap: *event_cap,
                max_horizon: *max_horizon,
                tolerance: cli.slot_tol,
            };
            let report = simulate(&a, &config)?;
            let starving = detect_starving(&report)?;
            if let Some(path) = events {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_events_jsonl(&report, std::io::BufWriter::new(file))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let count = |o: Outcome| report.events.iter().filter(|e| e.outcome == o).count();
            json!({
                "horizon": report.horizon,
                "period": report.period,
                "removed": report.removed,
                "starving": starving,
                "meetings_per_robot": report.meetings_per_robot,
                "events": report.events.len(),
                "met": count(Outcome::Met),
                "shifted": count(Outcome::Shifted),
                "occupancy": report.occupancy[0].counts,
                "occupancy_constant": occupancy_invariant_check(&report),
                "diagnostics": report.diagnostics,
            })
        }
        Command::Reduce { circulant: text } => {
            let g = circulant(text)?;
            let augmented = knn_augmentation(&g);
            let scs = build_caterpillar_scs(&augmented)?;
            let report = verify_reduction(&g, &scs, budget)?;
            json!({
                "circulant": g.to_string(),
                "augmented": augmented.to_string(),
                "instance": to_document(&scs),
                "verification": report,
            })
        }
        Command::Augment { circulant: text } => {
            let g = circulant(text)?;
            let augmented = knn_augmentation(&g);
            json!({ "circulant": g.to_string(), "augmented": augmented.to_string(), "jumps": augmented.jumps })
        }
        Command::Mis { circulant: text } => {
            let g = circulant(text)?;
            let mis = circulant_mis(&g, budget)?;
            json!({ "circulant": g.to_string(), "mis": mis.size, "witness": mis.witness })
        }
    };
    Ok(json!({
        "command": echo,
        "result": result,
        "provenance": {
            "tolerances": { "slot": cli.slot_tol, "angle": cli.angle_tol },
            "budget": budget,
        },
    }))
}

fn parse_ids(text: &str) -> Result<BTreeSet<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad robot id {t:?}")))
        .collect()
}

fn rings(a: &Analysis) -> Value {
    let d = &a.decomposition;
    json!({
        "rings": d.rings.iter().map(|r| json!({
            "id": r.id,
            "length_slots": r.length_slots,
            "robots": a.placements.ring_members[r.id],
            "arcs": r.arcs.iter().zip(&r.arc_offsets).map(|(&arc, &offset)| {
                let x = &d.arcs[arc];
                json!({
                    "circle": x.circle,
                    "from_angle": x.from_angle,
                    "to_angle": x.to_angle,
                    "direction": x.direction.as_i8(),
                    "length_slots": x.length_slots(),
                    "offset_slots": offset,
                })
            }).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "crossings": d.crossings,
        "robots": a.placements.robots,
    })
}

fn meeting_graph(g: &MeetingGraph) -> Value {
    let adjacency: BTreeMap<String, Vec<usize>> =
        (0..g.node_count()).map(|u| (u.to_string(), g.neighbors(u).collect())).collect();
    json!({
        "nodes": g.node_count(),
        "adjacency": adjacency,
        "edges": g.edges().into_iter().map(|(u, v)| json!({
            "u": u,
            "v": v,
            "certificates": g.certificates(u, v),
        })).collect::<Vec<_>>(),
    })
}

/// Rounds non-integral numbers to 12 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            // avoid printing -0
            let r = if r == 0.0 { 0.0 } else { r };
            Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}
