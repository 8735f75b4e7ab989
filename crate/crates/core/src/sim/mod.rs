//! Event-driven execution of a single net run.
//!
//! One run is strictly sequential and deterministic: identical
//! `(net, seed)` pairs produce bit-identical traces. Many runs may execute
//! concurrently because each owns its state, rng, and trace exclusively.

mod engine;

pub use engine::{
    detect_termination, enabled_instances, resource_feasible, select_firing, simulate,
};


use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::Net;
use crate::validate::ValidationReport;

/// Tolerance for resource-bound and completion-time comparisons; absorbs
/// floating-point dust without affecting modelled quantities.
pub const LEVEL_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("net failed validation:\n{0}")]
    InvalidNet(ValidationReport),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Run configuration. Seeds are explicit; nothing is derived from wall
/// clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Hard horizon; the run times out when it is reached with the goal unmet.
    pub max_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_override: Option<crate::model::ConflictPolicy>,
    /// Spacing of trajectory samples.
    pub trajectory_sample_interval: f64,
    /// Safety bound on emitted events; exceeding it truncates the trace.
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            max_time: 1e6,
            policy_override: None,
            trajectory_sample_interval: 1.0,
            max_events: 100_000,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        SimConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.max_time > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "max_time must be > 0, got {}",
                self.max_time
            )));
        }
        if !(self.trajectory_sample_interval > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "trajectory_sample_interval must be > 0, got {}",
                self.trajectory_sample_interval
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceStatus {
    Running,
    /// Frozen by a token in an inhibitor place: elapsed time stops and
    /// resource rates no longer apply until the place empties.
    Suspended,
}

/// One running (or suspended) execution of a transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveInstance {
    pub transition: String,
    pub instance: u64,
    pub start_time: f64,
    pub sampled_duration: f64,
    pub elapsed: f64,
    pub status: InstanceStatus,
    /// Remaining planned resource change, `rate * (duration - elapsed)`,
    /// per resource touched by the transition.
    pub reserved: Vec<(String, f64)>,
}

impl ActiveInstance {
    pub fn remaining(&self) -> f64 {
        (self.sampled_duration - self.elapsed).max(0.0)
    }
}

/// Mutable marking of a run: token counts, resource levels, active
/// instances, and the clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub clock: f64,
    pub tokens: BTreeMap<String, u64>,
    pub resources: BTreeMap<String, f64>,
    pub active: Vec<ActiveInstance>,
}

impl SimState {
    /// Initial marking of a net at clock zero.
    pub fn initial(net: &Net) -> Self {
        SimState {
            clock: 0.0,
            tokens: net.initial_tokens(),
            resources: net.initial_levels(),
            active: Vec::new(),
        }
    }

    pub fn running(&self) -> impl Iterator<Item = &ActiveInstance> {
        self.active.iter().filter(|i| i.status == InstanceStatus::Running)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Fire,
    Complete,
    Suspend,
    Resume,
    /// A token-enabled transition became blocked by an inhibitor place.
    Inhibited,
    Deadlock,
    GoalReached,
    DeadlineExceeded,
    ResourceExhausted,
}

/// State change carried by an event. `after` is authoritative: replaying
/// assignments reproduces the final state exactly even where floating-point
/// addition of `change` would not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Delta {
    Tokens { place: String, change: i64, after: u64 },
    Resource { resource: String, change: f64, after: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    /// Tie-breaker for events at the same time; strictly increasing.
    pub seq: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<Delta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Timeout,
    Deadlock,
    ResourceFailure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Timeout => "timeout",
            Outcome::Deadlock => "deadlock",
            Outcome::ResourceFailure => "resource_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    /// Token counts in `place_ids` order.
    pub tokens: Vec<u64>,
    /// Resource levels in `resource_ids` order.
    pub levels: Vec<f64>,
}

/// Sampled time series of the discrete and continuous state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub place_ids: Vec<String>,
    pub resource_ids: Vec<String>,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub tokens: BTreeMap<String, u64>,
    pub resources: BTreeMap<String, f64>,
    pub active_instances: usize,
}

/// Complete record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    pub events: Vec<TraceEvent>,
    pub trajectory: Trajectory,
    pub outcome: Outcome,
    pub final_time: f64,
    pub final_state: FinalState,
    /// True when the run stopped because `max_events` was exhausted.
    pub truncated: bool,
}

impl Trace {
    /// Events of the given kind, in order.
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Replays all deltas from the net's initial marking and returns the
    /// reconstructed (tokens, resources) maps.
    pub fn replay(&self, net: &Net) -> (BTreeMap<String, u64>, BTreeMap<String, f64>) {
        let mut tokens = net.initial_tokens();
        let mut resources = net.initial_levels();
        for event in &self.events {
            for delta in &event.deltas {
                match delta {
                    Delta::Tokens { place, after, .. } => {
                        tokens.insert(place.clone(), *after);
                    }
                    Delta::Resource { resource, after, .. } => {
                        resources.insert(resource.clone(), *after);
                    }
                }
            }
        }
        (tokens, resources)
    }
}
