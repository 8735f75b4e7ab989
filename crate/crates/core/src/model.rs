//! Core data model: places, resources, transitions, goals, and the net itself.
//!
//! A [`Net`] is immutable after construction and safe to share across threads.
//! All identifiers are case-sensitive strings drawn from a single namespace
//! (places, resources, and transitions must not collide).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A place holding a non-negative number of tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Place {
    pub id: String,
    /// Display name; defaults to the id when omitted in documents.
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub initial_tokens: u64,
}

impl Place {
    pub fn new(id: impl Into<String>, initial_tokens: u64) -> Self {
        let id = id.into();
        Place { name: id.clone(), id, initial_tokens }
    }

    pub fn display_name(&self) -> &str {
        if self.name.is_empty() { &self.id } else { &self.name }
    }
}

/// A continuous quantity (e.g. energy) bounded to `[min_level, max_level]`.
///
/// `max_level: None` means unbounded above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resource {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub initial_level: f64,
    #[serde(default)]
    pub min_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<f64>,
}

impl Resource {
    pub fn new(id: impl Into<String>, initial: f64, min: f64, max: Option<f64>) -> Self {
        let id = id.into();
        Resource {
            name: id.clone(),
            id,
            initial_level: initial,
            min_level: min,
            max_level: max,
        }
    }

    pub fn max_or_inf(&self) -> f64 {
        self.max_level.unwrap_or(f64::INFINITY)
    }

    pub fn display_name(&self) -> &str {
        if self.name.is_empty() { &self.id } else { &self.name }
    }
}

/// Duration distribution for a transition, in simulation time units.
///
/// Samples are clamped at zero; negative draws (possible for `Normal`)
/// become zero-duration executions rather than being redrawn, so one
/// firing always consumes exactly one draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DurationDistribution {
    Constant { value: f64 },
    Normal { mean: f64, std_dev: f64 },
    Uniform { low: f64, high: f64 },
}

impl DurationDistribution {
    pub fn constant(value: f64) -> Self {
        DurationDistribution::Constant { value }
    }

    /// Expected value of the (unclamped) distribution, floored at zero.
    /// Used for the admission projection before an actual draw exists.
    pub fn expected(&self) -> f64 {
        let mean = match *self {
            DurationDistribution::Constant { value } => value,
            DurationDistribution::Normal { mean, .. } => mean,
            DurationDistribution::Uniform { low, high } => 0.5 * (low + high),
        };
        mean.max(0.0)
    }
}

/// Constant production (positive) or consumption (negative) rate applied
/// to a resource while an instance of the owning transition is running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceRate {
    pub resource: String,
    pub rate: f64,
}

/// Weighted arc between a place and a transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub place: String,
    pub weight: u64,
}

impl Arc {
    pub fn new(place: impl Into<String>, weight: u64) -> Self {
        Arc { place: place.into(), weight }
    }
}

/// A timed action. Firing consumes input tokens immediately, runs for a
/// sampled duration while applying resource rates, and deposits output
/// tokens only on completion. A token in any inhibitor place blocks new
/// firings and suspends running instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub duration: DurationDistribution,
    #[serde(default)]
    pub inputs: Vec<Arc>,
    #[serde(default)]
    pub outputs: Vec<Arc>,
    #[serde(default)]
    pub inhibitors: Vec<String>,
    #[serde(default)]
    pub rates: Vec<ResourceRate>,
    #[serde(default)]
    pub priority: u32,
    /// Maximum concurrently running instances; `None` = unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_instances: Option<u64>,
}

impl Transition {
    pub fn new(id: impl Into<String>, duration: DurationDistribution) -> Self {
        let id = id.into();
        Transition {
            name: id.clone(),
            id,
            duration,
            inputs: Vec::new(),
            outputs: Vec::new(),
            inhibitors: Vec::new(),
            rates: Vec::new(),
            priority: 0,
            max_instances: None,
        }
    }

    pub fn with_input(mut self, place: impl Into<String>, weight: u64) -> Self {
        self.inputs.push(Arc::new(place, weight));
        self
    }

    pub fn with_output(mut self, place: impl Into<String>, weight: u64) -> Self {
        self.outputs.push(Arc::new(place, weight));
        self
    }

    pub fn with_inhibitor(mut self, place: impl Into<String>) -> Self {
        self.inhibitors.push(place.into());
        self
    }

    pub fn with_rate(mut self, resource: impl Into<String>, rate: f64) -> Self {
        self.rates.push(ResourceRate { resource: resource.into(), rate });
        self
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.priority = priority;
        self
    }

    pub fn with_max_instances(mut self, max: u64) -> Self {
        self.max_instances = Some(max);
        self
    }

    pub fn display_name(&self) -> &str {
        if self.name.is_empty() { &self.id } else { &self.name }
    }
}

/// Comparator used in goal conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

impl Cmp {
    pub fn eval_u64(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Le => lhs <= rhs,
        }
    }

    pub fn eval_f64(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Le => lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenCondition {
    pub place: String,
    pub cmp: Cmp,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceCondition {
    pub resource: String,
    pub cmp: Cmp,
    pub level: f64,
}

/// Conjunction of token and resource conditions, optionally bounded by a
/// deadline: the run succeeds only if all conditions hold at or before it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalPredicate {
    #[serde(default)]
    pub tokens: Vec<TokenCondition>,
    #[serde(default)]
    pub resources: Vec<ResourceCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<f64>,
}

impl GoalPredicate {
    pub fn tokens_at_least(place: impl Into<String>, count: u64) -> Self {
        GoalPredicate {
            tokens: vec![TokenCondition { place: place.into(), cmp: Cmp::Ge, count }],
            resources: Vec::new(),
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: f64) -> Self {
        self.deadline = Some(deadline);
        self
    }
}

/// Rule for choosing among simultaneously enabled transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictPolicy {
    #[default]
    FixedPriority,
    UniformRandom,
    PriorityProportional,
}

/// Immutable structural definition of an extended Petri net.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Net {
    #[serde(default)]
    pub places: Vec<Place>,
    #[serde(default)]
    pub resources: Vec<Resource>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalPredicate>,
    #[serde(default)]
    pub policy: ConflictPolicy,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl Net {
    pub fn place(&self, id: &str) -> Option<&Place> {
        self.places.iter().find(|p| p.id == id)
    }

    pub fn resource(&self, id: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    /// Initial token counts keyed by place id.
    pub fn initial_tokens(&self) -> BTreeMap<String, u64> {
        self.places.iter().map(|p| (p.id.clone(), p.initial_tokens)).collect()
    }

    /// Initial resource levels keyed by resource id.
    pub fn initial_levels(&self) -> BTreeMap<String, f64> {
        self.resources.iter().map(|r| (r.id.clone(), r.initial_level)).collect()
    }

    /// Effective per-element level tag for hierarchy reports.
    ///
    /// `metadata["level.<id>"]` wins over the net-wide `metadata["level"]`.
    pub fn level_tag(&self, element_id: &str) -> Option<&str> {
        self.metadata
            .get(&format!("level.{element_id}"))
            .or_else(|| self.metadata.get("level"))
            .map(String::as_str)
    }
}
