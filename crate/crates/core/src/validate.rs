//! Structural validation of nets.
//!
//! Validation never fails: every problem is returned as data in a
//! [`ValidationReport`]. Errors make a net unusable; warnings (duplicate
//! display names) do not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{DurationDistribution, Net};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// One rule violation, tied to the element that triggered it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    /// Stable machine-readable code, e.g. `unresolved-place`.
    pub code: String,
    /// Id of the offending element.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}[{}] {}: {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no error-severity violations are present.
    pub fn is_valid(&self) -> bool {
        self.violations.iter().all(|v| v.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    fn error(&mut self, code: &str, subject: &str, message: String) {
        self.violations.push(Violation {
            severity: Severity::Error,
            code: code.to_string(),
            subject: subject.to_string(),
            message,
        });
    }

    fn warning(&mut self, code: &str, subject: &str, message: String) {
        self.violations.push(Violation {
            severity: Severity::Warning,
            code: code.to_string(),
            subject: subject.to_string(),
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_finite(report: &mut ValidationReport, subject: &str, what: &str, value: f64) {
    if !value.is_finite() {
        report.error("non-finite", subject, format!("{what} must be finite, got {value}"));
    }
}

/// Checks every structural invariant and returns the full list of
/// violations. Pure and idempotent; an empty report means the net is valid.
pub fn validate_net(net: &Net) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Single id namespace across places, resources, and transitions.
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    let all_ids = net
        .places
        .iter()
        .map(|p| (p.id.as_str(), p.display_name()))
        .chain(net.resources.iter().map(|r| (r.id.as_str(), r.display_name())))
        .chain(net.transitions.iter().map(|t| (t.id.as_str(), t.display_name())));
    for (id, name) in all_ids {
        if id.is_empty() {
            report.error("empty-id", id, "element id must not be empty".to_string());
        }
        if !seen.insert(id) {
            report.error("duplicate-id", id, format!("id `{id}` is declared more than once"));
        }
        *names.entry(name).or_insert(0) += 1;
    }
    for (name, count) in names {
        if count > 1 {
            report.warning(
                "duplicate-name",
                name,
                format!("display name `{name}` is shared by {count} elements"),
            );
        }
    }

    let place_ids: BTreeSet<&str> = net.places.iter().map(|p| p.id.as_str()).collect();
    let resource_ids: BTreeSet<&str> = net.resources.iter().map(|r| r.id.as_str()).collect();

    for r in &net.resources {
        check_finite(&mut report, &r.id, "initial_level", r.initial_level);
        check_finite(&mut report, &r.id, "min_level", r.min_level);
        if let Some(max) = r.max_level {
            check_finite(&mut report, &r.id, "max_level", max);
        }
        if r.min_level < 0.0 {
            report.error(
                "negative-min",
                &r.id,
                format!("min_level must be non-negative, got {}", r.min_level),
            );
        }
        if r.initial_level < r.min_level {
            report.error(
                "initial-below-minimum",
                &r.id,
                format!("initial_level {} is below min_level {}", r.initial_level, r.min_level),
            );
        }
        if r.initial_level > r.max_or_inf() {
            report.error(
                "initial-above-maximum",
                &r.id,
                format!("initial_level {} exceeds max_level {}", r.initial_level, r.max_or_inf()),
            );
        }
        if r.max_or_inf() < r.min_level {
            report.error(
                "inverted-bounds",
                &r.id,
                format!("max_level {} is below min_level {}", r.max_or_inf(), r.min_level),
            );
        }
    }

    for t in &net.transitions {
        match &t.duration {
            DurationDistribution::Constant { value } => {
                check_finite(&mut report, &t.id, "duration value", *value);
            }
            DurationDistribution::Normal { mean, std_dev } => {
                check_finite(&mut report, &t.id, "duration mean", *mean);
                check_finite(&mut report, &t.id, "duration std_dev", *std_dev);
                if *std_dev < 0.0 {
                    report.error(
                        "negative-std-dev",
                        &t.id,
                        format!("normal duration requires std_dev >= 0, got {std_dev}"),
                    );
                }
            }
            DurationDistribution::Uniform { low, high } => {
                check_finite(&mut report, &t.id, "duration low", *low);
                check_finite(&mut report, &t.id, "duration high", *high);
                if low > high {
                    report.error(
                        "inverted-range",
                        &t.id,
                        format!("uniform duration requires low <= high, got [{low}, {high}]"),
                    );
                }
            }
        }

        if t.max_instances == Some(0) {
            report.error("zero-instances", &t.id, "max_instances must be >= 1".to_string());
        }

        let mut arc_places = BTreeSet::new();
        for arc in &t.inputs {
            if !place_ids.contains(arc.place.as_str()) {
                report.error(
                    "unresolved-place",
                    &t.id,
                    format!("input arc references unknown place `{}`", arc.place),
                );
            }
            if arc.weight == 0 {
                report.error(
                    "zero-weight",
                    &t.id,
                    format!("input arc to `{}` must have weight >= 1", arc.place),
                );
            }
            if !arc_places.insert(("in", arc.place.as_str())) {
                report.error(
                    "duplicate-arc",
                    &t.id,
                    format!("multiple input arcs to place `{}`", arc.place),
                );
            }
        }
        for arc in &t.outputs {
            if !place_ids.contains(arc.place.as_str()) {
                report.error(
                    "unresolved-place",
                    &t.id,
                    format!("output arc references unknown place `{}`", arc.place),
                );
            }
            if arc.weight == 0 {
                report.error(
                    "zero-weight",
                    &t.id,
                    format!("output arc to `{}` must have weight >= 1", arc.place),
                );
            }
            if !arc_places.insert(("out", arc.place.as_str())) {
                report.error(
                    "duplicate-arc",
                    &t.id,
                    format!("multiple output arcs to place `{}`", arc.place),
                );
            }
        }
        for place in &t.inhibitors {
            if !place_ids.contains(place.as_str()) {
                report.error(
                    "unresolved-place",
                    &t.id,
                    format!("inhibitor arc references unknown place `{}`", place),
                );
            }
            if !arc_places.insert(("inh", place.as_str())) {
                report.error(
                    "duplicate-arc",
                    &t.id,
                    format!("multiple inhibitor arcs to place `{place}`"),
                );
            }
        }

        let mut rate_resources = BTreeSet::new();
        for rate in &t.rates {
            check_finite(&mut report, &t.id, "resource rate", rate.rate);
            if !resource_ids.contains(rate.resource.as_str()) {
                report.error(
                    "unresolved-resource",
                    &t.id,
                    format!("rate references unknown resource `{}`", rate.resource),
                );
            }
            if !rate_resources.insert(rate.resource.as_str()) {
                report.error(
                    "duplicate-rate",
                    &t.id,
                    format!("resource `{}` is listed more than once", rate.resource),
                );
            }
        }
    }

    if let Some(goal) = &net.goal {
        for cond in &goal.tokens {
            if !place_ids.contains(cond.place.as_str()) {
                report.error(
                    "unresolved-place",
                    "goal",
                    format!("goal references unknown place `{}`", cond.place),
                );
            }
        }
        for cond in &goal.resources {
            check_finite(&mut report, "goal", "goal level", cond.level);
            if !resource_ids.contains(cond.resource.as_str()) {
                report.error(
                    "unresolved-resource",
                    "goal",
                    format!("goal references unknown resource `{}`", cond.resource),
                );
            }
        }
        if let Some(deadline) = goal.deadline {
            check_finite(&mut report, "goal", "deadline", deadline);
            if deadline < 0.0 {
                report.error(
                    "negative-deadline",
                    "goal",
                    format!("deadline must be >= 0, got {deadline}"),
                );
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GoalPredicate, Place, Resource, Transition};

    fn minimal_net() -> Net {
        Net {
            places: vec![Place::new("p1", 1), Place::new("p2", 0)],
            resources: vec![],
            transitions: vec![Transition::new("t", DurationDistribution::constant(1.0))
                .with_input("p1", 1)
                .with_output("p2", 1)],
            goal: None,
            policy: Default::default(),
            metadata: Default::default(),
        }
    }

    #[test]
    fn minimal_well_formed_net_has_empty_report() {
        let report = validate_net(&minimal_net());
        assert!(report.violations.is_empty(), "{report}");
    }

    #[test]
    fn unknown_place_reference_is_reported() {
        let mut net = minimal_net();
        net.transitions[0].inputs[0].place = "pX".into();
        let report = validate_net(&net);
        assert!(!report.is_valid());
        assert!(report.errors().any(|v| v.code == "unresolved-place" && v.message.contains("pX")));
    }

    #[test]
    fn initial_level_below_minimum_is_reported() {
        let mut net = minimal_net();
        net.resources.push(Resource::new("e", 5.0, 10.0, None));
        let report = validate_net(&net);
        assert!(report.errors().any(|v| v.code == "initial-below-minimum"));
    }

    #[test]
    fn duplicate_ids_across_kinds_are_reported() {
        let mut net = minimal_net();
        net.resources.push(Resource::new("p1", 0.0, 0.0, None));
        let report = validate_net(&net);
        assert!(report.errors().any(|v| v.code == "duplicate-id"));
    }

    #[test]
    fn duplicate_names_are_warnings_only() {
        let mut net = minimal_net();
        net.places[0].name = "shared".into();
        net.places[1].name = "shared".into();
        let report = validate_net(&net);
        assert!(report.is_valid());
        assert!(report.violations.iter().any(|v| v.code == "duplicate-name"));
    }

    #[test]
    fn validate_is_idempotent() {
        let mut net = minimal_net();
        net.transitions[0].inputs[0].weight = 0;
        let first = validate_net(&net);
        let second = validate_net(&net);
        assert_eq!(first, second);
        assert!(!first.is_valid());
    }

    #[test]
    fn goal_reference_and_deadline_checks() {
        let mut net = minimal_net();
        net.goal = Some(GoalPredicate::tokens_at_least("nope", 1).with_deadline(-1.0));
        let report = validate_net(&net);
        assert!(report.errors().any(|v| v.code == "unresolved-place"));
        assert!(report.errors().any(|v| v.code == "negative-deadline"));
    }
}
