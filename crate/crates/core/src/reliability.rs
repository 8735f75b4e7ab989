//! Capability availability analysis: closed-form redundancy formulas,
//! DAG rollup, Monte Carlo estimation, and redundancy sweeps.
//!
//! Devices are leaves with an individual reliability `p` and a redundancy
//! count `k` (one working copy suffices). Capabilities combine devices and
//! child capabilities with all-of or any-of semantics up to a single
//! mission root, replicated across `n_systems` identical robots.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::mc::{correlation_from_columns, CorrelationMatrix, CorrelationMethod};
use crate::model::{DurationDistribution, GoalPredicate, Net, Place, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    pub id: String,
    /// Probability an individual copy works, in [0, 1].
    pub reliability: f64,
    /// Number of redundant copies, >= 1.
    #[serde(default = "default_redundancy")]
    pub redundancy: u32,
}

fn default_redundancy() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combinator {
    AllOf,
    AnyOf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capability {
    pub id: String,
    pub combinator: Combinator,
    /// Device ids and/or child capability ids.
    pub requires: Vec<String>,
}

/// Per-device reliability distribution used by [`reliability_mc`];
/// draws are clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReliabilityDistribution {
    Constant { value: f64 },
    Normal { mean: f64, std_dev: f64 },
    Uniform { low: f64, high: f64 },
}

impl ReliabilityDistribution {
    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        let raw = match *self {
            ReliabilityDistribution::Constant { value } => value,
            ReliabilityDistribution::Normal { mean, std_dev } => {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                mean + std_dev * z
            }
            ReliabilityDistribution::Uniform { low, high } => {
                low + (high - low) * rng.random::<f64>()
            }
        };
        raw.clamp(0.0, 1.0)
    }

    /// Mean of the clamped distribution, estimated where no closed form is
    /// worth carrying (normal tails are integrated numerically).
    pub fn clamped_mean(&self) -> f64 {
        match *self {
            ReliabilityDistribution::Constant { value } => value.clamp(0.0, 1.0),
            ReliabilityDistribution::Uniform { low, high } => {
                if low == high {
                    return low.clamp(0.0, 1.0);
                }
                // Clamp maps mass below 0 to 0 and above 1 to 1.
                let width = high - low;
                let a = low.max(0.0).min(1.0);
                let b = high.max(0.0).min(1.0);
                let below = ((0.0 - low).max(0.0).min(width)) / width;
                let above = ((high - 1.0).max(0.0).min(width)) / width;
                let inside = 1.0 - below - above;
                let inside_mean = if b > a { (a + b) / 2.0 } else { 0.0 };
                below * 0.0 + inside * inside_mean + above * 1.0
            }
            ReliabilityDistribution::Normal { mean, std_dev } => {
                if std_dev == 0.0 {
                    return mean.clamp(0.0, 1.0);
                }
                // Midpoint quadrature over the clamped density.
                let steps = 20_000;
                let dx = 1.0 / steps as f64;
                let phi = |x: f64| {
                    let z = (x - mean) / std_dev;
                    (-0.5 * z * z).exp() / (std_dev * (2.0 * std::f64::consts::PI).sqrt())
                };
                let cdf = |x: f64| 0.5 * (1.0 + erf((x - mean) / (std_dev * 2f64.sqrt())));
                let mut inside = 0.0;
                for i in 0..steps {
                    let x = (i as f64 + 0.5) * dx;
                    inside += x * phi(x) * dx;
                }
                inside + (1.0 - cdf(1.0))
            }
        }
    }
}

/// Abramowitz & Stegun 7.1.26; max absolute error ~1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Device-to-capability dependency structure for one robot design,
/// replicated over `n_systems` identical robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvailabilityModel {
    #[serde(default = "default_format_version")]
    pub format_version: u32,
    pub devices: Vec<Device>,
    pub capabilities: Vec<Capability>,
    pub mission_capability: String,
    #[serde(default = "default_n_systems")]
    pub n_systems: u32,
    /// Default distribution for Monte Carlo reliability draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_distribution: Option<ReliabilityDistribution>,
}

fn default_format_version() -> u32 {
    1
}

fn default_n_systems() -> u32 {
    1
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("capability dependencies contain a cycle through `{0}`")]
    Cycle(String),
    #[error("reliability {1} of device `{0}` is outside [0, 1]")]
    BadReliability(String, f64),
    #[error("device `{0}` has redundancy 0")]
    ZeroRedundancy(String),
    #[error("n_systems must be >= 1")]
    ZeroSystems,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("capability `{0}` is not reachable from the mission root")]
    Orphan(String),
}

impl AvailabilityModel {
    pub fn capability(&self, id: &str) -> Option<&Capability> {
        self.capabilities.iter().find(|c| c.id == id)
    }

    pub fn device(&self, id: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.id == id)
    }

    /// Capabilities in dependency order (children before parents).
    pub fn topological_order(&self) -> Result<Vec<&Capability>, ModelError> {
        let mut order = Vec::new();
        let mut state: BTreeMap<&str, u8> = BTreeMap::new(); // 1 = visiting, 2 = done
        fn visit<'m>(
            model: &'m AvailabilityModel,
            id: &'m str,
            state: &mut BTreeMap<&'m str, u8>,
            order: &mut Vec<&'m Capability>,
        ) -> Result<(), ModelError> {
            match state.get(id) {
                Some(2) => return Ok(()),
                Some(1) => return Err(ModelError::Cycle(id.to_string())),
                _ => {}
            }
            if model.device(id).is_some() {
                state.insert(id, 2);
                return Ok(());
            }
            let cap = model
                .capability(id)
                .ok_or_else(|| ModelError::UnknownReference(id.to_string()))?;
            state.insert(id, 1);
            for child in &cap.requires {
                visit(model, child, state, order)?;
            }
            state.insert(id, 2);
            order.push(cap);
            Ok(())
        }
        for cap in &self.capabilities {
            visit(self, &cap.id, &mut state, &mut order)?;
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for id in self.devices.iter().map(|d| &d.id).chain(self.capabilities.iter().map(|c| &c.id))
        {
            if !ids.insert(id.as_str()) {
                return Err(ModelError::DuplicateId(id.clone()));
            }
        }
        for d in &self.devices {
            if !(0.0..=1.0).contains(&d.reliability) {
                return Err(ModelError::BadReliability(d.id.clone(), d.reliability));
            }
            if d.redundancy == 0 {
                return Err(ModelError::ZeroRedundancy(d.id.clone()));
            }
        }
        if self.n_systems == 0 {
            return Err(ModelError::ZeroSystems);
        }
        if self.capability(&self.mission_capability).is_none() {
            return Err(ModelError::UnknownReference(self.mission_capability.clone()));
        }
        self.topological_order()?;
        // Everything should feed the mission root.
        let mut reachable = BTreeSet::new();
        let mut stack = vec![self.mission_capability.as_str()];
        while let Some(id) = stack.pop() {
            if !reachable.insert(id) {
                continue;
            }
            if let Some(cap) = self.capability(id) {
                stack.extend(cap.requires.iter().map(String::as_str));
            }
        }
        for cap in &self.capabilities {
            if !reachable.contains(cap.id.as_str()) {
                return Err(ModelError::Orphan(cap.id.clone()));
            }
        }
        Ok(())
    }
}

/// Availability of a device with `k` redundant copies of reliability `p`,
/// assuming one working copy suffices: `1 - (1 - p)^k`.
pub fn device_availability(p: f64, k: u32) -> f64 {
    assert!((0.0..=1.0).contains(&p), "reliability must be in [0, 1]");
    assert!(k >= 1, "redundancy must be >= 1");
    1.0 - (1.0 - p).powi(k as i32)
}

/// Availability of one robot: the product of its device availabilities
/// (all devices required).
pub fn per_robot_availability(model: &AvailabilityModel) -> f64 {
    model.devices.iter().map(|d| device_availability(d.reliability, d.redundancy)).product()
}

/// Mission availability over `N` identical robots, one functioning robot
/// sufficing: `1 - (1 - per_robot)^N`.
pub fn mission_availability(model: &AvailabilityModel) -> f64 {
    let per_robot = per_robot_availability(model);
    1.0 - (1.0 - per_robot).powi(model.n_systems as i32)
}

/// Evaluates the capability DAG bottom-up for one concrete device
/// up/down sample: all-of is conjunction, any-of disjunction.
pub fn capability_rollup(
    model: &AvailabilityModel,
    device_state: &BTreeMap<String, bool>,
) -> Result<BTreeMap<String, bool>, ModelError> {
    let order = model.topological_order()?;
    let mut up: BTreeMap<String, bool> = BTreeMap::new();
    for cap in order {
        let mut child_states = cap.requires.iter().map(|child| {
            up.get(child)
                .copied()
                .or_else(|| device_state.get(child).copied())
                .unwrap_or(false)
        });
        let available = match cap.combinator {
            Combinator::AllOf => child_states.all(|s| s),
            Combinator::AnyOf => child_states.any(|s| s),
        };
        up.insert(cap.id.clone(), available);
    }
    Ok(up)
}

/// Result of a Monte Carlo reliability campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityMcResult {
    pub n_trials: usize,
    /// Mean availability per capability id.
    pub capability_availability: BTreeMap<String, f64>,
    /// Mean up-fraction per device id (after redundancy).
    pub device_availability: BTreeMap<String, f64>,
    /// Correlations over the 0/1 indicators, capabilities first then
    /// devices; zero-variance cells are undefined.
    pub correlations: CorrelationMatrix,
}

/// Per trial: draw each device's reliability from `dist` (clamped to
/// [0, 1]), draw the device up/down through its redundancy, and roll the
/// DAG up. Estimates are trial means.
pub fn reliability_mc(
    model: &AvailabilityModel,
    n_trials: usize,
    seed: u64,
    dist: &ReliabilityDistribution,
) -> Result<ReliabilityMcResult, ModelError> {
    model.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let cap_ids: Vec<String> = model.capabilities.iter().map(|c| c.id.clone()).collect();
    let dev_ids: Vec<String> = model.devices.iter().map(|d| d.id.clone()).collect();
    let mut columns: Vec<Vec<f64>> =
        vec![Vec::with_capacity(n_trials); cap_ids.len() + dev_ids.len()];

    for _ in 0..n_trials {
        let mut device_state = BTreeMap::new();
        for device in &model.devices {
            let p = dist.draw(&mut rng);
            let available = device_availability(p, device.redundancy);
            let up = rng.random::<f64>() < available;
            device_state.insert(device.id.clone(), up);
        }
        let rollup = capability_rollup(model, &device_state)?;
        for (i, cap) in cap_ids.iter().enumerate() {
            columns[i].push(if rollup[cap] { 1.0 } else { 0.0 });
        }
        for (i, dev) in dev_ids.iter().enumerate() {
            columns[cap_ids.len() + i].push(if device_state[dev] { 1.0 } else { 0.0 });
        }
    }

    let mean = |col: &Vec<f64>| col.iter().sum::<f64>() / n_trials.max(1) as f64;
    let capability_availability =
        cap_ids.iter().enumerate().map(|(i, id)| (id.clone(), mean(&columns[i]))).collect();
    let device_availability = dev_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), mean(&columns[cap_ids.len() + i])))
        .collect();
    let labels: Vec<String> = cap_ids.into_iter().chain(dev_ids).collect();
    let correlations = correlation_from_columns(labels, columns, CorrelationMethod::Pearson);
    Ok(ReliabilityMcResult {
        n_trials,
        capability_availability,
        device_availability,
        correlations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepAxis {
    /// Vary every device's redundancy together at a fixed reliability.
    Subsystem { reliability: f64 },
    /// Vary the robot count.
    System,
}

/// Mission availability as a function of a redundancy count.
pub fn redundancy_sweep(
    model: &AvailabilityModel,
    axis: SweepAxis,
    range: impl IntoIterator<Item = u32>,
) -> Vec<(u32, f64)> {
    range
        .into_iter()
        .map(|count| {
            let mut m = model.clone();
            match axis {
                SweepAxis::Subsystem { reliability } => {
                    for d in &mut m.devices {
                        d.reliability = reliability;
                        d.redundancy = count.max(1);
                    }
                }
                SweepAxis::System => m.n_systems = count.max(1),
            }
            (count, mission_availability(&m))
        })
        .collect()
}

/// Emits the equivalent capability net so the simulation engine can
/// execute the same rollup: one place per device holding `redundancy`
/// tokens, one place per capability, and one derivation transition per
/// capability (or per alternative, for any-of). A single enabler token in
/// `<cap>_pending` makes each derivation one-shot; child tokens are
/// consumed and restored, emulating test-arc semantics.
pub fn capability_net(model: &AvailabilityModel) -> Result<Net, ModelError> {
    model.validate()?;
    let mut net = Net {
        policy: crate::model::ConflictPolicy::FixedPriority,
        ..Default::default()
    };
    net.metadata.insert("level".into(), "subsystem".into());
    for device in &model.devices {
        let mut place = Place::new(device.id.clone(), u64::from(device.redundancy));
        place.name = format!("{} available", device.id);
        net.places.push(place);
    }
    for cap in &model.capabilities {
        let mut place = Place::new(cap.id.clone(), 0);
        place.name = format!("{} ready", cap.id);
        net.places.push(place);
        net.places.push(Place::new(format!("{}_pending", cap.id), 1));
    }
    for cap in &model.capabilities {
        match cap.combinator {
            Combinator::AllOf => {
                let mut t = Transition::new(
                    format!("derive_{}", cap.id),
                    DurationDistribution::constant(0.5),
                )
                .with_input(format!("{}_pending", cap.id), 1)
                .with_output(cap.id.clone(), 1);
                for child in &cap.requires {
                    t = t.with_input(child.clone(), 1).with_output(child.clone(), 1);
                }
                net.transitions.push(t);
            }
            Combinator::AnyOf => {
                for child in &cap.requires {
                    let t = Transition::new(
                        format!("derive_{}_via_{child}", cap.id),
                        DurationDistribution::constant(0.5),
                    )
                    .with_input(format!("{}_pending", cap.id), 1)
                    .with_input(child.clone(), 1)
                    .with_output(child.clone(), 1)
                    .with_output(cap.id.clone(), 1);
                    net.transitions.push(t);
                }
            }
        }
    }
    net.goal = Some(GoalPredicate::tokens_at_least(model.mission_capability.clone(), 1));
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, Outcome, SimConfig};

    fn two_device_model() -> AvailabilityModel {
        AvailabilityModel {
            format_version: 1,
            devices: vec![
                Device { id: "cam".into(), reliability: 0.9, redundancy: 1 },
                Device { id: "arm".into(), reliability: 0.8, redundancy: 2 },
            ],
            capabilities: vec![
                Capability {
                    id: "sense".into(),
                    combinator: Combinator::AllOf,
                    requires: vec!["cam".into()],
                },
                Capability {
                    id: "act".into(),
                    combinator: Combinator::AllOf,
                    requires: vec!["arm".into()],
                },
                Capability {
                    id: "mission".into(),
                    combinator: Combinator::AllOf,
                    requires: vec!["sense".into(), "act".into()],
                },
            ],
            mission_capability: "mission".into(),
            n_systems: 1,
            trial_distribution: None,
        }
    }

    #[test]
    fn device_availability_formula() {
        assert_eq!(device_availability(1.0, 1), 1.0);
        assert!((device_availability(0.9, 2) - 0.99).abs() < 1e-12);
        assert_eq!(device_availability(0.0, 3), 0.0);
    }

    #[test]
    fn device_availability_matches_bernoulli_mc() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for k in 1..=5u32 {
            let closed = device_availability(0.9, k);
            let trials = 100_000;
            let mut up = 0usize;
            for _ in 0..trials {
                if (0..k).any(|_| rng.random::<f64>() < 0.9) {
                    up += 1;
                }
            }
            let estimate = up as f64 / trials as f64;
            assert!((estimate - closed).abs() <= 0.003, "k={k}: {estimate} vs {closed}");
        }
    }

    #[test]
    fn mission_availability_examples() {
        let single = AvailabilityModel {
            format_version: 1,
            devices: vec![Device { id: "d".into(), reliability: 1.0, redundancy: 1 }],
            capabilities: vec![Capability {
                id: "mission".into(),
                combinator: Combinator::AllOf,
                requires: vec!["d".into()],
            }],
            mission_capability: "mission".into(),
            n_systems: 1,
            trial_distribution: None,
        };
        assert_eq!(mission_availability(&single), 1.0);

        let mut pair = single.clone();
        pair.devices = vec![
            Device { id: "d1".into(), reliability: 0.99, redundancy: 1 },
            Device { id: "d2".into(), reliability: 0.99, redundancy: 1 },
        ];
        pair.capabilities[0].requires = vec!["d1".into(), "d2".into()];
        assert!((mission_availability(&pair) - 0.9801).abs() < 1e-12);
    }

    #[test]
    fn rollup_conjunction_and_disjunction() {
        let model = two_device_model();
        let all_up: BTreeMap<String, bool> =
            [("cam".to_string(), true), ("arm".to_string(), true)].into();
        let up = capability_rollup(&model, &all_up).unwrap();
        assert!(up.values().all(|&v| v));

        let arm_down: BTreeMap<String, bool> =
            [("cam".to_string(), true), ("arm".to_string(), false)].into();
        let up = capability_rollup(&model, &arm_down).unwrap();
        assert!(up["sense"]);
        assert!(!up["act"]);
        assert!(!up["mission"]);

        let mut any_model = model.clone();
        any_model.capabilities[2].combinator = Combinator::AnyOf;
        let up = capability_rollup(&any_model, &arm_down).unwrap();
        assert!(up["mission"]);
    }

    #[test]
    fn validation_rejects_cycles_and_bad_refs() {
        let mut model = two_device_model();
        model.capabilities[0].requires.push("mission".into());
        assert!(matches!(model.validate(), Err(ModelError::Cycle(_))));

        let mut model = two_device_model();
        model.capabilities[0].requires.push("ghost".into());
        assert!(matches!(model.validate(), Err(ModelError::UnknownReference(_))));

        let mut model = two_device_model();
        model.devices[0].reliability = 1.5;
        assert!(matches!(model.validate(), Err(ModelError::BadReliability(..))));

        let mut model = two_device_model();
        model.capabilities.push(Capability {
            id: "dangling".into(),
            combinator: Combinator::AllOf,
            requires: vec!["cam".into()],
        });
        assert!(matches!(model.validate(), Err(ModelError::Orphan(_))));
    }

    #[test]
    fn constant_full_reliability_degenerates() {
        let model = two_device_model();
        let result = reliability_mc(
            &model,
            500,
            3,
            &ReliabilityDistribution::Constant { value: 1.0 },
        )
        .unwrap();
        assert!(result.capability_availability.values().all(|&v| v == 1.0));
        // Zero variance everywhere: correlations undefined, not zero.
        assert_eq!(result.correlations.get("mission", "cam"), None);
    }

    #[test]
    fn single_device_mc_matches_clamped_mean() {
        let model = AvailabilityModel {
            format_version: 1,
            devices: vec![Device { id: "d".into(), reliability: 0.9, redundancy: 1 }],
            capabilities: vec![Capability {
                id: "mission".into(),
                combinator: Combinator::AllOf,
                requires: vec!["d".into()],
            }],
            mission_capability: "mission".into(),
            n_systems: 1,
            trial_distribution: None,
        };
        let dist = ReliabilityDistribution::Normal { mean: 0.9, std_dev: 0.05 };
        let expected = dist.clamped_mean();
        let result = reliability_mc(&model, 100_000, 9, &dist).unwrap();
        let estimate = result.capability_availability["mission"];
        assert!((estimate - expected).abs() <= 0.005, "{estimate} vs clamped mean {expected}");
    }

    #[test]
    fn clamped_mean_sanity() {
        let c = ReliabilityDistribution::Constant { value: 0.7 };
        assert_eq!(c.clamped_mean(), 0.7);
        let u = ReliabilityDistribution::Uniform { low: 0.5, high: 1.5 };
        // Half the mass uniform on [0.5, 1] (mean 0.75), half clamped to 1.
        assert!((u.clamped_mean() - 0.875).abs() < 1e-12);
        let n = ReliabilityDistribution::Normal { mean: 0.9, std_dev: 0.05 };
        let m = n.clamped_mean();
        // Clamping at 1 pulls the mean slightly below 0.9.
        assert!(m < 0.9 && m > 0.89, "clamped mean {m}");
    }

    #[test]
    fn sweep_curves_are_monotone_and_match_formula() {
        let model = two_device_model();
        let system = redundancy_sweep(&model, SweepAxis::System, 1..=5);
        let a = per_robot_availability(&model);
        for (i, &(n, value)) in system.iter().enumerate() {
            let expected = 1.0 - (1.0 - a).powi(n as i32);
            assert!((value - expected).abs() < 1e-12);
            if i > 0 {
                assert!(value >= system[i - 1].1);
            }
        }

        let subsystem = redundancy_sweep(&model, SweepAxis::Subsystem { reliability: 0.95 }, 1..=4);
        for (i, &(k, value)) in subsystem.iter().enumerate() {
            let expected_device = device_availability(0.95, k);
            let expected = 1.0
                - (1.0 - expected_device.powi(model.devices.len() as i32))
                    .powi(model.n_systems as i32);
            assert!((value - expected).abs() < 1e-12);
            if i > 0 {
                assert!(value >= subsystem[i - 1].1);
            }
        }
    }

    #[test]
    fn capability_net_rolls_up_in_simulation() {
        let model = two_device_model();
        let net = capability_net(&model).unwrap();
        assert!(crate::validate::validate_net(&net).is_valid());
        let trace = simulate(&net, &SimConfig::with_seed(0)).unwrap();
        assert_eq!(trace.outcome, Outcome::Success);
        assert_eq!(trace.final_state.tokens["mission"], 1);

        // Without a goal the net runs to quiescence: every capability
        // marked exactly once, device tokens restored.
        let mut open = net.clone();
        open.goal = None;
        let trace = simulate(&open, &SimConfig::with_seed(0)).unwrap();
        assert_eq!(trace.outcome, Outcome::Deadlock);
        for cap in ["sense", "act", "mission"] {
            assert_eq!(trace.final_state.tokens[cap], 1, "{cap}");
        }
        assert_eq!(trace.final_state.tokens["cam"], 1);
        assert_eq!(trace.final_state.tokens["arm"], 2);

        // Removing a device's tokens disables the capabilities above it.
        let mut degraded = open;
        degraded.places.iter_mut().find(|p| p.id == "arm").unwrap().initial_tokens = 0;
        let trace = simulate(&degraded, &SimConfig::with_seed(0)).unwrap();
        assert_eq!(trace.final_state.tokens["sense"], 1);
        assert_eq!(trace.final_state.tokens["act"], 0);
        assert_eq!(trace.final_state.tokens["mission"], 0);
    }
}
