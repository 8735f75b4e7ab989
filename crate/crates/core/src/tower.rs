//! Shipped tower-building demo models: a robot team stacks three boxes
//! against a 60-unit deadline and an energy floor, described at mission,
//! system, and capability level, plus the fusion map that merges the three
//! views and the sampling specs for batch studies.
//!
//! Parameter choices are annotated in each net's metadata. Durations are
//! set so a single robot completes in about 55 units against the 60-unit
//! deadline; one simulation unit stands for 10 seconds of real time.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::compose::{FusionMap, PlaceFusion, PlaceMember, ResourceFusion, ResourceMember};
use crate::mc::{SampleDistribution, SampleEntry, SampleTarget, SamplingSpec};
use crate::model::{
    ConflictPolicy, DurationDistribution, GoalPredicate, Net, Place, Resource, Transition,
};
use crate::reliability::{
    capability_net, AvailabilityModel, Capability, Combinator, Device, ReliabilityDistribution,
};

/// Deadline for the stacking objective, in simulation units (10 min at
/// 10 s per unit).
pub const DEADLINE: f64 = 60.0;

/// Energy floor: the system must keep 10% in reserve.
pub const ENERGY_MIN: f64 = 10.0;
pub const ENERGY_MAX: f64 = 100.0;

const STACK_MEAN: f64 = 18.3;
const STACK_SD: f64 = 5.0;

/// The complete bundle, generated in memory.
#[derive(Debug, Clone)]
pub struct TowerModels {
    pub mission: Net,
    pub system: Net,
    pub availability: AvailabilityModel,
    /// Executable form of the availability model.
    pub capability: Net,
    pub fusion: FusionMap,
    pub q1_mission_sampling: SamplingSpec,
    pub q1_system_sampling: SamplingSpec,
}

fn capability_gate(net: &mut Net) {
    // `capability_ready` starts marked so each net runs standalone; the
    // fusion map replaces it with the derived mission capability place.
    // The zero-duration acknowledge step consumes the `capability_missing`
    // marker once the capability token exists; gated transitions carry an
    // inhibitor on the marker instead of consuming the capability token,
    // so concurrency is not throttled by the gate.
    net.places.push(Place::new("capability_ready", 1));
    net.places.push(Place::new("capability_missing", 1));
    net.transitions.push(
        Transition::new("acknowledge_capability", DurationDistribution::constant(0.0))
            .with_input("capability_ready", 1)
            .with_input("capability_missing", 1)
            .with_output("capability_ready", 1),
    );
}

/// Mission view: three box tokens, a robot pool, and one abstract
/// stacking action.
pub fn mission_net(robots: u64) -> Net {
    let mut net = Net {
        policy: ConflictPolicy::FixedPriority,
        ..Default::default()
    };
    net.metadata.insert("level".into(), "mission".into());
    net.metadata.insert("units".into(), "1 simulation unit = 10 s real time".into());
    net.metadata.insert(
        "note.durations".into(),
        format!(
            "stack duration N({STACK_MEAN}, {STACK_SD}) puts single-robot completion near 55 \
             units against the {DEADLINE}-unit deadline"
        ),
    );
    net.places.push(Place::new("boxes_remaining", 3));
    net.places.push(Place::new("robots_idle", robots));
    net.places.push(Place::new("boxes_stacked", 0));
    net.resources.push(Resource::new("energy", ENERGY_MAX, ENERGY_MIN, Some(ENERGY_MAX)));
    capability_gate(&mut net);
    net.transitions.push(
        Transition::new(
            "stack_box",
            DurationDistribution::Normal { mean: STACK_MEAN, std_dev: STACK_SD },
        )
        .with_input("boxes_remaining", 1)
        .with_input("robots_idle", 1)
        .with_output("boxes_stacked", 1)
        .with_output("robots_idle", 1)
        .with_inhibitor("capability_missing")
        .with_rate("energy", -0.4),
    );
    net.goal = Some(GoalPredicate::tokens_at_least("boxes_stacked", 3).with_deadline(DEADLINE));
    net
}

/// System view: stacking decomposed into detect, track, approach, and a
/// serialized placement at the single tower site. While a placement runs,
/// a token in `placing_flag` suspends approaching robots.
pub fn system_net(robots: u64) -> Net {
    let mut net = Net {
        policy: ConflictPolicy::FixedPriority,
        ..Default::default()
    };
    net.metadata.insert("level".into(), "system".into());
    net.metadata.insert("units".into(), "1 simulation unit = 10 s real time".into());
    net.metadata.insert(
        "note.interference".into(),
        "placements serialize on tower_free; placing_flag suspends approaches meanwhile".into(),
    );
    for (id, tokens) in [
        ("boxes_remaining", 3),
        ("robots_idle", robots),
        ("box_detected", 0),
        ("box_tracked", 0),
        ("at_box", 0),
        ("placing_work", 0),
        ("placing_flag", 0),
        ("clear_signal", 0),
        ("tower_free", 1),
        ("boxes_stacked", 0),
    ] {
        net.places.push(Place::new(id, tokens));
    }
    net.resources.push(Resource::new("energy", ENERGY_MAX, ENERGY_MIN, Some(ENERGY_MAX)));
    capability_gate(&mut net);

    net.transitions.push(
        Transition::new("detect", DurationDistribution::Normal { mean: 3.0, std_dev: 0.8 })
            .with_input("boxes_remaining", 1)
            .with_input("robots_idle", 1)
            .with_output("box_detected", 1)
            .with_inhibitor("capability_missing")
            .with_rate("energy", -0.5),
    );
    net.transitions.push(
        Transition::new("track", DurationDistribution::Normal { mean: 3.0, std_dev: 0.8 })
            .with_input("box_detected", 1)
            .with_output("box_tracked", 1)
            .with_rate("energy", -0.3),
    );
    net.transitions.push(
        Transition::new("approach", DurationDistribution::Normal { mean: 6.0, std_dev: 1.5 })
            .with_input("box_tracked", 1)
            .with_output("at_box", 1)
            .with_inhibitor("placing_flag")
            .with_rate("energy", -0.8),
    );
    net.transitions.push(
        Transition::new("begin_place", DurationDistribution::constant(0.0))
            .with_input("at_box", 1)
            .with_input("tower_free", 1)
            .with_output("placing_work", 1)
            .with_output("placing_flag", 1),
    );
    net.transitions.push(
        Transition::new("finish_place", DurationDistribution::Normal { mean: 6.0, std_dev: 1.5 })
            .with_input("placing_work", 1)
            .with_output("boxes_stacked", 1)
            .with_output("robots_idle", 1)
            .with_output("tower_free", 1)
            .with_output("clear_signal", 1)
            .with_rate("energy", -0.6),
    );
    net.transitions.push(
        Transition::new("end_flag", DurationDistribution::constant(0.0))
            .with_input("placing_flag", 1)
            .with_input("clear_signal", 1),
    );
    net.goal = Some(GoalPredicate::tokens_at_least("boxes_stacked", 3).with_deadline(DEADLINE));
    net
}

/// Device-to-capability model: the four subsystems feed the system-level
/// capabilities, all required at the mission root.
pub fn availability_model() -> AvailabilityModel {
    let device = |id: &str| Device { id: id.into(), reliability: 0.9, redundancy: 1 };
    let all_of = |id: &str, requires: &[&str]| Capability {
        id: id.into(),
        combinator: Combinator::AllOf,
        requires: requires.iter().map(|s| s.to_string()).collect(),
    };
    AvailabilityModel {
        format_version: 1,
        devices: vec![device("locomotion"), device("gripper"), device("mast"), device("camera")],
        capabilities: vec![
            // The chassis camera alone detects; tracking needs the mast.
            all_of("detection", &["camera"]),
            all_of("tracking", &["camera", "mast"]),
            all_of("approach", &["locomotion", "tracking"]),
            all_of("manipulation", &["gripper", "approach", "detection"]),
            all_of("box_stacking", &["detection", "tracking", "approach", "manipulation"]),
        ],
        mission_capability: "box_stacking".into(),
        n_systems: 1,
        trial_distribution: Some(ReliabilityDistribution::Normal { mean: 0.9, std_dev: 0.05 }),
    }
}

/// Fusion map merging the three views: the derived mission capability
/// place supplies the shared `capability_ready` token, and the mission and
/// system energy pools collapse into one.
pub fn fusion_map() -> FusionMap {
    FusionMap {
        places: vec![PlaceFusion {
            id: "capability_ready".into(),
            members: vec![
                PlaceMember { net: "mission".into(), place: "capability_ready".into() },
                PlaceMember { net: "system".into(), place: "capability_ready".into() },
                PlaceMember { net: "capability".into(), place: "box_stacking".into() },
            ],
            authority: Some("capability".into()),
        }],
        resources: vec![ResourceFusion {
            id: "energy".into(),
            members: vec![
                ResourceMember { net: "mission".into(), resource: "energy".into() },
                ResourceMember { net: "system".into(), resource: "energy".into() },
            ],
            authority: Some("mission".into()),
        }],
        separator: ".".into(),
    }
}

fn q1_mission_sampling() -> SamplingSpec {
    SamplingSpec {
        entries: vec![
            SampleEntry {
                target: SampleTarget::InitialTokens { place: "robots_idle".into() },
                distribution: SampleDistribution::IntegerUniform { low: 1, high: 4 },
            },
            SampleEntry {
                target: SampleTarget::InitialLevel { resource: "energy".into() },
                distribution: SampleDistribution::Uniform { low: 60.0, high: 100.0 },
            },
        ],
    }
}

fn q1_system_sampling() -> SamplingSpec {
    SamplingSpec {
        entries: vec![
            SampleEntry {
                target: SampleTarget::InitialTokens { place: "robots_idle".into() },
                distribution: SampleDistribution::IntegerUniform { low: 1, high: 4 },
            },
            SampleEntry {
                target: SampleTarget::InitialLevel { resource: "energy".into() },
                distribution: SampleDistribution::Uniform { low: 30.0, high: 100.0 },
            },
        ],
    }
}

/// Builds the whole bundle with the default single-robot marking.
pub fn build_case_models() -> TowerModels {
    let availability = availability_model();
    let capability = capability_net(&availability).expect("model is valid by construction");
    TowerModels {
        mission: mission_net(1),
        system: system_net(1),
        availability,
        capability,
        fusion: fusion_map(),
        q1_mission_sampling: q1_mission_sampling(),
        q1_system_sampling: q1_system_sampling(),
    }
}

fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("bundle values serialize");
    let mut out = String::new();
    crate::io::write_canonical_value(&mut out, &value).expect("bundle values are finite");
    out.push('\n');
    out
}

/// Writes the canonical bundle files into `dir` and returns their paths.
pub fn write_bundle(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let models = build_case_models();
    fs::create_dir_all(dir)?;
    let serialize = |net: &Net| {
        crate::io::serialize_net(net).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    };
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    emit("mission.pnet", serialize(&models.mission)?)?;
    emit("system.pnet", serialize(&models.system)?)?;
    emit("capability.pnet", serialize(&models.capability)?)?;
    emit("capability.avail.json", canonical_json(&models.availability))?;
    emit("fusion.map", canonical_json(&models.fusion))?;
    emit("q1_mission.sampling.json", canonical_json(&models.q1_mission_sampling))?;
    emit("q1_system.sampling.json", canonical_json(&models.q1_system_sampling))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::merge_nets;
    use crate::sim::{simulate, Outcome, SimConfig};
    use crate::validate::validate_net;

    #[test]
    fn bundle_nets_validate() {
        let models = build_case_models();
        for (name, net) in [
            ("mission", &models.mission),
            ("system", &models.system),
            ("capability", &models.capability),
        ] {
            let report = validate_net(net);
            assert!(report.is_valid(), "{name}: {report}");
        }
        models.availability.validate().unwrap();
    }

    #[test]
    fn mission_single_robot_run_is_plausible() {
        let net = mission_net(1);
        let trace = simulate(&net, &SimConfig::with_seed(2)).unwrap();
        assert!(matches!(trace.outcome, Outcome::Success | Outcome::Timeout));
        if trace.outcome == Outcome::Success {
            assert!(trace.final_time > 30.0 && trace.final_time <= 60.0, "{}", trace.final_time);
        }
    }

    #[test]
    fn system_net_places_serialize_on_the_tower() {
        let net = system_net(3);
        let trace = simulate(&net, &SimConfig::with_seed(1)).unwrap();
        // begin_place holds tower_free until finish_place: placements must
        // never overlap, so flag raises match flag clears one-to-one.
        let begins = trace.events_of(crate::sim::EventKind::Fire)
            .filter(|e| e.transition.as_deref() == Some("begin_place"))
            .count();
        assert_eq!(begins, 3);
    }

    #[test]
    fn merged_bundle_reaches_goal_only_with_capability() {
        let models = build_case_models();
        let nets = [
            ("mission".to_string(), &models.mission),
            ("system".to_string(), &models.system),
            ("capability".to_string(), &models.capability),
        ];
        let merged = merge_nets(&nets, &models.fusion).unwrap();
        assert!(validate_net(&merged).is_valid());

        let config = SimConfig { max_time: 200.0, ..SimConfig::with_seed(3) };
        let trace = simulate(&merged, &config).unwrap();
        assert_eq!(trace.outcome, Outcome::Success, "full-capability merge should stack boxes");

        // Remove the gripper device token: manipulation and the mission
        // capability can no longer derive, so the goal is unreachable.
        let mut degraded = merged.clone();
        degraded
            .places
            .iter_mut()
            .find(|p| p.id == "capability.gripper")
            .expect("gripper place present")
            .initial_tokens = 0;
        let trace = simulate(&degraded, &config).unwrap();
        assert_ne!(trace.outcome, Outcome::Success);
        assert_eq!(trace.final_state.tokens["capability.manipulation"], 0);
        assert_eq!(trace.final_state.tokens["capability_ready"], 0);
    }

    #[test]
    fn bundle_writes_canonically(){
        let dir = tempfile::tempdir().unwrap();
        let first = write_bundle(dir.path()).unwrap();
        let snapshot: Vec<(PathBuf, String)> = first
            .iter()
            .map(|p| (p.clone(), fs::read_to_string(p).unwrap()))
            .collect();
        write_bundle(dir.path()).unwrap();
        for (path, before) in snapshot {
            assert_eq!(fs::read_to_string(&path).unwrap(), before, "{path:?}");
        }
    }
}
