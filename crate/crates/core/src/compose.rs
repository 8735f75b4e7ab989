//! Hierarchical composition: merge several nets into one executable net
//! by fusing shared places and resources.
//!
//! Fusion is always by explicit map, never by name matching. Unfused ids
//! get a `<net id><separator><local id>` prefix; fused groups collapse to
//! a canonical id whose initial marking comes from the designated
//! authoritative member (required whenever members disagree).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::Net;
use crate::validate::validate_net;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceMember {
    pub net: String,
    pub place: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceMember {
    pub net: String,
    pub resource: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceFusion {
    /// Canonical id in the merged net.
    pub id: String,
    pub members: Vec<PlaceMember>,
    /// Net id whose member supplies the initial tokens; required when
    /// members disagree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authority: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceFusion {
    pub id: String,
    pub members: Vec<ResourceMember>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authority: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionMap {
    #[serde(default)]
    pub places: Vec<PlaceFusion>,
    #[serde(default)]
    pub resources: Vec<ResourceFusion>,
    /// Separator between net id and local id for unfused elements.
    #[serde(default = "default_separator")]
    pub separator: String,
}

impl Default for FusionMap {
    fn default() -> Self {
        FusionMap { places: Vec::new(), resources: Vec::new(), separator: default_separator() }
    }
}

fn default_separator() -> String {
    ".".into()
}

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("input net `{0}` failed validation:\n{1}")]
    InvalidInput(String, crate::validate::ValidationReport),
    #[error("fusion references unknown net `{0}`")]
    UnknownNet(String),
    #[error("fusion references unknown element `{net}:{id}`")]
    UnknownElement { net: String, id: String },
    #[error("element `{net}:{id}` appears in more than one fusion group")]
    DoubleFusion { net: String, id: String },
    #[error(
        "fused group `{0}` has conflicting initial markings and no authority; \
         set `authority` to one of the member nets"
    )]
    ConflictingInitials(String),
    #[error("fusion authority `{authority}` is not a member net of group `{id}`")]
    BadAuthority { id: String, authority: String },
    #[error("id collision after merge: `{0}`")]
    IdCollision(String),
    #[error("merged net failed validation:\n{0}")]
    InvalidResult(crate::validate::ValidationReport),
}

/// Rename table from (net id, local id) to merged id.
type Renames = BTreeMap<(String, String), String>;

fn plan_place_fusions(
    nets: &[(String, &Net)],
    fusion: &FusionMap,
    renames: &mut Renames,
) -> Result<Vec<crate::model::Place>, ComposeError> {
    let mut fused = Vec::new();
    for group in &fusion.places {
        let mut canonical: Option<crate::model::Place> = None;
        let mut initials: Vec<(String, u64)> = Vec::new();
        for member in &group.members {
            let (_, net) = nets
                .iter()
                .find(|(id, _)| *id == member.net)
                .ok_or_else(|| ComposeError::UnknownNet(member.net.clone()))?;
            let place = net.place(&member.place).ok_or_else(|| ComposeError::UnknownElement {
                net: member.net.clone(),
                id: member.place.clone(),
            })?;
            let key = (member.net.clone(), member.place.clone());
            if renames.insert(key, group.id.clone()).is_some() {
                return Err(ComposeError::DoubleFusion {
                    net: member.net.clone(),
                    id: member.place.clone(),
                });
            }
            initials.push((member.net.clone(), place.initial_tokens));
            if canonical.is_none() {
                let mut p = place.clone();
                p.id = group.id.clone();
                canonical = Some(p);
            }
        }
        let mut place = canonical.ok_or_else(|| ComposeError::ConflictingInitials(group.id.clone()))?;
        let distinct: Vec<u64> = {
            let mut v: Vec<u64> = initials.iter().map(|&(_, n)| n).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        place.initial_tokens = match (&group.authority, distinct.len()) {
            (Some(authority), _) => {
                initials
                    .iter()
                    .find(|(net, _)| net == authority)
                    .map(|&(_, n)| n)
                    .ok_or_else(|| ComposeError::BadAuthority {
                        id: group.id.clone(),
                        authority: authority.clone(),
                    })?
            }
            (None, 1) => distinct[0],
            (None, _) => return Err(ComposeError::ConflictingInitials(group.id.clone())),
        };
        fused.push(place);
    }
    Ok(fused)
}

fn plan_resource_fusions(
    nets: &[(String, &Net)],
    fusion: &FusionMap,
    renames: &mut Renames,
) -> Result<Vec<crate::model::Resource>, ComposeError> {
    let mut fused = Vec::new();
    for group in &fusion.resources {
        let mut members = Vec::new();
        for member in &group.members {
            let (_, net) = nets
                .iter()
                .find(|(id, _)| *id == member.net)
                .ok_or_else(|| ComposeError::UnknownNet(member.net.clone()))?;
            let resource =
                net.resource(&member.resource).ok_or_else(|| ComposeError::UnknownElement {
                    net: member.net.clone(),
                    id: member.resource.clone(),
                })?;
            let key = (member.net.clone(), member.resource.clone());
            if renames.insert(key, group.id.clone()).is_some() {
                return Err(ComposeError::DoubleFusion {
                    net: member.net.clone(),
                    id: member.resource.clone(),
                });
            }
            members.push((member.net.clone(), resource.clone()));
        }
        let all_equal = members.windows(2).all(|w| {
            let (a, b) = (&w[0].1, &w[1].1);
            a.initial_level == b.initial_level
                && a.min_level == b.min_level
                && a.max_level == b.max_level
        });
        let source = match (&group.authority, all_equal) {
            (Some(authority), _) => members
                .iter()
                .find(|(net, _)| net == authority)
                .map(|(_, r)| r.clone())
                .ok_or_else(|| ComposeError::BadAuthority {
                    id: group.id.clone(),
                    authority: authority.clone(),
                })?,
            (None, true) => {
                members
                    .first()
                    .map(|(_, r)| r.clone())
                    .ok_or_else(|| ComposeError::ConflictingInitials(group.id.clone()))?
            }
            (None, false) => return Err(ComposeError::ConflictingInitials(group.id.clone())),
        };
        let mut resource = source;
        resource.id = group.id.clone();
        fused.push(resource);
    }
    Ok(fused)
}

/// Disjoint union of the nets with fused groups collapsed to canonical
/// ids and all other ids prefixed by their net id. Arcs, goals, and level
/// tags are rewritten; per-element provenance lands in the metadata under
/// `source.<merged id>`. The result passes validation.
///
/// The merged goal is taken from the first input net that declares one.
pub fn merge_nets(nets: &[(String, &Net)], fusion: &FusionMap) -> Result<Net, ComposeError> {
    for (id, net) in nets {
        let report = validate_net(net);
        if !report.is_valid() {
            return Err(ComposeError::InvalidInput(id.clone(), report));
        }
    }

    let mut renames: Renames = BTreeMap::new();
    let fused_places = plan_place_fusions(nets, fusion, &mut renames)?;
    let fused_resources = plan_resource_fusions(nets, fusion, &mut renames)?;

    let mut merged = Net::default();
    let mut metadata = BTreeMap::new();
    let rename = |renames: &Renames, net_id: &str, local: &str| -> String {
        renames
            .get(&(net_id.to_string(), local.to_string()))
            .cloned()
            .unwrap_or_else(|| format!("{net_id}{}{local}", fusion.separator))
    };

    merged.places = fused_places;
    merged.resources = fused_resources;

    for (net_id, net) in nets {
        for place in &net.places {
            let new_id = rename(&renames, net_id, &place.id);
            metadata.insert(format!("source.{new_id}"), format!("{net_id}:{}", place.id));
            if let Some(tag) = net.level_tag(&place.id) {
                metadata.insert(format!("level.{new_id}"), tag.to_string());
            }
            if renames.contains_key(&(net_id.clone(), place.id.clone())) {
                continue; // fused; already present under the canonical id
            }
            let mut p = place.clone();
            p.id = new_id;
            merged.places.push(p);
        }
        for resource in &net.resources {
            let new_id = rename(&renames, net_id, &resource.id);
            metadata.insert(format!("source.{new_id}"), format!("{net_id}:{}", resource.id));
            if let Some(tag) = net.level_tag(&resource.id) {
                metadata.insert(format!("level.{new_id}"), tag.to_string());
            }
            if renames.contains_key(&(net_id.clone(), resource.id.clone())) {
                continue;
            }
            let mut r = resource.clone();
            r.id = new_id;
            merged.resources.push(r);
        }
        for transition in &net.transitions {
            let new_id = format!("{net_id}{}{}", fusion.separator, transition.id);
            metadata.insert(format!("source.{new_id}"), format!("{net_id}:{}", transition.id));
            if let Some(tag) = net.level_tag(&transition.id) {
                metadata.insert(format!("level.{new_id}"), tag.to_string());
            }
            let mut t = transition.clone();
            t.id = new_id;
            for arc in t.inputs.iter_mut().chain(t.outputs.iter_mut()) {
                arc.place = rename(&renames, net_id, &arc.place);
            }
            for place in &mut t.inhibitors {
                *place = rename(&renames, net_id, place);
            }
            for rate in &mut t.rates {
                rate.resource = rename(&renames, net_id, &rate.resource);
            }
            merged.transitions.push(t);
        }
        if merged.goal.is_none() {
            if let Some(goal) = &net.goal {
                let mut goal = goal.clone();
                for cond in &mut goal.tokens {
                    cond.place = rename(&renames, net_id, &cond.place);
                }
                for cond in &mut goal.resources {
                    cond.resource = rename(&renames, net_id, &cond.resource);
                }
                merged.goal = Some(goal);
            }
        }
        metadata.insert(format!("merged.{net_id}"), net.level_tag("").unwrap_or("").to_string());
    }

    // First net's policy wins; record the source nets.
    merged.policy = nets.first().map(|(_, n)| n.policy).unwrap_or_default();
    metadata.insert(
        "merged_from".into(),
        nets.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>().join(","),
    );
    merged.metadata = metadata;

    let mut seen = BTreeMap::new();
    for id in merged
        .places
        .iter()
        .map(|p| &p.id)
        .chain(merged.resources.iter().map(|r| &r.id))
        .chain(merged.transitions.iter().map(|t| &t.id))
    {
        if seen.insert(id.clone(), ()).is_some() {
            return Err(ComposeError::IdCollision(id.clone()));
        }
    }

    let report = validate_net(&merged);
    if !report.is_valid() {
        return Err(ComposeError::InvalidResult(report));
    }
    Ok(merged)
}

/// Elements of a net grouped by their hierarchy level tag. Untagged
/// elements land in the `untagged` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsReport {
    pub groups: BTreeMap<String, LevelGroup>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelGroup {
    pub places: Vec<String>,
    pub resources: Vec<String>,
    pub transitions: Vec<String>,
}

pub fn levels_report(net: &Net) -> LevelsReport {
    let mut groups: BTreeMap<String, LevelGroup> = BTreeMap::new();
    let tag_of = |id: &str| net.level_tag(id).unwrap_or("untagged").to_string();
    for place in &net.places {
        groups.entry(tag_of(&place.id)).or_default().places.push(place.id.clone());
    }
    for resource in &net.resources {
        groups.entry(tag_of(&resource.id)).or_default().resources.push(resource.id.clone());
    }
    for transition in &net.transitions {
        groups.entry(tag_of(&transition.id)).or_default().transitions.push(transition.id.clone());
    }
    for group in groups.values_mut() {
        group.places.sort();
        group.resources.sort();
        group.transitions.sort();
    }
    LevelsReport { groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ConflictPolicy, DurationDistribution, GoalPredicate, Place, Resource, Transition,
    };
    use crate::sim::{simulate, Outcome, SimConfig};

    fn small_net(prefix: &str, tokens: u64) -> Net {
        Net {
            places: vec![Place::new("src", tokens), Place::new("dst", 0)],
            transitions: vec![Transition::new("step", DurationDistribution::constant(1.0))
                .with_input("src", 1)
                .with_output("dst", 1)],
            metadata: [("level".to_string(), prefix.to_string())].into(),
            ..Default::default()
        }
    }

    #[test]
    fn disjoint_union_prefixes_everything() {
        let a = small_net("mission", 1);
        let b = small_net("system", 2);
        let merged =
            merge_nets(&[("a".into(), &a), ("b".into(), &b)], &FusionMap::default()).unwrap();
        assert_eq!(merged.places.len(), 4);
        assert_eq!(merged.transitions.len(), 2);
        assert!(merged.place("a.src").is_some());
        assert!(merged.place("b.src").is_some());
        assert_eq!(merged.place("b.src").unwrap().initial_tokens, 2);
        assert!(crate::validate::validate_net(&merged).is_valid());
    }

    #[test]
    fn fused_place_attaches_arcs_from_both_nets() {
        let a = small_net("mission", 1);
        let b = small_net("system", 0);
        let fusion = FusionMap {
            places: vec![PlaceFusion {
                id: "shared_dst".into(),
                members: vec![
                    PlaceMember { net: "a".into(), place: "dst".into() },
                    PlaceMember { net: "b".into(), place: "dst".into() },
                ],
                authority: None,
            }],
            ..Default::default()
        };
        let merged = merge_nets(&[("a".into(), &a), ("b".into(), &b)], &fusion).unwrap();
        assert_eq!(merged.places.len(), 3);
        let feeders: Vec<_> = merged
            .transitions
            .iter()
            .filter(|t| t.outputs.iter().any(|arc| arc.place == "shared_dst"))
            .map(|t| t.id.clone())
            .collect();
        assert_eq!(feeders, vec!["a.step", "b.step"]);
    }

    #[test]
    fn conflicting_initials_require_authority() {
        let a = small_net("mission", 1);
        let b = small_net("system", 2);
        let mut fusion = FusionMap {
            places: vec![PlaceFusion {
                id: "pool".into(),
                members: vec![
                    PlaceMember { net: "a".into(), place: "src".into() },
                    PlaceMember { net: "b".into(), place: "src".into() },
                ],
                authority: None,
            }],
            ..Default::default()
        };
        let err = merge_nets(&[("a".into(), &a), ("b".into(), &b)], &fusion).unwrap_err();
        assert!(matches!(err, ComposeError::ConflictingInitials(_)));

        fusion.places[0].authority = Some("b".into());
        let merged = merge_nets(&[("a".into(), &a), ("b".into(), &b)], &fusion).unwrap();
        assert_eq!(merged.place("pool").unwrap().initial_tokens, 2);
    }

    #[test]
    fn resource_fusion_with_authority() {
        let mut a = small_net("mission", 1);
        a.resources.push(Resource::new("energy", 50.0, 0.0, Some(100.0)));
        a.transitions[0].rates.push(crate::model::ResourceRate {
            resource: "energy".into(),
            rate: -1.0,
        });
        let mut b = small_net("system", 1);
        b.resources.push(Resource::new("energy", 80.0, 10.0, Some(100.0)));
        b.transitions[0].rates.push(crate::model::ResourceRate {
            resource: "energy".into(),
            rate: -2.0,
        });
        let fusion = FusionMap {
            resources: vec![ResourceFusion {
                id: "energy".into(),
                members: vec![
                    ResourceMember { net: "a".into(), resource: "energy".into() },
                    ResourceMember { net: "b".into(), resource: "energy".into() },
                ],
                authority: Some("b".into()),
            }],
            ..Default::default()
        };
        let merged = merge_nets(&[("a".into(), &a), ("b".into(), &b)], &fusion).unwrap();
        assert_eq!(merged.resources.len(), 1);
        assert_eq!(merged.resource("energy").unwrap().initial_level, 80.0);
        assert!(merged.transitions.iter().all(|t| t.rates[0].resource == "energy"));
    }

    #[test]
    fn double_membership_is_rejected() {
        let a = small_net("mission", 1);
        let fusion = FusionMap {
            places: vec![
                PlaceFusion {
                    id: "x".into(),
                    members: vec![PlaceMember { net: "a".into(), place: "src".into() }],
                    authority: None,
                },
                PlaceFusion {
                    id: "y".into(),
                    members: vec![PlaceMember { net: "a".into(), place: "src".into() }],
                    authority: None,
                },
            ],
            ..Default::default()
        };
        let err = merge_nets(&[("a".into(), &a)], &fusion).unwrap_err();
        assert!(matches!(err, ComposeError::DoubleFusion { .. }));
    }

    #[test]
    fn merged_goal_comes_from_first_net_with_rewritten_refs() {
        let mut a = small_net("mission", 1);
        a.goal = Some(GoalPredicate::tokens_at_least("dst", 1));
        let b = small_net("system", 1);
        let merged =
            merge_nets(&[("a".into(), &a), ("b".into(), &b)], &FusionMap::default()).unwrap();
        assert_eq!(merged.goal.as_ref().unwrap().tokens[0].place, "a.dst");
    }

    #[test]
    fn disjoint_merge_outcome_matches_standalone_runs() {
        // Constant durations and a deterministic policy: the union's final
        // marking restricted to each component equals the standalone final
        // marking (outcome equivalence; event interleaving may differ).
        let mut a = small_net("mission", 2);
        a.policy = ConflictPolicy::FixedPriority;
        let mut b = small_net("system", 3);
        b.policy = ConflictPolicy::FixedPriority;
        let merged =
            merge_nets(&[("a".into(), &a), ("b".into(), &b)], &FusionMap::default()).unwrap();

        let config = SimConfig::with_seed(4);
        let ta = simulate(&a, &config).unwrap();
        let tb = simulate(&b, &config).unwrap();
        let tm = simulate(&merged, &config).unwrap();
        assert_eq!(tm.outcome, Outcome::Deadlock);
        assert_eq!(tm.final_state.tokens["a.dst"], ta.final_state.tokens["dst"]);
        assert_eq!(tm.final_state.tokens["b.dst"], tb.final_state.tokens["dst"]);
        assert_eq!(tm.final_time, ta.final_time.max(tb.final_time));
    }

    #[test]
    fn levels_report_groups_by_tag() {
        let untagged = Net {
            places: vec![Place::new("p", 0)],
            ..Default::default()
        };
        let report = levels_report(&untagged);
        assert_eq!(report.groups.len(), 1);
        assert!(report.groups.contains_key("untagged"));

        let a = small_net("mission", 1);
        let b = small_net("system", 1);
        let c = small_net("subsystem", 1);
        let merged = merge_nets(
            &[("m".into(), &a), ("s".into(), &b), ("u".into(), &c)],
            &FusionMap::default(),
        )
        .unwrap();
        let report = levels_report(&merged);
        assert_eq!(report.groups.len(), 3);
        assert_eq!(report.groups["mission"].places.len(), 2);
        assert_eq!(report.groups["system"].transitions, vec!["s.step"]);
    }

    #[test]
    fn merge_element_counts_match_sources_minus_fused() {
        let a = small_net("mission", 1);
        let b = small_net("system", 0);
        let fusion = FusionMap {
            places: vec![PlaceFusion {
                id: "shared".into(),
                members: vec![
                    PlaceMember { net: "a".into(), place: "dst".into() },
                    PlaceMember { net: "b".into(), place: "dst".into() },
                ],
                authority: None,
            }],
            ..Default::default()
        };
        let merged = merge_nets(&[("a".into(), &a), ("b".into(), &b)], &fusion).unwrap();
        let fused_duplicates = 1; // two members collapse into one place
        assert_eq!(merged.places.len(), a.places.len() + b.places.len() - fused_duplicates);
    }
}
