//! Untimed skeleton extraction and bounded reachability analysis.
//!
//! Exact exploration is restricted to the discrete token part of the net:
//! durations collapse to zero, resources and rates are stripped. Inhibitor
//! arcs keep their blocking role.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::model::{DurationDistribution, Net};

/// Copy of the net with all timing and resource structure removed:
/// constant-zero durations, no rates, no resources, no goal resource
/// conditions. Token structure and inhibitor arcs are preserved.
pub fn untimed_skeleton(net: &Net) -> Net {
    let mut skeleton = net.clone();
    skeleton.resources.clear();
    for t in &mut skeleton.transitions {
        t.duration = DurationDistribution::constant(0.0);
        t.rates.clear();
    }
    if let Some(goal) = &mut skeleton.goal {
        goal.resources.clear();
    }
    skeleton
}

/// A token marking, ordered by the sorted place-id list of the result.
pub type Marking = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityResult {
    /// Sorted place ids; markings index into this list.
    pub place_ids: Vec<String>,
    pub markings: BTreeSet<Marking>,
    /// Markings with no enabled transition.
    pub deadlocks: BTreeSet<Marking>,
    /// True when exploration stopped at `max_states` with work remaining.
    pub truncated: bool,
}

impl ReachabilityResult {
    pub fn marking_count(&self) -> usize {
        self.markings.len()
    }

    pub fn deadlock_count(&self) -> usize {
        self.deadlocks.len()
    }
}

struct SkeletonTransition {
    // (place index, weight)
    inputs: Vec<(usize, u64)>,
    outputs: Vec<(usize, u64)>,
    inhibitors: Vec<usize>,
}

fn untimed_enabled(t: &SkeletonTransition, marking: &[u64]) -> bool {
    t.inhibitors.iter().all(|&p| marking[p] == 0)
        && t.inputs.iter().all(|&(p, w)| marking[p] >= w)
}

fn untimed_fire(t: &SkeletonTransition, marking: &[u64]) -> Marking {
    let mut next = marking.to_vec();
    for &(p, w) in &t.inputs {
        next[p] -= w;
    }
    for &(p, w) in &t.outputs {
        next[p] += w;
    }
    next
}

/// Breadth-first exploration of token markings under untimed firing
/// (consume and produce atomically). Exploration stops after `max_states`
/// distinct markings; the result is independent of transition declaration
/// order up to truncation.
pub fn reachable_markings(net: &Net, max_states: usize) -> ReachabilityResult {
    let skeleton = untimed_skeleton(net);

    let mut place_ids: Vec<String> = skeleton.places.iter().map(|p| p.id.clone()).collect();
    place_ids.sort();
    let index_of = |id: &str| place_ids.binary_search_by(|x| x.as_str().cmp(id)).unwrap();

    // Sorted by transition id so exploration order is deterministic; the
    // discovered set itself does not depend on it.
    let mut transitions: Vec<&crate::model::Transition> = skeleton.transitions.iter().collect();
    transitions.sort_by(|a, b| a.id.cmp(&b.id));
    let transitions: Vec<SkeletonTransition> = transitions
        .iter()
        .map(|t| SkeletonTransition {
            inputs: t.inputs.iter().map(|a| (index_of(&a.place), a.weight)).collect(),
            outputs: t.outputs.iter().map(|a| (index_of(&a.place), a.weight)).collect(),
            inhibitors: t.inhibitors.iter().map(|p| index_of(p)).collect(),
        })
        .collect();

    let initial: Marking = place_ids
        .iter()
        .map(|id| skeleton.place(id).map(|p| p.initial_tokens).unwrap_or(0))
        .collect();

    let mut markings = BTreeSet::new();
    let mut deadlocks = BTreeSet::new();
    let mut truncated = false;
    let mut queue = VecDeque::new();

    markings.insert(initial.clone());
    queue.push_back(initial);

    while let Some(marking) = queue.pop_front() {
        let mut any_enabled = false;
        for t in &transitions {
            if !untimed_enabled(t, &marking) {
                continue;
            }
            any_enabled = true;
            let next = untimed_fire(t, &marking);
            if markings.contains(&next) {
                continue;
            }
            if markings.len() >= max_states {
                truncated = true;
                continue;
            }
            markings.insert(next.clone());
            queue.push_back(next);
        }
        if !any_enabled {
            deadlocks.insert(marking);
        }
    }

    ReachabilityResult { place_ids, markings, deadlocks, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Place, Resource, Transition};

    fn chain_net() -> Net {
        Net {
            places: vec![Place::new("p1", 1), Place::new("p2", 0)],
            transitions: vec![Transition::new("t", DurationDistribution::constant(5.0))
                .with_input("p1", 1)
                .with_output("p2", 1)],
            ..Default::default()
        }
    }

    #[test]
    fn skeleton_zeroes_durations_and_drops_resources() {
        let mut net = chain_net();
        net.resources.push(Resource::new("e", 10.0, 0.0, None));
        net.transitions[0].rates.push(crate::model::ResourceRate {
            resource: "e".into(),
            rate: -1.0,
        });
        let skeleton = untimed_skeleton(&net);
        assert!(skeleton.resources.is_empty());
        assert_eq!(skeleton.transitions[0].duration, DurationDistribution::constant(0.0));
        assert!(skeleton.transitions[0].rates.is_empty());
        assert_eq!(skeleton.places, net.places);
        assert_eq!(untimed_skeleton(&Net::default()), Net::default());
    }

    #[test]
    fn two_state_chain() {
        let result = reachable_markings(&chain_net(), 100);
        let expected: BTreeSet<Marking> = [vec![1, 0], vec![0, 1]].into_iter().collect();
        assert_eq!(result.markings, expected);
        assert_eq!(result.deadlocks, [vec![0, 1]].into_iter().collect());
        assert!(!result.truncated);
    }

    #[test]
    fn live_cycle_has_no_deadlock() {
        let net = Net {
            places: vec![Place::new("p1", 1), Place::new("p2", 0)],
            transitions: vec![
                Transition::new("t1", DurationDistribution::constant(0.0))
                    .with_input("p1", 1)
                    .with_output("p2", 1),
                Transition::new("t2", DurationDistribution::constant(0.0))
                    .with_input("p2", 1)
                    .with_output("p1", 1),
            ],
            ..Default::default()
        };
        let result = reachable_markings(&net, 100);
        assert_eq!(result.marking_count(), 2);
        assert!(result.deadlocks.is_empty());
    }

    #[test]
    fn inhibitor_blocks_untimed_firing() {
        let net = Net {
            places: vec![Place::new("p1", 1), Place::new("guard", 1), Place::new("p2", 0)],
            transitions: vec![Transition::new("t", DurationDistribution::constant(0.0))
                .with_input("p1", 1)
                .with_output("p2", 1)
                .with_inhibitor("guard")],
            ..Default::default()
        };
        let result = reachable_markings(&net, 100);
        assert_eq!(result.marking_count(), 1);
        assert_eq!(result.deadlock_count(), 1);
    }

    #[test]
    fn truncation_flag_set_when_bound_hit() {
        // Unbounded producer: p -> p(2) grows forever.
        let net = Net {
            places: vec![Place::new("p", 1)],
            transitions: vec![Transition::new("grow", DurationDistribution::constant(0.0))
                .with_input("p", 1)
                .with_output("p", 2)],
            ..Default::default()
        };
        let result = reachable_markings(&net, 10);
        assert!(result.truncated);
        assert_eq!(result.marking_count(), 10);
    }

    #[test]
    fn declaration_order_does_not_change_marking_set() {
        let make = |swap: bool| {
            let t1 = Transition::new("a", DurationDistribution::constant(0.0))
                .with_input("p1", 1)
                .with_output("p2", 1);
            let t2 = Transition::new("b", DurationDistribution::constant(0.0))
                .with_input("p1", 1)
                .with_output("p3", 1);
            Net {
                places: vec![Place::new("p1", 2), Place::new("p2", 0), Place::new("p3", 0)],
                transitions: if swap { vec![t2.clone(), t1.clone()] } else { vec![t1, t2] },
                ..Default::default()
            }
        };
        let a = reachable_markings(&make(false), 1000);
        let b = reachable_markings(&make(true), 1000);
        assert_eq!(a.markings, b.markings);
        assert_eq!(a.deadlocks, b.deadlocks);
    }
}
