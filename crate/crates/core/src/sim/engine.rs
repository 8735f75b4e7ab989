//! The event loop: enabledness, reservation, conflict resolution,
//! suspension, and termination.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::model::{ConflictPolicy, DurationDistribution, Net, Transition};
use crate::validate::validate_net;

use super::{
    ActiveInstance, Delta, EventKind, FinalState, InstanceStatus, Outcome, SimConfig, SimError,
    SimState, Trace, TraceEvent, Trajectory, TrajectoryPoint, LEVEL_EPS,
};

// ---------------------------------------------------------------------------
// Compiled form: ids resolved to indices, transitions sorted by id.
// ---------------------------------------------------------------------------

struct CompiledTransition {
    id: String,
    priority: u32,
    max_instances: Option<u64>,
    duration: DurationDistribution,
    inputs: Vec<(usize, u64)>,
    outputs: Vec<(usize, u64)>,
    inhibitors: Vec<usize>,
    rates: Vec<(usize, f64)>,
}

struct Compiled {
    place_ids: Vec<String>,
    resource_ids: Vec<String>,
    resource_bounds: Vec<(f64, f64)>, // (min, max)
    transitions: Vec<CompiledTransition>,
}

impl Compiled {
    fn new(net: &Net) -> Self {
        let mut place_ids: Vec<String> = net.places.iter().map(|p| p.id.clone()).collect();
        place_ids.sort();
        let mut resource_ids: Vec<String> = net.resources.iter().map(|r| r.id.clone()).collect();
        resource_ids.sort();
        let place_idx =
            |id: &str| place_ids.binary_search_by(|x| x.as_str().cmp(id)).expect("validated");
        let resource_idx =
            |id: &str| resource_ids.binary_search_by(|x| x.as_str().cmp(id)).expect("validated");

        let resource_bounds = resource_ids
            .iter()
            .map(|id| {
                let r = net.resource(id).expect("validated");
                (r.min_level, r.max_or_inf())
            })
            .collect();

        let mut sorted: Vec<&Transition> = net.transitions.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let transitions = sorted
            .iter()
            .map(|t| CompiledTransition {
                id: t.id.clone(),
                priority: t.priority,
                max_instances: t.max_instances,
                duration: t.duration.clone(),
                inputs: t.inputs.iter().map(|a| (place_idx(&a.place), a.weight)).collect(),
                outputs: t.outputs.iter().map(|a| (place_idx(&a.place), a.weight)).collect(),
                inhibitors: t.inhibitors.iter().map(|p| place_idx(p)).collect(),
                rates: t.rates.iter().map(|r| (resource_idx(&r.resource), r.rate)).collect(),
            })
            .collect();

        Compiled { place_ids, resource_ids, resource_bounds, transitions }
    }

    fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions.binary_search_by(|t| t.id.as_str().cmp(id)).ok()
    }
}

// ---------------------------------------------------------------------------
// Run state in index space.
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Instance {
    transition: usize,
    instance: u64,
    start_time: f64,
    sampled_duration: f64,
    elapsed: f64,
    suspended: bool,
}

impl Instance {
    fn remaining(&self) -> f64 {
        (self.sampled_duration - self.elapsed).max(0.0)
    }
}

struct RunState {
    clock: f64,
    tokens: Vec<u64>,
    levels: Vec<f64>,
    active: Vec<Instance>,
    next_instance: u64,
}

impl RunState {
    fn from_net(compiled: &Compiled, net: &Net) -> Self {
        let tokens = compiled
            .place_ids
            .iter()
            .map(|id| net.place(id).map(|p| p.initial_tokens).unwrap_or(0))
            .collect();
        let levels = compiled
            .resource_ids
            .iter()
            .map(|id| net.resource(id).map(|r| r.initial_level).unwrap_or(0.0))
            .collect();
        RunState { clock: 0.0, tokens, levels, active: Vec::new(), next_instance: 0 }
    }

    fn from_sim_state(compiled: &Compiled, state: &SimState) -> Self {
        let tokens = compiled
            .place_ids
            .iter()
            .map(|id| state.tokens.get(id).copied().unwrap_or(0))
            .collect();
        let levels = compiled
            .resource_ids
            .iter()
            .map(|id| state.resources.get(id).copied().unwrap_or(0.0))
            .collect();
        let active = state
            .active
            .iter()
            .filter_map(|inst| {
                compiled.transition_index(&inst.transition).map(|idx| Instance {
                    transition: idx,
                    instance: inst.instance,
                    start_time: inst.start_time,
                    sampled_duration: inst.sampled_duration,
                    elapsed: inst.elapsed,
                    suspended: inst.status == InstanceStatus::Suspended,
                })
            })
            .collect();
        RunState {
            clock: state.clock,
            tokens,
            levels,
            active,
            next_instance: state.active.iter().map(|i| i.instance + 1).max().unwrap_or(0),
        }
    }

    fn to_sim_state(&self, compiled: &Compiled) -> SimState {
        SimState {
            clock: self.clock,
            tokens: compiled
                .place_ids
                .iter()
                .cloned()
                .zip(self.tokens.iter().copied())
                .collect(),
            resources: compiled
                .resource_ids
                .iter()
                .cloned()
                .zip(self.levels.iter().copied())
                .collect(),
            active: self
                .active
                .iter()
                .map(|inst| {
                    let t = &compiled.transitions[inst.transition];
                    ActiveInstance {
                        transition: t.id.clone(),
                        instance: inst.instance,
                        start_time: inst.start_time,
                        sampled_duration: inst.sampled_duration,
                        elapsed: inst.elapsed,
                        status: if inst.suspended {
                            InstanceStatus::Suspended
                        } else {
                            InstanceStatus::Running
                        },
                        reserved: t
                            .rates
                            .iter()
                            .map(|&(r, rate)| {
                                (compiled.resource_ids[r].clone(), rate * inst.remaining())
                            })
                            .collect(),
                    }
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Resource projection.
// ---------------------------------------------------------------------------

/// Piecewise-linear feasibility: superposes the constant rates of the given
/// (remaining-time, rates) loads and checks every resource against its
/// bounds at each breakpoint. Rates are constant, so breakpoints suffice
/// exactly.
fn projection_feasible(
    levels: &[f64],
    bounds: &[(f64, f64)],
    loads: &[(f64, &[(usize, f64)])],
) -> bool {
    let mut times: Vec<f64> =
        loads.iter().map(|&(remaining, _)| remaining).filter(|&r| r > 0.0).collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite remaining times"));
    times.dedup();

    for (r, (&level0, &(min, max))) in levels.iter().zip(bounds.iter()).enumerate() {
        let mut level = level0;
        let mut prev = 0.0;
        for &bp in &times {
            let slope: f64 = loads
                .iter()
                .filter(|&&(remaining, _)| remaining >= bp - LEVEL_EPS)
                .flat_map(|&(_, rates)| rates.iter())
                .filter(|&&(idx, _)| idx == r)
                .map(|&(_, rate)| rate)
                .sum();
            level += slope * (bp - prev);
            if level < min - LEVEL_EPS || level > max + LEVEL_EPS {
                return false;
            }
            prev = bp;
        }
    }
    true
}

/// Loads contributed by currently running (not suspended) instances.
fn running_loads<'a>(
    compiled: &'a Compiled,
    active: &[Instance],
) -> Vec<(f64, &'a [(usize, f64)])> {
    active
        .iter()
        .filter(|i| !i.suspended)
        .map(|i| (i.remaining(), compiled.transitions[i.transition].rates.as_slice()))
        .collect()
}

fn feasible_for(
    compiled: &Compiled,
    state: &RunState,
    transition: usize,
    durations: &[f64],
) -> bool {
    if compiled.resource_ids.is_empty() {
        return true;
    }
    let mut loads = running_loads(compiled, &state.active);
    let rates = compiled.transitions[transition].rates.as_slice();
    for &d in durations {
        loads.push((d, rates));
    }
    projection_feasible(&state.levels, &compiled.resource_bounds, &loads)
}

// ---------------------------------------------------------------------------
// Enabledness.
// ---------------------------------------------------------------------------

fn token_capacity(t: &CompiledTransition, tokens: &[u64]) -> u64 {
    t.inputs
        .iter()
        .map(|&(p, w)| tokens[p] / w)
        .min()
        .unwrap_or(u64::MAX)
}

fn inhibited(t: &CompiledTransition, tokens: &[u64]) -> bool {
    t.inhibitors.iter().any(|&p| tokens[p] > 0)
}

fn instance_headroom(t: &CompiledTransition, active: &[Instance], idx: usize) -> u64 {
    let in_flight = active.iter().filter(|i| i.transition == idx).count() as u64;
    match t.max_instances {
        Some(max) => max.saturating_sub(in_flight),
        None => u64::MAX,
    }
}

/// True when some rate of the transition can ever push a resource against
/// a finite bound; when false, feasibility holds for any instance count.
fn any_binding_rate(compiled: &Compiled, t: &CompiledTransition) -> bool {
    t.rates.iter().any(|&(r, rate)| {
        let (min, max) = compiled.resource_bounds[r];
        (rate < 0.0 && min > f64::NEG_INFINITY) || (rate > 0.0 && max < f64::INFINITY)
    })
}

/// Feasible additional instance count for one transition, using expected
/// durations for the admission projection.
fn feasible_additional(compiled: &Compiled, state: &RunState, idx: usize) -> u64 {
    let t = &compiled.transitions[idx];
    if inhibited(t, &state.tokens) {
        return 0;
    }
    let cap = token_capacity(t, &state.tokens).min(instance_headroom(t, &state.active, idx));
    if cap == 0 {
        return 0;
    }
    if t.rates.is_empty() || !any_binding_rate(compiled, t) {
        return cap;
    }
    let expected = t.duration.expected();
    let ok = |k: u64| {
        let durations = vec![expected; k as usize];
        feasible_for(compiled, state, idx, &durations)
    };
    if !ok(1) {
        return 0;
    }
    if ok(cap.min(1 << 20)) {
        return cap;
    }
    // Feasibility is monotone in k: exponential probe, then bisect.
    let mut lo = 1u64; // feasible
    let mut hi = 2u64;
    while hi < cap && ok(hi) {
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    let mut bad = hi; // first known infeasible (or cap bound)
    if bad == cap && ok(cap) {
        return cap;
    }
    while bad - lo > 1 {
        let mid = lo + (bad - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            bad = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
// Public operations on (Net, SimState).
// ---------------------------------------------------------------------------

/// For every transition (sorted by id), how many additional instances may
/// fire now: token cover, inhibitor, instance cap, and the resource
/// projection all admit them. Deterministic in the state.
pub fn enabled_instances(net: &Net, state: &SimState) -> Vec<(String, u64)> {
    let compiled = Compiled::new(net);
    let run = RunState::from_sim_state(&compiled, state);
    compiled
        .transitions
        .iter()
        .enumerate()
        .map(|(idx, t)| (t.id.clone(), feasible_additional(&compiled, &run, idx)))
        .collect()
}

/// Whether `k` additional instances of the transition, with the given
/// sampled durations, keep every resource within bounds alongside the
/// currently running instances.
pub fn resource_feasible(
    net: &Net,
    state: &SimState,
    transition_id: &str,
    k: usize,
    sampled_durations: &[f64],
) -> bool {
    assert!(k >= 1, "k must be >= 1");
    assert_eq!(sampled_durations.len(), k, "one duration per candidate instance");
    let compiled = Compiled::new(net);
    let run = RunState::from_sim_state(&compiled, state);
    let Some(idx) = compiled.transition_index(transition_id) else {
        return false;
    };
    feasible_for(&compiled, &run, idx, sampled_durations)
}

fn select_index(
    transitions: &[(String, u32)],
    candidates: &[usize],
    policy: ConflictPolicy,
    rng: &mut impl Rng,
) -> Option<usize> {
    if candidates.is_empty() {
        return None;
    }
    if candidates.len() == 1 {
        return Some(candidates[0]);
    }
    match policy {
        ConflictPolicy::FixedPriority => {
            // Highest priority wins; ties go to the lexicographically
            // smallest id (candidates are already sorted by id).
            candidates
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    transitions[a]
                        .1
                        .cmp(&transitions[b].1)
                        .then_with(|| transitions[b].0.cmp(&transitions[a].0))
                })
        }
        ConflictPolicy::UniformRandom => {
            let pick = rng.random_range(0..candidates.len());
            Some(candidates[pick])
        }
        ConflictPolicy::PriorityProportional => {
            let weights: Vec<u64> =
                candidates.iter().map(|&i| u64::from(transitions[i].1)).collect();
            let total: u64 = weights.iter().sum();
            if total == 0 {
                let pick = rng.random_range(0..candidates.len());
                return Some(candidates[pick]);
            }
            let x = rng.random::<f64>() * total as f64;
            let mut acc = 0.0;
            for (i, &w) in weights.iter().enumerate() {
                acc += w as f64;
                if x < acc {
                    return Some(candidates[i]);
                }
            }
            Some(*candidates.last().expect("non-empty"))
        }
    }
}

/// Chooses one transition among the enabled candidates (entries with a
/// positive count) under the given policy. Zero-priority transitions are
/// excluded from priority-proportional choice unless all priorities are
/// zero, in which case the choice is uniform.
pub fn select_firing(
    net: &Net,
    enabled: &[(String, u64)],
    policy: ConflictPolicy,
    rng: &mut impl Rng,
) -> Option<String> {
    let mut entries: Vec<(String, u32)> = enabled
        .iter()
        .filter(|(_, k)| *k >= 1)
        .map(|(id, _)| (id.clone(), net.transition(id).map(|t| t.priority).unwrap_or(0)))
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut candidates: Vec<usize> = (0..entries.len()).collect();
    if policy == ConflictPolicy::PriorityProportional
        && entries.iter().any(|(_, priority)| *priority > 0)
    {
        candidates.retain(|&i| entries[i].1 > 0);
    }
    select_index(&entries, &candidates, policy, rng).map(|i| entries[i].0.clone())
}

/// Classifies the state: goal satisfied, deadline passed, structural
/// stall, or stall caused only by resource infeasibility.
pub fn detect_termination(net: &Net, state: &SimState, config: &SimConfig) -> Option<Outcome> {
    let compiled = Compiled::new(net);
    let run = RunState::from_sim_state(&compiled, state);
    if goal_met(net, &compiled, &run) {
        return Some(Outcome::Success);
    }
    let horizon = effective_horizon(net, config);
    if state.clock >= horizon {
        return Some(Outcome::Timeout);
    }
    let any_running = run.active.iter().any(|i| !i.suspended);
    let any_enabled = (0..compiled.transitions.len())
        .any(|idx| feasible_additional(&compiled, &run, idx) >= 1);
    if any_running || any_enabled {
        return None;
    }
    if run.active.is_empty() || run.active.iter().all(|i| i.suspended) {
        let resource_blocked = compiled.transitions.iter().enumerate().any(|(idx, t)| {
            !inhibited(t, &run.tokens)
                && token_capacity(t, &run.tokens) >= 1
                && instance_headroom(t, &run.active, idx) >= 1
        });
        if resource_blocked {
            return Some(Outcome::ResourceFailure);
        }
        return Some(Outcome::Deadlock);
    }
    None
}

fn goal_met(net: &Net, compiled: &Compiled, state: &RunState) -> bool {
    let Some(goal) = &net.goal else {
        return false;
    };
    let place_idx = |id: &str| compiled.place_ids.binary_search_by(|x| x.as_str().cmp(id)).ok();
    let resource_idx =
        |id: &str| compiled.resource_ids.binary_search_by(|x| x.as_str().cmp(id)).ok();
    goal.tokens.iter().all(|c| {
        place_idx(&c.place).is_some_and(|p| c.cmp.eval_u64(state.tokens[p], c.count))
    }) && goal.resources.iter().all(|c| {
        resource_idx(&c.resource).is_some_and(|r| c.cmp.eval_f64(state.levels[r], c.level))
    })
}

fn effective_horizon(net: &Net, config: &SimConfig) -> f64 {
    match net.goal.as_ref().and_then(|g| g.deadline) {
        Some(deadline) => deadline.min(config.max_time),
        None => config.max_time,
    }
}

fn sample_duration(duration: &DurationDistribution, rng: &mut impl Rng) -> f64 {
    let raw = match *duration {
        DurationDistribution::Constant { value } => value,
        DurationDistribution::Normal { mean, std_dev } => {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            mean + std_dev * z
        }
        DurationDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
    };
    raw.max(0.0)
}

// ---------------------------------------------------------------------------
// The run itself.
// ---------------------------------------------------------------------------

struct Recorder {
    events: Vec<TraceEvent>,
    seq: u64,
    max_events: u64,
    truncated: bool,
    /// Continuous resource change since the last emitted event, attached
    /// to the next one so replaying deltas stays exact.
    pending_drift: Vec<f64>,
}

impl Recorder {
    fn new(resources: usize, max_events: u64) -> Self {
        Recorder {
            events: Vec::new(),
            seq: 0,
            max_events,
            truncated: false,
            pending_drift: vec![0.0; resources],
        }
    }

    fn exhausted(&self) -> bool {
        self.events.len() as u64 >= self.max_events
    }

    fn emit(
        &mut self,
        compiled: &Compiled,
        state: &RunState,
        kind: EventKind,
        transition: Option<usize>,
        instance: Option<u64>,
        mut deltas: Vec<Delta>,
    ) {
        let mut all = Vec::new();
        for (r, drift) in self.pending_drift.iter_mut().enumerate() {
            if *drift != 0.0 {
                all.push(Delta::Resource {
                    resource: compiled.resource_ids[r].clone(),
                    change: *drift,
                    after: state.levels[r],
                });
                *drift = 0.0;
            }
        }
        all.append(&mut deltas);
        self.events.push(TraceEvent {
            time: state.clock,
            seq: self.seq,
            kind,
            transition: transition.map(|t| compiled.transitions[t].id.clone()),
            instance,
            deltas: all,
        });
        self.seq += 1;
    }
}

struct Runner<'a> {
    net: &'a Net,
    compiled: Compiled,
    state: RunState,
    rng: ChaCha12Rng,
    policy: ConflictPolicy,
    horizon: f64,
    recorder: Recorder,
    trajectory: Trajectory,
    next_sample: f64,
    sample_interval: f64,
    /// Tracks which transitions are currently reported as inhibited so the
    /// onset event is emitted once per blockage.
    inhibited_flag: Vec<bool>,
}

impl<'a> Runner<'a> {
    fn record_sample(&mut self) {
        let point = TrajectoryPoint {
            time: self.state.clock,
            tokens: self.state.tokens.clone(),
            levels: self.state.levels.clone(),
        };
        if let Some(last) = self.trajectory.points.last() {
            if last.time == point.time {
                return;
            }
        }
        self.trajectory.points.push(point);
    }

    fn token_deltas(&self, changes: &[(usize, i64)]) -> Vec<Delta> {
        changes
            .iter()
            .map(|&(p, change)| Delta::Tokens {
                place: self.compiled.place_ids[p].clone(),
                change,
                after: self.state.tokens[p],
            })
            .collect()
    }

    fn goal_met(&self) -> bool {
        goal_met(self.net, &self.compiled, &self.state)
    }

    /// Suspends running instances whose inhibitor places are populated and
    /// resumes suspended ones whose inhibitor places emptied. Called after
    /// every token change.
    fn suspension_sweep(&mut self) {
        for i in 0..self.state.active.len() {
            let inst = &self.state.active[i];
            let t = &self.compiled.transitions[inst.transition];
            let blocked = inhibited(t, &self.state.tokens);
            let (instance, transition) = (inst.instance, inst.transition);
            if blocked && !inst.suspended {
                self.state.active[i].suspended = true;
                self.recorder.emit(
                    &self.compiled,
                    &self.state,
                    EventKind::Suspend,
                    Some(transition),
                    Some(instance),
                    Vec::new(),
                );
            } else if !blocked && inst.suspended {
                self.state.active[i].suspended = false;
                self.recorder.emit(
                    &self.compiled,
                    &self.state,
                    EventKind::Resume,
                    Some(transition),
                    Some(instance),
                    Vec::new(),
                );
            }
        }
    }

    /// Emits `inhibited` onset events for transitions that are token-ready
    /// but suppressed by an inhibitor place.
    fn note_inhibited(&mut self) {
        for idx in 0..self.compiled.transitions.len() {
            let t = &self.compiled.transitions[idx];
            let blocked = inhibited(t, &self.state.tokens)
                && token_capacity(t, &self.state.tokens) >= 1
                && instance_headroom(t, &self.state.active, idx) >= 1;
            if blocked && !self.inhibited_flag[idx] {
                self.inhibited_flag[idx] = true;
                self.recorder.emit(
                    &self.compiled,
                    &self.state,
                    EventKind::Inhibited,
                    Some(idx),
                    None,
                    Vec::new(),
                );
            } else if !blocked {
                self.inhibited_flag[idx] = false;
            }
        }
    }

    /// Consumes inputs, samples nothing (duration supplied), and registers
    /// the instance.
    fn fire(&mut self, idx: usize, duration: f64) {
        let t = &self.compiled.transitions[idx];
        let mut changes = Vec::new();
        for &(p, w) in &t.inputs {
            self.state.tokens[p] -= w;
            changes.push((p, -(w as i64)));
        }
        let instance = self.state.next_instance;
        self.state.next_instance += 1;
        self.state.active.push(Instance {
            transition: idx,
            instance,
            start_time: self.state.clock,
            sampled_duration: duration,
            elapsed: 0.0,
            suspended: false,
        });
        let deltas = self.token_deltas(&changes);
        self.recorder.emit(
            &self.compiled,
            &self.state,
            EventKind::Fire,
            Some(idx),
            Some(instance),
            deltas,
        );
        self.suspension_sweep();
    }

    /// Deposits outputs and removes the instance.
    fn complete(&mut self, position: usize) {
        let inst = self.state.active.remove(position);
        let t = &self.compiled.transitions[inst.transition];
        let mut changes = Vec::new();
        for &(p, w) in &t.outputs {
            self.state.tokens[p] += w;
            changes.push((p, w as i64));
        }
        let deltas = self.token_deltas(&changes);
        self.recorder.emit(
            &self.compiled,
            &self.state,
            EventKind::Complete,
            Some(inst.transition),
            Some(inst.instance),
            deltas,
        );
        self.suspension_sweep();
    }

    /// Advances the clock by `dt`, applying resource rates of running
    /// instances and accumulating drift for the next event's deltas.
    fn advance(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        for i in 0..self.state.active.len() {
            if self.state.active[i].suspended {
                continue;
            }
            let idx = self.state.active[i].transition;
            self.state.active[i].elapsed += dt;
            for &(r, rate) in &self.compiled.transitions[idx].rates {
                let change = rate * dt;
                self.state.levels[r] += change;
                self.recorder.pending_drift[r] += change;
            }
        }
        // Snap levels that drifted within tolerance of a bound back onto it.
        for (r, level) in self.state.levels.iter_mut().enumerate() {
            let (min, max) = self.compiled.resource_bounds[r];
            if (*level - min).abs() <= LEVEL_EPS {
                *level = min;
            } else if max.is_finite() && (*level - max).abs() <= LEVEL_EPS {
                *level = max;
            }
        }
        self.state.clock += dt;
    }

    /// Earliest time (relative to now) at which a resource would cross a
    /// bound under the current running rates, if any. Only reachable after
    /// suspensions shifted the admission projection.
    fn next_bound_crossing(&self) -> Option<f64> {
        let mut slopes = vec![0.0; self.compiled.resource_ids.len()];
        let mut earliest_end = f64::INFINITY;
        for inst in self.state.active.iter().filter(|i| !i.suspended) {
            earliest_end = earliest_end.min(inst.remaining());
            for &(r, rate) in &self.compiled.transitions[inst.transition].rates {
                slopes[r] += rate;
            }
        }
        // Slopes hold only until the next completion; later segments are
        // evaluated on the next pass.
        let mut crossing: Option<f64> = None;
        for (r, &slope) in slopes.iter().enumerate() {
            let level = self.state.levels[r];
            let (min, max) = self.compiled.resource_bounds[r];
            let hit = if slope < 0.0 {
                (level - min) / -slope
            } else if slope > 0.0 && max.is_finite() {
                (max - level) / slope
            } else {
                continue;
            };
            if hit < earliest_end - LEVEL_EPS {
                crossing = Some(crossing.map_or(hit, |c: f64| c.min(hit)));
            }
        }
        crossing.map(|c| c.max(0.0))
    }

    fn terminal(&mut self, kind: EventKind, outcome: Outcome) -> Outcome {
        self.recorder.emit(&self.compiled, &self.state, kind, None, None, Vec::new());
        outcome
    }
}

/// Runs the net to termination and returns the full trace.
///
/// The loop alternates decision points (fire every enabled transition,
/// one instance per selection) with clock advances to the next completion,
/// trajectory sample, or deadline. Consumption happens at firing, deposits
/// at completion; completions at an instant are processed before new
/// firings.
pub fn simulate(net: &Net, config: &SimConfig) -> Result<Trace, SimError> {
    config.validate()?;
    let report = validate_net(net);
    if !report.is_valid() {
        return Err(SimError::InvalidNet(report));
    }

    let compiled = Compiled::new(net);
    let state = RunState::from_net(&compiled, net);
    let policy = config.policy_override.unwrap_or(net.policy);
    let horizon = effective_horizon(net, config);
    let recorder = Recorder::new(compiled.resource_ids.len(), config.max_events);
    let trajectory = Trajectory {
        place_ids: compiled.place_ids.clone(),
        resource_ids: compiled.resource_ids.clone(),
        points: Vec::new(),
    };
    let inhibited_flag = vec![false; compiled.transitions.len()];

    let mut runner = Runner {
        net,
        compiled,
        state,
        rng: ChaCha12Rng::seed_from_u64(config.seed),
        policy,
        horizon,
        recorder,
        trajectory,
        next_sample: 0.0,
        sample_interval: config.trajectory_sample_interval,
        inhibited_flag,
    };
    runner.record_sample();
    runner.next_sample = runner.sample_interval;

    let outcome = run_loop(&mut runner);

    runner.record_sample();
    let end = runner.state.to_sim_state(&runner.compiled);
    let final_state = FinalState {
        tokens: end.tokens,
        resources: end.resources,
        active_instances: end.active.len(),
    };
    Ok(Trace {
        seed: config.seed,
        events: runner.recorder.events,
        trajectory: runner.trajectory,
        outcome,
        final_time: runner.state.clock,
        final_state,
        truncated: runner.recorder.truncated,
    })
}

fn run_loop(runner: &mut Runner) -> Outcome {
    if runner.goal_met() {
        return runner.terminal(EventKind::GoalReached, Outcome::Success);
    }

    loop {
        // --- Decision point: fire until nothing more is enabled. ---------
        // Transitions whose actual sampled duration failed the reservation
        // check are set aside until the next decision point; firing more
        // work never frees resources within the same instant.
        let mut rejected: BTreeSet<usize> = BTreeSet::new();
        loop {
            if runner.recorder.exhausted() {
                runner.recorder.truncated = true;
                return Outcome::Timeout;
            }
            runner.note_inhibited();
            let candidates: Vec<(String, u32)> = (0..runner.compiled.transitions.len())
                .filter(|idx| !rejected.contains(idx))
                .filter(|&idx| feasible_additional(&runner.compiled, &runner.state, idx) >= 1)
                .map(|idx| {
                    let t = &runner.compiled.transitions[idx];
                    (t.id.clone(), t.priority)
                })
                .collect();
            if candidates.is_empty() {
                break;
            }
            let mut indices: Vec<usize> = (0..candidates.len()).collect();
            if runner.policy == ConflictPolicy::PriorityProportional
                && candidates.iter().any(|(_, priority)| *priority > 0)
            {
                indices.retain(|&i| candidates[i].1 > 0);
            }
            let Some(pick) = select_index(&candidates, &indices, runner.policy, &mut runner.rng)
            else {
                break;
            };
            let idx = runner
                .compiled
                .transition_index(&candidates[pick].0)
                .expect("candidate exists");
            let duration = sample_duration(&runner.compiled.transitions[idx].duration, &mut runner.rng);
            if !feasible_for(&runner.compiled, &runner.state, idx, &[duration]) {
                rejected.insert(idx);
                continue;
            }
            runner.fire(idx, duration);
            if runner.goal_met() {
                return runner.terminal(EventKind::GoalReached, Outcome::Success);
            }
        }

        // --- Termination checks at the quiescent decision point. ----------
        let any_running = runner.state.active.iter().any(|i| !i.suspended);
        if !any_running {
            // Nothing can ever change state again: no running instance and
            // no admissible firing (suspended instances stay frozen because
            // their inhibitor places can no longer empty).
            let resource_blocked = !rejected.is_empty()
                || runner.compiled.transitions.iter().enumerate().any(|(idx, t)| {
                    !inhibited(t, &runner.state.tokens)
                        && token_capacity(t, &runner.state.tokens) >= 1
                        && instance_headroom(t, &runner.state.active, idx) >= 1
                });
            if resource_blocked {
                return runner.terminal(EventKind::ResourceExhausted, Outcome::ResourceFailure);
            }
            return runner.terminal(EventKind::Deadlock, Outcome::Deadlock);
        }

        // --- Advance to the next completion, sample tick, or horizon. -----
        let next_completion = runner
            .state
            .active
            .iter()
            .filter(|i| !i.suspended)
            .map(|i| i.remaining())
            .fold(f64::INFINITY, f64::min);
        let until_sample = runner.next_sample - runner.state.clock;
        let until_horizon = runner.horizon - runner.state.clock;
        let mut dt = next_completion.min(until_sample).min(until_horizon).max(0.0);

        let mut crossed = false;
        if let Some(crossing) = runner.next_bound_crossing() {
            if crossing < dt - LEVEL_EPS {
                dt = crossing;
                crossed = true;
            }
        }

        runner.advance(dt);

        if crossed {
            // A suspension shifted the admitted projection and a resource
            // ran against its bound with the remaining work unfinishable.
            return runner.terminal(EventKind::ResourceExhausted, Outcome::ResourceFailure);
        }

        if runner.state.clock >= runner.next_sample - LEVEL_EPS {
            runner.record_sample();
            runner.next_sample += runner.sample_interval;
        }

        // --- Completions due now, ordered by instance id. -----------------
        loop {
            let due = runner
                .state
                .active
                .iter()
                .enumerate()
                .filter(|(_, i)| !i.suspended && i.remaining() <= LEVEL_EPS)
                .min_by_key(|(_, i)| i.instance)
                .map(|(pos, _)| pos);
            let Some(pos) = due else {
                break;
            };
            if runner.recorder.exhausted() {
                runner.recorder.truncated = true;
                return Outcome::Timeout;
            }
            runner.complete(pos);
            if runner.goal_met() {
                return runner.terminal(EventKind::GoalReached, Outcome::Success);
            }
        }

        if runner.state.clock >= runner.horizon - LEVEL_EPS {
            return runner.terminal(EventKind::DeadlineExceeded, Outcome::Timeout);
        }
    }
}
