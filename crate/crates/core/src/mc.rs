//! Monte Carlo batches: sample net parameters, run independent
//! simulations, and aggregate outcomes into statistics and correlation
//! matrices.
//!
//! Reproducibility comes from per-run rng streams derived from the master
//! seed; results never depend on execution order, so batches may run on a
//! thread pool.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{DurationDistribution, Net};
use crate::sim::{simulate, Outcome, SimConfig, SimError};
use crate::validate::validate_net;

/// What a sampling entry overwrites in the template net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleTarget {
    InitialTokens { place: String },
    InitialLevel { resource: String },
    /// `param` is one of `value` (constant), `mean`/`std_dev` (normal),
    /// `low`/`high` (uniform).
    DurationParam { transition: String, param: String },
    Rate { transition: String, resource: String },
    Priority { transition: String },
    MaxInstances { transition: String },
}

impl SampleTarget {
    /// Record label, e.g. `initial_tokens.robots`.
    pub fn label(&self) -> String {
        match self {
            SampleTarget::InitialTokens { place } => format!("initial_tokens.{place}"),
            SampleTarget::InitialLevel { resource } => format!("initial_level.{resource}"),
            SampleTarget::DurationParam { transition, param } => {
                format!("duration.{transition}.{param}")
            }
            SampleTarget::Rate { transition, resource } => format!("rate.{transition}.{resource}"),
            SampleTarget::Priority { transition } => format!("priority.{transition}"),
            SampleTarget::MaxInstances { transition } => format!("max_instances.{transition}"),
        }
    }

    fn is_integer(&self) -> bool {
        matches!(
            self,
            SampleTarget::InitialTokens { .. }
                | SampleTarget::Priority { .. }
                | SampleTarget::MaxInstances { .. }
        )
    }

    /// Lower bound a sampled integer is floored at.
    fn integer_floor(&self) -> i64 {
        match self {
            SampleTarget::MaxInstances { .. } => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleDistribution {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
    IntegerUniform { low: i64, high: i64 },
}

impl SampleDistribution {
    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            SampleDistribution::Constant { value } => value,
            SampleDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            SampleDistribution::Normal { mean, std_dev } => {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                mean + std_dev * z
            }
            SampleDistribution::IntegerUniform { low, high } => {
                rng.random_range(low..=high) as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub target: SampleTarget,
    pub distribution: SampleDistribution,
}

/// Declared input distributions for a batch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default)]
    pub entries: Vec<SampleEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("sampling target does not resolve: {0}")]
    UnresolvedTarget(String),
    #[error("run {index} failed: {source}")]
    RunFailed {
        index: usize,
        #[source]
        source: SimError,
    },
    #[error("batch is empty")]
    EmptyBatch,
}

/// Rounds half away from zero, then floors at the target's lower bound.
fn to_integer(value: f64, floor: i64) -> i64 {
    (value.round() as i64).max(floor)
}

/// Substitutes one sampled value into the net and returns the value as
/// recorded (integers post-rounding).
fn apply_sample(net: &mut Net, entry: &SampleEntry, raw: f64) -> Result<f64, McError> {
    let label = entry.target.label();
    let missing = || McError::UnresolvedTarget(label.clone());
    let recorded = if entry.target.is_integer() {
        to_integer(raw, entry.target.integer_floor()) as f64
    } else {
        raw
    };
    match &entry.target {
        SampleTarget::InitialTokens { place } => {
            let p = net.places.iter_mut().find(|p| p.id == *place).ok_or_else(missing)?;
            p.initial_tokens = recorded as u64;
        }
        SampleTarget::InitialLevel { resource } => {
            let r = net.resources.iter_mut().find(|r| r.id == *resource).ok_or_else(missing)?;
            r.initial_level = recorded;
        }
        SampleTarget::DurationParam { transition, param } => {
            let t =
                net.transitions.iter_mut().find(|t| t.id == *transition).ok_or_else(missing)?;
            let slot = match (&mut t.duration, param.as_str()) {
                (DurationDistribution::Constant { value }, "value") => value,
                (DurationDistribution::Normal { mean, .. }, "mean") => mean,
                (DurationDistribution::Normal { std_dev, .. }, "std_dev") => std_dev,
                (DurationDistribution::Uniform { low, .. }, "low") => low,
                (DurationDistribution::Uniform { high, .. }, "high") => high,
                _ => return Err(missing()),
            };
            *slot = recorded;
        }
        SampleTarget::Rate { transition, resource } => {
            let t =
                net.transitions.iter_mut().find(|t| t.id == *transition).ok_or_else(missing)?;
            let r =
                t.rates.iter_mut().find(|r| r.resource == *resource).ok_or_else(missing)?;
            r.rate = recorded;
        }
        SampleTarget::Priority { transition } => {
            let t =
                net.transitions.iter_mut().find(|t| t.id == *transition).ok_or_else(missing)?;
            t.priority = recorded as u32;
        }
        SampleTarget::MaxInstances { transition } => {
            let t =
                net.transitions.iter_mut().find(|t| t.id == *transition).ok_or_else(missing)?;
            t.max_instances = Some(recorded as u64);
        }
    }
    Ok(recorded)
}

/// Concrete net drawn from the template, plus the exact values used.
/// The template is never modified.
pub fn instantiate(
    template: &Net,
    spec: &SamplingSpec,
    rng: &mut impl Rng,
) -> Result<(Net, Vec<(String, f64)>), McError> {
    let mut net = template.clone();
    let mut record = Vec::with_capacity(spec.entries.len());
    for entry in &spec.entries {
        let raw = entry.distribution.draw(rng);
        let recorded = apply_sample(&mut net, entry, raw)?;
        record.push((entry.target.label(), recorded));
    }
    Ok((net, record))
}

/// Outcome of one batch run with its full sampled-input vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub inputs: Vec<(String, f64)>,
    pub outcome: Outcome,
    pub final_time: f64,
    pub final_resources: BTreeMap<String, f64>,
    pub goal_reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub master_seed: u64,
    pub n_runs: usize,
    pub runs: Vec<RunRecord>,
}

impl BatchResult {
    /// Numeric value of a named variable for one run. Inputs use their
    /// record labels; outputs are `final_time`, `goal` (0/1), and
    /// `final_level.<resource>`.
    pub fn variable(&self, run: &RunRecord, name: &str) -> Option<f64> {
        match name {
            "final_time" => Some(run.final_time),
            "goal" => Some(if run.goal_reached { 1.0 } else { 0.0 }),
            _ => {
                if let Some(resource) = name.strip_prefix("final_level.") {
                    return run.final_resources.get(resource).copied();
                }
                run.inputs.iter().find(|(label, _)| label == name).map(|&(_, v)| v)
            }
        }
    }

    pub fn input_labels(&self) -> Vec<String> {
        self.runs
            .first()
            .map(|r| r.inputs.iter().map(|(l, _)| l.clone()).collect())
            .unwrap_or_default()
    }
}

/// Independent rng stream for run `index` under the master seed.
pub fn run_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn execute_run(
    template: &Net,
    spec: &SamplingSpec,
    config: &SimConfig,
    master_seed: u64,
    index: usize,
) -> Result<RunRecord, McError> {
    let mut rng = run_rng(master_seed, index as u64);
    let (net, inputs) = instantiate(template, spec, &mut rng)?;
    let report = validate_net(&net);
    if !report.is_valid() {
        return Err(McError::RunFailed { index, source: SimError::InvalidNet(report) });
    }
    let run_config = SimConfig { seed: rng.random::<u64>(), ..config.clone() };
    let trace =
        simulate(&net, &run_config).map_err(|source| McError::RunFailed { index, source })?;
    Ok(RunRecord {
        index,
        inputs,
        outcome: trace.outcome,
        final_time: trace.final_time,
        final_resources: trace.final_state.resources,
        goal_reached: trace.outcome == Outcome::Success,
    })
}

/// Runs `n_runs` independent simulations on the current rayon pool.
/// Identical `(template, spec, n_runs, master_seed, config)` reproduce an
/// identical result regardless of worker count.
pub fn run_batch(
    template: &Net,
    spec: &SamplingSpec,
    n_runs: usize,
    master_seed: u64,
    config: &SimConfig,
) -> Result<BatchResult, McError> {
    let report = validate_net(template);
    // Templates may be invalid only in ways sampling repairs (e.g. an
    // initial level below minimum before the level is drawn); per-run
    // validation is authoritative. Structural reference errors abort here.
    if report.errors().any(|v| v.code.starts_with("unresolved")) {
        return Err(McError::RunFailed { index: 0, source: SimError::InvalidNet(report) });
    }
    let runs: Result<Vec<RunRecord>, McError> = (0..n_runs)
        .into_par_iter()
        .map(|index| execute_run(template, spec, config, master_seed, index))
        .collect();
    Ok(BatchResult { master_seed, n_runs, runs: runs? })
}

/// Aggregate statistics over a batch. Completion-time statistics cover
/// successful runs only unless `include_censored` was requested, in which
/// case non-success runs contribute their censoring time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_runs: usize,
    pub success_rate: f64,
    pub outcome_counts: BTreeMap<String, usize>,
    pub time_stats: Option<TimeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); 0 for a single run.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// Nearest-rank percentiles at 5/25/50/75/95.
    pub percentiles: Vec<(u8, f64)>,
}

/// Nearest-rank percentile over sorted data: the ceil(p/100 * n)-th value.
pub fn nearest_rank(sorted: &[f64], p: u8) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((f64::from(p) / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

fn time_stats(times: &[f64]) -> Option<TimeStats> {
    if times.is_empty() {
        return None;
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std_dev = if n > 1 {
        (sorted.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(TimeStats {
        count: n,
        mean,
        std_dev,
        min: sorted[0],
        max: sorted[n - 1],
        percentiles: [5u8, 25, 50, 75, 95].iter().map(|&p| (p, nearest_rank(&sorted, p))).collect(),
    })
}

pub fn summarize(batch: &BatchResult) -> Result<BatchSummary, McError> {
    summarize_with(batch, false)
}

pub fn summarize_with(batch: &BatchResult, include_censored: bool) -> Result<BatchSummary, McError> {
    if batch.runs.is_empty() {
        return Err(McError::EmptyBatch);
    }
    let successes = batch.runs.iter().filter(|r| r.goal_reached).count();
    let mut outcome_counts: BTreeMap<String, usize> = BTreeMap::new();
    for run in &batch.runs {
        *outcome_counts.entry(run.outcome.as_str().to_string()).or_insert(0) += 1;
    }
    let times: Vec<f64> = batch
        .runs
        .iter()
        .filter(|r| include_censored || r.goal_reached)
        .map(|r| r.final_time)
        .collect();
    Ok(BatchSummary {
        n_runs: batch.runs.len(),
        success_rate: successes as f64 / batch.runs.len() as f64,
        outcome_counts,
        time_stats: time_stats(&times),
    })
}

/// Pearson (or rank-transformed) correlation over named batch variables.
/// Cells involving a zero-variance variable are `None` (undefined), never 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major `labels x labels`; `None` marks undefined cells.
    pub values: Vec<Vec<Option<f64>>>,
    pub samples: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

/// Pearson coefficient; `None` when either column has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some((cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0))
}

/// Average ranks, with ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = mean_rank;
        }
        i = j + 1;
    }
    out
}

/// Builds the correlation matrix over per-sample columns.
pub fn correlation_from_columns(
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    method: CorrelationMethod,
) -> CorrelationMatrix {
    assert_eq!(labels.len(), columns.len());
    let samples = columns.first().map(Vec::len).unwrap_or(0);
    let columns: Vec<Vec<f64>> = match method {
        CorrelationMethod::Pearson => columns,
        CorrelationMethod::Spearman => columns.iter().map(|c| ranks(c)).collect(),
    };
    let n = labels.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        // Exact 1 on the diagonal whenever the variance is positive.
        values[i][i] = pearson(&columns[i], &columns[i]).map(|_| 1.0);
        for j in i + 1..n {
            let cell = pearson(&columns[i], &columns[j]);
            values[i][j] = cell;
            values[j][i] = cell;
        }
    }
    CorrelationMatrix { labels, values, samples }
}

/// Correlation matrix over the union of the named input and output
/// variables of a batch. Requires at least 3 runs.
pub fn correlation_matrix(
    batch: &BatchResult,
    inputs: &[String],
    outputs: &[String],
    method: CorrelationMethod,
) -> Result<CorrelationMatrix, McError> {
    if batch.runs.len() < 3 {
        return Err(McError::EmptyBatch);
    }
    let labels: Vec<String> = inputs.iter().chain(outputs).cloned().collect();
    let mut columns = Vec::with_capacity(labels.len());
    for label in &labels {
        let column: Option<Vec<f64>> =
            batch.runs.iter().map(|run| batch.variable(run, label)).collect();
        columns.push(column.ok_or_else(|| McError::UnresolvedTarget(label.clone()))?);
    }
    Ok(correlation_from_columns(labels, columns, method))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GoalPredicate, Place, Resource, Transition};

    fn chain_net() -> Net {
        Net {
            places: vec![Place::new("p1", 1), Place::new("p2", 0)],
            transitions: vec![Transition::new("t", DurationDistribution::constant(2.0))
                .with_input("p1", 1)
                .with_output("p2", 1)],
            goal: Some(GoalPredicate::tokens_at_least("p2", 1)),
            ..Default::default()
        }
    }

    #[test]
    fn empty_spec_is_identity() {
        let net = chain_net();
        let mut rng = run_rng(0, 0);
        let (instance, record) = instantiate(&net, &SamplingSpec::default(), &mut rng).unwrap();
        assert_eq!(instance, net);
        assert!(record.is_empty());
    }

    #[test]
    fn integer_tokens_draw_within_range_and_logged() {
        let mut net = chain_net();
        net.places[0].initial_tokens = 0;
        let spec = SamplingSpec {
            entries: vec![SampleEntry {
                target: SampleTarget::InitialTokens { place: "p1".into() },
                distribution: SampleDistribution::IntegerUniform { low: 1, high: 4 },
            }],
        };
        let mut rng = run_rng(7, 0);
        for _ in 0..100 {
            let (instance, record) = instantiate(&net, &spec, &mut rng).unwrap();
            let tokens = instance.places[0].initial_tokens;
            assert!((1..=4).contains(&tokens));
            assert_eq!(record, vec![("initial_tokens.p1".to_string(), tokens as f64)]);
        }
    }

    #[test]
    fn uniform_level_mean_matches_law_of_large_numbers() {
        let mut net = chain_net();
        net.resources.push(Resource::new("e", 60.0, 0.0, None));
        let spec = SamplingSpec {
            entries: vec![SampleEntry {
                target: SampleTarget::InitialLevel { resource: "e".into() },
                distribution: SampleDistribution::Uniform { low: 50.0, high: 100.0 },
            }],
        };
        let mut rng = run_rng(3, 0);
        let mut sum = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let (instance, _) = instantiate(&net, &spec, &mut rng).unwrap();
            sum += instance.resources[0].initial_level;
        }
        let mean = sum / draws as f64;
        assert!((mean - 75.0).abs() < 1.0, "mean {mean}");
    }

    #[test]
    fn rounding_is_half_away_from_zero_with_floor() {
        assert_eq!(to_integer(2.5, 0), 3);
        assert_eq!(to_integer(2.4, 0), 2);
        assert_eq!(to_integer(-0.6, 0), 0);
        assert_eq!(to_integer(0.2, 1), 1);
    }

    #[test]
    fn unresolved_target_is_reported() {
        let spec = SamplingSpec {
            entries: vec![SampleEntry {
                target: SampleTarget::InitialTokens { place: "missing".into() },
                distribution: SampleDistribution::Constant { value: 1.0 },
            }],
        };
        let mut rng = run_rng(0, 0);
        assert!(matches!(
            instantiate(&chain_net(), &spec, &mut rng),
            Err(McError::UnresolvedTarget(_))
        ));
    }

    #[test]
    fn deterministic_net_yields_identical_outcomes() {
        let batch = run_batch(
            &chain_net(),
            &SamplingSpec::default(),
            100,
            5,
            &SimConfig::default(),
        )
        .unwrap();
        assert!(batch.runs.iter().all(|r| r.goal_reached && r.final_time == 2.0));
        let summary = summarize(&batch).unwrap();
        assert_eq!(summary.success_rate, 1.0);
        let stats = summary.time_stats.unwrap();
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.std_dev, 0.0);
    }

    #[test]
    fn batch_is_reproducible() {
        let net = chain_net();
        let spec = SamplingSpec {
            entries: vec![SampleEntry {
                target: SampleTarget::DurationParam { transition: "t".into(), param: "value".into() },
                distribution: SampleDistribution::Uniform { low: 1.0, high: 3.0 },
            }],
        };
        let a = run_batch(&net, &spec, 50, 11, &SimConfig::default()).unwrap();
        let b = run_batch(&net, &spec, 50, 11, &SimConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = run_batch(&net, &spec, 50, 12, &SimConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    fn bernoulli_net() -> Net {
        Net {
            places: vec![Place::new("start", 1), Place::new("win", 0), Place::new("lose", 0)],
            transitions: vec![
                Transition::new("a", DurationDistribution::constant(1.0))
                    .with_input("start", 1)
                    .with_output("win", 1)
                    .with_priority(3),
                Transition::new("b", DurationDistribution::constant(1.0))
                    .with_input("start", 1)
                    .with_output("lose", 1)
                    .with_priority(1),
            ],
            goal: Some(GoalPredicate::tokens_at_least("win", 1)),
            policy: crate::model::ConflictPolicy::PriorityProportional,
            ..Default::default()
        }
    }

    #[test]
    fn bernoulli_success_rate_matches_closed_form() {
        let batch = run_batch(
            &bernoulli_net(),
            &SamplingSpec::default(),
            10_000,
            2024,
            &SimConfig::default(),
        )
        .unwrap();
        let summary = summarize(&batch).unwrap();
        assert!(
            (summary.success_rate - 0.75).abs() <= 0.01,
            "success rate {}",
            summary.success_rate
        );
    }

    #[test]
    fn summarize_counts_outcomes() {
        let mut batch = run_batch(
            &chain_net(),
            &SamplingSpec::default(),
            4,
            0,
            &SimConfig::default(),
        )
        .unwrap();
        batch.runs[1].outcome = Outcome::Timeout;
        batch.runs[1].goal_reached = false;
        batch.runs[3].outcome = Outcome::Deadlock;
        batch.runs[3].goal_reached = false;
        let summary = summarize(&batch).unwrap();
        assert_eq!(summary.success_rate, 0.5);
        assert_eq!(summary.outcome_counts["success"], 2);
        assert_eq!(summary.outcome_counts["timeout"], 1);
        assert_eq!(summary.outcome_counts["deadlock"], 1);
    }

    #[test]
    fn perfect_linear_relation_has_unit_coefficient() {
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert_eq!(pearson(&xs, &ys), Some(1.0));
        let neg: Vec<f64> = xs.iter().map(|x| -0.5 * x + 3.0).collect();
        assert_eq!(pearson(&xs, &neg), Some(-1.0));
    }

    #[test]
    fn independent_variables_have_near_zero_correlation() {
        let mut rng = run_rng(99, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let r = pearson(&xs, &ys).unwrap();
        assert!(r.abs() < 0.05, "r = {r}");
    }

    #[test]
    fn zero_variance_cells_are_undefined() {
        let matrix = correlation_from_columns(
            vec!["x".into(), "const".into()],
            vec![vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]],
            CorrelationMethod::Pearson,
        );
        assert_eq!(matrix.get("x", "x"), Some(1.0));
        assert_eq!(matrix.get("const", "const"), None);
        assert_eq!(matrix.get("x", "const"), None);
    }

    #[test]
    fn matrix_is_symmetric_over_batch_variables() {
        let net = chain_net();
        let spec = SamplingSpec {
            entries: vec![SampleEntry {
                target: SampleTarget::DurationParam { transition: "t".into(), param: "value".into() },
                distribution: SampleDistribution::Uniform { low: 1.0, high: 3.0 },
            }],
        };
        let batch = run_batch(&net, &spec, 200, 8, &SimConfig::default()).unwrap();
        let matrix = correlation_matrix(
            &batch,
            &batch.input_labels(),
            &["final_time".to_string(), "goal".to_string()],
            CorrelationMethod::Pearson,
        )
        .unwrap();
        for i in 0..matrix.labels.len() {
            for j in 0..matrix.labels.len() {
                assert_eq!(matrix.values[i][j], matrix.values[j][i]);
            }
        }
        // Duration feeds final_time one-to-one here.
        let r = matrix.get("duration.t.value", "final_time").unwrap();
        assert!(r > 0.999, "r = {r}");
    }

    #[test]
    fn spearman_is_invariant_under_monotone_transform() {
        let xs: Vec<f64> = (1..=50).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let matrix = correlation_from_columns(
            vec!["x".into(), "y".into()],
            vec![xs, ys],
            CorrelationMethod::Spearman,
        );
        assert_eq!(matrix.get("x", "y"), Some(1.0));
    }

    #[test]
    fn nearest_rank_percentiles() {
        let sorted = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&sorted, 50), 2.0);
        assert_eq!(nearest_rank(&sorted, 75), 3.0);
        assert_eq!(nearest_rank(&sorted, 95), 4.0);
        assert_eq!(nearest_rank(&sorted, 5), 1.0);
    }
}
