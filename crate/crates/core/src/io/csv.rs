//! CSV exports: comma-delimited, LF line endings, header row, RFC-style
//! quoting. Pure functions of their inputs.

use crate::mc::{BatchResult, CorrelationMatrix};
use crate::sim::{Delta, Trace};

use super::{csv_f64, csv_field};

/// One row per event. Events carrying several deltas join their targets
/// and changes with `;` in the last two columns.
pub fn events_csv(trace: &Trace) -> String {
    let mut out = String::from("time,kind,transition,instance,place_or_resource,delta\n");
    for event in &trace.events {
        let kind = serde_json::to_value(event.kind)
            .expect("plain enum")
            .as_str()
            .expect("kind serializes to a string")
            .to_string();
        let mut targets = Vec::new();
        let mut changes = Vec::new();
        for delta in &event.deltas {
            match delta {
                Delta::Tokens { place, change, .. } => {
                    targets.push(place.clone());
                    changes.push(change.to_string());
                }
                Delta::Resource { resource, change, .. } => {
                    targets.push(resource.clone());
                    changes.push(csv_f64(*change));
                }
            }
        }
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_f64(event.time),
            kind,
            csv_field(event.transition.as_deref().unwrap_or("")),
            event.instance.map(|i| i.to_string()).unwrap_or_default(),
            csv_field(&targets.join(";")),
            csv_field(&changes.join(";")),
        ));
    }
    out
}

/// Wide format: one row per sample, one column per place and resource.
pub fn trajectories_csv(trace: &Trace) -> String {
    let mut header = vec!["time".to_string()];
    header.extend(trace.trajectory.place_ids.iter().map(|id| csv_field(id)));
    header.extend(trace.trajectory.resource_ids.iter().map(|id| csv_field(id)));
    let mut out = header.join(",");
    out.push('\n');
    for point in &trace.trajectory.points {
        let mut row = vec![csv_f64(point.time)];
        row.extend(point.tokens.iter().map(|t| t.to_string()));
        row.extend(point.levels.iter().map(|l| csv_f64(*l)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One row per run: index, sampled inputs, outcome, final time, goal flag,
/// then final resource levels.
pub fn batch_csv(batch: &BatchResult) -> String {
    let input_labels = batch.input_labels();
    let resource_ids: Vec<String> = batch
        .runs
        .first()
        .map(|r| r.final_resources.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec!["index".to_string()];
    header.extend(input_labels.iter().map(|l| csv_field(l)));
    header.extend(["outcome".to_string(), "final_time".to_string(), "goal".to_string()]);
    header.extend(resource_ids.iter().map(|id| csv_field(&format!("final_level.{id}"))));
    let mut out = header.join(",");
    out.push('\n');
    for run in &batch.runs {
        let mut row = vec![run.index.to_string()];
        for label in &input_labels {
            let value = run
                .inputs
                .iter()
                .find(|(l, _)| l == label)
                .map(|&(_, v)| csv_f64(v))
                .unwrap_or_default();
            row.push(value);
        }
        row.push(run.outcome.as_str().to_string());
        row.push(csv_f64(run.final_time));
        row.push(if run.goal_reached { "1" } else { "0" }.to_string());
        for id in &resource_ids {
            row.push(run.final_resources.get(id).map(|&v| csv_f64(v)).unwrap_or_default());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Labeled square matrix; undefined (zero-variance) cells stay empty.
pub fn matrix_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::new();
    let mut header = vec![String::new()];
    header.extend(matrix.labels.iter().map(|l| csv_field(l)));
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, label) in matrix.labels.iter().enumerate() {
        let mut row = vec![csv_field(label)];
        for j in 0..matrix.labels.len() {
            row.push(matrix.values[i][j].map(csv_f64).unwrap_or_default());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Two columns: redundancy count and mission availability.
pub fn sweep_csv(curve: &[(u32, f64)]) -> String {
    let mut out = String::from("count,availability\n");
    for &(count, availability) in curve {
        out.push_str(&format!("{count},{}\n", csv_f64(availability)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::correlation_from_columns;
    use crate::model::{DurationDistribution, GoalPredicate, Net, Place, Transition};
    use crate::sim::{simulate, SimConfig};

    fn chain_trace() -> Trace {
        let net = Net {
            places: vec![Place::new("p1", 1), Place::new("p2", 0)],
            transitions: vec![Transition::new("t", DurationDistribution::constant(2.0))
                .with_input("p1", 1)
                .with_output("p2", 1)],
            goal: Some(GoalPredicate::tokens_at_least("p2", 1)),
            ..Default::default()
        };
        simulate(&net, &SimConfig::with_seed(7)).unwrap()
    }

    #[test]
    fn empty_trace_yields_header_only() {
        let mut trace = chain_trace();
        trace.events.clear();
        trace.trajectory.points.clear();
        assert_eq!(
            events_csv(&trace),
            "time,kind,transition,instance,place_or_resource,delta\n"
        );
        let trajectories = trajectories_csv(&trace);
        assert_eq!(trajectories.lines().collect::<Vec<_>>(), vec!["time,p1,p2"]);
    }

    #[test]
    fn event_rows_follow_documented_order() {
        let trace = chain_trace();
        let csv = events_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,kind,transition,instance,place_or_resource,delta");
        assert_eq!(lines[1], "0,fire,t,0,p1,-1");
        assert_eq!(lines[2], "2,complete,t,0,p2,1");
    }

    #[test]
    fn exports_are_deterministic() {
        let a = chain_trace();
        let b = chain_trace();
        assert_eq!(events_csv(&a), events_csv(&b));
        assert_eq!(trajectories_csv(&a), trajectories_csv(&b));
    }

    #[test]
    fn matrix_csv_single_cell_and_symmetry() {
        let single = correlation_from_columns(
            vec!["x".into()],
            vec![vec![1.0, 2.0, 3.0]],
            crate::mc::CorrelationMethod::Pearson,
        );
        assert_eq!(matrix_csv(&single), ",x\nx,1\n");

        let m = correlation_from_columns(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![1.0, 2.0, 3.0, 4.0],
                vec![2.0, 1.0, 4.0, 3.0],
                vec![4.0, 3.0, 2.0, 1.0],
            ],
            crate::mc::CorrelationMethod::Pearson,
        );
        let csv = matrix_csv(&m);
        let grid: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
        for i in 1..grid.len() {
            for j in 1..grid[i].len() {
                assert_eq!(grid[i][j], grid[j][i], "transpose-equal at {i},{j}");
            }
        }
    }
}
