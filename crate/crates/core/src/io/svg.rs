//! Static SVG renderings: transition timelines and correlation heatmaps.
//! No scripting, no external assets, deterministic output.

use std::collections::BTreeMap;

use crate::mc::CorrelationMatrix;
use crate::sim::{EventKind, Trace};

const RUNNING_FILL: &str = "#4caf50";
const SUSPENDED_FILL: &str = "#9e9e9e";
const AXIS_COLOR: &str = "#444444";

fn fmt(v: f64) -> String {
    format!("{:.2}", v)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Bar {
    instance: u64,
    start: f64,
    end: f64,
    /// Suspension windows inside [start, end].
    gaps: Vec<(f64, f64)>,
    row: usize,
}

/// One horizontal lane per transition; one bar per instance, stacked when
/// concurrent. Running segments are green, suspended segments gray;
/// inhibition onsets show as gray ticks.
pub fn timeline_svg(trace: &Trace) -> String {
    // Gather per-instance lifecycles keyed by transition.
    let mut bars: BTreeMap<String, Vec<Bar>> = BTreeMap::new();
    let mut open: BTreeMap<(String, u64), (f64, Vec<(f64, f64)>, Option<f64>)> = BTreeMap::new();
    let mut inhibit_marks: Vec<(String, f64)> = Vec::new();
    for event in &trace.events {
        let Some(transition) = event.transition.clone() else { continue };
        match event.kind {
            EventKind::Fire => {
                let instance = event.instance.unwrap_or(0);
                open.insert((transition, instance), (event.time, Vec::new(), None));
            }
            EventKind::Suspend => {
                if let Some(entry) = open.get_mut(&(transition, event.instance.unwrap_or(0))) {
                    entry.2 = Some(event.time);
                }
            }
            EventKind::Resume => {
                if let Some(entry) = open.get_mut(&(transition, event.instance.unwrap_or(0))) {
                    if let Some(since) = entry.2.take() {
                        entry.1.push((since, event.time));
                    }
                }
            }
            EventKind::Complete => {
                let key = (transition, event.instance.unwrap_or(0));
                if let Some((start, mut gaps, suspended_since)) = open.remove(&key) {
                    if let Some(since) = suspended_since {
                        gaps.push((since, event.time));
                    }
                    bars.entry(key.0).or_default().push(Bar {
                        instance: key.1,
                        start,
                        end: event.time,
                        gaps,
                        row: 0,
                    });
                }
            }
            EventKind::Inhibited => inhibit_marks.push((transition, event.time)),
            _ => {}
        }
    }
    // Instances still in flight at the end of the run.
    for ((transition, instance), (start, mut gaps, suspended_since)) in open {
        if let Some(since) = suspended_since {
            gaps.push((since, trace.final_time));
        }
        bars.entry(transition).or_default().push(Bar {
            instance,
            start,
            end: trace.final_time,
            gaps,
            row: 0,
        });
    }

    // Stack overlapping instances inside each lane.
    let mut lane_rows: BTreeMap<String, usize> = BTreeMap::new();
    for (transition, lane) in bars.iter_mut() {
        lane.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap().then(a.instance.cmp(&b.instance)));
        let mut row_ends: Vec<f64> = Vec::new();
        for bar in lane.iter_mut() {
            let row = row_ends.iter().position(|&end| end <= bar.start);
            match row {
                Some(r) => {
                    bar.row = r;
                    row_ends[r] = bar.end;
                }
                None => {
                    bar.row = row_ends.len();
                    row_ends.push(bar.end);
                }
            }
        }
        lane_rows.insert(transition.clone(), row_ends.len().max(1));
    }
    for (transition, _) in &inhibit_marks {
        lane_rows.entry(transition.clone()).or_insert(1);
    }

    let t_max = trace.final_time.max(1e-9);
    let label_w = 150.0;
    let plot_w = 640.0;
    let bar_h = 14.0;
    let row_gap = 3.0;
    let lane_pad = 8.0;
    let top = 28.0;
    let x_of = |t: f64| label_w + t / t_max * plot_w;

    let mut lane_tops: BTreeMap<String, f64> = BTreeMap::new();
    let mut y = top;
    for (transition, rows) in &lane_rows {
        lane_tops.insert(transition.clone(), y);
        y += *rows as f64 * (bar_h + row_gap) + lane_pad;
    }
    let height = y + 30.0;
    let width = label_w + plot_w + 20.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         font-family=\"monospace\" font-size=\"11\">\n",
        fmt(width),
        fmt(height)
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"16\" fill=\"{AXIS_COLOR}\">outcome: {} at t={}</text>\n",
        fmt(label_w),
        trace.outcome.as_str(),
        fmt(trace.final_time)
    ));

    // Time axis with ten ticks.
    let axis_y = height - 18.0;
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{AXIS_COLOR}\"/>\n",
        fmt(label_w),
        fmt(axis_y),
        fmt(label_w + plot_w),
        fmt(axis_y)
    ));
    for i in 0..=10 {
        let t = t_max * f64::from(i) / 10.0;
        let x = x_of(t);
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{AXIS_COLOR}\"/>\n",
            fmt(x),
            fmt(axis_y),
            fmt(axis_y + 4.0)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" fill=\"{AXIS_COLOR}\" text-anchor=\"middle\">{}</text>\n",
            fmt(x),
            fmt(axis_y + 14.0),
            fmt(t)
        ));
    }

    for (transition, lane) in &bars {
        let lane_top = lane_tops[transition];
        for bar in lane {
            let y0 = lane_top + bar.row as f64 * (bar_h + row_gap);
            // Running segments between suspension gaps.
            let mut cursor = bar.start;
            let mut segments: Vec<(f64, f64, &str)> = Vec::new();
            for &(gap_start, gap_end) in &bar.gaps {
                if gap_start > cursor {
                    segments.push((cursor, gap_start, RUNNING_FILL));
                }
                segments.push((gap_start, gap_end, SUSPENDED_FILL));
                cursor = gap_end;
            }
            if bar.end > cursor || segments.is_empty() {
                segments.push((cursor, bar.end, RUNNING_FILL));
            }
            for (s, e, fill) in segments {
                let w = ((x_of(e) - x_of(s)).max(1.0)).min(plot_w);
                svg.push_str(&format!(
                    "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\">\
                     <title>{} #{} [{} .. {}]</title></rect>\n",
                    fmt(x_of(s)),
                    fmt(y0),
                    fmt(w),
                    fmt(bar_h),
                    esc(transition),
                    bar.instance,
                    fmt(bar.start),
                    fmt(bar.end)
                ));
            }
        }
    }
    for (transition, time) in &inhibit_marks {
        if let Some(&lane_top) = lane_tops.get(transition) {
            svg.push_str(&format!(
                "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{SUSPENDED_FILL}\" \
                 stroke-width=\"2\"/>\n",
                fmt(x_of(*time)),
                fmt(lane_top - 2.0),
                fmt(lane_top + bar_h + 2.0)
            ));
        }
    }
    for (transition, lane_top) in &lane_tops {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" fill=\"{AXIS_COLOR}\" text-anchor=\"end\">{}</text>\n",
            fmt(label_w - 8.0),
            fmt(lane_top + bar_h - 3.0),
            esc(transition)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Diverging blue-white-red fill over [-1, 1].
fn heat_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (lo, hi): ([f64; 3], [f64; 3]) = if v < 0.0 {
        ([33.0, 102.0, 172.0], [247.0, 247.0, 247.0])
    } else {
        ([247.0, 247.0, 247.0], [178.0, 24.0, 43.0])
    };
    let t = if v < 0.0 { v + 1.0 } else { v };
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(lo[0], hi[0]), mix(lo[1], hi[1]), mix(lo[2], hi[2]))
}

/// Square heatmap with row/column labels; undefined cells render as light
/// gray with a diagonal stroke.
pub fn heatmap_svg(matrix: &CorrelationMatrix) -> String {
    let n = matrix.labels.len();
    let cell = 30.0;
    let label_w = 10.0 + matrix.labels.iter().map(|l| l.len()).max().unwrap_or(0) as f64 * 6.6;
    let top = label_w;
    let width = label_w + n as f64 * cell + 10.0;
    let height = top + n as f64 * cell + 10.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         font-family=\"monospace\" font-size=\"10\">\n",
        fmt(width),
        fmt(height)
    ));
    for (i, label) in matrix.labels.iter().enumerate() {
        let y = top + i as f64 * cell;
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"{AXIS_COLOR}\">{}</text>\n",
            fmt(label_w - 4.0),
            fmt(y + cell / 2.0 + 3.0),
            esc(label)
        ));
        let x = label_w + i as f64 * cell;
        svg.push_str(&format!(
            "  <text x=\"{0}\" y=\"{1}\" text-anchor=\"start\" fill=\"{AXIS_COLOR}\" \
             transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
            fmt(x + cell / 2.0 + 3.0),
            fmt(top - 4.0),
            esc(label)
        ));
    }
    for i in 0..n {
        for j in 0..n {
            let x = label_w + j as f64 * cell;
            let y = top + i as f64 * cell;
            match matrix.values[i][j] {
                Some(v) => {
                    let text_fill = if v.abs() > 0.6 { "#ffffff" } else { "#222222" };
                    svg.push_str(&format!(
                        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" \
                         stroke=\"#ffffff\"/>\n",
                        fmt(x),
                        fmt(y),
                        fmt(cell),
                        fmt(cell),
                        heat_color(v)
                    ));
                    svg.push_str(&format!(
                        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{text_fill}\">{}</text>\n",
                        fmt(x + cell / 2.0),
                        fmt(y + cell / 2.0 + 3.0),
                        fmt(v)
                    ));
                }
                None => {
                    svg.push_str(&format!(
                        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#eeeeee\" \
                         stroke=\"#ffffff\"/>\n",
                        fmt(x),
                        fmt(y),
                        fmt(cell),
                        fmt(cell)
                    ));
                    svg.push_str(&format!(
                        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\"/>\n",
                        fmt(x + 3.0),
                        fmt(y + cell - 3.0),
                        fmt(x + cell - 3.0),
                        fmt(y + 3.0)
                    ));
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
