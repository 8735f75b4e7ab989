//! Command-line front end: validation, single runs, Monte Carlo batches,
//! reliability analysis, composition, and reachability.
//!
//! Exit codes: 0 success, 1 model/usage error, 2 I/O error, 3 the run
//! finished with a non-success outcome.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use respn::compose::{levels_report, merge_nets, FusionMap};
use respn::io;
use respn::mc::{self, CorrelationMethod, SamplingSpec};
use respn::model::{ConflictPolicy, Net};
use respn::reach::reachable_markings;
use respn::reliability::{
    mission_availability, redundancy_sweep, reliability_mc, AvailabilityModel,
    ReliabilityDistribution, SweepAxis,
};
use respn::sim::{simulate, Outcome, SimConfig};
use respn::validate::validate_net;

#[derive(Parser)]
#[command(
    name = "respn",
    version,
    about = "Stochastic timed Petri nets with resources: simulate, batch, analyze"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    FixedPriority,
    UniformRandom,
    PriorityProportional,
}

impl From<PolicyArg> for ConflictPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::FixedPriority => ConflictPolicy::FixedPriority,
            PolicyArg::UniformRandom => ConflictPolicy::UniformRandom,
            PolicyArg::PriorityProportional => ConflictPolicy::PriorityProportional,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Subsystem,
    System,
}

#[derive(Subcommand)]
enum Command {
    /// Check a net document; exit 0 iff it is valid.
    Validate {
        net: PathBuf,
    },
    /// Run one simulation and export its trace.
    Simulate {
        net: PathBuf,
        /// Rng seed (reproducibility by default: no wall-clock seeding).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e6)]
        max_time: f64,
        /// Override the net's conflict policy.
        #[arg(long)]
        policy: Option<PolicyArg>,
        #[arg(long, default_value_t = 1.0)]
        sample_interval: f64,
        #[arg(long, default_value_t = 100_000)]
        max_events: u64,
        /// Where events.csv, trajectories.csv, and timeline.svg go.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Monte Carlo batch over sampled net parameters.
    Mc {
        net: PathBuf,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling spec: a file path, or inline JSON starting with `{`.
        /// Defaults to the net document's own sampling section.
        #[arg(long)]
        sampling: Option<String>,
        /// Also export the input/output correlation matrix.
        #[arg(long)]
        correlate: bool,
        /// Rank (Spearman) correlations instead of Pearson.
        #[arg(long)]
        spearman: bool,
        /// Count non-success runs (at their censoring time) in time stats.
        #[arg(long)]
        include_censored: bool,
        #[arg(long, default_value_t = 1e6)]
        max_time: f64,
        #[arg(long, default_value_t = 100_000)]
        max_events: u64,
        /// Worker threads for the batch (0 = rayon default).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Closed-form and Monte Carlo availability for a capability model.
    Reliability {
        model: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweep mission availability over a redundancy axis.
        #[arg(long, value_enum)]
        sweep: Option<SweepArg>,
        /// Redundancy counts for the sweep, inclusive.
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        range: (u32, u32),
        /// Device reliability for subsystem sweeps.
        #[arg(long, default_value_t = 0.95)]
        reliability: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Merge nets by fusing shared places/resources.
    Compose {
        nets: Vec<PathBuf>,
        #[arg(long)]
        fusion: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bounded reachability over the untimed skeleton.
    Reach {
        net: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Write the bundled tower-building demo models.
    CaseModels {
        #[arg(long, default_value = "models")]
        out_dir: PathBuf,
    },
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: u32 = lo.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let hi: u32 = hi.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if lo == 0 || hi < lo {
        return Err("range must be 1-based and non-empty".into());
    }
    Ok((lo, hi))
}

enum CliError {
    /// Model or usage problem: exit 1.
    Model(String),
    /// Filesystem problem: exit 2.
    Io(String),
    /// Simulation ran but did not succeed: exit 3.
    Unsuccessful,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Model(_) => 1,
            CliError::Io(_) => 2,
            CliError::Unsuccessful => 3,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<Net, CliError> {
    let text = read_file(path)?;
    io::parse_net(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successes; everything else is usage.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Model(msg) | CliError::Io(msg) => eprintln!("error: {msg}"),
                CliError::Unsuccessful => {}
            }
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { net } => cmd_validate(&net),
        Command::Simulate {
            net,
            seed,
            max_time,
            policy,
            sample_interval,
            max_events,
            out_dir,
            format,
        } => {
            let config = SimConfig {
                seed,
                max_time,
                policy_override: policy.map(Into::into),
                trajectory_sample_interval: sample_interval,
                max_events,
            };
            cmd_simulate(&net, &config, out_dir.as_deref(), format)
        }
        Command::Mc {
            net,
            runs,
            seed,
            sampling,
            correlate,
            spearman,
            include_censored,
            max_time,
            max_events,
            jobs,
            out_dir,
            format,
        } => {
            let config = SimConfig {
                seed: 0,
                max_time,
                policy_override: None,
                trajectory_sample_interval: max_time,
                max_events,
            };
            let method =
                if spearman { CorrelationMethod::Spearman } else { CorrelationMethod::Pearson };
            cmd_mc(McArgs {
                net: &net,
                runs,
                seed,
                sampling,
                correlate,
                method,
                include_censored,
                config,
                jobs,
                out_dir,
                format,
            })
        }
        Command::Reliability {
            model,
            trials,
            seed,
            sweep,
            range,
            reliability,
            out_dir,
            format,
        } => cmd_reliability(&model, trials, seed, sweep, range, reliability, out_dir, format),
        Command::Compose { nets, fusion, out } => cmd_compose(&nets, fusion.as_deref(), &out),
        Command::Reach { net, max_states, format } => cmd_reach(&net, max_states, format),
        Command::CaseModels { out_dir } => {
            let written = respn::tower::write_bundle(&out_dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let text = read_file(path)?;
    let net = match io::parse_net(&text) {
        Ok(net) => net,
        Err(err) => {
            eprintln!("{}: {err}", path.display());
            return Err(CliError::Model("invalid document".into()));
        }
    };
    let report = validate_net(&net);
    for violation in &report.violations {
        eprintln!("{}: {violation}", path.display());
    }
    println!(
        "{}: valid ({} places, {} resources, {} transitions)",
        path.display(),
        net.places.len(),
        net.resources.len(),
        net.transitions.len()
    );
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    config: &SimConfig,
    out_dir: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let net = load_net(path)?;
    let trace = simulate(&net, config).map_err(|e| CliError::Model(e.to_string()))?;

    if let Some(dir) = out_dir {
        write_file(&dir.join("events.csv"), &io::events_csv(&trace))?;
        write_file(&dir.join("trajectories.csv"), &io::trajectories_csv(&trace))?;
        write_file(&dir.join("timeline.svg"), &io::timeline_svg(&trace))?;
    }

    match format {
        OutputFormat::Json => {
            let summary = serde_json::json!({
                "outcome": trace.outcome.as_str(),
                "final_time": trace.final_time,
                "events": trace.events.len(),
                "truncated": trace.truncated,
                "final_tokens": trace.final_state.tokens,
                "final_resources": trace.final_state.resources,
            });
            println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
        }
        OutputFormat::Text => {
            let resources = trace
                .final_state
                .resources
                .iter()
                .map(|(id, level)| format!("{id}={level:.3}"))
                .collect::<Vec<_>>()
                .join(" ");
            println!(
                "outcome={} final_time={} events={}{}{}",
                trace.outcome.as_str(),
                trace.final_time,
                trace.events.len(),
                if resources.is_empty() { String::new() } else { format!(" {resources}") },
                if trace.truncated { " (truncated)" } else { "" },
            );
        }
    }
    if trace.outcome != Outcome::Success {
        return Err(CliError::Unsuccessful);
    }
    Ok(())
}

struct McArgs<'a> {
    net: &'a Path,
    runs: usize,
    seed: u64,
    sampling: Option<String>,
    correlate: bool,
    method: CorrelationMethod,
    include_censored: bool,
    config: SimConfig,
    jobs: usize,
    out_dir: Option<PathBuf>,
    format: OutputFormat,
}

fn load_sampling(arg: Option<&str>, doc_spec: Option<SamplingSpec>) -> Result<SamplingSpec, CliError> {
    match arg {
        Some(inline) if inline.trim_start().starts_with('{') => {
            serde_json::from_str(inline).map_err(|e| CliError::Model(format!("inline sampling: {e}")))
        }
        Some(path) => {
            let text = read_file(Path::new(path))?;
            serde_json::from_str(&text).map_err(|e| CliError::Model(format!("{path}: {e}")))
        }
        None => Ok(doc_spec.unwrap_or_default()),
    }
}

fn cmd_mc(args: McArgs<'_>) -> Result<(), CliError> {
    let text = read_file(args.net)?;
    let doc = io::parse_document(&text)
        .map_err(|e| CliError::Model(format!("{}: {e}", args.net.display())))?;
    let net = doc.to_net();
    let report = validate_net(&net);
    if !report.is_valid() {
        return Err(CliError::Model(format!("{}:\n{report}", args.net.display())));
    }
    let spec = load_sampling(args.sampling.as_deref(), doc.sampling)?;

    let batch = run_in_pool(args.jobs, || {
        mc::run_batch(&net, &spec, args.runs, args.seed, &args.config)
    })
    .map_err(|e| CliError::Model(e.to_string()))?;
    let summary = mc::summarize_with(&batch, args.include_censored)
        .map_err(|e| CliError::Model(e.to_string()))?;

    let matrix = if args.correlate {
        let outputs = vec!["final_time".to_string(), "goal".to_string()];
        Some(
            mc::correlation_matrix(&batch, &batch.input_labels(), &outputs, args.method)
                .map_err(|e| CliError::Model(e.to_string()))?,
        )
    } else {
        None
    };

    if let Some(dir) = &args.out_dir {
        write_file(&dir.join("batch.csv"), &io::batch_csv(&batch))?;
        write_file(
            &dir.join("summary.json"),
            &format!("{}\n", serde_json::to_string_pretty(&summary).expect("summary serializes")),
        )?;
        if let Some(matrix) = &matrix {
            write_file(&dir.join("correlation.csv"), &io::matrix_csv(matrix))?;
            write_file(&dir.join("correlation.svg"), &io::heatmap_svg(matrix))?;
        }
    }

    match args.format {
        OutputFormat::Json => {
            let mut value = serde_json::to_value(&summary).expect("summary serializes");
            if let Some(matrix) = &matrix {
                value["correlations"] = serde_json::to_value(matrix).expect("matrix serializes");
            }
            println!("{}", serde_json::to_string(&value).expect("value serializes"));
        }
        OutputFormat::Text => {
            println!("runs={} success_rate={:.3}", summary.n_runs, summary.success_rate);
            for (outcome, count) in &summary.outcome_counts {
                println!("outcome.{outcome}={count}");
            }
            if let Some(stats) = &summary.time_stats {
                println!(
                    "time.mean={:.3} time.sd={:.3} time.min={:.3} time.max={:.3} (over {} runs)",
                    stats.mean, stats.std_dev, stats.min, stats.max, stats.count
                );
                for (p, v) in &stats.percentiles {
                    println!("time.p{p}={v:.3}");
                }
            }
            if let Some(matrix) = &matrix {
                for (i, a) in matrix.labels.iter().enumerate() {
                    for (j, b) in matrix.labels.iter().enumerate() {
                        if j > i {
                            match matrix.values[i][j] {
                                Some(r) => println!("corr({a},{b})={r:.3}"),
                                None => println!("corr({a},{b})=undefined"),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction");
    pool.install(f)
}

#[allow(clippy::too_many_arguments)]
fn cmd_reliability(
    path: &Path,
    trials: usize,
    seed: u64,
    sweep: Option<SweepArg>,
    range: (u32, u32),
    reliability: f64,
    out_dir: Option<PathBuf>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let text = read_file(path)?;
    let model: AvailabilityModel = serde_json::from_str(&text)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
    model.validate().map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;

    let closed = mission_availability(&model);
    let dist = model
        .trial_distribution
        .clone()
        .unwrap_or(ReliabilityDistribution::Constant { value: 0.9 });
    let mc_result =
        reliability_mc(&model, trials, seed, &dist).map_err(|e| CliError::Model(e.to_string()))?;
    let mc_mission = mc_result.capability_availability[&model.mission_capability];

    // The closed form assumes each device at its declared reliability;
    // compare against a constant-reliability campaign for the difference
    // column when the trial distribution is not constant.
    let closed_vs_mc = {
        let const_model = model.clone();
        let per_device: Vec<f64> = const_model.devices.iter().map(|d| d.reliability).collect();
        let uniform = per_device.windows(2).all(|w| w[0] == w[1]);
        if uniform && !per_device.is_empty() {
            let const_dist = ReliabilityDistribution::Constant { value: per_device[0] };
            let mc = reliability_mc(&const_model, trials, seed.wrapping_add(1), &const_dist)
                .map_err(|e| CliError::Model(e.to_string()))?;
            Some(mc.capability_availability[&const_model.mission_capability])
        } else {
            None
        }
    };

    let curve = sweep.map(|axis| {
        let axis = match axis {
            SweepArg::Subsystem => SweepAxis::Subsystem { reliability },
            SweepArg::System => SweepAxis::System,
        };
        redundancy_sweep(&model, axis, range.0..=range.1)
    });

    if let Some(dir) = &out_dir {
        write_file(&dir.join("correlation.csv"), &io::matrix_csv(&mc_result.correlations))?;
        write_file(&dir.join("correlation.svg"), &io::heatmap_svg(&mc_result.correlations))?;
        if let Some(curve) = &curve {
            write_file(&dir.join("sweep.csv"), &io::sweep_csv(curve))?;
        }
    }

    match format {
        OutputFormat::Json => {
            let value = serde_json::json!({
                "closed_form_mission": closed,
                "mc_mission": mc_mission,
                "mc_trials": trials,
                "closed_vs_constant_mc_diff": closed_vs_mc.map(|mc| (mc - closed).abs()),
                "capability_availability": mc_result.capability_availability,
                "device_availability": mc_result.device_availability,
                "sweep": curve,
            });
            println!("{}", serde_json::to_string(&value).expect("value serializes"));
        }
        OutputFormat::Text => {
            println!("mission availability: closed-form={closed:.6}");
            println!("mission availability: mc[{trials}]={mc_mission:.6} (trial dist)");
            if let Some(mc) = closed_vs_mc {
                println!(
                    "mission availability: mc[{trials}]={mc:.6} (declared reliabilities) |diff|={:.6}",
                    (mc - closed).abs()
                );
            }
            for (capability, availability) in &mc_result.capability_availability {
                println!("capability.{capability}={availability:.4}");
            }
            if let Some(curve) = &curve {
                for (count, availability) in curve {
                    println!("sweep.{count}={availability:.6}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_compose(nets: &[PathBuf], fusion: Option<&Path>, out: &Path) -> Result<(), CliError> {
    if nets.is_empty() {
        return Err(CliError::Model("compose requires at least one net".into()));
    }
    let mut loaded = Vec::new();
    for path in nets {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Model(format!("{}: no usable file stem", path.display())))?;
        loaded.push((stem.to_string(), load_net(path)?));
    }
    let fusion_map: FusionMap = match fusion {
        Some(path) => {
            let text = read_file(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?
        }
        None => FusionMap::default(),
    };
    let refs: Vec<(String, &Net)> = loaded.iter().map(|(id, net)| (id.clone(), net)).collect();
    let merged = merge_nets(&refs, &fusion_map).map_err(|e| CliError::Model(e.to_string()))?;
    write_file(out, &io::serialize_net(&merged).map_err(|e| CliError::Model(e.to_string()))?)?;

    println!(
        "merged {} nets -> {} ({} places, {} resources, {} transitions)",
        loaded.len(),
        out.display(),
        merged.places.len(),
        merged.resources.len(),
        merged.transitions.len()
    );
    println!(
        "fused {} place group(s), {} resource group(s)",
        fusion_map.places.len(),
        fusion_map.resources.len()
    );
    let report = levels_report(&merged);
    for (level, group) in &report.groups {
        println!(
            "level.{level}: {} places, {} resources, {} transitions",
            group.places.len(),
            group.resources.len(),
            group.transitions.len()
        );
    }
    Ok(())
}

fn cmd_reach(path: &Path, max_states: usize, format: OutputFormat) -> Result<(), CliError> {
    let net = load_net(path)?;
    let result = reachable_markings(&net, max_states);
    match format {
        OutputFormat::Json => {
            let value = serde_json::json!({
                "markings": result.marking_count(),
                "deadlocks": result.deadlock_count(),
                "truncated": result.truncated,
                "place_ids": result.place_ids,
            });
            println!("{}", serde_json::to_string(&value).expect("value serializes"));
        }
        OutputFormat::Text => {
            println!(
                "{} markings, {} deadlocks{}",
                result.marking_count(),
                result.deadlock_count(),
                if result.truncated { " (truncated)" } else { "" }
            );
        }
    }
    Ok(())
}
