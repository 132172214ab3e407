//! `dgsched` command-line front end.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 usage or input error,
//! 3 infeasible parameters.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgsched::analysis::{
    bounds_report, build_theorem5_instance, graph_from_schedule, lemma8_bound, theorem5_optimal_graph,
    theorem5_partitioned_lower_bound, theorem5_reference_graph, theorem5_reference_makespan,
    theorem5_reference_schedule, validate,
};
use dgsched::chain::{build_graph, Sequencer};
use dgsched::experiment::{exceptions_text, rows_to_csv, run_sweep, series_text, SweepConfig};
use dgsched::generator::{generate_taskset, GenConfig};
use dgsched::io::{schedule_from_csv, schedule_to_csv, taskset_from_json, taskset_to_json};
use dgsched::list::{schedule, PriorityRule, SchedulerConfig};
use dgsched::{Error, Policy, TaskSet, TimeValue};

#[derive(Parser)]
#[command(name = "dgsched", version, about = "Dependency-graph scheduling of tasks sharing binary semaphores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random task set (JSON).
    Generate(GenerateArgs),
    /// Order critical sections and print the dependency graph.
    BuildGraph(BuildGraphArgs),
    /// Schedule a task set and print the schedule (CSV).
    Schedule(ScheduleArgs),
    /// Check a schedule CSV against a task set.
    Validate(ValidateArgs),
    /// Lower bounds and the list-schedule bound for a produced schedule (JSON).
    Bounds(ScheduleArgs),
    /// Build the lower-bound instance family and its reference schedule.
    Theorem5(Theorem5Args),
    /// Run an acceptance-ratio sweep (CSV).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SequencerArg {
    Jks,
    Potts,
    Brute,
}

impl From<SequencerArg> for Sequencer {
    fn from(s: SequencerArg) -> Self {
        match s {
            SequencerArg::Jks => Sequencer::Jks,
            SequencerArg::Potts => Sequencer::Potts,
            SequencerArg::Brute => Sequencer::BruteForce,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    SpNp,
    SpP,
    PTied,
    PSimple,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::SpNp => Policy::SemiPartitionedNp,
            PolicyArg::SpP => Policy::SemiPartitionedP,
            PolicyArg::PTied => Policy::PartitionedTied,
            PolicyArg::PSimple => Policy::PartitionedSimple,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorityArg {
    /// Critical sections first, longest remaining chain leading.
    Chain,
    /// Highest bottom level first.
    Level,
}

#[derive(Args)]
struct Output {
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "M", visible_alias = "m")]
    processors: usize,
    /// Number of tasks (default 10·M).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 8)]
    z: usize,
    #[arg(long, default_value_t = 0.1)]
    beta_low: f64,
    #[arg(long, default_value_t = 0.4)]
    beta_high: f64,
    /// Per-task utilization cap.
    #[arg(long, default_value = "0.5")]
    cap: TimeValue,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Task-set JSON file.
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long, value_enum, default_value = "potts")]
    sequencer: SequencerArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long = "M", visible_alias = "m")]
    processors: usize,
    #[arg(long, value_enum, default_value = "sp-p")]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value = "potts")]
    sequencer: SequencerArg,
    #[arg(long, value_enum, default_value = "chain")]
    priority: PriorityArg,
    /// Partitioned policies: place each second section contiguously.
    #[arg(long)]
    contiguous_c2: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    tasks: PathBuf,
    /// Schedule CSV file.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long = "M", visible_alias = "m")]
    processors: usize,
    #[arg(long, value_enum, default_value = "sp-p")]
    policy: PolicyArg,
    /// Check critical-section order against this sequencer's graph. Without
    /// it the order realized by the schedule is used.
    #[arg(long, value_enum)]
    sequencer: Option<SequencerArg>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Theorem5Args {
    #[arg(long = "M", visible_alias = "m")]
    processors: usize,
    #[arg(long = "Q", visible_alias = "q")]
    q: TimeValue,
    #[arg(long)]
    delta: TimeValue,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write per-curve plot data here.
    #[arg(long)]
    series: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

/// Either a library error or a failed validation.
enum Failure {
    Lib(Error),
    Invalid,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn emit(output: &Output, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_tasks(path: &Path) -> Result<TaskSet, Error> {
    taskset_from_json(&fs::read_to_string(path)?)
}

fn scheduler_config(args: &ScheduleArgs) -> SchedulerConfig {
    let mut config = SchedulerConfig::new(args.processors, args.policy.into());
    config.priority_rule = match args.priority {
        PriorityArg::Chain => PriorityRule::LongestChainFirst,
        PriorityArg::Level => PriorityRule::BottomLevel,
    };
    config.preempt_second_sections = !args.contiguous_c2;
    config
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let config = GenConfig {
        processors: args.processors,
        n_tasks: args.n.unwrap_or(10 * args.processors),
        z: args.z,
        beta_low: args.beta_low,
        beta_high: args.beta_high,
        per_task_cap: args.cap,
        seed: args.seed,
    };
    emit(&args.output, &taskset_to_json(&generate_taskset(&config)?))?;
    Ok(())
}

fn cmd_build_graph(args: BuildGraphArgs) -> CmdResult {
    let tasks = read_tasks(&args.tasks)?;
    let graph = build_graph(&tasks, args.sequencer.into())?;
    let mut text = graph.to_edge_list();
    text.push_str(&format!("len(G) = {}\n", graph.critical_path_length()?));
    emit(&args.output, &text)?;
    Ok(())
}

fn cmd_schedule(args: ScheduleArgs) -> CmdResult {
    let tasks = read_tasks(&args.tasks)?;
    let graph = build_graph(&tasks, args.sequencer.into())?;
    let sched = schedule(&graph, &tasks, &scheduler_config(&args))?;
    emit(&args.output, &schedule_to_csv(&sched))?;
    eprintln!("makespan = {}", sched.makespan());
    eprintln!("lemma8_bound = {}", lemma8_bound(&graph, &tasks, args.processors)?);
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> CmdResult {
    let tasks = read_tasks(&args.tasks)?;
    let sched = schedule_from_csv(&fs::read_to_string(&args.schedule)?, args.processors, args.policy.into())?;
    let graph = match args.sequencer {
        Some(s) => build_graph(&tasks, s.into())?,
        None => graph_from_schedule(&sched, &tasks)?,
    };
    let violations = validate(&sched, &tasks, &graph);
    let text: String = if violations.is_empty() {
        "valid\n".into()
    } else {
        violations.iter().map(|v| format!("{v}\n")).collect()
    };
    emit(&args.output, &text)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invalid)
    }
}

fn cmd_bounds(args: ScheduleArgs) -> CmdResult {
    let tasks = read_tasks(&args.tasks)?;
    let graph = build_graph(&tasks, args.sequencer.into())?;
    let sched = schedule(&graph, &tasks, &scheduler_config(&args))?;
    let report = bounds_report(&tasks, &graph, &sched)?;
    emit(&args.output, &(serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n"))?;
    Ok(())
}

fn cmd_theorem5(args: Theorem5Args) -> CmdResult {
    let m = args.processors;
    let instance = build_theorem5_instance(m, &args.q, &args.delta)?;
    let star = theorem5_reference_schedule(&instance, m)?;
    let star_len = star.makespan();
    let mut text = String::new();
    text.push_str("# instance\n");
    text.push_str(&taskset_to_json(&instance));
    text.push_str("# S* (critical sections in reversed index order)\n");
    text.push_str(&schedule_to_csv(&star));
    let reversed = theorem5_reference_graph(&instance)?;
    text.push_str(&format!(
        "L(S*) = {star_len}\nexpected (2N+M)delta+Q = {}\nS* valid = {}\n",
        theorem5_reference_makespan(m, &args.q, &args.delta),
        validate(&star, &instance, &reversed).is_empty()
    ));
    let optimal = theorem5_optimal_graph(&instance)?;
    text.push_str(&format!(
        "len(G*) = {}\nno schedule of G* beats delta+(2-1/M)Q = {}\n",
        optimal.critical_path_length()?,
        theorem5_partitioned_lower_bound(m, &args.q, &args.delta)
    ));
    text.push_str("# schedules of G*\npolicy,makespan,ratio_to_S*,valid\n");
    for policy in [
        Policy::SemiPartitionedNp,
        Policy::SemiPartitionedP,
        Policy::PartitionedTied,
        Policy::PartitionedSimple,
    ] {
        let s = schedule(&optimal, &instance, &SchedulerConfig::new(m, policy))?;
        let ratio = TimeValue::from_rational(s.makespan().ratio_to(&star_len))?;
        text.push_str(&format!(
            "{policy},{},{:.6},{}\n",
            s.makespan(),
            ratio.to_f64(),
            validate(&s, &instance, &optimal).is_empty()
        ));
    }
    text.push_str(&format!("2-1/M = {:.6}\n", 2.0 - 1.0 / m as f64));
    emit(&args.output, &text)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let mut config: SweepConfig = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path).map_err(Error::from)?)
            .map_err(|e| Error::Parse(format!("sweep config: {e}")))?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run_sweep(&config)?;
    emit(&args.output, &rows_to_csv(&report.rows))?;
    if let Some(path) = &args.series {
        fs::write(path, series_text(&report.rows)).map_err(Error::from)?;
    }
    eprint!("{}", exceptions_text(&report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::BuildGraph(a) => cmd_build_graph(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Theorem5(a) => cmd_theorem5(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) | Error::BruteForceCap { .. } | Error::Precondition(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
