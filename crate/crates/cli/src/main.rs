use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use shapsched::workload::{MachineDistribution, SyntheticSpec};
use shapsched::Time;
use shapsched_cli::{
    parse_seeds, policy_from_name, run_experiment, run_sweep, write_summary, write_sweep,
    write_trace, ExperimentConfig, SampleSettings, WorkloadSource,
};

/// Run fair scheduling policies on a workload and report their unfairness as CSV.
#[derive(Parser, Debug)]
#[command(name = "shapsched", version)]
struct Args {
    /// SWF trace file
    #[arg(long, value_name = "PATH", required_unless_present = "synthetic", conflicts_with = "synthetic")]
    workload: Option<PathBuf>,
    /// Synthetic workload, e.g. "n=50,r=0..100,p=log:1..40" (";" separates per-org templates)
    #[arg(long, value_name = "SPEC")]
    synthetic: Option<String>,
    #[arg(long)]
    orgs: usize,
    /// Total machine count
    #[arg(long)]
    machines: usize,
    /// uniform, zipf or zipf:THETA
    #[arg(long, default_value = "uniform")]
    machine_dist: String,
    /// Multiplies release times (rounded down)
    #[arg(long, default_value_t = 1.0)]
    release_scale: f64,
    /// Comma-separated list of exact, rand, direct, rr, fifo
    #[arg(long, value_delimiter = ',', default_value = "rand,direct,rr")]
    policy: Vec<String>,
    /// Fixed number of orderings for rand; overrides --epsilon/--lambda
    #[arg(long)]
    rand_n: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds to sweep, as A..B, A..=B or a list; writes aggregated rows
    #[arg(long, conflicts_with_all = ["seed", "trace"])]
    seeds: Option<String>,
    /// Last time moment simulated
    #[arg(long)]
    t_end: Time,
    /// Write per-step utilities and contributions here
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Output file (default stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add a wall-clock column to the summary
    #[arg(long)]
    timing: bool,
}

fn config(args: &Args) -> Result<ExperimentConfig> {
    let source = match (&args.workload, &args.synthetic) {
        (Some(p), _) => WorkloadSource::Swf(p.clone()),
        (None, Some(s)) => WorkloadSource::Synthetic(
            s.parse::<SyntheticSpec>().with_context(|| format!("bad --synthetic {s:?}"))?,
        ),
        (None, None) => unreachable!("clap requires one source"),
    };
    let machine_dist: MachineDistribution = args
        .machine_dist
        .parse()
        .with_context(|| format!("bad --machine-dist {:?}", args.machine_dist))?;
    let samples = SampleSettings {
        count: args.rand_n,
        epsilon: args.epsilon,
        lambda: args.lambda,
    };
    let policies = args
        .policy
        .iter()
        .map(|p| policy_from_name(p.trim(), samples, args.seed))
        .collect::<Result<_>>()?;
    let c = ExperimentConfig {
        source,
        orgs: args.orgs,
        machines: args.machines,
        machine_dist,
        release_scale: args.release_scale,
        policies,
        seed: args.seed,
        t_end: args.t_end,
    };
    c.validate()?;
    Ok(c)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: Args) -> Result<()> {
    let config = config(&args)?;
    if let Some(seeds) = &args.seeds {
        let seeds = parse_seeds(seeds)?;
        let rows = run_sweep(&config, &seeds)?;
        return write_sweep(&rows, config.orgs, output(&args.out)?);
    }
    let report = run_experiment(&config, args.trace.is_some())?;
    if let Some(path) = &args.trace {
        write_trace(&report, output(&Some(path.clone()))?)?;
    }
    write_summary(&report, args.timing, output(&args.out)?)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
