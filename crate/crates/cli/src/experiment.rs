use std::fs::File;
use std::io::BufReader;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use rayon::prelude::*;
use shapsched::workload::{
    assign_orgs, distribute_machines, parse_swf, scale_releases, sequentialize, synth_workload,
    UserJob,
};
use shapsched::{fairness_report, run_policy, FairnessReport, Job, MachineAllocation, PolicyKind, RunOutput};

use crate::config::{ExperimentConfig, WorkloadSource};

/// A loaded workload, ready to be split for any organization count and seed.
#[derive(Clone, Debug)]
pub enum Workload {
    Trace(Vec<UserJob>),
    Synthetic(shapsched::workload::SyntheticSpec),
}

impl Workload {
    pub fn load(source: &WorkloadSource) -> Result<Self> {
        Ok(match source {
            WorkloadSource::Swf(path) => {
                let file = File::open(path)
                    .with_context(|| format!("cannot open workload {}", path.display()))?;
                let trace = parse_swf(BufReader::new(file))
                    .with_context(|| format!("cannot parse workload {}", path.display()))?;
                Workload::Trace(sequentialize(&trace.jobs))
            }
            WorkloadSource::Synthetic(spec) => Workload::Synthetic(spec.clone()),
        })
    }

    /// Jobs and machines for `config`. Jobs released after the horizon are dropped.
    pub fn instance(&self, config: &ExperimentConfig) -> Result<(Vec<Job>, MachineAllocation)> {
        let mut jobs = match self {
            Workload::Trace(entries) => {
                let mut entries = entries.clone();
                scale_releases(&mut entries, config.release_scale)?;
                assign_orgs(&entries, config.orgs, config.seed)?
            }
            Workload::Synthetic(spec) => {
                let spec = spec.clone().for_orgs(config.orgs)?;
                let mut jobs = synth_workload(&spec, config.seed)?;
                if config.release_scale != 1.0 {
                    for j in &mut jobs {
                        j.release = (j.release as f64 * config.release_scale).floor() as u64;
                    }
                }
                jobs
            }
        };
        // releases are nondecreasing in seq, so each org keeps a prefix of its jobs
        jobs.retain(|j| j.release <= config.t_end);
        let allocation = distribute_machines(config.machines, config.orgs, config.machine_dist)?;
        Ok((jobs, allocation))
    }
}

/// One policy's run compared with the exact fair reference.
#[derive(Clone, Debug)]
pub struct PolicyResult {
    pub policy: PolicyKind,
    pub fairness: FairnessReport,
    pub run: RunOutput,
    pub wall: Duration,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub jobs: usize,
    pub reference: RunOutput,
    pub results: Vec<PolicyResult>,
}

pub fn run_experiment(config: &ExperimentConfig, trace: bool) -> Result<ExperimentReport> {
    config.validate()?;
    let workload = Workload::load(&config.source)?;
    run_loaded(&workload, config, trace)
}

/// Runs every policy of `config` on an already loaded workload.
pub fn run_loaded(
    workload: &Workload,
    config: &ExperimentConfig,
    trace: bool,
) -> Result<ExperimentReport> {
    let (jobs, allocation) = workload.instance(config)?;
    let reference = run_policy(&PolicyKind::Exact, &jobs, &allocation, config.t_end, trace)
        .context("exact reference run failed")?;
    let results = config
        .policies
        .par_iter()
        .map(|policy| {
            let start = Instant::now();
            let run = run_policy(policy, &jobs, &allocation, config.t_end, trace)
                .with_context(|| format!("{} run failed", policy.name()))?;
            let wall = start.elapsed();
            let fairness = fairness_report(&run, &reference)?;
            Ok(PolicyResult {
                policy: policy.clone(),
                fairness,
                run,
                wall,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        jobs: jobs.len(),
        reference,
        results,
    })
}

/// Mean and spread of one policy's per-job unfairness over several seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub stddev: f64,
    pub mean_relative: f64,
    pub stddev_relative: f64,
}

/// Repeats the experiment for each seed and aggregates per policy, in the
/// order the policies were given.
pub fn run_sweep(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let workload = Workload::load(&config.source)?;
    let reports = seeds
        .par_iter()
        .map(|&seed| run_loaded(&workload, &config.with_seed(seed), false))
        .collect::<Result<Vec<_>>>()?;
    Ok(config
        .policies
        .iter()
        .enumerate()
        .map(|(i, policy)| {
            let per_job: Vec<f64> = reports.iter().map(|r| r.results[i].fairness.per_job_f64()).collect();
            let relative: Vec<f64> = reports.iter().map(|r| r.results[i].fairness.relative_f64()).collect();
            let (mean, stddev) = mean_sd(&per_job);
            let (mean_relative, stddev_relative) = mean_sd(&relative);
            SweepRow {
                policy: policy.clone(),
                runs: reports.len(),
                mean,
                stddev,
                mean_relative,
                stddev_relative,
            }
        })
        .collect())
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
