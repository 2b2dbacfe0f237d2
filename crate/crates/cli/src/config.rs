use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use shapsched::schedulers::{RandConfig, Samples};
use shapsched::shapley::sample_size;
use shapsched::workload::{MachineDistribution, SyntheticSpec};
use shapsched::{PolicyKind, Time, MAX_EXACT_ORGS};

/// Where the jobs come from.
#[derive(Clone, Debug, PartialEq)]
pub enum WorkloadSource {
    Swf(PathBuf),
    Synthetic(SyntheticSpec),
}

impl fmt::Display for WorkloadSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadSource::Swf(path) => write!(f, "{}", path.display()),
            WorkloadSource::Synthetic(spec) => write!(f, "synthetic:{spec}"),
        }
    }
}

/// One experiment: a workload split among `orgs` organizations, run by every
/// listed policy and compared with the exact fair reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: WorkloadSource,
    pub orgs: usize,
    pub machines: usize,
    pub machine_dist: MachineDistribution,
    pub release_scale: f64,
    pub policies: Vec<PolicyKind>,
    /// Drives the user-to-organization draw, synthetic jobs, and the policies' randomness.
    pub seed: u64,
    pub t_end: Time,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orgs == 0 {
            bail!("--orgs must be at least 1");
        }
        if self.orgs > MAX_EXACT_ORGS {
            bail!(
                "the exact reference supports at most {MAX_EXACT_ORGS} organizations, got {}",
                self.orgs
            );
        }
        if self.machines < self.orgs {
            bail!(
                "{} machines cannot give each of {} organizations a machine",
                self.machines,
                self.orgs
            );
        }
        if !(self.release_scale.is_finite() && self.release_scale > 0.0) {
            bail!("--release-scale must be positive, got {}", self.release_scale);
        }
        if self.policies.is_empty() {
            bail!("at least one policy is required");
        }
        Ok(())
    }

    /// The same experiment with every seed-dependent part reseeded.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c.policies = self.policies.iter().map(|p| reseed(p, seed)).collect();
        c
    }
}

fn reseed(kind: &PolicyKind, seed: u64) -> PolicyKind {
    match kind {
        PolicyKind::Rand(cfg) => PolicyKind::Rand(RandConfig::new(cfg.samples.clone(), seed)),
        PolicyKind::Direct { .. } => PolicyKind::Direct { seed },
        other => other.clone(),
    }
}

/// How the sampled policy sizes its sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSettings {
    pub count: Option<usize>,
    pub epsilon: f64,
    pub lambda: f64,
}

/// Builds a policy from its command-line name.
pub fn policy_from_name(name: &str, samples: SampleSettings, seed: u64) -> Result<PolicyKind> {
    Ok(match name {
        "exact" => PolicyKind::Exact,
        "rand" => {
            let s = match samples.count {
                Some(0) => bail!("--rand-n must be at least 1"),
                Some(n) => Samples::Count(n),
                None => Samples::Bound {
                    epsilon: samples.epsilon,
                    lambda: samples.lambda,
                },
            };
            PolicyKind::Rand(RandConfig::new(s, seed))
        }
        "direct" => PolicyKind::Direct { seed },
        "rr" => PolicyKind::RoundRobin,
        "fifo" => PolicyKind::Fifo,
        other => bail!("unknown policy {other:?} (expected exact, rand, direct, rr or fifo)"),
    })
}

/// Short name of a policy with its sample parameters, e.g. `rand(N=15)`.
pub fn policy_label(kind: &PolicyKind) -> String {
    match kind {
        PolicyKind::Rand(cfg) => match cfg.samples {
            Samples::Count(n) => format!("rand(N={n})"),
            Samples::Bound { epsilon, lambda } => format!("rand(eps={epsilon},lambda={lambda})"),
            Samples::AllOrderings => "rand(all)".to_string(),
        },
        other => other.name().to_string(),
    }
}

/// Number of orderings the sampled policy draws for `k` organizations.
pub fn sample_count(kind: &PolicyKind, k: usize) -> Result<Option<usize>> {
    let PolicyKind::Rand(cfg) = kind else {
        return Ok(None);
    };
    Ok(Some(match cfg.samples {
        Samples::Count(n) => n,
        Samples::Bound { epsilon, lambda } => sample_size(k, epsilon, lambda)?,
        Samples::AllOrderings => (1..=k).product(),
    }))
}

/// Seeds given as `A..B` (end exclusive), `A..=B`, or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let parse = |x: &str| -> Result<u64> {
        x.trim()
            .parse()
            .with_context(|| format!("bad seed {x:?} in {s:?}"))
    };
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (parse(a)?..=parse(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (parse(a)?..parse(b)?).collect()
    } else {
        s.split(',').map(parse).collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("seed set {s:?} is empty");
    }
    Ok(seeds)
}
