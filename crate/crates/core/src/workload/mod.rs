//! Jobs, machine ownership, and the ways workloads are produced: SWF traces,
//! synthetic templates, and the assignment of users and machines to organizations.

mod swf;
mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::Time;

pub use swf::{parse_swf, parse_swf_str, RawTraceJob, SwfTrace};
pub use synthetic::{synth_workload, Draw, OrgTemplate, SyntheticSpec};

/// A sequential job owned by one organization.
///
/// `seq` is the job's position in its owner's FIFO order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Job {
    pub org: usize,
    pub seq: usize,
    pub release: Time,
    pub processing: Time,
}

impl Job {
    pub fn new(org: usize, seq: usize, release: Time, processing: Time) -> Self {
        Job {
            org,
            seq,
            release,
            processing,
        }
    }
}

/// Number of machines owned by each organization. Machine ids are assigned in
/// contiguous blocks: organization 0 owns ids `0..m0`, organization 1 the next
/// `m1` ids, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineAllocation {
    counts: Vec<usize>,
}

impl MachineAllocation {
    /// Every organization must own at least one machine.
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::config("machine allocation needs at least one organization"));
        }
        if let Some(org) = counts.iter().position(|&c| c == 0) {
            return Err(Error::config(format!("organization {org} owns no machine")));
        }
        Ok(MachineAllocation { counts })
    }

    /// Like [`MachineAllocation::new`] but organizations may contribute only jobs.
    pub fn permissive(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::config("machine allocation needs at least one organization"));
        }
        Ok(MachineAllocation { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn orgs(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, org: usize) -> usize {
        self.counts[org]
    }

    /// Global machine ids owned by `org`.
    pub fn machines_of(&self, org: usize) -> std::ops::Range<usize> {
        let start: usize = self.counts[..org].iter().sum();
        start..start + self.counts[org]
    }

    /// Owner of every machine, indexed by machine id.
    pub fn owners(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(org, &c)| std::iter::repeat(org).take(c))
            .collect()
    }

    /// Machines of the members of `c`.
    pub fn machines_in(&self, c: Coalition) -> usize {
        c.members()
            .filter(|&u| u < self.counts.len())
            .map(|u| self.counts[u])
            .sum()
    }
}

impl fmt::Display for MachineAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Per-organization job lists sorted by `seq`, after checking the FIFO
/// presentability invariants.
pub fn group_by_org(jobs: &[Job], orgs: usize) -> Result<Vec<Vec<Job>>> {
    let mut per_org: Vec<Vec<Job>> = vec![Vec::new(); orgs];
    for job in jobs {
        if job.org >= orgs {
            return Err(Error::config(format!(
                "job {:?} belongs to organization {} but only {orgs} exist",
                job, job.org
            )));
        }
        if job.processing == 0 {
            return Err(Error::config(format!("job {job:?} has zero processing time")));
        }
        per_org[job.org].push(*job);
    }
    for list in &mut per_org {
        list.sort_by_key(|j| j.seq);
        for w in list.windows(2) {
            if w[0].seq == w[1].seq {
                return Err(Error::config(format!(
                    "organization {} has two jobs with seq {}",
                    w[0].org, w[0].seq
                )));
            }
            if w[1].release < w[0].release {
                return Err(Error::config(format!(
                    "organization {}: job seq {} is released before seq {}",
                    w[0].org, w[1].seq, w[0].seq
                )));
            }
        }
    }
    Ok(per_org)
}

/// The sub-instance seen by coalition `c`: its members' jobs and machines,
/// with organizations renumbered by their rank in `c`.
pub fn restrict(
    jobs: &[Job],
    allocation: &MachineAllocation,
    c: Coalition,
) -> Result<(Vec<Job>, MachineAllocation)> {
    let members: Vec<usize> = c.members().collect();
    if let Some(&bad) = members.iter().find(|&&u| u >= allocation.orgs()) {
        return Err(Error::config(format!("organization {bad} is not in the allocation")));
    }
    let sub_jobs = jobs
        .iter()
        .filter(|j| c.contains(j.org))
        .map(|j| Job {
            org: c.rank_of(j.org).expect("member"),
            ..*j
        })
        .collect();
    let counts = members.iter().map(|&u| allocation.count(u)).collect();
    Ok((sub_jobs, MachineAllocation::permissive(counts)?))
}

/// A sequential job still keyed by the trace user that submitted it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UserJob {
    pub user: i64,
    pub release: Time,
    pub processing: Time,
}

/// Replaces every job that needs `k` processors by `k` sequential copies with
/// the same submit and run time. Output keeps trace order with copies adjacent.
pub fn sequentialize(raw: &[RawTraceJob]) -> Vec<UserJob> {
    raw.iter()
        .flat_map(|r| {
            std::iter::repeat(UserJob {
                user: r.user_id,
                release: r.submit_time,
                processing: r.run_time,
            })
            .take(r.proc_count as usize)
        })
        .collect()
}

/// Multiplies release times by `factor` and rounds down.
pub fn scale_releases(entries: &mut [UserJob], factor: f64) -> Result<()> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::config(format!("release scale must be positive, got {factor}")));
    }
    if factor == 1.0 {
        return Ok(());
    }
    for e in entries {
        e.release = (e.release as f64 * factor).floor() as Time;
    }
    Ok(())
}

/// Maps every distinct user to an organization drawn uniformly at random and
/// gives each organization its users' jobs. Jobs are numbered per organization
/// in release order (ties keep trace order). The result is sorted by
/// `(org, seq)`.
pub fn assign_orgs(entries: &[UserJob], k: usize, seed: u64) -> Result<Vec<Job>> {
    if k == 0 {
        return Err(Error::config("organization count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut user_org: HashMap<i64, usize> = HashMap::new();
    let mut per_org: Vec<Vec<(Time, usize, Time)>> = vec![Vec::new(); k];
    for (idx, e) in entries.iter().enumerate() {
        // users are drawn in order of first appearance so the mapping depends only on the trace
        let org = *user_org.entry(e.user).or_insert_with(|| rng.gen_range(0..k));
        per_org[org].push((e.release, idx, e.processing));
    }
    let mut jobs = Vec::with_capacity(entries.len());
    for (org, mut list) in per_org.into_iter().enumerate() {
        list.sort_by_key(|&(release, idx, _)| (release, idx));
        jobs.extend(
            list.into_iter()
                .enumerate()
                .map(|(seq, (release, _, processing))| Job::new(org, seq, release, processing)),
        );
    }
    Ok(jobs)
}

/// How machines are spread over organizations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MachineDistribution {
    Uniform,
    /// Organization `i` (1-based) gets weight `i^-theta`.
    Zipf(f64),
}

impl Default for MachineDistribution {
    fn default() -> Self {
        MachineDistribution::Uniform
    }
}

impl fmt::Display for MachineDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineDistribution::Uniform => write!(f, "uniform"),
            MachineDistribution::Zipf(theta) => write!(f, "zipf:{theta}"),
        }
    }
}

impl FromStr for MachineDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(MachineDistribution::Uniform),
            "zipf" => Ok(MachineDistribution::Zipf(1.0)),
            other => {
                let theta = other
                    .strip_prefix("zipf:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::config(format!(
                            "unknown machine distribution {other:?} (expected uniform or zipf:THETA)"
                        ))
                    })?;
                Ok(MachineDistribution::Zipf(theta))
            }
        }
    }
}

/// Splits `total` machines among `k` organizations.
///
/// Uniform: `total / k` each, the remainder one each to the lowest ids.
/// Zipf: largest-remainder apportionment of all `total` machines on weights
/// `i^-theta`; any organization left empty then takes one machine from the
/// currently largest owner (lowest id on ties).
pub fn distribute_machines(
    total: usize,
    k: usize,
    kind: MachineDistribution,
) -> Result<MachineAllocation> {
    if k == 0 {
        return Err(Error::config("organization count must be at least 1"));
    }
    if total < k {
        return Err(Error::config(format!(
            "{total} machines cannot give each of {k} organizations one machine"
        )));
    }
    let counts = match kind {
        MachineDistribution::Uniform => {
            let base = total / k;
            let extra = total % k;
            (0..k).map(|i| base + usize::from(i < extra)).collect()
        }
        MachineDistribution::Zipf(theta) => {
            if !(theta.is_finite() && theta > 0.0) {
                return Err(Error::config(format!("zipf exponent must be positive, got {theta}")));
            }
            let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-theta)).collect();
            let mut counts = largest_remainder(total, &weights);
            while let Some(empty) = counts.iter().position(|&c| c == 0) {
                let donor = (0..k)
                    .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                    .expect("k >= 1");
                counts[donor] -= 1;
                counts[empty] += 1;
            }
            counts
        }
    };
    MachineAllocation::new(counts)
}

fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // stable sort keeps lowest id first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
