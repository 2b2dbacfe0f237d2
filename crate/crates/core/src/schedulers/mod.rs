//! Scheduling policies and their common run output.
//!
//! * [`ExactFair`] keeps a schedule for every subcoalition and gives each free
//!   machine to the organization whose exact contribution most exceeds its utility.
//! * [`Rand`] estimates contributions from sampled orderings of the organizations.
//! * [`DirectContr`] credits each organization with the work done on its own machines.
//! * [`RoundRobin`] cycles through the organizations.

mod direct;
mod exact;
mod rand;
mod round_robin;

use std::hash::{DefaultHasher, Hash, Hasher};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::schedule::{Schedule, ScheduleEntry};
use crate::sim::{simulate, FifoGreedy, Policy, SimState};
use crate::utility::{psi_vector, UtilityTracker};
use crate::workload::{Job, MachineAllocation};
use crate::Time;

pub use self::direct::DirectContr;
pub use self::exact::{distance, Decision, ExactFair, Selection};
pub use self::rand::{Rand, RandConfig, Samples};
pub use self::round_robin::RoundRobin;

/// State of one visited time moment, after its scheduling decisions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub t: Time,
    /// Utility of every organization at `t`.
    pub psi: Vec<i64>,
    /// Contribution (exact or estimated) the policy used at `t`, if it uses one.
    pub phi: Option<Vec<Ratio<i128>>>,
    /// Jobs started at `t`.
    pub started: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub policy: String,
    pub schedule: Schedule,
    pub allocation: MachineAllocation,
    pub t_end: Time,
    /// Fingerprint of the job set, used to refuse comparing different instances.
    pub jobs_digest: u64,
    /// Utility of every organization at `t_end`.
    pub psi: Vec<i64>,
    /// One row per time moment `0..=t_end` when tracing was requested.
    pub trace: Vec<TraceRow>,
}

impl RunOutput {
    pub(crate) fn new(
        policy: &str,
        schedule: Schedule,
        jobs: &[Job],
        allocation: &MachineAllocation,
        t_end: Time,
        trace: Vec<TraceRow>,
    ) -> Self {
        let psi = psi_vector(&schedule, allocation.orgs(), t_end);
        RunOutput {
            policy: policy.to_string(),
            schedule,
            allocation: allocation.clone(),
            t_end,
            jobs_digest: jobs_digest(jobs),
            psi,
            trace,
        }
    }

    pub fn orgs(&self) -> usize {
        self.allocation.orgs()
    }
}

/// Order-independent fingerprint of a job set.
pub fn jobs_digest(jobs: &[Job]) -> u64 {
    let mut sorted = jobs.to_vec();
    sorted.sort_unstable();
    let mut h = DefaultHasher::new();
    sorted.hash(&mut h);
    h.finish()
}

/// Index of the largest deficit among organizations with a waiting job,
/// lowest index on ties.
pub fn max_deficit<T: Ord>(deficits: &[T], has_waiting: &[bool]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (u, d) in deficits.iter().enumerate() {
        if !has_waiting.get(u).copied().unwrap_or(false) {
            continue;
        }
        if best.map_or(true, |b| *d > deficits[b]) {
            best = Some(u);
        }
    }
    best.ok_or_else(|| Error::contract("no organization has a waiting job"))
}

pub(crate) fn waiting_flags(state: &SimState) -> Vec<bool> {
    (0..state.orgs()).map(|u| state.has_waiting(u)).collect()
}

/// Policies available to experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyKind {
    Exact,
    Rand(RandConfig),
    Direct { seed: u64 },
    RoundRobin,
    /// Earliest-released head job first.
    Fifo,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Exact => "exact",
            PolicyKind::Rand(_) => "rand",
            PolicyKind::Direct { .. } => "direct",
            PolicyKind::RoundRobin => "rr",
            PolicyKind::Fifo => "fifo",
        }
    }
}

/// Runs `kind` over `0..=t_end`, recording a per-step trace when `trace` is set.
pub fn run_policy(
    kind: &PolicyKind,
    jobs: &[Job],
    allocation: &MachineAllocation,
    t_end: Time,
    trace: bool,
) -> Result<RunOutput> {
    match kind {
        PolicyKind::Exact => ExactFair::new().tracing(trace).run(jobs, allocation, t_end),
        PolicyKind::Rand(cfg) => {
            let policy = Rand::new(cfg, allocation)?;
            run_simulated(kind.name(), policy, jobs, allocation, t_end, trace)
        }
        PolicyKind::Direct { seed } => run_simulated(
            kind.name(),
            DirectContr::new(allocation, *seed),
            jobs,
            allocation,
            t_end,
            trace,
        ),
        PolicyKind::RoundRobin => run_simulated(
            kind.name(),
            RoundRobin::new(),
            jobs,
            allocation,
            t_end,
            trace,
        ),
        PolicyKind::Fifo => run_simulated(kind.name(), FifoGreedy, jobs, allocation, t_end, trace),
    }
}

/// Runs a [`Policy`] through the engine, optionally wrapped in a tracer.
pub fn run_simulated<P: Policy + Contributions>(
    name: &str,
    policy: P,
    jobs: &[Job],
    allocation: &MachineAllocation,
    t_end: Time,
    trace: bool,
) -> Result<RunOutput> {
    let mut traced = Traced::new(policy, allocation.orgs(), trace);
    let schedule = simulate(jobs, allocation, &mut traced, t_end)?;
    Ok(RunOutput::new(name, schedule, jobs, allocation, t_end, traced.rows))
}

/// Contributions a policy bases its decisions on, at the current step.
pub trait Contributions {
    fn contributions(&self) -> Option<Vec<Ratio<i128>>> {
        None
    }
}

impl Contributions for FifoGreedy {}

/// Records a [`TraceRow`] per step around an inner policy.
struct Traced<P> {
    inner: P,
    psi: Option<UtilityTracker>,
    rows: Vec<TraceRow>,
}

impl<P> Traced<P> {
    fn new(inner: P, orgs: usize, on: bool) -> Self {
        Traced {
            inner,
            psi: on.then(|| UtilityTracker::new(orgs)),
            rows: Vec::new(),
        }
    }
}

impl<P: Policy + Contributions> Policy for Traced<P> {
    fn begin_step(&mut self, state: &SimState) -> Result<()> {
        if let Some(tr) = &mut self.psi {
            tr.advance_to(state.clock())?;
        }
        self.inner.begin_step(state)
    }

    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        self.inner.select_org(state)
    }

    fn select_machine(&mut self, state: &SimState, org: usize) -> Result<usize> {
        self.inner.select_machine(state, org)
    }

    fn on_start(&mut self, state: &SimState, entry: &ScheduleEntry) -> Result<()> {
        if let Some(tr) = &mut self.psi {
            tr.on_start(entry.job.org, entry.job.processing, entry.start)?;
        }
        self.inner.on_start(state, entry)
    }

    fn end_step(&mut self, state: &SimState) -> Result<()> {
        self.inner.end_step(state)?;
        if let Some(tr) = &self.psi {
            self.rows.push(TraceRow {
                t: state.clock(),
                psi: tr.values().to_vec(),
                phi: self.inner.contributions(),
                started: state.started_now(),
            });
        }
        Ok(())
    }

    fn next_event(&self) -> Option<Time> {
        self.inner.next_event()
    }

    fn every_step(&self) -> bool {
        self.psi.is_some() || self.inner.every_step()
    }
}
