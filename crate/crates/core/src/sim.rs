//! Discrete-time greedy simulation engine.
//!
//! At every time moment `t` the engine releases the jobs with release `t`,
//! frees machines whose job ended, then, as long as a machine is free and a
//! job waits, asks the policy which organization starts its next job. Steps in
//! which nothing can change (no release, no completion) are skipped unless the
//! policy asks to see every step.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::schedule::{Schedule, ScheduleEntry};
use crate::workload::{group_by_org, Job, MachineAllocation};
use crate::Time;

/// Organization-selection strategy driven by [`simulate`].
pub trait Policy {
    /// Called once per visited time moment, after releases and completions.
    fn begin_step(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }

    /// Must return an organization with a waiting job.
    fn select_org(&mut self, state: &SimState) -> Result<usize>;

    /// Must return a free machine. Defaults to the lowest free id.
    fn select_machine(&mut self, state: &SimState, _org: usize) -> Result<usize> {
        state
            .lowest_free()
            .ok_or_else(|| Error::contract("no free machine"))
    }

    fn on_start(&mut self, _state: &SimState, _entry: &ScheduleEntry) -> Result<()> {
        Ok(())
    }

    /// Called after the last decision of a visited time moment.
    fn end_step(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }

    /// Earliest future time at which the policy's own bookkeeping changes.
    fn next_event(&self) -> Option<Time> {
        None
    }

    /// Visit every time moment instead of skipping quiet ones.
    fn every_step(&self) -> bool {
        false
    }
}

/// Wraps a closure as a policy.
pub struct FnPolicy<F>(pub F);

impl<F: FnMut(&SimState) -> usize> Policy for FnPolicy<F> {
    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        Ok((self.0)(state))
    }
}

/// Starts the waiting head job with the earliest release, lowest org on ties.
#[derive(Clone, Copy, Debug, Default)]
pub struct FifoGreedy;

impl Policy for FifoGreedy {
    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        state
            .eligible()
            .min_by_key(|&u| (state.queue(u)[0].release, u))
            .ok_or_else(|| Error::contract("no waiting job"))
    }
}

#[derive(Clone, Debug)]
pub struct SimState {
    clock: Time,
    allocation: MachineAllocation,
    owners: Vec<usize>,
    jobs: Vec<Vec<Job>>,
    released: Vec<usize>,
    started: Vec<usize>,
    free: BTreeSet<usize>,
    busy: BinaryHeap<Reverse<(Time, usize)>>,
    busy_until: Vec<Time>,
    entries: Vec<ScheduleEntry>,
    started_now: usize,
}

impl SimState {
    pub fn new(jobs: &[Job], allocation: &MachineAllocation) -> Result<Self> {
        let k = allocation.orgs();
        let per_org = group_by_org(jobs, k)?;
        Ok(SimState {
            clock: 0,
            allocation: allocation.clone(),
            owners: allocation.owners(),
            jobs: per_org,
            released: vec![0; k],
            started: vec![0; k],
            free: (0..allocation.total()).collect(),
            busy: BinaryHeap::new(),
            busy_until: vec![0; allocation.total()],
            entries: Vec::new(),
            started_now: 0,
        })
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn orgs(&self) -> usize {
        self.jobs.len()
    }

    pub fn allocation(&self) -> &MachineAllocation {
        &self.allocation
    }

    pub fn owner(&self, machine: usize) -> usize {
        self.owners[machine]
    }

    /// Released, not yet started jobs of `org`, head first.
    pub fn queue(&self, org: usize) -> &[Job] {
        &self.jobs[org][self.started[org]..self.released[org]]
    }

    pub fn has_waiting(&self, org: usize) -> bool {
        org < self.jobs.len() && self.started[org] < self.released[org]
    }

    pub fn any_waiting(&self) -> bool {
        (0..self.orgs()).any(|u| self.has_waiting(u))
    }

    /// Organizations with a waiting job, ascending.
    pub fn eligible(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.orgs()).filter(move |&u| self.has_waiting(u))
    }

    pub fn started_count(&self, org: usize) -> usize {
        self.started[org]
    }

    pub fn released_count(&self, org: usize) -> usize {
        self.released[org]
    }

    /// All jobs of `org` in FIFO order, released or not.
    pub fn jobs_of(&self, org: usize) -> &[Job] {
        &self.jobs[org]
    }

    pub fn free_machines(&self) -> impl Iterator<Item = usize> + '_ {
        self.free.iter().copied()
    }

    pub fn has_free(&self) -> bool {
        !self.free.is_empty()
    }

    pub fn lowest_free(&self) -> Option<usize> {
        self.free.first().copied()
    }

    pub fn is_free(&self, machine: usize) -> bool {
        self.free.contains(&machine)
    }

    /// End of the job on `machine`; not after the clock when the machine is free.
    pub fn busy_until(&self, machine: usize) -> Time {
        self.busy_until[machine]
    }

    /// Jobs started during the current time moment.
    pub fn started_now(&self) -> usize {
        self.started_now
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    /// Moves the clock to `t`, releasing jobs and freeing machines.
    pub fn advance_to(&mut self, t: Time) -> Result<()> {
        if t < self.clock {
            return Err(Error::contract(format!(
                "clock cannot move from {} to {t}",
                self.clock
            )));
        }
        self.clock = t;
        self.started_now = 0;
        for u in 0..self.jobs.len() {
            let list = &self.jobs[u];
            while self.released[u] < list.len() && list[self.released[u]].release <= t {
                self.released[u] += 1;
            }
        }
        while let Some(&Reverse((end, m))) = self.busy.peek() {
            if end > t {
                break;
            }
            self.busy.pop();
            self.free.insert(m);
        }
        Ok(())
    }

    /// Starts the head job of `org` on `machine` at the current time.
    pub fn start(&mut self, org: usize, machine: usize) -> Result<ScheduleEntry> {
        if !self.has_waiting(org) {
            return Err(Error::contract(format!(
                "t={}: organization {org} has no waiting job",
                self.clock
            )));
        }
        if !self.free.remove(&machine) {
            return Err(Error::contract(format!(
                "t={}: machine {machine} is not free",
                self.clock
            )));
        }
        let job = self.jobs[org][self.started[org]];
        self.started[org] += 1;
        let entry = ScheduleEntry::new(job, self.clock, machine);
        self.busy_until[machine] = entry.end();
        self.busy.push(Reverse((entry.end(), machine)));
        self.entries.push(entry);
        self.started_now += 1;
        Ok(entry)
    }

    /// Next time a job is released or a machine frees up.
    pub fn next_event(&self) -> Option<Time> {
        let release = (0..self.jobs.len())
            .filter_map(|u| self.jobs[u].get(self.released[u]).map(|j| j.release))
            .min();
        let completion = self.busy.peek().map(|Reverse((end, _))| *end);
        match (release, completion) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn into_schedule(self, horizon: Time) -> Schedule {
        Schedule::new(self.entries, horizon)
    }
}

/// Runs `policy` greedily over `0..=t_end`. Jobs released after `t_end` are
/// never released.
pub fn simulate(
    jobs: &[Job],
    allocation: &MachineAllocation,
    policy: &mut dyn Policy,
    t_end: Time,
) -> Result<Schedule> {
    let mut state = SimState::new(jobs, allocation)?;
    let every = policy.every_step();
    let mut t = 0;
    loop {
        state.advance_to(t)?;
        policy.begin_step(&state)?;
        while state.has_free() && state.any_waiting() {
            let org = policy.select_org(&state)?;
            if !state.has_waiting(org) {
                return Err(Error::contract(format!(
                    "t={t}: policy selected organization {org} with an empty queue"
                )));
            }
            let machine = policy.select_machine(&state, org)?;
            let entry = state.start(org, machine)?;
            policy.on_start(&state, &entry)?;
        }
        policy.end_step(&state)?;
        if t >= t_end {
            break;
        }
        t = if every {
            t + 1
        } else {
            [state.next_event(), policy.next_event()]
                .into_iter()
                .flatten()
                .min()
                .unwrap_or(t_end)
                .clamp(t + 1, t_end)
        };
    }
    Ok(state.into_schedule(t_end))
}
