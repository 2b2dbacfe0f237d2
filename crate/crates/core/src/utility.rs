//! The strategy-proof utility, flow time, coalition value and incremental
//! utility bookkeeping.
//!
//! The utility of an organization at time `t` sums, over every unit part of
//! its jobs executed in a slot `τ < t`, the amount `t − τ`. A job started at
//! `t` is therefore worth nothing at `t` and 1 at `t + 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::workload::Job;
use crate::Time;

/// Utility of one job started at `start` with `processing` units, at `t`.
pub fn job_psi(start: Time, processing: Time, t: Time) -> i64 {
    if start >= t {
        return 0;
    }
    let elapsed = (t - start) as i128;
    let q = (processing as i128).min(elapsed);
    (q * elapsed - q * (q - 1) / 2) as i64
}

/// Sum of [`job_psi`] over `(start, processing)` pairs.
pub fn psi_sp<I>(entries: I, t: Time) -> i64
where
    I: IntoIterator<Item = (Time, Time)>,
{
    entries.into_iter().map(|(s, p)| job_psi(s, p, t)).sum()
}

/// Utility of every organization `0..k` in `schedule` at `t`.
pub fn psi_vector(schedule: &Schedule, k: usize, t: Time) -> Vec<i64> {
    let mut out = vec![0; k];
    for e in &schedule.entries {
        out[e.job.org] += job_psi(e.start, e.job.processing, t);
    }
    out
}

/// Total flow time `Σ (start + processing − release)` of `(release, start,
/// processing)` triples. Every job must be complete by `t`.
pub fn flow_time<I>(entries: I, t: Time) -> Result<i64>
where
    I: IntoIterator<Item = (Time, Time, Time)>,
{
    let mut total = 0i64;
    for (r, s, p) in entries {
        if s + p > t {
            return Err(Error::Domain(format!(
                "job started at {s} with processing {p} is not complete at {t}"
            )));
        }
        total += (s + p - r) as i64;
    }
    Ok(total)
}

/// Value of coalition `members` at `t`: the summed utility of its members.
/// Every job in `schedule` must belong to a member.
pub fn coalition_value(schedule: &Schedule, members: Coalition, t: Time) -> Result<i64> {
    let mut v = 0;
    for e in &schedule.entries {
        if !members.contains(e.job.org) {
            return Err(Error::contract(format!(
                "job of organization {} in a schedule of coalition {members}",
                e.job.org
            )));
        }
        v += job_psi(e.start, e.job.processing, t);
    }
    Ok(v)
}

/// Step-driven utility accounting for several keys (organizations).
///
/// Per key it keeps the number of running jobs, the number of unit parts
/// executed so far and the accumulated utility. Moving the clock from `t` to
/// `t + 1` first adds the running jobs to the executed count, then adds the
/// executed count to the utility.
#[derive(Clone, Debug)]
pub struct UtilityTracker {
    clock: Time,
    active: Vec<i64>,
    executed: Vec<i64>,
    utility: Vec<i64>,
    ends: BinaryHeap<Reverse<(Time, usize)>>,
}

impl UtilityTracker {
    pub fn new(keys: usize) -> Self {
        UtilityTracker {
            clock: 0,
            active: vec![0; keys],
            executed: vec![0; keys],
            utility: vec![0; keys],
            ends: BinaryHeap::new(),
        }
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn value(&self, key: usize) -> i64 {
        self.utility[key]
    }

    pub fn values(&self) -> &[i64] {
        &self.utility
    }

    pub fn total(&self) -> i64 {
        self.utility.iter().sum()
    }

    /// Unit parts of `key` executed in slots before the clock.
    pub fn executed(&self, key: usize) -> i64 {
        self.executed[key]
    }

    /// Jobs of `key` occupying the current slot.
    pub fn active(&self, key: usize) -> i64 {
        self.active[key]
    }

    /// One step forward. Returns how many jobs completed at the new clock.
    pub fn advance(&mut self) -> usize {
        for key in 0..self.active.len() {
            self.executed[key] += self.active[key];
            self.utility[key] += self.executed[key];
        }
        self.clock += 1;
        self.pop_completed()
    }

    /// Advances to `t` in closed form between completions. Returns the number
    /// of jobs completed on the way.
    pub fn advance_to(&mut self, t: Time) -> Result<usize> {
        if t < self.clock {
            return Err(Error::contract(format!(
                "tracker clock cannot move from {} to {t}",
                self.clock
            )));
        }
        let mut completed = 0;
        while self.clock < t {
            let next = self
                .ends
                .peek()
                .map_or(t, |Reverse((end, _))| (*end).min(t));
            let d = (next - self.clock) as i64;
            for key in 0..self.active.len() {
                let a = self.active[key];
                self.utility[key] += d * self.executed[key] + a * d * (d + 1) / 2;
                self.executed[key] += a * d;
            }
            self.clock = next;
            completed += self.pop_completed();
        }
        Ok(completed)
    }

    /// Registers a job of `key` starting at the current clock.
    pub fn on_start(&mut self, key: usize, processing: Time, t: Time) -> Result<()> {
        if t != self.clock {
            return Err(Error::contract(format!(
                "job started at {t} but the tracker is at {}",
                self.clock
            )));
        }
        if processing == 0 {
            return Err(Error::contract("job with zero processing time"));
        }
        self.active[key] += 1;
        self.ends.push(Reverse((t + processing, key)));
        Ok(())
    }

    /// Earliest future completion.
    pub fn next_completion(&self) -> Option<Time> {
        self.ends.peek().map(|Reverse((end, _))| *end)
    }

    fn pop_completed(&mut self) -> usize {
        let mut n = 0;
        while let Some(&Reverse((end, key))) = self.ends.peek() {
            if end > self.clock {
                break;
            }
            self.ends.pop();
            self.active[key] -= 1;
            n += 1;
        }
        n
    }
}

/// A per-organization utility usable by the exact fair scheduler.
///
/// A ledger accumulates an organization's started jobs. `record` is called
/// with non-decreasing start times and `value` with times not before the
/// latest recorded start.
pub trait Utility {
    type Ledger: Clone + std::fmt::Debug;

    fn ledger(&self) -> Self::Ledger;

    fn record(&self, ledger: &mut Self::Ledger, start: Time, job: &Job);

    fn value(&self, ledger: &Self::Ledger, t: Time) -> i64;
}

/// The strategy-proof utility with an O(running jobs) ledger: finished jobs
/// are folded into two integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct PsiSp;

#[derive(Clone, Debug, Default)]
pub struct PsiSpLedger {
    /// Σ p over folded jobs.
    parts: i64,
    /// Σ (p·s + p(p−1)/2) over folded jobs.
    offset: i64,
    /// `(start, processing)` of jobs that may still be running.
    open: Vec<(Time, Time)>,
}

impl Utility for PsiSp {
    type Ledger = PsiSpLedger;

    fn ledger(&self) -> PsiSpLedger {
        PsiSpLedger::default()
    }

    fn record(&self, ledger: &mut PsiSpLedger, start: Time, job: &Job) {
        let mut i = 0;
        while i < ledger.open.len() {
            let (s, p) = ledger.open[i];
            if s + p <= start {
                let (s, p) = (s as i64, p as i64);
                ledger.parts += p;
                ledger.offset += p * s + p * (p - 1) / 2;
                ledger.open.swap_remove(i);
            } else {
                i += 1;
            }
        }
        ledger.open.push((start, job.processing));
    }

    fn value(&self, ledger: &PsiSpLedger, t: Time) -> i64 {
        ledger.parts * t as i64 - ledger.offset + psi_sp(ledger.open.iter().copied(), t)
    }
}

/// Any utility given as a function of an organization's `(start, processing)`
/// pairs and the time, re-evaluated from scratch on every query.
#[derive(Clone, Copy)]
pub struct FromScratch<F>(pub F);

impl<F: Fn(&[(Time, Time)], Time) -> i64> Utility for FromScratch<F> {
    type Ledger = Vec<(Time, Time)>;

    fn ledger(&self) -> Self::Ledger {
        Vec::new()
    }

    fn record(&self, ledger: &mut Self::Ledger, start: Time, job: &Job) {
        ledger.push((start, job.processing));
    }

    fn value(&self, ledger: &Self::Ledger, t: Time) -> i64 {
        (self.0)(ledger, t)
    }
}
