//! Schedules and their feasibility check.

use std::collections::HashMap;
use std::fmt;

use crate::workload::{Job, MachineAllocation};
use crate::Time;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScheduleEntry {
    pub job: Job,
    pub start: Time,
    pub machine: usize,
}

impl ScheduleEntry {
    pub fn new(job: Job, start: Time, machine: usize) -> Self {
        ScheduleEntry {
            job,
            start,
            machine,
        }
    }

    /// First slot after the job.
    pub fn end(&self) -> Time {
        self.start + self.job.processing
    }
}

/// Placements of started jobs. `horizon` is the last simulated time moment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub horizon: Time,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>, horizon: Time) -> Self {
        Schedule { entries, horizon }
    }

    /// `(start, processing)` pairs of one organization's jobs.
    pub fn parts_of(&self, org: usize) -> Vec<(Time, Time)> {
        self.entries
            .iter()
            .filter(|e| e.job.org == org)
            .map(|e| (e.start, e.job.processing))
            .collect()
    }

    pub fn entry_of(&self, org: usize, seq: usize) -> Option<&ScheduleEntry> {
        self.entries
            .iter()
            .find(|e| e.job.org == org && e.job.seq == seq)
    }

    /// Number of jobs started at each time moment `0..=horizon`.
    pub fn starts_per_step(&self) -> Vec<usize> {
        let mut counts = vec![0; self.horizon as usize + 1];
        for e in &self.entries {
            if e.start <= self.horizon {
                counts[e.start as usize] += 1;
            }
        }
        counts
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `second` starts on `machine` at `time` while `first` still runs there.
    Overlap {
        machine: usize,
        time: Time,
        first: Job,
        second: Job,
    },
    /// Job `later_seq` of `org` started at `time`, before job `earlier_seq`.
    Fifo {
        org: usize,
        earlier_seq: usize,
        later_seq: usize,
        time: Time,
    },
    /// From `time` on, `machine` is idle while `job` is released and waiting.
    Greedy { time: Time, machine: usize, job: Job },
    EarlyStart { job: Job, start: Time },
    UnknownMachine { job: Job, machine: usize },
    UnknownJob { job: Job },
    Duplicate { job: Job },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap {
                machine,
                time,
                first,
                second,
            } => write!(
                f,
                "t={time} machine {machine}: job {}/{} overlaps job {}/{}",
                second.org, second.seq, first.org, first.seq
            ),
            Violation::Fifo {
                org,
                earlier_seq,
                later_seq,
                time,
            } => write!(
                f,
                "t={time} org {org}: job {later_seq} started before job {earlier_seq}"
            ),
            Violation::Greedy { time, machine, job } => write!(
                f,
                "t={time}: machine {machine} idle while job {}/{} waits",
                job.org, job.seq
            ),
            Violation::EarlyStart { job, start } => write!(
                f,
                "t={start}: job {}/{} started before its release {}",
                job.org, job.seq, job.release
            ),
            Violation::UnknownMachine { job, machine } => {
                write!(f, "job {}/{} placed on unknown machine {machine}", job.org, job.seq)
            }
            Violation::UnknownJob { job } => {
                write!(f, "job {}/{} is not part of the workload", job.org, job.seq)
            }
            Violation::Duplicate { job } => {
                write!(f, "job {}/{} is placed more than once", job.org, job.seq)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn overlaps(&self) -> usize {
        self.count(|v| matches!(v, Violation::Overlap { .. }))
    }

    pub fn fifo(&self) -> usize {
        self.count(|v| matches!(v, Violation::Fifo { .. }))
    }

    pub fn greedy(&self) -> usize {
        self.count(|v| matches!(v, Violation::Greedy { .. }))
    }

    pub fn early_starts(&self) -> usize {
        self.count(|v| matches!(v, Violation::EarlyStart { .. }))
    }

    fn count(&self, pred: impl Fn(&Violation) -> bool) -> usize {
        self.violations.iter().filter(|v| pred(v)).count()
    }
}

/// Checks machine exclusivity, per-organization FIFO order, greediness up to
/// the horizon, and that no job starts before its release.
///
/// Jobs released after the horizon are ignored by the greediness check.
pub fn validate_schedule(
    schedule: &Schedule,
    jobs: &[Job],
    allocation: &MachineAllocation,
) -> ValidationReport {
    let mut out = Vec::new();
    let machines = allocation.total();
    let known: HashMap<(usize, usize), &Job> = jobs.iter().map(|j| ((j.org, j.seq), j)).collect();

    // first placement of every known job
    let mut start_of: HashMap<(usize, usize), Time> = HashMap::new();
    let mut per_machine: Vec<Vec<&ScheduleEntry>> = vec![Vec::new(); machines];
    for e in &schedule.entries {
        let key = (e.job.org, e.job.seq);
        match known.get(&key) {
            Some(j) if **j == e.job => {}
            _ => {
                out.push(Violation::UnknownJob { job: e.job });
                continue;
            }
        }
        if start_of.contains_key(&key) {
            out.push(Violation::Duplicate { job: e.job });
        } else {
            start_of.insert(key, e.start);
        }
        if e.start < e.job.release {
            out.push(Violation::EarlyStart {
                job: e.job,
                start: e.start,
            });
        }
        if e.machine >= machines {
            out.push(Violation::UnknownMachine {
                job: e.job,
                machine: e.machine,
            });
        } else {
            per_machine[e.machine].push(e);
        }
    }

    // busy intervals per machine, merged
    let mut busy: Vec<Vec<(Time, Time)>> = vec![Vec::new(); machines];
    for (m, list) in per_machine.iter_mut().enumerate() {
        list.sort_by_key(|e| (e.start, e.end()));
        let mut running: Option<&ScheduleEntry> = None;
        for &e in list.iter() {
            if let Some(r) = running {
                if e.start < r.end() {
                    out.push(Violation::Overlap {
                        machine: m,
                        time: e.start,
                        first: r.job,
                        second: e.job,
                    });
                }
            }
            if running.map_or(true, |r| e.end() > r.end()) {
                running = Some(e);
            }
            match busy[m].last_mut() {
                Some(last) if e.start <= last.1 => last.1 = last.1.max(e.end()),
                _ => busy[m].push((e.start, e.end())),
            }
        }
    }

    let mut per_org: HashMap<usize, Vec<&Job>> = HashMap::new();
    for j in jobs {
        per_org.entry(j.org).or_default().push(j);
    }
    let mut orgs: Vec<usize> = per_org.keys().copied().collect();
    orgs.sort_unstable();
    for org in orgs {
        let list = per_org.get_mut(&org).expect("key");
        list.sort_by_key(|j| j.seq);
        // (seq, start) of the latest-starting job so far; unstarted jobs start "at infinity"
        let mut latest: Option<(usize, Time)> = None;
        for j in list.iter() {
            let s = start_of.get(&(org, j.seq)).copied().unwrap_or(Time::MAX);
            match latest {
                Some((prev_seq, prev)) if s < prev => out.push(Violation::Fifo {
                    org,
                    earlier_seq: prev_seq,
                    later_seq: j.seq,
                    time: s,
                }),
                Some((_, prev)) if s == prev => {}
                _ => latest = Some((j.seq, s)),
            }
        }
    }

    out.extend(greedy_violations(
        schedule.horizon,
        jobs,
        &start_of,
        &busy,
    ));
    ValidationReport { violations: out }
}

fn greedy_violations(
    horizon: Time,
    jobs: &[Job],
    start_of: &HashMap<(usize, usize), Time>,
    busy: &[Vec<(Time, Time)>],
) -> Vec<Violation> {
    let machines = busy.len() as i64;
    // (time, change in busy machines, change in waiting jobs)
    let mut events: Vec<(Time, i64, i64)> = Vec::new();
    for intervals in busy {
        for &(s, e) in intervals {
            events.push((s, 1, 0));
            events.push((e, -1, 0));
        }
    }
    for j in jobs.iter().filter(|j| j.release <= horizon) {
        match start_of.get(&(j.org, j.seq)) {
            Some(&s) if s <= j.release => {}
            Some(&s) => {
                events.push((j.release, 0, 1));
                events.push((s, 0, -1));
            }
            None => events.push((j.release, 0, 1)),
        }
    }
    events.sort_unstable();

    let mut out = Vec::new();
    let (mut busy_now, mut waiting) = (0i64, 0i64);
    let mut in_violation = false;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        if t > horizon {
            break;
        }
        while i < events.len() && events[i].0 == t {
            busy_now += events[i].1;
            waiting += events[i].2;
            i += 1;
        }
        let bad = busy_now < machines && waiting > 0;
        if bad && !in_violation {
            let machine = busy
                .iter()
                .position(|iv| !iv.iter().any(|&(s, e)| s <= t && t < e))
                .expect("an idle machine exists");
            let job = *jobs
                .iter()
                .find(|j| {
                    j.release <= t
                        && start_of
                            .get(&(j.org, j.seq))
                            .map_or(true, |&s| s > t)
                })
                .expect("a waiting job exists");
            out.push(Violation::Greedy { time: t, machine, job });
        }
        in_violation = bad;
    }
    out
}
