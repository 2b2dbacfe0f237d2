use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Signed;

use crate::coalition::{enumerate_subcoalitions, Coalition};
use crate::error::{Error, Result};
use crate::schedule::{Schedule, ScheduleEntry};
use crate::utility::{PsiSp, Utility};
use crate::workload::{group_by_org, Job, MachineAllocation};
use crate::Time;

use super::{RunOutput, TraceRow};

/// How the exact fair scheduler picks among organizations with waiting jobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Selection {
    /// Largest `φ − ψ`. Exact for the strategy-proof utility.
    #[default]
    MaxDeficit,
    /// Smallest Manhattan distance between contributions and utilities after
    /// the start, with the utility gain of the start measured one step ahead.
    Distance,
}

/// One scheduling decision inside some coalition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub t: Time,
    pub coalition: Coalition,
    /// Contribution of each member, in ascending member order.
    pub phi: Vec<Ratio<i128>>,
    /// Utility of each member, in ascending member order.
    pub psi: Vec<i64>,
    /// Organizations with a waiting job, ascending.
    pub eligible: Vec<usize>,
    /// Utility gain at `t + 1` of starting each eligible organization's head job.
    pub delta: Vec<i64>,
    pub chosen: usize,
}

/// `|φ_u + Δ/n − ψ_u − Δ| + Σ_{u' ≠ u} |φ_u' + Δ/n − ψ_u'|` for candidate
/// position `u` among `n` members.
pub fn distance(phi: &[BigRational], psi: &[i64], candidate: usize, delta: i64) -> BigRational {
    let n = BigInt::from(phi.len());
    let share = BigRational::new(BigInt::from(delta), n);
    let mut total = BigRational::from_integer(BigInt::from(0));
    for (i, (f, &p)) in phi.iter().zip(psi).enumerate() {
        let mut term = f + &share - BigRational::from_integer(BigInt::from(p));
        if i == candidate {
            term -= BigRational::from_integer(BigInt::from(delta));
        }
        total += term.abs();
    }
    total
}

/// The exact fair scheduler. Every subcoalition keeps its own greedy schedule;
/// at each step the contributions of a coalition's members are computed
/// exactly from the values of all its subcoalitions, and each free machine
/// goes to the member that most deserves it.
#[derive(Clone, Debug)]
pub struct ExactFair<U: Utility = PsiSp> {
    utility: U,
    selection: Selection,
    trace: bool,
}

impl ExactFair<PsiSp> {
    pub fn new() -> Self {
        ExactFair::with_utility(PsiSp)
    }
}

impl Default for ExactFair<PsiSp> {
    fn default() -> Self {
        ExactFair::new()
    }
}

struct CoalitionState<L> {
    coalition: Coalition,
    members: Vec<usize>,
    /// Global id of each local machine. Members' blocks are concatenated in
    /// member order, so local and global ids sort the same way.
    machine_ids: Vec<usize>,
    free: BTreeSet<usize>,
    busy: BinaryHeap<Reverse<(Time, usize)>>,
    started: Vec<usize>,
    ledgers: Vec<L>,
}

fn checked(op: Option<i128>) -> Result<i128> {
    op.ok_or(Error::Overflow("exact fair contributions"))
}

impl<U: Utility> ExactFair<U> {
    pub fn with_utility(utility: U) -> Self {
        ExactFair {
            utility,
            selection: Selection::default(),
            trace: false,
        }
    }

    pub fn selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    pub fn tracing(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn run(&self, jobs: &[Job], allocation: &MachineAllocation, t_end: Time) -> Result<RunOutput> {
        self.run_inner(jobs, allocation, t_end, None)
    }

    /// Like [`ExactFair::run`], reporting every decision of every coalition.
    pub fn run_observed(
        &self,
        jobs: &[Job],
        allocation: &MachineAllocation,
        t_end: Time,
        observer: &mut dyn FnMut(&Decision),
    ) -> Result<RunOutput> {
        self.run_inner(jobs, allocation, t_end, Some(observer))
    }

    fn run_inner(
        &self,
        jobs: &[Job],
        allocation: &MachineAllocation,
        t_end: Time,
        mut observer: Option<&mut dyn FnMut(&Decision)>,
    ) -> Result<RunOutput> {
        let k = allocation.orgs();
        let grand = Coalition::grand(k)?;
        let per_org = group_by_org(jobs, k)?;
        let order: Vec<Coalition> = enumerate_subcoalitions(grand)?
            .filter(|c| !c.is_empty())
            .collect();
        let mut index = vec![usize::MAX; 1usize << k];
        let mut states: Vec<CoalitionState<U::Ledger>> = Vec::with_capacity(order.len());
        for (i, &c) in order.iter().enumerate() {
            index[c.bits() as usize] = i;
            let members: Vec<usize> = c.members().collect();
            let machine_ids: Vec<usize> = members
                .iter()
                .flat_map(|&u| allocation.machines_of(u))
                .collect();
            states.push(CoalitionState {
                coalition: c,
                free: (0..machine_ids.len()).collect(),
                machine_ids,
                busy: BinaryHeap::new(),
                started: vec![0; members.len()],
                ledgers: members.iter().map(|_| self.utility.ledger()).collect(),
                members,
            });
        }
        let grand_idx = states.len() - 1;
        let factorial: Vec<i128> = (0..=k)
            .scan(1i128, |f, i| {
                if i > 0 {
                    *f *= i as i128;
                }
                Some(*f)
            })
            .collect();

        let mut released = vec![0usize; k];
        let mut ends: BinaryHeap<Reverse<Time>> = BinaryHeap::new();
        let mut entries: Vec<ScheduleEntry> = Vec::new();
        let mut rows: Vec<TraceRow> = Vec::new();
        // value of every coalition at the current step, computed on demand
        let mut value_cache: Vec<(Time, i64)> = vec![(Time::MAX, 0); 1usize << k];

        let mut t: Time = 0;
        loop {
            for u in 0..k {
                while released[u] < per_org[u].len() && per_org[u][released[u]].release <= t {
                    released[u] += 1;
                }
            }
            while ends.peek().is_some_and(|Reverse(e)| *e <= t) {
                ends.pop();
            }
            let mut grand_started = 0;
            for idx in 0..states.len() {
                let is_grand = idx == grand_idx;
                {
                    let st = &mut states[idx];
                    while let Some(&Reverse((end, m))) = st.busy.peek() {
                        if end > t {
                            break;
                        }
                        st.busy.pop();
                        st.free.insert(m);
                    }
                }
                let st = &states[idx];
                let eligible: Vec<usize> = (0..st.members.len())
                    .filter(|&i| st.started[i] < released[st.members[i]])
                    .collect();
                let deciding = !st.free.is_empty() && !eligible.is_empty();
                let traced = self.trace && is_grand;
                if !deciding && !traced {
                    continue;
                }
                let needs_phi = traced
                    || observer.is_some()
                    || (deciding && (eligible.len() > 1 || self.selection == Selection::Distance));
                let n = st.members.len();
                let denom = factorial[n];
                let mut psi: Vec<i64> = st
                    .ledgers
                    .iter()
                    .map(|l| self.utility.value(l, t))
                    .collect();
                let phi_num: Vec<i128> = if needs_phi {
                    self.contribution_numerators(st.coalition, t, &states, &index, &mut value_cache, &factorial)?
                } else {
                    vec![0; n]
                };

                let mut started_here = 0;
                let st = &mut states[idx];
                let mut eligible = eligible;
                while !st.free.is_empty() && !eligible.is_empty() {
                    let deltas: Vec<i64> = if self.selection == Selection::Distance || observer.is_some() {
                        eligible
                            .iter()
                            .map(|&i| {
                                let job = &per_org[st.members[i]][st.started[i]];
                                let mut next = st.ledgers[i].clone();
                                self.utility.record(&mut next, t, job);
                                self.utility.value(&next, t + 1) - self.utility.value(&st.ledgers[i], t + 1)
                            })
                            .collect()
                    } else {
                        Vec::new()
                    };
                    let pick = match self.selection {
                        Selection::MaxDeficit => {
                            let mut best: Option<(usize, i128)> = None;
                            for &i in &eligible {
                                let d = checked(
                                    (psi[i] as i128)
                                        .checked_mul(denom)
                                        .and_then(|x| phi_num[i].checked_sub(x)),
                                )?;
                                if best.map_or(true, |(_, b)| d > b) {
                                    best = Some((i, d));
                                }
                            }
                            best.expect("eligible is not empty").0
                        }
                        Selection::Distance => {
                            let mut best: Option<(usize, i128)> = None;
                            for (pos, &i) in eligible.iter().enumerate() {
                                let d = scaled_distance(&phi_num, &psi, denom, i, deltas[pos] as i128)?;
                                if best.map_or(true, |(_, b)| d < b) {
                                    best = Some((i, d));
                                }
                            }
                            best.expect("eligible is not empty").0
                        }
                    };
                    if let Some(obs) = observer.as_mut() {
                        obs(&Decision {
                            t,
                            coalition: st.coalition,
                            phi: phi_num.iter().map(|&x| Ratio::new(x, denom)).collect(),
                            psi: psi.clone(),
                            eligible: eligible.iter().map(|&i| st.members[i]).collect(),
                            delta: deltas.clone(),
                            chosen: st.members[pick],
                        });
                    }
                    let org = st.members[pick];
                    let job = per_org[org][st.started[pick]];
                    st.started[pick] += 1;
                    let local = st.free.pop_first().expect("free machine");
                    let end = t + job.processing;
                    st.busy.push(Reverse((end, local)));
                    ends.push(Reverse(end));
                    self.utility.record(&mut st.ledgers[pick], t, &job);
                    psi[pick] = self.utility.value(&st.ledgers[pick], t);
                    if is_grand {
                        entries.push(ScheduleEntry::new(job, t, st.machine_ids[local]));
                    }
                    if st.started[pick] >= released[org] {
                        eligible.retain(|&i| i != pick);
                    }
                    started_here += 1;
                }
                if is_grand {
                    grand_started = started_here;
                }
                if traced {
                    rows.push(TraceRow {
                        t,
                        psi: psi.clone(),
                        phi: Some(phi_num.iter().map(|&x| Ratio::new(x, denom)).collect()),
                        started: grand_started,
                    });
                }
            }
            if t >= t_end {
                break;
            }
            t = if self.trace {
                t + 1
            } else {
                let next_release = (0..k)
                    .filter_map(|u| per_org[u].get(released[u]).map(|j| j.release))
                    .min();
                let next_end = ends.peek().map(|Reverse(e)| *e);
                [next_release, next_end]
                    .into_iter()
                    .flatten()
                    .min()
                    .unwrap_or(t_end)
                    .clamp(t + 1, t_end)
            };
        }
        let schedule = Schedule::new(entries, t_end);
        Ok(RunOutput::new("exact", schedule, jobs, allocation, t_end, rows))
    }

    /// `n!·φ_u` for every member `u` of `c`, from the values at `t` of all
    /// subcoalitions of `c`.
    fn contribution_numerators(
        &self,
        c: Coalition,
        t: Time,
        states: &[CoalitionState<U::Ledger>],
        index: &[usize],
        cache: &mut [(Time, i64)],
        factorial: &[i128],
    ) -> Result<Vec<i128>> {
        let n = c.len();
        let mut value = |s: Coalition| -> i64 {
            if s.is_empty() {
                return 0;
            }
            let slot = &mut cache[s.bits() as usize];
            if slot.0 != t {
                let st = &states[index[s.bits() as usize]];
                let v = st.ledgers.iter().map(|l| self.utility.value(l, t)).sum();
                *slot = (t, v);
            }
            slot.1
        };
        let members: Vec<usize> = c.members().collect();
        let mut out = Vec::with_capacity(n);
        for &u in &members {
            // marginal contributions of u summed per size of the coalition it joins
            let mut by_size = vec![0i128; n];
            for s in c.without(u).submasks() {
                let with = value(s.with(u)) as i128;
                let without = value(s) as i128;
                by_size[s.len()] = checked(by_size[s.len()].checked_add(with - without))?;
            }
            let mut num = 0i128;
            for (size, total) in by_size.into_iter().enumerate() {
                let w = factorial[size] * factorial[n - size - 1];
                num = checked(total.checked_mul(w).and_then(|x| num.checked_add(x)))?;
            }
            out.push(num);
        }
        Ok(out)
    }
}

/// `n!` times [`distance`], in integers.
fn scaled_distance(phi_num: &[i128], psi: &[i64], denom: i128, candidate: usize, delta: i128) -> Result<i128> {
    let n = phi_num.len() as i128;
    let share = checked(delta.checked_mul(denom / n))?;
    let d_delta = checked(delta.checked_mul(denom))?;
    let mut total = 0i128;
    for (i, (&f, &p)) in phi_num.iter().zip(psi).enumerate() {
        let mut term = checked(
            (p as i128)
                .checked_mul(denom)
                .and_then(|dp| f.checked_add(share)?.checked_sub(dp)),
        )?;
        if i == candidate {
            term = checked(term.checked_sub(d_delta))?;
        }
        total = checked(total.checked_add(term.checked_abs().ok_or(Error::Overflow("distance"))?))?;
    }
    Ok(total)
}
