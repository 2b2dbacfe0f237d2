use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_rational::Ratio;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::schedule::ScheduleEntry;
use crate::shapley::{sample_prefixes, sample_size, PrefixSample};
use crate::sim::{Policy, SimState};
use crate::utility::UtilityTracker;
use crate::workload::{Job, MachineAllocation};
use crate::Time;

use super::{max_deficit, waiting_flags, Contributions};

/// How many orderings the sampled scheduler draws.
#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    /// Enough for contributions within `epsilon·v` with probability `lambda`.
    Bound { epsilon: f64, lambda: f64 },
    Count(usize),
    /// Every ordering once (small `k` only); contributions are then exact.
    AllOrderings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandConfig {
    pub samples: Samples,
    pub seed: u64,
}

impl RandConfig {
    pub fn new(samples: Samples, seed: u64) -> Self {
        RandConfig { samples, seed }
    }

    pub fn sample(&self, k: usize) -> Result<PrefixSample> {
        match self.samples {
            Samples::Bound { epsilon, lambda } => {
                sample_prefixes(k, sample_size(k, epsilon, lambda)?, self.seed)
            }
            Samples::Count(n) => sample_prefixes(k, n, self.seed),
            Samples::AllOrderings => PrefixSample::all_orderings(k),
        }
    }
}

/// Greedy schedule of one sampled coalition, kept only as far as its value
/// needs: running jobs and a utility counter. The longest-waiting jobs of the
/// coalition start first.
#[derive(Clone, Debug)]
struct SampledCoalition {
    coalition: Coalition,
    machines: usize,
    started: Vec<usize>,
    running: BinaryHeap<Reverse<Time>>,
    value: UtilityTracker,
}

impl SampledCoalition {
    fn step(&mut self, state: &SimState) -> Result<()> {
        let t = state.clock();
        self.value.advance_to(t)?;
        while self.running.peek().is_some_and(|Reverse(end)| *end <= t) {
            self.running.pop();
        }
        while self.running.len() < self.machines {
            let next = self
                .coalition
                .members()
                .filter(|&u| self.started[u] < state.released_count(u))
                .min_by_key(|&u| (state.jobs_of(u)[self.started[u]].release, u));
            let Some(u) = next else { break };
            let job: Job = state.jobs_of(u)[self.started[u]];
            self.started[u] += 1;
            self.running.push(Reverse(t + job.processing));
            self.value.on_start(0, job.processing, t)?;
        }
        Ok(())
    }
}

/// Contributions estimated from sampled orderings of the organizations.
///
/// For every sampled prefix (and prefix plus the next organization) a greedy
/// schedule of that coalition is simulated alongside the real one. At each step
/// the marginal contributions over all sampled orderings give `N·φ̂`, and free
/// machines go to the organization maximizing `N·φ̂ − N·ψ`.
#[derive(Clone, Debug)]
pub struct Rand {
    samples: i128,
    coalitions: Vec<SampledCoalition>,
    /// Per organization: (index without, index with, multiplicity).
    marginals: Vec<Vec<(usize, usize, i128)>>,
    psi: UtilityTracker,
    sums: Vec<i128>,
}

impl Rand {
    pub fn new(config: &RandConfig, allocation: &MachineAllocation) -> Result<Self> {
        Rand::from_sample(&config.sample(allocation.orgs())?, allocation)
    }

    pub fn from_sample(sample: &PrefixSample, allocation: &MachineAllocation) -> Result<Self> {
        let k = allocation.orgs();
        if sample.orgs() != k {
            return Err(Error::config(format!(
                "sample orders {} organizations, allocation has {k}",
                sample.orgs()
            )));
        }
        let list: Vec<Coalition> = sample.coalitions().into_iter().collect();
        let index: HashMap<Coalition, usize> = list.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let coalitions = list
            .iter()
            .map(|&c| SampledCoalition {
                coalition: c,
                machines: allocation.machines_in(c),
                started: vec![0; k],
                running: BinaryHeap::new(),
                value: UtilityTracker::new(1),
            })
            .collect();
        let marginals = sample
            .marginals()
            .into_iter()
            .enumerate()
            .map(|(u, pairs)| {
                pairs
                    .into_iter()
                    .map(|(p, mult)| (index[&p], index[&p.with(u)], mult as i128))
                    .collect()
            })
            .collect();
        Ok(Rand {
            samples: sample.len() as i128,
            coalitions,
            marginals,
            psi: UtilityTracker::new(k),
            sums: vec![0; k],
        })
    }

    /// Number of sampled orderings.
    pub fn sample_count(&self) -> usize {
        self.samples as usize
    }

    /// Value at the current step of every sampled coalition.
    pub fn sampled_values(&self) -> Vec<(Coalition, i64)> {
        self.coalitions
            .iter()
            .map(|c| (c.coalition, c.value.value(0)))
            .collect()
    }

    /// `N·φ̂` per organization at the current step.
    pub fn marginal_sums(&self) -> &[i128] {
        &self.sums
    }
}

impl Policy for Rand {
    fn begin_step(&mut self, state: &SimState) -> Result<()> {
        for c in &mut self.coalitions {
            c.step(state)?;
        }
        self.psi.advance_to(state.clock())?;
        for (u, pairs) in self.marginals.iter().enumerate() {
            let mut s = 0i128;
            for &(without, with, mult) in pairs {
                let diff = self.coalitions[with].value.value(0) - self.coalitions[without].value.value(0);
                s += mult * diff as i128;
            }
            self.sums[u] = s;
        }
        Ok(())
    }

    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        let deficits: Vec<i128> = (0..self.sums.len())
            .map(|u| self.sums[u] - self.samples * self.psi.value(u) as i128)
            .collect();
        max_deficit(&deficits, &waiting_flags(state))
    }

    fn on_start(&mut self, _state: &SimState, entry: &ScheduleEntry) -> Result<()> {
        self.psi
            .on_start(entry.job.org, entry.job.processing, entry.start)
    }

    fn next_event(&self) -> Option<Time> {
        self.coalitions
            .iter()
            .filter_map(|c| c.running.peek().map(|Reverse(end)| *end))
            .min()
    }
}

impl Contributions for Rand {
    fn contributions(&self) -> Option<Vec<Ratio<i128>>> {
        Some(
            self.sums
                .iter()
                .map(|&s| Ratio::new(s, self.samples))
                .collect(),
        )
    }
}
