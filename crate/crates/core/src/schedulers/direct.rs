use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::schedule::ScheduleEntry;
use crate::sim::{Policy, SimState};
use crate::utility::UtilityTracker;
use crate::workload::MachineAllocation;
use crate::Time;

use super::{max_deficit, waiting_flags, Contributions};

/// Credits an organization's contribution with the work executed on its own
/// machines and its utility with the work executed for its jobs, without
/// looking at any subcoalition. Free machines are visited in a fresh random
/// order every step and go to the organization with the largest deficit.
#[derive(Clone, Debug)]
pub struct DirectContr {
    rng: ChaCha8Rng,
    /// Utility keyed by job owner.
    psi: UtilityTracker,
    /// Contribution keyed by machine owner.
    phi: UtilityTracker,
    order: Vec<usize>,
    order_time: Option<Time>,
}

impl DirectContr {
    pub fn new(allocation: &MachineAllocation, seed: u64) -> Self {
        DirectContr {
            rng: ChaCha8Rng::seed_from_u64(seed),
            psi: UtilityTracker::new(allocation.orgs()),
            phi: UtilityTracker::new(allocation.orgs()),
            order: (0..allocation.total()).collect(),
            order_time: None,
        }
    }

    pub fn utilities(&self) -> &[i64] {
        self.psi.values()
    }

    pub fn credits(&self) -> &[i64] {
        self.phi.values()
    }

    fn deficits(&self) -> Vec<i64> {
        (0..self.psi.values().len())
            .map(|u| self.phi.value(u) - self.psi.value(u))
            .collect()
    }
}

impl Policy for DirectContr {
    fn begin_step(&mut self, state: &SimState) -> Result<()> {
        self.psi.advance_to(state.clock())?;
        self.phi.advance_to(state.clock())?;
        Ok(())
    }

    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        max_deficit(&self.deficits(), &waiting_flags(state))
    }

    fn select_machine(&mut self, state: &SimState, _org: usize) -> Result<usize> {
        // the order is drawn only in steps that make decisions, so skipping quiet steps
        // leaves the random stream unchanged
        if self.order_time != Some(state.clock()) {
            self.order.shuffle(&mut self.rng);
            self.order_time = Some(state.clock());
        }
        self.order
            .iter()
            .copied()
            .find(|&m| state.is_free(m))
            .ok_or_else(|| Error::contract("no free machine"))
    }

    fn on_start(&mut self, state: &SimState, entry: &ScheduleEntry) -> Result<()> {
        let p = entry.job.processing;
        self.psi.on_start(entry.job.org, p, entry.start)?;
        self.phi.on_start(state.owner(entry.machine), p, entry.start)
    }
}

impl Contributions for DirectContr {
    fn contributions(&self) -> Option<Vec<Ratio<i128>>> {
        Some(
            self.phi
                .values()
                .iter()
                .map(|&v| Ratio::from_integer(v as i128))
                .collect(),
        )
    }
}
