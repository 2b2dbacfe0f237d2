use crate::error::{Error, Result};
use crate::sim::{Policy, SimState};

use super::Contributions;

/// Cycles through the organizations. Each start goes to the first organization
/// with a waiting job at or after the pointer; the pointer then moves past it.
#[derive(Clone, Debug, Default)]
pub struct RoundRobin {
    next: usize,
}

impl RoundRobin {
    pub fn new() -> Self {
        RoundRobin::default()
    }
}

impl Policy for RoundRobin {
    fn select_org(&mut self, state: &SimState) -> Result<usize> {
        let k = state.orgs();
        let org = (0..k)
            .map(|i| (self.next + i) % k)
            .find(|&u| state.has_waiting(u))
            .ok_or_else(|| Error::contract("no organization has a waiting job"))?;
        self.next = (org + 1) % k;
        Ok(org)
    }
}

impl Contributions for RoundRobin {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, FifoGreedy};
    use crate::workload::{Job, MachineAllocation};

    fn unit_jobs(orgs: &[usize], n: usize) -> Vec<Job> {
        orgs.iter()
            .flat_map(|&u| (0..n).map(move |i| Job::new(u, i, 0, 1)))
            .collect()
    }

    fn order(jobs: &[Job], alloc: &MachineAllocation) -> Vec<usize> {
        let s = simulate(jobs, alloc, &mut RoundRobin::new(), 20).unwrap();
        s.entries.iter().map(|e| e.job.org).collect()
    }

    #[test]
    fn cycles_in_id_order() {
        let alloc = MachineAllocation::permissive(vec![1, 0, 0]).unwrap();
        let got = order(&unit_jobs(&[0, 1, 2], 3), &alloc);
        assert_eq!(got, vec![0, 1, 2, 0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn skips_empty_queues() {
        let alloc = MachineAllocation::permissive(vec![1, 0, 0]).unwrap();
        let got = order(&unit_jobs(&[0, 2], 3), &alloc);
        assert_eq!(got, vec![0, 2, 0, 2, 0, 2]);
    }

    #[test]
    fn single_org_is_fifo() {
        let jobs = vec![Job::new(0, 0, 0, 3), Job::new(0, 1, 1, 2), Job::new(0, 2, 1, 1)];
        let alloc = MachineAllocation::new(vec![2]).unwrap();
        let a = simulate(&jobs, &alloc, &mut RoundRobin::new(), 10).unwrap();
        let b = simulate(&jobs, &alloc, &mut FifoGreedy, 10).unwrap();
        assert_eq!(a, b);
    }
}
