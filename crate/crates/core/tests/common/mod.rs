#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use shapsched::schedulers::{RandConfig, Samples};
use shapsched::{Job, MachineAllocation, PolicyKind, Time};

/// Builds jobs from per-organization `(release gap, processing)` lists.
pub fn jobs_from_gaps(orgs: &[Vec<(Time, Time)>]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (u, list) in orgs.iter().enumerate() {
        let mut r = 0;
        for (i, &(gap, p)) in list.iter().enumerate() {
            r += gap;
            jobs.push(Job::new(u, i, r, p));
        }
    }
    jobs
}

/// Instances with up to `max_k` organizations, each owning 1..=2 machines and
/// up to `max_jobs` jobs of length up to `max_p`.
pub fn instance(
    max_k: usize,
    max_jobs: usize,
    max_p: Time,
) -> impl Strategy<Value = (Vec<Job>, MachineAllocation)> {
    (1..=max_k)
        .prop_flat_map(move |k| {
            (
                prop::collection::vec(1usize..=2, k),
                prop::collection::vec(prop::collection::vec((0u64..4, 1..=max_p), 0..=max_jobs), k),
            )
        })
        .prop_map(|(counts, orgs)| (jobs_from_gaps(&orgs), MachineAllocation::new(counts).unwrap()))
}

/// Random instance drawn from `rng`: `k` organizations, every job of length in
/// `1..=max_p`, releases in `0..max_release`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    k: usize,
    jobs_total: usize,
    max_p: Time,
    max_release: Time,
) -> (Vec<Job>, MachineAllocation) {
    let counts: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let mut per_org: Vec<Vec<Time>> = vec![Vec::new(); k];
    for _ in 0..jobs_total {
        per_org[rng.gen_range(0..k)].push(rng.gen_range(0..max_release));
    }
    let mut jobs = Vec::new();
    for (u, mut releases) in per_org.into_iter().enumerate() {
        releases.sort_unstable();
        for (i, r) in releases.into_iter().enumerate() {
            jobs.push(Job::new(u, i, r, rng.gen_range(1..=max_p)));
        }
    }
    (jobs, MachineAllocation::new(counts).unwrap())
}

/// Every policy the crate offers, with seeded randomness where needed.
pub fn all_policies(seed: u64) -> Vec<PolicyKind> {
    vec![
        PolicyKind::Exact,
        PolicyKind::Rand(RandConfig::new(Samples::Count(15), seed)),
        PolicyKind::Direct { seed },
        PolicyKind::RoundRobin,
        PolicyKind::Fifo,
    ]
}

/// Utility by expanding every job into its executed unit slots.
pub fn psi_by_slots(entries: &[(Time, Time)], t: Time) -> i64 {
    let mut total = 0i64;
    for &(s, p) in entries {
        for tau in s..s + p {
            if tau < t {
                total += (t - tau) as i64;
            }
        }
    }
    total
}

/// The two-cluster example with nine jobs of the first organization and one
/// two-unit job of the second, three machines in total.
pub fn three_machine_example() -> (Vec<Job>, MachineAllocation) {
    let lengths = [3, 4, 3, 3, 6, 6, 3, 3, 4];
    let mut jobs: Vec<Job> = lengths
        .iter()
        .enumerate()
        .map(|(i, &p)| Job::new(0, i, 0, p))
        .collect();
    jobs.push(Job::new(1, 0, 0, 2));
    (jobs, MachineAllocation::new(vec![2, 1]).unwrap())
}

/// Starts of the first organization's jobs in the depicted schedule.
pub const EXAMPLE_STARTS: [Time; 9] = [0, 0, 0, 3, 3, 4, 6, 9, 10];
