mod common;

use proptest::prelude::*;
use shapsched::utility::{job_psi, psi_vector};
use shapsched::{flow_time, psi_sp, simulate, validate_schedule, Time, UtilityTracker};

use common::{three_machine_example, psi_by_slots, EXAMPLE_STARTS};

fn entries() -> impl Strategy<Value = Vec<(Time, Time)>> {
    prop::collection::vec((0u64..40, 1u64..15), 0..8)
}

proptest! {
    #[test]
    fn matches_slot_expansion(es in entries(), t in 0u64..60) {
        prop_assert_eq!(psi_sp(es.iter().copied(), t), psi_by_slots(&es, t));
    }

    #[test]
    fn split_equals_merged(s in 0u64..30, p1 in 1u64..15, p2 in 1u64..15, t in 0u64..60) {
        prop_assert_eq!(
            psi_sp([(s, p1)], t) + psi_sp([(s + p1, p2)], t),
            psi_sp([(s, p1 + p2)], t)
        );
    }

    #[test]
    fn earlier_start_gains_executed_parts(s in 0u64..30, p in 1u64..15, t in 1u64..60) {
        prop_assume!(s < t);
        let gain = psi_sp([(s, p)], t) - psi_sp([(s + 1, p)], t);
        prop_assert_eq!(gain, p.min(t - s) as i64);
        prop_assert!(gain > 0);
    }

    #[test]
    fn additive_over_job_sets(a in entries(), b in entries(), t in 0u64..60) {
        let union: Vec<_> = a.iter().chain(&b).copied().collect();
        prop_assert_eq!(
            psi_sp(union, t),
            psi_sp(a.iter().copied(), t) + psi_sp(b.iter().copied(), t)
        );
    }

    #[test]
    fn non_negative_and_non_decreasing(es in entries(), t in 0u64..60) {
        let now = psi_sp(es.iter().copied(), t);
        prop_assert!(now >= 0);
        prop_assert!(psi_sp(es.iter().copied(), t + 1) >= now);
    }

    #[test]
    fn tracker_follows_recomputation(
        starts in prop::collection::vec((0u64..30, 1u64..10, 0usize..3), 0..12),
        jumps in prop::collection::vec(1u64..5, 1..20),
    ) {
        let mut starts = starts;
        starts.sort_unstable();
        let mut tr = UtilityTracker::new(3);
        let mut seen: Vec<Vec<(Time, Time)>> = vec![Vec::new(); 3];
        let mut next = 0;
        let mut t = 0;
        for step in jumps {
            tr.advance_to(t).unwrap();
            while next < starts.len() && starts[next].0 <= t {
                let (_, p, key) = starts[next];
                tr.on_start(key, p, t).unwrap();
                seen[key].push((t, p));
                next += 1;
            }
            for key in 0..3 {
                prop_assert_eq!(tr.value(key), psi_by_slots(&seen[key], t));
            }
            t += step;
        }
    }

    #[test]
    fn equal_jobs_relate_to_flow_time(
        p in 1u64..6,
        jobs in prop::collection::vec((0u64..20, 0u64..10), 1..10),
        slack in 0u64..10,
    ) {
        // (release, wait) pairs; start = release + wait
        let triples: Vec<(Time, Time, Time)> = jobs.iter().map(|&(r, w)| (r, r + w, p)).collect();
        let t = triples.iter().map(|&(_, s, p)| s + p).max().unwrap() + slack;
        let n = triples.len() as i64;
        let (p, t_i) = (p as i64, t as i64);
        let releases: i64 = triples.iter().map(|&(r, _, _)| r as i64).sum();
        let psi = psi_sp(triples.iter().map(|&(_, s, p)| (s, p)), t);
        let ft = flow_time(triples.iter().copied(), t).unwrap();
        prop_assert_eq!(psi, n * (p * t_i + (p * p + p) / 2) - p * releases - p * ft);
    }
}

#[test]
fn job_count_does_not_matter_for_equal_slots() {
    // one 6-part job against six unit jobs run back to back
    let whole = psi_sp([(2, 6)], 11);
    let pieces = psi_sp((2..8).map(|s| (s, 1)), 11);
    assert_eq!(whole, pieces);
}

#[test]
fn depicted_schedule_values() {
    let (jobs, alloc) = three_machine_example();
    let mut policy = shapsched::sim::FnPolicy(|st: &shapsched::SimState| {
        if st.has_waiting(1) && st.started_count(0) >= 7 {
            1
        } else {
            0
        }
    });
    let schedule = simulate(&jobs, &alloc, &mut policy, 20).unwrap();
    assert!(validate_schedule(&schedule, &jobs, &alloc).is_valid());
    let starts: Vec<Time> = (0..9).map(|i| schedule.entry_of(0, i).unwrap().start).collect();
    assert_eq!(starts, EXAMPLE_STARTS);
    assert_eq!(schedule.entry_of(1, 0).unwrap().start, 9);

    let parts = schedule.parts_of(0);
    assert_eq!(psi_sp(parts.iter().copied(), 13), 262);
    assert_eq!(psi_sp(parts.iter().copied(), 14), 297);
    let triples = parts.iter().map(|&(s, p)| (0, s, p));
    assert_eq!(flow_time(triples, 14), Ok(70));
    // the last job would lose 10 if it did not run at all
    assert_eq!(job_psi(10, 4, 14), 10);
    assert_eq!(psi_vector(&schedule, 2, 14), vec![297, 9]);

    // without the second organization's job the last job starts one step earlier
    let alone: Vec<_> = jobs.iter().copied().filter(|j| j.org == 0).collect();
    let s = simulate(&alone, &alloc, &mut shapsched::sim::FifoGreedy, 20).unwrap();
    assert_eq!(s.entry_of(0, 8).unwrap().start, 9);
}
