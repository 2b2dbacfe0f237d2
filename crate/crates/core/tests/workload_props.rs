use std::collections::HashMap;

use proptest::prelude::*;
use shapsched::workload::{
    assign_orgs, distribute_machines, group_by_org, parse_swf_str, sequentialize, synth_workload,
    MachineDistribution, RawTraceJob, SyntheticSpec, UserJob,
};

fn raw_jobs() -> impl Strategy<Value = Vec<RawTraceJob>> {
    prop::collection::vec((0u64..100, 1u64..50, 1u64..5, 0i64..12), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (submit, run, procs, user))| RawTraceJob {
                job_id: i as i64 + 1,
                submit_time: submit,
                run_time: run,
                proc_count: procs,
                user_id: user,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn sequential_copies_keep_the_work(raw in raw_jobs()) {
        let seq = sequentialize(&raw);
        let work: u64 = raw.iter().map(|r| r.run_time * r.proc_count).sum();
        prop_assert_eq!(seq.iter().map(|e| e.processing).sum::<u64>(), work);
        prop_assert_eq!(seq.len() as u64, raw.iter().map(|r| r.proc_count).sum::<u64>());
    }

    #[test]
    fn organizations_partition_the_entries(raw in raw_jobs(), k in 1usize..6, seed in any::<u64>()) {
        let entries = sequentialize(&raw);
        let jobs = assign_orgs(&entries, k, seed).unwrap();
        prop_assert_eq!(jobs.len(), entries.len());
        // each (release, processing) multiset is preserved
        let mut a: Vec<_> = entries.iter().map(|e| (e.release, e.processing)).collect();
        let mut b: Vec<_> = jobs.iter().map(|j| (j.release, j.processing)).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        // per-org lists are presentable in FIFO order
        let grouped = group_by_org(&jobs, k).unwrap();
        for list in &grouped {
            for (i, j) in list.iter().enumerate() {
                prop_assert_eq!(j.seq, i);
            }
            prop_assert!(list.windows(2).all(|w| w[0].release <= w[1].release));
        }
        prop_assert_eq!(assign_orgs(&entries, k, seed).unwrap(), jobs);
    }

    #[test]
    fn users_stay_together(users in prop::collection::vec(0i64..20, 1..60), k in 1usize..5, seed in any::<u64>()) {
        // distinct releases per entry let the org of every entry be recovered
        let entries: Vec<UserJob> = users
            .iter()
            .enumerate()
            .map(|(i, &u)| UserJob { user: u, release: i as u64, processing: 1 })
            .collect();
        let jobs = assign_orgs(&entries, k, seed).unwrap();
        let org_of_release: HashMap<u64, usize> = jobs.iter().map(|j| (j.release, j.org)).collect();
        let mut user_org: HashMap<i64, usize> = HashMap::new();
        for e in &entries {
            let org = org_of_release[&e.release];
            prop_assert_eq!(*user_org.entry(e.user).or_insert(org), org);
        }
    }

    #[test]
    fn machine_counts_cover_the_total(total in 1usize..200, k in 1usize..12, theta in 0.1f64..3.0) {
        prop_assume!(total >= k);
        for kind in [MachineDistribution::Uniform, MachineDistribution::Zipf(theta)] {
            let alloc = distribute_machines(total, k, kind).unwrap();
            prop_assert_eq!(alloc.total(), total);
            prop_assert_eq!(alloc.orgs(), k);
            prop_assert!(alloc.counts().iter().all(|&c| c >= 1));
        }
        let u = distribute_machines(total, k, MachineDistribution::Uniform).unwrap();
        let (lo, hi) = (u.counts().iter().min().unwrap(), u.counts().iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn synthetic_jobs_are_well_formed(seed in any::<u64>(), k in 1usize..5) {
        let spec: SyntheticSpec = "n=20,r=0..50,p=log:1..40".parse().unwrap();
        let spec = spec.for_orgs(k).unwrap();
        let jobs = synth_workload(&spec, seed).unwrap();
        prop_assert_eq!(jobs.len(), 20 * k);
        prop_assert!(jobs.iter().all(|j| (1..=40).contains(&j.processing) && j.release <= 50));
        prop_assert!(group_by_org(&jobs, k).is_ok());
        prop_assert_eq!(synth_workload(&spec, seed).unwrap(), jobs);
    }
}

#[test]
fn trace_to_organizations() {
    let text = "\
; Computer: toy
1 0 5 10 2 -1 -1 -1 -1 -1 1 3 -1 -1 -1 -1 -1 -1
2 4 0 -1 1 -1 -1 -1 -1 -1 1 4 -1 -1 -1 -1 -1 -1
3 7 1 3 1 -1 -1 -1 -1 -1 1 3 -1 -1 -1 -1 -1 -1
";
    let trace = parse_swf_str(text).unwrap();
    assert_eq!(trace.jobs.len(), 2);
    assert_eq!(trace.dropped, 1);
    let entries = sequentialize(&trace.jobs);
    assert_eq!(entries.len(), 3);
    let jobs = assign_orgs(&entries, 3, 9).unwrap();
    // user 3 owns every entry, so one organization gets all three
    let org = jobs[0].org;
    assert!(jobs.iter().all(|j| j.org == org));
    assert_eq!(jobs.iter().map(|j| j.processing).sum::<u64>(), 23);
}
