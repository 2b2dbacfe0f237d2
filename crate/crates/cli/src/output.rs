use std::io::Write;

use anyhow::Result;
use num_traits::ToPrimitive;
use shapsched::RunOutput;

use crate::config::{policy_label, sample_count};
use crate::experiment::{ExperimentReport, SweepRow};

fn decimal(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per policy: the configuration followed by the unfairness figures.
pub fn write_summary<W: Write>(report: &ExperimentReport, timing: bool, out: W) -> Result<()> {
    let c = &report.config;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "workload",
        "orgs",
        "machines",
        "machine_dist",
        "release_scale",
        "seed",
        "t_end",
        "jobs",
        "policy",
        "samples",
        "delta_psi",
        "p_tot",
        "per_job_unfairness",
        "relative_unfairness",
    ];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for r in &report.results {
        let samples = sample_count(&r.policy, c.orgs)?.map(|n| n.to_string()).unwrap_or_default();
        let mut row = vec![
            c.source.to_string(),
            c.orgs.to_string(),
            c.machines.to_string(),
            c.machine_dist.to_string(),
            c.release_scale.to_string(),
            c.seed.to_string(),
            c.t_end.to_string(),
            report.jobs.to_string(),
            policy_label(&r.policy),
            samples,
            r.fairness.delta_psi.to_string(),
            r.fairness.p_tot.to_string(),
            decimal(r.fairness.per_job_f64()),
            decimal(r.fairness.relative_f64()),
        ];
        if timing {
            row.push(format!("{:.3}", r.wall.as_secs_f64() * 1e3));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-step utilities and contributions, the reference first, then each policy.
pub fn write_trace<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let k = report.config.orgs;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["run".to_string(), "t".to_string()];
    header.extend((0..k).map(|u| format!("psi_{u}")));
    header.extend((0..k).map(|u| format!("phi_{u}")));
    header.push("started".to_string());
    w.write_record(&header)?;
    let runs = std::iter::once(("reference".to_string(), &report.reference))
        .chain(report.results.iter().map(|r| (policy_label(&r.policy), &r.run)));
    for (label, run) in runs {
        write_rows(&mut w, &label, run, k)?;
    }
    w.flush()?;
    Ok(())
}

fn write_rows<W: Write>(w: &mut csv::Writer<W>, label: &str, run: &RunOutput, k: usize) -> Result<()> {
    for row in &run.trace {
        let mut rec = vec![label.to_string(), row.t.to_string()];
        rec.extend(row.psi.iter().map(|p| p.to_string()));
        match &row.phi {
            Some(phi) => rec.extend(phi.iter().map(|x| decimal(x.to_f64().unwrap_or(f64::NAN)))),
            None => rec.extend(std::iter::repeat(String::new()).take(k)),
        }
        rec.push(row.started.to_string());
        w.write_record(&rec)?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], orgs: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "policy",
        "samples",
        "runs",
        "mean_per_job_unfairness",
        "stddev_per_job_unfairness",
        "mean_relative_unfairness",
        "stddev_relative_unfairness",
    ])?;
    for r in rows {
        let samples = sample_count(&r.policy, orgs)?.map(|n| n.to_string()).unwrap_or_default();
        w.write_record([
            policy_label(&r.policy),
            samples,
            r.runs.to_string(),
            decimal(r.mean),
            decimal(r.stddev),
            decimal(r.mean_relative),
            decimal(r.stddev_relative),
        ])?;
    }
    w.flush()?;
    Ok(())
}
