//! Unfairness of a run measured against the exact fair reference run.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::schedulers::RunOutput;
use crate::Time;

/// `Σ |a_i − b_i|`.
pub fn manhattan(a: &[i64], b: &[i64]) -> Result<i64> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "utility vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// Unit parts executed in `schedule` before `t_end`.
pub fn p_tot(schedule: &Schedule, t_end: Time) -> i64 {
    schedule
        .entries
        .iter()
        .filter(|e| e.start <= t_end)
        .map(|e| e.job.processing.min(t_end - e.start) as i64)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessReport {
    /// Manhattan distance between the run's and the reference's utilities.
    pub delta_psi: i64,
    /// Unit parts the reference executed before the horizon.
    pub p_tot: i64,
    /// `delta_psi / p_tot`: unjustified delay or speed-up per unit part.
    pub per_job_unfairness: Ratio<i128>,
    /// `delta_psi` over the total reference utility.
    pub relative_unfairness: Ratio<i128>,
}

impl FairnessReport {
    pub fn per_job_f64(&self) -> f64 {
        self.per_job_unfairness.to_f64().unwrap_or(f64::NAN)
    }

    pub fn relative_f64(&self) -> f64 {
        self.relative_unfairness.to_f64().unwrap_or(f64::NAN)
    }
}

/// A zero denominator yields 0: nothing executed means nothing to be unfair about.
fn ratio(num: i64, den: i64) -> Ratio<i128> {
    if den == 0 {
        Ratio::zero()
    } else {
        Ratio::new(num as i128, den as i128)
    }
}

/// Compares `run` with `reference`; both must cover the same jobs, machines
/// and horizon.
pub fn fairness_report(run: &RunOutput, reference: &RunOutput) -> Result<FairnessReport> {
    if run.t_end != reference.t_end {
        return Err(Error::contract(format!(
            "runs end at {} and {}",
            run.t_end, reference.t_end
        )));
    }
    if run.allocation != reference.allocation {
        return Err(Error::contract(format!(
            "runs use allocations {} and {}",
            run.allocation, reference.allocation
        )));
    }
    if run.jobs_digest != reference.jobs_digest {
        return Err(Error::contract("runs schedule different job sets"));
    }
    let delta_psi = manhattan(&run.psi, &reference.psi)?;
    let p = p_tot(&reference.schedule, reference.t_end);
    let total: i64 = reference.psi.iter().sum();
    Ok(FairnessReport {
        delta_psi,
        p_tot: p,
        per_job_unfairness: ratio(delta_psi, p),
        relative_unfairness: ratio(delta_psi, total),
    })
}
