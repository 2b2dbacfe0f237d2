//! Seeded synthetic workloads built from per-organization templates.
//!
//! A spec is a `;`-separated list of templates, one per organization. Each
//! template is a comma-separated list of `key=value` pairs:
//!
//! * `n` – number of jobs (default 0)
//! * `r` – release time draw (default `0`)
//! * `p` – processing time draw (default `1`)
//!
//! A draw is a constant (`5`), a uniform integer range (`1..30`, inclusive),
//! or a log-uniform range (`log:1..1000`). For example
//! `"n=2,r=0,p=1; n=40,r=0..200,p=log:1..50; n=0"`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Job;
use crate::error::{Error, Result};
use crate::Time;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Draw {
    Const(Time),
    /// Inclusive bounds.
    Uniform(Time, Time),
    /// Inclusive bounds, sampled uniformly in log space.
    LogUniform(Time, Time),
}

impl Draw {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Time {
        match *self {
            Draw::Const(v) => v,
            Draw::Uniform(lo, hi) => rng.gen_range(lo..=hi),
            Draw::LogUniform(lo, hi) => {
                let (a, b) = ((lo as f64).ln(), ((hi + 1) as f64).ln());
                let x = rng.gen_range(a..b).exp().floor() as Time;
                x.clamp(lo, hi)
            }
        }
    }

    fn min(&self) -> Time {
        match *self {
            Draw::Const(v) | Draw::Uniform(v, _) | Draw::LogUniform(v, _) => v,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Draw::Const(_) => Ok(()),
            Draw::Uniform(lo, hi) if lo <= hi => Ok(()),
            Draw::LogUniform(lo, hi) if lo >= 1 && lo <= hi => Ok(()),
            other => Err(Error::config(format!("invalid range {other}"))),
        }
    }
}

impl fmt::Display for Draw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Draw::Const(v) => write!(f, "{v}"),
            Draw::Uniform(lo, hi) => write!(f, "{lo}..{hi}"),
            Draw::LogUniform(lo, hi) => write!(f, "log:{lo}..{hi}"),
        }
    }
}

impl FromStr for Draw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse draw {s:?}"));
        let (log, body) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let draw = match body.split_once("..") {
            Some((lo, hi)) => {
                let lo = lo.trim().parse().map_err(|_| bad())?;
                let hi = hi.trim().parse().map_err(|_| bad())?;
                if log {
                    Draw::LogUniform(lo, hi)
                } else {
                    Draw::Uniform(lo, hi)
                }
            }
            None if !log => Draw::Const(body.parse().map_err(|_| bad())?),
            None => return Err(bad()),
        };
        draw.validate()?;
        Ok(draw)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrgTemplate {
    pub jobs: usize,
    pub release: Draw,
    pub processing: Draw,
}

impl Default for OrgTemplate {
    fn default() -> Self {
        OrgTemplate {
            jobs: 0,
            release: Draw::Const(0),
            processing: Draw::Const(1),
        }
    }
}

impl OrgTemplate {
    pub fn new(jobs: usize, release: Draw, processing: Draw) -> Self {
        OrgTemplate {
            jobs,
            release,
            processing,
        }
    }
}

impl fmt::Display for OrgTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={},r={},p={}", self.jobs, self.release, self.processing)
    }
}

impl FromStr for OrgTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = OrgTemplate::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::config(format!("expected key=value, got {part:?}")))?;
            match key.trim() {
                "n" => {
                    t.jobs = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::config(format!("bad job count {value:?}")))?
                }
                "r" => t.release = value.parse()?,
                "p" => t.processing = value.parse()?,
                other => return Err(Error::config(format!("unknown template key {other:?}"))),
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SyntheticSpec {
    pub orgs: Vec<OrgTemplate>,
}

impl SyntheticSpec {
    pub fn new(orgs: Vec<OrgTemplate>) -> Self {
        SyntheticSpec { orgs }
    }

    /// A single template is replicated for every organization; otherwise the
    /// template count must equal `k`.
    pub fn for_orgs(mut self, k: usize) -> Result<Self> {
        if self.orgs.len() == 1 && k > 1 {
            self.orgs = vec![self.orgs[0].clone(); k];
        }
        if self.orgs.len() != k {
            return Err(Error::config(format!(
                "synthetic spec has {} templates for {k} organizations",
                self.orgs.len()
            )));
        }
        Ok(self)
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orgs.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let orgs = s
            .split(';')
            .map(|t| t.parse())
            .collect::<Result<Vec<OrgTemplate>>>()?;
        Ok(SyntheticSpec { orgs })
    }
}

/// Draws every organization's jobs from its template. Release times are sorted
/// per organization so the FIFO order is presentable. Output is sorted by
/// `(org, seq)`.
pub fn synth_workload(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Job>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for (org, t) in spec.orgs.iter().enumerate() {
        t.release.validate()?;
        t.processing.validate()?;
        if t.jobs > 0 && t.processing.min() < 1 {
            return Err(Error::config(format!(
                "organization {org}: processing draw {} can yield 0",
                t.processing
            )));
        }
        let mut drawn: Vec<(Time, Time)> = (0..t.jobs)
            .map(|_| (t.release.sample(&mut rng), t.processing.sample(&mut rng)))
            .collect();
        drawn.sort_by_key(|&(r, _)| r);
        jobs.extend(
            drawn
                .into_iter()
                .enumerate()
                .map(|(seq, (r, p))| Job::new(org, seq, r, p)),
        );
    }
    Ok(jobs)
}
