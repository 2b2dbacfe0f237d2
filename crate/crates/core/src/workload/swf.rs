//! Standard Workload Format reader.
//!
//! Each data line has 18 whitespace-separated numeric fields; lines starting
//! with `;` are header comments. Only the columns the simulator needs are kept:
//!
//! | column | meaning              |
//! |--------|----------------------|
//! | 1      | job number           |
//! | 2      | submit time          |
//! | 4      | run time             |
//! | 5      | allocated processors |
//! | 12     | user id              |

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::Time;

const SWF_FIELDS: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawTraceJob {
    pub job_id: i64,
    pub submit_time: Time,
    pub run_time: Time,
    pub proc_count: u64,
    pub user_id: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwfTrace {
    pub jobs: Vec<RawTraceJob>,
    /// Data lines discarded for a non-positive run time or processor count
    /// (or a negative submit time).
    pub dropped: usize,
}

pub fn parse_swf_str(text: &str) -> Result<SwfTrace> {
    parse_swf(text.as_bytes())
}

pub fn parse_swf<R: BufRead>(reader: R) -> Result<SwfTrace> {
    let mut trace = SwfTrace::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let body = line.trim();
        if body.is_empty() || body.starts_with(';') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != SWF_FIELDS {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {SWF_FIELDS} fields, found {}", fields.len()),
            });
        }
        let mut values = [0i64; SWF_FIELDS];
        for (col, tok) in fields.iter().enumerate() {
            values[col] = parse_field(tok).ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("column {} is not numeric: {tok:?}", col + 1),
            })?;
        }
        let (job_id, submit, run, procs, user) =
            (values[0], values[1], values[3], values[4], values[11]);
        if run <= 0 || procs <= 0 || submit < 0 {
            trace.dropped += 1;
            continue;
        }
        trace.jobs.push(RawTraceJob {
            job_id,
            submit_time: submit as Time,
            run_time: run as Time,
            proc_count: procs as u64,
            user_id: user,
        });
    }
    Ok(trace)
}

/// Integer fields sometimes appear with a fractional part in archived traces;
/// those are truncated.
fn parse_field(tok: &str) -> Option<i64> {
    tok.parse::<i64>().ok().or_else(|| {
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| v.trunc() as i64)
    })
}
