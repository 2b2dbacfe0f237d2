//! Fair scheduling of jobs from several organizations that pool their machines.
//!
//! Every organization contributes machines and submits sequential jobs. A
//! scheduler decides, whenever a machine is free, whose job starts next. The
//! fair schedulers here try to give each organization a utility close to its
//! Shapley contribution to the pooled system.
//!
//! Module map:
//!
//! * [`workload`] – jobs, machine allocation, SWF traces and synthetic workloads
//! * [`coalition`], [`schedule`], [`sim`] – coalitions, schedules, validation and the
//!   discrete-time greedy engine
//! * [`utility`] – the strategy-proof utility, flow time and incremental trackers
//! * [`shapley`] – exact and sampled Shapley contributions
//! * [`schedulers`] – exact fair, sampled, direct-contribution and round-robin policies
//! * [`metrics`] – unfairness of a run against the exact fair reference

pub mod coalition;
pub mod error;
pub mod metrics;
pub mod schedule;
pub mod schedulers;
pub mod shapley;
pub mod sim;
pub mod utility;
pub mod workload;

/// Discrete time. One unit part of a job executes in one time slot.
pub type Time = u64;

pub use coalition::{enumerate_subcoalitions, Coalition, MAX_EXACT_ORGS};
pub use error::{Error, Result};
pub use metrics::{fairness_report, manhattan, p_tot, FairnessReport};
pub use schedule::{validate_schedule, Schedule, ScheduleEntry, ValidationReport, Violation};
pub use schedulers::{run_policy, PolicyKind, RunOutput, TraceRow};
pub use sim::{simulate, Policy, SimState};
pub use utility::{coalition_value, flow_time, psi_sp, UtilityTracker};
pub use workload::{Job, MachineAllocation};
