//! Dependency-graph scheduling for frame-based tasks that share binary
//! semaphores on identical multiprocessors.
//!
//! The approach has two steps. First, for every semaphore the critical
//! sections of its tasks are put into a total order ([`chain`]), which turns
//! the task set into a DAG of subjobs ([`model::DependencyGraph`]). Second,
//! that DAG is scheduled on `M` processors under a partitioned or
//! semi-partitioned policy ([`list`]). [`analysis`] provides lower bounds and
//! a schedule validator; [`generator`] and [`experiment`] reproduce the
//! acceptance-ratio evaluation.

pub mod analysis;
pub mod chain;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod io;
pub mod list;
pub mod model;
pub mod time;

pub use error::{Error, Result};
pub use model::{DependencyGraph, Policy, Schedule, Segment, SubjobKind, SubjobRef, Task, TaskId, TaskSet, TaskSpec};
pub use time::TimeValue;
