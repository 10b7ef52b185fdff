//! Joint scheduling for a converged 5G + TSN network.
//!
//! The crate has three parts:
//!
//! * a domain model (network graph, flows, schedules, integer-nanosecond
//!   time arithmetic),
//! * an integer-linear-program builder and a small exact branch-and-bound
//!   solver that together turn a scenario into a feasible schedule, and
//! * a deterministic discrete-event simulator that executes a schedule
//!   under either access mechanism with injectable transmission jitter and
//!   inter-domain clock skew, producing per-packet traces and the delay
//!   expansion/variation metrics.

pub mod flow;
pub mod graph;
pub mod ilp;
pub mod rational;
pub mod scenario;
pub mod schedule;
pub mod sim;
pub mod time;

pub use flow::{FlowSpec, RadioConfig};
pub use graph::{DataflowLink, LinkId, LinkKind, NetworkGraph, Node, NodeId, NodeRole};
pub use rational::Rational;
pub use scenario::{AccessMode, Scenario, SimConfig};
pub use schedule::{FlowSchedule, RadioInstance, Schedule, ScheduleModel, TsnInstance};
pub use time::{hyper_period, wire_span, TimeNs};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{0}")]
    Validation(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("schedule was produced for a different scenario (expected digest {expected}, found {found})")]
    DigestMismatch { expected: String, found: String },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
