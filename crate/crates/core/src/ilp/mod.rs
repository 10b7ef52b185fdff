//! Integer-linear-program construction, exact solving, and LP export.

pub mod builder;
pub mod candidates;
pub mod decode;
pub mod lp_format;
pub mod model;
pub mod solver;

pub use builder::{build_atsm, build_stsm, BuildArtifacts, FlowVars};
pub use candidates::{build_period_candidates, PeriodCandidates};
pub use decode::{decode_solution, encode_schedule};
pub use lp_format::export_lp;
pub use model::{CmpSense, Constraint, IlpModel, LinTerm, VarDef, VarId, VarKind};
pub use solver::{solve, verify, Limits, Solution, SolveStatus, Violation};
