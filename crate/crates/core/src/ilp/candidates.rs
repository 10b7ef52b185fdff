//! Power-of-two period candidates.
//!
//! The reserved-window period of a flow is restricted to the list
//! `[minP, 2*minP, 4*minP, ..., T_max]` where `T_max` is the largest entry
//! not exceeding the flow period. A one-hot selector binary per entry turns
//! the period into a linear expression, which keeps the pairwise window
//! constraints enumerable even though the period is a decision variable.

use crate::time::TimeNs;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodCandidates {
    /// Strictly increasing: minP * 2^j for j = 0 .. len-1.
    pub list: Vec<TimeNs>,
}

impl PeriodCandidates {
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn max(&self) -> TimeNs {
        *self.list.last().unwrap()
    }
}

/// Candidate list for a flow: every power-of-two multiple of `min_p` up to
/// the flow period.
pub fn build_period_candidates(
    flow_id: &str,
    period: TimeNs,
    min_p: TimeNs,
) -> Result<PeriodCandidates, CoreError> {
    if min_p.0 <= 0 {
        return Err(CoreError::Validation("min_p must be positive".into()));
    }
    if min_p > period {
        return Err(CoreError::Infeasible(format!(
            "flow {:?}: smallest supported window period {} exceeds the flow period {}",
            flow_id, min_p, period
        )));
    }
    let mut list = Vec::new();
    let mut t = min_p;
    while t <= period {
        list.push(t);
        match t.0.checked_mul(2) {
            Some(next) => t = TimeNs(next),
            None => break,
        }
    }
    Ok(PeriodCandidates { list })
}
