//! Time-triggered flow descriptions and the uplink radio grid.

use crate::graph::LinkId;
use crate::time::TimeNs;

/// One time-triggered flow: a fixed-size frame every period, delivered
/// from a UE to an end station over a pre-determined route, subject to a
/// hard end-to-end deadline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSpec {
    pub id: String,
    pub period: TimeNs,
    pub length_bytes: i64,
    pub deadline: TimeNs,
    /// Dataflow links from source to destination. `route[0]` is the shared
    /// 5G uplink; the remainder are TSN links ending with the edge-switch to
    /// end-station hop.
    pub route: Vec<LinkId>,
}

impl FlowSpec {
    /// TSN links of the route, i.e. everything after the uplink.
    pub fn wired_route(&self) -> &[LinkId] {
        &self.route[1..]
    }

    /// Wired links that carry scheduled transmission instances: all but the
    /// final edge-to-end-station hop.
    pub fn scheduled_route(&self) -> &[LinkId] {
        let wired = self.wired_route();
        &wired[..wired.len() - 1]
    }

    /// The final hop, transmitted immediately after the hold.
    pub fn last_hop(&self) -> LinkId {
        *self.route.last().unwrap()
    }
}

/// Uplink grid parameters: mini-slot duration, number of resource blocks,
/// base-station processing time, and per-flow per-RB capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioConfig {
    pub tti: TimeNs,
    pub k_max: usize,
    pub proc_delay_gnb: TimeNs,
    /// `rb_bytes[flow][k]`: bytes one TTI of RB `k` carries for that flow.
    pub rb_bytes: Vec<Vec<i64>>,
}

impl RadioConfig {
    pub fn slots_per_period(&self, period: TimeNs) -> i64 {
        period.0 / self.tti.0
    }
}
