//! Schedules: reserved transmission instances on the radio grid and the
//! wired links, plus the per-flow delay accounting.

use serde::{Deserialize, Serialize};

use crate::graph::LinkId;
use crate::rational::Rational;
use crate::scenario::Scenario;
use crate::time::{hyper_period, TimeNs};
use crate::CoreError;

/// Which scheduling model produced a schedule. The synchronous baseline
/// fixes every instance period to the flow period and does not hold frames
/// at the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleModel {
    Atsm,
    Stsm,
}

impl std::fmt::Display for ScheduleModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleModel::Atsm => write!(f, "atsm"),
            ScheduleModel::Stsm => write!(f, "stsm"),
        }
    }
}

/// Reserved uplink resources of one flow: start slot, consecutive slot
/// count, and the set of resource blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadioInstance {
    pub start_tti: i64,
    pub tti_count: i64,
    /// 1-based RB indices.
    pub rb_set: Vec<usize>,
}

/// One periodic reserved window on a wired link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsnInstance {
    pub link: LinkId,
    pub period: TimeNs,
    pub offset: TimeNs,
    pub span: TimeNs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSchedule {
    pub flow_id: String,
    /// Period of the reserved wired windows, identical along the route.
    pub period: TimeNs,
    pub radio: RadioInstance,
    /// Instances for every wired link except the final hop, in route order.
    pub tsn: Vec<TsnInstance>,
    /// Edge hold budget; present only for schedules driving the
    /// asynchronous mechanism.
    pub hold: Option<TimeNs>,
    pub scheduled_e2e: TimeNs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: String,
    pub nodes: u64,
    pub wall_ms: u64,
    pub objective: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub model: ScheduleModel,
    pub gamma: Rational,
    pub scenario_digest: String,
    pub flows: Vec<FlowSchedule>,
    pub rb_used: Vec<bool>,
    pub hyper_tsn: TimeNs,
    pub hyper_5gs: TimeNs,
    pub stats: SolverStats,
}

impl Schedule {
    /// End-to-end delay the asynchronous mechanism guarantees: the 5G part
    /// (transmission plus base-station processing) followed by the constant
    /// TSN residence (hold budget, gateway-to-edge chain, final hop).
    ///
    /// Reads only schedule fields, never packet arrival times.
    pub fn aam_e2e_delay(&self, scenario: &Scenario, flow_idx: usize) -> Result<TimeNs, CoreError> {
        let fs = &self.flows[flow_idx];
        let flow = &scenario.flows[flow_idx];
        if fs.tsn.len() != flow.scheduled_route().len() {
            return Err(CoreError::Validation(format!(
                "flow {:?}: schedule is missing wired instances",
                fs.flow_id
            )));
        }
        let d_5gs = TimeNs(fs.radio.tti_count * scenario.radio.tti.0) + scenario.radio.proc_delay_gnb;
        let first = fs.tsn.first().ok_or_else(|| {
            CoreError::Validation(format!("flow {:?}: no scheduled wired links", fs.flow_id))
        })?;
        let last_sched = fs.tsn.last().unwrap();
        let pre_edge = last_sched.offset + last_sched.span
            + scenario.graph.dataflow_links[last_sched.link].prop_delay
            - first.offset;
        let last_hop = flow.last_hop();
        let final_hop = scenario.span(flow_idx, last_hop)
            + scenario.graph.dataflow_links[last_hop].prop_delay;
        Ok(d_5gs + fs.period + pre_edge + final_hop)
    }

    /// End-to-end delay of the waiting-free synchronous chain, measured from
    /// generation to final delivery within one cycle.
    pub fn stsm_e2e_delay(&self, scenario: &Scenario, flow_idx: usize) -> Result<TimeNs, CoreError> {
        let fs = &self.flows[flow_idx];
        let flow = &scenario.flows[flow_idx];
        let last_sched = fs.tsn.last().ok_or_else(|| {
            CoreError::Validation(format!("flow {:?}: no scheduled wired links", fs.flow_id))
        })?;
        let last_hop = flow.last_hop();
        let final_hop = scenario.span(flow_idx, last_hop)
            + scenario.graph.dataflow_links[last_hop].prop_delay;
        Ok(last_sched.offset
            + last_sched.span
            + scenario.graph.dataflow_links[last_sched.link].prop_delay
            + final_hop
            - TimeNs(fs.radio.start_tti * scenario.radio.tti.0))
    }

    pub fn e2e_delay(&self, scenario: &Scenario, flow_idx: usize) -> Result<TimeNs, CoreError> {
        match self.model {
            ScheduleModel::Atsm => self.aam_e2e_delay(scenario, flow_idx),
            ScheduleModel::Stsm => self.stsm_e2e_delay(scenario, flow_idx),
        }
    }

    pub fn recompute_hypers(&mut self) -> Result<(), CoreError> {
        if self.flows.is_empty() {
            self.hyper_tsn = TimeNs(1);
            self.hyper_5gs = TimeNs(1);
            return Ok(());
        }
        let ts: Vec<TimeNs> = self.flows.iter().map(|f| f.period).collect();
        self.hyper_tsn = hyper_period(&ts)?;
        Ok(())
    }

    /// Structural consistency of a schedule against its scenario. Checked
    /// before any simulation run.
    pub fn validate_against(&self, scenario: &Scenario) -> Result<(), CoreError> {
        if self.scenario_digest != scenario.digest {
            return Err(CoreError::DigestMismatch {
                expected: scenario.digest.clone(),
                found: self.scenario_digest.clone(),
            });
        }
        if self.flows.len() != scenario.flows.len() {
            return Err(CoreError::Validation(format!(
                "schedule covers {} flows, scenario has {}",
                self.flows.len(),
                scenario.flows.len()
            )));
        }
        if self.rb_used.len() != scenario.radio.k_max {
            return Err(CoreError::Validation("rb_used length mismatch".into()));
        }
        for (idx, fs) in self.flows.iter().enumerate() {
            let flow = &scenario.flows[idx];
            if fs.flow_id != flow.id {
                return Err(CoreError::Validation(format!(
                    "schedule flow order mismatch at index {}: {:?} vs {:?}",
                    idx, fs.flow_id, flow.id
                )));
            }
            if fs.period.0 <= 0 || fs.period > flow.period {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: instance period {} outside (0, flow period]",
                    flow.id, fs.period
                )));
            }
            let sched_route = flow.scheduled_route();
            if fs.tsn.len() != sched_route.len() {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: expected {} wired instances, found {}",
                    flow.id,
                    sched_route.len(),
                    fs.tsn.len()
                )));
            }
            for (inst, &link) in fs.tsn.iter().zip(sched_route) {
                if inst.link != link {
                    return Err(CoreError::Validation(format!(
                        "flow {:?}: instance link order does not follow the route",
                        flow.id
                    )));
                }
                if inst.period != fs.period {
                    return Err(CoreError::Validation(format!(
                        "flow {:?}: instance periods differ along the route",
                        flow.id
                    )));
                }
                if inst.offset.0 < 0 || inst.offset + inst.span > inst.period {
                    return Err(CoreError::Validation(format!(
                        "flow {:?}: window [{} .. {}] exceeds period {}",
                        flow.id,
                        inst.offset,
                        (inst.offset + inst.span),
                        inst.period
                    )));
                }
                if inst.span != scenario.span(idx, link) {
                    return Err(CoreError::Validation(format!(
                        "flow {:?}: span {} does not match frame length on link",
                        flow.id, inst.span
                    )));
                }
            }
            if fs.radio.tti_count < 1 || fs.radio.start_tti < 0 {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: invalid radio instance",
                    flow.id
                )));
            }
            if (fs.radio.start_tti + fs.radio.tti_count) * scenario.radio.tti.0 > flow.period.0 {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: radio instance exceeds the flow period",
                    flow.id
                )));
            }
            if fs.radio.rb_set.is_empty()
                || fs
                    .radio
                    .rb_set
                    .iter()
                    .any(|&k| k < 1 || k > scenario.radio.k_max)
            {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: rb_set out of range",
                    flow.id
                )));
            }
            match self.model {
                ScheduleModel::Atsm => {
                    if fs.hold != Some(fs.period) {
                        return Err(CoreError::Validation(format!(
                            "flow {:?}: hold budget must equal the instance period",
                            flow.id
                        )));
                    }
                }
                ScheduleModel::Stsm => {
                    if fs.hold.is_some() {
                        return Err(CoreError::Validation(format!(
                            "flow {:?}: synchronous schedule carries a hold budget",
                            flow.id
                        )));
                    }
                    if fs.period != flow.period {
                        return Err(CoreError::Validation(format!(
                            "flow {:?}: synchronous instance period must equal the flow period",
                            flow.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    // -- file round-trip --------------------------------------------------

    pub fn to_file(&self, scenario: &Scenario) -> ScheduleFile {
        ScheduleFile {
            scenario_digest: self.scenario_digest.clone(),
            model: self.model,
            gamma: format!("{}/{}", self.gamma.numer(), self.gamma.denom()),
            hyper_tsn_ns: self.hyper_tsn.0,
            hyper_5gs_ns: self.hyper_5gs.0,
            rb_used: self.rb_used.clone(),
            flows: self
                .flows
                .iter()
                .map(|fs| FlowScheduleFile {
                    id: fs.flow_id.clone(),
                    t_ns: fs.period.0,
                    radio: fs.radio.clone(),
                    tsn: fs
                        .tsn
                        .iter()
                        .map(|inst| {
                            let l = &scenario.graph.dataflow_links[inst.link];
                            TsnInstanceFile {
                                from: scenario.graph.nodes[l.from.unwrap()].name.clone(),
                                to: scenario.graph.nodes[l.to].name.clone(),
                                offset_ns: inst.offset.0,
                                span_ns: inst.span.0,
                            }
                        })
                        .collect(),
                    hold_ns: fs.hold.map(|h| h.0),
                    scheduled_e2e_ns: fs.scheduled_e2e.0,
                })
                .collect(),
            solver: self.stats.clone(),
        }
    }

    pub fn from_file(file: &ScheduleFile, scenario: &Scenario) -> Result<Schedule, CoreError> {
        let gamma = parse_ratio(&file.gamma)?;
        let mut flows = Vec::with_capacity(file.flows.len());
        for f in &file.flows {
            let mut tsn = Vec::with_capacity(f.tsn.len());
            for inst in &f.tsn {
                let from = scenario
                    .graph
                    .node_index(&inst.from)
                    .ok_or_else(|| CoreError::Validation(format!("unknown node {:?}", inst.from)))?;
                let to = scenario
                    .graph
                    .node_index(&inst.to)
                    .ok_or_else(|| CoreError::Validation(format!("unknown node {:?}", inst.to)))?;
                let link = scenario.graph.tsn_link_between(from, to).ok_or_else(|| {
                    CoreError::Validation(format!("no link {} -> {}", inst.from, inst.to))
                })?;
                tsn.push(TsnInstance {
                    link,
                    period: TimeNs(f.t_ns),
                    offset: TimeNs(inst.offset_ns),
                    span: TimeNs(inst.span_ns),
                });
            }
            flows.push(FlowSchedule {
                flow_id: f.id.clone(),
                period: TimeNs(f.t_ns),
                radio: f.radio.clone(),
                tsn,
                hold: f.hold_ns.map(TimeNs),
                scheduled_e2e: TimeNs(f.scheduled_e2e_ns),
            });
        }
        Ok(Schedule {
            model: file.model,
            gamma,
            scenario_digest: file.scenario_digest.clone(),
            flows,
            rb_used: file.rb_used.clone(),
            hyper_tsn: TimeNs(file.hyper_tsn_ns),
            hyper_5gs: TimeNs(file.hyper_5gs_ns),
            stats: file.solver.clone(),
        })
    }
}

fn parse_ratio(text: &str) -> Result<Rational, CoreError> {
    let (n, d) = text
        .split_once('/')
        .ok_or_else(|| CoreError::Validation(format!("bad rational {:?}", text)))?;
    let n: i128 = n
        .parse()
        .map_err(|_| CoreError::Validation(format!("bad rational {:?}", text)))?;
    let d: i128 = d
        .parse()
        .map_err(|_| CoreError::Validation(format!("bad rational {:?}", text)))?;
    if d == 0 {
        return Err(CoreError::Validation("rational with zero denominator".into()));
    }
    Ok(Rational::new(n, d))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub scenario_digest: String,
    pub model: ScheduleModel,
    pub gamma: String,
    pub hyper_tsn_ns: i64,
    pub hyper_5gs_ns: i64,
    pub rb_used: Vec<bool>,
    pub flows: Vec<FlowScheduleFile>,
    pub solver: SolverStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowScheduleFile {
    pub id: String,
    pub t_ns: i64,
    pub radio: RadioInstance,
    pub tsn: Vec<TsnInstanceFile>,
    pub hold_ns: Option<i64>,
    pub scheduled_e2e_ns: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsnInstanceFile {
    pub from: String,
    pub to: String,
    pub offset_ns: i64,
    pub span_ns: i64,
}
