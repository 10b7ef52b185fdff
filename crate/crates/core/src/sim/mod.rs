//! Deterministic discrete-event execution of a schedule.
//!
//! The uplink is abstracted: a packet generated at the start of its reserved
//! transmission instance reaches the gateway after the instance span, the
//! base-station processing time, and an injected per-packet extra delay.
//! From the gateway onward frames ride the reserved TSN windows. Under the
//! asynchronous mechanism the gateway buffers one frame per flow, stamps its
//! waiting time at the next per-flow opportunity, and the edge switch holds
//! each frame for the complement of the stamp before the final hop. Under
//! the time-triggered mechanism frames queue FIFO at the gateway and leave
//! at the first window at or after arrival.
//!
//! Everything runs on integer nanoseconds in the TSN clock; the constant
//! per-run skew offset converts 5G-side timestamps. Two runs with identical
//! inputs and seed produce byte-identical reports.

pub mod metrics;
pub mod report;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{AccessMode, Scenario};
use crate::schedule::Schedule;
use crate::time::TimeNs;
use crate::CoreError;

pub use metrics::{FlowReport, SimReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// A newer frame of the same flow overwrote the gateway buffer.
    ReplacedInBuffer,
}

#[derive(Debug, Clone)]
pub struct PacketTrace {
    pub flow: usize,
    pub seq: u64,
    /// Generation instant converted to the TSN clock.
    pub t_gen: i64,
    /// Injected extra 5G delay of this packet.
    pub extra: i64,
    pub t_gw: Option<i64>,
    pub wait: Option<i64>,
    pub t_edge: Option<i64>,
    pub t_deliver: Option<i64>,
    pub dropped: Option<DropReason>,
}

#[derive(Debug, Clone)]
pub struct SimParams {
    pub mode: AccessMode,
    /// Jitter width J: per-packet extra delay is uniform over [0, J].
    pub jitter: TimeNs,
    /// Skew width S: the per-run offset is uniform over [-S/2, S/2] unless
    /// an explicit offset is supplied.
    pub skew_width: TimeNs,
    pub skew_offset: Option<TimeNs>,
    pub duration: TimeNs,
    pub seed: u64,
}

impl SimParams {
    pub fn from_scenario(sc: &Scenario) -> Self {
        SimParams {
            mode: sc.sim.mode,
            jitter: sc.sim.jitter,
            skew_width: sc.sim.skew,
            skew_offset: None,
            duration: sc.sim.duration,
            seed: sc.sim.seed,
        }
    }
}

/// Scale a raw 64-bit draw into [0, width]; monotone in `width` for a fixed
/// draw, so sweeps that reuse draws across points produce comparable runs.
fn scale_draw(raw: u64, width: i64) -> i64 {
    debug_assert!(width >= 0);
    ((raw as u128 * (width as u128 + 1)) >> 64) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EvKind {
    GwArrive = 0,
    GwGate = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Ev {
    t: i64,
    node: usize,
    kind: EvKind,
    flow: usize,
    seq: u64,
}

struct FlowRuntime {
    /// First-window phase and period of the gateway egress instance.
    gate_phase: i64,
    gate_period: i64,
    /// (link, offset, span, prop) per scheduled hop, route order.
    hops: Vec<(usize, i64, i64, i64)>,
    last_hop: (usize, i64, i64),
    hold_budget: Option<i64>,
    gate_end: i64,
    // state
    buffer: Option<(u64, i64)>,
    fifo: VecDeque<(u64, i64)>,
    depth_warned: bool,
}

/// Execute one simulation run. The schedule must match the scenario digest
/// and structure; any mismatch is rejected before the first event.
pub fn run(
    scenario: &Scenario,
    schedule: &Schedule,
    params: &SimParams,
) -> Result<SimReport, CoreError> {
    schedule.validate_against(scenario)?;
    if params.duration.0 <= 0 {
        return Err(CoreError::Validation("duration must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let skew_draw = rng.next_u64();
    let skew = match params.skew_offset {
        Some(o) => o.0,
        None => scale_draw(skew_draw, params.skew_width.0) - params.skew_width.0 / 2,
    };

    // Pre-draw packet arrivals in (flow, seq) order so randomness does not
    // depend on event interleaving.
    let tti = scenario.radio.tti.0;
    let t_proc = scenario.radio.proc_delay_gnb.0;
    let mut traces: Vec<PacketTrace> = Vec::new();
    let mut packets_of: Vec<Vec<usize>> = vec![Vec::new(); scenario.flows.len()];
    let mut heap: BinaryHeap<Reverse<Ev>> = BinaryHeap::new();
    let gateway = scenario.graph.gateway();

    let mut flow_rt: Vec<FlowRuntime> = Vec::with_capacity(scenario.flows.len());
    for (i, flow) in scenario.flows.iter().enumerate() {
        let fs = &schedule.flows[i];
        let gen_phase = fs.radio.start_tti * tti;
        let radio_delay = fs.radio.tti_count * tti + t_proc;
        let period = flow.period.0;

        let mut first_arr = i64::MAX;
        let mut last_arr = i64::MIN;
        let mut seq = 0u64;
        while gen_phase + (seq as i64) * period < params.duration.0 {
            let t_gen_5gs = gen_phase + (seq as i64) * period;
            let extra = scale_draw(rng.next_u64(), params.jitter.0);
            let t_gw = t_gen_5gs + radio_delay + extra + skew;
            first_arr = first_arr.min(t_gw);
            last_arr = last_arr.max(t_gw);
            traces.push(PacketTrace {
                flow: i,
                seq,
                t_gen: t_gen_5gs + skew,
                extra,
                t_gw: None,
                wait: None,
                t_edge: None,
                t_deliver: None,
                dropped: None,
            });
            packets_of[i].push(traces.len() - 1);
            heap.push(Reverse(Ev {
                t: t_gw,
                node: gateway,
                kind: EvKind::GwArrive,
                flow: i,
                seq,
            }));
            seq += 1;
        }

        let hops: Vec<(usize, i64, i64, i64)> = fs
            .tsn
            .iter()
            .map(|inst| {
                (
                    inst.link,
                    inst.offset.0,
                    inst.span.0,
                    scenario.graph.dataflow_links[inst.link].prop_delay.0,
                )
            })
            .collect();
        let last_hop_link = flow.last_hop();
        let last_hop = (
            last_hop_link,
            scenario.span(i, last_hop_link).0,
            scenario.graph.dataflow_links[last_hop_link].prop_delay.0,
        );
        let t = fs.period.0;
        let gate_end = if seq == 0 {
            i64::MIN
        } else {
            last_arr + 4 * t + period + 1
        };
        let rt = FlowRuntime {
            gate_phase: hops[0].1,
            gate_period: t,
            hops,
            last_hop,
            hold_budget: fs.hold.map(|h| h.0),
            gate_end,
            buffer: None,
            fifo: VecDeque::new(),
            depth_warned: false,
        };
        if seq > 0 {
            let m0 = div_floor(first_arr - rt.gate_phase, t) - 1;
            heap.push(Reverse(Ev {
                t: rt.gate_phase + m0 * t,
                node: gateway,
                kind: EvKind::GwGate,
                flow: i,
                seq: m0 as u64,
            }));
        }
        flow_rt.push(rt);
    }

    let mut occupancy: Vec<(usize, i64, i64)> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut dropped_total = 0u64;

    while let Some(Reverse(ev)) = heap.pop() {
        match ev.kind {
            EvKind::GwArrive => {
                let idx = packets_of[ev.flow][ev.seq as usize];
                traces[idx].t_gw = Some(ev.t);
                let rt = &mut flow_rt[ev.flow];
                match params.mode {
                    AccessMode::Aam => {
                        if let Some((old_seq, _)) = rt.buffer.replace((ev.seq, ev.t)) {
                            let old_idx = packets_of[ev.flow][old_seq as usize];
                            traces[old_idx].dropped = Some(DropReason::ReplacedInBuffer);
                            dropped_total += 1;
                        }
                    }
                    AccessMode::Tam => {
                        rt.fifo.push_back((ev.seq, ev.t));
                        if rt.fifo.len() > 2 && !rt.depth_warned {
                            rt.depth_warned = true;
                            warnings.push(format!(
                                "flow {:?}: gateway queue depth {} exceeds twice the expected backlog",
                                scenario.flows[ev.flow].id,
                                rt.fifo.len()
                            ));
                        }
                    }
                }
            }
            EvKind::GwGate => {
                let m = ev.seq as i64;
                let g = flow_rt[ev.flow].gate_phase + m * flow_rt[ev.flow].gate_period;
                debug_assert_eq!(g, ev.t);
                let next = g + flow_rt[ev.flow].gate_period;
                if next <= flow_rt[ev.flow].gate_end {
                    heap.push(Reverse(Ev {
                        t: next,
                        node: ev.node,
                        kind: EvKind::GwGate,
                        flow: ev.flow,
                        seq: (m + 1) as u64,
                    }));
                }
                let taken = match params.mode {
                    AccessMode::Aam => flow_rt[ev.flow].buffer.take(),
                    AccessMode::Tam => flow_rt[ev.flow].fifo.pop_front(),
                };
                let Some((seq, recv_t)) = taken else {
                    continue;
                };
                let rt = &flow_rt[ev.flow];
                let wait = g - recv_t;
                if params.mode == AccessMode::Aam {
                    let t = rt.gate_period;
                    if wait > t {
                        return Err(CoreError::Protocol(format!(
                            "flow {:?} seq {}: waiting stamp {}ns exceeds the hold period {}ns",
                            scenario.flows[ev.flow].id, seq, wait, t
                        )));
                    }
                    debug_assert!(wait >= 0 && wait < t);
                }

                // ride the reserved windows hop by hop
                let mut send = g;
                let mut arrive = g;
                for (pos, &(link, offset, span, prop)) in rt.hops.iter().enumerate() {
                    if pos > 0 {
                        let m = div_ceil(arrive - offset, rt.gate_period);
                        send = offset + m * rt.gate_period;
                    }
                    occupancy.push((link, send, send + span));
                    arrive = send + span + prop;
                }
                let t_edge = arrive;
                let forward = match (params.mode, rt.hold_budget) {
                    (AccessMode::Aam, Some(hold)) => t_edge + (hold - wait),
                    _ => t_edge,
                };
                let (lh_link, lh_span, lh_prop) = rt.last_hop;
                occupancy.push((lh_link, forward, forward + lh_span));
                let t_deliver = forward + lh_span + lh_prop;

                let idx = packets_of[ev.flow][seq as usize];
                traces[idx].wait = Some(wait);
                traces[idx].t_edge = Some(t_edge);
                traces[idx].t_deliver = Some(t_deliver);
            }
        }
    }

    // anything still buffered never met an opportunity inside the horizon
    let mut in_flight: Vec<u64> = vec![0; scenario.flows.len()];
    for (i, rt) in flow_rt.iter().enumerate() {
        in_flight[i] = rt.buffer.is_some() as u64 + rt.fifo.len() as u64;
    }

    let link_overlaps = audit_occupancy(&mut occupancy);

    Ok(metrics::compute_metrics(
        scenario,
        schedule,
        params,
        skew,
        traces,
        in_flight,
        dropped_total,
        link_overlaps,
        warnings,
    ))
}

/// Count pairs of windows that overlap on the same dataflow link. Windows
/// are half-open, so back-to-back transmission is not an overlap.
fn audit_occupancy(occupancy: &mut [(usize, i64, i64)]) -> u64 {
    occupancy.sort_unstable();
    let mut overlaps = 0;
    for w in occupancy.windows(2) {
        if w[0].0 == w[1].0 && w[1].1 < w[0].2 {
            overlaps += 1;
        }
    }
    overlaps
}

fn div_floor(a: i64, b: i64) -> i64 {
    num_integer::Integer::div_floor(&a, &b)
}

fn div_ceil(a: i64, b: i64) -> i64 {
    num_integer::Integer::div_ceil(&a, &b)
}
