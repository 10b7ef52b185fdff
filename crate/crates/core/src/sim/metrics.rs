//! Per-run statistics: delay expansion and variation coefficients, exact
//! jitter-isolation checks, and resource-usage figures.

use num_traits::ToPrimitive;

use crate::rational::Rational;
use crate::scenario::Scenario;
use crate::schedule::Schedule;
use crate::sim::{PacketTrace, SimParams};

#[derive(Debug, Clone)]
pub struct FlowReport {
    pub flow_id: String,
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub in_flight_at_end: u64,
    pub deadline_misses: u64,
    pub scheduled_e2e: i64,
    /// End-to-end delays (delivery minus generation, TSN clock) of
    /// delivered packets in sequence order.
    pub delays: Vec<i64>,
    /// Uplink delays (gateway arrival minus generation) of the same packets.
    pub d5gs: Vec<i64>,
    /// Time from gateway arrival to final delivery of the same packets.
    pub residence: Vec<i64>,
    /// Mean actual delay over the scheduled delay; absent with no data.
    pub ce: Option<f64>,
    /// Standard deviation over mean of the actual delay; absent with no data.
    pub cv: Option<f64>,
    pub std_ratio: Option<f64>,
    /// Exact check: every delivered packet spent the same time in TSN.
    pub residence_constant: bool,
    /// Exact check: population variance of the end-to-end delay equals the
    /// variance of the uplink delay (integer arithmetic, no tolerance).
    pub variance_identity: bool,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub mode: crate::scenario::AccessMode,
    pub seed: u64,
    pub skew_offset: i64,
    pub jitter_width: i64,
    pub flows: Vec<FlowReport>,
    pub mce: f64,
    pub mcv: f64,
    pub std_ratio: f64,
    pub tsn_usage: f64,
    pub tsn_usage_exact: Rational,
    pub fiveg_usage: f64,
    pub fiveg_usage_exact: Rational,
    pub total_drops: u64,
    pub link_overlaps: u64,
    pub warnings: Vec<String>,
    pub traces: Vec<PacketTrace>,
}

/// n * sum(x^2) - sum(x)^2, i.e. the population variance scaled by n^2.
fn scaled_variance(samples: &[i64]) -> i128 {
    let n = samples.len() as i128;
    let sum: i128 = samples.iter().map(|&x| x as i128).sum();
    let sum_sq: i128 = samples.iter().map(|&x| (x as i128) * (x as i128)).sum();
    n * sum_sq - sum * sum
}

fn mean(samples: &[i64]) -> f64 {
    samples.iter().map(|&x| x as f64).sum::<f64>() / samples.len() as f64
}

fn pop_std(samples: &[i64]) -> f64 {
    let m = mean(samples);
    (samples
        .iter()
        .map(|&x| (x as f64 - m).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
        .sqrt()
}

/// Steady-state share of time the gateway's egress windows reserved for the
/// scheduled flows keep the port open: sum of span/period per flow.
pub fn gateway_port_usage(scenario: &Scenario, schedule: &Schedule) -> Rational {
    let mut total = Rational::from_integer(0);
    for (i, _flow) in scenario.flows.iter().enumerate() {
        let fs = &schedule.flows[i];
        let Some(first) = fs.tsn.first() else { continue };
        total += Rational::new(first.span.0 as i128, fs.period.0 as i128);
    }
    total
}

pub fn rb_usage(scenario: &Scenario, schedule: &Schedule) -> Rational {
    let used = schedule.rb_used.iter().filter(|&&b| b).count() as i128;
    Rational::new(used, scenario.radio.k_max as i128)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn compute_metrics(
    scenario: &Scenario,
    schedule: &Schedule,
    params: &SimParams,
    skew_offset: i64,
    traces: Vec<PacketTrace>,
    in_flight: Vec<u64>,
    total_drops: u64,
    link_overlaps: u64,
    mut warnings: Vec<String>,
) -> SimReport {
    let mut flows = Vec::with_capacity(scenario.flows.len());
    for (i, flow) in scenario.flows.iter().enumerate() {
        let mut generated = 0u64;
        let mut dropped = 0u64;
        let mut deadline_misses = 0u64;
        let mut delays = Vec::new();
        let mut d5gs = Vec::new();
        let mut residence = Vec::new();
        for tr in traces.iter().filter(|t| t.flow == i) {
            generated += 1;
            if tr.dropped.is_some() {
                dropped += 1;
                continue;
            }
            let (Some(t_gw), Some(t_deliver)) = (tr.t_gw, tr.t_deliver) else {
                continue; // in flight at the end of the run
            };
            let delay = t_deliver - tr.t_gen;
            delays.push(delay);
            d5gs.push(t_gw - tr.t_gen);
            residence.push(t_deliver - t_gw);
            if delay > flow.deadline.0 {
                deadline_misses += 1;
            }
        }
        let delivered = delays.len() as u64;
        let scheduled = schedule.flows[i].scheduled_e2e.0;
        let (ce, cv, std_ratio) = if delivered > 0 {
            let m = mean(&delays);
            let ce = m / scheduled as f64;
            let cv = pop_std(&delays) / m;
            let var_e = scaled_variance(&delays);
            let var_g = scaled_variance(&d5gs);
            let ratio = if var_g == 0 && var_e == 0 {
                1.0
            } else if var_g == 0 {
                f64::INFINITY
            } else {
                (var_e as f64 / var_g as f64).sqrt()
            };
            (Some(ce), Some(cv), Some(ratio))
        } else {
            warnings.push(format!(
                "flow {:?}: no packets delivered, expansion metrics unavailable",
                flow.id
            ));
            (None, None, None)
        };
        let residence_constant = residence.windows(2).all(|w| w[0] == w[1]);
        let variance_identity =
            delivered > 0 && scaled_variance(&delays) == scaled_variance(&d5gs);
        flows.push(FlowReport {
            flow_id: flow.id.clone(),
            generated,
            delivered,
            dropped,
            in_flight_at_end: in_flight[i],
            deadline_misses,
            scheduled_e2e: scheduled,
            delays,
            d5gs,
            residence,
            ce,
            cv,
            std_ratio,
            residence_constant,
            variance_identity,
        });
    }

    let with_data: Vec<&FlowReport> = flows.iter().filter(|f| f.delivered > 0).collect();
    let n = with_data.len().max(1) as f64;
    let mce = with_data.iter().filter_map(|f| f.ce).sum::<f64>() / n;
    let mcv = with_data.iter().filter_map(|f| f.cv).sum::<f64>() / n;
    let std_ratio = with_data.iter().filter_map(|f| f.std_ratio).sum::<f64>() / n;

    let tsn_usage_exact = gateway_port_usage(scenario, schedule);
    let fiveg_usage_exact = rb_usage(scenario, schedule);

    SimReport {
        mode: params.mode,
        seed: params.seed,
        skew_offset,
        jitter_width: params.jitter.0,
        flows,
        mce,
        mcv,
        std_ratio,
        tsn_usage: tsn_usage_exact.to_f64().unwrap_or(0.0),
        tsn_usage_exact,
        fiveg_usage: fiveg_usage_exact.to_f64().unwrap_or(0.0),
        fiveg_usage_exact,
        total_drops,
        link_overlaps,
        warnings,
        traces,
    }
}

impl SimReport {
    pub fn total_deadline_misses(&self) -> u64 {
        self.flows.iter().map(|f| f.deadline_misses).sum()
    }

    pub fn conservation_holds(&self) -> bool {
        self.flows
            .iter()
            .all(|f| f.generated == f.delivered + f.dropped + f.in_flight_at_end)
    }
}
