//! CSV renderings of traces and run reports.

use std::fmt::Write;

use crate::sim::SimReport;

pub const TRACE_HEADER: &str = "flow_id,seq,t_gen_ns,t_gw_ns,wait_ns,t_edge_ns,t_deliver_ns,dropped";
pub const REPORT_HEADER: &str =
    "sweep_param,value,seed,mce,mcv,std_ratio,tsn_usage,fiveg_usage,drops";

fn opt(v: Option<i64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Per-packet trace rows in (flow, seq) order.
pub fn trace_csv(report: &SimReport, flow_ids: &[String]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for tr in &report.traces {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            flow_ids[tr.flow],
            tr.seq,
            tr.t_gen,
            opt(tr.t_gw),
            opt(tr.wait),
            opt(tr.t_edge),
            opt(tr.t_deliver),
            tr.dropped.is_some() as u8
        );
    }
    out
}

/// One aggregate row; `sweep_param`/`value` identify the sweep point the run
/// belongs to ("single", 0 for standalone runs).
pub fn report_row(report: &SimReport, sweep_param: &str, value: f64) -> String {
    format!(
        "{},{},{},{:.9},{:.9},{:.9},{:.9},{:.9},{}\n",
        sweep_param,
        trim_float(value),
        report.seed,
        report.mce,
        report.mcv,
        report.std_ratio,
        report.tsn_usage,
        report.fiveg_usage,
        report.total_drops
    )
}

pub fn report_csv(report: &SimReport, sweep_param: &str, value: f64) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    out.push_str(&report_row(report, sweep_param, value));
    out
}

fn trim_float(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{}", v)
    }
}
