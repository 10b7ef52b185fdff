//! Conversions between solver assignments and schedules.

use crate::ilp::builder::BuildArtifacts;
use crate::scenario::Scenario;
use crate::schedule::{
    FlowSchedule, RadioInstance, Schedule, ScheduleModel, SolverStats, TsnInstance,
};
use crate::time::{hyper_period, TimeNs};
use crate::CoreError;

/// Turn a feasible assignment into a schedule, recomputing hyper-periods and
/// the per-flow scheduled delay.
pub fn decode_solution(
    scenario: &Scenario,
    artifacts: &BuildArtifacts,
    assignment: &[i64],
    stats: SolverStats,
) -> Result<Schedule, CoreError> {
    if assignment.len() != artifacts.model.vars.len() {
        return Err(CoreError::Validation(
            "assignment length does not match the model".into(),
        ));
    }
    let mut flows = Vec::with_capacity(scenario.flows.len());
    for (i, flow) in scenario.flows.iter().enumerate() {
        let fv = &artifacts.flow_vars[i];
        let period = match artifacts.kind {
            ScheduleModel::Stsm => flow.period,
            ScheduleModel::Atsm => {
                let selected: Vec<usize> = fv
                    .b
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| assignment[b] == 1)
                    .map(|(j, _)| j)
                    .collect();
                if selected.len() != 1 {
                    return Err(CoreError::Validation(format!(
                        "flow {:?}: {} period candidates selected",
                        flow.id,
                        selected.len()
                    )));
                }
                fv.candidates.list[selected[0]]
            }
        };
        let rb_set: Vec<usize> = fv
            .x
            .iter()
            .enumerate()
            .filter(|(_, &x)| assignment[x] == 1)
            .map(|(k, _)| k + 1)
            .collect();
        let tsn: Vec<TsnInstance> = flow
            .scheduled_route()
            .iter()
            .zip(&fv.offsets)
            .map(|(&link, &o)| TsnInstance {
                link,
                period,
                offset: TimeNs(assignment[o]),
                span: scenario.span(i, link),
            })
            .collect();
        flows.push(FlowSchedule {
            flow_id: flow.id.clone(),
            period,
            radio: RadioInstance {
                start_tti: assignment[fv.c],
                tti_count: assignment[fv.d],
                rb_set,
            },
            tsn,
            hold: match artifacts.kind {
                ScheduleModel::Atsm => Some(period),
                ScheduleModel::Stsm => None,
            },
            scheduled_e2e: TimeNs(0),
        });
    }
    let rb_used: Vec<bool> = artifacts.y.iter().map(|&y| assignment[y] == 1).collect();

    let hyper_5gs = if scenario.flows.is_empty() {
        TimeNs(1)
    } else {
        hyper_period(&scenario.flows.iter().map(|f| f.period).collect::<Vec<_>>())?
    };
    let mut schedule = Schedule {
        model: artifacts.kind,
        gamma: artifacts.gamma.clone(),
        scenario_digest: scenario.digest.clone(),
        flows,
        rb_used,
        hyper_tsn: TimeNs(1),
        hyper_5gs,
        stats,
    };
    schedule.recompute_hypers()?;
    for i in 0..scenario.flows.len() {
        let delay = schedule.e2e_delay(scenario, i)?;
        if delay > scenario.flows[i].deadline {
            return Err(CoreError::Validation(format!(
                "flow {:?}: decoded delay {} exceeds the deadline {}",
                scenario.flows[i].id, delay, scenario.flows[i].deadline
            )));
        }
        schedule.flows[i].scheduled_e2e = delay;
    }
    Ok(schedule)
}

/// Re-encode a schedule as a full model assignment. Auxiliary products are
/// derived; disjunction selectors take whichever side their constraints
/// satisfy, so a feasible schedule encodes to a feasible assignment.
pub fn encode_schedule(
    scenario: &Scenario,
    artifacts: &BuildArtifacts,
    schedule: &Schedule,
) -> Result<Vec<i64>, CoreError> {
    let mut assignment = vec![0i64; artifacts.model.vars.len()];
    for (i, flow) in scenario.flows.iter().enumerate() {
        let fv = &artifacts.flow_vars[i];
        let fs = &schedule.flows[i];
        if !fv.b.is_empty() {
            let idx = fv
                .candidates
                .list
                .iter()
                .position(|&t| t == fs.period)
                .ok_or_else(|| {
                    CoreError::Validation(format!(
                        "flow {:?}: period {} is not one of the candidates",
                        flow.id, fs.period
                    ))
                })?;
            assignment[fv.b[idx]] = 1;
        }
        assignment[fv.c] = fs.radio.start_tti;
        assignment[fv.d] = fs.radio.tti_count;
        for &k in &fs.radio.rb_set {
            if k < 1 || k > fv.x.len() {
                return Err(CoreError::Validation(format!(
                    "flow {:?}: RB index {} out of range",
                    flow.id, k
                )));
            }
            assignment[fv.x[k - 1]] = 1;
            assignment[fv.z[k - 1]] = fs.radio.tti_count;
        }
        for (inst, &o) in fs.tsn.iter().zip(&fv.offsets) {
            assignment[o] = inst.offset.0;
        }
    }
    for (k, &y) in artifacts.y.iter().enumerate() {
        assignment[y] = schedule.rb_used.get(k).map_or(0, |&b| b as i64);
    }
    for sel in &artifacts.selectors {
        assignment[sel.var] = 0;
        let ok_zero = sel.constraints.iter().all(|&ci| {
            artifacts
                .model
                .residual(&artifacts.model.constraints[ci], &assignment)
                >= 0
        });
        if !ok_zero {
            assignment[sel.var] = 1;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::builder::build_atsm;
    use crate::ilp::solver::{solve, verify, Limits, SolveStatus};
    use crate::rational::Rational;

    fn stats() -> SolverStats {
        SolverStats {
            status: "optimal".into(),
            nodes: 0,
            wall_ms: 0,
            objective: None,
        }
    }

    #[test]
    fn solve_decode_encode_roundtrip() {
        let sc = Scenario::from_json_str(crate::scenario::fixtures::TOY).unwrap();
        let art = build_atsm(&sc, &Rational::new(1, 2)).unwrap();
        let sol = solve(&art.model, Limits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        let assignment = sol.assignment.unwrap();
        let schedule = decode_solution(&sc, &art, &assignment, stats()).unwrap();
        schedule.validate_against(&sc).unwrap();
        assert_eq!(schedule.flows[0].radio.tti_count, 1);
        assert!(schedule.flows[0].scheduled_e2e <= sc.flows[0].deadline);

        let encoded = encode_schedule(&sc, &art, &schedule).unwrap();
        assert!(verify(&art.model, &encoded).unwrap().is_empty());
    }

    #[test]
    fn encode_rejects_foreign_period() {
        let sc = Scenario::from_json_str(crate::scenario::fixtures::TOY).unwrap();
        let art = build_atsm(&sc, &Rational::new(1, 2)).unwrap();
        let sol = solve(&art.model, Limits::default());
        let mut schedule =
            decode_solution(&sc, &art, sol.assignment.as_ref().unwrap(), stats()).unwrap();
        schedule.flows[0].period = TimeNs(123_456);
        assert!(encode_schedule(&sc, &art, &schedule).is_err());
    }
}
