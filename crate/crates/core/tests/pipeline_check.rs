// quick scratch check via a core integration test
use converged_sched_core::ilp::{build_atsm, build_stsm, decode_solution, solve, Limits, SolveStatus};
use converged_sched_core::schedule::SolverStats;
use converged_sched_core::{Rational, Scenario, TimeNs};

const GOLDEN: &str = include_str!("golden.json");

#[test]
fn solver_reproduces_golden_schedules() {
    let sc = Scenario::from_json_str(GOLDEN).unwrap();
    let st = SolverStats { status: "optimal".into(), nodes: 0, wall_ms: 0, objective: None };

    let art = build_stsm(&sc, &Rational::new(1, 2)).unwrap();
    let sol = solve(&art.model, Limits::default());
    assert_eq!(sol.status, SolveStatus::Optimal, "stsm");
    let sched = decode_solution(&sc, &art, &sol.assignment.unwrap(), st.clone()).unwrap();
    println!("STSM: c={} d={} offset={} e2e={}", sched.flows[0].radio.start_tti,
        sched.flows[0].radio.tti_count, sched.flows[0].tsn[0].offset.0, sched.flows[0].scheduled_e2e.0);
    assert_eq!(sched.flows[0].tsn[0].offset, TimeNs(40_000_000));
    assert_eq!(sched.flows[0].scheduled_e2e, TimeNs(45_000_000));

    let art = build_atsm(&sc, &Rational::new(1, 2)).unwrap();
    let sol = solve(&art.model, Limits::default());
    assert_eq!(sol.status, SolveStatus::Optimal, "atsm");
    println!("ATSM nodes={} wall={:?}", sol.nodes, sol.wall);
    let sched = decode_solution(&sc, &art, &sol.assignment.unwrap(), st).unwrap();
    println!("ATSM: T={} offset={} e2e={}", sched.flows[0].period.0,
        sched.flows[0].tsn[0].offset.0, sched.flows[0].scheduled_e2e.0);
    assert_eq!(sched.flows[0].period, TimeNs(25_000_000));
    assert_eq!(sched.flows[0].scheduled_e2e, TimeNs(70_000_000));
}
