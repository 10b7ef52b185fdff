//! Scratch timing probe for corpus scenarios (kept out of the default run).

use std::time::Instant;

use converged_sched_core::ilp::{build_atsm, build_stsm, decode_solution, solve, Limits, SolveStatus};
use converged_sched_core::schedule::SolverStats;
use converged_sched_core::{Rational, Scenario};

fn stats() -> SolverStats {
    SolverStats { status: "optimal".into(), nodes: 0, wall_ms: 0, objective: None }
}

#[test]
#[ignore]
fn probe_corpus_solve_times() {
    let which = std::env::var("PROBE").unwrap_or_else(|_| "fig2".into());
    for name in which.split(',') {
        let text = std::fs::read_to_string(format!("../../scenarios/{}.json", name)).unwrap();
        let sc = Scenario::from_json_str(&text).unwrap();
        for kind in ["atsm", "stsm"] {
            let t0 = Instant::now();
            let art = match kind {
                "atsm" => build_atsm(&sc, &Rational::new(1, 2)),
                _ => build_stsm(&sc, &Rational::new(1, 2)),
            };
            match art {
                Err(e) => println!("{name}/{kind}: build error: {e}"),
                Ok(art) => {
                    let built = t0.elapsed();
                    let sol = solve(&art.model, Limits { max_nodes: 50_000_000, max_wall_time: std::time::Duration::from_secs(120) });
                    println!(
                        "{name}/{kind}: vars={} cons={} build={:?} solve={:?} nodes={} status={:?}",
                        art.model.vars.len(), art.model.constraints.len(), built, sol.wall, sol.nodes,
                        match &sol.status { SolveStatus::Optimal => "optimal", SolveStatus::Infeasible{..} => "infeasible", _ => "timeout" }
                    );
                    if sol.status == SolveStatus::Optimal {
                        let sched = decode_solution(&sc, &art, sol.assignment.as_ref().unwrap(), stats()).unwrap();
                        let offsets: Vec<(String, i64, i64, Vec<i64>)> = sched.flows.iter().map(|f| (
                            f.flow_id.clone(), f.period.0, f.radio.start_tti,
                            f.tsn.iter().map(|i| i.offset.0).collect()
                        )).collect();
                        println!("   schedules: {:?}", offsets);
                    }
                }
            }
        }
    }
}
