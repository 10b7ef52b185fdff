use std::time::Instant;
use converged_sched_core::ilp::{build_atsm, build_stsm};
use converged_sched_core::{Rational, Scenario};

#[test]
#[ignore]
fn probe_build_only() {
    let which = std::env::var("PROBE").unwrap_or_else(|_| "quad".into());
    for name in which.split(',') {
        let text = std::fs::read_to_string(format!("../../scenarios/{}.json", name)).unwrap();
        let sc = Scenario::from_json_str(&text).unwrap();
        let t0 = Instant::now();
        let a = build_atsm(&sc, &Rational::new(1, 2)).unwrap();
        println!("{name}/atsm: vars={} cons={} selectors={} build={:?}",
            a.model.vars.len(), a.model.constraints.len(), a.selectors.len(), t0.elapsed());
        let t0 = Instant::now();
        let s = build_stsm(&sc, &Rational::new(1, 2)).unwrap();
        println!("{name}/stsm: vars={} cons={} selectors={} build={:?}",
            s.model.vars.len(), s.model.constraints.len(), s.selectors.len(), t0.elapsed());
    }
}
