//! LP text-format export.
//!
//! Sections: Minimize, Subject To, Bounds, Generals, Binaries, End. Output
//! is byte-deterministic for a given model, so exported files can serve as
//! golden artifacts and be fed to external MILP solvers.

use std::fmt::Write;

use num_traits::Signed;

use crate::ilp::model::{IlpModel, VarKind};
use crate::rational::to_decimal_12;

/// Maximum identifier length accepted by common LP readers.
const MAX_NAME: usize = 255;

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.as_bytes()[0].is_ascii_digit() {
        out.insert(0, 'v');
    }
    out.truncate(MAX_NAME);
    out
}

pub fn export_lp(model: &IlpModel) -> String {
    let names: Vec<String> = model.vars.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();

    out.push_str("Minimize\n obj:");
    if model.objective.is_empty() {
        out.push_str(" 0");
    } else {
        for (i, t) in model.objective.iter().enumerate() {
            let mag = to_decimal_12(&t.coef.abs());
            if t.coef.is_negative() {
                out.push_str(" - ");
            } else if i == 0 {
                out.push(' ');
            } else {
                out.push_str(" + ");
            }
            let _ = write!(out, "{} {}", mag, names[t.var]);
        }
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", sanitize(&c.tag));
        if c.terms.is_empty() {
            // degenerate but still valid: 0 <op> rhs
            out.push_str(" 0");
        }
        for (i, t) in c.terms.iter().enumerate() {
            if t.coef < 0 {
                out.push_str(" - ");
            } else if i == 0 {
                out.push(' ');
            } else {
                out.push_str(" + ");
            }
            let mag = t.coef.unsigned_abs();
            if mag == 1 {
                let _ = write!(out, "{}", names[t.var]);
            } else {
                let _ = write!(out, "{} {}", mag, names[t.var]);
            }
        }
        let _ = writeln!(out, " {} {}", c.sense, c.rhs);
    }

    out.push_str("Bounds\n");
    for (v, name) in model.vars.iter().zip(&names) {
        if v.kind == VarKind::Binary {
            continue;
        }
        let _ = writeln!(out, " {} <= {} <= {}", v.lb, name, v.ub);
    }

    let generals: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Integer)
        .map(|(_, n)| n)
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for n in generals {
            let _ = writeln!(out, " {}", n);
        }
    }

    let binaries: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {}", n);
        }
    }

    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::model::{CmpSense, IlpModel, LinTerm, VarKind};
    use crate::rational::Rational;

    #[test]
    fn empty_model_skeleton() {
        let m = IlpModel::new();
        let text = export_lp(&m);
        assert!(text.starts_with("Minimize\n obj: 0\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn canonical_constraint_line() {
        let mut m = IlpModel::new();
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        m.add_constraint(
            "c_rb_0",
            vec![LinTerm { var: x, coef: 1 }, LinTerm { var: y, coef: 1 }],
            CmpSense::Le,
            1,
        );
        let text = export_lp(&m);
        assert!(text.contains(" c_rb_0: x + y <= 1\n"), "{}", text);
    }

    #[test]
    fn objective_and_sections() {
        let mut m = IlpModel::new();
        let x = m.add_binary("use x");
        let o = m.add_var("o1", VarKind::Integer, 0, 250_000);
        m.add_objective_term(x, Rational::new(1, 2));
        m.add_objective_term(o, Rational::new(-1, 5));
        m.add_constraint(
            "win",
            vec![LinTerm { var: o, coef: 1 }, LinTerm { var: x, coef: -7680 }],
            CmpSense::Ge,
            0,
        );
        let text = export_lp(&m);
        assert!(text.contains("obj: 0.5 use_x - 0.2 o1"), "{}", text);
        assert!(text.contains(" win: o1 - 7680 use_x >= 0\n"), "{}", text);
        assert!(text.contains("Bounds\n 0 <= o1 <= 250000\n"), "{}", text);
        assert!(text.contains("Generals\n o1\n"), "{}", text);
        assert!(text.contains("Binaries\n use_x\n"), "{}", text);
    }

    #[test]
    fn export_is_deterministic() {
        let mut m = IlpModel::new();
        let x = m.add_binary("x");
        m.add_objective_term(x, Rational::new(1, 3));
        assert_eq!(export_lp(&m), export_lp(&m));
    }
}
