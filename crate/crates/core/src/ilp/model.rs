//! Solver-neutral integer linear programs.
//!
//! All constraint coefficients, bounds, and right-hand sides are exact
//! integers. Objective coefficients are exact rationals, since they carry
//! factors like gamma / k_max.

use num_traits::Zero;

use crate::rational::Rational;
use crate::CoreError;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDef {
    pub name: String,
    pub kind: VarKind,
    pub lb: i64,
    pub ub: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinTerm {
    pub var: VarId,
    pub coef: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpSense {
    Le,
    Ge,
    Eq,
}

impl std::fmt::Display for CmpSense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmpSense::Le => write!(f, "<="),
            CmpSense::Ge => write!(f, ">="),
            CmpSense::Eq => write!(f, "="),
        }
    }
}

/// One linear constraint, tagged with the constraint family it came from so
/// violations can be traced back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub tag: String,
    pub terms: Vec<LinTerm>,
    pub sense: CmpSense,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjTerm {
    pub var: VarId,
    pub coef: Rational,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IlpModel {
    pub vars: Vec<VarDef>,
    pub constraints: Vec<Constraint>,
    /// Minimized. Variables appear at most once.
    pub objective: Vec<ObjTerm>,
}

impl IlpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: i64, ub: i64) -> VarId {
        let name = name.into();
        debug_assert!(
            !self.vars.iter().any(|v| v.name == name),
            "duplicate variable name {name}"
        );
        self.vars.push(VarDef { name, kind, lb, ub });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0, 1)
    }

    /// Adds a constraint, dropping zero coefficients and merging duplicate
    /// variables so every stored term is canonical.
    pub fn add_constraint(
        &mut self,
        tag: impl Into<String>,
        terms: Vec<LinTerm>,
        sense: CmpSense,
        rhs: i64,
    ) {
        let mut merged: Vec<LinTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            debug_assert!(t.var < self.vars.len(), "constraint references unknown var");
            if t.coef == 0 {
                continue;
            }
            match merged.iter_mut().find(|m| m.var == t.var) {
                Some(m) => m.coef += t.coef,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0);
        self.constraints.push(Constraint {
            tag: tag.into(),
            terms: merged,
            sense,
            rhs,
        });
    }

    pub fn add_objective_term(&mut self, var: VarId, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.objective.iter_mut().find(|t| t.var == var) {
            Some(t) => t.coef += coef,
            None => self.objective.push(ObjTerm { var, coef }),
        }
    }

    pub fn objective_value(&self, assignment: &[i64]) -> Rational {
        self.objective
            .iter()
            .map(|t| t.coef * Rational::from_integer(assignment[t.var] as i128))
            .sum()
    }

    /// Signed slack of constraint `c` under `assignment`: non-negative means
    /// satisfied. For equalities the slack is zero exactly when satisfied.
    pub fn residual(&self, c: &Constraint, assignment: &[i64]) -> i128 {
        let lhs: i128 = c
            .terms
            .iter()
            .map(|t| (t.coef as i128) * (assignment[t.var] as i128))
            .sum();
        match c.sense {
            CmpSense::Le => c.rhs as i128 - lhs,
            CmpSense::Ge => lhs - c.rhs as i128,
            CmpSense::Eq => -(lhs - c.rhs as i128).abs(),
        }
    }

    /// Lowest / highest value a constraint's left side can take under the
    /// declared variable bounds.
    pub fn lhs_range(&self, c: &Constraint) -> (i128, i128) {
        let mut lo = 0i128;
        let mut hi = 0i128;
        for t in &c.terms {
            let v = &self.vars[t.var];
            let a = t.coef as i128;
            if a >= 0 {
                lo += a * v.lb as i128;
                hi += a * v.ub as i128;
            } else {
                lo += a * v.ub as i128;
                hi += a * v.lb as i128;
            }
        }
        (lo, hi)
    }

    /// True when the constraint holds for every assignment within bounds.
    pub fn is_vacuous(&self, c: &Constraint) -> bool {
        let (lo, hi) = self.lhs_range(c);
        match c.sense {
            CmpSense::Le => hi <= c.rhs as i128,
            CmpSense::Ge => lo >= c.rhs as i128,
            CmpSense::Eq => lo == hi && lo == c.rhs as i128,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for v in &self.vars {
            if v.lb > v.ub {
                return Err(CoreError::Infeasible(format!(
                    "variable {} has empty domain [{}, {}]",
                    v.name, v.lb, v.ub
                )));
            }
            if v.kind == VarKind::Binary && (v.lb < 0 || v.ub > 1) {
                return Err(CoreError::Validation(format!(
                    "binary variable {} with bounds [{}, {}]",
                    v.name, v.lb, v.ub
                )));
            }
        }
        for t in &self.objective {
            if t.var >= self.vars.len() {
                return Err(CoreError::Validation(
                    "objective references undeclared variable".into(),
                ));
            }
        }
        for c in &self.constraints {
            for t in &c.terms {
                if t.var >= self.vars.len() {
                    return Err(CoreError::Validation(format!(
                        "constraint {} references undeclared variable",
                        c.tag
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_by_sense() {
        let mut m = IlpModel::new();
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        m.add_constraint(
            "c",
            vec![LinTerm { var: x, coef: 1 }, LinTerm { var: y, coef: 1 }],
            CmpSense::Le,
            1,
        );
        let c = m.constraints[0].clone();
        assert_eq!(m.residual(&c, &[0, 1]), 0);
        assert_eq!(m.residual(&c, &[1, 1]), -1);
        assert_eq!(m.residual(&c, &[0, 0]), 1);
    }

    #[test]
    fn vacuity_uses_bounds() {
        let mut m = IlpModel::new();
        let x = m.add_var("x", VarKind::Integer, 0, 5);
        m.add_constraint("ok", vec![LinTerm { var: x, coef: 1 }], CmpSense::Le, 5);
        m.add_constraint("tight", vec![LinTerm { var: x, coef: 1 }], CmpSense::Le, 4);
        assert!(m.is_vacuous(&m.constraints[0]));
        assert!(!m.is_vacuous(&m.constraints[1]));
    }

    #[test]
    fn duplicate_terms_merge() {
        let mut m = IlpModel::new();
        let x = m.add_binary("x");
        m.add_constraint(
            "c",
            vec![LinTerm { var: x, coef: 2 }, LinTerm { var: x, coef: -2 }],
            CmpSense::Le,
            0,
        );
        assert!(m.constraints[0].terms.is_empty());
    }
}
