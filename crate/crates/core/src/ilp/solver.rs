//! Exact branch-and-bound over integer linear programs.
//!
//! Depth-first search with bounds-consistency propagation on every linear
//! constraint, driven entirely by integer arithmetic. The search branches on
//! the first unfixed variable in declaration order, exploring lower values
//! first (for integers: fix the lower bound, else exclude it), so solutions
//! are enumerated in lexicographically increasing order and the first
//! optimum found is the lexicographically smallest one. Pruning compares an
//! optimistic objective completion against the incumbent; groups of one-hot
//! selector binaries are bounded by their cheapest member.

use std::time::{Duration, Instant};

use num_integer::Integer;

use crate::ilp::model::{CmpSense, IlpModel, VarId};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_nodes: u64,
    pub max_wall_time: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 50_000_000,
            max_wall_time: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    Infeasible {
        /// Tag of the constraint whose propagation emptied a domain.
        family: String,
    },
    TimedOut {
        incumbent: Option<Vec<i64>>,
    },
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub assignment: Option<Vec<i64>>,
    pub objective: Option<Rational>,
    pub nodes: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub tag: String,
    pub residual: i128,
}

/// Evaluate every constraint and variable bound under `assignment`; an empty
/// report means the assignment is feasible.
pub fn verify(model: &IlpModel, assignment: &[i64]) -> Result<Vec<Violation>, crate::CoreError> {
    if assignment.len() != model.vars.len() {
        return Err(crate::CoreError::Validation(format!(
            "assignment covers {} of {} variables",
            assignment.len(),
            model.vars.len()
        )));
    }
    let mut out = Vec::new();
    for (v, &val) in model.vars.iter().zip(assignment) {
        if val < v.lb || val > v.ub {
            let residual = if val < v.lb {
                (val - v.lb) as i128
            } else {
                (v.ub - val) as i128
            };
            out.push(Violation {
                tag: format!("bounds:{}", v.name),
                residual,
            });
        }
    }
    for c in &model.constraints {
        let r = model.residual(c, assignment);
        if r < 0 {
            out.push(Violation {
                tag: c.tag.clone(),
                residual: r,
            });
        }
    }
    Ok(out)
}

pub fn solve(model: &IlpModel, limits: Limits) -> Solution {
    Search::new(model, limits).run()
}

// ---------------------------------------------------------------------------

struct Search<'a> {
    model: &'a IlpModel,
    limits: Limits,
    start: Instant,
    nodes: u64,
    lb: Vec<i64>,
    ub: Vec<i64>,
    /// Undo log of (var, old_lb, old_ub).
    trail: Vec<(VarId, i64, i64)>,
    /// Constraints watching each variable.
    watchers: Vec<Vec<usize>>,
    in_queue: Vec<bool>,
    /// Objective numerators over a common denominator, one per variable.
    obj_numer: Vec<i128>,
    obj_denom: i128,
    /// One-hot groups detected from sum-to-one equality constraints.
    group_of: Vec<Option<usize>>,
    groups: Vec<Vec<VarId>>,
    /// Binary covers (sum >= rhs over non-negative-cost binaries) used to
    /// strengthen the optimistic bound.
    covers: Vec<(Vec<VarId>, i64)>,
    incumbent: Option<(i128, Vec<i64>)>,
    timed_out: bool,
    wipeout_family: Option<String>,
}

enum Propagate {
    Ok,
    Conflict(String),
}

enum Bound {
    Lb(i64),
    Ub(i64),
}

impl<'a> Search<'a> {
    fn new(model: &'a IlpModel, limits: Limits) -> Self {
        let n = model.vars.len();
        let mut watchers = vec![Vec::new(); n];
        for (ci, c) in model.constraints.iter().enumerate() {
            for t in &c.terms {
                watchers[t.var].push(ci);
            }
        }

        let mut obj_denom: i128 = 1;
        for t in &model.objective {
            obj_denom = obj_denom.lcm(t.coef.denom());
        }
        let mut obj_numer = vec![0i128; n];
        for t in &model.objective {
            obj_numer[t.var] = t.coef.numer() * (obj_denom / t.coef.denom());
        }

        let mut group_of = vec![None; n];
        let mut groups = Vec::new();
        for c in &model.constraints {
            let is_one_hot = c.sense == CmpSense::Eq
                && c.rhs == 1
                && c.terms.len() > 1
                && c.terms.iter().all(|t| {
                    t.coef == 1
                        && model.vars[t.var].lb == 0
                        && model.vars[t.var].ub == 1
                        && group_of[t.var].is_none()
                });
            if is_one_hot {
                let gid = groups.len();
                let members: Vec<VarId> = c.terms.iter().map(|t| t.var).collect();
                for &v in &members {
                    group_of[v] = Some(gid);
                }
                groups.push(members);
            }
        }

        // variable-disjoint unit-binary covers over variables with
        // non-negative objective cost: any completion must pay for the
        // cheapest `rhs` members, which sharpens the optimistic bound
        let mut covers = Vec::new();
        let mut in_cover = vec![false; n];
        for c in &model.constraints {
            let usable = c.sense == CmpSense::Ge
                && c.rhs >= 1
                && !c.terms.is_empty()
                && c.terms.iter().all(|t| {
                    t.coef == 1
                        && model.vars[t.var].lb == 0
                        && model.vars[t.var].ub == 1
                        && group_of[t.var].is_none()
                        && !in_cover[t.var]
                        && obj_numer[t.var] >= 0
                });
            if usable {
                let members: Vec<VarId> = c.terms.iter().map(|t| t.var).collect();
                for &v in &members {
                    in_cover[v] = true;
                }
                covers.push((members, c.rhs));
            }
        }

        let n_constraints = model.constraints.len();
        Search {
            model,
            limits,
            start: Instant::now(),
            nodes: 0,
            lb: model.vars.iter().map(|v| v.lb).collect(),
            ub: model.vars.iter().map(|v| v.ub).collect(),
            trail: Vec::new(),
            watchers,
            in_queue: vec![false; n_constraints],
            obj_numer,
            obj_denom,
            group_of,
            groups,
            covers,
            incumbent: None,
            timed_out: false,
            wipeout_family: None,
        }
    }

    fn run(mut self) -> Solution {
        if self.model.vars.is_empty() {
            return Solution {
                status: SolveStatus::Optimal,
                assignment: Some(Vec::new()),
                objective: Some(Rational::from_integer(0)),
                nodes: 0,
                wall: self.start.elapsed(),
            };
        }

        let root_conflict = {
            let all: Vec<usize> = (0..self.model.constraints.len()).collect();
            match self.propagate(all) {
                Propagate::Ok => None,
                Propagate::Conflict(tag) => Some(tag),
            }
        };
        if let Some(tag) = root_conflict {
            return Solution {
                status: SolveStatus::Infeasible { family: tag },
                assignment: None,
                objective: None,
                nodes: self.nodes,
                wall: self.start.elapsed(),
            };
        }

        self.dfs(0);

        let wall = self.start.elapsed();
        match (self.timed_out, self.incumbent) {
            (false, Some((numer, assignment))) => Solution {
                status: SolveStatus::Optimal,
                objective: Some(Rational::new(numer, self.obj_denom)),
                assignment: Some(assignment),
                nodes: self.nodes,
                wall,
            },
            (false, None) => Solution {
                status: SolveStatus::Infeasible {
                    family: self
                        .wipeout_family
                        .unwrap_or_else(|| "search exhausted".into()),
                },
                assignment: None,
                objective: None,
                nodes: self.nodes,
                wall,
            },
            (true, incumbent) => {
                let (objective, assignment) = match incumbent {
                    Some((numer, a)) => (Some(Rational::new(numer, self.obj_denom)), Some(a)),
                    None => (None, None),
                };
                Solution {
                    status: SolveStatus::TimedOut {
                        incumbent: assignment.clone(),
                    },
                    assignment,
                    objective,
                    nodes: self.nodes,
                    wall,
                }
            }
        }
    }

    // -- propagation --------------------------------------------------------

    /// Bounds-consistency pass over the queued constraints to fixpoint.
    fn propagate(&mut self, mut queue: Vec<usize>) -> Propagate {
        let model = self.model;
        for &ci in queue.iter() {
            self.in_queue[ci] = true;
        }
        let mut conflict: Option<String> = None;
        'outer: while let Some(ci) = queue.pop() {
            self.in_queue[ci] = false;
            let c = &model.constraints[ci];
            // treat Eq as both Le and Ge
            let (check_le, check_ge) = match c.sense {
                CmpSense::Le => (true, false),
                CmpSense::Ge => (false, true),
                CmpSense::Eq => (true, true),
            };
            let rhs = c.rhs as i128;

            let mut min_sum = 0i128;
            let mut max_sum = 0i128;
            for t in &c.terms {
                let a = t.coef as i128;
                if a >= 0 {
                    min_sum += a * self.lb[t.var] as i128;
                    max_sum += a * self.ub[t.var] as i128;
                } else {
                    min_sum += a * self.ub[t.var] as i128;
                    max_sum += a * self.lb[t.var] as i128;
                }
            }
            if (check_le && min_sum > rhs) || (check_ge && max_sum < rhs) {
                conflict = Some(c.tag.clone());
                break 'outer;
            }

            for t in &c.terms {
                let a = t.coef as i128;
                let (vlb, vub) = (self.lb[t.var] as i128, self.ub[t.var] as i128);
                let term_min = if a >= 0 { a * vlb } else { a * vub };
                let term_max = if a >= 0 { a * vub } else { a * vlb };
                if check_le {
                    // a*x <= rhs - (rest of the minimum sum)
                    let budget = rhs - (min_sum - term_min);
                    let ok = if a > 0 {
                        let new_ub = clamp_i64(Integer::div_floor(&budget, &a));
                        self.tighten(t.var, Bound::Ub(new_ub), &mut queue)
                    } else {
                        // x >= budget / a with a < 0, rounded up
                        let new_lb = clamp_i64(Integer::div_ceil(&budget, &a));
                        self.tighten(t.var, Bound::Lb(new_lb), &mut queue)
                    };
                    if !ok {
                        conflict = Some(c.tag.clone());
                        break 'outer;
                    }
                }
                if check_ge {
                    // a*x >= rhs - (rest of the maximum sum)
                    let need = rhs - (max_sum - term_max);
                    let ok = if a > 0 {
                        let new_lb = clamp_i64(Integer::div_ceil(&need, &a));
                        self.tighten(t.var, Bound::Lb(new_lb), &mut queue)
                    } else {
                        let new_ub = clamp_i64(Integer::div_floor(&need, &a));
                        self.tighten(t.var, Bound::Ub(new_ub), &mut queue)
                    };
                    if !ok {
                        conflict = Some(c.tag.clone());
                        break 'outer;
                    }
                }
            }
        }
        for ci in queue {
            self.in_queue[ci] = false;
        }
        match conflict {
            Some(tag) => Propagate::Conflict(tag),
            None => Propagate::Ok,
        }
    }

    fn tighten(&mut self, v: VarId, bound: Bound, queue: &mut Vec<usize>) -> bool {
        let changed = match bound {
            Bound::Lb(val) => {
                if val <= self.lb[v] {
                    return true;
                }
                self.trail.push((v, self.lb[v], self.ub[v]));
                self.lb[v] = val;
                true
            }
            Bound::Ub(val) => {
                if val >= self.ub[v] {
                    return true;
                }
                self.trail.push((v, self.lb[v], self.ub[v]));
                self.ub[v] = val;
                true
            }
        };
        debug_assert!(changed);
        if self.lb[v] > self.ub[v] {
            return false;
        }
        for &ci in &self.watchers[v] {
            if !self.in_queue[ci] {
                self.in_queue[ci] = true;
                queue.push(ci);
            }
        }
        true
    }

    // -- objective bound ------------------------------------------------------

    /// Optimistic (lowest possible) objective numerator for the current box,
    /// with one-hot groups contributing their cheapest selectable member.
    fn optimistic_objective(&self) -> i128 {
        let mut total = 0i128;
        let mut group_best: Vec<Option<i128>> = vec![None; self.groups.len()];
        for (v, &numer) in self.obj_numer.iter().enumerate() {
            match self.group_of[v] {
                Some(g) => {
                    // group member contributes only if selectable
                    let candidate = if self.ub[v] == 0 {
                        continue;
                    } else if self.lb[v] == 1 {
                        // forced: the group contributes exactly this
                        group_best[g] = Some(numer);
                        continue;
                    } else {
                        numer
                    };
                    let entry = &mut group_best[g];
                    *entry = Some(match *entry {
                        Some(best) if best <= candidate => best,
                        _ => candidate,
                    });
                }
                None => {
                    if numer == 0 {
                        continue;
                    }
                    let contrib = if numer > 0 {
                        numer * self.lb[v] as i128
                    } else {
                        numer * self.ub[v] as i128
                    };
                    total += contrib;
                }
            }
        }
        for g in group_best.into_iter() {
            total += g.unwrap_or(0);
        }
        for (members, rhs) in &self.covers {
            let mut need = *rhs;
            let mut unfixed: Vec<i128> = Vec::new();
            for &v in members {
                if self.lb[v] == 1 {
                    need -= 1;
                } else if self.ub[v] == 1 {
                    unfixed.push(self.obj_numer[v]);
                }
            }
            if need <= 0 {
                continue;
            }
            unfixed.sort_unstable();
            total += unfixed.iter().take(need as usize).sum::<i128>();
        }
        total
    }

    fn objective_of(&self, assignment: &[i64]) -> i128 {
        assignment
            .iter()
            .enumerate()
            .map(|(v, &val)| self.obj_numer[v] * val as i128)
            .sum()
    }

    // -- search ----------------------------------------------------------------

    fn out_of_budget(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if self.nodes >= self.limits.max_nodes {
            self.timed_out = true;
            return true;
        }
        if self.nodes % 1024 == 0 && self.start.elapsed() > self.limits.max_wall_time {
            self.timed_out = true;
            return true;
        }
        false
    }

    /// Depth-first search. Recursion advances to the next unfixed variable;
    /// the values of one variable are enumerated iteratively in place, so
    /// stack depth is bounded by the variable count rather than by domain
    /// sizes. Everything this call tightens sits above the caller's trail
    /// mark and is unwound by the caller.
    fn dfs(&mut self, scan_from: usize) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if let Some((best, _)) = &self.incumbent {
            if self.optimistic_objective() >= *best {
                return;
            }
        }

        let next = (scan_from..self.model.vars.len()).find(|&v| self.lb[v] < self.ub[v]);
        let Some(v) = next else {
            let assignment: Vec<i64> = self.lb.clone();
            let numer = self.objective_of(&assignment);
            let better = match &self.incumbent {
                Some((best, _)) => numer < *best,
                None => true,
            };
            if better {
                self.incumbent = Some((numer, assignment));
            }
            return;
        };

        loop {
            // try the smallest remaining value
            let val = self.lb[v];
            let mark = self.trail.len();
            let mut queue = Vec::new();
            let ok = self.tighten(v, Bound::Ub(val), &mut queue);
            debug_assert!(ok);
            match self.propagate(queue) {
                Propagate::Ok => self.dfs(v),
                Propagate::Conflict(tag) => self.note_wipeout(tag),
            }
            self.unwind(mark);
            if self.out_of_budget() {
                return;
            }

            // exclude it and keep going with the tightened box
            let mut queue = Vec::new();
            if !self.tighten(v, Bound::Lb(val + 1), &mut queue) {
                return;
            }
            match self.propagate(queue) {
                Propagate::Ok => {}
                Propagate::Conflict(tag) => {
                    self.note_wipeout(tag);
                    return;
                }
            }
            self.nodes += 1;
            if self.out_of_budget() {
                return;
            }
            if let Some((best, _)) = &self.incumbent {
                if self.optimistic_objective() >= *best {
                    return;
                }
            }
            if self.lb[v] == self.ub[v] {
                // the exclusion pinned this variable; descend past it
                self.dfs(v);
                return;
            }
        }
    }

    fn note_wipeout(&mut self, tag: String) {
        if self.wipeout_family.is_none() {
            self.wipeout_family = Some(tag);
        }
    }

    fn unwind(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, lb, ub) = self.trail.pop().unwrap();
            self.lb[v] = lb;
            self.ub[v] = ub;
        }
    }
}

fn clamp_i64(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}
