use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};

/// Thin wrapper over the simplex solver with index-addressed variables.
pub(crate) struct LinearProgram {
    problem: Problem,
    vars: Vec<Variable>,
}

pub(crate) enum Outcome {
    Optimal(Vec<f64>),
    Unbounded,
}

impl LinearProgram {
    pub fn maximize() -> Self {
        LinearProgram { problem: Problem::new(OptimizationDirection::Maximize), vars: Vec::new() }
    }

    pub fn minimize() -> Self {
        LinearProgram { problem: Problem::new(OptimizationDirection::Minimize), vars: Vec::new() }
    }

    pub fn var(&mut self, objective: f64, lo: f64, hi: f64) -> usize {
        self.vars.push(self.problem.add_var(objective, (lo, hi)));
        self.vars.len() - 1
    }

    fn expr(&self, terms: &[(usize, f64)]) -> Vec<(Variable, f64)> {
        terms.iter().map(|&(i, c)| (self.vars[i], c)).collect()
    }

    pub fn le(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let e = self.expr(terms);
        self.problem.add_constraint(&e, ComparisonOp::Le, rhs);
    }

    pub fn ge(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let e = self.expr(terms);
        self.problem.add_constraint(&e, ComparisonOp::Ge, rhs);
    }

    pub fn solve(&self) -> Result<Outcome> {
        match self.problem.solve() {
            Ok(out) => {
                let sol = out.into_solution().map_err(|_| Error::Lp("solve interrupted".into()))?;
                Ok(Outcome::Optimal(self.vars.iter().map(|&v| sol.var_value(v)).collect()))
            }
            Err(microlp::Error::Unbounded) => Ok(Outcome::Unbounded),
            Err(e) => Err(Error::Lp(e.to_string())),
        }
    }
}
