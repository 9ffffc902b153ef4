//! One-shot LP solves over a [`Model`], ignoring integrality.

use serde::{Deserialize, Serialize};

use super::model::{Model, Sense};
use super::simplex::{Simplex, SimplexOptions, SimplexStatus};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl From<SimplexStatus> for LpStatus {
    fn from(s: SimplexStatus) -> Self {
        match s {
            SimplexStatus::Optimal => LpStatus::Optimal,
            SimplexStatus::Infeasible => LpStatus::Infeasible,
            SimplexStatus::Unbounded => LpStatus::Unbounded,
        }
    }
}

/// Result of [`solve_lp`].
///
/// Duals follow the model's own objective sense: `row_duals[i]` is the rate
/// of change of the optimal objective when the right-hand side of row `i`
/// increases, and `reduced_costs[j]` the rate for the active bound of
/// column `j`. Primal and dual vectors are only meaningful when optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// Dual objective assembled from the row duals and reduced costs.
    pub fn dual_objective(&self, model: &Model) -> f64 {
        let internal_sign = match model.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let pick = |dual: f64, lo: f64, hi: f64| -> f64 {
            if dual.abs() <= 1e-12 {
                return 0.0;
            }
            let bound = if internal_sign * dual > 0.0 { lo } else { hi };
            if bound.is_finite() {
                dual * bound
            } else {
                -internal_sign * f64::INFINITY
            }
        };
        let rows: f64 = model
            .rows
            .iter()
            .zip(&self.row_duals)
            .map(|(r, &y)| {
                let (lo, hi) = r.range();
                pick(y, lo, hi)
            })
            .sum();
        let cols: f64 = model.vars.iter().zip(&self.reduced_costs).map(|(v, &d)| pick(d, v.lower, v.upper)).sum();
        model.obj_constant + rows + cols
    }

    /// |primal - dual| / (1 + |primal|).
    pub fn relative_duality_gap(&self, model: &Model) -> f64 {
        (self.objective - self.dual_objective(model)).abs() / (1.0 + self.objective.abs())
    }
}

pub fn solve_lp(model: &Model) -> Result<LpSolution, SolverError> {
    solve_lp_with(model, SimplexOptions::default())
}

pub fn solve_lp_with(model: &Model, opts: SimplexOptions) -> Result<LpSolution, SolverError> {
    let mut spx = Simplex::with_options(model, opts);
    let status = spx.solve()?;
    Ok(snapshot(&spx, status.into()))
}

pub(crate) fn snapshot(spx: &Simplex, status: LpStatus) -> LpSolution {
    LpSolution {
        status,
        x: spx.primal(),
        row_duals: spx.row_duals(),
        reduced_costs: spx.reduced_costs(),
        objective: spx.objective(),
        iterations: spx.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::RowSense;

    #[test]
    fn maximize_single_bound_row() {
        let mut m = Model::new("t", Sense::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY);
        m.add_objective_term(x, 1.0);
        m.add_row("cap", [(x, 1.0)], RowSense::Le, 3.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.row_duals[0] - 1.0).abs() < 1e-12);
        assert!(s.relative_duality_gap(&m) < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = Model::new("t", Sense::Minimize);
        let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        m.add_row("a", [(x, 1.0)], RowSense::Le, 0.0);
        m.add_row("b", [(x, 1.0)], RowSense::Ge, 1.0);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_detected() {
        let mut m = Model::new("t", Sense::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY);
        let y = m.add_var("y", 0.0, f64::INFINITY);
        m.add_objective_term(x, 1.0);
        m.add_row("r", [(x, 1.0), (y, -1.0)], RowSense::Le, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_and_equality() {
        // min x + 2y  s.t. x + y = 4, x - y >= -2, y free, x in [0, 10]
        let mut m = Model::new("t", Sense::Minimize);
        let x = m.add_var("x", 0.0, 10.0);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY);
        m.add_objective_term(x, 1.0);
        m.add_objective_term(y, 2.0);
        m.add_row("sum", [(x, 1.0), (y, 1.0)], RowSense::Eq, 4.0);
        m.add_row("diff", [(x, 1.0), (y, -1.0)], RowSense::Ge, -2.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        // y as small as possible: x = 10, y = -6
        assert!((s.x[0] - 10.0).abs() < 1e-9 && (s.x[1] + 6.0).abs() < 1e-9);
        assert!((s.objective + 2.0).abs() < 1e-9);
        assert!(s.relative_duality_gap(&m) < 1e-9);
    }
}
