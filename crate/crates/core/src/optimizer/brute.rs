//! Exhaustive enumeration of binary assignments, one LP per assignment.
//! Only meant as a test oracle for small models.

use super::milp::{MilpSolution, MilpStatus};
use super::model::{Model, Sense};
use super::simplex::{Simplex, SimplexStatus};
use super::SolverError;

pub const BRUTE_FORCE_LIMIT: usize = 20;

pub fn solve_brute_force(model: &Model) -> Result<MilpSolution, SolverError> {
    let start = web_time::Instant::now();
    let bins = model.binaries();
    if bins.len() > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooManyBinaries { count: bins.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let sign = if model.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut spx = Simplex::new(model);
    for &j in &bins {
        spx.set_bounds(j, 0.0, 0.0);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut unbounded = false;
    let mut code: u64 = 0;
    let total: u64 = 1 << bins.len();
    for step in 0..total {
        // Gray code: flip exactly one binary per step
        if step > 0 {
            let flip = step.trailing_zeros() as usize;
            code ^= 1 << flip;
            let v = ((code >> flip) & 1) as f64;
            spx.set_bounds(bins[flip], v, v);
        }
        let status = match spx.solve() {
            Ok(s) => s,
            Err(_) => {
                let mut fresh = Simplex::new(model);
                for (k, &j) in bins.iter().enumerate() {
                    let v = ((code >> k) & 1) as f64;
                    fresh.set_bounds(j, v, v);
                }
                let s = fresh.solve()?;
                spx = fresh;
                s
            }
        };
        match status {
            SimplexStatus::Optimal => {
                let v = sign * spx.objective();
                if best.as_ref().is_none_or(|(b, _)| v < *b - 1e-12 * (1.0 + b.abs())) {
                    best = Some((v, spx.primal()));
                }
            }
            SimplexStatus::Unbounded => unbounded = true,
            SimplexStatus::Infeasible => {}
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let (status, x, objective) = match (unbounded, best) {
        (true, _) => (MilpStatus::Unbounded, None, f64::NAN),
        (false, None) => (MilpStatus::Infeasible, None, f64::NAN),
        (false, Some((v, x))) => (MilpStatus::Optimal, Some(x), sign * v),
    };
    Ok(MilpSolution {
        status,
        x,
        objective,
        bound: objective,
        gap: if objective.is_nan() { f64::INFINITY } else { 0.0 },
        nodes: total as usize,
        lp_iterations: spx.iterations,
        seconds,
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::RowSense;

    #[test]
    fn refuses_large_models() {
        let mut m = Model::new("big", Sense::Minimize);
        for i in 0..21 {
            m.add_binary(format!("b{i}"));
        }
        assert!(matches!(solve_brute_force(&m), Err(SolverError::TooManyBinaries { count: 21, limit: 20 })));
    }

    #[test]
    fn picks_best_assignment() {
        let mut m = Model::new("t", Sense::Maximize);
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        let x = m.add_var("x", 0.0, 10.0);
        m.add_objective_term(a, 3.0);
        m.add_objective_term(b, 2.0);
        m.add_objective_term(x, 1.0);
        m.add_row("r", [(a, 4.0), (b, 4.0), (x, 1.0)], RowSense::Le, 6.0);
        let s = solve_brute_force(&m).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        // a = 1 leaves x = 2 for 5; a = b = 1 is infeasible; x = 6 alone gives 6
        assert!((s.objective - 6.0).abs() < 1e-9, "{}", s.objective);
    }
}
