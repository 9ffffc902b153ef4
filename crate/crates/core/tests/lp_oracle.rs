//! Simplex cross-checks: vertex enumeration on small bounded LPs and the
//! strong-duality identity on random LPs.

mod common;

use common::random_lp;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trilayer::optimizer::{solve_lp, LpStatus, Model, Sense};

/// Best objective over all basic feasible points, or None if none exist.
fn vertex_oracle(model: &Model) -> Option<f64> {
    let n = model.num_vars();
    // half-spaces / hyperplanes as (coeff row, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &model.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] = v;
        }
        let (lo, hi) = r.range();
        if lo.is_finite() {
            planes.push((a.clone(), lo));
        }
        if hi.is_finite() && hi != lo {
            planes.push((a, hi));
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        planes.push((a.clone(), v.lower));
        if v.upper != v.lower {
            planes.push((a, v.upper));
        }
    }
    let k = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| planes[idx[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[idx[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().all(|v| v.is_finite()) && model.max_violation(&x) <= 1e-7 {
                let val = model.objective_value(&x);
                best = Some(match (best, model.sense) {
                    (None, _) => val,
                    (Some(b), Sense::Minimize) => b.min(val),
                    (Some(b), Sense::Maximize) => b.max(val),
                });
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn simplex_matches_vertex_enumeration_on_boxed_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut optimal = 0;
    for case in 0..400 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=5);
        let model = random_lp(&mut rng, true, n, m);
        let sol = solve_lp(&model).unwrap();
        let oracle = vertex_oracle(&model);
        match (sol.status, oracle) {
            (LpStatus::Optimal, Some(v)) => {
                optimal += 1;
                assert!(
                    (sol.objective - v).abs() <= 1e-7 * (1.0 + v.abs()),
                    "case {case}: simplex {} vs vertices {v}",
                    sol.objective
                );
            }
            (LpStatus::Infeasible, None) => {}
            (s, o) => panic!("case {case}: status {s:?} but oracle {o:?}\n{model:?}"),
        }
    }
    assert!(optimal > 200);
}

#[test]
fn strong_duality_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = [0usize; 3];
    for case in 0..500 {
        let n = rng.random_range(2..=12);
        let m = rng.random_range(1..=10);
        let model = random_lp(&mut rng, false, n, m);
        let sol = solve_lp(&model).unwrap();
        match sol.status {
            LpStatus::Optimal => {
                counts[0] += 1;
                assert!(model.max_violation(&sol.x) <= 1e-7, "case {case}");
                let gap = sol.relative_duality_gap(&model);
                assert!(gap <= 1e-7, "case {case}: gap {gap}");
            }
            LpStatus::Infeasible => counts[1] += 1,
            LpStatus::Unbounded => counts[2] += 1,
        }
    }
    assert!(counts[0] > 150, "{counts:?}");
}
