//! Activity-based bound tightening over the rows of a model.

use super::model::{Model, VarKind};

const INF: f64 = 1e20;

#[derive(Debug, Clone)]
pub struct Propagator {
    rows: Vec<PRow>,
    col_rows: Vec<Vec<usize>>,
    binary: Vec<bool>,
    pub max_rounds: usize,
}

#[derive(Debug, Clone)]
struct PRow {
    lo: f64,
    hi: f64,
    coeffs: Vec<(usize, f64)>,
}

impl Propagator {
    pub fn new(model: &Model) -> Self {
        let mut col_rows = vec![Vec::new(); model.num_vars()];
        let rows = model
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (lo, hi) = r.range();
                for &(j, _) in &r.coeffs {
                    col_rows[j].push(i);
                }
                PRow { lo, hi, coeffs: r.coeffs.iter().copied().filter(|(_, a)| a.abs() > 1e-12).collect() }
            })
            .collect();
        let binary = model.vars.iter().map(|v| v.kind == VarKind::Binary).collect();
        Self { rows, col_rows, binary, max_rounds: 8 }
    }

    /// Tightens `lo`/`hi` in place. Returns false when some row cannot be
    /// satisfied within the bounds.
    pub fn propagate(&self, lo: &mut [f64], hi: &mut [f64]) -> bool {
        let nrows = self.rows.len();
        let mut queued = vec![true; nrows];
        let mut queue: Vec<usize> = (0..nrows).collect();
        for _ in 0..self.max_rounds {
            if queue.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for &i in &queue {
                queued[i] = false;
            }
            for i in queue {
                match self.tighten_row(i, lo, hi) {
                    None => return false,
                    Some(changed) => {
                        for j in changed {
                            for &r in &self.col_rows[j] {
                                if !queued[r] {
                                    queued[r] = true;
                                    next.push(r);
                                }
                            }
                        }
                    }
                }
            }
            queue = next;
        }
        true
    }

    /// Returns the columns whose bounds moved, or None if infeasible.
    fn tighten_row(&self, i: usize, lo: &mut [f64], hi: &mut [f64]) -> Option<Vec<usize>> {
        let row = &self.rows[i];
        let (mut min_fin, mut min_inf, mut max_fin, mut max_inf) = (0.0, 0usize, 0.0, 0usize);
        for &(j, a) in &row.coeffs {
            let (l, u) = (lo[j], hi[j]);
            let (cmin, cmax) = if a > 0.0 { (a * l, a * u) } else { (a * u, a * l) };
            if cmin <= -INF || cmin.is_nan() {
                min_inf += 1;
            } else {
                min_fin += cmin;
            }
            if cmax >= INF || cmax.is_nan() {
                max_inf += 1;
            } else {
                max_fin += cmax;
            }
        }
        let scale = 1.0 + row.hi.abs().min(row.lo.abs()).min(1e6);
        if min_inf == 0 && row.hi < INF && min_fin > row.hi + 1e-6 * scale {
            return None;
        }
        if max_inf == 0 && row.lo > -INF && max_fin < row.lo - 1e-6 * scale {
            return None;
        }
        let mut changed = Vec::new();
        for &(j, a) in &row.coeffs {
            let (l, u) = (lo[j], hi[j]);
            let (cmin, cmax) = if a > 0.0 { (a * l, a * u) } else { (a * u, a * l) };
            let cmin_inf = cmin <= -INF;
            let cmax_inf = cmax >= INF;
            let mut new_lo = l;
            let mut new_hi = u;
            // a x_j <= row.hi - (min activity of the others)
            if row.hi < INF {
                let rest = match (min_inf, cmin_inf) {
                    (0, _) => Some(min_fin - cmin),
                    (1, true) => Some(min_fin),
                    _ => None,
                };
                if let Some(rest) = rest {
                    let lim = (row.hi - rest) / a;
                    if a > 0.0 {
                        new_hi = new_hi.min(lim);
                    } else {
                        new_lo = new_lo.max(lim);
                    }
                }
            }
            if row.lo > -INF {
                let rest = match (max_inf, cmax_inf) {
                    (0, _) => Some(max_fin - cmax),
                    (1, true) => Some(max_fin),
                    _ => None,
                };
                if let Some(rest) = rest {
                    let lim = (row.lo - rest) / a;
                    if a > 0.0 {
                        new_lo = new_lo.max(lim);
                    } else {
                        new_hi = new_hi.min(lim);
                    }
                }
            }
            if self.binary[j] {
                new_lo = if new_lo > 1e-6 { 1.0 } else { l };
                new_hi = if new_hi < 1.0 - 1e-6 { 0.0 } else { u };
            } else {
                // keep a little slack so rounding never cuts off feasible points
                if new_lo > l {
                    new_lo -= 1e-9 * (1.0 + new_lo.abs());
                }
                if new_hi < u {
                    new_hi += 1e-9 * (1.0 + new_hi.abs());
                }
            }
            let tol_l = 1e-6 * (1.0 + l.abs().min(1e9));
            let tol_u = 1e-6 * (1.0 + u.abs().min(1e9));
            let mut moved = false;
            if new_lo > l + tol_l || (l <= -INF && new_lo > -INF) {
                lo[j] = new_lo;
                moved = true;
            }
            if new_hi < u - tol_u || (u >= INF && new_hi < INF) {
                hi[j] = new_hi;
                moved = true;
            }
            if lo[j] > hi[j] {
                if lo[j] > hi[j] + 1e-6 * (1.0 + hi[j].abs()) {
                    return None;
                }
                let mid = 0.5 * (lo[j] + hi[j]);
                lo[j] = mid;
                hi[j] = mid;
            }
            if moved {
                changed.push(j);
            }
        }
        Some(changed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::{RowSense, Sense};

    #[test]
    fn big_m_row_fixes_dual_when_binary_is_zero() {
        let mut m = Model::new("t", Sense::Minimize);
        let u = m.add_var("u", 0.0, 100.0);
        let z = m.add_binary("z");
        let s = m.add_var("s", 0.0, 5.0);
        m.add_row("cd", [(u, 1.0), (z, -100.0)], RowSense::Le, 0.0);
        m.add_row("cs", [(s, 1.0), (z, 5.0)], RowSense::Le, 5.0);
        m.add_row("need", [(s, 1.0)], RowSense::Ge, 1.0);
        let p = Propagator::new(&m);
        let mut lo: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
        let mut hi: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();
        assert!(p.propagate(&mut lo, &mut hi));
        // s >= 1 forces z = 0, which forces u = 0
        assert_eq!(hi[z], 0.0);
        assert!(hi[u] < 1e-6);
    }

    #[test]
    fn detects_infeasibility() {
        let mut m = Model::new("t", Sense::Minimize);
        let x = m.add_var("x", 0.0, 1.0);
        let y = m.add_var("y", 0.0, 1.0);
        m.add_row("r", [(x, 1.0), (y, 1.0)], RowSense::Ge, 3.0);
        let p = Propagator::new(&m);
        let mut lo = vec![0.0, 0.0];
        let mut hi = vec![1.0, 1.0];
        assert!(!p.propagate(&mut lo, &mut hi));
    }
}
