//! Bounded-variable revised simplex.
//!
//! Every row `lo <= a.x <= hi` gets a logical column `s = a.x`, so the
//! working system is `[A | -I] (x, s) = 0` with all bounds carried on the
//! columns. The basis inverse is held explicitly as a dense matrix, updated
//! by rank-one pivots and rebuilt from scratch every `refactor_every` pivots.
//!
//! Cold starts run the composite primal simplex (phase 1 minimises the sum of
//! infeasibilities). Warm starts after bound changes run the dual simplex from
//! the previous basis, which stays dual feasible because only bounds moved.

use super::model::Model;
use super::SolverError;

const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub primal_tol: f64,
    /// Tolerance for basic columns whose bounds coincide.
    pub fixed_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-7,
            fixed_tol: 1e-7,
            dual_tol: 1e-7,
            pivot_tol: 1e-9,
            refactor_every: 50,
            degenerate_limit: 60,
            max_iterations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// Saved basis: basic variable per row position plus nonbasic values.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    head: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    /// Internal minimisation costs for structural columns.
    cost: Vec<f64>,
    sign: f64,
    obj_constant: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<f64>,
    d: Vec<f64>,
    factor_valid: bool,
    pivots_since_refactor: usize,
    pub opts: SimplexOptions,
    pub iterations: usize,
    solve_start: usize,
    scratch_b: Vec<f64>,
    scratch_i: Vec<f64>,
}

impl Simplex {
    pub fn new(model: &Model) -> Self {
        Self::with_options(model, SimplexOptions::default())
    }

    pub fn with_options(model: &Model, opts: SimplexOptions) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        let mut col_start = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_start.push(0);
        for col in &cols {
            for &(i, a) in col {
                row_idx.push(i);
                vals.push(a);
            }
            col_start.push(row_idx.len());
        }
        let sign = match model.sense {
            super::model::Sense::Minimize => 1.0,
            super::model::Sense::Maximize => -1.0,
        };
        let cost = model.objective.iter().map(|c| sign * c).collect();
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for v in &model.vars {
            lo.push(v.lower);
            hi.push(v.upper);
        }
        for row in &model.rows {
            let (l, h) = row.range();
            lo.push(l);
            hi.push(h);
        }
        let mut s = Self {
            n,
            m,
            col_start,
            row_idx,
            vals,
            cost,
            sign,
            obj_constant: model.obj_constant,
            lo,
            hi,
            x: vec![0.0; n + m],
            head: (n..n + m).collect(),
            pos: vec![NONBASIC; n + m],
            binv: Vec::new(),
            d: vec![0.0; n + m],
            factor_valid: false,
            pivots_since_refactor: 0,
            opts,
            iterations: 0,
            solve_start: 0,
            scratch_b: Vec::new(),
            scratch_i: Vec::new(),
        };
        for r in 0..m {
            s.pos[n + r] = r;
        }
        for j in 0..n {
            s.x[j] = s.default_nonbasic_value(j);
        }
        s
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Changes the bounds of column `j`; a nonbasic column is moved onto the
    /// matching new bound and re-priced on the next solve.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        let (old_lo, old_hi) = (self.lo[j], self.hi[j]);
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.pos[j] == NONBASIC {
            let was_upper = old_lo != old_hi && old_hi.is_finite() && self.x[j] == old_hi;
            self.x[j] = if was_upper && hi.is_finite() {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
        }
    }

    /// Replaces the (model-sense) objective coefficients.
    pub fn set_objective(&mut self, objective: &[f64]) {
        for (c, &v) in self.cost.iter_mut().zip(objective) {
            *c = self.sign * v;
        }
    }

    pub fn basis(&self) -> Basis {
        Basis { head: self.head.clone(), values: self.x.clone() }
    }

    pub fn set_basis(&mut self, basis: &Basis) {
        self.head.clone_from(&basis.head);
        self.pos.iter_mut().for_each(|p| *p = NONBASIC);
        for (r, &j) in self.head.iter().enumerate() {
            self.pos[j] = r;
        }
        for j in 0..self.n + self.m {
            if self.pos[j] == NONBASIC {
                let v = basis.values[j];
                self.x[j] = if v <= self.lo[j] || v >= self.hi[j] {
                    v.clamp(self.lo[j], self.hi[j])
                } else {
                    self.default_nonbasic_value(j)
                };
                if !self.x[j].is_finite() {
                    self.x[j] = self.default_nonbasic_value(j);
                }
            }
        }
        self.factor_valid = false;
    }

    /// Structural column values.
    pub fn primal(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    /// Objective in the model's own sense.
    pub fn objective(&self) -> f64 {
        let v: f64 = self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum();
        self.obj_constant + self.sign * v
    }

    /// Sensitivity of the model-sense objective to each row's active bound.
    pub fn row_duals(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.sign * self.d[self.n + i]).collect()
    }

    /// Model-sense reduced costs of the structural columns.
    pub fn reduced_costs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.sign * self.d[j]).collect()
    }

    fn default_nonbasic_value(&self, j: usize) -> f64 {
        if self.lo[j].is_finite() {
            self.lo[j]
        } else if self.hi[j].is_finite() {
            self.hi[j]
        } else {
            0.0
        }
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.n {
            let (a, b) = (self.col_start[j], self.col_start[j + 1]);
            ColumnIter::Structural(self.row_idx[a..b].iter().zip(&self.vals[a..b]))
        } else {
            ColumnIter::Logical(Some(j - self.n))
        }
    }

    fn cost_of(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    // ---------------------------------------------------------------- linear algebra

    /// Rebuilds the dense inverse of the current basis by Gauss-Jordan
    /// elimination; singular columns are swapped for logicals.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        for _attempt in 0..3 {
            let mut a = std::mem::take(&mut self.scratch_b);
            let mut inv = std::mem::take(&mut self.scratch_i);
            a.clear();
            a.resize(m * m, 0.0);
            inv.clear();
            inv.resize(m * m, 0.0);
            // row-major a[i*m + k] = B[i][k]
            for (k, &j) in self.head.iter().enumerate() {
                for (i, v) in self.column(j) {
                    a[i * m + k] = v;
                }
            }
            for i in 0..m {
                inv[i * m + i] = 1.0;
            }
            let mut row_used = vec![false; m];
            let mut pivot_row = vec![usize::MAX; m];
            let mut deficient = Vec::new();
            let mut rowbuf_a = vec![0.0; m];
            let mut rowbuf_i = vec![0.0; m];
            // Logical columns first: they pivot on their own row without fill.
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by_key(|&k| (self.head[k] < self.n, k));
            for &k in &order {
                let mut best = 0.0;
                let mut p = usize::MAX;
                for i in 0..m {
                    if !row_used[i] {
                        let v = a[i * m + k].abs();
                        if v > best {
                            best = v;
                            p = i;
                        }
                    }
                }
                if p == usize::MAX || best < 1e-11 {
                    deficient.push(k);
                    continue;
                }
                row_used[p] = true;
                pivot_row[k] = p;
                let piv = a[p * m + k];
                for c in 0..m {
                    a[p * m + c] /= piv;
                    inv[p * m + c] /= piv;
                }
                rowbuf_a.copy_from_slice(&a[p * m..p * m + m]);
                rowbuf_i.copy_from_slice(&inv[p * m..p * m + m]);
                let nz_a: Vec<usize> = (0..m).filter(|&c| rowbuf_a[c] != 0.0).collect();
                let nz_i: Vec<usize> = (0..m).filter(|&c| rowbuf_i[c] != 0.0).collect();
                for i in 0..m {
                    if i == p {
                        continue;
                    }
                    let f = a[i * m + k];
                    if f == 0.0 {
                        continue;
                    }
                    for &c in &nz_a {
                        a[i * m + c] -= f * rowbuf_a[c];
                    }
                    a[i * m + k] = 0.0;
                    for &c in &nz_i {
                        inv[i * m + c] -= f * rowbuf_i[c];
                    }
                }
            }
            if !deficient.is_empty() {
                let free_rows: Vec<usize> = (0..m).filter(|&i| !row_used[i]).collect();
                for (&k, &i) in deficient.iter().zip(&free_rows) {
                    let old = self.head[k];
                    self.pos[old] = NONBASIC;
                    self.x[old] = self.clamp_nonbasic(old);
                    let logical = self.n + i;
                    if self.pos[logical] != NONBASIC {
                        // logical of an unused row cannot already be basic
                        return Err(SolverError::Numerical("basis repair conflict".into()));
                    }
                    self.head[k] = logical;
                    self.pos[logical] = k;
                }
                self.scratch_b = a;
                self.scratch_i = inv;
                continue;
            }
            // B^-1 row k = inv row pivot_row[k]; store column-major binv[c*m + k].
            self.binv.clear();
            self.binv.resize(m * m, 0.0);
            for k in 0..m {
                let p = pivot_row[k];
                for c in 0..m {
                    self.binv[c * m + k] = inv[p * m + c];
                }
            }
            self.scratch_b = a;
            self.scratch_i = inv;
            self.factor_valid = true;
            self.pivots_since_refactor = 0;
            return Ok(());
        }
        Err(SolverError::Numerical("basis could not be repaired".into()))
    }

    fn clamp_nonbasic(&self, j: usize) -> f64 {
        let v = self.x[j];
        if self.lo[j].is_finite() && (v <= self.lo[j] || !self.hi[j].is_finite()) {
            self.lo[j]
        } else if self.hi[j].is_finite() && (v >= self.hi[j] || !self.lo[j].is_finite()) {
            self.hi[j]
        } else if self.lo[j].is_finite() {
            if (v - self.lo[j]).abs() <= (self.hi[j] - v).abs() {
                self.lo[j]
            } else {
                self.hi[j]
            }
        } else {
            0.0
        }
    }

    fn ftran(&self, j: usize, w: &mut [f64]) {
        w.iter_mut().for_each(|v| *v = 0.0);
        let m = self.m;
        for (i, a) in self.column(j) {
            let col = &self.binv[i * m..i * m + m];
            for (wv, b) in w.iter_mut().zip(col) {
                *wv += a * b;
            }
        }
    }

    fn binv_row(&self, r: usize, rho: &mut [f64]) {
        let m = self.m;
        for (k, v) in rho.iter_mut().enumerate() {
            *v = self.binv[k * m + r];
        }
    }

    fn pivot_update(&mut self, r: usize, w: &[f64]) {
        let m = self.m;
        let wr = w[r];
        let nz: Vec<usize> = (0..m).filter(|&i| i != r && w[i] != 0.0).collect();
        for k in 0..m {
            let col = &mut self.binv[k * m..k * m + m];
            let t = col[r];
            if t == 0.0 {
                continue;
            }
            let f = t / wr;
            for &i in &nz {
                col[i] -= w[i] * f;
            }
            col[r] = f;
        }
        self.pivots_since_refactor += 1;
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut v = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, a) in self.column(j) {
                    v[i] += a * xj;
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                let col = &self.binv[i * m..i * m + m];
                for (x, b) in xb.iter_mut().zip(col) {
                    *x -= b * vi;
                }
            }
        }
        for (r, &j) in self.head.iter().enumerate() {
            self.x[j] = xb[r];
        }
    }

    /// y = B^-T c_B for the given basic costs.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let nz: Vec<usize> = (0..m).filter(|&r| cb[r] != 0.0).collect();
        let mut y = vec![0.0; m];
        for (i, yi) in y.iter_mut().enumerate() {
            let col = &self.binv[i * m..i * m + m];
            *yi = nz.iter().map(|&r| cb[r] * col[r]).sum();
        }
        y
    }

    /// Reduced costs for all columns under cost function `cost(j)`.
    fn compute_reduced_costs(&mut self, phase: Phase) {
        let cb: Vec<f64> = match phase {
            Phase::Two => self.head.iter().map(|&j| self.cost_of(j)).collect(),
            Phase::One => self.head.iter().map(|&j| self.infeasibility_cost(j)).collect(),
        };
        let y = self.btran(&cb);
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC {
                self.d[j] = 0.0;
                continue;
            }
            let c = match phase {
                Phase::Two => self.cost_of(j),
                Phase::One => 0.0,
            };
            let ya: f64 = self.column(j).map(|(i, a)| a * y[i]).sum();
            self.d[j] = c - ya;
        }
    }

    fn infeasibility_cost(&self, j: usize) -> f64 {
        let tol = self.opts.primal_tol;
        if self.x[j] < self.lo[j] - tol {
            -1.0
        } else if self.x[j] > self.hi[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.head.iter().map(|&j| (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0)).fold(0.0, f64::max)
    }

    fn fixed_drift(&self) -> bool {
        let tol = self.opts.fixed_tol;
        self.head.iter().any(|&j| self.lo[j] == self.hi[j] && (self.x[j] - self.lo[j]).abs() > tol)
    }

    fn iteration_cap(&self) -> usize {
        if self.opts.max_iterations > 0 {
            self.opts.max_iterations
        } else {
            50_000 + 30 * (self.n + self.m)
        }
    }

    // ---------------------------------------------------------------- drivers

    /// Solves from the current basis.
    pub fn solve(&mut self) -> Result<SimplexStatus, SolverError> {
        self.solve_start = self.iterations;
        if !self.factor_valid || self.pivots_since_refactor >= self.opts.refactor_every {
            self.refactor()?;
        }
        // nonbasic columns must sit on a bound (or zero when free)
        for j in 0..self.n + self.m {
            if self.pos[j] == NONBASIC {
                let v = self.x[j];
                let on_bound = v == self.lo[j] || v == self.hi[j];
                if !on_bound && !(v == 0.0 && !self.lo[j].is_finite() && !self.hi[j].is_finite()) {
                    self.x[j] = self.clamp_nonbasic(j);
                }
            }
        }
        self.recompute_basics();
        for round in 0..4 {
            self.compute_reduced_costs(Phase::Two);
            let status = if self.make_dual_feasible() {
                self.recompute_basics();
                if self.max_primal_infeasibility() > self.opts.primal_tol || self.fixed_drift() {
                    self.dual_loop()?
                } else {
                    SimplexStatus::Optimal
                }
            } else {
                self.primal_loop()?
            };
            if status != SimplexStatus::Optimal {
                return Ok(status);
            }
            self.recompute_basics();
            self.compute_reduced_costs(Phase::Two);
            if self.max_primal_infeasibility() <= self.opts.primal_tol * 10.0
                && self.max_dual_infeasibility() <= self.opts.dual_tol * 10.0
            {
                return Ok(SimplexStatus::Optimal);
            }
            if round > 0 || self.pivots_since_refactor > 0 {
                self.refactor()?;
                self.recompute_basics();
            }
        }
        Err(SolverError::Numerical("simplex failed to settle after refactorisation".into()))
    }

    fn max_dual_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.d[j];
            let v = self.x[j];
            let viol = if v == self.lo[j] {
                (-d).max(0.0)
            } else if v == self.hi[j] {
                d.max(0.0)
            } else {
                d.abs()
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Moves boxed nonbasic columns to the bound their reduced cost prefers.
    /// Returns false when some column with an infinite bound is dual infeasible.
    fn make_dual_feasible(&mut self) -> bool {
        let tol = self.opts.dual_tol;
        let mut ok = true;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.d[j];
            let (lo, hi) = (self.lo[j], self.hi[j]);
            if d < -tol {
                if hi.is_finite() {
                    self.x[j] = hi;
                } else {
                    ok = false;
                }
            } else if d > tol {
                if lo.is_finite() {
                    self.x[j] = lo;
                } else {
                    ok = false;
                }
            }
        }
        ok
    }

    fn primal_loop(&mut self) -> Result<SimplexStatus, SolverError> {
        let m = self.m;
        let mut w = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let ptol = self.opts.primal_tol;
        let dtol = self.opts.dual_tol;
        loop {
            if self.iterations - self.solve_start > self.iteration_cap() {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if self.pivots_since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                self.recompute_basics();
            }
            let phase = if self.max_primal_infeasibility() > ptol { Phase::One } else { Phase::Two };
            self.compute_reduced_costs(phase);
            let bland = degenerate_run > self.opts.degenerate_limit;

            // pricing
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.n + self.m {
                if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let d = self.d[j];
                let v = self.x[j];
                let dir = if d < -dtol && v < self.hi[j] {
                    1.0
                } else if d > dtol && v > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                if phase == Phase::One && self.pivots_since_refactor > 0 {
                    // stale inverse can hide an improving column
                    self.refactor()?;
                    self.recompute_basics();
                    continue;
                }
                return Ok(match phase {
                    Phase::One => SimplexStatus::Infeasible,
                    Phase::Two => SimplexStatus::Optimal,
                });
            };
            self.ftran(q, &mut w);

            // Harris two-pass ratio test
            let ptol_piv = self.opts.pivot_tol;
            let mut tmax = f64::INFINITY;
            for r in 0..m {
                let wr = w[r];
                if wr.abs() <= ptol_piv {
                    continue;
                }
                let j = self.head[r];
                let delta = -wr * dir;
                if let Some(lim) = self.ratio_limit(j, delta, phase, ptol) {
                    tmax = tmax.min(lim);
                }
            }
            let flip = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64, f64)> = None; // (row, t, target)
            let mut best_piv = 0.0;
            if tmax.is_finite() {
                for r in 0..m {
                    let wr = w[r];
                    if wr.abs() <= ptol_piv {
                        continue;
                    }
                    let j = self.head[r];
                    let delta = -wr * dir;
                    if let Some((t, target)) = self.ratio_exact(j, delta, phase, ptol) {
                        if t <= tmax {
                            let better = if bland {
                                leave.is_none_or(|(rr, _, _)| self.head[rr] > j)
                            } else {
                                wr.abs() > best_piv
                            };
                            if better {
                                best_piv = wr.abs();
                                leave = Some((r, t, target));
                            }
                        }
                    }
                }
            }
            self.iterations += 1;
            if flip.is_finite() && leave.is_none_or(|(_, t, _)| flip <= t) {
                // bound flip of the entering column
                for r in 0..m {
                    if w[r] != 0.0 {
                        let j = self.head[r];
                        self.x[j] -= w[r] * dir * flip;
                    }
                }
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                degenerate_run = 0;
                continue;
            }
            let Some((r, t, target)) = leave else {
                return match phase {
                    Phase::Two => Ok(SimplexStatus::Unbounded),
                    Phase::One => Err(SolverError::Numerical("unbounded direction in phase one".into())),
                };
            };
            let t = t.max(0.0);
            if t <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for i in 0..m {
                if w[i] != 0.0 {
                    let j = self.head[i];
                    self.x[j] -= w[i] * dir * t;
                }
            }
            let l = self.head[r];
            self.x[q] += dir * t;
            self.x[l] = target;
            self.pos[l] = NONBASIC;
            self.head[r] = q;
            self.pos[q] = r;
            self.pivot_update(r, &w);
        }
    }

    /// Harris pass-one limit for basic column `j` changing at rate `delta`.
    fn ratio_limit(&self, j: usize, delta: f64, phase: Phase, tol: f64) -> Option<f64> {
        let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
        if phase == Phase::One && x < lo - tol {
            return (delta > 0.0).then(|| (lo - x + tol) / delta);
        }
        if phase == Phase::One && x > hi + tol {
            return (delta < 0.0).then(|| (x - hi + tol) / -delta);
        }
        if delta < 0.0 && lo.is_finite() {
            Some((x - lo + tol) / -delta)
        } else if delta > 0.0 && hi.is_finite() {
            Some((hi - x + tol) / delta)
        } else {
            None
        }
    }

    fn ratio_exact(&self, j: usize, delta: f64, phase: Phase, tol: f64) -> Option<(f64, f64)> {
        let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
        if phase == Phase::One && x < lo - tol {
            return (delta > 0.0).then(|| (((lo - x) / delta).max(0.0), lo));
        }
        if phase == Phase::One && x > hi + tol {
            return (delta < 0.0).then(|| (((x - hi) / -delta).max(0.0), hi));
        }
        if delta < 0.0 && lo.is_finite() {
            Some((((x - lo) / -delta).max(0.0), lo))
        } else if delta > 0.0 && hi.is_finite() {
            Some((((hi - x) / delta).max(0.0), hi))
        } else {
            None
        }
    }

    fn dual_loop(&mut self) -> Result<SimplexStatus, SolverError> {
        let m = self.m;
        let nt = self.n + self.m;
        let mut w = vec![0.0; m];
        let mut rho = vec![0.0; m];
        let mut alpha = vec![0.0; nt];
        let ptol = self.opts.primal_tol;
        let ftol = self.opts.fixed_tol.min(ptol);
        let dtol = self.opts.dual_tol;
        let mut degenerate_run = 0usize;
        let mut skip: Vec<usize> = Vec::new();
        loop {
            if self.iterations - self.solve_start > self.iteration_cap() {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if self.pivots_since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                self.recompute_basics();
                self.compute_reduced_costs(Phase::Two);
                if !self.make_dual_feasible() {
                    return self.primal_loop();
                }
                self.recompute_basics();
            }
            let bland = degenerate_run > self.opts.degenerate_limit;
            // leaving row: largest infeasibility (smallest index under Bland)
            let mut leave = None;
            let mut worst = 0.0;
            for r in 0..m {
                let j = self.head[r];
                let viol = (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]);
                let tol = if self.lo[j] == self.hi[j] { ftol } else { ptol };
                if viol > tol && !(viol <= ptol && skip.contains(&r)) {
                    if bland {
                        if leave.is_none_or(|(rr, _): (usize, f64)| self.head[rr] > j) {
                            leave = Some((r, viol));
                        }
                    } else if viol > worst {
                        worst = viol;
                        leave = Some((r, viol));
                    }
                }
            }
            let Some((r, viol)) = leave else {
                return Ok(SimplexStatus::Optimal);
            };
            let l = self.head[r];
            let below = self.x[l] < self.lo[l];
            let s = if below { 1.0 } else { -1.0 };
            let target = if below { self.lo[l] } else { self.hi[l] };

            self.binv_row(r, &mut rho);
            for j in 0..nt {
                alpha[j] = if self.pos[j] != NONBASIC { 0.0 } else { self.column(j).map(|(i, a)| a * rho[i]).sum() };
            }
            // Harris ratio test on the dual step
            let piv_tol = self.opts.pivot_tol;
            let eligible = |this: &Self, j: usize| -> bool {
                if this.pos[j] != NONBASIC || this.lo[j] == this.hi[j] {
                    return false;
                }
                let a = alpha[j];
                if a.abs() <= piv_tol {
                    return false;
                }
                let v = this.x[j];
                let at_lower = v == this.lo[j];
                let at_upper = v == this.hi[j];
                if at_lower {
                    s * a < 0.0
                } else if at_upper {
                    s * a > 0.0
                } else {
                    true
                }
            };
            let mut theta_max = f64::INFINITY;
            for j in 0..nt {
                if eligible(self, j) {
                    theta_max = theta_max.min((self.d[j].abs() + dtol) / alpha[j].abs());
                }
            }
            if !theta_max.is_finite() {
                if viol <= ptol {
                    // only the fixed-column tolerance is at stake
                    skip.push(r);
                    continue;
                }
                if self.pivots_since_refactor > 0 {
                    self.refactor()?;
                    self.recompute_basics();
                    self.compute_reduced_costs(Phase::Two);
                    if !self.make_dual_feasible() {
                        return self.primal_loop();
                    }
                    self.recompute_basics();
                    continue;
                }
                return Ok(SimplexStatus::Infeasible);
            }
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..nt {
                if eligible(self, j) {
                    let ratio = self.d[j].abs() / alpha[j].abs();
                    if ratio <= theta_max {
                        if bland {
                            if enter.is_none() {
                                enter = Some(j);
                            }
                        } else if alpha[j].abs() > best {
                            best = alpha[j].abs();
                            enter = Some(j);
                        }
                    }
                }
            }
            let q = enter.expect("theta_max finite implies a candidate");
            self.ftran(q, &mut w);
            let aq = w[r];
            if (aq - alpha[q]).abs() > 1e-6 * (1.0 + aq.abs()) || aq.abs() <= piv_tol {
                // inverse has drifted; rebuild and retry
                self.refactor()?;
                self.recompute_basics();
                self.compute_reduced_costs(Phase::Two);
                if !self.make_dual_feasible() {
                    return self.primal_loop();
                }
                self.recompute_basics();
                continue;
            }
            let theta = self.d[q] / aq;
            if theta.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for j in 0..nt {
                if self.pos[j] == NONBASIC && alpha[j] != 0.0 {
                    self.d[j] -= theta * alpha[j];
                }
            }
            self.d[q] = 0.0;
            self.d[l] = -theta;
            let dq = (self.x[l] - target) / aq;
            for i in 0..m {
                if w[i] != 0.0 {
                    let j = self.head[i];
                    self.x[j] -= w[i] * dq;
                }
            }
            self.x[q] += dq;
            self.x[l] = target;
            self.pos[l] = NONBASIC;
            self.head[r] = q;
            self.pos[q] = r;
            self.pivot_update(r, &w);
            self.iterations += 1;
            skip.clear();
        }
    }
}

enum ColumnIter<'a> {
    Structural(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
    Logical(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Structural(it) => it.next().map(|(&i, &a)| (i, a)),
            ColumnIter::Logical(slot) => slot.take().map(|i| (i, -1.0)),
        }
    }
}
