//! Wholesale co-optimised energy and reserve clearing.
//!
//! Column order of the clearing LP is `p_g, p_d, r_g, r_d`. Rows: power
//! balance, then for each line a lower and an upper flow row, the reserve
//! requirement, one capacity row `p_g + r_g <= p_max` per gen and one floor
//! row `p_d - r_d >= p_min` per bid. `p_g >= p_min`, `p_d <= p_max` and the
//! reserve boxes are column bounds.

use serde::{Deserialize, Serialize};

use crate::market::{BidPrices, Case};
use crate::network::{case_isf, loss_factors, IsfMatrix, NetworkError};
use crate::optimizer::{solve_lp, LpStatus, Model, RowSense, Sense, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum ClearingError {
    #[error("clearing is infeasible")]
    Infeasible,
    #[error("clearing is unbounded")]
    Unbounded,
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Dimension(String),
}

/// Network data the clearing needs, derived once per case.
#[derive(Debug, Clone)]
pub struct Grid {
    pub isf: IsfMatrix,
    pub loss: Vec<f64>,
}

impl Grid {
    pub fn new(case: &Case) -> Result<Self, NetworkError> {
        Ok(Self { isf: case_isf(case)?, loss: loss_factors(case).0 })
    }

    /// Column coefficients of a unit injection at `bus` (1-based) in the
    /// balance row and every flow row.
    pub fn injection(&self, bus: usize) -> (f64, Vec<f64>) {
        let i = bus - 1;
        (1.0 - self.loss[i], (0..self.isf.lines).map(|l| self.isf.get(l, i)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WemClearing {
    pub p_g: Vec<f64>,
    pub r_g: Vec<f64>,
    pub p_d: Vec<f64>,
    pub r_d: Vec<f64>,
    pub lambda: f64,
    pub mu_lo: Vec<f64>,
    pub mu_hi: Vec<f64>,
    pub nu: f64,
    pub rho_g_lo: Vec<f64>,
    pub rho_g_hi: Vec<f64>,
    pub rho_d_lo: Vec<f64>,
    pub rho_d_hi: Vec<f64>,
    pub eta_g_lo: Vec<f64>,
    pub eta_g_hi: Vec<f64>,
    pub eta_d_lo: Vec<f64>,
    pub eta_d_hi: Vec<f64>,
    pub lmp: Vec<f64>,
    /// Clearing objective (minimised); welfare is its negation.
    pub objective: f64,
}

/// Positions of the clearing LP's columns and rows.
#[derive(Debug, Clone, Copy)]
pub struct WemLayout {
    pub gens: usize,
    pub bids: usize,
    pub lines: usize,
}

impl WemLayout {
    pub fn p_g(&self, i: usize) -> usize {
        i
    }
    pub fn p_d(&self, j: usize) -> usize {
        self.gens + j
    }
    pub fn r_g(&self, i: usize) -> usize {
        self.gens + self.bids + i
    }
    pub fn r_d(&self, j: usize) -> usize {
        2 * self.gens + self.bids + j
    }
    pub const BALANCE: usize = 0;
    pub fn flow_lo(&self, l: usize) -> usize {
        1 + 2 * l
    }
    pub fn flow_hi(&self, l: usize) -> usize {
        2 + 2 * l
    }
    pub fn reserve(&self) -> usize {
        1 + 2 * self.lines
    }
    pub fn gen_cap(&self, i: usize) -> usize {
        2 + 2 * self.lines + i
    }
    pub fn bid_floor(&self, j: usize) -> usize {
        2 + 2 * self.lines + self.gens + j
    }
}

pub fn build_wem_lp(case: &Case, grid: &Grid, bids: &BidPrices) -> Result<(Model, WemLayout), ClearingError> {
    let (g, d, l) = (case.gens.len(), case.bids.len(), case.num_lines());
    if bids.energy.len() != d || bids.reserve.len() != d {
        return Err(ClearingError::Dimension(format!(
            "{} bids in case, {} / {} prices supplied",
            d,
            bids.energy.len(),
            bids.reserve.len()
        )));
    }
    let lay = WemLayout { gens: g, bids: d, lines: l };
    let mut m = Model::new("wem", Sense::Minimize);
    for (i, o) in case.gens.iter().enumerate() {
        let v = m.add_var(format!("pg{}", o.id), o.p_min, f64::INFINITY);
        m.add_objective_term(v, o.energy_price);
        debug_assert_eq!(v, lay.p_g(i));
    }
    for (j, b) in case.bids.iter().enumerate() {
        let v = m.add_var(format!("pd{}", b.id), f64::NEG_INFINITY, b.p_max);
        m.add_objective_term(v, -bids.energy[j]);
    }
    for o in &case.gens {
        let v = m.add_var(format!("rg{}", o.id), 0.0, o.r_max);
        m.add_objective_term(v, o.reserve_price);
    }
    for (j, b) in case.bids.iter().enumerate() {
        let v = m.add_var(format!("rd{}", b.id), 0.0, b.r_max);
        m.add_objective_term(v, bids.reserve[j]);
    }

    // balance and flow rows share the injection coefficients
    let mut balance = Vec::with_capacity(g + d);
    let mut flows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); l];
    for (i, o) in case.gens.iter().enumerate() {
        let (b, psi) = grid.injection(o.bus);
        balance.push((lay.p_g(i), b));
        for (row, a) in flows.iter_mut().zip(psi) {
            row.push((lay.p_g(i), a));
        }
    }
    for (j, bid) in case.bids.iter().enumerate() {
        let (b, psi) = grid.injection(bid.bus);
        balance.push((lay.p_d(j), -b));
        for (row, a) in flows.iter_mut().zip(psi) {
            row.push((lay.p_d(j), -a));
        }
    }
    m.add_row("balance", balance, RowSense::Eq, 0.0);
    for (li, (line, row)) in case.network.lines.iter().zip(flows).enumerate() {
        let r = m.add_row(format!("flo{}", line.id), row.clone(), RowSense::Ge, -line.flow_limit);
        debug_assert_eq!(r, lay.flow_lo(li));
        m.add_row(format!("fhi{}", line.id), row, RowSense::Le, line.flow_limit);
    }
    let reserve = (0..g).map(|i| (lay.r_g(i), 1.0)).chain((0..d).map(|j| (lay.r_d(j), 1.0)));
    m.add_row("reserve", reserve, RowSense::Ge, case.reserve_req);
    for (i, o) in case.gens.iter().enumerate() {
        m.add_row(format!("gcap{}", o.id), [(lay.p_g(i), 1.0), (lay.r_g(i), 1.0)], RowSense::Le, o.p_max);
    }
    for (j, b) in case.bids.iter().enumerate() {
        m.add_row(format!("dfloor{}", b.id), [(lay.p_d(j), 1.0), (lay.r_d(j), -1.0)], RowSense::Ge, b.p_min);
    }
    Ok((m, lay))
}

pub fn clear_wem(case: &Case, bids: &BidPrices) -> Result<WemClearing, ClearingError> {
    let grid = Grid::new(case)?;
    clear_wem_on(case, &grid, bids)
}

/// As [`clear_wem`] with precomputed network data.
pub fn clear_wem_on(case: &Case, grid: &Grid, bids: &BidPrices) -> Result<WemClearing, ClearingError> {
    let (model, lay) = build_wem_lp(case, grid, bids)?;
    let sol = solve_lp(&model)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(ClearingError::Infeasible),
        LpStatus::Unbounded => return Err(ClearingError::Unbounded),
    }
    let (g, d, l) = (lay.gens, lay.bids, lay.lines);
    let x = &sol.x;
    let y = &sol.row_duals;
    let rc = &sol.reduced_costs;
    let pos = |v: f64| v.max(0.0);
    let neg = |v: f64| (-v).max(0.0);

    let lambda = y[WemLayout::BALANCE];
    let mu_lo: Vec<f64> = (0..l).map(|k| y[lay.flow_lo(k)]).collect();
    let mu_hi: Vec<f64> = (0..l).map(|k| -y[lay.flow_hi(k)]).collect();
    let lmp = lmp(lambda, &mu_lo, &mu_hi, &grid.loss, &grid.isf)?;
    Ok(WemClearing {
        p_g: (0..g).map(|i| x[lay.p_g(i)]).collect(),
        r_g: (0..g).map(|i| x[lay.r_g(i)]).collect(),
        p_d: (0..d).map(|j| x[lay.p_d(j)]).collect(),
        r_d: (0..d).map(|j| x[lay.r_d(j)]).collect(),
        lambda,
        nu: y[lay.reserve()],
        rho_g_lo: (0..g).map(|i| pos(rc[lay.p_g(i)])).collect(),
        rho_g_hi: (0..g).map(|i| -y[lay.gen_cap(i)]).collect(),
        rho_d_lo: (0..d).map(|j| y[lay.bid_floor(j)]).collect(),
        rho_d_hi: (0..d).map(|j| neg(rc[lay.p_d(j)])).collect(),
        eta_g_lo: (0..g).map(|i| pos(rc[lay.r_g(i)])).collect(),
        eta_g_hi: (0..g).map(|i| neg(rc[lay.r_g(i)])).collect(),
        eta_d_lo: (0..d).map(|j| pos(rc[lay.r_d(j)])).collect(),
        eta_d_hi: (0..d).map(|j| neg(rc[lay.r_d(j)])).collect(),
        mu_lo,
        mu_hi,
        lmp,
        objective: sol.objective,
    })
}

/// Nodal prices `pi_i = lambda (1 - loss_i) + sum_l (mu_lo_l - mu_hi_l) isf_li`.
pub fn lmp(
    lambda: f64,
    mu_lo: &[f64],
    mu_hi: &[f64],
    loss: &[f64],
    isf: &IsfMatrix,
) -> Result<Vec<f64>, ClearingError> {
    if mu_lo.len() != isf.lines || mu_hi.len() != isf.lines || loss.len() != isf.buses {
        return Err(ClearingError::Dimension(format!(
            "lmp: {} / {} line duals and {} loss factors for a {} x {} isf",
            mu_lo.len(),
            mu_hi.len(),
            loss.len(),
            isf.lines,
            isf.buses
        )));
    }
    Ok((0..isf.buses)
        .map(|i| {
            let cong: f64 = (0..isf.lines).map(|l| (mu_lo[l] - mu_hi[l]) * isf.get(l, i)).sum();
            lambda * (1.0 - loss[i]) + cong
        })
        .collect())
}

/// Dual objective of the clearing, to compare against `objective`.
pub fn wem_dual_objective(case: &Case, c: &WemClearing) -> f64 {
    let dot = |a: &[f64], b: &mut dyn Iterator<Item = f64>| -> f64 { a.iter().zip(b).map(|(u, v)| u * v).sum() };
    let fbar = || case.network.lines.iter().map(|l| l.flow_limit);
    -dot(&c.mu_lo, &mut fbar()) - dot(&c.mu_hi, &mut fbar())
        + c.nu * case.reserve_req
        + dot(&c.rho_g_lo, &mut case.gens.iter().map(|o| o.p_min))
        - dot(&c.rho_g_hi, &mut case.gens.iter().map(|o| o.p_max))
        + dot(&c.rho_d_lo, &mut case.bids.iter().map(|b| b.p_min))
        - dot(&c.rho_d_hi, &mut case.bids.iter().map(|b| b.p_max))
        - dot(&c.eta_g_hi, &mut case.gens.iter().map(|o| o.r_max))
        - dot(&c.eta_d_hi, &mut case.bids.iter().map(|b| b.r_max))
}

impl WemClearing {
    /// Social welfare as reported: the negated clearing objective.
    pub fn welfare(&self) -> f64 {
        -self.objective
    }
}
