//! End-user best response to retail prices, per block and per area.

use serde::{Deserialize, Serialize};

use crate::market::{EucBlock, PriceCaps, PricingArea};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaResponse {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gamma_lo: Vec<f64>,
    pub gamma_hi: Vec<f64>,
    pub zeta_lo: Vec<f64>,
    pub zeta_hi: Vec<f64>,
    /// End-user surplus `(c - alpha)'x + (beta - d)'y` summed over blocks.
    pub objective: f64,
}

impl AreaResponse {
    pub fn energy(&self) -> f64 {
        self.x.iter().sum()
    }

    pub fn reserve(&self) -> f64 {
        self.y.iter().sum()
    }
}

/// Maximises `(c - alpha) x + (beta - d) y` over `x_min + y <= x <= x_max`,
/// `0 <= y <= y_max`. Zero margins resolve to the larger consumption.
pub fn best_response_block(alpha: f64, beta: f64, b: &EucBlock) -> (f64, f64) {
    let me = b.benefit_price - alpha;
    let mr = beta - b.reserve_cost_price;
    let ymax = b.y_max.min(b.x_max - b.x_min);
    if me >= 0.0 {
        let y = if mr >= 0.0 { ymax } else { 0.0 };
        (b.x_max, y)
    } else {
        let y = if me + mr >= 0.0 { ymax } else { 0.0 };
        (b.x_min + y, y)
    }
}

struct BlockDuals {
    gamma_lo: f64,
    gamma_hi: f64,
    zeta_lo: f64,
    zeta_hi: f64,
}

fn block_duals(alpha: f64, beta: f64, b: &EucBlock, y: f64) -> BlockDuals {
    let me = b.benefit_price - alpha;
    let mr = beta - b.reserve_cost_price;
    let mut gamma_lo = (-me).max(0.0);
    let mut gamma_hi = me.max(0.0);
    // coupling row binds while the reserve cap is slack: the reserve margin
    // has to be carried by gamma_lo instead of zeta_hi
    let span = b.x_max - b.x_min;
    if span < b.y_max && y == span && mr - gamma_lo > 0.0 {
        gamma_lo = mr;
        gamma_hi = me + mr;
    }
    let r = mr - gamma_lo;
    BlockDuals { gamma_lo, gamma_hi, zeta_lo: (-r).max(0.0), zeta_hi: r.max(0.0) }
}

pub fn area_response(alpha: f64, beta: f64, area: &PricingArea) -> AreaResponse {
    let n = area.blocks.len();
    let mut out = AreaResponse {
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        gamma_lo: Vec::with_capacity(n),
        gamma_hi: Vec::with_capacity(n),
        zeta_lo: Vec::with_capacity(n),
        zeta_hi: Vec::with_capacity(n),
        objective: 0.0,
    };
    for b in &area.blocks {
        let (x, y) = best_response_block(alpha, beta, b);
        let du = block_duals(alpha, beta, b, y);
        out.objective += (b.benefit_price - alpha) * x + (beta - b.reserve_cost_price) * y;
        out.x.push(x);
        out.y.push(y);
        out.gamma_lo.push(du.gamma_lo);
        out.gamma_hi.push(du.gamma_hi);
        out.zeta_lo.push(du.zeta_lo);
        out.zeta_hi.push(du.zeta_hi);
    }
    out
}

/// Dual objective `gamma_hi'x_max - gamma_lo'x_min + zeta_hi'y_max`, equal
/// to the surplus at an optimal response.
pub fn area_dual_objective(area: &PricingArea, r: &AreaResponse) -> f64 {
    area.blocks
        .iter()
        .enumerate()
        .map(|(t, b)| r.gamma_hi[t] * b.x_max - r.gamma_lo[t] * b.x_min + r.zeta_hi[t] * b.y_max)
        .sum()
}

/// Prices at which an area's best response can change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    /// Distinct benefit prices plus the energy caps, ascending.
    pub alpha: Vec<f64>,
    /// Distinct reserve cost prices plus the reserve caps, ascending.
    pub beta: Vec<f64>,
}

impl Breakpoints {
    /// Reserve-price breakpoints once `alpha` is fixed: blocks priced out
    /// of energy switch reserve on at `d + alpha - c` instead of `d`.
    pub fn beta_given_alpha(area: &PricingArea, caps: &PriceCaps, alpha: f64) -> Vec<f64> {
        let vals = area.blocks.iter().map(|b| {
            let me = b.benefit_price - alpha;
            if me >= 0.0 {
                b.reserve_cost_price
            } else {
                b.reserve_cost_price - me
            }
        });
        sorted_distinct(vals.chain([caps.beta_min, caps.beta_max]))
    }
}

pub fn response_breakpoints(area: &PricingArea, caps: &PriceCaps) -> Breakpoints {
    Breakpoints {
        alpha: sorted_distinct(area.blocks.iter().map(|b| b.benefit_price).chain([caps.alpha_min, caps.alpha_max])),
        beta: sorted_distinct(area.blocks.iter().map(|b| b.reserve_cost_price).chain([caps.beta_min, caps.beta_max])),
    }
}

fn sorted_distinct(vals: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = vals.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(c: f64, d: f64, lo: f64, hi: f64, ymax: f64) -> EucBlock {
        EucBlock { euc: None, benefit_price: c, reserve_cost_price: d, x_min: lo, x_max: hi, y_max: ymax }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(best_response_block(35.0, 6.0, &blk(36.0, 5.0, 0.0, 1.0, 0.5)), (1.0, 0.5));
        assert_eq!(best_response_block(36.0, 4.0, &blk(35.0, 5.0, 0.0, 1.0, 0.5)), (0.0, 0.0));
        assert_eq!(best_response_block(36.0, 8.0, &blk(35.0, 5.0, 0.0, 1.0, 0.5)), (0.5, 0.5));
    }

    #[test]
    fn breakpoints_dedupe_and_include_caps() {
        let area = PricingArea {
            bus: 1,
            bid_ids: vec![1],
            blocks: vec![blk(35.0, 5.0, 0.0, 1.0, 0.5), blk(36.0, 5.0, 0.0, 1.0, 0.5), blk(36.0, 6.0, 0.0, 1.0, 0.5)],
        };
        let bp = response_breakpoints(&area, &PriceCaps::default());
        assert_eq!(bp.alpha, vec![0.0, 35.0, 36.0, 100.0]);
        let empty = PricingArea { bus: 1, bid_ids: vec![1], blocks: vec![] };
        assert_eq!(response_breakpoints(&empty, &PriceCaps::default()).alpha, vec![0.0, 100.0]);
    }
}
