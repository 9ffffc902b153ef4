use serde::{Deserialize, Serialize};

use super::{JointError, JointModel, Variant};
use crate::euc::AreaResponse;
use crate::market::BidPrices;
use crate::wem::{lmp, WemClearing};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategicBid {
    pub id: usize,
    /// Area index (0-based).
    pub area: usize,
    pub energy_price: f64,
    pub reserve_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointResult {
    pub variant: Variant,
    pub bids: Vec<StrategicBid>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Nodal price at each area's bus.
    pub pi: Vec<f64>,
    /// Prices of every bid as cleared (strategic ones replaced).
    pub bid_prices: BidPrices,
    pub clearing: WemClearing,
    pub responses: Vec<AreaResponse>,
    /// LSE profit recomputed from prices and quantities.
    pub profit: f64,
    /// Objective of the linear model at the same point.
    pub linear_objective: f64,
    /// Negated clearing objective.
    pub welfare: f64,
    /// Clearing welfare plus end-user surplus.
    pub welfare_total: f64,
    pub gap: f64,
}

const CHECK_TOL: f64 = 1e-6;

/// Pairs with the largest `slack * dual` products, for error messages.
fn suspects(jm: &JointModel, x: &[f64]) -> Vec<String> {
    let mut v: Vec<(f64, &str)> = jm
        .pairs
        .iter()
        .map(|p| ((p.slack.eval(x) * x[p.dual]).abs(), p.name.as_str()))
        .filter(|(r, _)| *r > 1e-9)
        .collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v.into_iter().take(5).map(|(r, n)| format!("{n} ({r:.3e})")).collect()
}

pub fn extract_decision(jm: &JointModel, x: &[f64], gap: f64) -> Result<JointResult, JointError> {
    let case = &jm.case;
    let v = &jm.vars;
    if x.len() != jm.model.num_vars() {
        return Err(JointError::Check(format!("{} values for {} columns", x.len(), jm.model.num_vars())));
    }
    let get = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&j| x[j]).collect() };

    let mut bid_prices = case.stored_bid_prices();
    let mut bids = Vec::new();
    for (j, b) in case.bids.iter().enumerate() {
        if let (Some(a), Some(r)) = (v.a_d[j], v.b_d[j]) {
            bid_prices.energy[j] = x[a];
            bid_prices.reserve[j] = x[r];
            bids.push(StrategicBid {
                id: b.id,
                area: case.area_of_bid(j).unwrap_or(usize::MAX),
                energy_price: x[a],
                reserve_price: x[r],
            });
        }
    }

    let (mu_lo, mu_hi) = (get(&v.mu_lo), get(&v.mu_hi));
    let lmps = lmp(x[v.lambda], &mu_lo, &mu_hi, &jm.grid.loss, &jm.grid.isf)?;
    let (p_g, r_g, p_d, r_d) = (get(&v.p_g), get(&v.r_g), get(&v.p_d), get(&v.r_d));
    let mut wem_obj = 0.0;
    for (i, o) in case.gens.iter().enumerate() {
        wem_obj += o.energy_price * p_g[i] + o.reserve_price * r_g[i];
    }
    for j in 0..case.bids.len() {
        wem_obj += -bid_prices.energy[j] * p_d[j] + bid_prices.reserve[j] * r_d[j];
    }
    let clearing = WemClearing {
        p_g,
        r_g,
        p_d,
        r_d,
        lambda: x[v.lambda],
        mu_lo,
        mu_hi,
        nu: x[v.nu],
        rho_g_lo: get(&v.rho_g_lo),
        rho_g_hi: get(&v.rho_g_hi),
        rho_d_lo: get(&v.rho_d_lo),
        rho_d_hi: get(&v.rho_d_hi),
        eta_g_lo: get(&v.eta_g_lo),
        eta_g_hi: get(&v.eta_g_hi),
        eta_d_lo: get(&v.eta_d_lo),
        eta_d_hi: get(&v.eta_d_hi),
        lmp: lmps,
        objective: wem_obj,
    };

    let alpha = get(&v.alpha);
    let beta = get(&v.beta);
    let mut responses = Vec::with_capacity(case.areas.len());
    for (k, area) in case.areas.iter().enumerate() {
        let xs = get(&v.x[k]);
        let ys = get(&v.y[k]);
        let objective = area
            .blocks
            .iter()
            .enumerate()
            .map(|(t, b)| (b.benefit_price - alpha[k]) * xs[t] + (beta[k] - b.reserve_cost_price) * ys[t])
            .sum();
        responses.push(AreaResponse {
            x: xs,
            y: ys,
            gamma_lo: get(&v.gamma_lo[k]),
            gamma_hi: get(&v.gamma_hi[k]),
            zeta_lo: get(&v.zeta_lo[k]),
            zeta_hi: get(&v.zeta_hi[k]),
            objective,
        });
    }
    let pi: Vec<f64> = case.areas.iter().map(|a| clearing.lmp[a.bus - 1]).collect();

    let mut profit = 0.0;
    for k in 0..case.areas.len() {
        for j in case.area_bids(k) {
            profit += (alpha[k] - pi[k]) * clearing.p_d[j] + (clearing.nu - beta[k]) * clearing.r_d[j];
        }
    }
    let linear_objective = jm.model.objective_value(x);
    if (linear_objective - profit).abs() > CHECK_TOL * (1.0 + profit.abs()) {
        return Err(JointError::IdentityMismatch {
            linear: linear_objective,
            bilinear: profit,
            suspects: suspects(jm, x),
        });
    }

    let mut problems = Vec::new();
    for (k, area) in case.areas.iter().enumerate() {
        let bids_k = case.area_bids(k);
        let e: f64 = bids_k.iter().map(|&j| clearing.p_d[j]).sum::<f64>() - responses[k].energy();
        let r: f64 = bids_k.iter().map(|&j| clearing.r_d[j]).sum::<f64>() - responses[k].reserve();
        if e.abs() > CHECK_TOL {
            problems.push(format!("area at bus {}: energy balance off by {e:.3e}", area.bus));
        }
        if r.abs() > CHECK_TOL {
            problems.push(format!("area at bus {}: reserve balance off by {r:.3e}", area.bus));
        }
        let caps = &case.caps;
        if alpha[k] < caps.alpha_min - CHECK_TOL || alpha[k] > caps.alpha_max + CHECK_TOL {
            problems.push(format!("alpha_{} = {} outside caps", k + 1, alpha[k]));
        }
        if beta[k] < caps.beta_min - CHECK_TOL || beta[k] > caps.beta_max + CHECK_TOL {
            problems.push(format!("beta_{} = {} outside caps", k + 1, beta[k]));
        }
        for &j in &bids_k {
            let c = &clearing;
            let e = pi[k] - (bid_prices.energy[j] + c.rho_d_lo[j] - c.rho_d_hi[j]);
            let r = c.nu - (bid_prices.reserve[j] + c.rho_d_lo[j] - c.eta_d_lo[j] + c.eta_d_hi[j]);
            if e.abs() > CHECK_TOL || r.abs() > CHECK_TOL {
                problems.push(format!("bid {}: price/dual relation off by ({e:.3e}, {r:.3e})", case.bids[j].id));
            }
        }
    }
    if !problems.is_empty() {
        return Err(JointError::Check(problems.join("; ")));
    }

    let welfare = clearing.welfare();
    let welfare_total = welfare + responses.iter().map(|r| r.objective).sum::<f64>();
    Ok(JointResult {
        variant: jm.variant,
        bids,
        alpha,
        beta,
        pi,
        bid_prices,
        clearing,
        responses,
        profit,
        linear_objective,
        welfare,
        welfare_total,
        gap,
    })
}
