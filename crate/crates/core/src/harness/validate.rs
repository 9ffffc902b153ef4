use std::fmt;

use serde::{Deserialize, Serialize};

use super::report::RunReport;
use crate::euc::{area_response, response_breakpoints};
use crate::joint::variant_case;
use crate::market::Case;
use crate::optimizer::check_kkt_residuals;
use crate::wem::{clear_wem, lmp, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tol
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, residual: f64, tol: f64, detail: impl Into<String>) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(Check { name: name.into(), residual, tol, detail: detail.into() });
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let v = if c.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{v:<4}  {:<22} {:>12.3e}  {}", c.name, c.residual, c.detail)?;
        }
        for w in &self.warnings {
            writeln!(f, "warn  {w}")?;
        }
        Ok(())
    }
}

/// Re-derives every quantity of a stored result from the case and compares.
pub fn validate_result(case: &Case, report: &RunReport, tol: f64) -> Validation {
    let mut v = Validation::default();
    let Some(r) = &report.result else {
        v.push("result present", f64::INFINITY, 0.0, format!("status {:?}", report.status));
        return v;
    };
    let case = variant_case(case, report.variant);
    let k = case.areas.len();
    let shapes = r.alpha.len() == k
        && r.beta.len() == k
        && r.pi.len() == k
        && r.responses.len() == k
        && r.clearing.p_d.len() == case.bids.len()
        && r.bid_prices.energy.len() == case.bids.len()
        && r.clearing.p_g.len() == case.gens.len();
    if !shapes {
        v.push("dimensions", f64::INFINITY, 0.0, "result does not match the case");
        return v;
    }

    match check_kkt_residuals(&case, &r.bid_prices, &r.clearing, &r.alpha, &r.beta, &r.responses, tol) {
        Ok(rep) => {
            let worst = rep.residuals.iter().max_by(|a, b| a.max.total_cmp(&b.max)).unwrap();
            v.push("kkt", rep.worst(), tol, format!("{} at {}", worst.condition.as_str(), worst.at));
        }
        Err(e) => v.push("kkt", f64::INFINITY, tol, e.to_string()),
    }

    // nodal prices from the stored duals
    match Grid::new(&case).map_err(|e| e.to_string()).and_then(|g| {
        lmp(r.clearing.lambda, &r.clearing.mu_lo, &r.clearing.mu_hi, &g.loss, &g.isf).map_err(|e| e.to_string())
    }) {
        Ok(lmps) => {
            let d = case.areas.iter().enumerate().map(|(a, ar)| (lmps[ar.bus - 1] - r.pi[a]).abs()).fold(0.0, f64::max);
            v.push("nodal prices", d, tol, "pi against lambda and line duals");
        }
        Err(e) => v.push("nodal prices", f64::INFINITY, tol, e),
    }

    let mut bilinear = 0.0;
    for a in 0..k {
        for j in case.area_bids(a) {
            bilinear += (r.alpha[a] - r.pi[a]) * r.clearing.p_d[j] + (r.clearing.nu - r.beta[a]) * r.clearing.r_d[j];
        }
    }
    let scale = 1.0 + bilinear.abs();
    let d = (r.profit - bilinear).abs().max((r.linear_objective - bilinear).abs());
    v.push(
        "profit identity",
        d / scale,
        tol,
        format!("stored {:.6}, linear {:.6}, recomputed {:.6}", r.profit, r.linear_objective, bilinear),
    );

    match clear_wem(&case, &r.bid_prices) {
        Ok(c) => {
            let d = (c.objective - r.clearing.objective).abs() / (1.0 + c.objective.abs());
            v.push(
                "embedded clearing",
                d,
                tol,
                format!("re-cleared {:.6} vs {:.6}", c.objective, r.clearing.objective),
            );
        }
        Err(e) => v.push("embedded clearing", f64::INFINITY, tol, e.to_string()),
    }
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (a, area) in case.areas.iter().enumerate() {
        let best = area_response(r.alpha[a], r.beta[a], area);
        let d = (best.objective - r.responses[a].objective).abs() / (1.0 + best.objective.abs());
        if d >= worst {
            worst = d;
            at = format!("area {}", a + 1);
        }
    }
    v.push("embedded response", worst, tol, at);

    let welfare = -r.clearing.objective;
    let total = welfare + r.responses.iter().map(|x| x.objective).sum::<f64>();
    let d = (welfare - r.welfare).abs().max((total - r.welfare_total).abs()) / (1.0 + total.abs());
    v.push("welfare", d, tol, "both definitions");

    let congested = r.clearing.mu_lo.iter().chain(&r.clearing.mu_hi).any(|m| m.abs() > tol);
    let lossless = case.network.loss_factors.as_ref().is_none_or(|l| l.iter().all(|x| *x == 0.0));
    if !congested && lossless {
        for (a, area) in case.areas.iter().enumerate() {
            let bp = response_breakpoints(area, &case.caps);
            let near = bp.alpha.iter().map(|b| (b - r.alpha[a]).abs()).fold(f64::INFINITY, f64::min);
            if near > 1e-6 {
                v.warnings.push(format!(
                    "alpha {} of area {} is {:.3e} from its nearest breakpoint",
                    r.alpha[a],
                    a + 1,
                    near
                ));
            }
        }
    }
    v
}
