//! Residuals of the optimality conditions of the clearing LP and of the
//! end-user response LPs, evaluated at a candidate primal/dual point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::euc::AreaResponse;
use crate::market::{BidPrices, Case, PricingArea};
use crate::network::{case_isf, loss_factors, NetworkError};
use crate::wem::WemClearing;

#[derive(Debug, Error)]
pub enum KktError {
    #[error("candidate is missing values: {0}")]
    Missing(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Stationarity,
    Primal,
    Dual,
    Complementarity,
}

impl Condition {
    pub const ALL: [Condition; 4] =
        [Condition::Stationarity, Condition::Primal, Condition::Dual, Condition::Complementarity];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Stationarity => "stationarity",
            Condition::Primal => "primal",
            Condition::Dual => "dual",
            Condition::Complementarity => "complementarity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub condition: Condition,
    pub max: f64,
    /// Row or pair where the maximum occurs.
    pub at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub system: String,
    pub tol: f64,
    pub residuals: Vec<Residual>,
}

impl KktReport {
    fn new(system: impl Into<String>, tol: f64) -> Self {
        let residuals =
            Condition::ALL.iter().map(|&c| Residual { condition: c, max: 0.0, at: String::new() }).collect();
        Self { system: system.into(), tol, residuals }
    }

    fn note(&mut self, c: Condition, value: f64, at: impl FnOnce() -> String) {
        let v = if value.is_nan() { f64::INFINITY } else { value.abs() };
        let r = &mut self.residuals[c as usize];
        if v > r.max || (r.at.is_empty() && v > 0.0) {
            r.max = v;
            r.at = at();
        }
    }

    pub fn get(&self, c: Condition) -> &Residual {
        &self.residuals[c as usize]
    }

    pub fn worst(&self) -> f64 {
        self.residuals.iter().map(|r| r.max).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tol
    }

    /// Folds `other` in, keeping the larger residual per condition.
    pub fn merge(&mut self, other: &KktReport) {
        for (a, b) in self.residuals.iter_mut().zip(&other.residuals) {
            if b.max > a.max {
                a.max = b.max;
                a.at = format!("{}:{}", other.system, b.at);
            }
        }
    }
}

impl std::fmt::Display for KktReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.residuals {
            let verdict = if r.max <= self.tol { "ok" } else { "FAIL" };
            writeln!(f, "{:<8} {:<16} {:>12.3e}  {:<4} {}", self.system, r.condition.as_str(), r.max, verdict, r.at)?;
        }
        Ok(())
    }
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), KktError> {
    if v.len() != n {
        return Err(KktError::Missing(format!("{what}: expected {n} values, got {}", v.len())));
    }
    Ok(())
}

/// Clearing-LP conditions at `c` for bid prices `prices`.
pub fn check_wem_kkt(case: &Case, prices: &BidPrices, c: &WemClearing, tol: f64) -> Result<KktReport, KktError> {
    let (g, d, l) = (case.gens.len(), case.bids.len(), case.num_lines());
    for (what, v, n) in [
        ("p_g", &c.p_g, g),
        ("r_g", &c.r_g, g),
        ("rho_g_lo", &c.rho_g_lo, g),
        ("rho_g_hi", &c.rho_g_hi, g),
        ("eta_g_lo", &c.eta_g_lo, g),
        ("eta_g_hi", &c.eta_g_hi, g),
        ("p_d", &c.p_d, d),
        ("r_d", &c.r_d, d),
        ("rho_d_lo", &c.rho_d_lo, d),
        ("rho_d_hi", &c.rho_d_hi, d),
        ("eta_d_lo", &c.eta_d_lo, d),
        ("eta_d_hi", &c.eta_d_hi, d),
        ("mu_lo", &c.mu_lo, l),
        ("mu_hi", &c.mu_hi, l),
        ("energy prices", &prices.energy, d),
        ("reserve prices", &prices.reserve, d),
    ] {
        check_len(what, v, n)?;
    }
    let isf = case_isf(case)?;
    let loss = loss_factors(case).0;
    let mut rep = KktReport::new("wem", tol);
    let shadow = |bus: usize| {
        let cong: f64 = (0..l).map(|k| (c.mu_lo[k] - c.mu_hi[k]) * isf.get(k, bus - 1)).sum();
        c.lambda * (1.0 - loss[bus - 1]) + cong
    };
    use Condition::*;

    for (i, o) in case.gens.iter().enumerate() {
        let id = o.id;
        rep.note(Stationarity, o.energy_price - shadow(o.bus) - c.rho_g_lo[i] + c.rho_g_hi[i], || format!("pg{id}"));
        rep.note(Stationarity, o.reserve_price - c.nu + c.rho_g_hi[i] - c.eta_g_lo[i] + c.eta_g_hi[i], || {
            format!("rg{id}")
        });
        rep.note(Primal, (o.p_min - c.p_g[i]).max(0.0), || format!("pmin{id}"));
        rep.note(Primal, (c.p_g[i] + c.r_g[i] - o.p_max).max(0.0), || format!("gcap{id}"));
        rep.note(Primal, (-c.r_g[i]).max(0.0), || format!("rg{id}"));
        rep.note(Primal, (c.r_g[i] - o.r_max).max(0.0), || format!("rmax{id}"));
        for (name, v) in
            [("rhoglo", c.rho_g_lo[i]), ("rhoghi", c.rho_g_hi[i]), ("etaglo", c.eta_g_lo[i]), ("etaghi", c.eta_g_hi[i])]
        {
            rep.note(Dual, v.min(0.0), || format!("{name}{id}"));
        }
        rep.note(Complementarity, c.rho_g_lo[i] * (c.p_g[i] - o.p_min), || format!("gplo{id}"));
        rep.note(Complementarity, c.rho_g_hi[i] * (o.p_max - c.p_g[i] - c.r_g[i]), || format!("gphi{id}"));
        rep.note(Complementarity, c.eta_g_lo[i] * c.r_g[i], || format!("grlo{id}"));
        rep.note(Complementarity, c.eta_g_hi[i] * (o.r_max - c.r_g[i]), || format!("grhi{id}"));
    }
    for (j, b) in case.bids.iter().enumerate() {
        let id = b.id;
        rep.note(Stationarity, -prices.energy[j] + shadow(b.bus) - c.rho_d_lo[j] + c.rho_d_hi[j], || format!("pd{id}"));
        rep.note(Stationarity, prices.reserve[j] - c.nu + c.rho_d_lo[j] - c.eta_d_lo[j] + c.eta_d_hi[j], || {
            format!("rd{id}")
        });
        rep.note(Primal, (b.p_min - c.p_d[j] + c.r_d[j]).max(0.0), || format!("dfloor{id}"));
        rep.note(Primal, (c.p_d[j] - b.p_max).max(0.0), || format!("pmax{id}"));
        rep.note(Primal, (-c.r_d[j]).max(0.0), || format!("rd{id}"));
        rep.note(Primal, (c.r_d[j] - b.r_max).max(0.0), || format!("rmax{id}"));
        for (name, v) in
            [("rhodlo", c.rho_d_lo[j]), ("rhodhi", c.rho_d_hi[j]), ("etadlo", c.eta_d_lo[j]), ("etadhi", c.eta_d_hi[j])]
        {
            rep.note(Dual, v.min(0.0), || format!("{name}{id}"));
        }
        rep.note(Complementarity, c.rho_d_lo[j] * (c.p_d[j] - c.r_d[j] - b.p_min), || format!("dplo{id}"));
        rep.note(Complementarity, c.rho_d_hi[j] * (b.p_max - c.p_d[j]), || format!("dphi{id}"));
        rep.note(Complementarity, c.eta_d_lo[j] * c.r_d[j], || format!("drlo{id}"));
        rep.note(Complementarity, c.eta_d_hi[j] * (b.r_max - c.r_d[j]), || format!("drhi{id}"));
    }

    let mut inj = vec![0.0; case.num_buses()];
    let mut balance = 0.0;
    for (i, o) in case.gens.iter().enumerate() {
        inj[o.bus - 1] += c.p_g[i];
        balance += (1.0 - loss[o.bus - 1]) * c.p_g[i];
    }
    for (j, b) in case.bids.iter().enumerate() {
        inj[b.bus - 1] -= c.p_d[j];
        balance -= (1.0 - loss[b.bus - 1]) * c.p_d[j];
    }
    rep.note(Primal, balance, || "balance".into());
    let flows = isf.flows(&inj);
    for (k, line) in case.network.lines.iter().enumerate() {
        let id = line.id;
        rep.note(Primal, (-line.flow_limit - flows[k]).max(0.0), || format!("flo{id}"));
        rep.note(Primal, (flows[k] - line.flow_limit).max(0.0), || format!("fhi{id}"));
        rep.note(Dual, c.mu_lo[k].min(0.0), || format!("mulo{id}"));
        rep.note(Dual, c.mu_hi[k].min(0.0), || format!("muhi{id}"));
        rep.note(Complementarity, c.mu_lo[k] * (flows[k] + line.flow_limit), || format!("flo{id}"));
        rep.note(Complementarity, c.mu_hi[k] * (line.flow_limit - flows[k]), || format!("fhi{id}"));
    }
    let reserve: f64 = c.r_g.iter().chain(&c.r_d).sum();
    rep.note(Primal, (case.reserve_req - reserve).max(0.0), || "reserve".into());
    rep.note(Dual, c.nu.min(0.0), || "nu".into());
    rep.note(Complementarity, c.nu * (reserve - case.reserve_req), || "res".into());
    Ok(rep)
}

/// Response-LP conditions of one area at prices `(alpha, beta)`.
pub fn check_euc_kkt(
    area: &PricingArea,
    alpha: f64,
    beta: f64,
    r: &AreaResponse,
    tol: f64,
) -> Result<KktReport, KktError> {
    let n = area.blocks.len();
    for (what, v) in [
        ("x", &r.x),
        ("y", &r.y),
        ("gamma_lo", &r.gamma_lo),
        ("gamma_hi", &r.gamma_hi),
        ("zeta_lo", &r.zeta_lo),
        ("zeta_hi", &r.zeta_hi),
    ] {
        check_len(what, v, n)?;
    }
    let mut rep = KktReport::new(format!("euc@{}", area.bus), tol);
    use Condition::*;
    for (t, b) in area.blocks.iter().enumerate() {
        let (x, y) = (r.x[t], r.y[t]);
        let (gl, gh, zl, zh) = (r.gamma_lo[t], r.gamma_hi[t], r.zeta_lo[t], r.zeta_hi[t]);
        rep.note(Stationarity, b.benefit_price - alpha + gl - gh, || format!("x{t}"));
        rep.note(Stationarity, beta - b.reserve_cost_price - gl + zl - zh, || format!("y{t}"));
        rep.note(Primal, (b.x_min + y - x).max(0.0), || format!("xlo{t}"));
        rep.note(Primal, (x - b.x_max).max(0.0), || format!("xhi{t}"));
        rep.note(Primal, (-y).max(0.0), || format!("ylo{t}"));
        rep.note(Primal, (y - b.y_max).max(0.0), || format!("yhi{t}"));
        for (name, v) in [("gamlo", gl), ("gamhi", gh), ("zetlo", zl), ("zethi", zh)] {
            rep.note(Dual, v.min(0.0), || format!("{name}{t}"));
        }
        rep.note(Complementarity, gl * (x - y - b.x_min), || format!("xlo{t}"));
        rep.note(Complementarity, gh * (b.x_max - x), || format!("xhi{t}"));
        rep.note(Complementarity, zl * y, || format!("ylo{t}"));
        rep.note(Complementarity, zh * (b.y_max - y), || format!("yhi{t}"));
    }
    Ok(rep)
}

/// Both lower levels at once: the clearing plus every area's response.
pub fn check_kkt_residuals(
    case: &Case,
    prices: &BidPrices,
    clearing: &WemClearing,
    alpha: &[f64],
    beta: &[f64],
    responses: &[AreaResponse],
    tol: f64,
) -> Result<KktReport, KktError> {
    let k = case.areas.len();
    check_len("alpha", alpha, k)?;
    check_len("beta", beta, k)?;
    if responses.len() != k {
        return Err(KktError::Missing(format!("responses: expected {k}, got {}", responses.len())));
    }
    let mut rep = check_wem_kkt(case, prices, clearing, tol)?;
    for r in &mut rep.residuals {
        if !r.at.is_empty() {
            r.at = format!("wem:{}", r.at);
        }
    }
    for (a, area) in case.areas.iter().enumerate() {
        rep.merge(&check_euc_kkt(area, alpha[a], beta[a], &responses[a], tol)?);
    }
    rep.system = "all".into();
    Ok(rep)
}
