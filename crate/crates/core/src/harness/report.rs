use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::joint::{JointOutcome, JointResult, Variant};
use crate::market::Case;
use crate::optimizer::MilpStatus;

/// One solve, as written to disk and read back by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: Variant,
    pub status: MilpStatus,
    pub result: Option<JointResult>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    pub seconds: f64,
    pub kkt_passed: Option<bool>,
    pub audit_clean: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl RunReport {
    pub fn from_outcome(variant: Variant, out: &JointOutcome) -> Self {
        Self {
            variant,
            status: out.status,
            result: out.result.clone(),
            objective: finite(out.milp.objective),
            bound: finite(out.milp.bound),
            gap: finite(out.milp.gap),
            nodes: out.milp.nodes,
            seconds: out.milp.seconds,
            kkt_passed: out.kkt.as_ref().map(|k| k.passed()),
            audit_clean: out.audit.clean,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Fixed-point rendering without a negative zero.
pub fn fixed(v: f64, prec: usize) -> String {
    let s = format!("{v:.prec$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// One row per area: prices, bids, nodal price, cleared quantities and the
/// area's share of profit.
pub fn report_csv(case: &Case, report: &RunReport) -> String {
    let mut s = String::from("area,bus,alpha,beta,bid_energy,bid_reserve,lmp,energy,reserve,profit\n");
    let Some(r) = &report.result else { return s };
    for (k, area) in case.areas.iter().enumerate() {
        let bids = case.area_bids(k);
        let e: f64 = bids.iter().map(|&j| r.clearing.p_d[j]).sum();
        let q: f64 = bids.iter().map(|&j| r.clearing.r_d[j]).sum();
        let profit = (r.alpha[k] - r.pi[k]) * e + (r.clearing.nu - r.beta[k]) * q;
        let (be, br) = bids.first().map(|&j| (r.bid_prices.energy[j], r.bid_prices.reserve[j])).unwrap_or((0.0, 0.0));
        let cols = [r.alpha[k], r.beta[k], be, br, r.pi[k], e, q, profit];
        let _ = write!(s, "{},{}", k + 1, area.bus);
        for v in cols {
            let _ = write!(s, ",{}", fixed(v, 6));
        }
        s.push('\n');
    }
    s
}

/// Human-readable table in the layout of a clearing-results table.
pub fn report_text(case: &Case, report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "variant      {}", report.variant);
    let _ = writeln!(s, "status       {:?}", report.status);
    let Some(r) = &report.result else {
        let _ = writeln!(s, "no feasible decision");
        return s;
    };
    let _ = writeln!(s, "profit       {}", fixed(r.profit, 3));
    let _ = writeln!(s, "welfare      {}", fixed(r.welfare, 3));
    let _ = writeln!(s, "welfare+euc  {}", fixed(r.welfare_total, 3));
    let _ = writeln!(s, "gap          {}", report.gap.map_or("-".into(), |g| format!("{g:.3e}")));
    let _ = writeln!(s, "nodes        {}", report.nodes);
    let _ = writeln!(s, "runtime      {} s", fixed(report.seconds, 3));
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>4} {:>4} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "area", "bus", "alpha", "beta", "a_d", "b_d", "lmp"
    );
    for (k, area) in case.areas.iter().enumerate() {
        let (be, br) =
            case.area_bids(k).first().map(|&j| (r.bid_prices.energy[j], r.bid_prices.reserve[j])).unwrap_or((0.0, 0.0));
        let _ = writeln!(
            s,
            "{:>4} {:>4} {:>10} {:>10} {:>10} {:>10} {:>10}",
            k + 1,
            area.bus,
            fixed(r.alpha[k], 3),
            fixed(r.beta[k], 3),
            fixed(be, 3),
            fixed(br, 3),
            fixed(r.pi[k], 3)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>4} {:>10}", "bus", "lmp");
    for (i, p) in r.clearing.lmp.iter().enumerate() {
        let _ = writeln!(s, "{:>4} {:>10}", i + 1, fixed(*p, 3));
    }
    let _ = writeln!(s, "reserve price {}", fixed(r.clearing.nu, 3));
    s
}
