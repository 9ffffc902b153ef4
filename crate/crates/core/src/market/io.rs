use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::Case;

/// One invariant breach found by [`validate_case`]. `path` names the field,
/// e.g. `gens[id=2].p_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("case parse error: {0}")]
    Parse(String),
    #[error("invalid case: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("case serialisation failed: {0}")]
    Serialize(String),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parses a TOML case document and validates it.
pub fn load_case(text: &str) -> Result<Case, CaseError> {
    let case: Case = toml::from_str(text).map_err(|e| CaseError::Parse(e.to_string()))?;
    let diags = validate_case(&case);
    if diags.is_empty() {
        Ok(case)
    } else {
        Err(CaseError::Invalid(diags))
    }
}

pub fn save_case(case: &Case) -> Result<String, CaseError> {
    toml::to_string(case).map_err(|e| CaseError::Serialize(e.to_string()))
}

struct Checker {
    out: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.out.push(Diagnostic { path: path.into(), message: message.into() });
    }

    fn finite(&mut self, path: &str, v: f64) -> bool {
        if !v.is_finite() {
            self.push(path, format!("must be finite, got {v}"));
            return false;
        }
        true
    }

    fn nonneg(&mut self, path: &str, v: f64) {
        if self.finite(path, v) && v < 0.0 {
            self.push(path, format!("must be >= 0, got {v}"));
        }
    }

    fn bus(&mut self, path: &str, bus: usize, n: usize) -> bool {
        if bus == 0 || bus > n {
            self.push(path, format!("bus {bus} outside 1..={n}"));
            return false;
        }
        true
    }

    fn quantities(&mut self, base: &str, p_min: f64, p_max: f64, r_max: f64) {
        self.nonneg(&format!("{base}.p_min"), p_min);
        self.finite(&format!("{base}.p_max"), p_max);
        self.nonneg(&format!("{base}.r_max"), r_max);
        if p_min > p_max {
            self.push(format!("{base}.p_min"), format!("p_min {p_min} exceeds p_max {p_max}"));
        }
    }
}

/// Checks every structural invariant of a case. An empty list means valid.
pub fn validate_case(case: &Case) -> Vec<Diagnostic> {
    let mut c = Checker { out: Vec::new() };
    let net = &case.network;
    let n = net.buses;

    if n == 0 {
        c.push("network.buses", "at least one bus is required");
    }
    c.bus("network.slack_bus", net.slack_bus, n);

    let mut line_ids = BTreeSet::new();
    for line in &net.lines {
        let base = format!("network.lines[id={}]", line.id);
        if !line_ids.insert(line.id) {
            c.push(&base, "duplicate line id");
        }
        let ok_from = c.bus(&format!("{base}.from"), line.from, n);
        let ok_to = c.bus(&format!("{base}.to"), line.to, n);
        if ok_from && ok_to && line.from == line.to {
            c.push(&base, "from and to buses coincide");
        }
        if c.finite(&format!("{base}.reactance"), line.reactance) && line.reactance <= 0.0 {
            c.push(format!("{base}.reactance"), "reactance must be > 0");
        }
        c.nonneg(&format!("{base}.flow_limit"), line.flow_limit);
    }

    if let Some(lf) = &net.loss_factors {
        if lf.len() != n {
            c.push("network.loss_factors", format!("expected {n} entries, got {}", lf.len()));
        }
        for (i, &v) in lf.iter().enumerate() {
            if !(0.0..1.0).contains(&v) {
                c.push(
                    format!("network.loss_factors[{}]", i + 1),
                    format!("loss factor out of range: {v} not in [0, 1)"),
                );
            }
        }
    }
    if let Some(isf) = &net.isf {
        let want = net.lines.len() * n;
        if isf.len() != want {
            c.push("network.isf", format!("expected {} x {} = {want} entries, got {}", net.lines.len(), n, isf.len()));
        }
        if isf.iter().any(|v| !v.is_finite()) {
            c.push("network.isf", "entries must be finite");
        }
    } else if n > 0 && !connected(case) {
        c.push("network.lines", "network is not connected");
    }

    let mut gen_ids = BTreeSet::new();
    for g in &case.gens {
        let base = format!("gens[id={}]", g.id);
        if !gen_ids.insert(g.id) {
            c.push(&base, "duplicate gen id");
        }
        c.bus(&format!("{base}.bus"), g.bus, n);
        c.finite(&format!("{base}.energy_price"), g.energy_price);
        c.finite(&format!("{base}.reserve_price"), g.reserve_price);
        c.quantities(&base, g.p_min, g.p_max, g.r_max);
    }

    let mut bid_ids = BTreeSet::new();
    for b in &case.bids {
        let base = format!("bids[id={}]", b.id);
        if !bid_ids.insert(b.id) {
            c.push(&base, "duplicate bid id");
        }
        c.bus(&format!("{base}.bus"), b.bus, n);
        c.finite(&format!("{base}.energy_price"), b.energy_price);
        c.finite(&format!("{base}.reserve_price"), b.reserve_price);
        c.quantities(&base, b.p_min, b.p_max, b.r_max);
    }

    // bid id -> owning area positions
    let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut area_buses = BTreeMap::new();
    for (k, area) in case.areas.iter().enumerate() {
        let base = format!("areas[{}]", k + 1);
        if c.bus(&format!("{base}.bus"), area.bus, n) {
            if let Some(prev) = area_buses.insert(area.bus, k) {
                c.push(&base, format!("bus {} already used by areas[{}]", area.bus, prev + 1));
            }
        }
        if area.bid_ids.is_empty() {
            c.push(format!("{base}.bid_ids"), "must list at least one strategic bid");
        }
        for &id in &area.bid_ids {
            owners.entry(id).or_default().push(k);
            match case.bids.iter().find(|b| b.id == id) {
                None => c.push(format!("{base}.bid_ids"), format!("unknown bid id {id}")),
                Some(b) => {
                    if !b.strategic {
                        c.push(format!("{base}.bid_ids"), format!("bid {id} is not strategic"));
                    }
                    if b.bus != area.bus {
                        c.push(
                            format!("{base}.bid_ids"),
                            format!("bid {id} sits at bus {} but the area is at bus {}", b.bus, area.bus),
                        );
                    }
                }
            }
        }
        for (t, blk) in area.blocks.iter().enumerate() {
            let bb = format!("{base}.blocks[{}]", t + 1);
            c.finite(&format!("{bb}.benefit_price"), blk.benefit_price);
            c.finite(&format!("{bb}.reserve_cost_price"), blk.reserve_cost_price);
            c.nonneg(&format!("{bb}.x_min"), blk.x_min);
            c.finite(&format!("{bb}.x_max"), blk.x_max);
            c.nonneg(&format!("{bb}.y_max"), blk.y_max);
            if blk.x_min > blk.x_max {
                c.push(format!("{bb}.x_min"), format!("x_min {} exceeds x_max {}", blk.x_min, blk.x_max));
            }
        }
    }
    for (&id, ks) in &owners {
        if ks.len() > 1 {
            c.push(format!("bids[id={id}]"), format!("listed by {} pricing areas", ks.len()));
        }
    }
    for b in case.bids.iter().filter(|b| b.strategic) {
        if !owners.contains_key(&b.id) {
            c.push(
                format!("bids[id={}]", b.id),
                format!("strategic bid {} at bus {} belongs to no pricing area", b.id, b.bus),
            );
        }
    }

    let caps = case.caps;
    for (name, v) in [
        ("alpha_min", caps.alpha_min),
        ("alpha_max", caps.alpha_max),
        ("beta_min", caps.beta_min),
        ("beta_max", caps.beta_max),
    ] {
        c.finite(&format!("caps.{name}"), v);
    }
    if caps.alpha_min > caps.alpha_max {
        c.push("caps.alpha_min", "alpha_min exceeds alpha_max");
    }
    if caps.beta_min > caps.beta_max {
        c.push("caps.beta_min", "beta_min exceeds beta_max");
    }

    c.nonneg("reserve_req", case.reserve_req);

    let bm = &case.bigm;
    let mut bigm_vals = vec![("dual".to_string(), Some(bm.dual)), ("primal".to_string(), bm.primal)];
    for g in super::BigMGroup::ALL {
        bigm_vals.push((g.key().to_string(), Some(bm.dual_m(g))));
    }
    for (name, v) in bigm_vals {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                c.push(format!("bigm.{name}"), format!("must be finite and > 0, got {v}"));
            }
        }
    }

    c.out
}

fn connected(case: &Case) -> bool {
    let n = case.network.buses;
    let mut adj = vec![Vec::new(); n];
    for l in &case.network.lines {
        if l.from >= 1 && l.from <= n && l.to >= 1 && l.to <= n {
            adj[l.from - 1].push(l.to - 1);
            adj[l.to - 1].push(l.from - 1);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}
