//! Single-level MILP for joint bidding and retail pricing: both lower
//! problems enter through their KKT systems, complementarity is linearised
//! with big-M binaries and the bilinear profit through strong duality.

mod extract;
mod solve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::market::{BigMGroup, BigMPolicy, Case};
use crate::network::NetworkError;
use crate::optimizer::{Model, RowSense, Sense};
use crate::wem::Grid;

pub use extract::{extract_decision, JointResult, StrategicBid};
pub use solve::{solve_joint, BigMAudit, JointOptions, JointOutcome, SaturatedDual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Full,
    Nonprofit,
    EqualPrice,
    NoReserve,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::Nonprofit, Variant::EqualPrice, Variant::NoReserve];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Nonprofit => "nonprofit",
            Variant::EqualPrice => "equal-price",
            Variant::NoReserve => "no-reserve",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = JointError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "full" => Ok(Variant::Full),
            "nonprofit" | "non-profit" => Ok(Variant::Nonprofit),
            "equal-price" => Ok(Variant::EqualPrice),
            "no-reserve" => Ok(Variant::NoReserve),
            _ => Err(JointError::InvalidVariant(s.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum JointError {
    #[error("unknown variant {0:?} (expected full, nonprofit, equal-price or no-reserve)")]
    InvalidVariant(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("big-M for {pair} must be positive, got {value}")]
    NonPositiveBigM { pair: String, value: f64 },
    #[error("case has no pricing areas")]
    NoAreas,
    #[error("profit identity broken: linear {linear} vs bilinear {bilinear}{}", fmt_suspects(.suspects))]
    IdentityMismatch { linear: f64, bilinear: f64, suspects: Vec<String> },
    #[error("solution check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Solver(#[from] crate::optimizer::SolverError),
    #[error(transparent)]
    Clearing(#[from] crate::wem::ClearingError),
}

fn fmt_suspects(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (suspect pairs: {})", s.join(", "))
    }
}

/// Column indices of every named quantity in the joint model.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct JointVars {
    pub p_g: Vec<usize>,
    pub r_g: Vec<usize>,
    pub p_d: Vec<usize>,
    pub r_d: Vec<usize>,
    pub lambda: usize,
    pub mu_lo: Vec<usize>,
    pub mu_hi: Vec<usize>,
    pub nu: usize,
    pub rho_g_lo: Vec<usize>,
    pub rho_g_hi: Vec<usize>,
    pub eta_g_lo: Vec<usize>,
    pub eta_g_hi: Vec<usize>,
    pub rho_d_lo: Vec<usize>,
    pub rho_d_hi: Vec<usize>,
    pub eta_d_lo: Vec<usize>,
    pub eta_d_hi: Vec<usize>,
    /// Bid price columns, present for strategic bids only.
    pub a_d: Vec<Option<usize>>,
    pub b_d: Vec<Option<usize>>,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub x: Vec<Vec<usize>>,
    pub y: Vec<Vec<usize>>,
    pub gamma_lo: Vec<Vec<usize>>,
    pub gamma_hi: Vec<Vec<usize>>,
    pub zeta_lo: Vec<Vec<usize>>,
    pub zeta_hi: Vec<Vec<usize>>,
}

/// Affine expression `terms . x + constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }

    /// Largest value over the variable boxes of `model`.
    pub fn box_max(&self, model: &Model) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(j, a)| {
                    let v = &model.vars[j];
                    if a > 0.0 {
                        a * v.upper
                    } else {
                        a * v.lower
                    }
                })
                .sum::<f64>()
    }
}

/// A complementarity condition `slack >= 0, dual >= 0, slack * dual = 0`
/// before linearisation.
#[derive(Debug, Clone)]
pub struct Complementarity {
    pub name: String,
    pub group: BigMGroup,
    pub slack: LinExpr,
    /// Known upper bound on the slack beyond the variable boxes.
    pub slack_cap: Option<f64>,
    pub dual: usize,
}

/// Linearised pair: `slack <= m_s (1 - z)` and `dual <= m_u z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRecord {
    pub name: String,
    pub group: BigMGroup,
    pub slack: LinExpr,
    pub dual: usize,
    pub binary: usize,
    pub m_s: f64,
    pub m_u: f64,
}

/// The assembled MILP with enough bookkeeping to read solutions back.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub model: Model,
    pub vars: JointVars,
    pub pairs: Vec<PairRecord>,
    /// Case as modelled (the no-reserve variant zeroes reserve data).
    pub case: Case,
    pub variant: Variant,
    pub grid: Grid,
}

/// Smallest primal-side M used when the slack is identically zero.
pub const MIN_PRIMAL_BIGM: f64 = 1.0;

/// Case with reserve removed: no requirement, no reserve capacity anywhere.
pub fn strip_reserve(case: &Case) -> Case {
    let mut c = case.clone();
    c.reserve_req = 0.0;
    for g in &mut c.gens {
        g.r_max = 0.0;
    }
    for b in &mut c.bids {
        b.r_max = 0.0;
    }
    for a in &mut c.areas {
        for blk in &mut a.blocks {
            blk.y_max = 0.0;
        }
    }
    c
}

struct Builder<'a> {
    case: &'a Case,
    grid: &'a Grid,
    m: Model,
    v: JointVars,
    comps: Vec<Complementarity>,
}

/// Nodal price at `bus` as an affine function of the clearing duals.
fn pi_terms(grid: &Grid, v: &JointVars, bus: usize) -> Vec<(usize, f64)> {
    let (b, psi) = grid.injection(bus);
    let mut t = vec![(v.lambda, b)];
    for (l, a) in psi.into_iter().enumerate() {
        if a != 0.0 {
            t.push((v.mu_lo[l], a));
            t.push((v.mu_hi[l], -a));
        }
    }
    t
}

impl<'a> Builder<'a> {
    fn dual(&mut self, name: String, group: BigMGroup, policy: &BigMPolicy) -> usize {
        self.m.add_var(name, 0.0, policy.dual_m(group))
    }

    fn comp(&mut self, name: String, group: BigMGroup, terms: Vec<(usize, f64)>, constant: f64, dual: usize) {
        self.comps.push(Complementarity { name, group, slack: LinExpr { terms, constant }, slack_cap: None, dual });
    }
}

/// WEM primal columns, primal feasibility rows, dual columns, stationarity
/// rows and complementarity pairs. Strategic bid prices become columns.
fn assemble_wem_kkt(b: &mut Builder<'_>) {
    let case = b.case;
    let policy = &case.bigm;
    let nl = case.num_lines();

    for o in &case.gens {
        let p = b.m.add_var(format!("pg_{}", o.id), o.p_min, o.p_max);
        b.v.p_g.push(p);
    }
    for o in &case.gens {
        let r = b.m.add_var(format!("rg_{}", o.id), 0.0, o.r_max.min(o.p_max - o.p_min));
        b.v.r_g.push(r);
    }
    for bid in &case.bids {
        let p = b.m.add_var(format!("pd_{}", bid.id), bid.p_min, bid.p_max);
        b.v.p_d.push(p);
    }
    for bid in &case.bids {
        let r = b.m.add_var(format!("rd_{}", bid.id), 0.0, bid.r_max.min(bid.p_max - bid.p_min));
        b.v.r_d.push(r);
    }

    b.v.lambda = b.m.add_var("lambda", f64::NEG_INFINITY, f64::INFINITY);
    for line in &case.network.lines {
        let lo = b.dual(format!("mulo_{}", line.id), BigMGroup::Flow, policy);
        let hi = b.dual(format!("muhi_{}", line.id), BigMGroup::Flow, policy);
        b.v.mu_lo.push(lo);
        b.v.mu_hi.push(hi);
    }
    b.v.nu = b.dual("nu".into(), BigMGroup::Reserve, policy);
    for o in &case.gens {
        let id = o.id;
        let v = b.dual(format!("rhoglo_{id}"), BigMGroup::GenEnergy, policy);
        b.v.rho_g_lo.push(v);
        let v = b.dual(format!("rhoghi_{id}"), BigMGroup::GenEnergy, policy);
        b.v.rho_g_hi.push(v);
        let v = b.dual(format!("etaglo_{id}"), BigMGroup::GenReserve, policy);
        b.v.eta_g_lo.push(v);
        let v = b.dual(format!("etaghi_{id}"), BigMGroup::GenReserve, policy);
        b.v.eta_g_hi.push(v);
    }
    for bid in &case.bids {
        let id = bid.id;
        let v = b.dual(format!("rhodlo_{id}"), BigMGroup::BidEnergy, policy);
        b.v.rho_d_lo.push(v);
        let v = b.dual(format!("rhodhi_{id}"), BigMGroup::BidEnergy, policy);
        b.v.rho_d_hi.push(v);
        let v = b.dual(format!("etadlo_{id}"), BigMGroup::BidReserve, policy);
        b.v.eta_d_lo.push(v);
        let v = b.dual(format!("etadhi_{id}"), BigMGroup::BidReserve, policy);
        b.v.eta_d_hi.push(v);
    }
    for bid in &case.bids {
        if bid.strategic {
            let a = b.m.add_var(format!("ad_{}", bid.id), f64::NEG_INFINITY, f64::INFINITY);
            let r = b.m.add_var(format!("bd_{}", bid.id), f64::NEG_INFINITY, f64::INFINITY);
            b.v.a_d.push(Some(a));
            b.v.b_d.push(Some(r));
        } else {
            b.v.a_d.push(None);
            b.v.b_d.push(None);
        }
    }

    // primal feasibility
    let mut balance = Vec::new();
    let mut flows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nl];
    for (i, o) in case.gens.iter().enumerate() {
        let (bc, psi) = b.grid.injection(o.bus);
        balance.push((b.v.p_g[i], bc));
        for (row, a) in flows.iter_mut().zip(psi) {
            row.push((b.v.p_g[i], a));
        }
    }
    for (j, bid) in case.bids.iter().enumerate() {
        let (bc, psi) = b.grid.injection(bid.bus);
        balance.push((b.v.p_d[j], -bc));
        for (row, a) in flows.iter_mut().zip(psi) {
            row.push((b.v.p_d[j], -a));
        }
    }
    b.m.add_row("balance", balance, RowSense::Eq, 0.0);
    for (l, line) in case.network.lines.iter().enumerate() {
        let f = crate::optimizer::model::merge_terms(flows[l].clone());
        let fbar = line.flow_limit;
        b.m.add_row(format!("flo_{}", line.id), f.clone(), RowSense::Ge, -fbar);
        b.m.add_row(format!("fhi_{}", line.id), f.clone(), RowSense::Le, fbar);
        let neg: Vec<(usize, f64)> = f.iter().map(|&(j, a)| (j, -a)).collect();
        let lo_name = format!("flo_{}", line.id);
        let hi_name = format!("fhi_{}", line.id);
        b.comps.push(Complementarity {
            name: lo_name,
            group: BigMGroup::Flow,
            slack: LinExpr { terms: f, constant: fbar },
            slack_cap: Some(2.0 * fbar),
            dual: b.v.mu_lo[l],
        });
        b.comps.push(Complementarity {
            name: hi_name,
            group: BigMGroup::Flow,
            slack: LinExpr { terms: neg, constant: fbar },
            slack_cap: Some(2.0 * fbar),
            dual: b.v.mu_hi[l],
        });
    }
    let reserve: Vec<(usize, f64)> = b.v.r_g.iter().chain(&b.v.r_d).map(|&j| (j, 1.0)).collect();
    b.m.add_row("reserve", reserve.clone(), RowSense::Ge, case.reserve_req);
    let nu = b.v.nu;
    b.comp("res".into(), BigMGroup::Reserve, reserve, -case.reserve_req, nu);

    for (i, o) in case.gens.iter().enumerate() {
        let (p, r) = (b.v.p_g[i], b.v.r_g[i]);
        b.m.add_row(format!("gcap_{}", o.id), [(p, 1.0), (r, 1.0)], RowSense::Le, o.p_max);
        let id = o.id;
        let duals = (b.v.rho_g_lo[i], b.v.rho_g_hi[i], b.v.eta_g_lo[i], b.v.eta_g_hi[i]);
        b.comp(format!("gplo_{id}"), BigMGroup::GenEnergy, vec![(p, 1.0)], -o.p_min, duals.0);
        b.comp(format!("gphi_{id}"), BigMGroup::GenEnergy, vec![(p, -1.0), (r, -1.0)], o.p_max, duals.1);
        b.comp(format!("grlo_{id}"), BigMGroup::GenReserve, vec![(r, 1.0)], 0.0, duals.2);
        b.comp(format!("grhi_{id}"), BigMGroup::GenReserve, vec![(r, -1.0)], o.r_max, duals.3);
    }
    for (j, bid) in case.bids.iter().enumerate() {
        let (p, r) = (b.v.p_d[j], b.v.r_d[j]);
        b.m.add_row(format!("dfloor_{}", bid.id), [(p, 1.0), (r, -1.0)], RowSense::Ge, bid.p_min);
        let id = bid.id;
        let duals = (b.v.rho_d_lo[j], b.v.rho_d_hi[j], b.v.eta_d_lo[j], b.v.eta_d_hi[j]);
        b.comp(format!("dplo_{id}"), BigMGroup::BidEnergy, vec![(p, 1.0), (r, -1.0)], -bid.p_min, duals.0);
        b.comp(format!("dphi_{id}"), BigMGroup::BidEnergy, vec![(p, -1.0)], bid.p_max, duals.1);
        b.comp(format!("drlo_{id}"), BigMGroup::BidReserve, vec![(r, 1.0)], 0.0, duals.2);
        b.comp(format!("drhi_{id}"), BigMGroup::BidReserve, vec![(r, -1.0)], bid.r_max, duals.3);
    }

    // stationarity
    for (i, o) in case.gens.iter().enumerate() {
        let mut t = pi_terms(b.grid, &b.v, o.bus);
        t.push((b.v.rho_g_lo[i], 1.0));
        t.push((b.v.rho_g_hi[i], -1.0));
        b.m.add_row(format!("st_pg_{}", o.id), t, RowSense::Eq, o.energy_price);
        let t = vec![(b.v.nu, -1.0), (b.v.rho_g_hi[i], 1.0), (b.v.eta_g_lo[i], -1.0), (b.v.eta_g_hi[i], 1.0)];
        b.m.add_row(format!("st_rg_{}", o.id), t, RowSense::Eq, -o.reserve_price);
    }
    for (j, bid) in case.bids.iter().enumerate() {
        let mut t = pi_terms(b.grid, &b.v, bid.bus);
        t.push((b.v.rho_d_lo[j], -1.0));
        t.push((b.v.rho_d_hi[j], 1.0));
        let rhs = match b.v.a_d[j] {
            Some(a) => {
                t.push((a, -1.0));
                0.0
            }
            None => bid.energy_price,
        };
        b.m.add_row(format!("st_pd_{}", bid.id), t, RowSense::Eq, rhs);
        let mut t = vec![(b.v.nu, -1.0), (b.v.rho_d_lo[j], 1.0), (b.v.eta_d_lo[j], -1.0), (b.v.eta_d_hi[j], 1.0)];
        let rhs = match b.v.b_d[j] {
            Some(r) => {
                t.push((r, 1.0));
                0.0
            }
            None => -bid.reserve_price,
        };
        b.m.add_row(format!("st_rd_{}", bid.id), t, RowSense::Eq, rhs);
    }
}

/// Price columns, EUC primal and dual columns, stationarity, primal rows
/// and complementarity pairs for every area.
fn assemble_euc_kkt(b: &mut Builder<'_>) {
    let case = b.case;
    let policy = &case.bigm;
    let caps = case.caps;
    for (k, area) in case.areas.iter().enumerate() {
        let kk = k + 1;
        let alpha = b.m.add_var(format!("alpha_{kk}"), caps.alpha_min, caps.alpha_max);
        let beta = b.m.add_var(format!("beta_{kk}"), caps.beta_min, caps.beta_max);
        b.v.alpha.push(alpha);
        b.v.beta.push(beta);
        let (mut xs, mut ys, mut gl, mut gh, mut zl, mut zh) = (vec![], vec![], vec![], vec![], vec![], vec![]);
        for (t, blk) in area.blocks.iter().enumerate() {
            let tt = t + 1;
            let x = b.m.add_var(format!("x_{kk}_{tt}"), blk.x_min, blk.x_max);
            let y = b.m.add_var(format!("y_{kk}_{tt}"), 0.0, blk.y_max.min(blk.x_max - blk.x_min));
            let g_lo = b.dual(format!("gamlo_{kk}_{tt}"), BigMGroup::EucEnergy, policy);
            let g_hi = b.dual(format!("gamhi_{kk}_{tt}"), BigMGroup::EucEnergy, policy);
            let z_lo = b.dual(format!("zetlo_{kk}_{tt}"), BigMGroup::EucReserve, policy);
            let z_hi = b.dual(format!("zethi_{kk}_{tt}"), BigMGroup::EucReserve, policy);
            b.m.add_row(format!("xcpl_{kk}_{tt}"), [(x, 1.0), (y, -1.0)], RowSense::Ge, blk.x_min);
            // gamma_hi - gamma_lo = c - alpha
            b.m.add_row(
                format!("st_x_{kk}_{tt}"),
                [(g_hi, 1.0), (g_lo, -1.0), (alpha, 1.0)],
                RowSense::Eq,
                blk.benefit_price,
            );
            // zeta_hi - zeta_lo = beta - d - gamma_lo
            b.m.add_row(
                format!("st_y_{kk}_{tt}"),
                [(z_hi, 1.0), (z_lo, -1.0), (g_lo, 1.0), (beta, -1.0)],
                RowSense::Eq,
                -blk.reserve_cost_price,
            );
            xs.push(x);
            ys.push(y);
            gl.push(g_lo);
            gh.push(g_hi);
            zl.push(z_lo);
            zh.push(z_hi);
        }
        for t in 0..area.blocks.len() {
            let blk = &area.blocks[t];
            let tt = t + 1;
            b.comp(
                format!("xlo_{kk}_{tt}"),
                BigMGroup::EucEnergy,
                vec![(xs[t], 1.0), (ys[t], -1.0)],
                -blk.x_min,
                gl[t],
            );
            b.comp(format!("xhi_{kk}_{tt}"), BigMGroup::EucEnergy, vec![(xs[t], -1.0)], blk.x_max, gh[t]);
            b.comp(format!("ylo_{kk}_{tt}"), BigMGroup::EucReserve, vec![(ys[t], 1.0)], 0.0, zl[t]);
            b.comp(format!("yhi_{kk}_{tt}"), BigMGroup::EucReserve, vec![(ys[t], -1.0)], blk.y_max, zh[t]);
        }
        b.v.x.push(xs);
        b.v.y.push(ys);
        b.v.gamma_lo.push(gl);
        b.v.gamma_hi.push(gh);
        b.v.zeta_lo.push(zl);
        b.v.zeta_hi.push(zh);
    }
}

/// LSE balances: purchases equal retail sales per area, for energy and
/// reserve.
fn add_lse_balances(b: &mut Builder<'_>) {
    let case = b.case;
    for k in 0..case.areas.len() {
        let bids = case.area_bids(k);
        let mut e: Vec<(usize, f64)> = bids.iter().map(|&j| (b.v.p_d[j], 1.0)).collect();
        e.extend(b.v.x[k].iter().map(|&x| (x, -1.0)));
        b.m.add_row(format!("ebal_{}", k + 1), e, RowSense::Eq, 0.0);
        let mut r: Vec<(usize, f64)> = bids.iter().map(|&j| (b.v.r_d[j], 1.0)).collect();
        r.extend(b.v.y[k].iter().map(|&y| (y, -1.0)));
        b.m.add_row(format!("rbal_{}", k + 1), r, RowSense::Eq, 0.0);
    }
}

/// Adds `slack + m_s z <= m_s` and `dual - m_u z <= 0` per pair.
pub fn linearize_complementarity(
    model: &mut Model,
    pairs: Vec<Complementarity>,
    policy: &BigMPolicy,
) -> Result<Vec<PairRecord>, JointError> {
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let idle = p.slack.box_max(model) <= 0.0;
        let m_s = match policy.primal {
            Some(v) => v,
            None => {
                let mut ms = p.slack.box_max(model);
                if let Some(cap) = p.slack_cap {
                    ms = ms.min(cap);
                }
                if ms <= 0.0 {
                    MIN_PRIMAL_BIGM
                } else {
                    ms
                }
            }
        };
        let m_u = model.vars[p.dual].upper;
        for (what, v) in [("slack", m_s), ("dual", m_u)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(JointError::NonPositiveBigM { pair: format!("{} ({what})", p.name), value: v });
            }
        }
        let z = model.add_binary(format!("z_{}", p.name));
        if idle {
            // slack can never open, so the dual side loses nothing
            model.vars[z].lower = 1.0;
        }
        let mut row = p.slack.terms.clone();
        row.push((z, m_s));
        model.add_row(format!("cs_{}", p.name), row, RowSense::Le, m_s - p.slack.constant);
        model.add_row(format!("cd_{}", p.name), [(p.dual, 1.0), (z, -m_u)], RowSense::Le, 0.0);
        out.push(PairRecord { name: p.name, group: p.group, slack: p.slack, dual: p.dual, binary: z, m_s, m_u });
    }
    Ok(out)
}

/// Linear LSE profit: area revenue through EUC strong duality plus the
/// wholesale payments through clearing strong duality.
pub fn build_objective(case: &Case, v: &JointVars) -> Vec<(usize, f64)> {
    let mut t = Vec::new();
    for (k, area) in case.areas.iter().enumerate() {
        for (i, blk) in area.blocks.iter().enumerate() {
            t.push((v.x[k][i], blk.benefit_price));
            t.push((v.y[k][i], -blk.reserve_cost_price));
            t.push((v.gamma_lo[k][i], blk.x_min));
            t.push((v.gamma_hi[k][i], -blk.x_max));
            t.push((v.zeta_hi[k][i], -blk.y_max));
        }
    }
    for (j, bid) in case.bids.iter().enumerate() {
        if !bid.strategic {
            t.push((v.p_d[j], bid.energy_price));
            t.push((v.r_d[j], -bid.reserve_price));
        }
    }
    for (i, o) in case.gens.iter().enumerate() {
        t.push((v.p_g[i], -o.energy_price));
        t.push((v.r_g[i], -o.reserve_price));
        t.push((v.rho_g_lo[i], o.p_min));
        t.push((v.rho_g_hi[i], -o.p_max));
        t.push((v.eta_g_hi[i], -o.r_max));
    }
    for (l, line) in case.network.lines.iter().enumerate() {
        t.push((v.mu_lo[l], -line.flow_limit));
        t.push((v.mu_hi[l], -line.flow_limit));
    }
    t.push((v.nu, case.reserve_req));
    for (j, bid) in case.bids.iter().enumerate() {
        t.push((v.rho_d_lo[j], bid.p_min));
        t.push((v.rho_d_hi[j], -bid.p_max));
        t.push((v.eta_d_hi[j], -bid.r_max));
        if bid.strategic {
            t.push((v.rho_d_lo[j], -bid.p_min));
            t.push((v.rho_d_hi[j], bid.p_max));
            t.push((v.eta_d_hi[j], bid.r_max));
        }
    }
    crate::optimizer::model::merge_terms(t)
}

/// The case the variant's model is built on.
pub fn variant_case(case: &Case, variant: Variant) -> Case {
    match variant {
        Variant::NoReserve => strip_reserve(case),
        _ => case.clone(),
    }
}

pub fn build_joint_milp(case: &Case, variant: Variant) -> Result<JointModel, JointError> {
    if case.areas.is_empty() {
        return Err(JointError::NoAreas);
    }
    let case = variant_case(case, variant);
    let grid = Grid::new(&case)?;
    let mut b = Builder {
        case: &case,
        grid: &grid,
        m: Model::new(format!("joint-{variant}"), Sense::Maximize),
        v: JointVars::default(),
        comps: Vec::new(),
    };
    assemble_wem_kkt(&mut b);
    assemble_euc_kkt(&mut b);
    add_lse_balances(&mut b);

    match variant {
        Variant::Nonprofit => {
            for (k, area) in case.areas.iter().enumerate() {
                let mut t = pi_terms(&grid, &b.v, area.bus);
                for e in &mut t {
                    e.1 = -e.1;
                }
                t.push((b.v.alpha[k], 1.0));
                b.m.add_row(format!("np_alpha_{}", k + 1), t, RowSense::Eq, 0.0);
                b.m.add_row(format!("np_beta_{}", k + 1), [(b.v.beta[k], 1.0), (b.v.nu, -1.0)], RowSense::Eq, 0.0);
            }
        }
        Variant::EqualPrice => {
            for k in 1..case.areas.len() {
                let (a0, a1) = (b.v.alpha[k - 1], b.v.alpha[k]);
                b.m.add_row(format!("eq_alpha_{}", k + 1), [(a0, 1.0), (a1, -1.0)], RowSense::Eq, 0.0);
            }
        }
        Variant::Full | Variant::NoReserve => {}
    }

    for (j, c) in build_objective(&case, &b.v) {
        b.m.add_objective_term(j, c);
    }
    let comps = std::mem::take(&mut b.comps);
    let mut model = b.m;
    let pairs = linearize_complementarity(&mut model, comps, &case.bigm)?;
    let vars = b.v;
    Ok(JointModel { model, vars, pairs, case: case.clone(), variant, grid })
}

impl JointModel {
    /// Area energy price `pi` at the area's bus as an affine expression.
    pub fn lmp_terms(&self, k: usize) -> Vec<(usize, f64)> {
        pi_terms(&self.grid, &self.vars, self.case.areas[k].bus)
    }
}
