use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{build_joint_milp, extract_decision, JointError, JointModel, JointResult, LinExpr, Variant};
use crate::market::{BigMGroup, Case};
use crate::optimizer::lp::solve_lp_with;
use crate::optimizer::simplex::SimplexOptions;
use crate::optimizer::{
    check_kkt_residuals, solve_milp, KktReport, LpStatus, MilpOptions, MilpSolution, MilpStatus, RoundingRule,
    RowSense, Sense, VarKind,
};

#[derive(Debug, Clone)]
pub struct JointOptions {
    pub milp: MilpOptions,
    /// Pin every area's energy price.
    pub fixed_alpha: Option<Vec<f64>>,
    pub fixed_beta: Option<Vec<f64>>,
    pub kkt_tol: f64,
    pub rounding_heuristic: bool,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            milp: MilpOptions::default(),
            fixed_alpha: None,
            fixed_beta: None,
            kkt_tol: 1e-6,
            rounding_heuristic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturatedDual {
    pub pair: String,
    pub group: BigMGroup,
    pub value: f64,
    pub m_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRound {
    /// Dual-side M per group for this round.
    pub dual_m: Vec<(BigMGroup, f64)>,
    pub saturated: Vec<SaturatedDual>,
    pub objective: f64,
    /// Saturation was removed by re-solving the duals with binaries fixed.
    pub settled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BigMAudit {
    pub rounds: Vec<AuditRound>,
    /// No dual sits at its M in the accepted solution.
    pub clean: bool,
}

#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub status: MilpStatus,
    pub result: Option<JointResult>,
    pub milp: MilpSolution,
    pub kkt: Option<KktReport>,
    pub audit: BigMAudit,
    /// Model of the last round.
    pub model: JointModel,
}

struct SlackSign {
    pairs: Vec<(usize, usize, LinExpr, f64, f64)>,
}

impl RoundingRule for SlackSign {
    fn round(&self, x: &[f64]) -> Vec<(usize, f64)> {
        self.pairs
            .iter()
            .map(|(z, u, s, m_s, m_u)| {
                let dual = x[*u] / m_u;
                let slack = s.eval(x).max(0.0) / m_s;
                (*z, if dual >= slack { 1.0 } else { 0.0 })
            })
            .collect()
    }
}

pub fn rounding_rule(jm: &JointModel) -> Arc<dyn RoundingRule> {
    Arc::new(SlackSign { pairs: jm.pairs.iter().map(|p| (p.binary, p.dual, p.slack.clone(), p.m_s, p.m_u)).collect() })
}

fn pin(jm: &mut JointModel, opts: &JointOptions) -> Result<(), JointError> {
    for (name, vals, cols) in
        [("alpha", &opts.fixed_alpha, jm.vars.alpha.clone()), ("beta", &opts.fixed_beta, jm.vars.beta.clone())]
    {
        if let Some(vals) = vals {
            if vals.len() != cols.len() {
                return Err(JointError::Check(format!("{} fixed {name} values for {} areas", vals.len(), cols.len())));
            }
            for (&j, &v) in cols.iter().zip(vals) {
                jm.model.vars[j].lower = v;
                jm.model.vars[j].upper = v;
            }
        }
    }
    Ok(())
}

fn saturated_duals(jm: &JointModel, x: &[f64]) -> Vec<SaturatedDual> {
    jm.pairs
        .iter()
        .filter(|p| x[p.dual] >= p.m_u * (1.0 - 1e-9))
        .map(|p| SaturatedDual { pair: p.name.clone(), group: p.group, value: x[p.dual], m_u: p.m_u })
        .collect()
}

/// With the binaries held, looks for the smallest duals that keep the
/// objective. Degenerate duals can then leave their bounds.
fn settle_duals(jm: &JointModel, x: &[f64], objective: f64) -> Option<Vec<f64>> {
    let mut m = jm.model.clone();
    for (j, v) in m.vars.iter_mut().enumerate() {
        if v.kind == VarKind::Binary {
            v.kind = VarKind::Continuous;
            v.lower = x[j].round();
            v.upper = v.lower;
        }
    }
    for p in &jm.pairs {
        if x[p.binary] < 0.5 {
            m.vars[p.dual].upper = 0.0;
        }
    }
    let tol = 1e-9 * (1.0 + objective.abs());
    let terms: Vec<(usize, f64)> =
        m.objective.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (j, c)).collect();
    match m.sense {
        Sense::Maximize => m.add_row("keep_obj", terms, RowSense::Ge, objective - m.obj_constant - tol),
        Sense::Minimize => m.add_row("keep_obj", terms, RowSense::Le, objective - m.obj_constant + tol),
    };
    m.sense = Sense::Minimize;
    m.obj_constant = 0.0;
    m.objective.iter_mut().for_each(|c| *c = 0.0);
    for p in &jm.pairs {
        m.objective[p.dual] += 1.0 / p.m_u;
    }
    let lp = solve_lp_with(&m, SimplexOptions { fixed_tol: 1e-11, ..SimplexOptions::default() }).ok()?;
    if lp.status != LpStatus::Optimal {
        return None;
    }
    let mut y = lp.x;
    y.truncate(jm.model.num_vars());
    for j in jm.model.binaries() {
        y[j] = x[j].round();
    }
    (jm.model.max_violation(&y) <= 1e-6).then_some(y)
}

/// Builds and solves the joint model, doubling the dual-side M of any group
/// whose dual ends at its bound, then reads back and checks the decision.
pub fn solve_joint(case: &Case, variant: Variant, opts: &JointOptions) -> Result<JointOutcome, JointError> {
    let mut case = case.clone();
    let mut audit = BigMAudit::default();
    let max_rounds = case.bigm.max_doublings;
    let mut round = 0;
    loop {
        let mut jm = build_joint_milp(&case, variant)?;
        pin(&mut jm, opts)?;
        let mut mopts = opts.milp.clone();
        if opts.rounding_heuristic && mopts.rounding.is_none() {
            mopts.rounding = Some(rounding_rule(&jm));
        }
        let sol = solve_milp(&jm.model, &mopts)?;
        let dual_m: Vec<(BigMGroup, f64)> = BigMGroup::ALL.iter().map(|&g| (g, case.bigm.dual_m(g))).collect();
        let Some(x) = sol.x.clone() else {
            audit.rounds.push(AuditRound { dual_m, saturated: vec![], objective: f64::NAN, settled: false });
            return Ok(JointOutcome { status: sol.status, result: None, milp: sol, kkt: None, audit, model: jm });
        };
        let mut x = x;
        let mut sol = sol;
        let mut saturated = saturated_duals(&jm, &x);
        let mut settled = false;
        if !saturated.is_empty() {
            if let Some(y) = settle_duals(&jm, &x, sol.objective) {
                if saturated_duals(&jm, &y).is_empty() {
                    log::info!("{} saturated duals settled with binaries fixed", saturated.len());
                    x = y;
                    sol.x = Some(x.clone());
                    saturated.clear();
                    settled = true;
                }
            }
        }
        audit.rounds.push(AuditRound { dual_m, saturated: saturated.clone(), objective: sol.objective, settled });
        if saturated.is_empty() || round >= max_rounds {
            audit.clean = saturated.is_empty();
            let result = extract_decision(&jm, &x, sol.gap)?;
            let kkt = check_kkt_residuals(
                &jm.case,
                &result.bid_prices,
                &result.clearing,
                &result.alpha,
                &result.beta,
                &result.responses,
                opts.kkt_tol,
            )
            .map_err(|e| JointError::Check(e.to_string()))?;
            return Ok(JointOutcome {
                status: sol.status,
                result: Some(result),
                milp: sol,
                kkt: Some(kkt),
                audit,
                model: jm,
            });
        }
        let mut groups: Vec<BigMGroup> = saturated.iter().map(|s| s.group).collect();
        groups.dedup();
        for g in BigMGroup::ALL {
            if groups.contains(&g) {
                let m = case.bigm.dual_m(g);
                case.bigm.set_dual_m(g, 2.0 * m);
                log::info!("dual {} at its bound {m}; doubling M for group {}", saturated[0].pair, g.key());
            }
        }
        round += 1;
    }
}
