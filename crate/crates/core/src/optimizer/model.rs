//! Generic linear / mixed-binary model shared by the LP engine, the
//! branch-and-bound driver and the MPS writer.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            RowSense::Le => (act - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - act).max(0.0),
            RowSense::Eq => (act - self.rhs).abs(),
        }
    }

    /// Row as a range `lo <= a.x <= hi`.
    pub fn range(&self) -> (f64, f64) {
        match self.sense {
            RowSense::Le => (f64::NEG_INFINITY, self.rhs),
            RowSense::Ge => (self.rhs, f64::INFINITY),
            RowSense::Eq => (self.rhs, self.rhs),
        }
    }
}

/// A linear program with optional binary columns.
///
/// The objective is `obj_constant + sum_j objective[j] * x[j]`, optimised in
/// direction `sense`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<f64>,
    pub obj_constant: f64,
}

impl Model {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self { name: name.into(), sense, vars: Vec::new(), rows: Vec::new(), objective: Vec::new(), obj_constant: 0.0 }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.push_var(name.into(), lower, upper, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.push_var(name.into(), 0.0, 1.0, VarKind::Binary)
    }

    fn push_var(&mut self, name: String, lower: f64, upper: f64, kind: VarKind) -> usize {
        self.vars.push(Variable { name, lower, upper, kind });
        self.objective.push(0.0);
        self.vars.len() - 1
    }

    /// Adds a row; duplicate column entries are merged and zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        let coeffs = merge_terms(coeffs);
        self.rows.push(Row { name: name.into(), coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_objective_term(&mut self, var: usize, coeff: f64) {
        self.objective[var] += coeff;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn binaries(&self) -> Vec<usize> {
        self.vars.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(j, _)| j).collect()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn find_var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds =
            self.vars.iter().zip(x).map(|(v, &val)| (v.lower - val).max(val - v.upper).max(0.0)).fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Largest distance of a binary column from {0, 1}.
    pub fn max_integrality_violation(&self, x: &[f64]) -> f64 {
        self.binaries().into_iter().map(|j| (x[j] - x[j].round()).abs()).fold(0.0, f64::max)
    }
}

/// Merges duplicate indices and drops exact zeros, keeping first-seen order.
pub fn merge_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (j, a) in terms {
        if let Some(slot) = out.iter_mut().find(|(k, _)| *k == j) {
            slot.1 += a;
        } else {
            out.push((j, a));
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_drops_cancelled_terms() {
        let t = merge_terms([(0, 1.0), (1, 2.0), (0, -1.0), (2, 0.0)]);
        assert_eq!(t, vec![(1, 2.0)]);
    }

    #[test]
    fn violation_by_sense() {
        let mut m = Model::new("t", Sense::Minimize);
        let x = m.add_var("x", 0.0, 10.0);
        m.add_row("le", [(x, 1.0)], RowSense::Le, 3.0);
        m.add_row("eq", [(x, 2.0)], RowSense::Eq, 4.0);
        assert_eq!(m.rows[0].violation(&[5.0]), 2.0);
        assert_eq!(m.rows[1].violation(&[5.0]), 6.0);
        assert_eq!(m.max_violation(&[11.0]), 18.0);
    }
}
