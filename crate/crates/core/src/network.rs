//! DC injection shifting factors and loss factors.

use serde::{Deserialize, Serialize};

use crate::market::{Case, Line};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NetworkError {
    #[error("network is disconnected: bus {0} cannot reach the slack bus")]
    Disconnected(usize),
    #[error("reduced susceptance matrix is singular")]
    Singular,
    #[error("bad network data: {0}")]
    BadData(String),
}

/// Lines x buses shifting factors, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsfMatrix {
    pub lines: usize,
    pub buses: usize,
    pub slack_bus: usize,
    pub values: Vec<f64>,
}

impl IsfMatrix {
    /// Entry for line position `l` and bus position `i` (both 0-based).
    pub fn get(&self, l: usize, i: usize) -> f64 {
        self.values[l * self.buses + i]
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.values[l * self.buses..(l + 1) * self.buses]
    }

    /// Line flows for a nodal injection vector.
    pub fn flows(&self, injection: &[f64]) -> Vec<f64> {
        (0..self.lines).map(|l| self.row(l).iter().zip(injection).map(|(a, p)| a * p).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFactors(pub Vec<f64>);

pub fn compute_isf(lines: &[Line], n_buses: usize, slack_bus: usize) -> Result<IsfMatrix, NetworkError> {
    if n_buses == 0 || slack_bus == 0 || slack_bus > n_buses {
        return Err(NetworkError::BadData(format!("slack bus {slack_bus} with {n_buses} buses")));
    }
    for l in lines {
        if l.from == 0 || l.from > n_buses || l.to == 0 || l.to > n_buses || l.from == l.to {
            return Err(NetworkError::BadData(format!("line {} endpoints {}-{}", l.id, l.from, l.to)));
        }
        if !(l.reactance > 0.0 && l.reactance.is_finite()) {
            return Err(NetworkError::BadData(format!("line {} reactance {}", l.id, l.reactance)));
        }
    }
    if let Some(bus) = unreachable_bus(lines, n_buses, slack_bus) {
        return Err(NetworkError::Disconnected(bus));
    }

    let s = slack_bus - 1;
    // reduced index of each non-slack bus
    let red: Vec<Option<usize>> = (0..n_buses)
        .map(|i| match i.cmp(&s) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();
    let m = n_buses - 1;
    let mut b = vec![0.0; m * m];
    for l in lines {
        let y = 1.0 / l.reactance;
        let (u, v) = (red[l.from - 1], red[l.to - 1]);
        if let Some(u) = u {
            b[u * m + u] += y;
        }
        if let Some(v) = v {
            b[v * m + v] += y;
        }
        if let (Some(u), Some(v)) = (u, v) {
            b[u * m + v] -= y;
            b[v * m + u] -= y;
        }
    }
    let x = invert(b, m)?;

    // theta of bus i for unit injection at bus j, slack angle 0
    let theta = |i: usize, j: usize| -> f64 {
        match (red[i], red[j]) {
            (Some(a), Some(c)) => x[a * m + c],
            _ => 0.0,
        }
    };
    let mut values = vec![0.0; lines.len() * n_buses];
    for (li, l) in lines.iter().enumerate() {
        for j in 0..n_buses {
            if j == s {
                continue;
            }
            values[li * n_buses + j] = (theta(l.from - 1, j) - theta(l.to - 1, j)) / l.reactance;
        }
    }
    Ok(IsfMatrix { lines: lines.len(), buses: n_buses, slack_bus, values })
}

/// Shifting factors of a case: the override when present, else computed.
pub fn case_isf(case: &Case) -> Result<IsfMatrix, NetworkError> {
    let net = &case.network;
    match &net.isf {
        Some(v) => {
            if v.len() != net.lines.len() * net.buses {
                return Err(NetworkError::BadData("isf override has the wrong shape".into()));
            }
            Ok(IsfMatrix { lines: net.lines.len(), buses: net.buses, slack_bus: net.slack_bus, values: v.clone() })
        }
        None => compute_isf(&net.lines, net.buses, net.slack_bus),
    }
}

pub fn loss_factors(case: &Case) -> LossFactors {
    LossFactors(case.network.loss_factors.clone().unwrap_or_else(|| vec![0.0; case.network.buses]))
}

fn unreachable_bus(lines: &[Line], n: usize, slack: usize) -> Option<usize> {
    let mut adj = vec![Vec::new(); n];
    for l in lines {
        adj[l.from - 1].push(l.to - 1);
        adj[l.to - 1].push(l.from - 1);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![slack - 1];
    seen[slack - 1] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().position(|&s| !s).map(|i| i + 1)
}

/// Gauss-Jordan inverse with partial pivoting of a row-major m x m matrix.
fn invert(mut a: Vec<f64>, m: usize) -> Result<Vec<f64>, NetworkError> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..m {
        let piv = (col..m).max_by(|&p, &q| a[p * m + col].abs().total_cmp(&a[q * m + col].abs())).unwrap();
        if a[piv * m + col].abs() < 1e-12 * scale {
            return Err(NetworkError::Singular);
        }
        if piv != col {
            for k in 0..m {
                a.swap(piv * m + k, col * m + k);
                inv.swap(piv * m + k, col * m + k);
            }
        }
        let p = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[col * m + k];
                inv[r * m + k] -= f * inv[col * m + k];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: usize, from: usize, to: usize, x: f64) -> Line {
        Line { id, from, to, reactance: x, flow_limit: 100.0 }
    }

    #[test]
    fn two_bus_single_path() {
        let isf = compute_isf(&[line(1, 1, 2, 0.1)], 2, 1).unwrap();
        assert_eq!(isf.get(0, 0), 0.0);
        assert!((isf.get(0, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_bus_ring() {
        let lines = [line(1, 1, 2, 1.0), line(2, 2, 3, 1.0), line(3, 1, 3, 1.0)];
        let isf = compute_isf(&lines, 3, 1).unwrap();
        assert!((isf.get(0, 1) + 2.0 / 3.0).abs() < 1e-12);
        for l in 0..3 {
            assert_eq!(isf.get(l, 0), 0.0);
        }
    }

    #[test]
    fn disconnected_rejected() {
        let err = compute_isf(&[line(1, 1, 2, 1.0)], 3, 1).unwrap_err();
        assert_eq!(err, NetworkError::Disconnected(3));
    }
}
