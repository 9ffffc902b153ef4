use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::report::fixed;
use super::HarnessError;
use crate::joint::{solve_joint, JointOptions, JointResult, Variant};
use crate::market::Case;
use crate::optimizer::MilpStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    /// Retail energy price moved away from the optimum, bids re-optimised.
    AlphaOffset,
    /// Every block benefit price shifted, full model re-solved.
    EucBenefitOffset,
    /// Rival energy bids shifted, full model re-solved.
    RivalBidOffset,
}

fn default_variant() -> Variant {
    Variant::Full
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub grid: Vec<f64>,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// Seed used when the sweep input is a generator spec.
    #[serde(default)]
    pub seed: u64,
    /// 1-based areas the offset applies to; all when absent.
    #[serde(default)]
    pub areas: Option<Vec<usize>>,
    /// Alpha sweeps only: hold beta at its optimum as well.
    #[serde(default)]
    pub fix_beta: bool,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let s: SweepSpec = toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    /// `n` evenly spaced offsets from `lo` to `hi`.
    pub fn linspace(target: SweepTarget, lo: f64, hi: f64, n: usize) -> Self {
        let grid = if n <= 1 { vec![lo] } else { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
        Self { target, grid, variant: Variant::Full, seed: 0, areas: None, fix_beta: false }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if self.grid.is_empty() {
            return Err(HarnessError::Spec("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|g| !g.is_finite()) || self.grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(HarnessError::Spec("sweep grid must be finite and sorted".into()));
        }
        if !matches!(self.variant, Variant::Full | Variant::NoReserve) {
            return Err(HarnessError::Spec(format!("sweeps run the full or no-reserve model, not {}", self.variant)));
        }
        Ok(())
    }

    fn applies(&self, k: usize) -> bool {
        self.areas.as_ref().is_none_or(|a| a.contains(&(k + 1)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub offset: f64,
    pub status: Option<MilpStatus>,
    pub result: Option<JointResult>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn profit(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.profit)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Solve at the unperturbed prices (alpha sweeps only).
    pub baseline: Option<JointResult>,
    pub rows: Vec<SweepRow>,
}

pub fn offset_case(case: &Case, spec: &SweepSpec, delta: f64) -> Case {
    let mut c = case.clone();
    match spec.target {
        SweepTarget::AlphaOffset => {}
        SweepTarget::EucBenefitOffset => {
            for (k, area) in c.areas.iter_mut().enumerate() {
                if spec.applies(k) {
                    for b in &mut area.blocks {
                        b.benefit_price += delta;
                    }
                }
            }
        }
        SweepTarget::RivalBidOffset => {
            for b in c.bids.iter_mut().filter(|b| !b.strategic) {
                b.energy_price += delta;
            }
        }
    }
    c
}

fn solve_point(case: &Case, spec: &SweepSpec, opts: &JointOptions, base: Option<&JointResult>, delta: f64) -> SweepRow {
    let mut o = opts.clone();
    let case = offset_case(case, spec, delta);
    if let Some(b) = base {
        let alpha = b.alpha.iter().enumerate().map(|(k, a)| if spec.applies(k) { a + delta } else { *a }).collect();
        o.fixed_alpha = Some(alpha);
        if spec.fix_beta {
            o.fixed_beta = Some(b.beta.clone());
        }
    }
    match solve_joint(&case, spec.variant, &o) {
        Ok(out) => SweepRow { offset: delta, status: Some(out.status), result: out.result, error: None },
        Err(e) => SweepRow { offset: delta, status: None, result: None, error: Some(e.to_string()) },
    }
}

/// Solves every grid point; up to `workers` points run at once and rows
/// come back in grid order.
pub fn run_sweep(
    case: &Case,
    spec: &SweepSpec,
    opts: &JointOptions,
    workers: usize,
) -> Result<SweepOutcome, HarnessError> {
    spec.check()?;
    let baseline = if spec.target == SweepTarget::AlphaOffset {
        let out = solve_joint(case, spec.variant, opts)?;
        Some(out.result.ok_or(HarnessError::NoBaseline(out.status))?)
    } else {
        None
    };
    let n = spec.grid.len();
    if workers <= 1 {
        let rows = spec.grid.iter().map(|&d| solve_point(case, spec, opts, baseline.as_ref(), d)).collect();
        return Ok(SweepOutcome { baseline, rows });
    }
    let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let row = solve_point(case, spec, opts, baseline.as_ref(), spec.grid[i]);
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows = slots.into_inner().unwrap().into_iter().map(|r| r.expect("every grid point solved")).collect();
    Ok(SweepOutcome { baseline, rows })
}

pub fn sweep_csv(rows: &[SweepRow], areas: usize) -> String {
    let mut s = String::from("offset,status,profit,welfare,welfare_total,gap");
    for pre in ["alpha", "beta", "bid_energy", "lmp"] {
        for k in 1..=areas {
            let _ = write!(s, ",{pre}_{k}");
        }
    }
    s.push_str(",error\n");
    for r in rows {
        let status = r.status.map_or("error".to_string(), |st| format!("{st:?}"));
        let _ = write!(s, "{},{status}", fixed(r.offset, 6));
        match &r.result {
            Some(x) => {
                for v in [x.profit, x.welfare, x.welfare_total] {
                    let _ = write!(s, ",{}", fixed(v, 6));
                }
                let _ = write!(s, ",{:.3e}", x.gap);
                let bid: Vec<f64> = (0..areas)
                    .map(|k| x.bids.iter().find(|b| b.area == k).map_or(f64::NAN, |b| b.energy_price))
                    .collect();
                for col in [&x.alpha, &x.beta, &bid, &x.pi] {
                    for v in col.iter() {
                        let _ = write!(s, ",{}", fixed(*v, 6));
                    }
                }
            }
            None => s.push_str(&",".repeat(4 + 4 * areas)),
        }
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(s, ",{err}");
    }
    s
}
