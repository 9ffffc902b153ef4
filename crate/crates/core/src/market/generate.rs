//! Seeded random instances.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`. Draw order is
//! fixed: area buses from the pool (Fisher-Yates prefix), line limits, then
//! for each gen its energy and reserve price, the same for each rival bid,
//! and finally for each area, EUC and block the tuple (c, d, x_max, y_max).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BigMPolicy, Case, EucBlock, GenOffer, LseBid, Network, PriceCaps, PricingArea};

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    fn check(self, what: &str) -> Result<Self, GenError> {
        if !(self.0.is_finite() && self.1.is_finite()) || self.0 > self.1 {
            return Err(GenError::EmptyRange { what: what.to_string(), lo: self.0, hi: self.1 });
        }
        Ok(self)
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        if self.0 == self.1 {
            // still consume a draw so the stream does not shift
            let _: f64 = rng.random();
            return self.0;
        }
        rng.random_range(self.0..=self.1)
    }
}

/// Gen offer or rival bid template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfferTemplate {
    pub bus: usize,
    pub energy_price: Range,
    pub reserve_price: Range,
    #[serde(default)]
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default)]
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaTemplate {
    /// Fixed bus, or drawn from `area_bus_pool` when absent.
    #[serde(default)]
    pub bus: Option<usize>,
    pub eucs: usize,
    pub blocks_per_euc: usize,
    pub benefit_price: Range,
    pub reserve_cost_price: Range,
    /// Quantity limits of the area's strategic bid; also the scale for
    /// block upper bounds.
    pub p_max: f64,
    pub r_max: f64,
    #[serde(default)]
    pub p_min: f64,
    /// Block upper bounds are drawn from `[lo/C, hi/C] * p_max` (and r_max).
    #[serde(default = "default_scale")]
    pub scale: Range,
    /// Replaces p_max in the block draw.
    #[serde(default)]
    pub demand_base: Option<f64>,
    /// Replaces r_max in the block draw.
    #[serde(default)]
    pub reserve_base: Option<f64>,
}

fn default_scale() -> Range {
    Range(0.85, 1.15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub reserve_req: f64,
    pub network: Network,
    #[serde(default)]
    pub line_limits: Option<Range>,
    #[serde(default)]
    pub area_bus_pool: Vec<usize>,
    #[serde(default)]
    pub gens: Vec<OfferTemplate>,
    #[serde(default)]
    pub rivals: Vec<OfferTemplate>,
    #[serde(default)]
    pub areas: Vec<AreaTemplate>,
    #[serde(default)]
    pub caps: PriceCaps,
    #[serde(default)]
    pub bigm: BigMPolicy,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("empty range for {what}: [{lo}, {hi}]")]
    EmptyRange { what: String, lo: f64, hi: f64 },
    #[error("{0}")]
    Spec(String),
    #[error("generated case is invalid: {0}")]
    Invalid(String),
}

impl GenSpec {
    pub fn from_toml(text: &str) -> Result<Self, GenError> {
        toml::from_str(text).map_err(|e| GenError::Spec(e.to_string()))
    }
}

pub fn generate_case(spec: &GenSpec, seed: u64) -> Result<Case, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let free_areas = spec.areas.iter().filter(|a| a.bus.is_none()).count();
    if free_areas > spec.area_bus_pool.len() {
        return Err(GenError::Spec(format!(
            "{free_areas} areas need a drawn bus but area_bus_pool has {} entries",
            spec.area_bus_pool.len()
        )));
    }
    let mut pool = spec.area_bus_pool.clone();
    for i in 0..free_areas {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut drawn = pool.into_iter().take(free_areas);

    let mut network = spec.network.clone();
    if let Some(r) = spec.line_limits {
        let r = r.check("line_limits")?;
        for line in &mut network.lines {
            line.flow_limit = r.sample(&mut rng);
        }
    }

    let mut gens = Vec::with_capacity(spec.gens.len());
    for (i, t) in spec.gens.iter().enumerate() {
        let e = t.energy_price.check(&format!("gens[{}].energy_price", i + 1))?;
        let r = t.reserve_price.check(&format!("gens[{}].reserve_price", i + 1))?;
        gens.push(GenOffer {
            id: i + 1,
            bus: t.bus,
            energy_price: e.sample(&mut rng),
            reserve_price: r.sample(&mut rng),
            p_min: t.p_min,
            p_max: t.p_max,
            r_max: t.r_max,
        });
    }

    let n_areas = spec.areas.len();
    let area_buses: Vec<usize> = spec.areas.iter().map(|a| a.bus.unwrap_or_else(|| drawn.next().unwrap())).collect();

    let mut bids = Vec::new();
    for (k, t) in spec.areas.iter().enumerate() {
        bids.push(LseBid {
            id: k + 1,
            bus: area_buses[k],
            energy_price: 0.0,
            reserve_price: 0.0,
            p_min: t.p_min,
            p_max: t.p_max,
            r_max: t.r_max,
            strategic: true,
        });
    }
    for (i, t) in spec.rivals.iter().enumerate() {
        let e = t.energy_price.check(&format!("rivals[{}].energy_price", i + 1))?;
        let r = t.reserve_price.check(&format!("rivals[{}].reserve_price", i + 1))?;
        bids.push(LseBid {
            id: n_areas + i + 1,
            bus: t.bus,
            energy_price: e.sample(&mut rng),
            reserve_price: r.sample(&mut rng),
            p_min: t.p_min,
            p_max: t.p_max,
            r_max: t.r_max,
            strategic: false,
        });
    }

    let mut areas = Vec::with_capacity(n_areas);
    for (k, t) in spec.areas.iter().enumerate() {
        let what = |f: &str| format!("areas[{}].{f}", k + 1);
        let c = t.benefit_price.check(&what("benefit_price"))?;
        let d = t.reserve_cost_price.check(&what("reserve_cost_price"))?;
        let s = t.scale.check(&what("scale"))?;
        if t.eucs == 0 || t.blocks_per_euc == 0 {
            return Err(GenError::Spec(format!("{} needs eucs and blocks_per_euc >= 1", what(""))));
        }
        let cn = t.eucs as f64;
        let (pb, rb) = (t.demand_base.unwrap_or(t.p_max), t.reserve_base.unwrap_or(t.r_max));
        let xr = Range(s.0 / cn * pb, s.1 / cn * pb);
        let yr = Range(s.0 / cn * rb, s.1 / cn * rb);
        let mut blocks = Vec::with_capacity(t.eucs * t.blocks_per_euc);
        for e in 0..t.eucs {
            for _ in 0..t.blocks_per_euc {
                blocks.push(EucBlock {
                    euc: Some(e + 1),
                    benefit_price: c.sample(&mut rng),
                    reserve_cost_price: d.sample(&mut rng),
                    x_min: 0.0,
                    x_max: xr.sample(&mut rng),
                    y_max: yr.sample(&mut rng),
                });
            }
        }
        areas.push(PricingArea { bus: area_buses[k], bid_ids: vec![k + 1], blocks });
    }

    let case =
        Case { reserve_req: spec.reserve_req, network, gens, bids, areas, caps: spec.caps, bigm: spec.bigm.clone() };
    let diags = super::validate_case(&case);
    if !diags.is_empty() {
        let msg = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ");
        return Err(GenError::Invalid(msg));
    }
    Ok(case)
}
