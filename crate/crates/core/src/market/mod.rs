//! Problem instances: network, wholesale offers and bids, retail pricing
//! areas with their end-user blocks, price caps and big-M settings.
//!
//! Bus and line ids are 1-based as they appear in case files; vectors indexed
//! by bus use `bus - 1`.

mod generate;
mod io;

use serde::{Deserialize, Serialize};

pub use generate::{generate_case, AreaTemplate, GenError, GenSpec, OfferTemplate, Range};
pub use io::{load_case, save_case, validate_case, CaseError, Diagnostic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// Per-unit series reactance.
    pub reactance: f64,
    /// Thermal limit in MW, symmetric in both directions.
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    /// Number of buses; ids run 1..=buses.
    pub buses: usize,
    pub slack_bus: usize,
    #[serde(default)]
    pub lines: Vec<Line>,
    /// Per-bus loss factors; all zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_factors: Option<Vec<f64>>,
    /// Row-major lines x buses injection shifting factors overriding the
    /// DC computation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isf: Option<Vec<f64>>,
}

/// Generator offer: energy and reserve prices with quantity limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenOffer {
    pub id: usize,
    pub bus: usize,
    pub energy_price: f64,
    pub reserve_price: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub r_max: f64,
}

/// LSE energy bid paired with a reserve offer. For strategic bids the two
/// prices are decided by the optimisation; the stored prices are only used
/// when the bid is cleared as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LseBid {
    pub id: usize,
    pub bus: usize,
    pub energy_price: f64,
    pub reserve_price: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub r_max: f64,
    #[serde(default)]
    pub strategic: bool,
}

/// One piecewise-linear block of an end user's benefit and reserve cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EucBlock {
    /// Owning end user, kept for reporting only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euc: Option<usize>,
    pub benefit_price: f64,
    pub reserve_cost_price: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingArea {
    pub bus: usize,
    pub bid_ids: Vec<usize>,
    #[serde(default)]
    pub blocks: Vec<EucBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceCaps {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for PriceCaps {
    fn default() -> Self {
        Self { alpha_min: 0.0, alpha_max: 100.0, beta_min: 0.0, beta_max: 50.0 }
    }
}

pub const DEFAULT_DUAL_BIGM: f64 = 1e4;

/// Big-M values for the complementarity linearisation.
///
/// Primal-side values are derived from variable boxes unless `primal`
/// overrides them. Dual-side values come from the per-group field when set,
/// otherwise from `dual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BigMPolicy {
    #[serde(default = "default_dual")]
    pub dual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bid_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bid_reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euc_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euc_reserve: Option<f64>,
    /// How many times the post-solve audit may double a saturated group.
    #[serde(default = "default_doublings")]
    pub max_doublings: u32,
}

fn default_dual() -> f64 {
    DEFAULT_DUAL_BIGM
}

fn default_doublings() -> u32 {
    4
}

impl Default for BigMPolicy {
    fn default() -> Self {
        Self {
            dual: DEFAULT_DUAL_BIGM,
            primal: None,
            flow: None,
            reserve: None,
            gen_energy: None,
            gen_reserve: None,
            bid_energy: None,
            bid_reserve: None,
            euc_energy: None,
            euc_reserve: None,
            max_doublings: default_doublings(),
        }
    }
}

/// Complementarity families sharing one dual-side big-M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BigMGroup {
    Flow,
    Reserve,
    GenEnergy,
    GenReserve,
    BidEnergy,
    BidReserve,
    EucEnergy,
    EucReserve,
}

impl BigMGroup {
    pub const ALL: [BigMGroup; 8] = [
        BigMGroup::Flow,
        BigMGroup::Reserve,
        BigMGroup::GenEnergy,
        BigMGroup::GenReserve,
        BigMGroup::BidEnergy,
        BigMGroup::BidReserve,
        BigMGroup::EucEnergy,
        BigMGroup::EucReserve,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BigMGroup::Flow => "flow",
            BigMGroup::Reserve => "reserve",
            BigMGroup::GenEnergy => "gen_energy",
            BigMGroup::GenReserve => "gen_reserve",
            BigMGroup::BidEnergy => "bid_energy",
            BigMGroup::BidReserve => "bid_reserve",
            BigMGroup::EucEnergy => "euc_energy",
            BigMGroup::EucReserve => "euc_reserve",
        }
    }
}

impl BigMPolicy {
    pub fn dual_m(&self, group: BigMGroup) -> f64 {
        let v = match group {
            BigMGroup::Flow => self.flow,
            BigMGroup::Reserve => self.reserve,
            BigMGroup::GenEnergy => self.gen_energy,
            BigMGroup::GenReserve => self.gen_reserve,
            BigMGroup::BidEnergy => self.bid_energy,
            BigMGroup::BidReserve => self.bid_reserve,
            BigMGroup::EucEnergy => self.euc_energy,
            BigMGroup::EucReserve => self.euc_reserve,
        };
        v.unwrap_or(self.dual)
    }

    pub fn set_dual_m(&mut self, group: BigMGroup, value: f64) {
        let slot = match group {
            BigMGroup::Flow => &mut self.flow,
            BigMGroup::Reserve => &mut self.reserve,
            BigMGroup::GenEnergy => &mut self.gen_energy,
            BigMGroup::GenReserve => &mut self.gen_reserve,
            BigMGroup::BidEnergy => &mut self.bid_energy,
            BigMGroup::BidReserve => &mut self.bid_reserve,
            BigMGroup::EucEnergy => &mut self.euc_energy,
            BigMGroup::EucReserve => &mut self.euc_reserve,
        };
        *slot = Some(value);
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    /// Minimum system reserve in MW.
    pub reserve_req: f64,
    pub network: Network,
    #[serde(default)]
    pub gens: Vec<GenOffer>,
    #[serde(default)]
    pub bids: Vec<LseBid>,
    #[serde(default)]
    pub areas: Vec<PricingArea>,
    #[serde(default)]
    pub caps: PriceCaps,
    #[serde(default)]
    pub bigm: BigMPolicy,
}

impl Case {
    pub fn num_buses(&self) -> usize {
        self.network.buses
    }

    pub fn num_lines(&self) -> usize {
        self.network.lines.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.areas.iter().map(|a| a.blocks.len()).sum()
    }

    pub fn bid_index(&self, id: usize) -> Option<usize> {
        self.bids.iter().position(|b| b.id == id)
    }

    /// Area index owning bid `j` (by position), if the bid is strategic.
    pub fn area_of_bid(&self, j: usize) -> Option<usize> {
        let id = self.bids[j].id;
        self.areas.iter().position(|a| a.bid_ids.contains(&id))
    }

    /// Bid positions belonging to area `k`.
    pub fn area_bids(&self, k: usize) -> Vec<usize> {
        self.areas[k].bid_ids.iter().filter_map(|&id| self.bid_index(id)).collect()
    }

    /// Energy and reserve prices of every bid, as stored in the case.
    pub fn stored_bid_prices(&self) -> BidPrices {
        BidPrices {
            energy: self.bids.iter().map(|b| b.energy_price).collect(),
            reserve: self.bids.iter().map(|b| b.reserve_price).collect(),
        }
    }
}

/// Concrete energy/reserve prices for every LSE bid, indexed like `Case::bids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidPrices {
    pub energy: Vec<f64>,
    pub reserve: Vec<f64>,
}
