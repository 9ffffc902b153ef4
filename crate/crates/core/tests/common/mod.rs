#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trilayer::market::{BigMPolicy, Case, EucBlock, GenOffer, Line, LseBid, Network, PriceCaps, PricingArea};
use trilayer::optimizer::{Model, RowSense, Sense};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Shape {
    pub buses: usize,
    pub gens: usize,
    pub rivals: usize,
    pub areas: usize,
    pub blocks_per_area: usize,
    pub reserve: bool,
    pub congested: bool,
}

/// Small random case that is always clearable: gens may run at zero, bid
/// floors are zero and the reserve requirement is below gen headroom.
pub fn random_case(rng: &mut ChaCha8Rng, s: &Shape) -> Case {
    let n = s.buses;
    let lines: Vec<Line> = (2..=n)
        .map(|b| Line {
            id: b - 1,
            from: rng.random_range(1..b),
            to: b,
            reactance: rng.random_range(0.05..0.5),
            flow_limit: if s.congested { rng.random_range(5.0..40.0) } else { 1000.0 },
        })
        .collect();
    let gens: Vec<GenOffer> = (0..s.gens)
        .map(|i| {
            let p_max = rng.random_range(40.0..120.0);
            GenOffer {
                id: i + 1,
                bus: rng.random_range(1..=n),
                energy_price: rng.random_range(15.0..30.0),
                reserve_price: rng.random_range(2.0..7.0),
                p_min: 0.0,
                p_max,
                r_max: if s.reserve { rng.random_range(0.0..30.0) } else { 0.0 },
            }
        })
        .collect();
    let mut bids = Vec::new();
    let mut areas = Vec::new();
    let mut free: Vec<usize> = (1..=n).collect();
    for k in 0..s.areas.min(n) {
        let pick = rng.random_range(0..free.len());
        let bus = free.remove(pick);
        let p_max = rng.random_range(20.0..80.0);
        let r_max = if s.reserve { rng.random_range(0.0..20.0) } else { 0.0 };
        bids.push(LseBid {
            id: k + 1,
            bus,
            energy_price: rng.random_range(20.0..40.0),
            reserve_price: rng.random_range(3.0..8.0),
            p_min: 0.0,
            p_max,
            r_max,
            strategic: true,
        });
        let c = s.blocks_per_area as f64;
        let blocks = (0..s.blocks_per_area)
            .map(|t| EucBlock {
                euc: Some(t + 1),
                benefit_price: rng.random_range(30.0..40.0),
                reserve_cost_price: rng.random_range(3.0..8.0),
                x_min: 0.0,
                x_max: rng.random_range(0.85..1.15) * p_max / c,
                y_max: rng.random_range(0.85..1.15) * r_max / c,
            })
            .collect();
        areas.push(PricingArea { bus, bid_ids: vec![k + 1], blocks });
    }
    for _ in 0..s.rivals {
        bids.push(LseBid {
            id: bids.len() + 1,
            bus: rng.random_range(1..=n),
            energy_price: rng.random_range(18.0..30.0),
            reserve_price: rng.random_range(3.0..8.0),
            p_min: 0.0,
            p_max: rng.random_range(10.0..60.0),
            r_max: if s.reserve { rng.random_range(0.0..10.0) } else { 0.0 },
            strategic: false,
        });
    }
    let headroom: f64 = gens.iter().map(|g| g.r_max.min(g.p_max)).sum();
    let reserve_req = if s.reserve { rng.random_range(0.0..0.6) * headroom } else { 0.0 };
    Case {
        reserve_req,
        network: Network { buses: n, slack_bus: 1, lines, loss_factors: None, isf: None },
        gens,
        bids,
        areas,
        caps: PriceCaps::default(),
        bigm: BigMPolicy::default(),
    }
}

/// Joint instance with one gen, one strategic bid and one area: 13 binaries
/// on one bus with one block, +2 per line, +4 per extra block.
pub fn tiny_joint_case(rng: &mut ChaCha8Rng, buses: usize, blocks: usize, reserve: bool) -> Case {
    let shape = Shape { buses, gens: 1, rivals: 0, areas: 1, blocks_per_area: blocks, reserve, congested: buses > 1 };
    random_case(rng, &shape)
}

pub fn random_lp(rng: &mut ChaCha8Rng, boxed: bool, n: usize, m: usize) -> Model {
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut model = Model::new("rand", sense);
    let mut x0 = Vec::new();
    for j in 0..n {
        let kind = if boxed { 0 } else { rng.random_range(0..4) };
        let (lo, hi) = match kind {
            0 => {
                let lo = rng.random_range(-5.0..2.0);
                (lo, lo + rng.random_range(0.0..6.0))
            }
            1 => (0.0, f64::INFINITY),
            2 => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (f64::NEG_INFINITY, rng.random_range(-2.0..4.0)),
        };
        let v = model.add_var(format!("x{j}"), lo, hi);
        let c: f64 = rng.random_range(-3.0..3.0);
        model.add_objective_term(v, (c * 4.0).round() / 4.0);
        let lo_s = if lo.is_finite() { lo } else { -3.0 };
        let hi_s = if hi.is_finite() { hi } else { lo_s.max(0.0) + 3.0 };
        x0.push(rng.random_range(lo_s.min(hi_s)..=hi_s.max(lo_s)));
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                let a: f64 = rng.random_range(-4.0..4.0);
                coeffs.push((j, (a * 2.0).round() / 2.0));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.random_range(0..3) {
            0 => (RowSense::Le, act + rng.random_range(0.0..2.0)),
            1 => (RowSense::Ge, act - rng.random_range(0.0..2.0)),
            _ => (RowSense::Eq, act),
        };
        // occasionally make the row contradict the sampled point
        let rhs = if rng.random_bool(0.1) { rhs + rng.random_range(-6.0..6.0) } else { rhs };
        model.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    model
}
