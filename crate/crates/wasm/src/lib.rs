//! Bindings behind `www/index.html`. Every call returns a JSON string.

use serde_json::{json, Value};
use trilayer::harness::{report_text, run_sweep, RunReport, SweepSpec, SweepTarget};
use trilayer::joint::{solve_joint, JointOptions, Variant};
use trilayer::market::{generate_case, BigMPolicy, Case, GenOffer, GenSpec, Line, LseBid, Network, PriceCaps};
use trilayer::wem::clear_wem;
use wasm_bindgen::prelude::*;

const DESK_SPEC: &str = include_str!("../../../data/case9_desk.gen.toml");

fn draw(spec: &str, seed: u64) -> Result<Case, String> {
    let spec = GenSpec::from_toml(spec).map_err(|e| e.to_string())?;
    generate_case(&spec, seed).map_err(|e| e.to_string())
}

pub fn solve_json(spec: &str, seed: u64, variant: &str) -> Result<String, String> {
    let case = draw(spec, seed)?;
    let variant: Variant = variant.parse().map_err(|e: trilayer::joint::JointError| e.to_string())?;
    let out = solve_joint(&case, variant, &JointOptions::default()).map_err(|e| e.to_string())?;
    let report = RunReport::from_outcome(variant, &out);
    let areas: Vec<Value> = match &out.result {
        Some(r) => (0..case.areas.len())
            .map(|k| {
                json!({
                    "bus": case.areas[k].bus,
                    "alpha": r.alpha[k],
                    "beta": r.beta[k],
                    "lmp": r.pi[k],
                    "energy": r.responses[k].energy(),
                })
            })
            .collect(),
        None => vec![],
    };
    Ok(json!({
        "status": format!("{:?}", out.status),
        "profit": report.result.as_ref().map(|r| r.profit),
        "nodes": out.milp.nodes,
        "kkt": report.kkt_passed,
        "areas": areas,
        "text": report_text(&case, &report),
    })
    .to_string())
}

pub fn sweep_json(spec: &str, seed: u64, lo: f64, hi: f64, points: usize) -> Result<String, String> {
    let case = draw(spec, seed)?;
    let sweep = SweepSpec::linspace(SweepTarget::AlphaOffset, lo, hi, points.max(2));
    let res = run_sweep(&case, &sweep, &JointOptions::default(), 1).map_err(|e| e.to_string())?;
    let pick = |f: fn(&trilayer::joint::JointResult) -> f64| -> Vec<Option<f64>> {
        res.rows.iter().map(|r| r.result.as_ref().map(f)).collect()
    };
    Ok(json!({
        "offset": sweep.grid,
        "profit": pick(|r| r.profit),
        "welfare": pick(|r| r.welfare_total),
    })
    .to_string())
}

/// Two buses, cheap generation at bus 1, dear at bus 2, fixed load at bus 2.
pub fn two_bus_json(limit: f64, load: f64) -> Result<String, String> {
    let gen = |id, bus, price| GenOffer {
        id,
        bus,
        energy_price: price,
        reserve_price: 0.0,
        p_min: 0.0,
        p_max: 200.0,
        r_max: 0.0,
    };
    let case = Case {
        reserve_req: 0.0,
        network: Network {
            buses: 2,
            slack_bus: 1,
            lines: vec![Line { id: 1, from: 1, to: 2, reactance: 0.1, flow_limit: limit.max(0.0) }],
            loss_factors: None,
            isf: None,
        },
        gens: vec![gen(1, 1, 10.0), gen(2, 2, 30.0)],
        bids: vec![LseBid {
            id: 1,
            bus: 2,
            energy_price: 100.0,
            reserve_price: 0.0,
            p_min: load,
            p_max: load,
            r_max: 0.0,
            strategic: false,
        }],
        areas: vec![],
        caps: PriceCaps::default(),
        bigm: BigMPolicy::default(),
    };
    let c = clear_wem(&case, &case.stored_bid_prices()).map_err(|e| e.to_string())?;
    Ok(json!({ "dispatch": c.p_g, "lmp": c.lmp, "flow": c.p_g[0] }).to_string())
}

#[wasm_bindgen]
pub fn desk_spec() -> String {
    DESK_SPEC.to_string()
}

#[wasm_bindgen]
pub fn solve(spec: &str, seed: u32, variant: &str) -> Result<String, JsError> {
    solve_json(spec, seed.into(), variant).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn alpha_sweep(spec: &str, seed: u32, lo: f64, hi: f64, points: u32) -> Result<String, JsError> {
    sweep_json(spec, seed.into(), lo, hi, points as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn two_bus(limit: f64, load: f64) -> Result<String, JsError> {
    two_bus_json(limit, load).map_err(|e| JsError::new(&e))
}
