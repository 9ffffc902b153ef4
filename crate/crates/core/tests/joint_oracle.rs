mod common;

use common::{random_case, rng, tiny_joint_case, Shape};
use rand::Rng;
use trilayer::euc::{area_response, response_breakpoints};
use trilayer::joint::{
    build_joint_milp, build_objective, extract_decision, solve_joint, JointError, JointOptions, Variant,
};
use trilayer::market::{self, Case, EucBlock, GenOffer, LseBid, Network, PricingArea};
use trilayer::optimizer::{solve_brute_force, solve_milp, MilpOptions, MilpStatus, RowSense};
use trilayer::wem::clear_wem;

fn one_bus_case() -> Case {
    Case {
        reserve_req: 0.0,
        network: Network { buses: 1, slack_bus: 1, lines: vec![], loss_factors: None, isf: None },
        gens: vec![GenOffer {
            id: 1,
            bus: 1,
            energy_price: 10.0,
            reserve_price: 0.0,
            p_min: 0.0,
            p_max: 100.0,
            r_max: 0.0,
        }],
        bids: vec![LseBid {
            id: 1,
            bus: 1,
            energy_price: 0.0,
            reserve_price: 0.0,
            p_min: 0.0,
            p_max: 50.0,
            r_max: 0.0,
            strategic: true,
        }],
        areas: vec![PricingArea {
            bus: 1,
            bid_ids: vec![1],
            blocks: vec![EucBlock {
                euc: Some(1),
                benefit_price: 40.0,
                reserve_cost_price: 5.0,
                x_min: 0.0,
                x_max: 50.0,
                y_max: 0.0,
            }],
        }],
        caps: market::PriceCaps::default(),
        bigm: market::BigMPolicy::default(),
    }
}

fn fix(m: &mut trilayer::optimizer::Model, name: &str, v: f64) {
    let j = m.find_var(name).unwrap();
    m.vars[j].lower = v;
    m.vars[j].upper = v;
}

#[test]
fn binary_count_follows_pair_tally() {
    let mut r = rng(71);
    for t in 0..40 {
        let shape = Shape {
            buses: 1 + t % 5,
            gens: 1 + t % 3,
            rivals: t % 3,
            areas: 1 + t % 2,
            blocks_per_area: 1 + t % 4,
            reserve: t % 2 == 0,
            congested: false,
        };
        let k = random_case(&mut r, &shape);
        let jm = build_joint_milp(&k, Variant::Full).unwrap();
        let expect = 2 * k.num_lines() + 1 + 4 * k.gens.len() + 4 * k.bids.len() + 4 * k.num_blocks();
        assert_eq!(jm.model.num_binaries(), expect);
        assert_eq!(jm.pairs.len(), expect);
        let cs = jm.model.rows.iter().filter(|r| r.name.starts_with("cs_")).count();
        let cd = jm.model.rows.iter().filter(|r| r.name.starts_with("cd_")).count();
        assert_eq!((cs, cd), (expect, expect));
    }
}

#[test]
fn variant_row_counts() {
    let mut r = rng(72);
    let shape = Shape { buses: 4, gens: 2, rivals: 1, areas: 3, blocks_per_area: 2, reserve: true, congested: false };
    let k = random_case(&mut r, &shape);
    let eq = |v| build_joint_milp(&k, v).unwrap().model.rows.iter().filter(|r| r.sense == RowSense::Eq).count();
    let full = eq(Variant::Full);
    assert_eq!(eq(Variant::Nonprofit), full + 6);
    assert_eq!(eq(Variant::EqualPrice), full + 2);
    assert!(matches!("half".parse::<Variant>(), Err(JointError::InvalidVariant(_))));
}

#[test]
fn stationarity_rows_per_lower_level() {
    let k = one_bus_case();
    let jm = build_joint_milp(&k, Variant::Full).unwrap();
    let st = |p: &str| jm.model.rows.iter().filter(|r| r.name.starts_with(p)).count();
    assert_eq!((st("st_pg_"), st("st_rg_"), st("st_pd_"), st("st_rd_")), (1, 1, 1, 1));
    assert_eq!(st("st_x_") + st("st_y_"), 2);
    // the strategic bid's price is a column in its stationarity row
    let row = jm.model.rows.iter().find(|r| r.name == "st_pd_1").unwrap();
    assert!(row.coeffs.contains(&(jm.vars.a_d[0].unwrap(), -1.0)));
}

#[test]
fn fixed_bids_reproduce_clearing() {
    let k = one_bus_case();
    let mut jm = build_joint_milp(&k, Variant::Full).unwrap();
    fix(&mut jm.model, "ad_1", 20.0);
    fix(&mut jm.model, "bd_1", 0.0);
    fix(&mut jm.model, "alpha_1", 30.0);
    fix(&mut jm.model, "beta_1", 0.0);
    let s = solve_milp(&jm.model, &MilpOptions::default()).unwrap();
    assert_eq!(s.status, MilpStatus::Optimal);
    let x = s.x.unwrap();
    let mut prices = k.stored_bid_prices();
    prices.energy[0] = 20.0;
    let c = clear_wem(&k, &prices).unwrap();
    assert!((x[jm.vars.p_g[0]] - c.p_g[0]).abs() < 1e-9);
    assert!((x[jm.vars.p_d[0]] - c.p_d[0]).abs() < 1e-9);
    assert!((x[jm.vars.lambda] - c.lambda).abs() < 1e-9);
    assert!((x[jm.vars.x[0][0]] - 50.0).abs() < 1e-9);
}

#[test]
fn cheap_energy_dear_reserve_fills_blocks() {
    let mut r = rng(73);
    let k = random_case(
        &mut r,
        &Shape { buses: 1, gens: 2, rivals: 0, areas: 1, blocks_per_area: 3, reserve: false, congested: false },
    );
    let mut jm = build_joint_milp(&k, Variant::Full).unwrap();
    let cmin = k.areas[0].blocks.iter().map(|b| b.benefit_price).fold(f64::INFINITY, f64::min);
    fix(&mut jm.model, "alpha_1", cmin - 1.0);
    fix(&mut jm.model, "beta_1", 10.0);
    let s = solve_milp(&jm.model, &MilpOptions::default()).unwrap();
    if let Some(x) = s.x {
        for (t, b) in k.areas[0].blocks.iter().enumerate() {
            assert!((x[jm.vars.x[0][t]] - b.x_max).abs() < 1e-7);
        }
    } else {
        // the bid cannot absorb full demand: no feasible point
        assert_eq!(s.status, MilpStatus::Infeasible);
    }
}

#[test]
fn nonpositive_big_m_rejected() {
    let mut k = one_bus_case();
    k.bigm.primal = Some(0.0);
    assert!(matches!(build_joint_milp(&k, Variant::Full), Err(JointError::NonPositiveBigM { .. })));
}

/// Profit through the duality-based linear objective equals the bilinear
/// revenue at arbitrary feasible points, reached here by maximising random
/// objectives over the joint feasible set.
#[test]
fn linear_objective_equals_bilinear_profit_at_feasible_points() {
    let mut r = rng(74);
    let mut checked = 0;
    for t in 0..60 {
        let k = tiny_joint_case(&mut r, 1 + t % 2, 1 + (t / 2) % 2, t % 3 != 0);
        let mut jm = build_joint_milp(&k, Variant::Full).unwrap();
        let profit_terms = build_objective(&jm.case, &jm.vars);
        for c in jm.model.objective.iter_mut() {
            *c = r.random_range(-1.0..1.0);
        }
        let s = solve_milp(&jm.model, &MilpOptions::default()).unwrap();
        let Some(x) = s.x else { continue };
        let lin: f64 = profit_terms.iter().map(|&(j, a)| a * x[j]).sum();
        let v = &jm.vars;
        let pi: f64 = jm.lmp_terms(0).iter().map(|&(j, a)| a * x[j]).sum();
        let bil = (x[v.alpha[0]] - pi) * x[v.p_d[0]] + (x[v.nu] - x[v.beta[0]]) * x[v.r_d[0]];
        assert!((lin - bil).abs() <= 1e-6 * (1.0 + bil.abs()), "instance {t}: {lin} vs {bil}");
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} feasible instances");
}

#[test]
fn branch_and_bound_matches_enumeration_on_tiny_models() {
    let mut r = rng(75);
    for t in 0..12 {
        let k = tiny_joint_case(&mut r, 1 + t % 2, 1, t % 2 == 0);
        let jm = build_joint_milp(&k, Variant::Full).unwrap();
        let bb = solve_milp(&jm.model, &MilpOptions::default()).unwrap();
        let ex = solve_brute_force(&jm.model).unwrap();
        assert_eq!(bb.status, ex.status, "instance {t}");
        if ex.status == MilpStatus::Optimal {
            assert!((bb.objective - ex.objective).abs() <= 1e-6, "instance {t}: {} vs {}", bb.objective, ex.objective);
        }
    }
}

#[test]
fn solved_decisions_are_consistent() {
    let mut r = rng(76);
    for t in 0..20 {
        let shape = Shape {
            buses: 3,
            gens: 2,
            rivals: 1,
            areas: 2,
            blocks_per_area: 2,
            reserve: t % 2 == 0,
            congested: t % 4 == 1,
        };
        let k = random_case(&mut r, &shape);
        let out = solve_joint(&k, Variant::Full, &JointOptions::default()).unwrap();
        let Some(res) = out.result else { continue };
        assert!(out.kkt.as_ref().unwrap().passed(), "instance {t}:\n{}", out.kkt.unwrap());
        assert!(out.audit.clean, "instance {t}: {:?}", out.audit.rounds.last().unwrap().saturated);
        let again = extract_decision(&out.model, out.milp.x.as_ref().unwrap(), out.milp.gap).unwrap();
        assert_eq!(again, res);
        let c = clear_wem(&k, &res.bid_prices).unwrap();
        assert!((c.objective - res.clearing.objective).abs() <= 1e-6 * (1.0 + c.objective.abs()));
        for (a, area) in k.areas.iter().enumerate() {
            let best = area_response(res.alpha[a], res.beta[a], area);
            assert!((best.objective - res.responses[a].objective).abs() <= 1e-6 * (1.0 + best.objective.abs()));
        }
        if !shape.congested {
            for p in &res.pi {
                assert!((p - res.pi[0]).abs() < 1e-6);
            }
            for (a, area) in k.areas.iter().enumerate() {
                let bp = response_breakpoints(area, &k.caps);
                let hit = bp.alpha.iter().any(|b| (b - res.alpha[a]).abs() <= 1e-6);
                if !hit {
                    eprintln!("instance {t}: alpha {} of area {a} is off the breakpoint set", res.alpha[a]);
                }
            }
        }
    }
}

#[test]
fn nonprofit_variant_earns_nothing() {
    let mut r = rng(77);
    for t in 0..10 {
        let shape = Shape {
            buses: 2,
            gens: 2,
            rivals: 1,
            areas: 1 + t % 2,
            blocks_per_area: 2,
            reserve: true,
            congested: t % 2 == 0,
        };
        let k = random_case(&mut r, &shape);
        let out = solve_joint(&k, Variant::Nonprofit, &JointOptions::default()).unwrap();
        if let Some(res) = out.result {
            assert!(res.profit.abs() <= 1e-9, "instance {t}: {}", res.profit);
        }
    }
}
