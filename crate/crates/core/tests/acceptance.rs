//! Acceptance criteria 1-11, one line each. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{random_case, random_lp, rng, tiny_joint_case, Shape};
use rand::Rng;
use trilayer::euc::{area_response, response_breakpoints};
use trilayer::harness::{report_csv, run_sweep, sweep_csv, RunReport, SweepSpec, SweepTarget};
use trilayer::joint::{build_joint_milp, solve_joint, variant_case, JointOptions, JointOutcome, JointResult, Variant};
use trilayer::market::{
    generate_case, load_case, save_case, BigMPolicy, Case, GenOffer, GenSpec, Line, LseBid, Network, PriceCaps,
};
use trilayer::network::compute_isf;
use trilayer::optimizer::{export_mps, solve_brute_force, solve_lp, solve_milp, LpStatus, MilpOptions, MilpStatus};
use trilayer::wem::{clear_wem, lmp, Grid};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn gen_case(spec: &str, seed: u64) -> Case {
    let text = std::fs::read_to_string(data(spec)).unwrap();
    generate_case(&GenSpec::from_toml(&text).unwrap(), seed).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

enum Verdict {
    Pass(String),
    Fail(String),
}

struct Solved {
    case: Case,
    variant: Variant,
    out: JointOutcome,
}

impl Solved {
    fn result(&self) -> Option<&JointResult> {
        self.out.result.as_ref()
    }
}

struct Pool {
    solves: Vec<Solved>,
}

impl Pool {
    fn solve(&mut self, case: &Case, variant: Variant, opts: &JointOptions) -> usize {
        let out = solve_joint(case, variant, opts).unwrap();
        self.solves.push(Solved { case: case.clone(), variant, out });
        self.solves.len() - 1
    }
}

fn pool_shape(t: usize) -> Shape {
    Shape {
        buses: 1 + t % 3,
        gens: 1 + t % 2,
        rivals: (t / 2) % 2,
        areas: 1 + (t / 3) % 2,
        blocks_per_area: 1 + (t / 5) % 2,
        reserve: t % 2 == 0,
        congested: t % 3 == 2,
    }
}

fn crit1() -> Verdict {
    let mut r = rng(101);
    let shapes = [(1, 1), (2, 1), (1, 2)];
    let (mut worst, mut optimal, mut bins) = (0.0f64, 0, (usize::MAX, 0));
    for t in 0..50 {
        let (b, k) = shapes[t % 3];
        let case = tiny_joint_case(&mut r, b, k, t % 2 == 0);
        let jm = build_joint_milp(&case, Variant::Full).unwrap();
        let n = jm.model.num_binaries();
        bins = (bins.0.min(n), bins.1.max(n));
        let bb = solve_milp(&jm.model, &MilpOptions::default()).unwrap();
        let ex = solve_brute_force(&jm.model).unwrap();
        if bb.status != ex.status {
            return Verdict::Fail(format!("instance {t}: {:?} vs enumeration {:?}", bb.status, ex.status));
        }
        if ex.status == MilpStatus::Optimal {
            optimal += 1;
            worst = worst.max((bb.objective - ex.objective).abs());
        }
    }
    let msg = format!(
        "50 instances ({optimal} optimal), {}-{} binaries (12 is below the smallest joint model), max diff {worst:.1e}",
        bins.0, bins.1
    );
    if worst <= 1e-6 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn crit2(pool: &Pool) -> Verdict {
    let (mut n, mut worst) = (0, 0.0f64);
    for (i, s) in pool.solves.iter().enumerate() {
        if s.result().is_none() {
            continue;
        }
        n += 1;
        let k = s.out.kkt.as_ref().unwrap();
        worst = worst.max(k.worst());
        if !k.passed() {
            return Verdict::Fail(format!("solve {i} ({}): KKT residual {:.2e}", s.variant, k.worst()));
        }
        if !s.out.audit.clean {
            return Verdict::Fail(format!("solve {i} ({}): duals at their big-M bound", s.variant));
        }
    }
    Verdict::Pass(format!("{n} incumbents, worst residual {worst:.1e}, audit clean"))
}

fn bilinear_profit(case: &Case, r: &JointResult) -> f64 {
    let grid = Grid::new(case).unwrap();
    let c = &r.clearing;
    let pi = lmp(c.lambda, &c.mu_lo, &c.mu_hi, &grid.loss, &grid.isf).unwrap();
    let mut p = 0.0;
    for (k, area) in case.areas.iter().enumerate() {
        for j in case.area_bids(k) {
            p += (r.alpha[k] - pi[area.bus - 1]) * c.p_d[j] + (c.nu - r.beta[k]) * c.r_d[j];
        }
    }
    p
}

fn crit3(pool: &Pool) -> Verdict {
    let (mut n, mut worst) = (0, 0.0f64);
    for (i, s) in pool.solves.iter().enumerate() {
        let Some(r) = s.result() else { continue };
        if s.variant != Variant::Full {
            continue;
        }
        n += 1;
        let bil = bilinear_profit(&s.case, r);
        let d = (r.linear_objective - bil).abs() / (1.0 + bil.abs());
        worst = worst.max(d);
        if d > 1e-6 {
            return Verdict::Fail(format!("solve {i}: linear {} vs bilinear {bil}", r.linear_objective));
        }
    }
    let msg = format!("{n} incumbents, worst scaled diff {worst:.1e}");
    if n >= 100 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(format!("{msg}; fewer than 100"))
    }
}

fn crit4(pool: &Pool) -> Verdict {
    let (mut n, mut wc, mut wr) = (0, 0.0f64, 0.0f64);
    for (i, s) in pool.solves.iter().enumerate() {
        let Some(r) = s.result() else { continue };
        n += 1;
        let case = variant_case(&s.case, s.variant);
        let c = clear_wem(&case, &r.bid_prices).unwrap();
        wc = wc.max(rel(r.clearing.objective, c.objective));
        for (k, area) in case.areas.iter().enumerate() {
            let best = area_response(r.alpha[k], r.beta[k], area);
            wr = wr.max(rel(r.responses[k].objective, best.objective));
        }
        if wc > 1e-6 || wr > 1e-6 {
            return Verdict::Fail(format!("solve {i}: clearing diff {wc:.1e}, response diff {wr:.1e}"));
        }
    }
    Verdict::Pass(format!("{n} incumbents, clearing diff {wc:.1e}, response diff {wr:.1e}"))
}

fn crit5(pool: &Pool) -> Verdict {
    let (mut n, mut worst) = (0, 0.0f64);
    for s in pool.solves.iter().filter(|s| s.variant == Variant::Nonprofit) {
        let Some(r) = s.result() else { continue };
        n += 1;
        worst = worst.max(r.profit.abs());
    }
    let msg = format!("{n} nonprofit solves, max |profit| {worst:.1e}");
    if n > 0 && worst <= 1e-9 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn congested(r: &JointResult) -> bool {
    r.clearing.mu_lo.iter().chain(&r.clearing.mu_hi).any(|m| m.abs() > 1e-6)
}

fn crit6(pool: &Pool, groups: &[[usize; 3]]) -> Verdict {
    let mut n = 0;
    let mut margin = f64::INFINITY;
    for g in groups {
        let [full, eq, np] = g.map(|i| pool.solves[i].result());
        let Some(full) = full else { continue };
        if !congested(full) {
            continue;
        }
        n += 1;
        let tol = full.gap.max(1e-6) * (1.0 + full.profit.abs());
        for other in [eq, np].into_iter().flatten() {
            margin = margin.min(full.profit - other.profit);
            if full.profit < other.profit - tol {
                return Verdict::Fail(format!("full {} below {} {}", full.profit, other.variant, other.profit));
            }
        }
    }
    let msg = format!("{n} congested cases, smallest margin {margin:.3}");
    if n > 0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(format!("{msg}; no congested case"))
    }
}

fn crit7() -> Verdict {
    let case = load_case(&std::fs::read_to_string(data("case9_desk.toml")).unwrap()).unwrap();
    let spec = SweepSpec::linspace(SweepTarget::AlphaOffset, -10.0, 10.0, 21);
    let start = Instant::now();
    let res = run_sweep(&case, &spec, &JointOptions::default(), 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut profit = Vec::new();
    let mut welfare = Vec::new();
    for row in &res.rows {
        match &row.result {
            Some(r) => {
                profit.push(r.profit);
                welfare.push(r.welfare_total);
            }
            None => return Verdict::Fail(format!("offset {} has no solution ({:?})", row.offset, row.status)),
        }
    }
    let p0 = profit[10];
    let gap = res.rows.iter().filter_map(|r| r.result.as_ref()).map(|r| r.gap).fold(1e-6, f64::max);
    let peak = profit.iter().all(|p| *p <= p0 + gap * (1.0 + p0.abs()));
    let tail = &profit[18..];
    let flat = tail.iter().all(|p| (p - tail[0]).abs() <= 1e-6 * (1.0 + tail[0].abs())) && tail[0] > 0.0;
    let mono = welfare.windows(2).all(|w| w[1] <= w[0] + 1e-6 * (1.0 + w[0].abs()));
    let msg = format!(
        "profit(0) {p0:.3} is max: {peak}; tail {:.3} constant: {flat}; total welfare non-increasing: {mono}; {secs:.1}s",
        tail[0]
    );
    if peak && flat && mono && secs < 1800.0 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn crit8(pool: &Pool) -> Verdict {
    let (mut hits, mut warns) = (0, Vec::new());
    for (i, s) in pool.solves.iter().enumerate() {
        let Some(r) = s.result() else { continue };
        let lossless = s.case.network.loss_factors.as_ref().is_none_or(|l| l.iter().all(|x| *x == 0.0));
        if s.variant != Variant::Full || congested(r) || !lossless {
            continue;
        }
        for (k, area) in s.case.areas.iter().enumerate() {
            let bp = response_breakpoints(area, &s.case.caps).alpha;
            let nearest =
                *bp.iter().min_by(|a, b| (*a - r.alpha[k]).abs().total_cmp(&(*b - r.alpha[k]).abs())).unwrap();
            if (nearest - r.alpha[k]).abs() <= 1e-6 {
                hits += 1;
                continue;
            }
            let mut alpha = r.alpha.clone();
            alpha[k] = nearest;
            let opts = JointOptions { fixed_alpha: Some(alpha), ..JointOptions::default() };
            let snapped = solve_joint(&s.case, Variant::Full, &opts).unwrap();
            match snapped.result {
                Some(x) if rel(x.profit, r.profit) <= 1e-6 => warns.push(format!(
                    "solve {i} area {}: alpha {:.4} off by {:.2e}",
                    k + 1,
                    r.alpha[k],
                    r.alpha[k] - nearest
                )),
                _ => return Verdict::Fail(format!("solve {i} area {}: alpha {} not a breakpoint", k + 1, r.alpha[k])),
            }
        }
    }
    for w in &warns {
        println!("      warn: {w}, profit unchanged at the breakpoint");
    }
    Verdict::Pass(format!("{hits} areas on a breakpoint, {} flat-optimum warnings", warns.len()))
}

fn crit9() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let gen =
        |id, bus, a| GenOffer { id, bus, energy_price: a, reserve_price: 0.0, p_min: 0.0, p_max: 200.0, r_max: 0.0 };
    let two_bus = Case {
        reserve_req: 0.0,
        network: Network {
            buses: 2,
            slack_bus: 1,
            lines: vec![Line { id: 1, from: 1, to: 2, reactance: 0.1, flow_limit: 60.0 }],
            loss_factors: None,
            isf: None,
        },
        gens: vec![gen(1, 1, 10.0), gen(2, 2, 30.0)],
        bids: vec![LseBid {
            id: 1,
            bus: 2,
            energy_price: 100.0,
            reserve_price: 0.0,
            p_min: 100.0,
            p_max: 100.0,
            r_max: 0.0,
            strategic: false,
        }],
        areas: vec![],
        caps: PriceCaps::default(),
        bigm: BigMPolicy::default(),
    };
    let c = clear_wem(&two_bus, &two_bus.stored_bid_prices()).unwrap();
    let d =
        (c.p_g[0] - 60.0).abs().max((c.p_g[1] - 40.0).abs()).max((c.lmp[0] - 10.0).abs()).max((c.lmp[1] - 30.0).abs());
    ok &= d < 1e-9;
    notes.push(format!("2-bus dispatch ({:.3}, {:.3}) prices ({:.3}, {:.3})", c.p_g[0], c.p_g[1], c.lmp[0], c.lmp[1]));

    let ring = [(1, 2), (2, 3), (3, 1)].map(|(f, t)| Line { id: f, from: f, to: t, reactance: 0.1, flow_limit: 100.0 });
    let isf = compute_isf(&ring, 3, 1).unwrap();
    let v = isf.get(0, 1);
    ok &= (v + 2.0 / 3.0).abs() < 1e-12;
    notes.push(format!("ring ISF {v:.6}"));

    let mut r = rng(909);
    let (mut solved, mut worst) = (0, 0.0f64);
    for i in 0..1000 {
        let n = r.random_range(2..=12);
        let m = r.random_range(1..=10);
        let model = random_lp(&mut r, i % 2 == 0, n, m);
        let sol = solve_lp(&model).unwrap();
        if sol.status == LpStatus::Optimal {
            solved += 1;
            worst = worst.max(sol.relative_duality_gap(&model));
        }
    }
    ok &= worst <= 1e-7;
    notes.push(format!("1000 LPs ({solved} optimal) duality gap {worst:.1e}"));
    let msg = notes.join("; ");
    if ok {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn crit10() -> Verdict {
    let run = || {
        let case = gen_case("case9_desk.gen.toml", 1);
        let text = save_case(&case).unwrap();
        let out = solve_joint(&case, Variant::Full, &JointOptions::default()).unwrap();
        let csv = report_csv(&case, &RunReport::from_outcome(Variant::Full, &out));
        let mps = export_mps(&build_joint_milp(&case, Variant::Full).unwrap().model).text;
        let spec = SweepSpec::linspace(SweepTarget::RivalBidOffset, -2.0, 2.0, 3);
        let sweep = sweep_csv(&run_sweep(&case, &spec, &JointOptions::default(), 1).unwrap().rows, case.areas.len());
        [text, csv, mps, sweep]
    };
    let (a, b) = (run(), run());
    let names = ["case", "report CSV", "MPS", "sweep CSV"];
    let diff: Vec<&str> = names.iter().zip(a.iter().zip(&b)).filter(|(_, (x, y))| x != y).map(|(n, _)| *n).collect();
    if diff.is_empty() {
        Verdict::Pass(format!("{} identical across two runs", names.join(", ")))
    } else {
        Verdict::Fail(format!("differs: {}", diff.join(", ")))
    }
}

fn crit11() -> Verdict {
    let case = gen_case("case9_large.gen.toml", 1);
    let jm = build_joint_milp(&case, Variant::Full).unwrap();
    let bins = jm.model.num_binaries();
    let mps = export_mps(&jm.model).text;
    let bv = mps.lines().filter(|l| l.trim_start().starts_with("BV ")).count();
    let sections =
        ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"].iter().all(|s| mps.lines().any(|l| l.starts_with(s)));
    if bins != 415 || bv != 415 || !sections {
        return Verdict::Fail(format!("{bins} binaries, {bv} BV bounds, sections present: {sections}"));
    }
    let opts = JointOptions {
        milp: MilpOptions { gap: 0.01, time_limit: Some(Duration::from_secs(1800)), ..MilpOptions::default() },
        ..JointOptions::default()
    };
    let out = solve_joint(&case, Variant::Full, &opts).unwrap();
    let gap = out.milp.gap;
    let msg = format!(
        "415 binaries, MPS with 415 BV bounds; gap {:.2}% after {:.0}s (incumbent {:.3}, bound {:.3})",
        100.0 * gap,
        out.milp.seconds,
        out.milp.objective,
        out.milp.bound
    );
    if out.milp.has_incumbent() && gap <= 0.01 {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, v: Verdict, t: Instant| {
        let (tag, msg) = match v {
            Verdict::Pass(m) => ("pass", m),
            Verdict::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} {id:>2}  {msg}  ({:.1}s)", t.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    report(1, crit1(), t);

    let t = Instant::now();
    let mut pool = Pool { solves: Vec::new() };
    let mut r = rng(202);
    let mut groups = Vec::new();
    for i in 0..110 {
        let shape = pool_shape(i);
        let case = random_case(&mut r, &shape);
        let full = pool.solve(&case, Variant::Full, &JointOptions::default());
        if i % 3 == 0 {
            pool.solve(&case, Variant::Nonprofit, &JointOptions::default());
        }
        if shape.congested {
            let eq = pool.solve(&case, Variant::EqualPrice, &JointOptions::default());
            let np = pool.solve(&case, Variant::Nonprofit, &JointOptions::default());
            groups.push([full, eq, np]);
        }
    }
    for seed in 1..=6 {
        let case = gen_case("case9_congested.gen.toml", seed);
        let g = [Variant::Full, Variant::EqualPrice, Variant::Nonprofit]
            .map(|v| pool.solve(&case, v, &JointOptions::default()));
        groups.push(g);
    }
    let desk = gen_case("case9_desk.gen.toml", 1);
    for v in [Variant::Full, Variant::Nonprofit, Variant::NoReserve] {
        pool.solve(&desk, v, &JointOptions::default());
    }
    println!("      {} solves in the shared pool ({:.1}s)", pool.solves.len(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    report(2, crit2(&pool), t);
    report(3, crit3(&pool), t);
    report(4, crit4(&pool), t);
    report(5, crit5(&pool), t);
    report(6, crit6(&pool, &groups), t);
    let t = Instant::now();
    report(7, crit7(), t);
    let t = Instant::now();
    report(8, crit8(&pool), t);
    let t = Instant::now();
    report(9, crit9(), t);
    let t = Instant::now();
    report(10, crit10(), t);
    let t = Instant::now();
    report(11, crit11(), t);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
