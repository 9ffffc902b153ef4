//! LP-based branch-and-bound over binary columns.
//!
//! Nodes carry their branching decisions as a shared linked list; every node
//! re-applies them to the root bounds, runs bound propagation and warm-starts
//! the dual simplex from whatever basis the worker's engine holds. The search
//! plunges depth-first and restarts from the best-bound open node whenever a
//! plunge ends.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use super::model::{Model, Sense, VarKind};
use super::propagate::Propagator;
use super::simplex::{Simplex, SimplexOptions, SimplexStatus};
use super::SolverError;

/// Proposes a full 0/1 assignment from a fractional LP point.
pub trait RoundingRule: Send + Sync {
    fn round(&self, x: &[f64]) -> Vec<(usize, f64)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branching {
    MostFractional,
    /// Product of estimated down and up degradations.
    Pseudocost,
}

#[derive(Clone)]
pub struct MilpOptions {
    /// Relative gap `|bound - incumbent| / (1 + |incumbent|)` at which to stop.
    pub gap: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub workers: usize,
    pub int_tol: f64,
    /// Largest row or bound violation accepted for an incumbent.
    pub feas_tol: f64,
    pub propagate: bool,
    /// Run the rounding heuristic every this many nodes (0 = root only).
    pub heuristic_every: usize,
    pub rounding: Option<Arc<dyn RoundingRule>>,
    pub simplex: SimplexOptions,
    pub branching: Branching,
    /// Print a progress line to stderr at this interval.
    pub log_every: Option<Duration>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            gap: 1e-6,
            time_limit: None,
            node_limit: None,
            workers: 1,
            int_tol: 1e-6,
            feas_tol: 1e-6,
            propagate: true,
            heuristic_every: 25,
            rounding: None,
            // big-M rows amplify primal slack on binaries
            simplex: SimplexOptions { fixed_tol: 1e-11, ..SimplexOptions::default() },
            branching: Branching::Pseudocost,
            log_every: None,
        }
    }
}

impl std::fmt::Debug for MilpOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MilpOptions")
            .field("gap", &self.gap)
            .field("time_limit", &self.time_limit)
            .field("node_limit", &self.node_limit)
            .field("workers", &self.workers)
            .field("propagate", &self.propagate)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or node limit hit; `x` holds the incumbent if one was found.
    LimitReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nodes: usize,
    pub bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    /// Incumbent objective in the model's sense (NaN without incumbent).
    pub objective: f64,
    /// Best proven bound in the model's sense.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub seconds: f64,
    /// Bound and incumbent each time either changed.
    pub trace: Vec<TracePoint>,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        self.x.is_some()
    }
}

pub fn relative_gap(bound: f64, objective: f64) -> f64 {
    if !objective.is_finite() || !bound.is_finite() {
        return f64::INFINITY;
    }
    (bound - objective).abs() / (1.0 + objective.abs())
}

struct Fix {
    var: usize,
    value: f64,
    parent: Option<Arc<Fix>>,
}

struct Node {
    id: u64,
    depth: usize,
    /// Internal (minimisation) LP value of the parent.
    bound: f64,
    fixes: Option<Arc<Fix>>,
    /// Branching variable, direction (0 down, 1 up) and distance moved.
    origin: Option<(usize, usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct Shared {
    queue: BinaryHeap<Node>,
    /// Internal objective and values of the incumbent.
    incumbent: Option<(f64, Vec<f64>)>,
    /// Bound of the node each worker is working on.
    working: Vec<Option<f64>>,
    /// Smallest bound among nodes dropped without proof (tolerance prune,
    /// numerical failure, limits).
    dropped: f64,
    next_id: u64,
    nodes: usize,
    lp_iterations: usize,
    stop: bool,
    limit_hit: bool,
    trace: Vec<TracePoint>,
    last_log: Instant,
    pseudo: Pseudocosts,
}

/// Average LP degradation per unit of fractionality, per binary and direction.
struct Pseudocosts {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
    total: [f64; 2],
    seen: [u32; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Self { sum: vec![[0.0; 2]; n], count: vec![[0; 2]; n], total: [0.0; 2], seen: [0; 2] }
    }

    fn update(&mut self, j: usize, dir: usize, per_unit: f64) {
        let v = per_unit.max(0.0);
        self.sum[j][dir] += v;
        self.count[j][dir] += 1;
        self.total[dir] += v;
        self.seen[dir] += 1;
    }

    fn get(&self, j: usize, dir: usize) -> f64 {
        if self.count[j][dir] > 0 {
            self.sum[j][dir] / self.count[j][dir] as f64
        } else if self.seen[dir] > 0 {
            self.total[dir] / self.seen[dir] as f64
        } else {
            1.0
        }
    }

    fn score(&self, j: usize, f: f64) -> f64 {
        let down = f * self.get(j, 0);
        let up = (1.0 - f) * self.get(j, 1);
        down.max(1e-6) * up.max(1e-6)
    }
}

struct Ctx<'a> {
    model: &'a Model,
    opts: &'a MilpOptions,
    sign: f64,
    binaries: Vec<usize>,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    prop: Propagator,
    start: Instant,
    shared: Mutex<Shared>,
    cv: Condvar,
}

impl Ctx<'_> {
    fn global_bound(&self, s: &Shared) -> f64 {
        let mut b = s.dropped;
        if let Some(n) = s.queue.peek() {
            b = b.min(n.bound);
        }
        for w in s.working.iter().flatten() {
            b = b.min(*w);
        }
        if let Some((v, _)) = &s.incumbent {
            b = b.min(*v);
        }
        b
    }

    fn record(&self, s: &mut Shared) {
        let bound = self.sign * self.global_bound(s);
        let inc = s.incumbent.as_ref().map_or(f64::NAN, |(v, _)| self.sign * v);
        let changed = match s.trace.last() {
            None => true,
            Some(t) => t.bound != bound || !(t.incumbent == inc || (t.incumbent.is_nan() && inc.is_nan())),
        };
        if changed {
            s.trace.push(TracePoint { nodes: s.nodes, bound, incumbent: inc });
        }
        if let Some(every) = self.opts.log_every {
            if s.last_log.elapsed() >= every {
                s.last_log = Instant::now();
                eprintln!(
                    "[bb] {:>8.1}s nodes {:>8} open {:>7} incumbent {:>14.6} bound {:>14.6} gap {:.3e}",
                    self.start.elapsed().as_secs_f64(),
                    s.nodes,
                    s.queue.len(),
                    inc,
                    bound,
                    relative_gap(bound, inc)
                );
            }
        }
    }

    fn gap_abs(&self, inc: f64) -> f64 {
        self.opts.gap * (1.0 + inc.abs())
    }

    fn offer_incumbent(&self, s: &mut Shared, val: f64, x: Vec<f64>) {
        let better = match &s.incumbent {
            None => true,
            Some((v, _)) => val < *v - 1e-12 * (1.0 + v.abs()),
        };
        if better {
            s.incumbent = Some((val, x));
            // drop open nodes that can no longer improve enough
            let cut = val - self.gap_abs(val);
            let queue = std::mem::take(&mut s.queue);
            let mut kept = BinaryHeap::with_capacity(queue.len());
            for n in queue.into_vec() {
                if n.bound < cut {
                    kept.push(n);
                } else if n.bound < val {
                    s.dropped = s.dropped.min(n.bound);
                }
            }
            s.queue = kept;
            self.record(s);
        }
    }

    fn limits_hit(&self, s: &Shared) -> bool {
        if let Some(t) = self.opts.time_limit {
            if self.start.elapsed() >= t {
                return true;
            }
        }
        if let Some(n) = self.opts.node_limit {
            if s.nodes >= n {
                return true;
            }
        }
        false
    }
}

/// Propagation only feeds binary fixings to the LP; tightened continuous
/// bounds carry a small outward slack that the LP would otherwise exploit.
fn keep_binary_bounds(model: &Model, lo: &mut [f64], hi: &mut [f64]) {
    for (j, v) in model.vars.iter().enumerate() {
        if v.kind != VarKind::Binary {
            lo[j] = v.lower;
            hi[j] = v.upper;
        }
    }
}

enum NodeResult {
    Pruned,
    /// Could not be evaluated; its bound stays unproven.
    Failed,
    Branch {
        value: f64,
        var: usize,
        frac: f64,
    },
}

struct Worker {
    spx: Simplex,
    heur: Simplex,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Worker {
    fn load_bounds(&mut self, ctx: &Ctx<'_>, fixes: &Option<Arc<Fix>>) -> bool {
        self.lo.clone_from(&ctx.root_lo);
        self.hi.clone_from(&ctx.root_hi);
        let mut f = fixes.as_ref();
        while let Some(fx) = f {
            self.lo[fx.var] = fx.value;
            self.hi[fx.var] = fx.value;
            f = fx.parent.as_ref();
        }
        if ctx.opts.propagate {
            if !ctx.prop.propagate(&mut self.lo, &mut self.hi) {
                return false;
            }
            keep_binary_bounds(ctx.model, &mut self.lo, &mut self.hi);
        }
        true
    }

    fn apply(spx: &mut Simplex, lo: &[f64], hi: &[f64]) {
        for j in 0..lo.len() {
            if spx.bounds(j) != (lo[j], hi[j]) {
                spx.set_bounds(j, lo[j], hi[j]);
            }
        }
    }

    /// Solves with a warm start, retrying once from scratch on trouble.
    fn solve(spx: &mut Simplex, ctx: &Ctx<'_>, lo: &[f64], hi: &[f64]) -> Option<SimplexStatus> {
        Self::apply(spx, lo, hi);
        match spx.solve() {
            Ok(s) => Some(s),
            Err(_) => {
                let mut fresh = Simplex::with_options(ctx.model, ctx.opts.simplex);
                Self::apply(&mut fresh, lo, hi);
                let r = fresh.solve().ok();
                fresh.iterations += spx.iterations;
                *spx = fresh;
                r
            }
        }
    }

    /// Fixes every binary, solves the remaining LP in the heuristic engine
    /// and returns a feasible point with its internal objective.
    fn try_assignment(&mut self, ctx: &Ctx<'_>, assign: &[(usize, f64)]) -> Option<(f64, Vec<f64>)> {
        let mut lo = ctx.root_lo.clone();
        let mut hi = ctx.root_hi.clone();
        for &(j, v) in assign {
            let v = if v >= 0.5 { 1.0 } else { 0.0 };
            if v < lo[j] || v > hi[j] {
                return None;
            }
            lo[j] = v;
            hi[j] = v;
        }
        if ctx.opts.propagate {
            if !ctx.prop.propagate(&mut lo, &mut hi) {
                return None;
            }
            keep_binary_bounds(ctx.model, &mut lo, &mut hi);
        }
        match Self::solve(&mut self.heur, ctx, &lo, &hi)? {
            SimplexStatus::Optimal => {}
            _ => return None,
        }
        let mut x = self.heur.primal();
        for &j in &ctx.binaries {
            x[j] = x[j].round();
        }
        if ctx.model.max_violation(&x) > ctx.opts.feas_tol {
            return None;
        }
        Some((ctx.sign * ctx.model.objective_value(&x), x))
    }

    fn process(&mut self, ctx: &Ctx<'_>, node: &Node, run_heuristic: bool) -> NodeResult {
        if !self.load_bounds(ctx, &node.fixes) {
            return NodeResult::Pruned;
        }
        let (lo, hi) = (std::mem::take(&mut self.lo), std::mem::take(&mut self.hi));
        let status = Self::solve(&mut self.spx, ctx, &lo, &hi);
        self.lo = lo;
        self.hi = hi;
        let status = match status {
            Some(s) => s,
            None => return NodeResult::Failed,
        };
        if status != SimplexStatus::Optimal {
            return NodeResult::Pruned;
        }
        let value = ctx.sign * self.spx.objective();
        {
            let mut s = ctx.shared.lock().unwrap();
            if let Some((var, dir, dist)) = node.origin {
                if node.bound.is_finite() && dist > 0.0 {
                    s.pseudo.update(var, dir, (value - node.bound) / dist);
                }
            }
            if let Some((inc, _)) = &s.incumbent {
                if value >= *inc - ctx.gap_abs(*inc) {
                    drop(s);
                    if value < ctx.shared.lock().unwrap().incumbent.as_ref().unwrap().0 {
                        let mut s = ctx.shared.lock().unwrap();
                        s.dropped = s.dropped.min(value);
                    }
                    return NodeResult::Pruned;
                }
            }
        }
        let x = self.spx.primal();
        let mut best: Option<(usize, f64, f64)> = None;
        {
            let s = ctx.shared.lock().unwrap();
            for &j in &ctx.binaries {
                let f = x[j] - x[j].floor();
                if f.min(1.0 - f) <= ctx.opts.int_tol {
                    continue;
                }
                let score = match ctx.opts.branching {
                    Branching::MostFractional => f.min(1.0 - f),
                    Branching::Pseudocost => s.pseudo.score(j, f),
                };
                if best.is_none_or(|(_, _, b)| score > b * (1.0 + 1e-9)) {
                    best = Some((j, x[j], score));
                }
            }
        }
        let best = best.map(|(j, v, _)| (j, v));
        match best {
            None => {
                let assign: Vec<(usize, f64)> = ctx.binaries.iter().map(|&j| (j, x[j].round())).collect();
                let found = self.try_assignment(ctx, &assign);
                let settled = found.as_ref().is_some_and(|(v, _)| *v <= value + ctx.gap_abs(*v));
                if let Some((v, xs)) = found {
                    let mut s = ctx.shared.lock().unwrap();
                    ctx.offer_incumbent(&mut s, v, xs);
                }
                if settled {
                    return NodeResult::Pruned;
                }
                // values inside the integrality tolerance still move a big-M row
                let mut near: Option<(usize, f64)> = None;
                for &j in &ctx.binaries {
                    let f = (x[j] - x[j].round()).abs();
                    if f > 0.0 && self.lo[j] < self.hi[j] && near.is_none_or(|(_, b)| f > b) {
                        near = Some((j, f));
                    }
                }
                match near {
                    Some((var, _)) => NodeResult::Branch { value, var, frac: x[var] },
                    None => NodeResult::Failed,
                }
            }
            Some((var, frac)) => {
                if run_heuristic {
                    if let Some(rule) = &ctx.opts.rounding {
                        let assign = rule.round(&x);
                        if let Some((v, xs)) = self.try_assignment(ctx, &assign) {
                            let mut s = ctx.shared.lock().unwrap();
                            ctx.offer_incumbent(&mut s, v, xs);
                        }
                    }
                    let assign: Vec<(usize, f64)> = ctx.binaries.iter().map(|&j| (j, x[j].round())).collect();
                    if let Some((v, xs)) = self.try_assignment(ctx, &assign) {
                        let mut s = ctx.shared.lock().unwrap();
                        ctx.offer_incumbent(&mut s, v, xs);
                    }
                }
                NodeResult::Branch { value, var, frac }
            }
        }
    }
}

fn worker_loop(ctx: &Ctx<'_>, w: &mut Worker, wid: usize) {
    let mut local: Option<Node> = None;
    loop {
        let node = match local.take() {
            Some(n) => {
                let s = ctx.shared.lock().unwrap();
                if s.stop {
                    break;
                }
                n
            }
            None => {
                let mut s = ctx.shared.lock().unwrap();
                loop {
                    if s.stop {
                        return;
                    }
                    if let Some(n) = s.queue.pop() {
                        s.working[wid] = Some(n.bound);
                        break n;
                    }
                    if s.working.iter().all(|w| w.is_none()) {
                        s.stop = true;
                        ctx.cv.notify_all();
                        return;
                    }
                    s = ctx.cv.wait(s).unwrap();
                }
            }
        };
        let heuristic = {
            let mut s = ctx.shared.lock().unwrap();
            if ctx.limits_hit(&s) {
                s.limit_hit = true;
                s.stop = true;
                s.dropped = s.dropped.min(node.bound);
                s.working[wid] = None;
                ctx.cv.notify_all();
                return;
            }
            if let Some((inc, _)) = &s.incumbent {
                if node.bound >= *inc - ctx.gap_abs(*inc) {
                    if node.bound < *inc {
                        s.dropped = s.dropped.min(node.bound);
                    }
                    s.working[wid] = None;
                    s.nodes += 0;
                    drop(s);
                    ctx.cv.notify_all();
                    continue;
                }
            }
            s.working[wid] = Some(node.bound);
            s.nodes += 1;
            let every = ctx.opts.heuristic_every;
            node.depth == 0 || (every > 0 && s.nodes.is_multiple_of(every))
        };
        let iters_before = w.spx.iterations + w.heur.iterations;
        let res = w.process(ctx, &node, heuristic);
        let iters = w.spx.iterations + w.heur.iterations - iters_before;
        let mut s = ctx.shared.lock().unwrap();
        s.lp_iterations += iters;
        match res {
            NodeResult::Pruned => {
                s.working[wid] = None;
            }
            NodeResult::Failed => {
                s.dropped = s.dropped.min(node.bound);
                s.working[wid] = None;
            }
            NodeResult::Branch { value, var, frac } => {
                let up_first = frac >= 0.5;
                let mut kids = Vec::with_capacity(2);
                for v in [if up_first { 1.0 } else { 0.0 }, if up_first { 0.0 } else { 1.0 }] {
                    let id = s.next_id;
                    s.next_id += 1;
                    let origin = if v > 0.5 { (var, 1, 1.0 - frac) } else { (var, 0, frac) };
                    kids.push(Node {
                        id,
                        depth: node.depth + 1,
                        bound: value,
                        fixes: Some(Arc::new(Fix { var, value: v, parent: node.fixes.clone() })),
                        origin: Some(origin),
                    });
                }
                let second = kids.pop().unwrap();
                s.queue.push(second);
                let first = kids.pop().unwrap();
                s.working[wid] = Some(first.bound);
                local = Some(first);
                ctx.cv.notify_one();
            }
        }
        ctx.record(&mut s);
        if let Some((inc, _)) = &s.incumbent {
            let bound = ctx.global_bound(&s);
            if relative_gap(bound, *inc) <= ctx.opts.gap {
                s.stop = true;
                ctx.cv.notify_all();
            }
        }
    }
}

pub fn solve_milp(model: &Model, opts: &MilpOptions) -> Result<MilpSolution, SolverError> {
    let start = Instant::now();
    let sign = match model.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let binaries: Vec<usize> =
        model.vars.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(j, _)| j).collect();
    let mut root_lo: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
    let mut root_hi: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
    let prop = Propagator::new(model);
    let finish = |status, nodes, iters, trace| MilpSolution {
        status,
        x: None,
        objective: f64::NAN,
        bound: f64::NAN,
        gap: f64::INFINITY,
        nodes,
        lp_iterations: iters,
        seconds: start.elapsed().as_secs_f64(),
        trace,
    };
    if opts.propagate {
        if !prop.propagate(&mut root_lo, &mut root_hi) {
            return Ok(finish(MilpStatus::Infeasible, 0, 0, vec![]));
        }
        keep_binary_bounds(model, &mut root_lo, &mut root_hi);
    }

    let mut spx = Simplex::with_options(model, opts.simplex);
    Worker::apply(&mut spx, &root_lo, &root_hi);
    let root_status = spx.solve()?;
    match root_status {
        SimplexStatus::Optimal => {}
        SimplexStatus::Infeasible => return Ok(finish(MilpStatus::Infeasible, 1, spx.iterations, vec![])),
        SimplexStatus::Unbounded => return Ok(finish(MilpStatus::Unbounded, 1, spx.iterations, vec![])),
    }
    let root_value = sign * spx.objective();
    let workers = opts.workers.max(1);
    let ctx = Ctx {
        model,
        opts,
        sign,
        binaries,
        root_lo,
        root_hi,
        prop,
        start,
        shared: Mutex::new(Shared {
            queue: BinaryHeap::new(),
            incumbent: None,
            working: vec![None; workers],
            dropped: f64::INFINITY,
            next_id: 1,
            nodes: 0,
            lp_iterations: spx.iterations,
            stop: false,
            limit_hit: false,
            trace: Vec::new(),
            last_log: Instant::now(),
            pseudo: Pseudocosts::new(model.num_vars()),
        }),
        cv: Condvar::new(),
    };
    ctx.shared.lock().unwrap().queue.push(Node { id: 0, depth: 0, bound: root_value, fixes: None, origin: None });
    spx.iterations = 0;
    let make_worker = |spx: &Simplex| Worker { spx: spx.clone(), heur: spx.clone(), lo: Vec::new(), hi: Vec::new() };

    if workers == 1 {
        let mut w = make_worker(&spx);
        worker_loop(&ctx, &mut w, 0);
    } else {
        let proto = make_worker(&spx);
        std::thread::scope(|sc| {
            for wid in 0..workers {
                let mut w = Worker { spx: proto.spx.clone(), heur: proto.heur.clone(), lo: Vec::new(), hi: Vec::new() };
                let ctx = &ctx;
                sc.spawn(move || worker_loop(ctx, &mut w, wid));
            }
        });
    }

    let mut s = ctx.shared.into_inner().unwrap();
    // anything still open is unproven
    let open_min = s.queue.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    s.dropped = s.dropped.min(open_min);
    let (status, x, obj_int) = match s.incumbent.take() {
        Some((v, x)) => {
            let st = if relative_gap(sign * s.dropped.min(v), sign * v) > opts.gap {
                MilpStatus::LimitReached
            } else {
                MilpStatus::Optimal
            };
            (st, Some(x), v)
        }
        None => {
            let st =
                if s.limit_hit || s.dropped.is_finite() { MilpStatus::LimitReached } else { MilpStatus::Infeasible };
            (st, None, f64::NAN)
        }
    };
    let bound_int = if obj_int.is_nan() { s.dropped } else { s.dropped.min(obj_int) };
    let objective = sign * obj_int;
    let bound = sign * bound_int;
    Ok(MilpSolution {
        status,
        gap: relative_gap(bound, objective),
        x,
        objective,
        bound,
        nodes: s.nodes,
        lp_iterations: s.lp_iterations,
        seconds: start.elapsed().as_secs_f64(),
        trace: s.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::RowSense;

    #[test]
    fn pure_lp_passes_through() {
        let mut m = Model::new("t", Sense::Maximize);
        let x = m.add_var("x", 0.0, 10.0);
        m.add_objective_term(x, 2.0);
        m.add_row("r", [(x, 1.0)], RowSense::Le, 4.0);
        let s = solve_milp(&m, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective - 8.0).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = Model::new("k", Sense::Maximize);
        let v: Vec<usize> = (0..3).map(|i| m.add_binary(format!("b{i}"))).collect();
        for (j, c) in [5.0, 4.0, 3.0].iter().enumerate() {
            m.add_objective_term(v[j], *c);
        }
        m.add_row("r1", [(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], RowSense::Le, 5.0);
        m.add_row("r2", [(v[0], 4.0), (v[1], 1.0), (v[2], 2.0)], RowSense::Le, 11.0);
        m.add_row("r3", [(v[0], 3.0), (v[1], 4.0), (v[2], 2.0)], RowSense::Le, 8.0);
        let s = solve_milp(&m, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective - 9.0).abs() < 1e-9, "{}", s.objective);
    }

    #[test]
    fn contradictory_fixed_binaries_infeasible() {
        let mut m = Model::new("c", Sense::Minimize);
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.vars[a].lower = 1.0;
        m.vars[b].lower = 1.0;
        m.add_row("r", [(a, 1.0), (b, 1.0)], RowSense::Le, 1.0);
        let s = solve_milp(&m, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
    }
}
