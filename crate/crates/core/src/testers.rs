//! Non-adaptive one-sided testers.
//!
//! Every tester first draws a [`TestPlan`] from `(n, d, k, ε)` and the RNG
//! alone, reads all planned cells, and only then evaluates the plan against
//! the property. The plan never depends on the values read.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::{Array, BoxRegion, Coord, QueryLog, Shape, Symbol};
use crate::error::{Error, Result};
use crate::grid::{boundary_cells, build_grid, Block, Grid, GridSystem};
use crate::inference::{infer, scan_region, BoundaryAssignment, DEFAULT_BUDGET};
use crate::property::LocalProperty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Simple,
    Canonical,
    Pot,
    AmplifiedPot,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Simple => "simple",
            Algo::Canonical => "canonical",
            Algo::Pot => "pot",
            Algo::AmplifiedPot => "amplified_pot",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Algo::Simple),
            "canonical" => Ok(Algo::Canonical),
            "pot" => Ok(Algo::Pot),
            "amplified_pot" | "amplified-pot" => Ok(Algo::AmplifiedPot),
            _ => Err(Error::Argument(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub algo: Algo,
    /// Proximity parameter; ignored by the plain POT.
    pub epsilon: f64,
    /// Search-node cap for generic multi-dimensional inference.
    pub budget: u64,
}

impl TestConfig {
    pub fn new(algo: Algo, epsilon: f64) -> Result<Self> {
        let cfg = TestConfig { algo, epsilon, budget: DEFAULT_BUDGET };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Argument(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Why a tester rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Evidence {
    /// A forbidden window at `location`, found inside the closure of a
    /// level-0 (or simple-test) block, or anywhere under a full query.
    ForbiddenWindow { level: usize, block: Option<Block>, location: Coord },
    /// A block whose boundary admits no forbidden-free completion.
    Unrepairable { level: usize, block: Block, closure: BoxRegion, interior: BoxRegion },
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub accept: bool,
    pub evidence: Option<Evidence>,
    pub log: QueryLog,
}

/// One thing a plan asks to decide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    /// Read everything, scan every window.
    Full,
    /// Read the closure of a block, look for a forbidden window inside it.
    Closure { grid: usize, block: Block },
    /// Read the boundary of a block, decide repairability.
    Boundary { grid: usize, block: Block },
}

/// The queries and decisions of one test run, fixed before any reads.
#[derive(Clone, Debug)]
pub struct TestPlan {
    pub shape: Shape,
    pub k: usize,
    pub grids: Vec<Grid>,
    pub checks: Vec<Check>,
}

impl TestPlan {
    fn full(shape: Shape, k: usize) -> Self {
        TestPlan { shape, k, grids: vec![], checks: vec![Check::Full] }
    }

    /// Cells read for one check, row-major.
    pub fn cells(&self, check: &Check) -> Vec<Coord> {
        match check {
            Check::Full => self.shape.full_box().iter().collect(),
            Check::Closure { grid, block } => self.grids[*grid].closure_box(block).iter().collect(),
            Check::Boundary { grid, block } => {
                let g = &self.grids[*grid];
                boundary_cells(&g.closure_box(block), &g.block_box(block))
            }
        }
    }

    /// Every cell the plan reads, sorted and deduplicated.
    pub fn query_set(&self) -> Vec<Coord> {
        let mut all: Vec<Coord> = self.checks.iter().flat_map(|c| self.cells(c)).collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

fn eps_root(eps: f64, d: usize) -> f64 {
    eps.powf(1.0 / d as f64)
}

/// Floor with a little slack so exact powers of two survive rounding.
fn floor_tol(x: f64) -> f64 {
    (x + 1e-9).floor()
}

/// Whether the simple test must read the whole array.
pub fn simple_falls_back(n: usize, d: usize, k: usize, eps: f64) -> bool {
    let (nf, kf) = (n as f64, k as f64);
    kf > eps_root(eps, d) * nf / 4.0 || kf.powi(d as i32) / eps > nf.powi(d as i32) / 2.0
}

/// `W = floor(n^{d/(d+1)} k^{1/(d+1)} ε^{1/(d+1)})`.
pub fn simple_width(n: usize, d: usize, k: usize, eps: f64) -> usize {
    let e = 1.0 / (d as f64 + 1.0);
    floor_tol((n as f64).powf(d as f64 * e) * (k as f64).powf(e) * eps.powf(e)) as usize
}

/// Whether the canonical test (and the POT) must read the whole array.
pub fn canonical_falls_back(n: usize, d: usize, k: usize, eps: f64) -> bool {
    n < 2 * k || k as f64 > eps_root(eps, d) * n as f64 / 10.0
}

/// The unclamped level count `floor(log2(ε^{1/d} n / k))`.
pub fn r_prime(n: usize, d: usize, k: usize, eps: f64) -> i64 {
    floor_tol((eps_root(eps, d) * n as f64 / k as f64).log2()) as i64
}

/// Basic-step repetitions `ceil(2 * 3^d / ε)`.
pub fn canonical_iterations(d: usize, eps: f64) -> usize {
    (2.0 * 3f64.powi(d as i32) / eps - 1e-9).ceil() as usize
}

/// Blocks sampled by the simple test: `ceil(2 / ε)`.
pub fn simple_samples(eps: f64) -> usize {
    (2.0 / eps - 1e-9).ceil() as usize
}

/// Reference query budgets used in reports: the simple test's proven bound,
/// and for the grid-system testers `20 (k/ε)(log2(εn/k) + 3)` in one
/// dimension or `20 · 6^d · k · ε^{-1/d} · n^{d-1}` above.
pub fn theoretical_bound(algo: Algo, n: usize, d: usize, k: usize, eps: f64) -> f64 {
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    let full = nf.powi(d as i32);
    let b = match algo {
        Algo::Simple => {
            2.0 * (df + 1.0) * nf.powf(df - df / (df + 1.0)) * kf.powf(df / (df + 1.0)) * eps.powf(-1.0 / (df + 1.0))
        }
        Algo::Canonical | Algo::AmplifiedPot if d == 1 => 20.0 * (kf / eps) * ((eps * nf / kf).log2() + 3.0),
        Algo::Canonical | Algo::AmplifiedPot => {
            20.0 * 6f64.powi(d as i32) * kf * eps.powf(-1.0 / df) * nf.powi(d as i32 - 1)
        }
        Algo::Pot if d == 1 => 20.0 * kf * ((nf / kf).log2() + 3.0),
        Algo::Pot => 20.0 * 6f64.powi(d as i32) * kf * nf.powi(d as i32 - 1),
    };
    b.min(full)
}

fn plan_simple<R: Rng + ?Sized>(shape: Shape, k: usize, eps: f64, rng: &mut R) -> Result<TestPlan> {
    let (n, d) = (shape.n, shape.d);
    if simple_falls_back(n, d, k, eps) {
        return Ok(TestPlan::full(shape, k));
    }
    let w = simple_width(n, d, k, eps).max(k);
    let grid = build_grid(n, d, k, w)?;
    let count = grid.block_count();
    let mut checks: Vec<Check> = grid.blocks().into_iter().map(|b| Check::Boundary { grid: 0, block: b }).collect();
    for _ in 0..simple_samples(eps) {
        checks.push(Check::Closure { grid: 0, block: grid.block_at(rng.random_range(0..count)) });
    }
    Ok(TestPlan { shape, k, grids: vec![grid], checks })
}

/// `iterations` basic steps over the `(n, d, k, 2k)` system, each sampling
/// one level-0 closure and one boundary per level `1..=levels`.
fn plan_steps<R: Rng + ?Sized>(
    shape: Shape,
    k: usize,
    iterations: usize,
    levels: impl Fn(usize) -> usize,
    rng: &mut R,
) -> Result<TestPlan> {
    let sys = GridSystem::new(shape.n, shape.d, k, 2 * k)?;
    let top = levels(sys.r());
    let grids: Vec<Grid> = sys.grids()[..=top].to_vec();
    let counts: Vec<usize> = grids.iter().map(Grid::block_count).collect();
    let mut checks = Vec::with_capacity(iterations * (top + 1));
    for _ in 0..iterations {
        checks.push(Check::Closure { grid: 0, block: grids[0].block_at(rng.random_range(0..counts[0])) });
        for level in 1..=top {
            let block = grids[level].block_at(rng.random_range(0..counts[level]));
            checks.push(Check::Boundary { grid: level, block });
        }
    }
    Ok(TestPlan { shape, k, grids, checks })
}

/// Draw the plan for `cfg.algo`. Depends only on the shape, `k`, `ε` and the RNG.
pub fn plan<R: Rng + ?Sized>(shape: Shape, k: usize, cfg: &TestConfig, rng: &mut R) -> Result<TestPlan> {
    cfg.validate()?;
    let (n, d, eps) = (shape.n, shape.d, cfg.epsilon);
    if n < k {
        return Err(Error::Argument(format!("n={n} is smaller than k={k}")));
    }
    match cfg.algo {
        Algo::Simple => plan_simple(shape, k, eps, rng),
        Algo::Canonical => {
            if canonical_falls_back(n, d, k, eps) {
                return Ok(TestPlan::full(shape, k));
            }
            let rp = r_prime(n, d, k, eps);
            plan_steps(shape, k, canonical_iterations(d, eps), |r| rp.clamp(1.min(r as i64), r as i64) as usize, rng)
        }
        Algo::Pot | Algo::AmplifiedPot => {
            if n < 2 * k {
                return Ok(TestPlan::full(shape, k));
            }
            let iterations = if cfg.algo == Algo::Pot { 1 } else { canonical_iterations(d, eps) };
            plan_steps(shape, k, iterations, |r| r, rng)
        }
    }
}

/// Values read so far, keyed by linear index.
struct Observed<'a, S> {
    shape: Shape,
    values: HashMap<usize, &'a S>,
}

impl<S: Symbol> Observed<'_, S> {
    fn get(&self, c: &[usize]) -> Result<S> {
        self.values
            .get(&self.shape.linear(c))
            .map(|&v| v.clone())
            .ok_or_else(|| Error::Argument(format!("cell {:?} was not queried", Coord::new(c.to_vec()))))
    }
}

/// Whether a block is a witness from the values available through `read`:
/// at level 0 its closure contains a forbidden window, above it is
/// unrepairable.
pub fn is_witness<S: Symbol>(
    prop: &LocalProperty<S>,
    grid: &Grid,
    level: usize,
    block: &Block,
    read: impl Fn(&Coord) -> Option<S>,
    budget: u64,
) -> Result<bool> {
    let closure = grid.closure_box(block);
    let missing = |c: &Coord| Error::Argument(format!("cell {c:?} is unavailable"));
    if level == 0 {
        let vals = closure.iter().map(|c| read(&c).ok_or_else(|| missing(&c))).collect::<Result<Vec<_>>>()?;
        Ok(scan_region(prop, &closure, &vals).is_some())
    } else {
        let interior = grid.block_box(block);
        let pairs = boundary_cells(&closure, &interior)
            .into_iter()
            .map(|c| read(&c).map(|v| (c.clone(), v)).ok_or_else(|| missing(&c)))
            .collect::<Result<Vec<_>>>()?;
        let b = BoundaryAssignment::new(closure, interior, pairs)?;
        Ok(!infer(prop, &b, false, budget)?.repairable)
    }
}

fn evaluate<S: Symbol>(
    prop: &LocalProperty<S>,
    plan: &TestPlan,
    obs: &Observed<'_, S>,
    budget: u64,
) -> Result<Option<Evidence>> {
    let mut seen: HashMap<&Check, ()> = HashMap::new();
    for check in &plan.checks {
        if seen.insert(check, ()).is_some() {
            continue;
        }
        match check {
            Check::Full => {
                let a = Array::new(plan.shape.n, plan.shape.d, plan.shape.full_box().iter().map(|c| obs.get(&c)).collect::<Result<_>>()?)?;
                if let Some(location) = prop.satisfies(&a)? {
                    return Ok(Some(Evidence::ForbiddenWindow { level: 0, block: None, location }));
                }
            }
            Check::Closure { grid, block } => {
                let closure = plan.grids[*grid].closure_box(block);
                let vals = closure.iter().map(|c| obs.get(&c)).collect::<Result<Vec<_>>>()?;
                if let Some(location) = scan_region(prop, &closure, &vals) {
                    return Ok(Some(Evidence::ForbiddenWindow { level: *grid, block: Some(block.clone()), location }));
                }
            }
            Check::Boundary { grid, block } => {
                let g = &plan.grids[*grid];
                let (closure, interior) = (g.closure_box(block), g.block_box(block));
                let cells = boundary_cells(&closure, &interior);
                let pairs = cells.into_iter().map(|c| obs.get(&c).map(|v| (c, v))).collect::<Result<Vec<_>>>()?;
                let b = BoundaryAssignment::new(closure.clone(), interior.clone(), pairs)?;
                if !infer(prop, &b, false, budget)?.repairable {
                    return Ok(Some(Evidence::Unrepairable { level: *grid, block: block.clone(), closure, interior }));
                }
            }
        }
    }
    Ok(None)
}

/// Read every planned cell of `a`, then decide.
pub fn execute<S: Symbol>(prop: &LocalProperty<S>, a: &Array<S>, plan: &TestPlan, budget: u64) -> Result<Verdict> {
    prop.check_array(a)?;
    if plan.shape != a.shape() || plan.k != prop.k() {
        return Err(Error::Shape("plan was drawn for a different shape or locality".into()));
    }
    let mut log = QueryLog::new(a.shape());
    let mut values = HashMap::new();
    for check in &plan.checks {
        for c in plan.cells(check) {
            let v = log.read(a, &c)?;
            values.insert(a.shape().linear(&c), v);
        }
    }
    let obs = Observed { shape: a.shape(), values };
    let evidence = evaluate(prop, plan, &obs, budget)?;
    Ok(Verdict { accept: evidence.is_none(), evidence, log })
}

/// Plan and execute in one go.
pub fn run_test<S: Symbol, R: Rng + ?Sized>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    cfg: &TestConfig,
    rng: &mut R,
) -> Result<Verdict> {
    let p = plan(a.shape(), prop.k(), cfg, rng)?;
    execute(prop, a, &p, cfg.budget)
}

pub fn simple_test<S: Symbol, R: Rng + ?Sized>(prop: &LocalProperty<S>, a: &Array<S>, eps: f64, rng: &mut R) -> Result<Verdict> {
    run_test(prop, a, &TestConfig::new(Algo::Simple, eps)?, rng)
}

pub fn canonical_test<S: Symbol, R: Rng + ?Sized>(prop: &LocalProperty<S>, a: &Array<S>, eps: f64, rng: &mut R) -> Result<Verdict> {
    run_test(prop, a, &TestConfig::new(Algo::Canonical, eps)?, rng)
}

pub fn pot<S: Symbol, R: Rng + ?Sized>(prop: &LocalProperty<S>, a: &Array<S>, rng: &mut R) -> Result<Verdict> {
    run_test(prop, a, &TestConfig::new(Algo::Pot, 1.0)?, rng)
}

pub fn amplified_pot<S: Symbol, R: Rng + ?Sized>(prop: &LocalProperty<S>, a: &Array<S>, eps: f64, rng: &mut R) -> Result<Verdict> {
    run_test(prop, a, &TestConfig::new(Algo::AmplifiedPot, eps)?, rng)
}

/// Re-check evidence against the full array: the forbidden window really is
/// forbidden, or the block's boundary really admits no repair and its
/// closure really contains a forbidden window.
pub fn evidence_holds<S: Symbol>(prop: &LocalProperty<S>, a: &Array<S>, ev: &Evidence, budget: u64) -> Result<bool> {
    match ev {
        Evidence::ForbiddenWindow { location, .. } => prop.is_forbidden(&a.subarray(location, prop.k())?),
        Evidence::Unrepairable { closure, interior, .. } => {
            let b = BoundaryAssignment::from_fn(closure.clone(), interior.clone(), |c| a.get(c).expect("in range").clone())?;
            let vals: Vec<S> = closure.iter().map(|c| a.get(&c).cloned()).collect::<Result<_>>()?;
            Ok(!infer(prop, &b, false, budget)?.repairable && scan_region(prop, closure, &vals).is_some())
        }
    }
}
