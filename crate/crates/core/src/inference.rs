//! Block repairability from boundary values alone.
//!
//! A [`BoundaryAssignment`] fixes the values of a box's cells outside an
//! interior sub-box. A block is repairable when some interior fill leaves the
//! whole box free of forbidden windows.

use std::collections::HashMap;

use crate::arrays::{BoxRegion, Coord, IntSymbol, Symbol, Window};
use crate::error::{Error, Result};
use crate::grid::boundary_cells;
use crate::property::LocalProperty;

/// Default cap on search nodes for [`infer_nd`].
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Values of every cell of `closure` outside `interior`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryAssignment<S> {
    closure: BoxRegion,
    interior: BoxRegion,
    /// Indexed by row-major position inside `closure`; `None` on the interior.
    values: Vec<Option<S>>,
}

impl<S: Symbol> BoundaryAssignment<S> {
    /// `interior` must be a sub-box of `closure` (or empty). Fails unless the
    /// assigned cells are exactly `closure \ interior`.
    pub fn new(
        closure: BoxRegion,
        interior: BoxRegion,
        assigned: impl IntoIterator<Item = (Coord, S)>,
    ) -> Result<Self> {
        let mut values: Vec<Option<S>> = vec![None; closure.len()];
        let interior_inside = interior.is_empty()
            || (0..closure.dim()).all(|a| closure.lo[a] <= interior.lo[a] && interior.hi[a] <= closure.hi[a]);
        if interior.dim() != closure.dim() || !interior_inside {
            return Err(Error::Argument("interior is not a sub-box of the closure".into()));
        }
        let mut count = 0;
        for (c, v) in assigned {
            if !closure.contains(&c) || interior.contains(&c) {
                return Err(Error::Argument(format!("{c:?} is not a boundary cell")));
            }
            let slot = &mut values[closure.local_index(&c)];
            if slot.is_some() {
                return Err(Error::Argument(format!("{c:?} assigned twice")));
            }
            *slot = Some(v);
            count += 1;
        }
        if count != closure.len() - interior.len() {
            return Err(Error::Argument(format!(
                "boundary has {} cells but {count} were assigned",
                closure.len() - interior.len()
            )));
        }
        Ok(BoundaryAssignment { closure, interior, values })
    }

    /// Read every boundary cell through `read`.
    pub fn from_fn(closure: BoxRegion, interior: BoxRegion, mut read: impl FnMut(&Coord) -> S) -> Result<Self> {
        let cells = boundary_cells(&closure, &interior);
        let pairs: Vec<(Coord, S)> = cells
            .into_iter()
            .map(|c| {
                let v = read(&c);
                (c, v)
            })
            .collect();
        Self::new(closure, interior, pairs)
    }

    /// A one-dimensional closure of length `m` with the given values at
    /// positions `1..=m`; `None` marks the interior, which must be contiguous.
    pub fn line(slots: Vec<Option<S>>) -> Result<Self> {
        let m = slots.len();
        if m == 0 {
            return Err(Error::Argument("empty closure".into()));
        }
        let free: Vec<usize> = (0..m).filter(|&i| slots[i].is_none()).collect();
        let interior = match (free.first(), free.last()) {
            (Some(&a), Some(&b)) if b - a + 1 != free.len() => {
                return Err(Error::Argument("interior positions must be contiguous".into()));
            }
            (Some(&a), Some(&b)) => BoxRegion::new(vec![a + 1], vec![b + 1]),
            _ => BoxRegion::new(vec![1], vec![0]),
        };
        Ok(BoundaryAssignment { closure: BoxRegion::new(vec![1], vec![m]), interior, values: slots })
    }

    pub fn closure(&self) -> &BoxRegion {
        &self.closure
    }

    pub fn interior(&self) -> &BoxRegion {
        &self.interior
    }

    pub fn get(&self, c: &[usize]) -> Option<&S> {
        if !self.closure.contains(c) {
            return None;
        }
        self.values[self.closure.local_index(c)].as_ref()
    }

    /// Closure-indexed slots, `None` on the interior.
    pub fn slots(&self) -> &[Option<S>] {
        &self.values
    }

    /// Assigned cells with their values, row-major.
    pub fn assigned(&self) -> impl Iterator<Item = (Coord, &S)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (self.closure.local_coord(i), v)))
    }

    /// Full closure values with `fill` (interior, row-major) substituted.
    pub fn complete(&self, fill: &[S]) -> Result<Vec<S>> {
        if fill.len() != self.interior.len() {
            return Err(Error::Argument(format!(
                "fill has {} values for {} interior cells",
                fill.len(),
                self.interior.len()
            )));
        }
        let mut it = fill.iter();
        Ok(self
            .values
            .iter()
            .map(|v| match v {
                Some(v) => v.clone(),
                None => it.next().expect("interior count checked").clone(),
            })
            .collect())
    }
}

/// Outcome of an inference call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairVerdict<S> {
    pub repairable: bool,
    /// Interior values in row-major order, present iff repairable.
    pub fill: Option<Vec<S>>,
}

impl<S> RepairVerdict<S> {
    pub fn unrepairable() -> Self {
        RepairVerdict { repairable: false, fill: None }
    }

    pub fn repaired(fill: Vec<S>) -> Self {
        RepairVerdict { repairable: true, fill: Some(fill) }
    }
}

/// A specialised repairability decision procedure for one property family.
pub trait RepairEngine<S>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Decide repairability; compute a fill only when `want_fill`.
    fn infer(&self, prop: &LocalProperty<S>, boundary: &BoundaryAssignment<S>, want_fill: bool)
        -> Result<RepairVerdict<S>>;
}

/// First forbidden window inside `region`, whose values are given row-major.
pub fn scan_region<S: Symbol>(prop: &LocalProperty<S>, region: &BoxRegion, values: &[S]) -> Option<Coord> {
    let k = prop.k();
    region.window_locations(k).find(|loc| {
        let w = Window::extract(loc, k, |c| values[region.local_index(c)].clone());
        prop.forbidden(&w)
    })
}

/// Decide repairability with the best available method: the property's
/// engine, the 1D dynamic program, or bounded search.
pub fn infer<S: Symbol>(
    prop: &LocalProperty<S>,
    boundary: &BoundaryAssignment<S>,
    want_fill: bool,
    budget: u64,
) -> Result<RepairVerdict<S>> {
    if boundary.closure().dim() != prop.d() {
        return Err(Error::Shape(format!("closure has d={}, property d={}", boundary.closure().dim(), prop.d())));
    }
    if let Some(engine) = prop.engine() {
        return engine.infer(prop, boundary, want_fill);
    }
    let alphabet = prop
        .alphabet()
        .ok_or_else(|| Error::Capability("generic inference needs an explicit finite alphabet".into()))?;
    if prop.d() == 1 {
        infer_1d(prop, boundary, alphabet)
    } else {
        infer_nd(prop, boundary, alphabet, budget)
    }
}

fn alphabet_index<S: Symbol>(alphabet: &[S]) -> HashMap<&S, usize> {
    alphabet.iter().enumerate().map(|(i, s)| (s, i)).collect()
}

/// Level-by-level dynamic program over sliding windows of a 1D closure.
///
/// State after position `p` is the code of the last `k - 1` symbols; a
/// transition appends one symbol and is allowed iff the resulting window is
/// not forbidden and agrees with any fixed value at that position.
pub fn infer_1d<S: Symbol>(
    prop: &LocalProperty<S>,
    boundary: &BoundaryAssignment<S>,
    alphabet: &[S],
) -> Result<RepairVerdict<S>> {
    if prop.d() != 1 || boundary.closure().dim() != 1 {
        return Err(Error::Shape("infer_1d needs d = 1".into()));
    }
    if alphabet.is_empty() {
        return Err(Error::Capability("empty alphabet".into()));
    }
    let index = alphabet_index(alphabet);
    let slots: Vec<Option<usize>> = boundary
        .slots()
        .iter()
        .map(|v| match v {
            None => Ok(None),
            Some(v) => index
                .get(v)
                .map(|&i| Some(i))
                .ok_or_else(|| Error::Argument(format!("boundary value {v:?} is outside the alphabet"))),
        })
        .collect::<Result<_>>()?;
    let (k, s, m) = (prop.k(), alphabet.len(), slots.len());
    let decode = |mut code: usize, len: usize| -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = code % s;
            code /= s;
        }
        out
    };
    let fill_from = |syms: &[usize]| -> Vec<S> {
        syms.iter()
            .zip(&slots)
            .filter(|(_, fixed)| fixed.is_none())
            .map(|(&x, _)| alphabet[x].clone())
            .collect()
    };
    if m < k {
        let syms: Vec<usize> = slots.iter().map(|v| v.unwrap_or(0)).collect();
        return Ok(RepairVerdict::repaired(fill_from(&syms)));
    }

    let states = s.pow(k as u32 - 1);
    let forbidden: Vec<bool> = (0..states * s)
        .map(|code| {
            let vals = decode(code, k).into_iter().map(|x| alphabet[x].clone()).collect();
            prop.forbidden(&Window::pattern(k, 1, vals).expect("k symbols"))
        })
        .collect();

    // Seed: every prefix of length k-1 consistent with the fixed slots.
    let mut reach = vec![false; states];
    for (code, r) in reach.iter_mut().enumerate() {
        let syms = decode(code, k - 1);
        *r = syms.iter().zip(&slots).all(|(&x, fixed)| fixed.is_none_or(|f| f == x));
    }
    // back[p][state] = predecessor state at position p.
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(m - k + 1);
    for fixed in &slots[k - 1..] {
        let mut next = vec![false; states];
        let mut ptr = vec![u32::MAX; states];
        for (st, _) in reach.iter().enumerate().filter(|(_, r)| **r) {
            let range = match fixed {
                Some(f) => *f..*f + 1,
                None => 0..s,
            };
            for x in range {
                let window = st * s + x;
                if forbidden[window] {
                    continue;
                }
                let ns = window % states;
                if !next[ns] {
                    next[ns] = true;
                    ptr[ns] = st as u32;
                }
            }
        }
        reach = next;
        back.push(ptr);
    }
    let Some(end) = reach.iter().position(|&r| r) else {
        return Ok(RepairVerdict::unrepairable());
    };
    let mut syms = vec![0; m];
    let mut st = end;
    for p in (k - 1..m).rev() {
        syms[p] = st % s;
        st = back[p - (k - 1)][st] as usize;
    }
    syms[..k - 1].copy_from_slice(&decode(st, k - 1));
    Ok(RepairVerdict::repaired(fill_from(&syms)))
}

/// Exhaustive search over interior fills for any dimension, pruned by
/// checking each window as soon as its last interior cell is assigned.
/// `budget` caps the number of search nodes.
pub fn infer_nd<S: Symbol>(
    prop: &LocalProperty<S>,
    boundary: &BoundaryAssignment<S>,
    alphabet: &[S],
    budget: u64,
) -> Result<RepairVerdict<S>> {
    let closure = boundary.closure();
    let interior = boundary.interior();
    let k = prop.k();
    if alphabet.is_empty() && !interior.is_empty() {
        return Err(Error::Capability("empty alphabet".into()));
    }
    let mut values: Vec<Option<S>> = boundary.slots().to_vec();
    let cells: Vec<usize> = interior.iter().map(|c| closure.local_index(&c)).collect();

    // Windows grouped by the search step at which they become complete.
    let mut at_step: Vec<Vec<Coord>> = vec![Vec::new(); cells.len()];
    let mut upfront = Vec::new();
    for loc in closure.window_locations(k) {
        let lo: Vec<usize> = loc.iter().zip(&interior.lo).map(|(&a, &b)| a.max(b)).collect();
        let hi: Vec<usize> = loc.iter().zip(&interior.hi).map(|(&a, &b)| (a + k - 1).min(b)).collect();
        let overlap = BoxRegion::new(lo, hi.clone());
        if interior.is_empty() || overlap.is_empty() {
            upfront.push(loc);
        } else {
            at_step[interior.local_index(&hi)].push(loc);
        }
    }
    let window_ok = |values: &[Option<S>], loc: &Coord| {
        let w = Window::extract(loc, k, |c| values[closure.local_index(c)].clone().expect("assigned"));
        !prop.forbidden(&w)
    };
    if !upfront.iter().all(|loc| window_ok(&values, loc)) {
        return Ok(RepairVerdict::unrepairable());
    }

    let mut nodes: u64 = 0;
    let mut choice = vec![0usize; cells.len()];
    let mut step = 0usize;
    // Iterative depth-first search; `choice[step]` is the next symbol to try.
    loop {
        if step == cells.len() {
            let fill = cells.iter().map(|&i| values[i].clone().expect("assigned")).collect();
            return Ok(RepairVerdict::repaired(fill));
        }
        if choice[step] == alphabet.len() {
            values[cells[step]] = None;
            choice[step] = 0;
            if step == 0 {
                return Ok(RepairVerdict::unrepairable());
            }
            step -= 1;
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return Err(Error::Budget(format!("search exceeded {budget} nodes")));
        }
        values[cells[step]] = Some(alphabet[choice[step]].clone());
        choice[step] += 1;
        if at_step[step].iter().all(|loc| window_ok(&values, loc)) {
            step += 1;
        }
    }
}

/// Repairability for monotonicity over any totally ordered alphabet: the
/// boundary must itself be order-consistent, and the fill takes the largest
/// boundary value dominated by each cell.
#[derive(Clone, Copy, Debug, Default)]
pub struct MonotoneEngine;

impl MonotoneEngine {
    fn consistent<S: Ord>(points: &[(Coord, &S)]) -> bool {
        let d = points.first().map_or(1, |(c, _)| c.dim());
        match d {
            1 => points.windows(2).all(|p| p[0].1 <= p[1].1),
            2 => dominance_sweep_2d(points),
            _ => points.iter().enumerate().all(|(i, (x, vx))| {
                points[i + 1..]
                    .iter()
                    .all(|(y, vy)| !(x.dominated_by(y) && vx > vy || y.dominated_by(x) && vy > vx))
            }),
        }
    }
}

/// For points sorted row-major in 2D: no point exceeds a later point that
/// dominates it. Prefix maxima over the second axis in a Fenwick tree.
fn dominance_sweep_2d<S: Ord>(points: &[(Coord, &S)]) -> bool {
    let ys: Vec<usize> = {
        let mut v: Vec<usize> = points.iter().map(|(c, _)| c[1]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut tree: Vec<Option<&S>> = vec![None; ys.len() + 1];
    for (c, v) in points {
        let pos = ys.binary_search(&c[1]).expect("present") + 1;
        let mut i = pos;
        let mut best: Option<&S> = None;
        while i > 0 {
            best = best.max(tree[i]);
            i &= i - 1;
        }
        if best.is_some_and(|b| b > *v) {
            return false;
        }
        let mut i = pos;
        while i < tree.len() {
            tree[i] = tree[i].max(Some(*v));
            i += i & i.wrapping_neg();
        }
    }
    true
}

impl<S: Symbol + Ord> RepairEngine<S> for MonotoneEngine {
    fn name(&self) -> &'static str {
        "monotone"
    }

    fn infer(&self, prop: &LocalProperty<S>, boundary: &BoundaryAssignment<S>, want_fill: bool)
        -> Result<RepairVerdict<S>> {
        let points: Vec<(Coord, &S)> = boundary.assigned().collect();
        if !Self::consistent(&points) {
            return Ok(RepairVerdict::unrepairable());
        }
        if !want_fill {
            return Ok(RepairVerdict { repairable: true, fill: None });
        }
        let closure = boundary.closure();
        let floor = points.iter().map(|(_, v)| *v).min().or_else(|| prop.alphabet().and_then(|a| a.first()));
        // below[i] = max boundary value at or componentwise below closure cell i.
        let mut below: Vec<Option<&S>> = vec![None; closure.len()];
        let sides = closure.sides();
        for (i, c) in closure.iter().enumerate() {
            let mut best = boundary.slots()[i].as_ref();
            let mut stride = 1;
            for a in (0..c.dim()).rev() {
                if c[a] > closure.lo[a] {
                    best = best.max(below[i - stride]);
                }
                stride *= sides[a];
            }
            below[i] = best;
        }
        let fill = boundary
            .interior()
            .iter()
            .map(|c| {
                below[closure.local_index(&c)]
                    .or(floor)
                    .cloned()
                    .ok_or_else(|| Error::Argument("no boundary value to anchor the fill".into()))
            })
            .collect::<Result<_>>()?;
        Ok(RepairVerdict::repaired(fill))
    }
}

/// Repairability for `c`-Lipschitz arrays over the integers: consistent iff
/// every boundary pair satisfies `|v(x) - v(y)| <= c * |x - y|_1`; the fill is
/// the McShane extension.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzEngine {
    pub c: i64,
}

fn l1(a: &[usize], b: &[usize]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| (x as i64 - y as i64).abs()).sum()
}

impl<S: IntSymbol> RepairEngine<S> for LipschitzEngine {
    fn name(&self) -> &'static str {
        "lipschitz"
    }

    fn infer(&self, prop: &LocalProperty<S>, boundary: &BoundaryAssignment<S>, want_fill: bool)
        -> Result<RepairVerdict<S>> {
        let points: Vec<(Coord, i64)> = boundary.assigned().map(|(c, v)| (c, v.to_i64())).collect();
        let ok = points.iter().enumerate().all(|(i, (x, vx))| {
            points[i + 1..].iter().all(|(y, vy)| (vx - vy).abs() <= self.c * l1(x, y))
        });
        if !ok {
            return Ok(RepairVerdict::unrepairable());
        }
        if !want_fill {
            return Ok(RepairVerdict { repairable: true, fill: None });
        }
        if points.is_empty() {
            return constant_fill(prop, boundary).map(RepairVerdict::repaired);
        }
        let fill = boundary
            .interior()
            .iter()
            .map(|z| {
                let v = points
                    .iter()
                    .map(|(x, vx)| vx + self.c * l1(x, &z))
                    .min()
                    .ok_or_else(|| Error::Argument("no boundary value to anchor the fill".into()))?;
                S::from_i64(v).ok_or_else(|| Error::Range(format!("fill value {v} does not fit the symbol type")))
            })
            .collect::<Result<_>>()?;
        Ok(RepairVerdict::repaired(fill))
    }
}

/// With nothing fixed, a constant fill satisfies every arithmetic property
/// here: the first alphabet symbol if there is one, else zero.
fn constant_fill<S: IntSymbol>(prop: &LocalProperty<S>, boundary: &BoundaryAssignment<S>) -> Result<Vec<S>> {
    let v = match prop.alphabet().and_then(|a| a.first()) {
        Some(&v) => v,
        None => S::from_i64(0).ok_or_else(|| Error::Range("zero does not fit the symbol type".into()))?,
    };
    Ok(vec![v; boundary.interior().len()])
}

/// Repairability for one-dimensional discrete convexity over the integers.
///
/// Between consecutive fixed positions the increments must average
/// `Δ/L`; a non-decreasing integer increment sequence exists iff
/// `ceil(Δ_j / L_j) <= floor(Δ_{j+1} / L_{j+1})` for consecutive gaps.
/// Free tails are always extendable.
#[derive(Clone, Copy, Debug, Default)]
pub struct Convex1dEngine;

impl<S: IntSymbol> RepairEngine<S> for Convex1dEngine {
    fn name(&self) -> &'static str {
        "convex_1d"
    }

    fn infer(&self, prop: &LocalProperty<S>, boundary: &BoundaryAssignment<S>, want_fill: bool)
        -> Result<RepairVerdict<S>> {
        if boundary.closure().dim() != 1 {
            return Err(Error::Shape("convex_1d inference needs d = 1".into()));
        }
        let slots = boundary.slots();
        let fixed: Vec<(usize, i64)> =
            slots.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v.to_i64()))).collect();
        // (len, delta) per gap between consecutive fixed points.
        let gaps: Vec<(i64, i64)> =
            fixed.windows(2).map(|p| ((p[1].0 - p[0].0) as i64, p[1].1 - p[0].1)).collect();
        let ok = gaps
            .windows(2)
            .all(|g| g[0].1.div_euclid(g[0].0) + (g[0].1.rem_euclid(g[0].0) != 0) as i64 <= g[1].1.div_euclid(g[1].0));
        if !ok {
            return Ok(RepairVerdict::unrepairable());
        }
        if !want_fill {
            return Ok(RepairVerdict { repairable: true, fill: None });
        }
        let Some(&(first_pos, first_val)) = fixed.first() else {
            return constant_fill(prop, boundary).map(RepairVerdict::repaired);
        };
        let mut vals = vec![0i64; slots.len()];
        let head_slope = gaps.first().map_or(0, |g| g.1.div_euclid(g.0));
        for (p, v) in vals.iter_mut().enumerate().take(first_pos) {
            *v = first_val - head_slope * (first_pos - p) as i64;
        }
        for (pair, &(len, delta)) in fixed.windows(2).zip(&gaps) {
            let (base, q, r) = (pair[0].1, delta.div_euclid(len), delta.rem_euclid(len));
            // Increments: (len - r) copies of q, then r copies of q + 1.
            let mut v = base;
            for t in 0..len {
                vals[pair[0].0 + t as usize] = v;
                v += if t < len - r { q } else { q + 1 };
            }
        }
        let &(last_pos, last_val) = fixed.last().expect("nonempty");
        let tail_slope = gaps.last().map_or(0, |g| g.1.div_euclid(g.0) + (g.1.rem_euclid(g.0) != 0) as i64);
        for (p, v) in vals.iter_mut().enumerate().skip(last_pos) {
            *v = last_val + tail_slope * (p - last_pos) as i64;
        }
        let fill = vals
            .iter()
            .zip(slots)
            .filter(|(_, s)| s.is_none())
            .map(|(&v, _)| S::from_i64(v).ok_or_else(|| Error::Range(format!("fill value {v} does not fit"))))
            .collect::<Result<_>>()?;
        Ok(RepairVerdict::repaired(fill))
    }
}
