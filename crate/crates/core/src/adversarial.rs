//! Lower-bound instances: arrays whose cells carry a self pointer, a pointer
//! to a lower "center of gravity" `ℓ`, and data that flows from the floor and
//! ceiling along fixed paths toward `ℓ` and `u = ℓ + e_1`.
//!
//! With `h = k/2`, sources are the cells of height `<= h` (floor) and
//! `>= n - h + 1` (ceiling). A path from a cell at or below `ℓ` first jumps
//! upward by `h` until its height lies in `(ℓ_1 - h, ℓ_1]`, then walks one
//! step at a time along axes 2..d toward `ℓ`. Cells at or above `u` do the
//! same downward toward `u`.
//!
//! Two data encodings exist: sets (each source holds a singleton of
//! `[k n^{d-1}]`, other cells hold unions) and counts (each source holds one
//! zero or one one, other cells hold sums).

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::{Array, BoxIter, Coord, Window};
use crate::error::{Error, Result};
use crate::property::LocalProperty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Set,
    Counting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Data {
    Set(FixedBitSet),
    Counts { zeros: u32, ones: u32 },
}

impl Data {
    fn empty(variant: Variant, universe: usize) -> Data {
        match variant {
            Variant::Set => Data::Set(FixedBitSet::with_capacity(universe)),
            Variant::Counting => Data::Counts { zeros: 0, ones: 0 },
        }
    }

    fn absorb(&mut self, other: &Data) {
        match (self, other) {
            (Data::Set(a), Data::Set(b)) => a.union_with(b),
            (Data::Counts { zeros, ones }, Data::Counts { zeros: z, ones: o }) => {
                *zeros += z;
                *ones += o;
            }
            _ => unreachable!("mixed data variants"),
        }
    }

    /// Number of elements (sets) or of counted items (counts).
    pub fn weight(&self) -> usize {
        match self {
            Data::Set(s) => s.count_ones(..),
            Data::Counts { zeros, ones } => (*zeros + *ones) as usize,
        }
    }

    fn is_unit(&self) -> bool {
        self.weight() == 1
    }

    fn matches(&self, variant: Variant, universe: usize) -> bool {
        match (self, variant) {
            (Data::Set(s), Variant::Set) => s.len() == universe,
            (Data::Counts { .. }, Variant::Counting) => true,
            _ => false,
        }
    }
}

/// One cell: self pointer, pointer to the lower center, and data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GravityValue {
    pub self_ptr: Coord,
    pub center_ptr: Coord,
    pub data: Data,
}

/// Validated `(n, d, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub d: usize,
    pub k: usize,
}

impl Params {
    pub fn new(n: usize, d: usize, k: usize) -> Result<Self> {
        if d == 0 || k < 2 || !k.is_multiple_of(2) {
            return Err(Error::Argument(format!("need d >= 1 and even k >= 2 (d={d}, k={k})")));
        }
        if n < 6 || (k > 2 && 6 * k > n) {
            return Err(Error::Argument(format!("need n >= 6 and k <= n/6 (n={n}, k={k})")));
        }
        Ok(Params { n, d, k })
    }

    pub fn h(&self) -> usize {
        self.k / 2
    }

    /// Size of the data universe, `k n^{d-1}`.
    pub fn universe(&self) -> usize {
        self.k * self.n.pow(self.d as u32 - 1)
    }

    /// Sources on each side, `(k/2) n^{d-1}`.
    pub fn sources_per_side(&self) -> usize {
        self.h() * self.n.pow(self.d as u32 - 1)
    }

    /// Admissible heights of the lower center: runs must stay clear of the
    /// floor and ceiling.
    pub fn center_heights(&self) -> (usize, usize) {
        let m = self.k.max(2);
        (m, self.n.saturating_sub(m))
    }

    fn is_source(&self, p: &[usize]) -> bool {
        p[0] <= self.h() || p[0] + self.h() > self.n
    }

    fn in_range(&self, p: &[usize]) -> bool {
        p.len() == self.d && p.iter().all(|&x| (1..=self.n).contains(&x))
    }
}

/// The successor of `y` on its path, or `None` at a run end.
fn next_step(y: &[usize], lower: &[usize], h: usize) -> Option<Coord> {
    let mut z = y.to_vec();
    if y[0] <= lower[0] {
        if y[0] + h <= lower[0] {
            z[0] += h;
            return Some(Coord::new(z));
        }
    } else if y[0] >= lower[0] + 1 + h {
        z[0] -= h;
        return Some(Coord::new(z));
    }
    let axis = (1..y.len()).find(|&i| y[i] != lower[i])?;
    if y[axis] < lower[axis] {
        z[axis] += 1;
    } else {
        z[axis] -= 1;
    }
    Some(Coord::new(z))
}

/// Cells whose path steps directly into `p`.
fn predecessors(p: &[usize], lower: &[usize], params: &Params) -> Vec<Coord> {
    let h = params.h();
    let mut cands: Vec<Vec<usize>> = Vec::new();
    let mut push = |axis: usize, up: bool, by: usize| {
        let mut y = p.to_vec();
        if up {
            y[axis] += by;
        } else if y[axis] > by {
            y[axis] -= by;
        } else {
            return;
        }
        cands.push(y);
    };
    push(0, false, h);
    push(0, true, h);
    for axis in 1..p.len() {
        push(axis, false, 1);
        push(axis, true, 1);
    }
    cands
        .into_iter()
        .filter(|y| params.in_range(y) && next_step(y, lower, h).as_deref() == Some(p))
        .map(Coord::new)
        .collect()
}

/// The path from `x` toward the lower center `lower` (or toward
/// `lower + e_1` when `x` lies above `lower`), for jump height `k/2`.
pub fn flow_path(x: &Coord, lower: &Coord, k: usize) -> Result<Vec<Coord>> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::Argument(format!("k must be even and >= 2, got {k}")));
    }
    if x.dim() != lower.dim() || x.dim() == 0 {
        return Err(Error::Shape(format!("{x:?} and {lower:?} differ in dimension")));
    }
    let mut path = vec![x.clone()];
    while let Some(z) = next_step(path.last().expect("nonempty"), lower, k / 2) {
        path.push(z);
    }
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarialInstance {
    pub params: Params,
    pub variant: Variant,
    pub kind: Kind,
    pub lower: Coord,
    pub upper: Coord,
    pub array: Array<GravityValue>,
}

fn all_cells(params: &Params) -> BoxIter {
    BoxIter::new(vec![1; params.d], vec![params.n; params.d])
}

/// Source cells in row-major order: floor first, then ceiling.
fn sources(params: &Params) -> (Vec<Coord>, Vec<Coord>) {
    all_cells(params).filter(|c| params.is_source(c)).partition(|c| c[0] <= params.h())
}

/// Aggregate source data along every path.
fn aggregate(params: &Params, lower: &Coord, variant: Variant, source_data: &[(Coord, Data)]) -> Vec<Data> {
    let shape = crate::arrays::Shape { n: params.n, d: params.d };
    let mut out = vec![Data::empty(variant, params.universe()); shape.len()];
    for (x, data) in source_data {
        let mut cur = Some(x.clone());
        while let Some(c) = cur {
            out[shape.linear(&c)].absorb(data);
            cur = next_step(&c, lower, params.h());
        }
    }
    out
}

/// Draw an instance: uniform lower center with `n/3 < ℓ_1 <= 2n/3 - 1`,
/// source data per `kind`, and all other data aggregated along paths.
///
/// Sets: accept instances give the floor and the ceiling the same distinct
/// singletons; reject instances give them disjoint ones. Counts: with
/// `T = k n^{d-1}` sources, accept instances label `ceil(3T/4)` of them zero,
/// reject instances `floor(T/4)`.
pub fn gen_instance<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    k: usize,
    kind: Kind,
    variant: Variant,
    rng: &mut R,
) -> Result<AdversarialInstance> {
    let params = Params::new(n, d, k)?;
    let lo = n / 3 + 1;
    let hi = (2 * n / 3).saturating_sub(1);
    if lo > hi {
        return Err(Error::Argument(format!("no admissible center height for n={n}")));
    }
    let mut lower = vec![rng.random_range(lo..=hi)];
    lower.extend((1..d).map(|_| rng.random_range(1..=n)));
    let lower = Coord::new(lower);
    let mut upper = lower.clone().into_vec();
    upper[0] += 1;
    let upper = Coord::new(upper);

    let (floor, ceiling) = sources(&params);
    let t = params.universe();
    let f = params.sources_per_side();
    let singleton = |i: usize| {
        let mut s = FixedBitSet::with_capacity(t);
        s.insert(i);
        Data::Set(s)
    };
    let source_data: Vec<(Coord, Data)> = match variant {
        Variant::Set => {
            let mut ids: Vec<usize> = (0..t).collect();
            ids.shuffle(rng);
            let (floor_ids, ceil_ids): (Vec<usize>, Vec<usize>) = match kind {
                Kind::Reject => (ids[..f].to_vec(), ids[f..].to_vec()),
                Kind::Accept => {
                    let mut other = ids[..f].to_vec();
                    other.shuffle(rng);
                    (ids[..f].to_vec(), other)
                }
            };
            floor
                .iter()
                .zip(floor_ids)
                .chain(ceiling.iter().zip(ceil_ids))
                .map(|(c, i)| (c.clone(), singleton(i)))
                .collect()
        }
        Variant::Counting => {
            let zeros = match kind {
                Kind::Accept => (3 * t).div_ceil(4),
                Kind::Reject => t / 4,
            };
            let mut labels: Vec<bool> = (0..t).map(|i| i < zeros).collect();
            labels.shuffle(rng);
            floor
                .iter()
                .chain(&ceiling)
                .zip(labels)
                .map(|(c, z)| {
                    let d = if z { Data::Counts { zeros: 1, ones: 0 } } else { Data::Counts { zeros: 0, ones: 1 } };
                    (c.clone(), d)
                })
                .collect()
        }
    };
    let data = aggregate(&params, &lower, variant, &source_data);
    let array = Array::new(
        n,
        d,
        all_cells(&params)
            .zip(data)
            .map(|(c, data)| GravityValue { self_ptr: c, center_ptr: lower.clone(), data })
            .collect(),
    )?;
    Ok(AdversarialInstance { params, variant, kind, lower, upper, array })
}

/// The run of `h` cells `ℓ - i e_1` (lower) or `u + i e_1` (upper).
fn run(lower: &[usize], h: usize, upper_side: bool) -> Vec<Coord> {
    (0..h)
        .filter_map(|i| {
            let mut c = lower.to_vec();
            if upper_side {
                c[0] += 1 + i;
            } else {
                c[0] = c[0].checked_sub(i)?;
            }
            Some(Coord::new(c))
        })
        .collect()
}

fn centers_agree(variant: Variant, lower_run: &[&Data], upper_run: &[&Data], universe: usize) -> bool {
    match variant {
        Variant::Set => {
            let mut a = FixedBitSet::with_capacity(universe);
            let mut b = FixedBitSet::with_capacity(universe);
            lower_run.iter().for_each(|d| if let Data::Set(s) = d { a.union_with(s) });
            upper_run.iter().for_each(|d| if let Data::Set(s) = d { b.union_with(s) });
            a == b
        }
        Variant::Counting => {
            let (mut z, mut o) = (0u64, 0u64);
            for d in lower_run.iter().chain(upper_run) {
                if let Data::Counts { zeros, ones } = d {
                    z += *zeros as u64;
                    o += *ones as u64;
                }
            }
            z > o
        }
    }
}

/// Whether a `[k]^d` window of gravity values is allowed.
fn window_allowed(w: &Window<GravityValue>, params: &Params, variant: Variant) -> bool {
    let k = params.k;
    let vals = w.values();
    let base = &vals[0].self_ptr;
    let offsets: Vec<Coord> = w.offsets().collect();
    // Difference preservation, with positions inside [n]^d.
    if !vals.iter().zip(&offsets).all(|(v, j)| v.self_ptr.dim() == params.d && *v.self_ptr == *base.offset(j)) {
        return false;
    }
    if !params.in_range(base) || !params.in_range(&base.offset(&vec![k - 1; params.d])) {
        return false;
    }
    // Constant center pointer with admissible height.
    let lower = &vals[0].center_ptr;
    let (lo, hi) = params.center_heights();
    if !params.in_range(lower) || lower[0] < lo || lower[0] > hi || vals.iter().any(|v| v.center_ptr != *lower) {
        return false;
    }
    if !vals.iter().all(|v| v.data.matches(variant, params.universe())) {
        return false;
    }
    let local = |p: &[usize]| -> Option<usize> {
        let mut idx = 0;
        for (a, &x) in p.iter().enumerate() {
            let off = x.checked_sub(base[a]).filter(|&o| o < k)?;
            idx = idx * k + off;
        }
        Some(idx)
    };
    for v in vals {
        let p = &v.self_ptr;
        if params.is_source(p) {
            if !v.data.is_unit() {
                return false;
            }
            continue;
        }
        let preds = predecessors(p, lower, params);
        let idx: Option<Vec<usize>> = preds.iter().map(|y| local(y)).collect();
        if let Some(idx) = idx {
            let mut acc = Data::empty(variant, params.universe());
            idx.iter().for_each(|&i| acc.absorb(&vals[i].data));
            if acc != v.data {
                return false;
            }
        }
    }
    let h = params.h();
    let lower_run: Option<Vec<&Data>> = run(lower, h, false).iter().map(|c| local(c).map(|i| &vals[i].data)).collect();
    let upper_run: Option<Vec<&Data>> = run(lower, h, true).iter().map(|c| local(c).map(|i| &vals[i].data)).collect();
    if let (Some(a), Some(b)) = (lower_run, upper_run) {
        if !centers_agree(variant, &a, &b, params.universe()) {
            return false;
        }
    }
    true
}

/// The k-local property whose allowed windows are described above.
pub fn gravity_property(params: Params, variant: Variant) -> LocalProperty<GravityValue> {
    LocalProperty::custom("gravity", params.k, params.d, move |w| !window_allowed(w, &params, variant))
        .expect("params validated")
}

/// Scan every window with the local rules.
pub fn check_local(a: &Array<GravityValue>, params: Params, variant: Variant) -> bool {
    a.n() == params.n
        && a.d() == params.d
        && gravity_property(params, variant).satisfies(a).map(|r| r.is_none()).unwrap_or(false)
}

/// Evaluate the global conditions directly.
pub fn check_global(a: &Array<GravityValue>, params: Params, variant: Variant) -> bool {
    if a.n() != params.n || a.d() != params.d {
        return false;
    }
    let cells: Vec<Coord> = all_cells(&params).collect();
    let vals = a.data();
    if !vals.iter().all(|v| v.data.matches(variant, params.universe())) {
        return false;
    }
    if !cells.iter().zip(vals).all(|(c, v)| v.self_ptr == *c) {
        return false;
    }
    let lower = vals[0].center_ptr.clone();
    let (lo, hi) = params.center_heights();
    if !params.in_range(&lower) || lower[0] < lo || lower[0] > hi || vals.iter().any(|v| v.center_ptr != lower) {
        return false;
    }
    let mut source_data = Vec::new();
    for (c, v) in cells.iter().zip(vals) {
        if params.is_source(c) {
            if !v.data.is_unit() {
                return false;
            }
            source_data.push((c.clone(), v.data.clone()));
        }
    }
    let expected = aggregate(&params, &lower, variant, &source_data);
    let flows_ok = cells
        .iter()
        .zip(vals)
        .zip(&expected)
        .all(|((c, v), e)| params.is_source(c) || v.data == *e);
    if !flows_ok {
        return false;
    }
    let at = |c: &Coord| &vals[a.shape().linear(c)].data;
    let lower_run: Vec<&Data> = run(&lower, params.h(), false).iter().map(at).collect();
    let upper_run: Vec<&Data> = run(&lower, params.h(), true).iter().map(at).collect();
    centers_agree(variant, &lower_run, &upper_run, params.universe())
}

/// Observable statistics of an instance through a query set `Q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Sources whose path meets `Q`.
    pub i_size: usize,
    /// Floor/ceiling pairs among those sources holding the same singleton
    /// (set variant only).
    pub n_collisions: usize,
    /// Total data weight over `Q`.
    pub c_count: usize,
}

pub fn distinguishing_stats(inst: &AdversarialInstance, q: &[Coord]) -> Stats {
    let params = &inst.params;
    let qset: HashSet<&Coord> = q.iter().collect();
    let (floor, ceiling) = sources(params);
    let visible = |x: &Coord| {
        flow_path(x, &inst.lower, params.k).expect("valid params").iter().any(|c| qset.contains(c))
    };
    let seen_floor: Vec<&Coord> = floor.iter().filter(|x| visible(x)).collect();
    let seen_ceiling: Vec<&Coord> = ceiling.iter().filter(|x| visible(x)).collect();
    let value = |c: &Coord| &inst.array.get(c).expect("in range").data;
    let n_collisions = match inst.variant {
        Variant::Set => {
            let floor_vals: HashSet<&Data> = seen_floor.iter().map(|c| value(c)).collect();
            seen_ceiling.iter().filter(|c| floor_vals.contains(value(c))).count()
        }
        Variant::Counting => 0,
    };
    let c_count = q.iter().filter_map(|c| inst.array.get(c).ok()).map(|v| v.data.weight()).sum();
    Stats { i_size: seen_floor.len() + seen_ceiling.len(), n_collisions, c_count }
}

/// A lower bound on the number of cells in which any array satisfying the
/// global conditions with the same centers differs from `inst`.
///
/// Every satisfying array needs equal run data, which forces at least
/// `(k/2) n^{d-1}` source changes when floor and ceiling data are disjoint.
/// Changing a source changes every cell that only it feeds, and these cells
/// are disjoint across sources. The bound is the sum of the smallest such
/// counts, capped at `n^d` (a different center changes every cell).
pub fn farness_lower_bound(inst: &AdversarialInstance) -> usize {
    let params = &inst.params;
    let shape = inst.array.shape();
    let (floor, ceiling) = sources(params);
    let mut feeders = vec![0usize; shape.len()];
    let all: Vec<&Coord> = floor.iter().chain(&ceiling).collect();
    for x in &all {
        for c in flow_path(x, &inst.lower, params.k).expect("valid params") {
            feeders[shape.linear(&c)] += 1;
        }
    }
    let mut exclusive: Vec<usize> = all
        .iter()
        .map(|x| {
            flow_path(x, &inst.lower, params.k)
                .expect("valid params")
                .iter()
                .filter(|c| feeders[shape.linear(c)] == 1)
                .count()
        })
        .collect();
    exclusive.sort_unstable();
    let needed = params.sources_per_side();
    exclusive[..needed].iter().sum::<usize>().min(shape.len())
}

/// An instance embedded in one block of a partition of `[n]^d` into about
/// `1/ε` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    /// Per-axis `(start, len)` of the block intervals.
    pub intervals: Vec<(usize, usize)>,
    /// Index per axis of the block holding the instance.
    pub chosen: Vec<usize>,
    pub inner: AdversarialInstance,
    /// Background cells hold [`Embedding::background`].
    pub array: Array<GravityValue>,
}

impl Embedding {
    pub fn block_count(&self) -> usize {
        self.intervals.len().pow(self.inner.params.d as u32)
    }

    pub fn background(d: usize, variant: Variant, universe: usize) -> GravityValue {
        GravityValue { self_ptr: Coord::new(vec![0; d]), center_ptr: Coord::new(vec![0; d]), data: Data::empty(variant, universe) }
    }

    /// Corner of the chosen block.
    pub fn offset(&self) -> Coord {
        Coord::new(self.chosen.iter().map(|&i| self.intervals[i].0).collect())
    }
}

/// Split each axis into `m` near-equal intervals, `m` the integer nearest
/// `ε^{-1/d}` on a log scale, and plant an instance of width
/// `min(floor(ε^{1/d} n), shortest interval)` in a uniformly chosen block.
pub fn embed_small_epsilon<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    k: usize,
    eps: f64,
    kind: Kind,
    variant: Variant,
    rng: &mut R,
) -> Result<Embedding> {
    if !(eps > 0.0 && eps <= 1.0) || d == 0 {
        return Err(Error::Argument(format!("need 0 < eps <= 1 and d >= 1 (eps={eps}, d={d})")));
    }
    let root = eps.powf(1.0 / d as f64);
    if k as f64 > root * n as f64 / 5.0 {
        return Err(Error::Argument(format!("need k <= eps^(1/d) n / 5 (k={k}, n={n}, eps={eps})")));
    }
    let t = 1.0 / root;
    let (a, b) = (t.floor().max(1.0), t.ceil().max(1.0));
    let m = if (t / a).ln() <= (b / t).ln() { a } else { b } as usize;
    let intervals: Vec<(usize, usize)> = (0..m)
        .map(|i| {
            let s = i * n / m;
            (s + 1, (i + 1) * n / m - s)
        })
        .collect();
    let shortest = intervals.iter().map(|&(_, l)| l).min().expect("m >= 1");
    let width = ((root * n as f64 + 1e-9).floor() as usize).min(shortest);
    let inner = gen_instance(width, d, k, kind, variant, rng)?;
    let chosen: Vec<usize> = (0..d).map(|_| rng.random_range(0..m)).collect();
    let corner: Vec<usize> = chosen.iter().map(|&i| intervals[i].0).collect();
    let bg = Embedding::background(d, variant, inner.params.universe());
    let array = Array::from_fn(n, d, |c| {
        let local: Option<Vec<usize>> =
            c.iter().zip(&corner).map(|(&x, &s)| (x >= s && x < s + width).then(|| x - s + 1)).collect();
        match local {
            Some(l) => inner.array.get(&l).expect("inside").clone(),
            None => bg.clone(),
        }
    })?;
    Ok(Embedding { intervals, chosen, inner, array })
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    self_ptr: Coord,
    center_ptr: Coord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    d: usize,
    k: usize,
    variant: Variant,
    kind: Kind,
    lower: Coord,
    upper: Coord,
    cells: Vec<CellJson>,
}

fn set_to_hex(s: &FixedBitSet) -> String {
    let bytes: Vec<u8> = s.as_slice().iter().flat_map(|b| b.to_le_bytes()).collect();
    let used = s.len().div_ceil(8);
    hex::encode(&bytes[..used])
}

fn set_from_hex(text: &str, universe: usize) -> Result<FixedBitSet> {
    let bytes = hex::decode(text).map_err(|e| Error::Format(format!("bad hex bitset: {e}")))?;
    if bytes.len() != universe.div_ceil(8) {
        return Err(Error::Format(format!("bitset of {} bytes for a universe of {universe}", bytes.len())));
    }
    let mut s = FixedBitSet::with_capacity(universe);
    for (i, byte) in bytes.iter().enumerate() {
        for bit in 0..8 {
            if byte >> bit & 1 == 1 {
                let idx = 8 * i + bit;
                if idx >= universe {
                    return Err(Error::Format("bitset has bits beyond its universe".into()));
                }
                s.insert(idx);
            }
        }
    }
    Ok(s)
}

impl AdversarialInstance {
    /// JSON with set data hex-encoded (little-endian bytes, bit `i` of the
    /// universe at byte `i / 8`, bit `i % 8`).
    pub fn to_json(&self) -> Result<String> {
        let cells = self
            .array
            .data()
            .iter()
            .map(|v| {
                let (set, counts) = match &v.data {
                    Data::Set(s) => (Some(set_to_hex(s)), None),
                    Data::Counts { zeros, ones } => (None, Some([*zeros, *ones])),
                };
                CellJson { self_ptr: v.self_ptr.clone(), center_ptr: v.center_ptr.clone(), set, counts }
            })
            .collect();
        let j = InstanceJson {
            n: self.params.n,
            d: self.params.d,
            k: self.params.k,
            variant: self.variant,
            kind: self.kind,
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            cells,
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: InstanceJson = serde_json::from_str(text)?;
        let params = Params::new(j.n, j.d, j.k)?;
        let universe = params.universe();
        let data = j
            .cells
            .into_iter()
            .map(|c| {
                let data = match (j.variant, c.set, c.counts) {
                    (Variant::Set, Some(h), None) => Data::Set(set_from_hex(&h, universe)?),
                    (Variant::Counting, None, Some([zeros, ones])) => Data::Counts { zeros, ones },
                    _ => return Err(Error::Format("cell data does not match the variant".into())),
                };
                Ok(GravityValue { self_ptr: c.self_ptr, center_ptr: c.center_ptr, data })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AdversarialInstance {
            params,
            variant: j.variant,
            kind: j.kind,
            lower: j.lower,
            upper: j.upper,
            array: Array::new(j.n, j.d, data)?,
        })
    }
}
