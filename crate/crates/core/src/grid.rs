//! Interval partitions, grids, blocks, and nested systems of grids.
//!
//! Intervals and blocks are referred to by 0-based indices; cells are 1-based.
//! A block `B = prod_j I_{i_j}[k:]` drops the first `k - 1` elements of each
//! interval. Its closure extends every side by the first `k - 1` elements of
//! the next interval, and its boundary is closure minus block.

use serde::{Deserialize, Serialize};

use crate::arrays::{BoxIter, BoxRegion, Coord};
use crate::error::{Error, Result};

/// An ordered partition of `[n]` into consecutive intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalPartition {
    n: usize,
    /// `(start, len)` pairs, 1-based starts.
    intervals: Vec<(usize, usize)>,
}

impl IntervalPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Inclusive `(first, last)` of interval `j`.
    pub fn bounds(&self, j: usize) -> (usize, usize) {
        let (s, l) = self.intervals[j];
        (s, s + l - 1)
    }

    /// Index of the interval containing `x`.
    pub fn index_of(&self, x: usize) -> usize {
        self.intervals.partition_point(|&(s, _)| s <= x) - 1
    }
}

/// Largest `i` with `2^i <= n`.
pub fn max_partition_index(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// The `(n, floor(n / 2^i))`-interval partition obtained by `i` rounds of
/// halving, the left half taking the larger share.
pub fn interval_partition(n: usize, i: usize) -> Result<IntervalPartition> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    if i > max_partition_index(n) {
        return Err(Error::Argument(format!("partition index {i} exceeds log2({n})")));
    }
    let mut intervals = vec![(1, n)];
    for level in 1..=i {
        let target = n >> level;
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for &(s, m) in &intervals {
            let mut left = m.div_ceil(2);
            if left > target + 1 {
                left -= 1;
            }
            next.push((s, left));
            next.push((s + left, m - left));
        }
        intervals = next;
    }
    Ok(IntervalPartition { n, intervals })
}

/// A block of a grid: one interval index per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block(pub Vec<usize>);

impl Block {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// An `(n, d, k, w)`-grid induced by a dyadic interval partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    d: usize,
    k: usize,
    partition_index: usize,
    partition: IntervalPartition,
}

impl Grid {
    /// The grid induced by partition number `i` of `[n]`.
    pub fn from_partition_index(n: usize, d: usize, k: usize, i: usize) -> Result<Self> {
        if d == 0 || k < 2 {
            return Err(Error::Argument(format!("need d >= 1 and k >= 2 (d={d}, k={k})")));
        }
        let partition = interval_partition(n, i)?;
        Ok(Grid { n, d, k, partition_index: i, partition })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The nominal interval width `floor(n / 2^i)`.
    pub fn w(&self) -> usize {
        self.n >> self.partition_index
    }

    pub fn partition_index(&self) -> usize {
        self.partition_index
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    /// Number of intervals per axis.
    pub fn intervals_per_axis(&self) -> usize {
        self.partition.len()
    }

    /// Inclusive range of `I_j[k:]`, possibly empty (`lo > hi`).
    fn tail(&self, j: usize) -> (usize, usize) {
        let (s, e) = self.partition.bounds(j);
        (s + self.k - 1, e)
    }

    /// Inclusive range of `I_j ∪ I_{j+1}[:k-1]`.
    fn closed(&self, j: usize) -> (usize, usize) {
        let (s, e) = self.partition.bounds(j);
        let ext = if j + 1 < self.partition.len() {
            (self.k - 1).min(self.partition.intervals[j + 1].1)
        } else {
            0
        };
        (s, e + ext)
    }

    /// Whether `c` lies on the grid: some coordinate is among the first
    /// `k - 1` elements of its interval.
    pub fn contains(&self, c: &[usize]) -> bool {
        c.iter().any(|&x| {
            let (s, _) = self.partition.bounds(self.partition.index_of(x));
            x < s + self.k - 1
        })
    }

    /// All grid cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        BoxIter::new(vec![1; self.d], vec![self.n; self.d]).filter(|c| self.contains(c))
    }

    /// Number of grid cells, without enumerating them.
    pub fn cell_count(&self) -> usize {
        let off: usize = (0..self.partition.len())
            .map(|j| {
                let (lo, hi) = self.tail(j);
                (hi + 1).saturating_sub(lo)
            })
            .sum();
        self.n.pow(self.d as u32) - off.pow(self.d as u32)
    }

    /// Whether `B` is a (nonempty) block of this grid.
    pub fn is_block(&self, b: &Block) -> bool {
        b.0.len() == self.d
            && b.0.iter().all(|&j| {
                j < self.partition.len() && {
                    let (lo, hi) = self.tail(j);
                    lo <= hi
                }
            })
    }

    /// Interval indices whose tail `I[k:]` is nonempty.
    fn live_indices(&self) -> Vec<usize> {
        (0..self.partition.len())
            .filter(|&j| {
                let (lo, hi) = self.tail(j);
                lo <= hi
            })
            .collect()
    }

    /// All nonempty blocks in row-major order of their index tuples.
    pub fn blocks(&self) -> Vec<Block> {
        let live = self.live_indices();
        if live.is_empty() {
            return Vec::new();
        }
        BoxIter::new(vec![0; self.d], vec![live.len() - 1; self.d])
            .map(|c| Block(c.iter().map(|&p| live[p]).collect()))
            .collect()
    }

    pub fn block_count(&self) -> usize {
        self.live_indices().len().pow(self.d as u32)
    }

    /// The `t`-th block in the order of [`Grid::blocks`].
    pub fn block_at(&self, mut t: usize) -> Block {
        let live = self.live_indices();
        let mut idx = vec![0; self.d];
        for slot in idx.iter_mut().rev() {
            *slot = live[t % live.len()];
            t /= live.len();
        }
        Block(idx)
    }

    /// Cells of the block itself.
    pub fn block_box(&self, b: &Block) -> BoxRegion {
        let (lo, hi) = b.0.iter().map(|&j| self.tail(j)).unzip();
        BoxRegion::new(lo, hi)
    }

    pub fn closure_box(&self, b: &Block) -> BoxRegion {
        let (lo, hi) = b.0.iter().map(|&j| self.closed(j)).unzip();
        BoxRegion::new(lo, hi)
    }

    /// Closure minus block, in row-major order.
    pub fn boundary(&self, b: &Block) -> Vec<Coord> {
        boundary_cells(&self.closure_box(b), &self.block_box(b))
    }

    /// The unique block whose closure contains the `[k]^d` window at `loc`.
    pub fn locate_window(&self, loc: &[usize]) -> Result<Block> {
        if loc.len() != self.d || loc.iter().any(|&x| x == 0 || x + self.k - 1 > self.n) {
            return Err(Error::Range(format!("window location {:?} out of range", Coord::new(loc.to_vec()))));
        }
        let b = Block(loc.iter().map(|&x| self.partition.index_of(x)).collect());
        if !self.is_block(&b) {
            return Err(Error::Argument(format!("window at {loc:?} falls in a degenerate interval")));
        }
        Ok(b)
    }
}

/// Cells of `outer \ inner` in row-major order, where `inner` is a sub-box.
/// Runs in time proportional to the output, not to `|outer|`.
pub fn boundary_cells(outer: &BoxRegion, inner: &BoxRegion) -> Vec<Coord> {
    let d = outer.dim();
    let mut out = Vec::new();
    if inner.is_empty() {
        return outer.iter().collect();
    }
    // Cells whose first axis outside `inner` is `a`.
    for a in 0..d {
        let mut lo = outer.lo.clone();
        let mut hi = outer.hi.clone();
        lo[..a].copy_from_slice(&inner.lo[..a]);
        hi[..a].copy_from_slice(&inner.hi[..a]);
        let mut segs = Vec::new();
        if outer.lo[a] < inner.lo[a] {
            segs.push((outer.lo[a], inner.lo[a] - 1));
        }
        if inner.hi[a] < outer.hi[a] {
            segs.push((inner.hi[a] + 1, outer.hi[a]));
        }
        for (s, e) in segs {
            lo[a] = s;
            hi[a] = e;
            out.extend(BoxIter::new(lo.clone(), hi.clone()));
        }
    }
    out.sort_unstable();
    out
}

/// Build a grid whose interval width is the dyadic `floor(n / 2^i)` closest
/// to `w_request` from below, or the smallest dyadic width `>= k` when that
/// falls under `k`.
pub fn build_grid(n: usize, d: usize, k: usize, w_request: usize) -> Result<Grid> {
    if k < 2 || n < k {
        return Err(Error::Argument(format!("need 2 <= k <= n (n={n}, k={k})")));
    }
    let top = max_partition_index(n);
    let mut i = (0..=top).find(|&i| n >> i <= w_request.max(1)).unwrap_or(top);
    if n >> i < k {
        i = (0..=top).rev().find(|&i| n >> i >= k).unwrap_or(0);
    }
    Grid::from_partition_index(n, d, k, i)
}

/// Where a block's parent lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parent {
    Block(Block),
    /// The parent of the top-level block is all of `[n]^d`.
    Domain,
}

/// Grids `G_0, ..., G_r` of widths `floor(n / 2^(r-i))`, with `r` maximal
/// such that `2^r w <= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSystem {
    n: usize,
    d: usize,
    k: usize,
    w: usize,
    grids: Vec<Grid>,
}

impl GridSystem {
    pub fn new(n: usize, d: usize, k: usize, w: usize) -> Result<Self> {
        if k < 2 || w < k || n < w {
            return Err(Error::Argument(format!("need 2 <= k <= w <= n (n={n}, k={k}, w={w})")));
        }
        let r = max_partition_index(n / w);
        let grids = (0..=r)
            .map(|i| Grid::from_partition_index(n, d, k, r - i))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridSystem { n, d, k, w, grids })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Index of the coarsest grid.
    pub fn r(&self) -> usize {
        self.grids.len() - 1
    }

    pub fn grid(&self, level: usize) -> &Grid {
        &self.grids[level]
    }

    pub fn grids(&self) -> &[Grid] {
        &self.grids
    }

    pub fn parent(&self, level: usize, b: &Block) -> Result<Parent> {
        if level > self.r() || !self.grids[level].is_block(b) {
            return Err(Error::Argument(format!("{b:?} is not a block of level {level}")));
        }
        if level == self.r() {
            return Ok(Parent::Domain);
        }
        Ok(Parent::Block(Block(b.0.iter().map(|&j| j / 2).collect())))
    }

    /// Cells of a block's parent.
    pub fn parent_box(&self, level: usize, b: &Block) -> Result<BoxRegion> {
        Ok(match self.parent(level, b)? {
            Parent::Block(p) => self.grids[level + 1].block_box(&p),
            Parent::Domain => BoxRegion::new(vec![1; self.d], vec![self.n; self.d]),
        })
    }
}
