//! The d-dimensional array model: coordinates, shapes, axis-aligned boxes,
//! windows, and query-counted access.
//!
//! Coordinates are 1-based, matching `[n] = {1, ..., n}`. Arrays are stored
//! row-major with the first coordinate varying slowest.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can sit in an array cell. Only equality is assumed.
pub trait Symbol: Clone + Eq + Hash + fmt::Debug + Send + Sync + 'static {}

impl<T> Symbol for T where T: Clone + Eq + Hash + fmt::Debug + Send + Sync + 'static {}

/// Symbols that support integer arithmetic (and therefore a total order).
pub trait IntSymbol: Symbol + Ord + Copy {
    fn to_i64(self) -> i64;
    fn from_i64(v: i64) -> Option<Self>;
}

impl IntSymbol for i64 {
    fn to_i64(self) -> i64 {
        self
    }
    fn from_i64(v: i64) -> Option<Self> {
        Some(v)
    }
}

impl IntSymbol for i32 {
    fn to_i64(self) -> i64 {
        self as i64
    }
    fn from_i64(v: i64) -> Option<Self> {
        i32::try_from(v).ok()
    }
}

/// An opaque token: comparable for equality only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token(pub u32);

/// A point of `[n]^d`, 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coord(Vec<usize>);

impl Coord {
    pub fn new(components: Vec<usize>) -> Self {
        Coord(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// `self + offset` componentwise.
    pub fn offset(&self, offset: &[usize]) -> Coord {
        Coord(self.0.iter().zip(offset).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &Coord) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Deref for Coord {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Coord {
    fn from(v: Vec<usize>) -> Self {
        Coord(v)
    }
}

impl<const N: usize> From<[usize; N]> for Coord {
    fn from(v: [usize; N]) -> Self {
        Coord(v.to_vec())
    }
}

impl fmt::Debug for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Width and dimension of `[n]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub d: usize,
}

impl Shape {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Argument(format!("n and d must be positive (n={n}, d={d})")));
        }
        u32::try_from(d)
            .ok()
            .and_then(|d| n.checked_pow(d))
            .ok_or_else(|| Error::Argument(format!("n^d overflows (n={n}, d={d})")))?;
        Ok(Shape { n, d })
    }

    /// `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        c.len() == self.d && c.iter().all(|&x| (1..=self.n).contains(&x))
    }

    pub fn check(&self, c: &[usize]) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::Range(format!("{:?} not in [{}]^{}", Coord(c.to_vec()), self.n, self.d)))
        }
    }

    /// Row-major index of an in-range coordinate.
    pub fn linear(&self, c: &[usize]) -> usize {
        debug_assert!(self.contains(c));
        c.iter().fold(0, |acc, &x| acc * self.n + (x - 1))
    }

    pub fn coord(&self, mut idx: usize) -> Coord {
        let mut v = vec![0; self.d];
        for slot in v.iter_mut().rev() {
            *slot = idx % self.n + 1;
            idx /= self.n;
        }
        Coord(v)
    }

    pub fn full_box(&self) -> BoxRegion {
        BoxRegion::new(vec![1; self.d], vec![self.n; self.d])
    }
}

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]` (inclusive bounds).
/// Empty when some `lo_j > hi_j`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl BoxRegion {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Self {
        assert_eq!(lo.len(), hi.len());
        BoxRegion { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, axis: usize) -> usize {
        (self.hi[axis] + 1).saturating_sub(self.lo[axis])
    }

    pub fn sides(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.side(a)).collect()
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        c.len() == self.dim() && c.iter().enumerate().all(|(a, &x)| self.lo[a] <= x && x <= self.hi[a])
    }

    /// Row-major index of `c` relative to this box.
    pub fn local_index(&self, c: &[usize]) -> usize {
        debug_assert!(self.contains(c));
        c.iter()
            .enumerate()
            .fold(0, |acc, (a, &x)| acc * self.side(a) + (x - self.lo[a]))
    }

    pub fn local_coord(&self, mut idx: usize) -> Coord {
        let mut v = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let s = self.side(a);
            v[a] = self.lo[a] + idx % s;
            idx /= s;
        }
        Coord(v)
    }

    /// Cells of the box in row-major order.
    pub fn iter(&self) -> BoxIter {
        BoxIter::new(self.lo.clone(), self.hi.clone())
    }

    /// Locations of all width-`k` windows that fit entirely inside the box.
    pub fn window_locations(&self, k: usize) -> BoxIter {
        let hi: Vec<usize> = self.hi.iter().map(|&h| (h + 1).wrapping_sub(k)).collect();
        if self.lo.iter().zip(&self.hi).any(|(&l, &h)| h + 1 < l + k) {
            return BoxIter::empty();
        }
        BoxIter::new(self.lo.clone(), hi)
    }
}

/// Row-major odometer over an inclusive box.
#[derive(Clone, Debug)]
pub struct BoxIter {
    lo: Vec<usize>,
    hi: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl BoxIter {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Self {
        let next = if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
            Some(lo.clone())
        } else {
            None
        };
        BoxIter { lo, hi, next }
    }

    pub fn empty() -> Self {
        BoxIter { lo: vec![], hi: vec![], next: None }
    }
}

impl Iterator for BoxIter {
    type Item = Coord;

    fn next(&mut self) -> Option<Coord> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut axis = succ.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            if succ[axis] < self.hi[axis] {
                succ[axis] += 1;
                self.next = Some(succ);
                break;
            }
            succ[axis] = self.lo[axis];
        }
        Some(Coord(cur))
    }
}

/// An immutable `[n]^d` array over symbols `S`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Array<S> {
    shape: Shape,
    data: Vec<S>,
}

impl<S: Symbol> Array<S> {
    pub fn new(n: usize, d: usize, data: Vec<S>) -> Result<Self> {
        let shape = Shape::new(n, d)?;
        if data.len() != shape.len() {
            return Err(Error::Shape(format!(
                "expected {} values for [{n}]^{d}, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(Array { shape, data })
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(&Coord) -> S) -> Result<Self> {
        let shape = Shape::new(n, d)?;
        let data = shape.full_box().iter().map(|c| f(&c)).collect();
        Ok(Array { shape, data })
    }

    pub fn filled(n: usize, d: usize, value: S) -> Result<Self> {
        let shape = Shape::new(n, d)?;
        Ok(Array { shape, data: vec![value; shape.len()] })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, c: &[usize]) -> Result<&S> {
        self.shape.check(c)?;
        Ok(&self.data[self.shape.linear(c)])
    }

    pub fn get_linear(&self, idx: usize) -> &S {
        &self.data[idx]
    }

    /// Copy with one cell replaced.
    pub fn with(&self, c: &[usize], value: S) -> Result<Self> {
        self.shape.check(c)?;
        let mut out = self.clone();
        let idx = self.shape.linear(c);
        out.data[idx] = value;
        Ok(out)
    }

    pub fn map<T: Symbol>(&self, f: impl FnMut(&S) -> T) -> Array<T> {
        Array { shape: self.shape, data: self.data.iter().map(f).collect() }
    }

    /// The `[k]^d` window anchored at `loc`.
    pub fn subarray(&self, loc: &Coord, k: usize) -> Result<Window<S>> {
        if k == 0 || k > self.n() {
            return Err(Error::Argument(format!("window width {k} not in [1, {}]", self.n())));
        }
        let limit = self.n() + 1 - k;
        if loc.dim() != self.d() || loc.iter().any(|&x| x < 1 || x > limit) {
            return Err(Error::Range(format!("window location {loc:?} not in [{limit}]^{}", self.d())));
        }
        Ok(Window::extract(loc, k, |c| self.data[self.shape.linear(c)].clone()))
    }
}

/// A `[k]^d` consecutive subarray together with its location.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Window<S> {
    location: Coord,
    k: usize,
    values: Vec<S>,
}

impl<S: Symbol> Window<S> {
    /// Build a window by reading each cell `location + j` through `read`.
    pub fn extract(location: &Coord, k: usize, mut read: impl FnMut(&[usize]) -> S) -> Self {
        let d = location.dim();
        let hi: Vec<usize> = location.iter().map(|&x| x + k - 1).collect();
        let values = BoxIter::new(location.to_vec(), hi).map(|c| read(&c)).collect();
        debug_assert_eq!(d, location.dim());
        Window { location: location.clone(), k, values }
    }

    /// A free-standing pattern (location `(1,...,1)`), e.g. a forbidden-family member.
    pub fn pattern(k: usize, d: usize, values: Vec<S>) -> Result<Self> {
        let expected = k.pow(d as u32);
        if values.len() != expected {
            return Err(Error::Shape(format!("pattern needs {expected} values for [{k}]^{d}, got {}", values.len())));
        }
        Ok(Window { location: Coord(vec![1; d]), k, values })
    }

    pub fn location(&self) -> &Coord {
        &self.location
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.location.dim()
    }

    /// Row-major values.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Value at 0-based offset `j` inside the window, i.e. `A(location + j)`.
    pub fn at(&self, j: &[usize]) -> &S {
        let idx = j.iter().fold(0, |acc, &x| acc * self.k + x);
        &self.values[idx]
    }

    /// 0-based offsets of every cell in row-major order.
    pub fn offsets(&self) -> BoxIter {
        BoxIter::new(vec![0; self.d()], vec![self.k - 1; self.d()])
    }
}

/// Per-run record of queried cells.
#[derive(Clone, Debug)]
pub struct QueryLog {
    shape: Shape,
    raw: u64,
    distinct: HashSet<usize>,
}

impl QueryLog {
    pub fn new(shape: Shape) -> Self {
        QueryLog { shape, raw: 0, distinct: HashSet::new() }
    }

    /// Read `loc` from `array`, recording the query.
    pub fn read<'a, S: Symbol>(&mut self, array: &'a Array<S>, loc: &[usize]) -> Result<&'a S> {
        array.shape().check(loc)?;
        let idx = array.shape().linear(loc);
        Ok(self.read_linear(array, idx))
    }

    pub fn read_linear<'a, S: Symbol>(&mut self, array: &'a Array<S>, idx: usize) -> &'a S {
        self.raw += 1;
        self.distinct.insert(idx);
        array.get_linear(idx)
    }

    pub fn raw_count(&self) -> u64 {
        self.raw
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct.len()
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        self.shape.contains(c) && self.distinct.contains(&self.shape.linear(c))
    }

    /// Queried cells, sorted row-major.
    pub fn distinct_cells(&self) -> Vec<Coord> {
        let mut idx: Vec<usize> = self.distinct.iter().copied().collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| self.shape.coord(i)).collect()
    }
}

/// Number of cells where `a` and `b` differ.
pub fn hamming_distance<S: Symbol>(a: &Array<S>, b: &Array<S>) -> Result<usize> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.data().iter().zip(b.data()).filter(|(x, y)| x != y).count())
}

/// Change exactly `count` cells, chosen uniformly without replacement,
/// replacing each value `v` by `replace(v, rng)`. The rule must return a
/// value different from `v`.
pub fn plant_violations<S, R, F>(a: &Array<S>, count: usize, mut replace: F, rng: &mut R) -> Result<Array<S>>
where
    S: Symbol,
    R: Rng + ?Sized,
    F: FnMut(&S, &mut R) -> S,
{
    if count > a.len() {
        return Err(Error::Argument(format!("cannot plant {count} changes in {} cells", a.len())));
    }
    let mut out = a.clone();
    for idx in rand::seq::index::sample(rng, a.len(), count) {
        let new = replace(&a.data[idx], rng);
        if new == a.data[idx] {
            return Err(Error::Argument(format!("replacement rule kept value {new:?} unchanged")));
        }
        out.data[idx] = new;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(values: &[i64]) -> Array<i64> {
        Array::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn subarray_examples() {
        let a = line(&[1, 2, 3]);
        assert_eq!(a.subarray(&Coord::from([1]), 2).unwrap().values(), &[1, 2]);
        assert_eq!(a.subarray(&Coord::from([2]), 2).unwrap().values(), &[2, 3]);
        assert!(matches!(a.subarray(&Coord::from([3]), 2), Err(Error::Range(_))));

        let b = Array::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        let w = b.subarray(&Coord::from([1, 1]), 2).unwrap();
        assert_eq!(w.values(), b.data());
        assert_eq!(*w.at(&[1, 0]), 3);
    }

    #[test]
    fn subarray_matches_direct_indexing_exhaustively() {
        for d in 1..=3 {
            for n in 1..=6usize {
                if n.pow(d as u32) > 300 {
                    continue;
                }
                let a = Array::from_fn(n, d, |c| c.iter().fold(0i64, |acc, &x| acc * 10 + x as i64)).unwrap();
                for k in 1..=n {
                    for loc in BoxIter::new(vec![1; d], vec![n + 1 - k; d]) {
                        let w = a.subarray(&loc, k).unwrap();
                        for j in w.offsets() {
                            let cell = loc.offset(&j);
                            assert_eq!(w.at(&j), a.get(&cell).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hamming_examples() {
        let a = line(&[1, 2, 3]);
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &line(&[1, 9, 3])).unwrap(), 1);
        assert_eq!(hamming_distance(&line(&[3, 2, 1]), &a).unwrap(), 2);
        assert!(matches!(hamming_distance(&a, &line(&[1, 2])), Err(Error::Shape(_))));
    }

    #[test]
    fn query_log_dedups() {
        let a = line(&[5, 6, 7]);
        let mut log = QueryLog::new(a.shape());
        assert_eq!((log.raw_count(), log.distinct_count()), (0, 0));
        assert_eq!(*log.read(&a, &[2]).unwrap(), 6);
        log.read(&a, &[2]).unwrap();
        assert_eq!((log.raw_count(), log.distinct_count()), (2, 1));
        log.read(&a, &[1]).unwrap();
        log.read(&a, &[3]).unwrap();
        assert_eq!(log.distinct_count(), 3);
        assert!(log.read(&a, &[4]).is_err());
        assert_eq!(log.distinct_cells(), vec![Coord::from([1]), Coord::from([2]), Coord::from([3])]);
    }

    #[test]
    fn plant_exact_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = line(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let bump = |v: &i64, _: &mut ChaCha8Rng| v + 100;
        assert_eq!(plant_violations(&a, 0, bump, &mut rng).unwrap(), a);
        let b = plant_violations(&a, 2, bump, &mut rng).unwrap();
        assert_eq!(hamming_distance(&a, &b).unwrap(), 2);
        let c = plant_violations(&a, 8, bump, &mut rng).unwrap();
        assert_eq!(hamming_distance(&a, &c).unwrap(), 8);
        assert!(plant_violations(&a, 9, bump, &mut rng).is_err());
        assert!(plant_violations(&a, 1, |v: &i64, _: &mut ChaCha8Rng| *v, &mut rng).is_err());
    }

    #[test]
    fn linear_roundtrip_and_box_order() {
        let s = Shape::new(4, 3).unwrap();
        for (i, c) in s.full_box().iter().enumerate() {
            assert_eq!(s.linear(&c), i);
            assert_eq!(s.coord(i), c);
        }
        let b = BoxRegion::new(vec![2, 3], vec![4, 3]);
        let cells: Vec<Coord> = b.iter().collect();
        assert_eq!(cells, vec![Coord::from([2, 3]), Coord::from([3, 3]), Coord::from([4, 3])]);
        assert_eq!(b.window_locations(2).count(), 0);
        assert_eq!(BoxRegion::new(vec![1], vec![5]).window_locations(3).count(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arr(len: usize) -> impl Strategy<Value = Vec<i64>> {
            prop::collection::vec(0i64..3, len)
        }

        proptest! {
            #[test]
            fn hamming_is_a_metric(a in arr(9), b in arr(9), c in arr(9)) {
                let (a, b, c) = (
                    Array::new(3, 2, a).unwrap(),
                    Array::new(3, 2, b).unwrap(),
                    Array::new(3, 2, c).unwrap(),
                );
                let ab = hamming_distance(&a, &b).unwrap();
                prop_assert_eq!(ab, hamming_distance(&b, &a).unwrap());
                prop_assert!(ab <= hamming_distance(&a, &c).unwrap() + hamming_distance(&c, &b).unwrap());
                prop_assert_eq!(ab == 0, a == b);
            }

            #[test]
            fn reads_never_mutate(data in arr(16), reads in prop::collection::vec((1usize..=4, 1usize..=4), 0..20)) {
                let a = Array::new(4, 2, data).unwrap();
                let before = a.clone();
                let mut log = QueryLog::new(a.shape());
                for (x, y) in &reads {
                    log.read(&a, &[*x, *y]).unwrap();
                }
                prop_assert_eq!(&a, &before);
                prop_assert!(log.distinct_count() as u64 <= log.raw_count());
                prop_assert!(log.distinct_cells().iter().all(|c| a.shape().contains(c)));
            }
        }
    }
}
