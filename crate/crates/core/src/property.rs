//! k-local properties: a locality `k`, a dimension `d`, and a verdict on
//! `[k]^d` windows. An array satisfies the property iff none of its windows
//! is forbidden.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arrays::{Array, BoxIter, Coord, IntSymbol, Symbol, Window};
use crate::error::{Error, Result};
use crate::inference::{Convex1dEngine, LipschitzEngine, MonotoneEngine, RepairEngine};

type Verdict<S> = Arc<dyn Fn(&Window<S>) -> bool + Send + Sync>;

/// Which built-in family a property belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PropertyKind {
    Monotone,
    Lipschitz { c: i64 },
    Convex1d,
    SeparatelyConvex,
    Submodular,
    Explicit,
    Custom { name: String },
}

/// Runtime description of what an alphabet supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphabetKind {
    /// Integers: ordered, with arithmetic.
    Int,
    /// Opaque tokens: equality only.
    Tokens,
}

impl PropertyKind {
    /// Fails when the alphabet cannot support this property.
    pub fn check_alphabet(&self, alphabet: AlphabetKind) -> Result<()> {
        let needs = match self {
            PropertyKind::Monotone => Some("a total order"),
            PropertyKind::Lipschitz { .. }
            | PropertyKind::Convex1d
            | PropertyKind::SeparatelyConvex
            | PropertyKind::Submodular => Some("integer arithmetic"),
            PropertyKind::Explicit | PropertyKind::Custom { .. } => None,
        };
        match (needs, alphabet) {
            (Some(what), AlphabetKind::Tokens) => {
                Err(Error::Capability(format!("{self:?} needs {what}, token alphabets only support equality")))
            }
            _ => Ok(()),
        }
    }
}

/// An explicit finite family of forbidden `[k]^d` patterns.
#[derive(Clone, Debug)]
pub struct ExplicitFamily<S> {
    k: usize,
    d: usize,
    patterns: HashSet<Vec<S>>,
}

impl<S: Symbol> ExplicitFamily<S> {
    /// Each pattern is a row-major list of `k^d` symbols.
    pub fn new(k: usize, d: usize, patterns: impl IntoIterator<Item = Vec<S>>) -> Result<Self> {
        if k < 2 || d == 0 {
            return Err(Error::Argument(format!("need k >= 2 and d >= 1 (k={k}, d={d})")));
        }
        let size = k.pow(d as u32);
        let mut set = HashSet::new();
        for p in patterns {
            if p.len() != size {
                return Err(Error::Shape(format!("pattern of length {} is not [{k}]^{d}", p.len())));
            }
            set.insert(p);
        }
        Ok(ExplicitFamily { k, d, patterns: set })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, values: &[S]) -> bool {
        self.patterns.contains(values)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Vec<S>> {
        self.patterns.iter()
    }
}

/// A k-local property of `[n]^d` arrays.
#[derive(Clone)]
pub struct LocalProperty<S> {
    kind: PropertyKind,
    k: usize,
    d: usize,
    verdict: Verdict<S>,
    alphabet: Option<Arc<Vec<S>>>,
    engine: Option<Arc<dyn RepairEngine<S>>>,
    empty_family: bool,
}

impl<S> fmt::Debug for LocalProperty<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalProperty")
            .field("kind", &self.kind)
            .field("k", &self.k)
            .field("d", &self.d)
            .field("alphabet_size", &self.alphabet.as_ref().map(|a| a.len()))
            .field("fast_inference", &self.engine.is_some())
            .finish()
    }
}

/// Row-major index of a 0-based offset inside a `[k]^d` window.
fn offset_index(k: usize, j: &[usize]) -> usize {
    j.iter().fold(0, |acc, &x| acc * k + x)
}

/// Index pairs `(x, x + e_i)` for all axis-neighbours inside a `[k]^d` window.
fn neighbour_pairs(k: usize, d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in BoxIter::new(vec![0; d], vec![k - 1; d]) {
        for axis in 0..d {
            if j[axis] + 1 < k {
                let mut next = j.to_vec();
                next[axis] += 1;
                out.push((offset_index(k, &j), offset_index(k, &next)));
            }
        }
    }
    out
}

/// Index triples `(x, x + e_i, x + 2e_i)` along every axis line of a `[3]^d` window.
fn axis_triples(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for axis in 0..d {
        let mut hi = vec![2; d];
        hi[axis] = 0;
        for base in BoxIter::new(vec![0; d], hi) {
            let mut t = [0; 3];
            for (step, slot) in t.iter_mut().enumerate() {
                let mut j = base.to_vec();
                j[axis] = step;
                *slot = offset_index(3, &j);
            }
            out.push(t);
        }
    }
    out
}

/// `(x, x+e_i, x+e_j, x+e_i+e_j)` for every `i < j` and every square inside a `[2]^d` window.
fn unit_squares(d: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut hi = vec![1; d];
            hi[i] = 0;
            hi[j] = 0;
            for base in BoxIter::new(vec![0; d], hi) {
                let at = |di: usize, dj: usize| {
                    let mut v = base.to_vec();
                    v[i] += di;
                    v[j] += dj;
                    offset_index(2, &v)
                };
                out.push([at(0, 0), at(1, 0), at(0, 1), at(1, 1)]);
            }
        }
    }
    out
}

impl<S: Symbol> LocalProperty<S> {
    /// A property from an arbitrary pure verdict (`true` = forbidden).
    pub fn custom(
        name: impl Into<String>,
        k: usize,
        d: usize,
        verdict: impl Fn(&Window<S>) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        if k < 2 || d == 0 {
            return Err(Error::Argument(format!("need k >= 2 and d >= 1 (k={k}, d={d})")));
        }
        Ok(LocalProperty {
            kind: PropertyKind::Custom { name: name.into() },
            k,
            d,
            verdict: Arc::new(verdict),
            alphabet: None,
            engine: None,
            empty_family: false,
        })
    }

    /// Pattern-freeness for an explicit family over a finite alphabet.
    pub fn from_explicit(family: ExplicitFamily<S>, alphabet: Vec<S>) -> Result<Self> {
        let allowed: HashSet<&S> = alphabet.iter().collect();
        if allowed.len() != alphabet.len() {
            return Err(Error::Argument("alphabet lists a symbol twice".into()));
        }
        for p in family.patterns() {
            if let Some(bad) = p.iter().find(|s| !allowed.contains(s)) {
                return Err(Error::Argument(format!("pattern symbol {bad:?} is not in the alphabet")));
            }
        }
        let (k, d) = (family.k, family.d);
        let empty_family = family.is_empty();
        let family = Arc::new(family);
        Ok(LocalProperty {
            kind: PropertyKind::Explicit,
            k,
            d,
            verdict: Arc::new(move |w: &Window<S>| family.contains(w.values())),
            alphabet: Some(Arc::new(alphabet)),
            engine: None,
            empty_family,
        })
    }

    pub fn kind(&self) -> &PropertyKind {
        &self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The explicit finite alphabet, when one is declared.
    pub fn alphabet(&self) -> Option<&[S]> {
        self.alphabet.as_deref().map(Vec::as_slice)
    }

    pub fn engine(&self) -> Option<&dyn RepairEngine<S>> {
        self.engine.as_deref()
    }

    /// True when the property is defined by an empty forbidden family.
    pub fn forbids_nothing(&self) -> bool {
        self.empty_family
    }

    /// Declare a finite alphabet (enables generic inference).
    pub fn with_alphabet(mut self, alphabet: Vec<S>) -> Self {
        self.alphabet = Some(Arc::new(alphabet));
        self
    }

    /// Attach a specialised repairability engine.
    pub fn with_engine(mut self, engine: Arc<dyn RepairEngine<S>>) -> Self {
        self.engine = Some(engine);
        self
    }

    /// Drop any attached engine, forcing generic inference.
    pub fn without_engine(mut self) -> Self {
        self.engine = None;
        self
    }

    /// Verdict on a window already known to have shape `[k]^d`.
    pub fn forbidden(&self, w: &Window<S>) -> bool {
        (self.verdict)(w)
    }

    pub fn is_forbidden(&self, w: &Window<S>) -> Result<bool> {
        if w.k() != self.k || w.d() != self.d {
            return Err(Error::Shape(format!(
                "window is [{}]^{}, property expects [{}]^{}",
                w.k(),
                w.d(),
                self.k,
                self.d
            )));
        }
        Ok(self.forbidden(w))
    }

    /// First forbidden window location in row-major order, or `None` if `a`
    /// satisfies the property.
    pub fn satisfies(&self, a: &Array<S>) -> Result<Option<Coord>> {
        self.check_array(a)?;
        for loc in a.shape().full_box().window_locations(self.k) {
            let w = a.subarray(&loc, self.k)?;
            if self.forbidden(&w) {
                return Ok(Some(loc));
            }
        }
        Ok(None)
    }

    /// Shape (and, for explicit alphabets, symbol) compatibility of `a`.
    pub fn check_array(&self, a: &Array<S>) -> Result<()> {
        if a.d() != self.d {
            return Err(Error::Shape(format!("array has d={}, property expects d={}", a.d(), self.d)));
        }
        if a.n() < self.k {
            return Err(Error::Argument(format!("n={} is smaller than k={}", a.n(), self.k)));
        }
        if let Some(alpha) = &self.alphabet {
            if let Some(bad) = a.data().iter().find(|s| !alpha.contains(s)) {
                return Err(Error::Argument(format!("array symbol {bad:?} is outside the declared alphabet")));
            }
        }
        Ok(())
    }
}

impl<S: Symbol + Ord> LocalProperty<S> {
    /// `A(x) <= A(x + e_i)` for every `x` and axis `i`. 2-local.
    pub fn monotone(d: usize) -> Self {
        let pairs = neighbour_pairs(2, d);
        LocalProperty {
            kind: PropertyKind::Monotone,
            k: 2,
            d,
            verdict: Arc::new(move |w: &Window<S>| {
                let v = w.values();
                pairs.iter().any(|&(a, b)| v[a] > v[b])
            }),
            alphabet: None,
            engine: Some(Arc::new(MonotoneEngine)),
            empty_family: false,
        }
    }
}

impl<S: IntSymbol> LocalProperty<S> {
    /// `|A(x) - A(x + e_i)| <= c` for every `x` and axis `i`. 2-local.
    pub fn lipschitz(c: i64, d: usize) -> Result<Self> {
        if c < 0 {
            return Err(Error::Argument(format!("Lipschitz constant must be non-negative, got {c}")));
        }
        let pairs = neighbour_pairs(2, d);
        Ok(LocalProperty {
            kind: PropertyKind::Lipschitz { c },
            k: 2,
            d,
            verdict: Arc::new(move |w: &Window<S>| {
                let v = w.values();
                pairs.iter().any(|&(a, b)| (v[a].to_i64() - v[b].to_i64()).abs() > c)
            }),
            alphabet: None,
            engine: Some(Arc::new(LipschitzEngine { c })),
            empty_family: false,
        })
    }

    /// `A[x] - 2A[x+1] + A[x+2] >= 0`. 3-local, one-dimensional.
    pub fn convex_1d() -> Self {
        LocalProperty {
            kind: PropertyKind::Convex1d,
            k: 3,
            d: 1,
            verdict: Arc::new(|w: &Window<S>| {
                let v = w.values();
                v[0].to_i64() - 2 * v[1].to_i64() + v[2].to_i64() < 0
            }),
            alphabet: None,
            engine: Some(Arc::new(Convex1dEngine)),
            empty_family: false,
        }
    }

    /// Convex along every axis line. 3-local.
    pub fn separately_convex(d: usize) -> Self {
        let triples = axis_triples(d);
        LocalProperty {
            kind: PropertyKind::SeparatelyConvex,
            k: 3,
            d,
            verdict: Arc::new(move |w: &Window<S>| {
                let v = w.values();
                triples
                    .iter()
                    .any(|t| v[t[0]].to_i64() - 2 * v[t[1]].to_i64() + v[t[2]].to_i64() < 0)
            }),
            alphabet: None,
            engine: None,
            empty_family: false,
        }
    }

    /// `A(x) + A(x+e_i+e_j) <= A(x+e_i) + A(x+e_j)` for all `i < j`. 2-local.
    pub fn submodular(d: usize) -> Self {
        let squares = unit_squares(d);
        LocalProperty {
            kind: PropertyKind::Submodular,
            k: 2,
            d,
            verdict: Arc::new(move |w: &Window<S>| {
                let v = w.values();
                squares.iter().any(|q| {
                    v[q[0]].to_i64() + v[q[3]].to_i64() > v[q[1]].to_i64() + v[q[2]].to_i64()
                })
            }),
            alphabet: None,
            engine: None,
            empty_family: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pat(k: usize, d: usize, v: &[i64]) -> Window<i64> {
        Window::pattern(k, d, v.to_vec()).unwrap()
    }

    fn line(v: &[i64]) -> Array<i64> {
        Array::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn named_verdicts() {
        let mono = LocalProperty::<i64>::monotone(1);
        assert_eq!(mono.k(), 2);
        assert!(mono.is_forbidden(&pat(2, 1, &[3, 1])).unwrap());
        assert!(!mono.is_forbidden(&pat(2, 1, &[1, 3])).unwrap());
        assert!(mono.is_forbidden(&pat(3, 1, &[1, 2, 3])).is_err());

        let convex = LocalProperty::<i64>::convex_1d();
        assert_eq!(convex.k(), 3);
        assert!(convex.is_forbidden(&pat(3, 1, &[0, 2, 0])).unwrap());
        assert!(!convex.is_forbidden(&pat(3, 1, &[0, 0, 1])).unwrap());

        let sub = LocalProperty::<i64>::submodular(2);
        assert!(sub.is_forbidden(&pat(2, 2, &[0, 1, 1, 3])).unwrap());
        assert!(!sub.is_forbidden(&pat(2, 2, &[0, 1, 1, 2])).unwrap());

        let sep = LocalProperty::<i64>::separately_convex(2);
        // rows convex, middle column (1, 0, 1)... convex; last column (0, 5, 0) is not
        let w = pat(3, 2, &[0, 1, 0, 1, 0, 5, 4, 1, 0]);
        assert!(sep.is_forbidden(&w).unwrap());
        let ok = pat(3, 2, &[0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(!sep.is_forbidden(&ok).unwrap());
    }

    #[test]
    fn satisfies_examples() {
        let mono = LocalProperty::<i64>::monotone(1);
        assert_eq!(mono.satisfies(&line(&[1, 2, 3])).unwrap(), None);
        assert_eq!(mono.satisfies(&line(&[1, 3, 2])).unwrap(), Some(Coord::from([2])));
        let lip = LocalProperty::<i64>::lipschitz(1, 1).unwrap();
        assert_eq!(lip.satisfies(&line(&[0, 2])).unwrap(), Some(Coord::from([1])));
        assert!(matches!(
            LocalProperty::<i64>::convex_1d().satisfies(&line(&[1, 2])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn capability_checks() {
        assert!(PropertyKind::Monotone.check_alphabet(AlphabetKind::Tokens).is_err());
        assert!(PropertyKind::Lipschitz { c: 1 }.check_alphabet(AlphabetKind::Tokens).is_err());
        assert!(PropertyKind::Explicit.check_alphabet(AlphabetKind::Tokens).is_ok());
        assert!(PropertyKind::Submodular.check_alphabet(AlphabetKind::Int).is_ok());
        assert!(LocalProperty::<i64>::lipschitz(-1, 1).is_err());
    }

    #[test]
    fn explicit_family_validation() {
        assert!(ExplicitFamily::new(2, 1, vec![vec![1i64, 1, 1]]).is_err());
        let fam = ExplicitFamily::new(2, 1, vec![vec![1i64, 2]]).unwrap();
        assert!(LocalProperty::from_explicit(fam.clone(), vec![0, 1]).is_err());
        let p = LocalProperty::from_explicit(fam, vec![0, 1, 2]).unwrap();
        assert!(p.satisfies(&line(&[0, 5])).is_err());
        assert_eq!(p.satisfies(&line(&[0, 1, 2])).unwrap(), Some(Coord::from([2])));
    }

    #[test]
    fn empty_family_accepts_everything() {
        let fam = ExplicitFamily::<i64>::new(2, 2, Vec::<Vec<i64>>::new()).unwrap();
        let p = LocalProperty::from_explicit(fam, vec![0, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = Array::from_fn(4, 2, |_| rng.random_range(0..3i64)).unwrap();
            assert_eq!(p.satisfies(&a).unwrap(), None);
        }
    }

    /// Direct scan written independently of `satisfies`.
    fn any_forbidden_double_scan(p: &LocalProperty<i64>, a: &Array<i64>) -> bool {
        let (n, d, k) = (a.n(), a.d(), p.k());
        let mut found = false;
        for loc_idx in 0..(n - k + 1).pow(d as u32) {
            let mut loc = vec![0; d];
            let mut r = loc_idx;
            for slot in loc.iter_mut().rev() {
                *slot = r % (n - k + 1) + 1;
                r /= n - k + 1;
            }
            let mut vals = Vec::new();
            for off_idx in 0..k.pow(d as u32) {
                let mut cell = vec![0; d];
                let mut r = off_idx;
                for (slot, base) in cell.iter_mut().zip(&loc).rev() {
                    *slot = base + r % k;
                    r /= k;
                }
                vals.push(*a.get(&cell).unwrap());
            }
            found |= p.forbidden(&Window::pattern(k, d, vals).unwrap());
        }
        found
    }

    #[test]
    fn satisfies_equals_double_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=2 {
            let props: Vec<LocalProperty<i64>> = vec![
                LocalProperty::monotone(d),
                LocalProperty::lipschitz(1, d).unwrap(),
                LocalProperty::separately_convex(d),
                LocalProperty::submodular(d),
            ];
            for p in &props {
                for n in p.k()..=8 {
                    if d == 2 && n > 6 {
                        continue;
                    }
                    for _ in 0..40 {
                        let a = Array::from_fn(n, d, |_| rng.random_range(0..3i64)).unwrap();
                        let fast = p.satisfies(&a).unwrap().is_none();
                        assert_eq!(fast, !any_forbidden_double_scan(p, &a), "{p:?} on {a:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_1d_iff_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = LocalProperty::<i64>::monotone(1);
        for _ in 0..1000 {
            let n = rng.random_range(2..20);
            let mut v: Vec<i64> = (0..n).map(|_| rng.random_range(0..6)).collect();
            if rng.random_bool(0.5) {
                v.sort();
            }
            let mut sorted = v.clone();
            sorted.sort();
            assert_eq!(p.satisfies(&line(&v)).unwrap().is_none(), sorted == v);
        }
    }
}
