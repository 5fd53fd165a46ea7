//! Brute-force ground truth. Everything here is deliberately naive and keeps
//! its own window scanning so that agreement with the fast paths means
//! something.

use crate::arrays::{Array, Symbol, Window};
use crate::error::{Error, Result};
use crate::inference::BoundaryAssignment;
use crate::property::{LocalProperty, PropertyKind};

/// Default cap on candidate arrays or fills examined.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceResult<S> {
    pub distance: usize,
    pub nearest: Option<Array<S>>,
}

/// Does the row-major `values` over `[lo, hi]` contain a forbidden window?
fn has_forbidden<S: Symbol>(prop: &LocalProperty<S>, lo: &[usize], hi: &[usize], values: &[S]) -> bool {
    let d = lo.len();
    let k = prop.k();
    let side: Vec<usize> = (0..d).map(|a| hi[a] + 1 - lo[a]).collect();
    if side.iter().any(|&s| s < k) {
        return false;
    }
    let starts: Vec<usize> = side.iter().map(|&s| s - k + 1).collect();
    let total_starts: usize = starts.iter().product();
    let cells = k.pow(d as u32);
    let mut buf = Vec::with_capacity(cells);
    for t in 0..total_starts {
        // Decode t into a start offset per axis, first axis slowest.
        let mut start = vec![0; d];
        let mut r = t;
        for a in (0..d).rev() {
            start[a] = r % starts[a];
            r /= starts[a];
        }
        buf.clear();
        for u in 0..cells {
            let mut off = vec![0; d];
            let mut r = u;
            for a in (0..d).rev() {
                off[a] = r % k;
                r /= k;
            }
            let mut idx = 0;
            for a in 0..d {
                idx = idx * side[a] + start[a] + off[a];
            }
            buf.push(values[idx].clone());
        }
        let w = Window::pattern(k, d, buf.clone()).expect("k^d values");
        if prop.forbidden(&w) {
            return true;
        }
    }
    false
}

/// Whether `a` satisfies `prop`, by naive scan.
pub fn naive_satisfies<S: Symbol>(prop: &LocalProperty<S>, a: &Array<S>) -> bool {
    !has_forbidden(prop, &vec![1; a.d()], &vec![a.n(); a.d()], a.data())
}

fn candidate_count(alphabet: usize, cells: usize) -> Option<u64> {
    u32::try_from(cells).ok().and_then(|c| (alphabet as u64).checked_pow(c))
}

/// Advance a base-`s` odometer; false once it wraps around.
fn step(digits: &mut [usize], s: usize) -> bool {
    for x in digits.iter_mut().rev() {
        *x += 1;
        if *x < s {
            return true;
        }
        *x = 0;
    }
    false
}

/// Minimum number of edits to make `a` satisfy `prop` using only symbols
/// from `alphabet`, by enumerating every candidate array.
pub fn exact_distance<S: Symbol>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    alphabet: &[S],
    budget: u64,
) -> Result<DistanceResult<S>> {
    if a.d() != prop.d() {
        return Err(Error::Shape(format!("array d={} vs property d={}", a.d(), prop.d())));
    }
    let total = candidate_count(alphabet.len(), a.len())
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::Budget(format!("{}^{} candidates exceed budget {budget}", alphabet.len(), a.len())))?;
    let mut best: Option<DistanceResult<S>> = None;
    if total == 0 {
        return Err(Error::Capability("empty alphabet".into()));
    }
    let mut digits = vec![0; a.len()];
    loop {
        let values: Vec<S> = digits.iter().map(|&x| alphabet[x].clone()).collect();
        let dist = values.iter().zip(a.data()).filter(|(x, y)| x != y).count();
        if best.as_ref().is_none_or(|b| dist < b.distance) {
            let cand = Array::new(a.n(), a.d(), values)?;
            if naive_satisfies(prop, &cand) {
                best = Some(DistanceResult { distance: dist, nearest: Some(cand) });
            }
        }
        if !step(&mut digits, alphabet.len()) {
            break;
        }
    }
    best.ok_or_else(|| Error::Argument("no array over the alphabet satisfies the property".into()))
}

/// Distance from one-dimensional monotonicity: `n` minus the longest
/// non-decreasing subsequence. Works at any size.
pub fn monotone_1d_distance<S: Symbol + Ord>(a: &Array<S>) -> Result<DistanceResult<S>> {
    if a.d() != 1 {
        return Err(Error::Shape("the LNDS shortcut needs d = 1".into()));
    }
    let v = a.data();
    // tails[j] = index of the smallest possible last element of a
    // non-decreasing subsequence of length j + 1.
    let mut tails: Vec<usize> = Vec::new();
    let mut prev = vec![usize::MAX; v.len()];
    for i in 0..v.len() {
        let j = tails.partition_point(|&t| v[t] <= v[i]);
        if j > 0 {
            prev[i] = tails[j - 1];
        }
        if j == tails.len() {
            tails.push(i);
        } else {
            tails[j] = i;
        }
    }
    let mut keep = vec![false; v.len()];
    let mut cur = tails.last().copied().unwrap_or(usize::MAX);
    while cur != usize::MAX {
        keep[cur] = true;
        cur = prev[cur];
    }
    let first_kept = keep.iter().position(|&x| x).expect("nonempty array");
    let mut fill = v[first_kept].clone();
    let data: Vec<S> = v
        .iter()
        .zip(&keep)
        .map(|(x, &k)| {
            if k {
                fill = x.clone();
            }
            fill.clone()
        })
        .collect();
    Ok(DistanceResult { distance: v.len() - tails.len(), nearest: Some(Array::new(a.n(), 1, data)?) })
}

/// Exact distance for ordered alphabets, taking the LNDS shortcut for
/// one-dimensional monotonicity.
pub fn exact_distance_ord<S: Symbol + Ord>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    alphabet: &[S],
    budget: u64,
) -> Result<DistanceResult<S>> {
    if *prop.kind() == PropertyKind::Monotone && prop.d() == 1 && a.d() == 1 {
        monotone_1d_distance(a)
    } else {
        exact_distance(prop, a, alphabet, budget)
    }
}

/// Is `exact distance >= eps * n^d`?
pub fn verify_far<S: Symbol + Ord>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    eps: f64,
    alphabet: &[S],
    budget: u64,
) -> Result<bool> {
    let dist = exact_distance_ord(prop, a, alphabet, budget)?.distance;
    Ok(dist as f64 >= eps * a.len() as f64)
}

/// Whether some interior fill over `alphabet` makes the closure
/// forbidden-free, trying every fill.
pub fn repairable_bruteforce<S: Symbol>(
    prop: &LocalProperty<S>,
    boundary: &BoundaryAssignment<S>,
    alphabet: &[S],
    budget: u64,
) -> Result<bool> {
    let closure = boundary.closure();
    let free: Vec<usize> =
        boundary.slots().iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
    candidate_count(alphabet.len(), free.len())
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::Budget(format!("{}^{} fills exceed budget {budget}", alphabet.len(), free.len())))?;
    if alphabet.is_empty() && !free.is_empty() {
        return Ok(false);
    }
    let mut values: Vec<S> = boundary
        .slots()
        .iter()
        .map(|v| v.clone().unwrap_or_else(|| alphabet[0].clone()))
        .collect();
    let mut digits = vec![0; free.len()];
    loop {
        for (&slot, &x) in free.iter().zip(&digits) {
            values[slot] = alphabet[x].clone();
        }
        if !has_forbidden(prop, &closure.lo, &closure.hi, &values) {
            return Ok(true);
        }
        if !step(&mut digits, alphabet.len()) {
            return Ok(false);
        }
    }
}
