//! Bodies of the `oracle`, `adversarial` and `grid-dump` subcommands. Each
//! returns the text to print so tests can call them directly.

use std::fmt::Write as _;

use localtest_core::adversarial::{gen_instance, Kind, Variant};
use localtest_core::inference::infer;
use localtest_core::io::{parse_array_json, LoadedArray};
use localtest_core::oracles::{exact_distance_ord, repairable_bruteforce};
use localtest_core::rng::stream;
use localtest_core::{BoundaryAssignment, BoxRegion, Grid, GridSystem, LocalProperty};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::PropertySpec;
use crate::error::HarnessError;

/// Parse `lo..hi` (inclusive) or a comma list into symbols.
pub fn parse_alphabet(text: &str) -> Result<Vec<i64>, HarnessError> {
    let bad = || HarnessError::Config(format!("bad alphabet {text:?}; use lo..hi or a,b,c"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    let mut v: Vec<i64> = text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Explicit flag, then the property's own alphabet, then the range of values seen.
fn pick_alphabet(prop: &LocalProperty<i64>, flag: Option<&[i64]>, seen: &[i64]) -> Vec<i64> {
    if let Some(a) = flag {
        return a.to_vec();
    }
    if let Some(a) = prop.alphabet() {
        return a.to_vec();
    }
    match (seen.iter().min(), seen.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo..=hi).collect(),
        _ => vec![0],
    }
}

/// `oracle distance`: exact Hamming distance to the property.
pub fn oracle_distance(
    property: &PropertySpec,
    array_json: &str,
    alphabet: Option<&[i64]>,
    budget: u64,
) -> Result<String, HarnessError> {
    let LoadedArray::Int(a) = parse_array_json(array_json)? else {
        return Err(HarnessError::Config("oracle distance needs an integer array".into()));
    };
    let prop = property.build_int(a.d())?;
    let sigma = pick_alphabet(&prop, alphabet, a.data());
    let r = exact_distance_ord(&prop, &a, &sigma, budget)?;
    let out = json!({
        "distance": r.distance,
        "relative": r.distance as f64 / a.len() as f64,
        "nearest": r.nearest.map(|b| b.data().to_vec()),
    });
    Ok(out.to_string())
}

/// A block closure with its boundary values, row-major over the closure and
/// `null` on the interior.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    pub closure_lo: Vec<usize>,
    pub closure_hi: Vec<usize>,
    pub interior_lo: Vec<usize>,
    pub interior_hi: Vec<usize>,
    pub values: Vec<Option<i64>>,
}

impl BoundaryFile {
    pub fn to_assignment(&self) -> Result<BoundaryAssignment<i64>, HarnessError> {
        let closure = BoxRegion::new(self.closure_lo.clone(), self.closure_hi.clone());
        let interior = BoxRegion::new(self.interior_lo.clone(), self.interior_hi.clone());
        if self.values.len() != closure.len() {
            return Err(HarnessError::Config(format!(
                "closure has {} cells but {} values were given",
                closure.len(),
                self.values.len()
            )));
        }
        let mut assigned = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            let c = closure.local_coord(i);
            match (v, interior.contains(&c)) {
                (Some(v), false) => assigned.push((c, *v)),
                (None, true) => {}
                _ => return Err(HarnessError::Config(format!("value at {c:?} must be null iff it is interior"))),
            }
        }
        Ok(BoundaryAssignment::new(closure, interior, assigned)?)
    }
}

/// `oracle repairable`: exhaustive repairability, with the inference
/// procedure's answer alongside for comparison.
pub fn oracle_repairable(
    property: &PropertySpec,
    boundary_json: &str,
    alphabet: Option<&[i64]>,
    budget: u64,
) -> Result<String, HarnessError> {
    let file: BoundaryFile =
        serde_json::from_str(boundary_json).map_err(|e| HarnessError::Config(format!("bad boundary file: {e}")))?;
    let boundary = file.to_assignment()?;
    let prop = property.build_int(file.closure_lo.len())?;
    let seen: Vec<i64> = file.values.iter().flatten().copied().collect();
    let sigma = pick_alphabet(&prop, alphabet, &seen);
    let brute = repairable_bruteforce(&prop, &boundary, &sigma, budget)?;
    let fast = infer(&prop, &boundary, false, budget).ok().map(|v| v.repairable);
    Ok(json!({ "repairable": brute, "inference": fast, "alphabet": sigma }).to_string())
}

/// `adversarial gen`: one instance as JSON, drawn from the "adversarial" stream.
pub fn adversarial_gen(n: usize, d: usize, k: usize, kind: Kind, variant: Variant, seed: u64) -> Result<String, HarnessError> {
    let inst = gen_instance(n, d, k, kind, variant, &mut stream(seed, "adversarial"))?;
    Ok(inst.to_json()?)
}

/// One line per interval: `G` for block cells, `.` for the dropped prefix.
/// Runs are written as `<len><char>`.
fn rle_axis(g: &Grid) -> String {
    let mut s = String::new();
    for &(_, len) in g.partition().intervals() {
        let dropped = (g.k() - 1).min(len);
        if dropped > 0 {
            let _ = write!(s, "{dropped}.");
        }
        if len > dropped {
            let _ = write!(s, "{}G", len - dropped);
        }
        s.push(' ');
    }
    s.trim_end().to_string()
}

/// `grid-dump`: block membership per axis for one grid, or for every level
/// of a grid system when `system` is set.
pub fn grid_dump(n: usize, d: usize, k: usize, w: usize, system: bool) -> Result<String, HarnessError> {
    let mut out = String::new();
    let mut dump = |label: String, g: &Grid| {
        let _ = writeln!(out, "{label} w={} intervals={} blocks={}", g.w(), g.intervals_per_axis(), g.block_count());
        for axis in 1..=d {
            let _ = writeln!(out, "  axis {axis}: {}", rle_axis(g));
        }
    };
    if system {
        let sys = GridSystem::new(n, d, k, w)?;
        for (i, g) in sys.grids().iter().enumerate() {
            dump(format!("level {i}/{}", sys.r()), g);
        }
    } else {
        let g = localtest_core::build_grid(n, d, k, w)?;
        dump("grid".into(), &g);
    }
    Ok(out)
}
