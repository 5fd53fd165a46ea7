//! Sublinear testers for k-local properties of d-dimensional arrays.
//!
//! A property is k-local when it is defined by a family of forbidden
//! `[k]^d` consecutive patterns. The testers sample blocks of nested dyadic
//! grids, read only their boundaries (and a few full closures), and reject
//! exactly when some sampled block provably cannot be completed without a
//! forbidden pattern.

pub mod adversarial;
pub mod arrays;
pub mod error;
pub mod grid;
pub mod inference;
pub mod io;
pub mod oracles;
pub mod property;
pub mod rng;
pub mod testers;

pub use arrays::{hamming_distance, plant_violations, Array, BoxRegion, Coord, IntSymbol, QueryLog, Shape, Symbol, Token, Window};
pub use error::{Error, Result};
pub use grid::{build_grid, interval_partition, Block, Grid, GridSystem, IntervalPartition, Parent};
pub use inference::{BoundaryAssignment, RepairEngine, RepairVerdict};
pub use property::{AlphabetKind, ExplicitFamily, LocalProperty, PropertyKind};
pub use testers::{Algo, Evidence, TestConfig, Verdict};
