//! Benchmarks live in `benches/`. This crate holds the inputs they share.

use localtest_core::{Array, LocalProperty};

/// The reverse-sorted line `n - 1, ..., 0`.
pub fn reverse_sorted(n: usize) -> Array<i64> {
    Array::from_fn(n, 1, |c| (n - c[0]) as i64).expect("n >= 1")
}

/// `sum_i x_i` over `[n]^d`: monotone along every axis.
pub fn sorted(n: usize, d: usize) -> Array<i64> {
    Array::from_fn(n, d, |c| c.iter().sum::<usize>() as i64).expect("valid shape")
}

/// Random-looking family over `{0, 1, 2}` with locality `k` in one dimension.
pub fn sample_family(k: usize) -> LocalProperty<i64> {
    let mut patterns = Vec::new();
    let mut x: u64 = 0x9e37_79b9;
    for code in 0..3usize.pow(k as u32) {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        if x >> 62 == 0 {
            patterns.push((0..k).map(|i| (code / 3usize.pow(i as u32) % 3) as i64).collect());
        }
    }
    let family = localtest_core::ExplicitFamily::new(k, 1, patterns).expect("patterns have length k");
    LocalProperty::from_explicit(family, vec![0, 1, 2]).expect("alphabet covers the patterns")
}
