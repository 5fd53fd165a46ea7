use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use localtest_core::adversarial::{
    check_global, check_local, distinguishing_stats, farness_lower_bound, flow_path, gen_instance, AdversarialInstance,
    Data, GravityValue, Kind, Variant,
};
use localtest_core::{Array, Coord};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coord(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Coord {
    Coord::new((0..d).map(|_| rng.random_range(1..=n)).collect())
}

/// Change one field of one cell; returns the mutated cell.
fn mutate(inst: &AdversarialInstance, rng: &mut ChaCha8Rng) -> (Array<GravityValue>, Coord) {
    let (n, d) = (inst.params.n, inst.params.d);
    let at = random_coord(rng, n, d);
    let mut v = inst.array.get(&at).unwrap().clone();
    let old = v.clone();
    while v == old {
        match rng.random_range(0..3) {
            0 => v.self_ptr = random_coord(rng, n, d),
            1 => v.center_ptr = random_coord(rng, n, d),
            _ => match &mut v.data {
                Data::Set(s) => s.toggle(rng.random_range(0..s.len())),
                Data::Counts { zeros, ones } => {
                    let c = if rng.random_bool(0.5) { zeros } else { ones };
                    *c = if *c > 0 && rng.random_bool(0.5) { *c - 1 } else { *c + 1 };
                }
            },
        }
    }
    (inst.array.with(&at, v).unwrap(), at)
}

#[test]
fn local_and_global_checks_agree_on_set_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in [Kind::Accept, Kind::Reject] {
        for i in 0..1000 {
            let n = 6 + i % 7;
            let inst = gen_instance(n, 2, 2, kind, Variant::Set, &mut rng).unwrap();
            let (p, v) = (inst.params, inst.variant);
            let local = check_local(&inst.array, p, v);
            assert_eq!(local, check_global(&inst.array, p, v));
            assert_eq!(local, kind == Kind::Accept);
            let (m, at) = mutate(&inst, &mut rng);
            assert_eq!(check_local(&m, p, v), check_global(&m, p, v), "n={n} kind={kind:?} at={at:?}");
        }
    }
}

/// With k = 2 and d = 2 no 2x2 window holds the center cells together with
/// all of their in-flowing neighbours, so the local rules cannot pin down the
/// counts stored at the two centers. Every disagreement must sit there.
#[test]
fn local_and_global_checks_agree_on_counting_instances_off_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut center_gaps = 0;
    for kind in [Kind::Accept, Kind::Reject] {
        for i in 0..1000 {
            let n = 6 + i % 7;
            let inst = gen_instance(n, 2, 2, kind, Variant::Counting, &mut rng).unwrap();
            let (p, v) = (inst.params, inst.variant);
            assert_eq!(check_local(&inst.array, p, v), kind == Kind::Accept);
            assert_eq!(check_global(&inst.array, p, v), kind == Kind::Accept);
            let (m, at) = mutate(&inst, &mut rng);
            let (local, global) = (check_local(&m, p, v), check_global(&m, p, v));
            if local != global {
                assert!(at == inst.lower || at == inst.upper, "n={n} at={at:?}");
                assert!(local && !global);
                center_gaps += 1;
            }
        }
    }
    assert!(center_gaps < 100, "{center_gaps}");
}

#[test]
fn counting_checks_agree_at_larger_locality() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for i in 0..100 {
        let kind = if i % 2 == 0 { Kind::Accept } else { Kind::Reject };
        let inst = gen_instance(24, 2, 4, kind, Variant::Counting, &mut rng).unwrap();
        let (p, v) = (inst.params, inst.variant);
        assert_eq!(check_local(&inst.array, p, v), kind == Kind::Accept);
        let (m, at) = mutate(&inst, &mut rng);
        assert_eq!(check_local(&m, p, v), check_global(&m, p, v), "at={at:?}");
    }
}

/// Recompute every cell's data from the sources whose path passes it.
#[test]
fn data_is_the_union_over_paths_through_each_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for i in 0..50 {
        let n = 6 + i % 7;
        let inst = gen_instance(n, 2, 2, Kind::Accept, Variant::Set, &mut rng).unwrap();
        let t = inst.params.universe();
        let mut expect: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(t); n * n];
        let shape = inst.array.shape();
        for x in shape.full_box().iter().filter(|x| x[0] == 1 || x[0] == n) {
            let Data::Set(s) = &inst.array.get(&x).unwrap().data else { unreachable!() };
            assert_eq!(s.count_ones(..), 1);
            for z in flow_path(&x, &inst.lower, 2).unwrap() {
                expect[shape.linear(&z)].union_with(s);
            }
        }
        for z in shape.full_box().iter() {
            let Data::Set(s) = &inst.array.get(&z).unwrap().data else { unreachable!() };
            assert_eq!(*s, expect[shape.linear(&z)], "n={n} z={z:?}");
        }
    }
}

#[test]
fn reject_instances_are_quarter_far() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for i in 0..200 {
        let n = 6 + i % 3;
        let inst = gen_instance(n, 2, 2, Kind::Reject, Variant::Set, &mut rng).unwrap();
        let bound = farness_lower_bound(&inst);
        let (l1, u1) = (inst.lower[0], inst.upper[0]);
        // Exclusive cells per source: heights 1..l1-1 below, u1+1..n above.
        assert!(bound >= n * (l1 - 1).min(n - u1), "n={n} l1={l1} bound={bound}");
        assert!(4 * bound >= n * n, "n={n} l1={l1} bound={bound}");
    }
}

#[test]
fn reject_instances_show_no_collisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for i in 0..500 {
        let n = 6 + i % 7;
        let inst = gen_instance(n, 2, 2, Kind::Reject, Variant::Set, &mut rng).unwrap();
        let q: Vec<Coord> = (0..rng.random_range(1..=n * n)).map(|_| random_coord(&mut rng, n, 2)).collect();
        assert_eq!(distinguishing_stats(&inst, &q).n_collisions, 0);
    }
}

#[test]
fn visible_sources_grow_at_most_linearly_in_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let (n, d) = (12, 2);
    for q_size in [1usize, 5, 25] {
        let samples: Vec<f64> = (0..10_000)
            .map(|i| {
                let kind = if i % 2 == 0 { Kind::Accept } else { Kind::Reject };
                let inst = gen_instance(n, d, 2, kind, Variant::Set, &mut rng).unwrap();
                let q: Vec<Coord> =
                    sample(&mut rng, n * n, q_size).iter().map(|j| inst.array.shape().coord(j)).collect();
                distinguishing_stats(&inst, &q).i_size as f64
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let slack = 3.0 * (var / samples.len() as f64).sqrt();
        assert!(mean <= (7 * d * q_size) as f64 + slack, "|Q|={q_size} mean={mean}");
    }
}

#[test]
fn distinct_queries_see_distinct_sources() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let inst = gen_instance(9, 2, 2, Kind::Accept, Variant::Set, &mut rng).unwrap();
    let all: HashSet<Coord> = inst.array.shape().full_box().iter().collect();
    let q: Vec<Coord> = all.into_iter().collect();
    let s = distinguishing_stats(&inst, &q);
    assert_eq!(s.i_size, 18);
    assert_eq!(s.n_collisions, 9);
    assert_eq!(s.c_count, inst.array.data().iter().map(|v| v.data.weight()).sum::<usize>());
}
