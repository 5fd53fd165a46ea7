//! Input generators: satisfying arrays per property and far inputs.

use localtest_core::arrays::Window;
use localtest_core::{plant_violations, Array, LocalProperty, PropertyKind, Shape};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::PropertySpec;
use crate::error::HarnessError;

/// Base array for planted violations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    #[default]
    Satisfying,
    Alternating,
    Sorted,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Constant {
        #[serde(default)]
        value: i64,
    },
    /// `sum_i (x_i - 1)`: monotone along every axis.
    Sorted,
    /// `sum_i (n - x_i)`: one-dimensional distance to monotone is `n - 1`.
    ReverseSorted,
    /// Checkerboard of `0` and `3c`: every axis-1 neighbour pair breaks the
    /// Lipschitz bound, so at least half the cells must change.
    Sawtooth,
    /// `-sum_i (x_i - m)^2`: strictly concave along each axis.
    ConcaveBump,
    /// Cycle through the alphabet along `sum_i x_i`.
    Alternating,
    /// A random array satisfying the property.
    Satisfying,
    /// `round(rho * n^d)` cells of a base array changed to other values.
    Planted {
        rho: f64,
        #[serde(default)]
        base: Base,
    },
}

impl GeneratorSpec {
    /// Flag form: `name`, `constant:<v>`, `planted:<rho>[:<base>]`.
    pub fn parse_flag(text: &str) -> Result<Self, HarnessError> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || HarnessError::Config(format!("unknown generator {text:?}"));
        Ok(match parts.as_slice() {
            ["constant"] => GeneratorSpec::Constant { value: 0 },
            ["constant", v] => GeneratorSpec::Constant { value: v.parse().map_err(|_| bad())? },
            ["sorted"] => GeneratorSpec::Sorted,
            ["reverse_sorted"] => GeneratorSpec::ReverseSorted,
            ["sawtooth"] => GeneratorSpec::Sawtooth,
            ["concave_bump"] => GeneratorSpec::ConcaveBump,
            ["alternating"] => GeneratorSpec::Alternating,
            ["satisfying"] => GeneratorSpec::Satisfying,
            ["planted", rho] => GeneratorSpec::Planted { rho: rho.parse().map_err(|_| bad())?, base: Base::Satisfying },
            ["planted", rho, base] => GeneratorSpec::Planted {
                rho: rho.parse().map_err(|_| bad())?,
                base: serde_json::from_value(serde_json::Value::String(base.to_string())).map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        })
    }

    pub fn validate(&self, property: &PropertySpec, d: usize) -> Result<(), HarnessError> {
        if let GeneratorSpec::Planted { rho, .. } = self {
            if !(0.0..=1.0).contains(rho) {
                return Err(HarnessError::Config(format!("rho must lie in [0, 1], got {rho}")));
            }
        }
        if matches!(self, GeneratorSpec::Satisfying | GeneratorSpec::Planted { base: Base::Satisfying, .. })
            && matches!(property, PropertySpec::FamilyFile { .. })
        {
            // Token families cannot be generated; integer ones can.
            property.build_int(d)?;
        }
        Ok(())
    }

    /// Whether two calls with different RNG states may differ.
    pub fn is_random(&self) -> bool {
        matches!(self, GeneratorSpec::Satisfying | GeneratorSpec::Planted { .. })
    }
}

fn sum_of(shape: Shape, f: impl Fn(usize) -> i64) -> Array<i64> {
    Array::from_fn(shape.n, shape.d, |c| c.iter().map(|&x| f(x)).sum()).expect("valid shape")
}

fn symbols(prop: &LocalProperty<i64>) -> Vec<i64> {
    prop.alphabet().map_or_else(|| vec![0, 1], <[i64]>::to_vec)
}

/// Random convex sequence of length `n`: sorted increments, summed.
fn convex_seq<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i64> {
    let mut inc: Vec<i64> = (1..n).map(|_| rng.random_range(-3..=3)).collect();
    inc.sort_unstable();
    std::iter::once(0).chain(inc).scan(rng.random_range(-5..=5), |acc, x| {
        *acc += x;
        Some(*acc)
    }).collect()
}

fn random_monotone<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> Array<i64> {
    let (n, d) = (shape.n, shape.d);
    let mut v = vec![0i64; shape.len()];
    for idx in 0..v.len() {
        let c = shape.coord(idx);
        let mut stride = 1;
        let mut best = 0;
        for a in (0..d).rev() {
            if c[a] > 1 {
                best = best.max(v[idx - stride]);
            }
            stride *= n;
        }
        v[idx] = best + rng.random_range(0..2);
    }
    Array::new(n, d, v).expect("valid shape")
}

/// Fill cells in row-major order, each with a random symbol that keeps the
/// one window ending at that cell allowed; restart on dead ends.
fn random_pattern_free<R: Rng + ?Sized>(prop: &LocalProperty<i64>, shape: Shape, rng: &mut R) -> Result<Array<i64>, HarnessError> {
    let alphabet = symbols(prop);
    let k = prop.k();
    'attempt: for _ in 0..100 {
        let mut v = vec![0i64; shape.len()];
        for idx in 0..v.len() {
            let c = shape.coord(idx);
            let mut cands = alphabet.clone();
            cands.shuffle(rng);
            let ends_window = c.iter().all(|&x| x >= k);
            let loc = localtest_core::Coord::new(c.iter().map(|&x| x.saturating_sub(k - 1).max(1)).collect());
            let mut placed = false;
            for s in cands {
                v[idx] = s;
                if !ends_window || !prop.forbidden(&Window::extract(&loc, k, |p| v[shape.linear(p)])) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'attempt;
            }
        }
        return Ok(Array::new(shape.n, shape.d, v).expect("valid shape"));
    }
    Err(HarnessError::Config("could not sample a satisfying array for this family".into()))
}

/// A random array satisfying `prop` (integer properties only).
pub fn satisfying<R: Rng + ?Sized>(prop: &LocalProperty<i64>, shape: Shape, rng: &mut R) -> Result<Array<i64>, HarnessError> {
    let (n, d) = (shape.n, shape.d);
    Ok(match prop.kind() {
        PropertyKind::Monotone => random_monotone(shape, rng),
        PropertyKind::Lipschitz { c } => {
            // A c-Lipschitz walk over the coordinate sum.
            let walk: Vec<i64> = (0..=d * n)
                .scan(0i64, |acc, _| {
                    *acc += rng.random_range(-*c..=*c);
                    Some(*acc)
                })
                .collect();
            Array::from_fn(n, d, |x| walk[x.iter().sum::<usize>()]).expect("valid shape")
        }
        PropertyKind::Convex1d => Array::new(n, 1, convex_seq(n, rng)).expect("valid shape"),
        PropertyKind::SeparatelyConvex => {
            let parts: Vec<Vec<i64>> = (0..d).map(|_| convex_seq(n, rng)).collect();
            Array::from_fn(n, d, |x| x.iter().enumerate().map(|(a, &i)| parts[a][i - 1]).sum()).expect("valid shape")
        }
        PropertyKind::Submodular => {
            // Modular part plus a concave function of the coordinate sum.
            let parts: Vec<Vec<i64>> = (0..d).map(|_| (0..n).map(|_| rng.random_range(-5..=5)).collect()).collect();
            let concave: Vec<i64> = convex_seq(d * n + 1, rng).into_iter().map(|v| -v).collect();
            Array::from_fn(n, d, |x| {
                x.iter().enumerate().map(|(a, &i)| parts[a][i - 1]).sum::<i64>() + concave[x.iter().sum::<usize>()]
            })
            .expect("valid shape")
        }
        PropertyKind::Explicit => random_pattern_free(prop, shape, rng)?,
        PropertyKind::Custom { name } => {
            return Err(HarnessError::Config(format!("no generator for custom property {name}")));
        }
    })
}

fn lipschitz_c(prop: &LocalProperty<i64>) -> i64 {
    match prop.kind() {
        PropertyKind::Lipschitz { c } => (*c).max(1),
        _ => 1,
    }
}

pub fn generate<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    prop: &LocalProperty<i64>,
    shape: Shape,
    rng: &mut R,
) -> Result<Array<i64>, HarnessError> {
    let n = shape.n;
    Ok(match spec {
        GeneratorSpec::Constant { value } => Array::filled(n, shape.d, *value).expect("valid shape"),
        GeneratorSpec::Sorted => sum_of(shape, |x| x as i64 - 1),
        GeneratorSpec::ReverseSorted => sum_of(shape, |x| (n - x) as i64),
        GeneratorSpec::Sawtooth => {
            let amp = 3 * lipschitz_c(prop);
            Array::from_fn(n, shape.d, |c| if c.iter().sum::<usize>() % 2 == 1 { amp } else { 0 }).expect("valid shape")
        }
        GeneratorSpec::ConcaveBump => {
            let m = (n as i64 + 1) / 2;
            sum_of(shape, |x| -(x as i64 - m).pow(2))
        }
        GeneratorSpec::Alternating => {
            let s = symbols(prop);
            Array::from_fn(n, shape.d, |c| s[c.iter().map(|&x| x - 1).sum::<usize>() % s.len()]).expect("valid shape")
        }
        GeneratorSpec::Satisfying => satisfying(prop, shape, rng)?,
        GeneratorSpec::Planted { rho, base } => {
            let base_spec = match base {
                Base::Satisfying => GeneratorSpec::Satisfying,
                Base::Alternating => GeneratorSpec::Alternating,
                Base::Sorted => GeneratorSpec::Sorted,
                Base::Constant => GeneratorSpec::Constant { value: 0 },
            };
            let a = generate(&base_spec, prop, shape, rng)?;
            let count = (rho * shape.len() as f64).round() as usize;
            match prop.alphabet().map(<[i64]>::to_vec) {
                Some(sigma) if sigma.len() >= 2 => plant_violations(
                    &a,
                    count,
                    |v, r| loop {
                        let s = sigma[r.random_range(0..sigma.len())];
                        if s != *v {
                            break s;
                        }
                    },
                    rng,
                )?,
                Some(_) => return Err(HarnessError::Config("planting needs at least two symbols".into())),
                None => plant_violations(
                    &a,
                    count,
                    |v, r| v + if r.random_bool(0.5) { 1 } else { -1 } * r.random_range(1..=3),
                    rng,
                )?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn props() -> Vec<(LocalProperty<i64>, usize)> {
        let no_adjacent_ones = localtest_core::ExplicitFamily::new(2, 1, vec![vec![1, 1]]).unwrap();
        let no_ones_square = localtest_core::ExplicitFamily::new(2, 2, vec![vec![1; 4]]).unwrap();
        vec![
            (LocalProperty::monotone(1), 1),
            (LocalProperty::monotone(2), 2),
            (LocalProperty::monotone(3), 3),
            (LocalProperty::lipschitz(2, 1).unwrap(), 1),
            (LocalProperty::lipschitz(1, 2).unwrap(), 2),
            (LocalProperty::convex_1d(), 1),
            (LocalProperty::separately_convex(2), 2),
            (LocalProperty::submodular(2), 2),
            (LocalProperty::from_explicit(no_adjacent_ones, vec![0, 1]).unwrap(), 1),
            (LocalProperty::from_explicit(no_ones_square, vec![0, 1]).unwrap(), 2),
        ]
    }

    #[test]
    fn satisfying_arrays_satisfy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, d) in props() {
            for n in [3, 7, 12] {
                for _ in 0..20 {
                    let a = satisfying(&p, Shape::new(n, d).unwrap(), &mut rng).unwrap();
                    assert_eq!(p.satisfies(&a).unwrap(), None, "{:?} n={n}", p.kind());
                }
            }
        }
    }

    #[test]
    fn flag_forms() {
        assert_eq!(GeneratorSpec::parse_flag("planted:0.1:alternating").unwrap(), GeneratorSpec::Planted {
            rho: 0.1,
            base: Base::Alternating
        });
        assert_eq!(GeneratorSpec::parse_flag("constant:4").unwrap(), GeneratorSpec::Constant { value: 4 });
        assert!(GeneratorSpec::parse_flag("planted").is_err());
    }

    #[test]
    fn planted_changes_the_requested_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = LocalProperty::monotone(1);
        let shape = Shape::new(100, 1).unwrap();
        let base = generate(&GeneratorSpec::Sorted, &p, shape, &mut rng).unwrap();
        let a = generate(&GeneratorSpec::Planted { rho: 0.1, base: Base::Sorted }, &p, shape, &mut rng).unwrap();
        assert_eq!(localtest_core::hamming_distance(&a, &base).unwrap(), 10);
    }
}
