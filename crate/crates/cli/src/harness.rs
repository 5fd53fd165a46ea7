//! Trial execution: `run` and `bench_scaling`.

use std::path::Path;
use std::time::Instant;

use localtest_core::io::{parse_array_json, read_array_binary, LoadedArray, LoadedFamily};
use localtest_core::rng::stream;
use localtest_core::testers::run_test;
use localtest_core::{Array, LocalProperty, Shape, Symbol, TestConfig};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InputSpec, PropertySpec};
use crate::error::HarnessError;
use crate::generators::generate;
use crate::report::{Aggregate, Report, TrialRow, VerdictLabel};

/// Worker count: the configured value (default: all cores), capped by
/// `LOCALTEST_THREADS`.
pub fn thread_count(configured: Option<usize>) -> usize {
    let base = configured.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var("LOCALTEST_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads))
        .build()
        .map_err(|e| HarnessError::Io(format!("cannot start worker threads: {e}")))
}

fn trial<S: Symbol>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    cfg: &ExperimentConfig,
    k: usize,
    i: usize,
) -> Result<TrialRow, HarnessError> {
    let tcfg = TestConfig { algo: cfg.algo, epsilon: cfg.epsilon, budget: cfg.budget };
    let mut rng = stream(cfg.seed, &format!("trial/{i}"));
    let start = cfg.timing.then(Instant::now);
    let v = run_test(prop, a, &tcfg, &mut rng)?;
    Ok(TrialRow {
        algo: cfg.algo,
        n: a.n(),
        d: a.d(),
        k,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        trial: i,
        verdict: if v.accept { VerdictLabel::Accept } else { VerdictLabel::Reject },
        distinct_queries: v.log.distinct_count(),
        raw_queries: v.log.raw_count(),
        runtime_ms: start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3),
    })
}

fn trials_on<S: Symbol>(
    prop: &LocalProperty<S>,
    a: &Array<S>,
    cfg: &ExperimentConfig,
    k: usize,
) -> Result<Vec<TrialRow>, HarnessError> {
    (0..cfg.trials).into_par_iter().map(|i| trial(prop, a, cfg, k, i)).collect()
}

fn load_array(path: &Path) -> Result<LoadedArray, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(b"LTAR") {
        return Ok(LoadedArray::Int(read_array_binary(&bytes)?));
    }
    let text = String::from_utf8(bytes).map_err(|_| HarnessError::Config(format!("{} is not UTF-8 JSON", path.display())))?;
    Ok(parse_array_json(&text)?)
}

fn run_file(cfg: &ExperimentConfig, n: usize, k: usize, path: &Path) -> Result<Vec<TrialRow>, HarnessError> {
    let loaded = load_array(path)?;
    let shape_ok = |a_n: usize, a_d: usize| {
        if a_n == n && a_d == cfg.d {
            Ok(())
        } else {
            Err(HarnessError::Config(format!("input is {a_n}^{a_d}, config says {n}^{}", cfg.d)))
        }
    };
    match loaded {
        LoadedArray::Int(a) => {
            shape_ok(a.n(), a.d())?;
            trials_on(&cfg.property.build_int(cfg.d)?, &a, cfg, k)
        }
        LoadedArray::Tokens { array, names } => {
            shape_ok(array.n(), array.d())?;
            let (PropertySpec::FamilyFile { .. }, Ok(LoadedFamily::Tokens { property, names: fam })) =
                (&cfg.property, cfg.property.load_family())
            else {
                return Err(HarnessError::Config("token arrays need a token family".into()));
            };
            if fam != names {
                return Err(HarnessError::Config("array and family declare different tokens".into()));
            }
            trials_on(&property, &array, cfg, k)
        }
    }
}

fn run_n(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<Vec<TrialRow>, HarnessError> {
    match &cfg.input {
        InputSpec::File { file } => run_file(cfg, n, k, file),
        InputSpec::Generator(g) => {
            let prop = cfg.property.build_int(cfg.d)?;
            let shape = Shape::new(n, cfg.d)?;
            if cfg.fresh_input && g.is_random() {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|i| {
                        let a = generate(g, &prop, shape, &mut stream(cfg.seed, &format!("gen/{n}/{i}")))?;
                        trial(&prop, &a, cfg, k, i)
                    })
                    .collect()
            } else {
                let a = generate(g, &prop, shape, &mut stream(cfg.seed, &format!("gen/{n}")))?;
                trials_on(&prop, &a, cfg, k)
            }
        }
    }
}

/// Execute every trial for every `n`, aggregate, and write the outputs if
/// the config names a path.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let k = cfg.validate()?;
    let workers = pool(cfg.threads)?;
    let mut rows = Vec::new();
    let mut aggregates = Vec::new();
    for n in cfg.n.values()? {
        let r = workers.install(|| run_n(cfg, n, k))?;
        if cfg.trials > 0 {
            aggregates.push(Aggregate::from_rows(&r, cfg.algo, n, cfg.d, k, cfg.epsilon));
        }
        rows.extend(r);
    }
    let report = Report { config: cfg.clone(), rows, aggregates };
    if let Some(out) = &cfg.output {
        report.write(out)?;
    }
    Ok(report)
}

/// `run` over a geometric `n` range, with the growth of mean queries per step.
pub fn bench_scaling(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let ns = cfg.n.values()?;
    let geometric = ns.windows(2).all(|w| w[1] % w[0] == 0 && w[1] / w[0] == ns[1] / ns[0] && w[1] > w[0]);
    if ns.len() < 2 || !geometric {
        return Err(HarnessError::Config(format!("bench needs a geometric n range, got {ns:?}")));
    }
    let mut quiet = cfg.clone();
    quiet.output = None;
    let mut report = run(&quiet)?;
    for i in 1..report.aggregates.len() {
        let prev = report.aggregates[i - 1].mean_queries;
        report.aggregates[i].growth_ratio = (prev > 0.0).then(|| report.aggregates[i].mean_queries / prev);
    }
    report.config = cfg.clone();
    if let Some(out) = &cfg.output {
        report.write(out)?;
    }
    Ok(report)
}
