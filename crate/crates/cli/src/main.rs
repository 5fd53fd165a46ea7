use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use localtest_cli::commands::{adversarial_gen, grid_dump, oracle_distance, oracle_repairable, parse_alphabet};
use localtest_cli::{bench_scaling, run, ExperimentConfig, HarnessError, Overrides, PropertySpec, Report};
use localtest_core::adversarial::{Kind, Variant};
use localtest_core::Algo;

#[derive(Parser)]
#[command(name = "localtest", version, about = "Testers for k-local properties of d-dimensional arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run seeded trials and write a CSV report plus a JSON summary.
    Test(RunArgs),
    /// Like `test` over a geometric n range, reporting query growth per step.
    Bench(RunArgs),
    /// Exhaustive ground truth on small inputs.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Lower-bound instance generation.
    Adversarial {
        #[command(subcommand)]
        cmd: AdvCmd,
    },
    /// Print grid membership as run-length text per axis.
    GridDump {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        w: usize,
        /// Dump every level of the nested system instead of one grid.
        #[arg(long)]
        system: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// monotone, lipschitz:C, convex_1d, separately_convex, submodular, family:PATH
    #[arg(long)]
    property: Option<String>,
    #[arg(long)]
    algo: Option<String>,
    /// One or more sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Generator name, e.g. reverse_sorted or planted:0.1:alternating.
    #[arg(long)]
    generator: Option<String>,
    /// Array file (JSON or LTAR binary) instead of a generator.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    fresh_input: bool,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Exact Hamming distance of an array to the property.
    Distance {
        #[arg(long)]
        property: String,
        #[arg(long)]
        array: PathBuf,
        /// lo..hi or a,b,c; defaults to the property's alphabet or the value range.
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long, default_value_t = localtest_core::oracles::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Whether a block boundary admits a forbidden-free interior.
    Repairable {
        #[arg(long)]
        property: String,
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long, default_value_t = localtest_core::oracles::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Accept,
    Reject,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Set,
    Counting,
}

#[derive(Subcommand)]
enum AdvCmd {
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "set")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides, HarnessError> {
        let algo = self
            .algo
            .as_deref()
            .map(|a| a.parse::<Algo>())
            .transpose()
            .map_err(HarnessError::from)?;
        Ok(Overrides {
            property: self.property.clone(),
            algo,
            n: self.n.clone(),
            d: self.d,
            k: self.k,
            epsilon: self.epsilon,
            trials: self.trials,
            seed: self.seed,
            generator: self.generator.clone(),
            input_file: self.input.clone(),
            fresh_input: self.fresh_input,
            budget: self.budget,
            timing: self.timing,
            threads: self.threads,
            output: self.output.clone(),
        })
    }

    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let o = self.overrides()?;
        match &self.config {
            Some(path) => {
                let mut cfg = ExperimentConfig::load(path)?;
                cfg.apply(&o)?;
                Ok(cfg)
            }
            None => ExperimentConfig::from_overrides(&o),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))
}

fn summarize(report: &Report) -> String {
    let mut s = String::from("n\ttrials\trejection_rate\tmean_queries\tbound\tgrowth\n");
    for a in &report.aggregates {
        let growth = a.growth_ratio.map_or("-".to_string(), |g| format!("{g:.3}"));
        s.push_str(&format!(
            "{}\t{}\t{:.4}\t{:.1}\t{:.1}\t{growth}\n",
            a.n, a.trials, a.rejection_rate, a.mean_queries, a.theoretical_bound
        ));
    }
    s
}

fn execute(cli: Cli) -> Result<String, HarnessError> {
    match cli.cmd {
        Cmd::Test(args) => run(&args.config()?).map(|r| summarize(&r)),
        Cmd::Bench(args) => bench_scaling(&args.config()?).map(|r| summarize(&r)),
        Cmd::Oracle { cmd } => match cmd {
            OracleCmd::Distance { property, array, alphabet, budget } => {
                let sigma = alphabet.as_deref().map(parse_alphabet).transpose()?;
                oracle_distance(&PropertySpec::parse_flag(&property)?, &read(&array)?, sigma.as_deref(), budget)
            }
            OracleCmd::Repairable { property, boundary, alphabet, budget } => {
                let sigma = alphabet.as_deref().map(parse_alphabet).transpose()?;
                oracle_repairable(&PropertySpec::parse_flag(&property)?, &read(&boundary)?, sigma.as_deref(), budget)
            }
        },
        Cmd::Adversarial { cmd: AdvCmd::Gen { n, d, k, kind, variant, seed, out } } => {
            let kind = match kind {
                KindArg::Accept => Kind::Accept,
                KindArg::Reject => Kind::Reject,
            };
            let variant = match variant {
                VariantArg::Set => Variant::Set,
                VariantArg::Counting => Variant::Counting,
            };
            let json = adversarial_gen(n, d, k, kind, variant, seed)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, json).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(json),
            }
        }
        Cmd::GridDump { n, d, k, w, system } => grid_dump(n, d, k, w, system),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("localtest: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
